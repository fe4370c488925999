//! Worked examples through the public API. Expected values are closed forms
//! frozen as literals.

use std::sync::Arc;

use ipm_core::homotopy::{deformation_homotopy, fibre_homotopy, lift_witness, track, uniform_grid, HomotopyKind};
use ipm_core::maxplus::MaxPlus;
use ipm_core::subspace::o_delta_contains;
use ipm_core::topology::{
    bracket_contains, openness_check, refine_to_bracket, subbase_contains, BracketNeighborhood, SubbaseNeighborhood,
};
use ipm_core::*;

use std::f64::consts::LN_2 as LN2;

const LN3: f64 = 1.098_612_288_668_109_8;
const LN4: f64 = 1.386_294_361_119_890_6;

fn line(xs: &[(&str, f64)]) -> Arc<FiniteMetricSpace> {
    Arc::new(build_space(xs.iter().map(|&(id, x)| PointSpec::new(id, vec![x])).collect(), None).unwrap())
}

fn abc() -> Arc<FiniteMetricSpace> {
    line(&[("a", 0.0), ("b", 1.0), ("c", 2.0)])
}

fn m(space: &Arc<FiniteMetricSpace>, atoms: &[(&str, f64)]) -> IdempotentMeasure {
    IdempotentMeasure::from_ids(space.clone(), atoms, Normalize::Reject).unwrap()
}

fn weights(mu: &IdempotentMeasure) -> Vec<(String, f64)> {
    mu.atoms()
        .iter()
        .map(|&(p, w)| (mu.space().id(p).to_string(), w.value()))
        .collect()
}

fn w(atoms: &[(&str, f64)]) -> Vec<(String, f64)> {
    atoms.iter().map(|&(id, x)| (id.to_string(), x)).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12
}

#[test]
fn frozen_constants_match_std() {
    assert_eq!(LN3, 3f64.ln());
    assert_eq!(LN4, 4f64.ln());
}

#[test]
fn ln_coeffs_values() {
    let half = ln_coeffs(0.5).unwrap();
    assert_eq!((half.start, half.end), (MaxPlus::ONE, MaxPlus::ONE));
    let zero = ln_coeffs(0.0).unwrap();
    assert!(zero.end.is_bottom());
    assert_eq!(zero.start, MaxPlus::ONE);
    let c = ln_coeffs(0.75).unwrap();
    assert!(close(c.start.value(), -LN3));
    assert_eq!(c.end, MaxPlus::ONE);
    assert!(ln_coeffs(1.5).is_err());
}

#[test]
fn canonical_forms() {
    let s = abc();
    let merged = IdempotentMeasure::from_ids(s.clone(), &[("a", 0.0), ("a", -2.0)], Normalize::Reject).unwrap();
    assert_eq!(weights(&merged), w(&[("a", 0.0)]));
    let raw = [
        (s.point("a").unwrap(), MaxPlus::BOTTOM),
        (s.point("b").unwrap(), MaxPlus::ONE),
    ];
    let dropped = IdempotentMeasure::canonicalize(s.clone(), raw, Normalize::Reject).unwrap();
    assert_eq!(weights(&dropped), w(&[("b", 0.0)]));
    let shifted = IdempotentMeasure::from_ids(s.clone(), &[("a", -1.0), ("b", -2.0)], Normalize::Shift).unwrap();
    assert_eq!(weights(&shifted), w(&[("a", 0.0), ("b", -1.0)]));
    assert!(IdempotentMeasure::from_ids(s, &[("a", -1.0), ("b", -2.0)], Normalize::Reject).is_err());
}

#[test]
fn evaluation_and_axioms() {
    let s = abc();
    let mu = m(&s, &[("a", 0.0), ("b", -1.5)]);
    let phi = TestFunction::tight(s.clone(), vec![1.0, 5.0, 2.0]).unwrap();
    assert_eq!(mu.evaluate(&phi).unwrap(), 3.5);
    assert_eq!(
        mu.evaluate(&TestFunction::constant(s.clone(), -7.25).unwrap()).unwrap(),
        -7.25
    );
    let r = verify_axioms(&mu, &phi, &phi, 0.0).unwrap();
    assert_eq!((r.normalization, r.homogeneity, r.additivity), (0.0, 0.0, 0.0));
}

#[test]
fn support_and_oracle() {
    let s = line(&[("a", 0.0), ("b", 1.0), ("c", 2.0), ("d", 3.0)]);
    let mu = m(&s, &[("a", 0.0), ("c", -1.5)]);
    let ids = |v: Vec<Point>| v.into_iter().map(|p| s.id(p).to_string()).collect::<Vec<_>>();
    assert_eq!(ids(mu.support()), ["a", "c"]);
    assert_eq!(ids(support_oracle(&mu).unwrap()), ["a", "c"]);
    let full = m(&s, &[("a", 0.0), ("b", -1.0), ("c", -2.0), ("d", -3.0)]);
    assert_eq!(support_oracle(&full).unwrap().len(), 4);
}

#[test]
fn pushforward_merges_by_max() {
    let x = abc();
    let y = line(&[("p", 0.0), ("q", 1.0)]);
    let f = SpaceMap::new(x.clone(), y.clone(), vec![Point(0), Point(0), Point(1)]).unwrap();
    let mu = m(&x, &[("a", 0.0), ("b", -2.0), ("c", -2.0)]);
    assert_eq!(weights(&pushforward(&f, &mu).unwrap()), w(&[("p", 0.0), ("q", -2.0)]));
    assert_eq!(pushforward(&SpaceMap::identity(x.clone()), &mu).unwrap(), mu);

    // Evaluation identity ν(ψ) = μ(ψ ∘ f) over all ψ: Y → {0, 1, 2}.
    let y3 = line(&[("u", 0.0), ("v", 1.0), ("z", 2.0)]);
    let g = SpaceMap::new(x.clone(), y3.clone(), vec![Point(2), Point(0), Point(2)]).unwrap();
    let nu = pushforward(&g, &mu).unwrap();
    for code in 0..27 {
        let vals = vec![(code % 3) as f64, (code / 3 % 3) as f64, (code / 9) as f64];
        let psi = TestFunction::tight(y3.clone(), vals).unwrap();
        assert_eq!(
            nu.evaluate(&psi).unwrap(),
            mu.evaluate(&psi.pullback(&g).unwrap()).unwrap()
        );
    }
}

#[test]
fn tropical_combination_cases() {
    let s = abc();
    let mu = m(&s, &[("a", 0.0), ("b", -2.0)]);
    let da = IdempotentMeasure::dirac(s.clone(), Point(0)).unwrap();
    let r = tropical_combination(MaxPlus::finite(-1.0).unwrap(), &da, MaxPlus::ONE, &mu).unwrap();
    assert_eq!(r, mu);
    assert_eq!(
        tropical_combination(MaxPlus::BOTTOM, &da, MaxPlus::ONE, &mu).unwrap(),
        mu
    );
    assert_eq!(
        tropical_combination(MaxPlus::ONE, &da, MaxPlus::BOTTOM, &mu).unwrap(),
        da
    );
}

#[test]
fn gap_between_diracs() {
    let s = abc();
    let (da, db) = (
        IdempotentMeasure::dirac(s.clone(), Point(0)).unwrap(),
        IdempotentMeasure::dirac(s.clone(), Point(1)).unwrap(),
    );
    let phi = TestFunction::tight(s.clone(), vec![0.25, 1.0, 0.0]).unwrap();
    assert_eq!(eval_gap(&da, &db, std::slice::from_ref(&phi)).unwrap(), 0.75);
    assert_eq!(eval_gap(&da, &da, &[phi]).unwrap(), 0.0);
}

#[test]
fn classification_and_retraction() {
    let s = abc();
    let c = classify(&m(&s, &[("a", 0.0), ("b", -1.0)]));
    assert!(!c.in_if);
    let tie = classify(&m(&s, &[("a", 0.0), ("b", 0.0)]));
    assert!(!tie.in_if && tie.top.is_none());
    let d = classify(&IdempotentMeasure::dirac(s.clone(), Point(2)).unwrap());
    assert!(d.in_if && d.support_size == 1 && d.top == Some(Point(2)));

    let mu = m(&s, &[("a", 0.0), ("b", -1.5)]);
    assert_eq!(weights(&retract_to_dirac(&mu).unwrap()), w(&[("a", 0.0)]));
    assert!(retract_to_dirac(&m(&s, &[("a", 0.0), ("b", 0.0)])).is_err());
    assert!(fibre_contains(Point(0), &mu));
    assert!(!fibre_contains(Point(1), &mu));

    assert!(o_delta_contains(Point(0), &m(&s, &[("a", 0.0), ("b", -0.8)])));
    assert!(!o_delta_contains(Point(0), &m(&s, &[("a", 0.0), ("b", -0.5)])));
    assert_eq!(ipm_core::subspace::o_delta_threshold(), -LN2);
}

#[test]
fn neighborhood_retraction_variants() {
    let s = abc();
    let two = m(&s, &[("a", 0.0), ("b", -0.8)]);
    for v in [RetractVariant::PaperLiteral, RetractVariant::AtomClamp] {
        assert_eq!(
            weights(&neighborhood_retract(&two, v).unwrap()),
            w(&[("a", 0.0), ("b", -LN3)])
        );
    }
    let three = m(&s, &[("a", 0.0), ("b", -0.8), ("c", -2.0)]);
    assert_eq!(
        weights(&neighborhood_retract(&three, RetractVariant::PaperLiteral).unwrap()),
        w(&[("a", 0.0), ("b", -LN4), ("c", -LN4)])
    );
    assert_eq!(
        weights(&neighborhood_retract(&three, RetractVariant::AtomClamp).unwrap()),
        w(&[("a", 0.0), ("b", -LN4), ("c", -2.0)])
    );
    let inside = m(&s, &[("a", 0.0), ("b", -1.5)]);
    assert_eq!(
        neighborhood_retract(&inside, RetractVariant::PaperLiteral).unwrap(),
        inside
    );
}

#[test]
fn ambient_retraction() {
    let y = line(&[("y1", 0.0), ("y2", 1.0), ("y3", 3.0)]);
    let nu = m(&y, &[("y1", 0.0), ("y2", -2.0), ("y3", -1.5)]);
    let merged = ambient_merge(&nu, &[Point(0), Point(1)]).unwrap();
    assert_eq!(weights(&merged), w(&[("y1", 0.0), ("y2", -2.0)]));
    let inside = m(&y, &[("y1", 0.0), ("y2", -2.0)]);
    assert_eq!(ambient_merge(&inside, &[Point(0), Point(1)]).unwrap(), inside);

    let r = [(Point(0), Point(0)), (Point(1), Point(0))].into_iter().collect();
    let data = AmbientRetractionData::new(y.clone(), vec![Point(0)], vec![Point(0), Point(1)], &r).unwrap();
    assert_eq!(weights(&ambient_retract(&nu, &data).unwrap()), w(&[("y1", 0.0)]));
    let d2 = IdempotentMeasure::dirac(y.clone(), Point(1)).unwrap();
    assert_eq!(weights(&ambient_retract(&d2, &data).unwrap()), w(&[("y1", 0.0)]));
}

#[test]
fn homotopy_values() {
    let s = abc();
    let mu = m(&s, &[("a", 0.0), ("b", -1.5)]);
    let a = Point(0);
    assert_eq!(weights(&fibre_homotopy(&mu, a, 0.0).unwrap()), w(&[("a", 0.0)]));
    let quarter = fibre_homotopy(&mu, a, 0.25).unwrap();
    assert!(close(quarter.atoms()[1].1.value(), -2.598_612_288_668_11));
    assert_eq!(fibre_homotopy(&mu, a, 0.75).unwrap(), mu);

    assert_eq!(deformation_homotopy(&mu, 0.0).unwrap(), mu);
    let d = deformation_homotopy(&mu, 0.75).unwrap();
    assert!(close(d.atoms()[1].1.value(), -1.5 - LN3));
    let dirac = IdempotentMeasure::dirac(s.clone(), Point(1)).unwrap();
    for t in uniform_grid(11).unwrap() {
        assert_eq!(deformation_homotopy(&dirac, t).unwrap(), dirac);
    }

    let tr = track(HomotopyKind::Deformation, &mu, &uniform_grid(3).unwrap()).unwrap();
    assert_eq!(tr.states()[0], mu);
    assert_eq!(tr.states()[1], mu);
    assert_eq!(weights(&tr.states()[2]), w(&[("a", 0.0)]));
    let fibre = track(HomotopyKind::Fibre(a), &mu, &[0.0, 1.0]).unwrap();
    assert_eq!(weights(&fibre.states()[0]), w(&[("a", 0.0)]));
    assert_eq!(fibre.states()[1], mu);
}

#[test]
fn lifted_witness_relabels_atoms() {
    let s = abc();
    let id = SpaceMap::identity(s.clone());
    let h1 = SpaceMap::new(s.clone(), s.clone(), vec![Point(0), Point(2), Point(2)]).unwrap();
    let hw = HomotopyWitness::tight(vec![id, h1]).unwrap();
    let mu = m(&s, &[("a", 0.0), ("b", -2.0)]);
    let tracks = lift_witness(&hw, std::slice::from_ref(&mu)).unwrap();
    let last = tracks[0].states.last().unwrap();
    assert_eq!(weights(last), w(&[("a", 0.0), ("c", -2.0)]));

    let collapse = HomotopyWitness::tight(vec![
        SpaceMap::identity(s.clone()),
        SpaceMap::constant(s.clone(), s.clone(), Point(1)).unwrap(),
    ])
    .unwrap();
    assert!(verify_collapse(&collapse));
    let sample = [mu.clone(), m(&s, &[("c", 0.0), ("a", -0.5)])];
    for t in lift_witness(&collapse, &sample).unwrap() {
        assert_eq!(weights(t.states.last().unwrap()), w(&[("b", 0.0)]));
    }
}

#[test]
fn contraction_witness_on_five_points() {
    let s = line(&[("p0", 0.0), ("p1", 0.25), ("p2", 0.5), ("p3", 0.75), ("p4", 1.0)]);
    let k_steps = 10;
    let steps = (0..=k_steps)
        .map(|k| {
            let scale = 1.0 - k as f64 / k_steps as f64;
            let table = s.points().map(|p| s.nearest(&[s.coords(p)[0] * scale])).collect();
            SpaceMap::new(s.clone(), s.clone(), table).unwrap()
        })
        .collect();
    let hw = HomotopyWitness::tight(steps).unwrap();
    assert!(verify_collapse(&hw));
    assert!(hw.step_bound() <= 0.25);
}

#[test]
fn bracket_and_subbase_examples() {
    let s = line(&[("x0", 0.0), ("x05", 0.05), ("x5", 0.5), ("x95", 0.95), ("x1", 1.0)]);
    let mu = m(&s, &[("x0", 0.0), ("x1", -2.0)]);
    let n = BracketNeighborhood::new(mu.clone(), vec![0.1, 0.1], 0.5).unwrap();
    assert!(bracket_contains(&n, &m(&s, &[("x05", 0.0), ("x95", -1.8)])).unwrap());
    assert!(bracket_contains(&n, &mu).unwrap());
    assert!(!bracket_contains(&n, &m(&s, &[("x05", 0.0), ("x5", -1.0), ("x95", -1.8)])).unwrap());

    let ab = line(&[("a", 0.0), ("b", 1.0)]);
    let (da, db) = (
        IdempotentMeasure::dirac(ab.clone(), Point(0)).unwrap(),
        IdempotentMeasure::dirac(ab.clone(), Point(1)).unwrap(),
    );
    let phi = TestFunction::tight(ab.clone(), vec![0.0, 1.0]).unwrap();
    assert!(!subbase_contains(&SubbaseNeighborhood::new(da.clone(), phi.clone(), 0.5).unwrap(), &db).unwrap());
    assert!(subbase_contains(&SubbaseNeighborhood::new(da.clone(), phi.clone(), 2.0).unwrap(), &db).unwrap());

    let refined = refine_to_bracket(&SubbaseNeighborhood::new(da, phi, 0.5).unwrap());
    assert_eq!(refined.radii(), [0.25]);
    assert_eq!(refined.epsilon(), 0.25);
}

#[test]
fn openness_example() {
    let pts: Vec<(String, f64)> = (0..11)
        .map(|i| (format!("g{i}"), -0.09 + 0.018 * i as f64))
        .chain([("far".to_string(), 1.0)])
        .collect();
    let refs: Vec<(&str, f64)> = pts.iter().map(|(id, x)| (id.as_str(), *x)).collect();
    let s = line(&refs);
    let mu = m(&s, &[("g5", 0.0), ("far", -2.0)]);
    let grid: Vec<Point> = (0..11).map(Point).collect();
    let n = BracketNeighborhood::new(mu.clone(), vec![0.1, 0.1], 1.0).unwrap();
    let report = openness_check(&n, &grid, std::slice::from_ref(&mu)).unwrap();
    assert!(report.passed());
    assert_eq!(report.witnesses_checked, 11);

    let wide = BracketNeighborhood::new(mu.clone(), vec![0.1, 0.1], 1.2).unwrap();
    assert!(openness_check(&wide, &grid, &[]).is_err());
    let single = openness_check(&n, &[Point(5)], &[]).unwrap();
    assert!(single.passed());
}
