use std::sync::Arc;

use ipm_core::homotopy::{deformation_homotopy, fibre_homotopy};
use ipm_core::maxplus::MaxPlus;
use ipm_core::subspace::{if_threshold, o_delta_threshold};
use ipm_core::wire::{parse_measure, parse_space, MeasureDoc, SpaceDoc};
use ipm_core::*;
use proptest::prelude::*;

fn space_of(coords: &[f64]) -> Arc<FiniteMetricSpace> {
    let pts = coords
        .iter()
        .enumerate()
        .map(|(i, &x)| PointSpec::new(format!("p{i}"), vec![x]))
        .collect();
    Arc::new(build_space(pts, None).unwrap())
}

fn space() -> impl Strategy<Value = Arc<FiniteMetricSpace>> {
    // Positive gaps keep the points distinct.
    prop::collection::vec(0.01..3.0f64, 1..9).prop_map(|gaps| {
        let coords: Vec<f64> = gaps
            .iter()
            .scan(0.0, |x, g| {
                *x += g;
                Some(*x)
            })
            .collect();
        space_of(&coords)
    })
}

/// Raw (index, weight) pairs, shifted so the largest weight is 0.
fn measure_on(s: Arc<FiniteMetricSpace>) -> impl Strategy<Value = IdempotentMeasure> {
    let n = s.len();
    prop::collection::vec((0..n, -8.0..0.0f64), 1..=n).prop_map(move |raw| {
        let raw = raw.into_iter().map(|(i, w)| (Point(i), MaxPlus::finite(w).unwrap()));
        IdempotentMeasure::canonicalize(s.clone(), raw, Normalize::Shift).unwrap()
    })
}

fn space_and_measure() -> impl Strategy<Value = IdempotentMeasure> {
    space().prop_flat_map(measure_on)
}

/// A measure of I_f: top at `top`, others at or below the threshold.
fn if_measure() -> impl Strategy<Value = IdempotentMeasure> {
    space()
        .prop_flat_map(|s| {
            let n = s.len();
            (Just(s), 0..n, prop::collection::vec((0..n, 0.0..6.0f64), 0..n))
        })
        .prop_map(|(s, top, rest)| {
            let tau = if_threshold(s.len());
            let raw = rest
                .into_iter()
                .filter(|&(i, _)| i != top)
                .map(|(i, d)| (Point(i), MaxPlus::finite(tau - d).unwrap()))
                .chain([(Point(top), MaxPlus::ONE)]);
            IdempotentMeasure::canonicalize(s.clone(), raw, Normalize::Reject).unwrap()
        })
}

/// A measure of O_δx that is not required to lie in I_f.
fn o_delta_measure() -> impl Strategy<Value = IdempotentMeasure> {
    space()
        .prop_flat_map(|s| {
            let n = s.len();
            (Just(s), 0..n, prop::collection::vec((0..n, 1e-9..4.0f64), 0..n))
        })
        .prop_map(|(s, top, rest)| {
            let raw = rest
                .into_iter()
                .filter(|&(i, _)| i != top)
                .map(|(i, d)| (Point(i), MaxPlus::finite(o_delta_threshold() - d).unwrap()))
                .chain([(Point(top), MaxPlus::ONE)]);
            IdempotentMeasure::canonicalize(s.clone(), raw, Normalize::Reject).unwrap()
        })
}

fn map_on(s: Arc<FiniteMetricSpace>) -> impl Strategy<Value = SpaceMap> {
    let n = s.len();
    prop::collection::vec(0..n, n)
        .prop_map(move |t| SpaceMap::new(s.clone(), s.clone(), t.into_iter().map(Point).collect()).unwrap())
}

proptest! {
    #[test]
    fn ln_coeffs_clipped_equals_literal(t in 0.0..=1.0f64) {
        let c = ln_coeffs(t).unwrap();
        let (lt, l1t) = (t.ln(), (1.0 - t).ln());
        let denom = lt.max(l1t);
        let (a, b) = (l1t - denom, lt - denom);
        if a.is_finite() {
            prop_assert!((c.start.value() - a).abs() <= 1e-12);
        } else {
            prop_assert!(c.start.is_bottom());
        }
        if b.is_finite() {
            prop_assert!((c.end.value() - b).abs() <= 1e-12);
        } else {
            prop_assert!(c.end.is_bottom());
        }
        prop_assert_eq!(oplus(c.start, c.end), MaxPlus::ONE);
    }

    #[test]
    fn canonical_measures_are_normal(mu in space_and_measure()) {
        prop_assert_eq!(mu.atoms().iter().map(|a| a.1.value()).fold(f64::NEG_INFINITY, f64::max), 0.0);
        prop_assert!(mu.atoms().windows(2).all(|w| w[0].0 < w[1].0));
        prop_assert!(mu.atoms().iter().all(|a| !a.1.is_bottom()));
        let again = IdempotentMeasure::canonicalize(mu.space().clone(), mu.atoms().iter().copied(), Normalize::Reject).unwrap();
        prop_assert_eq!(again, mu);
    }

    #[test]
    fn support_matches_oracle(mu in space_and_measure()) {
        prop_assert_eq!(mu.support(), support_oracle(&mu).unwrap());
    }

    #[test]
    fn pushforward_composes((mu, f, g) in space().prop_flat_map(|s| (measure_on(s.clone()), map_on(s.clone()), map_on(s)))) {
        let lhs = pushforward(&compose_maps(&f, &g).unwrap(), &mu).unwrap();
        let rhs = pushforward(&g, &pushforward(&f, &mu).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn pushforward_preserves_if((mu, f) in if_measure().prop_flat_map(|mu| { let s = mu.space().clone(); (Just(mu), map_on(s)) })) {
        prop_assert!(classify(&mu).in_if);
        prop_assert!(classify(&pushforward(&f, &mu).unwrap()).in_if);
    }

    #[test]
    fn retraction_is_idempotent_and_keeps_top(mu in if_measure()) {
        let d = retract_to_dirac(&mu).unwrap();
        prop_assert!(d.is_dirac());
        prop_assert_eq!(Some(d.support()[0]), classify(&mu).top);
        prop_assert_eq!(retract_to_dirac(&d).unwrap(), d.clone());
        prop_assert!(fibre_contains(d.support()[0], &mu));
    }

    #[test]
    fn neighborhood_retraction_lands_in_if(nu in o_delta_measure()) {
        for v in [RetractVariant::PaperLiteral, RetractVariant::AtomClamp] {
            let r = neighborhood_retract(&nu, v).unwrap();
            prop_assert!(classify(&r).in_if, "{v}: {r}");
            prop_assert_eq!(neighborhood_retract(&r, v).unwrap(), r);
        }
    }

    #[test]
    fn neighborhood_retraction_fixes_if(mu in if_measure()) {
        for v in [RetractVariant::PaperLiteral, RetractVariant::AtomClamp] {
            prop_assert_eq!(neighborhood_retract(&mu, v).unwrap(), mu.clone());
        }
    }

    #[test]
    fn atom_clamp_is_one_lipschitz(nu in o_delta_measure(), shift in prop::collection::vec(-1e-2..1e-2f64, 8)) {
        let raw: Vec<_> = nu
            .atoms()
            .iter()
            .zip(&shift)
            .map(|(&(p, w), &d)| {
                let moved = if w.value() == 0.0 { 0.0 } else { (w.value() + d).min(o_delta_threshold() - 1e-12) };
                (p, MaxPlus::finite(moved).unwrap())
            })
            .collect();
        let perturbed = IdempotentMeasure::canonicalize(nu.space().clone(), raw, Normalize::Reject).unwrap();
        let a = neighborhood_retract(&nu, RetractVariant::AtomClamp).unwrap();
        let b = neighborhood_retract(&perturbed, RetractVariant::AtomClamp).unwrap();
        for ((p, x), (q, y), (_, u), (_, v)) in zip_atoms(&a, &b, &nu, &perturbed) {
            prop_assert_eq!(p, q);
            prop_assert!((x - y).abs() <= (u - v).abs());
        }
    }

    #[test]
    fn homotopies_stay_in_place(mu in if_measure(), k in 0u32..=64) {
        let t = k as f64 / 64.0;
        let top = classify(&mu).top.unwrap();
        let h = fibre_homotopy(&mu, top, t).unwrap();
        prop_assert!(fibre_contains(top, &h));
        let d = deformation_homotopy(&mu, t).unwrap();
        prop_assert!(classify(&d).in_if);
        prop_assert_eq!(retract_to_dirac(&d).unwrap(), retract_to_dirac(&mu).unwrap());
        if t >= 0.5 {
            prop_assert_eq!(h, mu.clone());
        }
        if t <= 0.5 {
            prop_assert_eq!(d, mu);
        }
    }

    #[test]
    fn measure_json_round_trips(mu in space_and_measure()) {
        let json = serde_json::to_string(&MeasureDoc::from_measure(&mu, true)).unwrap();
        let back = parse_measure(&json, None).unwrap();
        prop_assert_eq!(back.atoms(), mu.atoms());
        let space_json = serde_json::to_string(&SpaceDoc::from_space(mu.space())).unwrap();
        prop_assert_eq!(parse_space(&space_json).unwrap().metric_rows(), mu.space().metric_rows());
    }
}

type Atom = (Point, f64);

/// Zips the atoms of two retraction images with their inputs, assuming
/// identical supports (atom-level values only).
fn zip_atoms<'a>(
    a: &'a IdempotentMeasure,
    b: &'a IdempotentMeasure,
    u: &'a IdempotentMeasure,
    v: &'a IdempotentMeasure,
) -> impl Iterator<Item = (Atom, Atom, Atom, Atom)> + 'a {
    let f = |m: &'a IdempotentMeasure| m.atoms().iter().map(|&(p, w)| (p, w.value()));
    f(a).zip(f(b)).zip(f(u)).zip(f(v)).map(|(((x, y), z), w)| (x, y, z, w))
}
