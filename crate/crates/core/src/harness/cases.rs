//! Serializable test cases and the checks run on them.
//!
//! Every case is checked from its document form, so a counterexample
//! payload replays through exactly the code path that produced it.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::generate::distance_family;
use super::report::Outcome;
use super::Suite;
use crate::error::{Error, Result};
use crate::homotopy::{
    deformation_homotopy, fibre_homotopy, lift_witness, support_distance, track, uniform_grid, HomotopyKind,
};
use crate::maxplus::{ln_coeffs, odot, oplus, MaxPlus};
use crate::measure::{pushforward, support_oracle, tropical_combination, verify_axioms, IdempotentMeasure, Normalize};
use crate::space::{compose_maps, verify_collapse, FiniteMetricSpace, Point, SpaceMap};
use crate::subspace::{
    ambient_merge, ambient_retract, classify, fibre_contains, neighborhood_retract, o_delta_center, retract_to_dirac,
    RetractVariant,
};
use crate::topology::{
    bracket_contains, openness_check, refine_to_bracket, subbase_contains, BracketNeighborhood, SubbaseNeighborhood,
    MIN_LIPSCHITZ,
};
use crate::wire::{MapDoc, MeasureDoc, RetractionDoc, SpaceDoc, TestFunctionDoc, WitnessDoc};

/// One generated instance. Point references are ids of the payload space;
/// `subset`-style fields name metric subspaces of it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CaseDoc {
    Semiring {
        a: f64,
        b: f64,
        c: f64,
        t: f64,
    },
    Axioms {
        subset: Vec<String>,
        mu: MeasureDoc,
        nu: MeasureDoc,
        rho: MeasureDoc,
        phi: TestFunctionDoc,
        psi: TestFunctionDoc,
        lambda: f64,
        /// Coefficients of `l1 ⊙ ν ⊕ l2 ⊙ μ`; `null` is bottom.
        l1: Option<f64>,
        l2: Option<f64>,
    },
    Support {
        subset: Vec<String>,
        mu: MeasureDoc,
    },
    Functor {
        x: Vec<String>,
        y: Vec<String>,
        z: Vec<String>,
        f: MapDoc,
        g: MapDoc,
        mu: MeasureDoc,
        psi: TestFunctionDoc,
    },
    Retraction {
        mu: MeasureDoc,
        other: String,
        l1: Option<f64>,
        l2: Option<f64>,
    },
    FibreHomotopy {
        mu: MeasureDoc,
        grid: usize,
    },
    Deformation {
        mu: MeasureDoc,
        dirac: String,
        grid: usize,
    },
    BaseRefinement {
        mu: MeasureDoc,
        phi: TestFunctionDoc,
        epsilon: f64,
        probes: Vec<MeasureDoc>,
    },
    Openness {
        mu: MeasureDoc,
        radii: Vec<f64>,
        epsilon: f64,
        grid: Vec<String>,
        probes: Vec<MeasureDoc>,
    },
    NeighborhoodRetract {
        nu: MeasureDoc,
        nu_perturbed: MeasureDoc,
        eta: f64,
        mu: MeasureDoc,
    },
    Discontinuity {
        nu: MeasureDoc,
        nu_prime: MeasureDoc,
    },
    Lift {
        witness: WitnessDoc,
        measures: Vec<MeasureDoc>,
    },
    Ambient {
        y: Vec<String>,
        retraction: RetractionDoc,
        mu: MeasureDoc,
        nu: MeasureDoc,
        nu_u: MeasureDoc,
    },
}

/// A self-contained, replayable case.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Payload {
    pub suite: Suite,
    pub tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    pub space: SpaceDoc,
    pub case: CaseDoc,
}

#[derive(Clone, Copy, Debug)]
pub struct CheckCtx {
    pub tolerance: f64,
    pub variant: Option<RetractVariant>,
}

pub fn check_case(space: &Arc<FiniteMetricSpace>, case: &CaseDoc, ctx: &CheckCtx) -> Vec<Outcome> {
    let mut out = Vec::new();
    if let Err(e) = run(space, case, ctx, &mut out) {
        out.push(Outcome::fail("case_valid", e.to_string()));
    }
    out
}

fn verdict(check: &'static str, r: Result<bool>, detail: impl FnOnce() -> String) -> Outcome {
    match r {
        Ok(ok) => Outcome::expect(check, ok, detail),
        Err(e) => Outcome::fail(check, format!("error: {e}")),
    }
}

fn measure(doc: &MeasureDoc, space: &Arc<FiniteMetricSpace>) -> Result<IdempotentMeasure> {
    doc.to_measure(Some(space), Normalize::Reject)
}

fn subspace(space: &FiniteMetricSpace, ids: &[String]) -> Result<Arc<FiniteMetricSpace>> {
    let pts = ids.iter().map(|id| space.point(id)).collect::<Result<Vec<_>>>()?;
    Ok(Arc::new(space.subspace(&pts)?))
}

fn coefficient(c: Option<f64>) -> Result<MaxPlus> {
    c.map_or(Ok(MaxPlus::BOTTOM), MaxPlus::finite)
}

/// `max |w_a − w_b|` over a shared support; `None` if the supports differ.
fn weight_distance(a: &IdempotentMeasure, b: &IdempotentMeasure) -> Option<f64> {
    (a.support() == b.support()).then(|| {
        a.atoms()
            .iter()
            .zip(b.atoms())
            .map(|(x, y)| (x.1.value() - y.1.value()).abs())
            .fold(0.0, f64::max)
    })
}

fn run(space: &Arc<FiniteMetricSpace>, case: &CaseDoc, ctx: &CheckCtx, out: &mut Vec<Outcome>) -> Result<()> {
    match case {
        CaseDoc::Semiring { a, b, c, t } => semiring(*a, *b, *c, *t, out)?,
        CaseDoc::Axioms {
            subset,
            mu,
            nu,
            rho,
            phi,
            psi,
            lambda,
            l1,
            l2,
        } => {
            let x = subspace(space, subset)?;
            let (mu, nu, rho) = (measure(mu, &x)?, measure(nu, &x)?, measure(rho, &x)?);
            let (phi, psi) = (phi.to_function(&x)?, psi.to_function(&x)?);
            let r = verify_axioms(&mu, &phi, &psi, *lambda)?;
            out.push(Outcome::residual("normalization", r.normalization, ctx.tolerance));
            out.push(Outcome::residual("homogeneity", r.homogeneity, ctx.tolerance));
            out.push(Outcome::residual("additivity", r.additivity, ctx.tolerance));

            let (l1, l2) = (coefficient(*l1)?, coefficient(*l2)?);
            let comb = tropical_combination(l1, &nu, l2, &mu)?;
            let expected =
                odot(l1, MaxPlus::new(nu.evaluate(&phi)?)?).oplus(odot(l2, MaxPlus::new(mu.evaluate(&phi)?)?));
            out.push(Outcome::residual(
                "affinity",
                (comb.evaluate(&phi)? - expected.value()).abs(),
                ctx.tolerance,
            ));

            let family = [phi, psi];
            let g = |a: &IdempotentMeasure, b: &IdempotentMeasure| crate::measure::eval_gap(a, b, &family);
            let (mn, nm, nr, mr, mm) = (g(&mu, &nu)?, g(&nu, &mu)?, g(&nu, &rho)?, g(&mu, &rho)?, g(&mu, &mu)?);
            out.push(Outcome::expect("gap_symmetric", mn == nm && mm == 0.0, || {
                format!("gap(mu,nu)={mn}, gap(nu,mu)={nm}, gap(mu,mu)={mm}")
            }));
            out.push(Outcome::residual(
                "gap_triangle",
                (mr - mn - nr).max(0.0),
                ctx.tolerance,
            ));
        }
        CaseDoc::Support { subset, mu } => {
            let x = subspace(space, subset)?;
            let mu = measure(mu, &x)?;
            let oracle = support_oracle(&mu)?;
            let ids = |v: &[Point]| v.iter().map(|&p| x.id(p).to_string()).collect::<Vec<_>>();
            out.push(Outcome::expect(
                "support_matches_oracle",
                oracle == mu.support(),
                || format!("support {:?}, oracle {:?}", ids(&mu.support()), ids(&oracle)),
            ));
        }
        CaseDoc::Functor { x, y, z, f, g, mu, psi } => {
            let (x, y, z) = (subspace(space, x)?, subspace(space, y)?, subspace(space, z)?);
            let (f, g) = (f.to_map(&x, &y)?, g.to_map(&y, &z)?);
            let mu = measure(mu, &x)?;
            let psi = psi.to_function(&y)?;
            out.push(Outcome::expect("sample_in_if", classify(&mu).in_if, || {
                format!("{mu} is not in I_f")
            }));
            let id = pushforward(&SpaceMap::identity(x.clone()), &mu)?;
            out.push(Outcome::expect("identity_law", id == mu, || {
                format!("I(id)({mu}) = {id}")
            }));
            let gf = compose_maps(&f, &g)?;
            let (lhs, fmu) = (pushforward(&gf, &mu)?, pushforward(&f, &mu)?);
            let rhs = pushforward(&g, &fmu)?;
            out.push(Outcome::expect("composition_law", lhs == rhs, || {
                format!("I(g∘f)(mu) = {lhs}, I(g)(I(f)(mu)) = {rhs}")
            }));
            let closed = classify(&fmu).in_if && classify(&lhs).in_if;
            out.push(Outcome::expect("subfunctor_closure", closed, || {
                format!("I(f)(mu) = {fmu}, I(g∘f)(mu) = {lhs}")
            }));
            let (a, b) = (fmu.evaluate(&psi)?, mu.evaluate(&psi.pullback(&f)?)?);
            out.push(Outcome::expect(
                "evaluation_identity",
                a.to_bits() == b.to_bits(),
                || format!("I(f)(mu)(psi) = {a}, mu(psi∘f) = {b}"),
            ));
        }
        CaseDoc::Retraction { mu, other, l1, l2 } => {
            let mu = measure(mu, space)?;
            let c = classify(&mu);
            out.push(Outcome::expect("sample_in_if", c.in_if, || {
                format!("{mu} is not in I_f")
            }));
            let r = retract_to_dirac(&mu)?;
            let rr = retract_to_dirac(&r)?;
            out.push(Outcome::expect("idempotence", rr == r, || {
                format!("r(mu) = {r}, r(r(mu)) = {rr}")
            }));
            let d = IdempotentMeasure::dirac(space.clone(), space.point(other)?)?;
            out.push(verdict("fixes_dirac", retract_to_dirac(&d).map(|x| x == d), || {
                format!("r moves {d}")
            }));
            let fibres = space.points().filter(|&x| fibre_contains(x, &mu)).count();
            out.push(Outcome::expect("fibre_partition", fibres == 1, || {
                format!("{mu} lies in {fibres} fibres")
            }));
            let top = c.top.ok_or_else(|| Error::NotInIf(mu.to_string()))?;
            let delta = IdempotentMeasure::dirac(space.clone(), top)?;
            let comb = tropical_combination(coefficient(*l1)?, &delta, coefficient(*l2)?, &mu)?;
            out.push(Outcome::expect("interval_closure", fibre_contains(top, &comb), || {
                format!("{comb} left the fibre over {}", space.id(top))
            }));
        }
        CaseDoc::FibreHomotopy { mu, grid } => {
            let mu = measure(mu, space)?;
            let top = classify(&mu).top.ok_or_else(|| Error::NotInIf(mu.to_string()))?;
            let t = uniform_grid(*grid)?;
            let tr = track(HomotopyKind::Fibre(top), &mu, &t)?;
            let s = tr.states();
            let delta = IdempotentMeasure::dirac(space.clone(), top)?;
            let ends = s[0] == delta && s[s.len() - 1] == mu && fibre_homotopy(&mu, top, 1.0)? == mu;
            out.push(Outcome::expect("endpoints", ends, || {
                format!("h(0) = {}, h(1) = {}", s[0], s[s.len() - 1])
            }));
            let mut member = Vec::new();
            let mut plateau = Vec::new();
            let mut plateau_total = 0;
            for (&ti, st) in t.iter().zip(s) {
                if !fibre_contains(top, st) {
                    member.push(format!("t={ti}: {st}"));
                }
                if ti >= 0.5 {
                    plateau_total += 1;
                    if *st != mu {
                        plateau.push(format!("t={ti}: {st}"));
                    }
                }
            }
            out.push(Outcome::counts(
                "fibre_membership",
                (s.len() - member.len()) as u64,
                member,
            ));
            out.push(Outcome::counts(
                "plateau",
                (plateau_total - plateau.len()) as u64,
                plateau,
            ));
            out.push(gaps_finite(&tr, space)?);
        }
        CaseDoc::Deformation { mu, dirac, grid } => {
            let mu = measure(mu, space)?;
            let t = uniform_grid(*grid)?;
            let tr = track(HomotopyKind::Deformation, &mu, &t)?;
            let s = tr.states();
            let r = retract_to_dirac(&mu)?;
            out.push(Outcome::expect("endpoints", s[0] == mu && s[s.len() - 1] == r, || {
                format!("h(0) = {}, h(1) = {}, r(mu) = {r}", s[0], s[s.len() - 1])
            }));
            let mut member = Vec::new();
            let mut plateau = Vec::new();
            let mut plateau_total = 0;
            for (&ti, st) in t.iter().zip(s) {
                if !classify(st).in_if {
                    member.push(format!("t={ti}: {st}"));
                }
                if ti <= 0.5 {
                    plateau_total += 1;
                    if *st != mu {
                        plateau.push(format!("t={ti}: {st}"));
                    }
                }
            }
            out.push(Outcome::counts(
                "in_if_membership",
                (s.len() - member.len()) as u64,
                member,
            ));
            out.push(Outcome::counts(
                "plateau",
                (plateau_total - plateau.len()) as u64,
                plateau,
            ));
            let mut moved = Vec::new();
            let mut total = 0;
            for p in [space.point(dirac)?, r.support()[0]] {
                let d = IdempotentMeasure::dirac(space.clone(), p)?;
                for &ti in &t {
                    total += 1;
                    let h = deformation_homotopy(&d, ti)?;
                    if h != d {
                        moved.push(format!("h({d}, {ti}) = {h}"));
                    }
                }
            }
            out.push(Outcome::counts(
                "strong_deformation",
                (total - moved.len()) as u64,
                moved,
            ));
            out.push(gaps_finite(&tr, space)?);
        }
        CaseDoc::BaseRefinement {
            mu,
            phi,
            epsilon,
            probes,
        } => {
            let mu = measure(mu, space)?;
            let phi = phi.to_function(space)?;
            let sub = SubbaseNeighborhood::new(mu.clone(), phi.clone(), *epsilon)?;
            let br = refine_to_bracket(&sub);
            let radius = epsilon / (2.0 * phi.lipschitz().max(MIN_LIPSCHITZ));
            let shape = br.radii().iter().all(|&r| r == radius) && br.epsilon() == epsilon / 2.0;
            out.push(Outcome::expect("refined_shape", shape, || {
                format!("radii {:?}, epsilon {}", br.radii(), br.epsilon())
            }));
            // Overlapping balls can capture a base atom under another atom's
            // weight, so the base is only guaranteed to be in a disjoint bracket.
            if br.overlap().is_none() {
                out.push(verdict("base_in_bracket", bracket_contains(&br, &mu), || {
                    format!("{mu} misses its own bracket")
                }));
            }
            let wide = BracketNeighborhood::new(mu.clone(), br.radii().to_vec(), 2.0 * br.epsilon())?;
            let (mut in_bracket, mut sound, mut monotone) = (Vec::new(), Vec::new(), Vec::new());
            let mut checked = 0;
            for (i, doc) in probes.iter().enumerate() {
                let nu = measure(doc, space)?;
                if !bracket_contains(&br, &nu)? {
                    in_bracket.push(format!("probe {i} {nu} is outside the bracket"));
                    continue;
                }
                checked += 1;
                if !subbase_contains(&sub, &nu)? {
                    let gap = (mu.evaluate(&phi)? - nu.evaluate(&phi)?).abs();
                    sound.push(format!("probe {i} {nu}: |mu(phi) - nu(phi)| = {gap} >= {epsilon}"));
                }
                if !bracket_contains(&wide, &nu)? {
                    monotone.push(format!("probe {i} {nu} leaves the bracket when epsilon grows"));
                }
            }
            let n = probes.len() as u64;
            out.push(Outcome::counts(
                "probe_in_bracket",
                n - in_bracket.len() as u64,
                in_bracket,
            ));
            out.push(Outcome::counts(
                "bracket_in_subbase",
                checked - sound.len() as u64,
                sound,
            ));
            out.push(Outcome::counts(
                "epsilon_monotone",
                checked - monotone.len() as u64,
                monotone,
            ));
        }
        CaseDoc::Openness {
            mu,
            radii,
            epsilon,
            grid,
            probes,
        } => {
            let n = BracketNeighborhood::new(measure(mu, space)?, radii.clone(), *epsilon)?;
            let grid = grid.iter().map(|id| space.point(id)).collect::<Result<Vec<_>>>()?;
            let probes = probes.iter().map(|d| measure(d, space)).collect::<Result<Vec<_>>>()?;
            out.push(Outcome::expect("grid_size", grid.len() >= 11, || {
                format!("witness grid has {} points", grid.len())
            }));
            let report = match openness_check(&n, &grid, &probes) {
                Ok(r) => r,
                Err(e) => {
                    out.push(Outcome::fail("admissible", e.to_string()));
                    return Ok(());
                }
            };
            out.push(Outcome::pass("admissible"));
            let fwd: Vec<String> = report
                .forward_failures
                .iter()
                .map(|f| format!("{} retracts to {}", f.probe, space.id(f.image)))
                .collect();
            let wit: Vec<String> = report
                .witness_failures
                .iter()
                .map(|f| {
                    format!(
                        "y={}: {} in_bracket={} image={:?}",
                        space.id(f.y),
                        f.witness,
                        f.in_bracket,
                        f.image.map(|p| space.id(p))
                    )
                })
                .collect();
            out.push(Outcome::counts(
                "forward_inclusion",
                (report.probes_checked - fwd.len()) as u64,
                fwd,
            ));
            out.push(Outcome::counts(
                "witness_inclusion",
                (report.witnesses_checked - wit.len()) as u64,
                wit,
            ));
        }
        CaseDoc::NeighborhoodRetract {
            nu,
            nu_perturbed,
            eta,
            mu,
        } => {
            let (nu, nu_p, mu) = (measure(nu, space)?, measure(nu_perturbed, space)?, measure(mu, space)?);
            let members = o_delta_center(&nu).is_some() && o_delta_center(&nu_p).is_some() && classify(&mu).in_if;
            out.push(Outcome::expect("sample_classes", members, || {
                format!("nu {nu}, nu' {nu_p}, mu {mu}")
            }));
            let variants = ctx.variant.map_or(RetractVariant::ALL.to_vec(), |v| vec![v]);
            for v in variants {
                let images = [neighborhood_retract(&nu, v)?, neighborhood_retract(&nu_p, v)?];
                let bad: Vec<String> = images
                    .iter()
                    .filter(|m| !classify(m).in_if)
                    .map(|m| m.to_string())
                    .collect();
                out.push(Outcome::counts(format!("image_in_if/{v}"), 2 - bad.len() as u64, bad));
                let fixed = neighborhood_retract(&mu, v)?;
                out.push(Outcome::expect(format!("identity_on_if/{v}"), fixed == mu, || {
                    format!("r({mu}) = {fixed}")
                }));
            }
            if nu.len() <= 2 {
                let lit = neighborhood_retract(&nu, RetractVariant::PaperLiteral)?;
                let clamp = neighborhood_retract(&nu, RetractVariant::AtomClamp)?;
                out.push(Outcome::expect("variants_agree_single", lit == clamp, || {
                    format!("paper_literal {lit}, atom_clamp {clamp}")
                }));
            }
            let a = neighborhood_retract(&nu, RetractVariant::AtomClamp)?;
            let b = neighborhood_retract(&nu_p, RetractVariant::AtomClamp)?;
            match (weight_distance(&nu, &nu_p), weight_distance(&a, &b)) {
                (Some(input), Some(output)) => {
                    let ok = input <= *eta && output <= input;
                    out.push(Outcome {
                        residual: (output - input).max(0.0),
                        ..Outcome::expect("clamp_stability", ok, || {
                            format!("input moved {input} (eta {eta}), output moved {output}")
                        })
                    });
                }
                _ => out.push(Outcome::fail(
                    "clamp_stability",
                    format!("supports differ: {nu} / {nu_p} -> {a} / {b}"),
                )),
            }
        }
        CaseDoc::Discontinuity { nu, nu_prime } => {
            let (nu, nu_p) = (measure(nu, space)?, measure(nu_prime, space)?);
            let input = weight_distance(&nu, &nu_p).ok_or_else(|| Error::Config("witness supports differ".into()))?;
            let jump = |v| -> Result<f64> {
                weight_distance(&neighborhood_retract(&nu, v)?, &neighborhood_retract(&nu_p, v)?)
                    .ok_or_else(|| Error::Config("image supports differ".into()))
            };
            let (lit, clamp) = (jump(RetractVariant::PaperLiteral)?, jump(RetractVariant::AtomClamp)?);
            out.push(Outcome::expect(
                "discontinuity_witness_found",
                input > 0.0 && lit > 100.0 * input,
                || format!("inputs {input} apart, paper_literal images {lit} apart"),
            ));
            out.push(Outcome::expect("clamp_continuous_at_witness", clamp <= input, || {
                format!("inputs {input} apart, atom_clamp images {clamp} apart")
            }));
        }
        CaseDoc::Lift { witness, measures } => lift(space, witness, measures, out)?,
        CaseDoc::Ambient {
            y,
            retraction,
            mu,
            nu,
            nu_u,
        } => {
            let y = subspace(space, y)?;
            let data = retraction.to_data(&y)?;
            let (mu, nu, nu_u) = (measure(mu, &y)?, measure(nu, &y)?, measure(nu_u, &y)?);
            out.push(Outcome::expect("retraction_valid", data.is_retraction(), || {
                "r is not a retraction".into()
            }));
            out.push(match ambient_retract(&mu, &data) {
                Ok(back) => Outcome::expect("identity_on_if_x", back == mu, || format!("R(r({mu})) = {back}")),
                Err(e) => Outcome::fail("identity_on_if_x", format!("error: {e}")),
            });
            let image = ambient_retract(&nu, &data)?;
            let inside = image.support().iter().all(|p| data.x().contains(p));
            out.push(Outcome::expect(
                "image_in_if_x",
                inside && classify(&image).in_if,
                || format!("R(r({nu})) = {image}"),
            ));
            let merged = ambient_merge(&nu_u, data.u())?;
            out.push(Outcome::expect("merge_fixes_u", merged == nu_u, || {
                format!("r_U({nu_u}) = {merged}")
            }));
        }
    }
    Ok(())
}

fn semiring(a: f64, b: f64, c: f64, t: f64, out: &mut Vec<Outcome>) -> Result<()> {
    let (a, b, c) = (MaxPlus::finite(a)?, MaxPlus::finite(b)?, MaxPlus::finite(c)?);
    let bot = MaxPlus::BOTTOM;
    let same = |x: MaxPlus, y: MaxPlus| x.value().to_bits() == y.value().to_bits();
    let show = || format!("a={a}, b={b}, c={c}");
    let laws: [(&'static str, bool); 9] = [
        ("oplus_idempotent", same(oplus(a, a), a)),
        ("oplus_commutative", same(oplus(a, b), oplus(b, a))),
        ("oplus_associative", same(oplus(oplus(a, b), c), oplus(a, oplus(b, c)))),
        ("oplus_identity", same(oplus(a, bot), a) && same(oplus(bot, a), a)),
        ("odot_commutative", same(odot(a, b), odot(b, a))),
        ("odot_associative", same(odot(odot(a, b), c), odot(a, odot(b, c)))),
        ("odot_identity", same(odot(a, MaxPlus::ONE), a)),
        ("odot_absorbing", odot(a, bot).is_bottom() && odot(bot, a).is_bottom()),
        (
            "distributive",
            same(odot(a, oplus(b, c)), oplus(odot(a, b), odot(a, c))),
        ),
    ];
    out.extend(laws.into_iter().map(|(name, ok)| Outcome::expect(name, ok, show)));
    let k = ln_coeffs(t)?;
    let mirrored = ln_coeffs(1.0 - t)?;
    out.push(Outcome::expect(
        "ln_coeffs_normalized",
        oplus(k.start, k.end) == MaxPlus::ONE && k.start <= MaxPlus::ONE && k.end <= MaxPlus::ONE,
        || format!("t={t}: ({}, {})", k.start, k.end),
    ));
    out.push(Outcome::expect("ln_coeffs_symmetric", k.start == mirrored.end, || {
        format!("t={t}: start {} vs mirrored end {}", k.start, mirrored.end)
    }));
    Ok(())
}

fn gaps_finite(tr: &crate::homotopy::HomotopyTrack, space: &Arc<FiniteMetricSpace>) -> Result<Outcome> {
    let gaps = tr.consecutive_gaps(&distance_family(space, 10))?;
    let bad: Vec<String> = gaps
        .iter()
        .enumerate()
        .filter(|g| !g.1.is_finite())
        .map(|(i, g)| format!("interval {i}: {g}"))
        .collect();
    Ok(Outcome::counts("gaps_finite", (gaps.len() - bad.len()) as u64, bad))
}

fn lift(
    space: &Arc<FiniteMetricSpace>,
    witness: &WitnessDoc,
    measures: &[MeasureDoc],
    out: &mut Vec<Outcome>,
) -> Result<()> {
    let w = witness.to_witness(space, space)?;
    let sample = measures.iter().map(|d| measure(d, space)).collect::<Result<Vec<_>>>()?;
    let tracks = lift_witness(&w, &sample)?;
    let delta = w.step_bound();
    let k_last = w.last_index();
    let collapse = verify_collapse(&w);
    let mut finals = Vec::new();
    for tr in &tracks {
        let mu = &tr.source;
        let s = &tr.states;
        let ends = s[0] == pushforward(&w.steps()[0], mu)? && s[k_last] == pushforward(&w.steps()[k_last], mu)?;
        out.push(Outcome::expect("endpoints", ends, || {
            format!("lift of {mu}: {} .. {}", s[0], s[k_last])
        }));

        let mut weights = Vec::new();
        let mut steps = Vec::new();
        let mut worst: f64 = 0.0;
        for (k, st) in s.iter().enumerate() {
            let h = &w.steps()[k];
            let mut expected: BTreeMap<Point, MaxPlus> = BTreeMap::new();
            for &(x, l) in mu.atoms() {
                let e = expected.entry(h.apply(x)).or_insert(MaxPlus::BOTTOM);
                *e = oplus(*e, l);
            }
            let got: BTreeMap<Point, MaxPlus> = st.atoms().iter().copied().collect();
            if got != expected {
                weights.push(format!("step {k}: {st}"));
            }
            if k < k_last {
                let next = &w.steps()[k + 1];
                let moved = mu
                    .atoms()
                    .iter()
                    .map(|&(x, _)| space.dist(h.apply(x), next.apply(x)))
                    .fold(0.0, f64::max)
                    .max(support_distance(st, &s[k + 1])?);
                worst = worst.max(moved - delta);
                if moved > delta {
                    steps.push(format!("step {k}: atoms move {moved} > {delta}"));
                }
            }
        }
        out.push(Outcome::counts(
            "weight_preservation",
            (s.len() - weights.len()) as u64,
            weights,
        ));
        out.push(Outcome {
            residual: worst.max(0.0),
            ..Outcome::counts("step_displacement", (k_last - steps.len()) as u64, steps)
        });
        let normalized = s
            .iter()
            .all(|st| MaxPlus::sum(st.atoms().iter().map(|a| a.1)) == MaxPlus::ONE);
        out.push(Outcome::expect("normalization", normalized, || {
            format!("lift of {mu} loses normalization")
        }));
        let shrinking = s.iter().all(|st| st.len() <= mu.len());
        out.push(Outcome::expect("support_not_growing", shrinking, || {
            format!("lift of {mu} grows its support")
        }));
        if classify(mu).in_if {
            let kept = s.iter().all(|st| classify(st).in_if);
            out.push(Outcome::expect("if_preserved", kept, || {
                format!("lift of {mu} leaves I_f")
            }));
        }
        let x = mu.atoms()[0].0;
        let dirac = IdempotentMeasure::dirac(space.clone(), x)?;
        let lifted = lift_witness(&w, std::slice::from_ref(&dirac))?;
        let natural = lifted[0]
            .states
            .iter()
            .enumerate()
            .all(|(k, st)| st.is_dirac() && st.atoms()[0].0 == w.steps()[k].apply(x));
        out.push(Outcome::expect("dirac_naturality", natural, || {
            format!("lift of {dirac} is not δ_h(x)")
        }));
        finals.push(s[k_last].clone());
    }
    if collapse {
        let common = finals.iter().all(|f| f.is_dirac() && *f == finals[0]);
        out.push(Outcome::expect("collapse_common_dirac", common, || {
            finals.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(", ")
        }));
    }
    Ok(())
}
