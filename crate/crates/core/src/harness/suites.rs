//! Case generation per suite, plus suite-level extras: fixed cases,
//! findings and plot data.

use std::collections::BTreeMap;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use serde_json::json;

use super::cases::CaseDoc;
use super::generate::*;
use super::report::Finding;
use super::Suite;
use crate::error::{Error, Result};
use crate::homotopy::{track, uniform_grid, HomotopyKind};
use crate::maxplus::MaxPlus;
use crate::measure::{IdempotentMeasure, Normalize};
use crate::space::{FiniteMetricSpace, Point};
use crate::subspace::{
    classify, if_threshold, neighborhood_retract, o_delta_threshold, AmbientRetractionData, RetractVariant,
};
use crate::topology::openness_witness;
use crate::wire::{MapDoc, MeasureDoc, RetractionDoc, TestFunctionDoc, WitnessDoc};

pub const TRACK_GRID: usize = 101;
pub const BASE_PROBES: usize = 100;
pub const OPENNESS_PROBES: usize = 100;
pub const OPENNESS_MIN_GRID: usize = 11;
pub const LIFT_STEPS: usize = 10;
pub const LIFT_MEASURES: usize = 10;

fn mdoc(mu: &IdempotentMeasure) -> MeasureDoc {
    MeasureDoc::from_measure(mu, false)
}

fn ids(space: &FiniteMetricSpace, pts: &[Point]) -> Vec<String> {
    pts.iter().map(|&p| space.id(p).to_string()).collect()
}

fn all(space: &FiniteMetricSpace) -> Vec<Point> {
    space.points().collect()
}

fn sub(space: &FiniteMetricSpace, pts: &[Point]) -> Arc<FiniteMetricSpace> {
    Arc::new(space.subspace(pts).expect("subspaces of a valid space are valid"))
}

/// Coefficient pair with max exactly 0; the other one is bottom a fifth of the time.
fn coefficients(rng: &mut impl Rng) -> (Option<f64>, Option<f64>) {
    let other = if rng.gen_bool(0.2) {
        None
    } else {
        Some(-rng.gen_range(0.0..5.0))
    };
    if rng.gen_bool(0.5) {
        (Some(0.0), other)
    } else {
        (other, Some(0.0))
    }
}

/// Checks suite-specific requirements on the scenario space.
pub fn validate_space(suite: Suite, space: &FiniteMetricSpace) -> Result<()> {
    let need = |n: usize| {
        if space.len() < n {
            Err(Error::Config(format!(
                "suite {suite} needs at least {n} points, space has {}",
                space.len()
            )))
        } else {
            Ok(())
        }
    };
    match suite {
        Suite::Thm1Openness => need(OPENNESS_MIN_GRID),
        Suite::Prop2Lemma1 => need(3),
        Suite::Thm2 => {
            let dim = space.coords(Point(0)).len();
            if dim == 0 || space.points().any(|p| space.coords(p).len() != dim) {
                Err(Error::Config(
                    "suite thm2 needs point coordinates of one dimension".into(),
                ))
            } else {
                Ok(())
            }
        }
        _ => Ok(()),
    }
}

pub fn generate_case(suite: Suite, space: &Arc<FiniteMetricSpace>, seed: u64, trial: u64) -> Result<CaseDoc> {
    let rng = &mut trial_rng(seed, trial);
    let everything = all(space);
    Ok(match suite {
        Suite::Semiring => {
            let t = if rng.gen_bool(0.05) {
                *[0.0, 0.5, 1.0].choose(rng).expect("nonempty")
            } else {
                rng.gen_range(0..=(1u64 << 20)) as f64 / (1u64 << 20) as f64
            };
            CaseDoc::Semiring {
                a: dyadic(rng),
                b: dyadic(rng),
                c: dyadic(rng),
                t,
            }
        }
        Suite::Axioms => {
            let pts = random_subset(rng, space, 1, 20);
            let x = sub(space, &pts);
            let pool = all(&x);
            let mu = random_measure(rng, &x, &pool, 8);
            let nu = random_measure(rng, &x, &pool, 8);
            let rho = random_measure(rng, &x, &pool, 8);
            let l_phi = rng.gen_range(0.1..5.0);
            let l_psi = rng.gen_range(0.1..5.0);
            let phi = random_test_function(rng, &x, l_phi);
            let psi = random_test_function(rng, &x, l_psi);
            let (l1, l2) = coefficients(rng);
            CaseDoc::Axioms {
                subset: ids(space, &pts),
                mu: mdoc(&mu),
                nu: mdoc(&nu),
                rho: mdoc(&rho),
                phi: TestFunctionDoc::from_function(&phi),
                psi: TestFunctionDoc::from_function(&psi),
                lambda: rng.gen_range(-10.0..10.0),
                l1,
                l2,
            }
        }
        Suite::SupportOracle => {
            let pts = random_subset(rng, space, 1, 12);
            let x = sub(space, &pts);
            let pool = all(&x);
            let mu = random_measure(rng, &x, &pool, pool.len());
            CaseDoc::Support {
                subset: ids(space, &pts),
                mu: mdoc(&mu),
            }
        }
        Suite::Functor => {
            let (px, py, pz) = (
                random_subset(rng, space, 1, 8),
                random_subset(rng, space, 1, 8),
                random_subset(rng, space, 1, 8),
            );
            let (x, y, z) = (sub(space, &px), sub(space, &py), sub(space, &pz));
            let f = random_map(rng, &x, &y);
            let g = random_map(rng, &y, &z);
            let mu = random_if_measure(rng, &x, &all(&x), 6);
            let l = rng.gen_range(0.5..3.0);
            let psi = random_test_function(rng, &y, l);
            CaseDoc::Functor {
                x: ids(space, &px),
                y: ids(space, &py),
                z: ids(space, &pz),
                f: MapDoc::from_map(&f),
                g: MapDoc::from_map(&g),
                mu: mdoc(&mu),
                psi: TestFunctionDoc::from_function(&psi),
            }
        }
        Suite::Thm1Retraction => {
            let mu = random_if_measure(rng, space, &everything, 8);
            let other = *everything.choose(rng).expect("nonempty space");
            let (l1, l2) = coefficients(rng);
            CaseDoc::Retraction {
                mu: mdoc(&mu),
                other: space.id(other).into(),
                l1,
                l2,
            }
        }
        Suite::Thm1Homotopy => CaseDoc::FibreHomotopy {
            mu: mdoc(&random_if_measure(rng, space, &everything, 8)),
            grid: TRACK_GRID,
        },
        Suite::Prop1 => {
            let mu = random_if_measure(rng, space, &everything, 8);
            let dirac = *everything.choose(rng).expect("nonempty space");
            CaseDoc::Deformation {
                mu: mdoc(&mu),
                dirac: space.id(dirac).into(),
                grid: TRACK_GRID,
            }
        }
        Suite::Thm1Base => {
            // Overlapping balls with incompatible weights can leave a bracket
            // (nearly) empty; such configurations are redrawn.
            let mut attempt = 0;
            loop {
                attempt += 1;
                let mu = random_measure(rng, space, &everything, 5);
                let l = rng.gen_range(0.2..10.0);
                let phi = random_test_function(rng, space, l);
                let epsilon = rng.gen_range(0.05..2.0);
                let sub_n = crate::topology::SubbaseNeighborhood::new(mu.clone(), phi.clone(), epsilon)?;
                let bracket = crate::topology::refine_to_bracket(&sub_n);
                let mut probes = Vec::with_capacity(BASE_PROBES);
                let mut misses = 0;
                while probes.len() < BASE_PROBES && misses < 20 {
                    match sample_in_bracket(rng, &bracket, 50) {
                        Some(nu) => probes.push(mdoc(&nu)),
                        None => misses += 1,
                    }
                }
                if probes.len() == BASE_PROBES || attempt == 20 {
                    break CaseDoc::BaseRefinement {
                        mu: mdoc(&mu),
                        phi: TestFunctionDoc::from_function(&phi),
                        epsilon,
                        probes,
                    };
                }
            }
        }
        Suite::Thm1Openness => {
            let (n, grid) = openness_config(rng, space, OPENNESS_MIN_GRID)?;
            let top = classify(n.base()).top.expect("base is in I_f");
            let probes = (0..OPENNESS_PROBES)
                .filter_map(|_| match rng.gen_range(0..10) {
                    0..=5 => sample_in_bracket(rng, &n, 50),
                    6 | 7 => openness_witness(n.base(), top, *grid.choose(rng).expect("grid is nonempty")).ok(),
                    _ => Some(random_if_measure(rng, space, &everything, 5)),
                })
                .map(|nu| mdoc(&nu))
                .collect();
            CaseDoc::Openness {
                mu: mdoc(n.base()),
                radii: n.radii().to_vec(),
                epsilon: n.epsilon(),
                grid: ids(space, &grid),
                probes,
            }
        }
        Suite::Prop2Lemma1 => {
            let nu = random_o_delta_measure(rng, space, &everything, 6);
            let eta = if trial.is_multiple_of(2) { 1e-3 } else { 1e-2 };
            let limit = o_delta_threshold();
            let top = nu.atoms().iter().find(|a| a.1 == MaxPlus::ONE).expect("normalized").0;
            let moved = nu.atoms().iter().map(|&(p, w)| {
                let w = w.value();
                let shifted = if p == top { w } else { w + rng.gen_range(-eta..=eta) };
                (p, if shifted < limit { shifted } else { w })
            });
            let nu_perturbed = finish_measure(space, moved.collect())?;
            let mu = random_if_measure(rng, space, &everything, 6);
            CaseDoc::NeighborhoodRetract {
                nu: mdoc(&nu),
                nu_perturbed: mdoc(&nu_perturbed),
                eta,
                mu: mdoc(&mu),
            }
        }
        Suite::Thm2 => {
            let target = *everything.choose(rng).expect("nonempty space");
            let witness = if trial.is_multiple_of(2) {
                contraction_witness(space, target, LIFT_STEPS)?
            } else {
                let f = random_map(rng, space, space);
                let g = random_map(rng, space, space);
                straight_line_witness(&f, &g, LIFT_STEPS)?
            };
            let measures = (0..LIFT_MEASURES)
                .map(|i| {
                    if i % 2 == 0 {
                        random_if_measure(rng, space, &everything, 6)
                    } else {
                        random_measure(rng, space, &everything, 6)
                    }
                })
                .map(|m| mdoc(&m))
                .collect();
            CaseDoc::Lift {
                witness: WitnessDoc::from_witness(&witness),
                measures,
            }
        }
        Suite::Thm3 => {
            let py = random_subset(rng, space, 1, 15);
            let y = sub(space, &py);
            let x = random_subset(rng, &y, 1, y.len());
            let mut u = x.clone();
            u.extend(all(&y).into_iter().filter(|p| !x.contains(p) && rng.gen_bool(0.5)));
            u.sort();
            let r: BTreeMap<Point, Point> = u
                .iter()
                .filter(|p| !x.contains(p))
                .map(|&p| {
                    let near = *x
                        .iter()
                        .min_by(|&&a, &&b| y.dist(p, a).total_cmp(&y.dist(p, b)))
                        .expect("X is nonempty");
                    (p, near)
                })
                .collect();
            let data = AmbientRetractionData::new(y.clone(), x.clone(), u.clone(), &r)?;
            let mu = random_if_measure(rng, &y, &x, 6);
            let top = *u.choose(rng).expect("U is nonempty");
            let nu = if_measure_with_top(rng, &y, top, &all(&y), 6);
            let nu_u = random_o_delta_measure(rng, &y, &u, 6);
            CaseDoc::Ambient {
                y: ids(space, &py),
                retraction: RetractionDoc::from_data(&data),
                mu: mdoc(&mu),
                nu: mdoc(&nu),
                nu_u: mdoc(&nu_u),
            }
        }
    })
}

fn finish_measure(space: &Arc<FiniteMetricSpace>, atoms: Vec<(Point, f64)>) -> Result<IdempotentMeasure> {
    let raw = atoms
        .into_iter()
        .map(|(p, w)| Ok((p, MaxPlus::finite(w)?)))
        .collect::<Result<Vec<_>>>()?;
    IdempotentMeasure::canonicalize(space.clone(), raw, Normalize::Reject)
}

/// The straddling pair for the literal neighborhood retraction on the first
/// three points: the middle weight sits just below and just above `−ln 4`.
fn discontinuity_pair(space: &Arc<FiniteMetricSpace>) -> Result<(IdempotentMeasure, IdempotentMeasure)> {
    const S: f64 = 1e-6;
    let t = if_threshold(3);
    let make = |w: f64| finish_measure(space, vec![(Point(0), 0.0), (Point(1), w), (Point(2), -2.0)]);
    Ok((make(t - S)?, make(t + S)?))
}

/// Fixed cases run once per suite after the random trials.
pub fn extra_cases(suite: Suite, space: &Arc<FiniteMetricSpace>) -> Result<Vec<CaseDoc>> {
    match suite {
        Suite::Prop2Lemma1 => {
            let (nu, nu_prime) = discontinuity_pair(space)?;
            Ok(vec![CaseDoc::Discontinuity {
                nu: mdoc(&nu),
                nu_prime: mdoc(&nu_prime),
            }])
        }
        _ => Ok(Vec::new()),
    }
}

pub fn findings(suite: Suite, space: &Arc<FiniteMetricSpace>) -> Result<Vec<Finding>> {
    if suite != Suite::Prop2Lemma1 {
        return Ok(Vec::new());
    }
    let (nu, nu_prime) = discontinuity_pair(space)?;
    let image = |m: &IdempotentMeasure, v| neighborhood_retract(m, v).map(|r| mdoc(&r));
    let lit = RetractVariant::PaperLiteral;
    let clamp = RetractVariant::AtomClamp;
    Ok(vec![Finding {
        name: "paper_literal_discontinuity".into(),
        description: "Two measures 2e-6 apart in weight, straddling the -ln(n+1) threshold, whose paper_literal \
                      images differ by 2 - ln 4 at the third atom; atom_clamp images stay 2e-6 apart."
            .into(),
        data: json!({
            "nu": mdoc(&nu),
            "nu_prime": mdoc(&nu_prime),
            "paper_literal": [image(&nu, lit)?, image(&nu_prime, lit)?],
            "atom_clamp": [image(&nu, clamp)?, image(&nu_prime, clamp)?],
        }),
    }])
}

/// Weight curves and evaluation gaps of the first trial's homotopy, plus
/// the largest consecutive gap as the grid refines.
pub fn plot(suite: Suite, space: &Arc<FiniteMetricSpace>, seed: u64) -> Result<Option<serde_json::Value>> {
    let (mu, kind) = match generate_case(suite, space, seed, 0)? {
        CaseDoc::FibreHomotopy { mu, .. } => (mu, "fibre"),
        CaseDoc::Deformation { mu, .. } => (mu, "deformation"),
        _ => return Ok(None),
    };
    let mu = mu.to_measure(Some(space), Normalize::Reject)?;
    let hk = match kind {
        "fibre" => HomotopyKind::Fibre(classify(&mu).top.ok_or_else(|| Error::NotInIf(mu.to_string()))?),
        _ => HomotopyKind::Deformation,
    };
    let family = distance_family(space, 10);
    let t = uniform_grid(TRACK_GRID)?;
    let tr = track(hk, &mu, &t)?;
    let weights: serde_json::Map<String, serde_json::Value> = tr
        .weight_curves()
        .into_iter()
        .map(|(p, curve)| (space.id(p).to_string(), json!(curve)))
        .collect();
    let gaps: Vec<(f64, f64)> = tr
        .consecutive_gaps(&family)?
        .into_iter()
        .zip(t.windows(2))
        .map(|(g, w)| (0.5 * (w[0] + w[1]), g))
        .collect();
    let refinement = [11usize, 21, 51, 101, 201, 401]
        .iter()
        .map(|&k| {
            let grid = uniform_grid(k)?;
            let g = track(hk, &mu, &grid)?.consecutive_gaps(&family)?;
            Ok((k, g.into_iter().fold(0.0, f64::max)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(json!({
        "kind": kind,
        "measure": mdoc(&mu),
        "weights": weights,
        "gaps": gaps,
        "max_gap_by_grid": refinement,
    })))
}
