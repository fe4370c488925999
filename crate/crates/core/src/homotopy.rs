//! Explicit homotopies on measures: the fibre contraction onto `δ_x`, the
//! deformation of `I_f(X)` onto `δ(X)`, and the lift of point homotopies
//! through the pushforward.
//!
//! Both closed-form homotopies are tropical combinations with coefficients
//! from [`ln_coeffs`]; the endpoint values come out of bottom absorption.

use crate::error::{Error, Result};
use crate::maxplus::ln_coeffs;
use crate::measure::{eval_gap, pushforward, tropical_combination, IdempotentMeasure};
use crate::space::{HomotopyWitness, Point, TestFunction};
use crate::subspace::{classify, fibre_contains, retract_to_dirac};

/// `h(μ, t) = start(t) ⊙ δ_x ⊕ end(t) ⊙ μ`, from `δ_x` at `t = 0` to `μ` at `t = 1`.
pub fn fibre_homotopy(mu: &IdempotentMeasure, x: Point, t: f64) -> Result<IdempotentMeasure> {
    if !fibre_contains(x, mu) {
        return Err(Error::NotInFibre(mu.space().id(x).into()));
    }
    let c = ln_coeffs(t)?;
    let dirac = IdempotentMeasure::dirac(mu.space().clone(), x)?;
    tropical_combination(c.start, &dirac, c.end, mu)
}

/// `h(μ, t) = start(t) ⊙ μ ⊕ end(t) ⊙ r(μ)`, from `μ` to its Dirac retraction.
pub fn deformation_homotopy(mu: &IdempotentMeasure, t: f64) -> Result<IdempotentMeasure> {
    if !classify(mu).in_if {
        return Err(Error::NotInIf(mu.to_string()));
    }
    let c = ln_coeffs(t)?;
    let retracted = retract_to_dirac(mu)?;
    tropical_combination(c.start, mu, c.end, &retracted)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HomotopyKind {
    /// Contraction of the fibre over the given point.
    Fibre(Point),
    Deformation,
}

/// A homotopy sampled on a `t` grid.
#[derive(Clone, Debug, PartialEq)]
pub struct HomotopyTrack {
    t_grid: Vec<f64>,
    states: Vec<IdempotentMeasure>,
}

/// `k` equispaced values from 0 to 1 inclusive, endpoints exact.
pub fn uniform_grid(k: usize) -> Result<Vec<f64>> {
    if k < 2 {
        return Err(Error::InvalidGrid(format!("need at least 2 grid points, got {k}")));
    }
    let last = (k - 1) as f64;
    Ok((0..k).map(|i| i as f64 / last).collect())
}

fn check_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.first() != Some(&0.0) || t_grid.last() != Some(&1.0) {
        return Err(Error::InvalidGrid("grid must start at 0 and end at 1".into()));
    }
    if t_grid
        .windows(2)
        .any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less))
    {
        return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
    }
    Ok(())
}

impl HomotopyTrack {
    pub fn new(t_grid: Vec<f64>, states: Vec<IdempotentMeasure>) -> Result<Self> {
        check_grid(&t_grid)?;
        if states.len() != t_grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} states for {} grid points",
                states.len(),
                t_grid.len()
            )));
        }
        if states
            .windows(2)
            .any(|w| !crate::space::same_space(w[0].space(), w[1].space()))
        {
            return Err(Error::SpaceMismatch);
        }
        Ok(HomotopyTrack { t_grid, states })
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn states(&self) -> &[IdempotentMeasure] {
        &self.states
    }

    /// `eval_gap` between consecutive states.
    pub fn consecutive_gaps(&self, family: &[TestFunction]) -> Result<Vec<f64>> {
        self.states.windows(2).map(|w| eval_gap(&w[0], &w[1], family)).collect()
    }

    /// Per support point, the `(t, weight)` samples where the point carries
    /// finite mass. Points are listed in space order.
    pub fn weight_curves(&self) -> Vec<(Point, Vec<(f64, f64)>)> {
        let mut points: Vec<Point> = self.states.iter().flat_map(|s| s.support()).collect();
        points.sort();
        points.dedup();
        points
            .into_iter()
            .map(|p| {
                let curve = self
                    .t_grid
                    .iter()
                    .zip(&self.states)
                    .filter_map(|(&t, s)| {
                        let w = s.weight_at(p);
                        (!w.is_bottom()).then_some((t, w.value()))
                    })
                    .collect();
                (p, curve)
            })
            .collect()
    }
}

pub fn track(kind: HomotopyKind, mu: &IdempotentMeasure, t_grid: &[f64]) -> Result<HomotopyTrack> {
    check_grid(t_grid)?;
    let states = t_grid
        .iter()
        .map(|&t| match kind {
            HomotopyKind::Fibre(x) => fibre_homotopy(mu, x, t),
            HomotopyKind::Deformation => deformation_homotopy(mu, t),
        })
        .collect::<Result<Vec<_>>>()?;
    HomotopyTrack::new(t_grid.to_vec(), states)
}

/// `I_f(h)(μ, k) = ⊕ λ_i ⊙ δ_{h_k(x_i)}`.
pub fn functor_map_at(w: &HomotopyWitness, k: usize, mu: &IdempotentMeasure) -> Result<IdempotentMeasure> {
    pushforward(w.step(k)?, mu)
}

/// The lift of one measure along every step of a witness.
#[derive(Clone, Debug, PartialEq)]
pub struct LiftedTrack {
    pub source: IdempotentMeasure,
    pub states: Vec<IdempotentMeasure>,
}

pub fn lift_witness(w: &HomotopyWitness, sample: &[IdempotentMeasure]) -> Result<Vec<LiftedTrack>> {
    sample
        .iter()
        .map(|mu| {
            let states = (0..=w.last_index())
                .map(|k| functor_map_at(w, k, mu))
                .collect::<Result<Vec<_>>>()?;
            Ok(LiftedTrack {
                source: mu.clone(),
                states,
            })
        })
        .collect()
}

/// Hausdorff distance between the supports of two measures on one space.
pub fn support_distance(a: &IdempotentMeasure, b: &IdempotentMeasure) -> Result<f64> {
    if !crate::space::same_space(a.space(), b.space()) {
        return Err(Error::SpaceMismatch);
    }
    let s = a.space();
    let one_sided = |from: &IdempotentMeasure, to: &IdempotentMeasure| {
        from.support()
            .into_iter()
            .map(|p| {
                to.support()
                    .into_iter()
                    .map(|q| s.dist(p, q))
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0f64, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::Normalize;
    use crate::space::{build_space, FiniteMetricSpace, PointSpec, SpaceMap};
    use std::sync::Arc;

    const LN3: f64 = 1.0986122886681098;

    fn space(n: usize) -> Arc<FiniteMetricSpace> {
        let pts = (0..n)
            .map(|i| PointSpec::new(format!("x{i}"), vec![i as f64]))
            .collect();
        Arc::new(build_space(pts, None).unwrap())
    }

    fn m(s: &Arc<FiniteMetricSpace>, atoms: &[(usize, f64)]) -> IdempotentMeasure {
        let raw = atoms.iter().map(|&(p, w)| (Point(p), crate::MaxPlus::new(w).unwrap()));
        IdempotentMeasure::canonicalize(s.clone(), raw, Normalize::Reject).unwrap()
    }

    fn close(a: &IdempotentMeasure, b: &IdempotentMeasure) -> bool {
        a.support() == b.support()
            && a.atoms()
                .iter()
                .zip(b.atoms())
                .all(|(x, y)| (x.1.value() - y.1.value()).abs() < 1e-12)
    }

    #[test]
    fn fibre_homotopy_examples() {
        let s = space(2);
        let mu = m(&s, &[(0, 0.0), (1, -1.5)]);
        let d = IdempotentMeasure::dirac(s.clone(), Point(0)).unwrap();
        assert_eq!(fibre_homotopy(&mu, Point(0), 0.0).unwrap(), d);
        let quarter = fibre_homotopy(&mu, Point(0), 0.25).unwrap();
        assert!(close(&quarter, &m(&s, &[(0, 0.0), (1, -1.5 - LN3)])));
        assert!((quarter.atoms()[1].1.value() + 2.598612).abs() < 1e-6);
        assert_eq!(fibre_homotopy(&mu, Point(0), 0.75).unwrap(), mu);
        assert_eq!(fibre_homotopy(&mu, Point(0), 1.0).unwrap(), mu);
        assert!(matches!(fibre_homotopy(&mu, Point(1), 0.5), Err(Error::NotInFibre(_))));
        assert!(matches!(
            fibre_homotopy(&mu, Point(0), 1.5),
            Err(Error::ParameterOutOfRange(_))
        ));
    }

    #[test]
    fn deformation_homotopy_examples() {
        let s = space(3);
        let mu = m(&s, &[(0, 0.0), (1, -1.5)]);
        assert_eq!(deformation_homotopy(&mu, 0.0).unwrap(), mu);
        assert!(close(
            &deformation_homotopy(&mu, 0.75).unwrap(),
            &m(&s, &[(0, 0.0), (1, -1.5 - LN3)])
        ));
        assert_eq!(deformation_homotopy(&mu, 1.0).unwrap(), retract_to_dirac(&mu).unwrap());
        let d = IdempotentMeasure::dirac(s.clone(), Point(2)).unwrap();
        for t in [0.0, 0.1, 0.5, 0.9, 1.0] {
            assert_eq!(deformation_homotopy(&d, t).unwrap(), d);
        }
        let outside = m(&s, &[(0, 0.0), (1, -0.5)]);
        assert!(matches!(deformation_homotopy(&outside, 0.3), Err(Error::NotInIf(_))));
    }

    #[test]
    fn track_examples() {
        let s = space(2);
        let mu = m(&s, &[(0, 0.0), (1, -1.5)]);
        let d = IdempotentMeasure::dirac(s.clone(), Point(0)).unwrap();
        let tr = track(HomotopyKind::Deformation, &mu, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(tr.states(), &[mu.clone(), mu.clone(), d.clone()]);
        let tr = track(HomotopyKind::Fibre(Point(0)), &mu, &[0.0, 1.0]).unwrap();
        assert_eq!(tr.states(), &[d, mu.clone()]);
        assert!(track(HomotopyKind::Deformation, &mu, &[0.0, 0.7]).is_err());
        assert!(track(HomotopyKind::Deformation, &mu, &[0.0, 0.7, 0.7, 1.0]).is_err());
    }

    #[test]
    fn consecutive_gaps_shrink_with_refinement() {
        let s = space(4);
        let mu = m(&s, &[(0, 0.0), (1, -1.5), (3, -2.25)]);
        let family: Vec<TestFunction> = (0..10)
            .map(|j| {
                TestFunction::tight(s.clone(), (0..4).map(|i| ((i * (j + 1)) % 5) as f64 * 2.0).collect()).unwrap()
            })
            .collect();
        let coarse = track(HomotopyKind::Fibre(Point(0)), &mu, &uniform_grid(11).unwrap()).unwrap();
        let fine = track(HomotopyKind::Fibre(Point(0)), &mu, &uniform_grid(101).unwrap()).unwrap();
        let max_gap = |tr: &HomotopyTrack| {
            // Away from t = 0, where ln t diverges.
            tr.consecutive_gaps(&family)
                .unwrap()
                .iter()
                .zip(tr.t_grid())
                .filter(|(_, &t)| t >= 0.1)
                .map(|(g, _)| *g)
                .fold(0.0, f64::max)
        };
        assert!(max_gap(&coarse) > 0.0);
        assert!(max_gap(&fine) < max_gap(&coarse));
        assert!(fine.consecutive_gaps(&family).unwrap().iter().all(|g| g.is_finite()));
    }

    #[test]
    fn weight_curves_skip_absent_mass() {
        let s = space(2);
        let mu = m(&s, &[(0, 0.0), (1, -1.5)]);
        let tr = track(HomotopyKind::Fibre(Point(0)), &mu, &[0.0, 0.5, 1.0]).unwrap();
        let curves = tr.weight_curves();
        assert_eq!(curves[0].1, vec![(0.0, 0.0), (0.5, 0.0), (1.0, 0.0)]);
        assert_eq!(curves[1].1, vec![(0.5, -1.5), (1.0, -1.5)]);
    }

    fn witness(s: &Arc<FiniteMetricSpace>, tables: Vec<Vec<usize>>) -> HomotopyWitness {
        let steps = tables
            .into_iter()
            .map(|t| SpaceMap::new(s.clone(), s.clone(), t.into_iter().map(Point).collect()).unwrap())
            .collect();
        HomotopyWitness::tight(steps).unwrap()
    }

    #[test]
    fn functor_map_examples() {
        let s = space(3);
        let mu = m(&s, &[(0, 0.0), (1, -2.0)]);
        let w = witness(&s, vec![vec![0, 1, 2], vec![0, 2, 2], vec![0, 0, 0]]);
        assert_eq!(functor_map_at(&w, 0, &mu).unwrap(), mu);
        assert_eq!(functor_map_at(&w, 1, &mu).unwrap(), m(&s, &[(0, 0.0), (2, -2.0)]));
        assert_eq!(
            functor_map_at(&w, 2, &mu).unwrap(),
            IdempotentMeasure::dirac(s.clone(), Point(0)).unwrap()
        );
        assert!(matches!(functor_map_at(&w, 3, &mu), Err(Error::StepOutOfRange { .. })));
    }

    #[test]
    fn lift_examples() {
        let s = space(3);
        let id = witness(&s, vec![vec![0, 1, 2]; 4]);
        let mu = m(&s, &[(0, 0.0), (2, -2.0)]);
        let lifted = lift_witness(&id, std::slice::from_ref(&mu)).unwrap();
        assert!(lifted[0].states.iter().all(|st| *st == mu));

        let collapse = witness(&s, vec![vec![0, 1, 2], vec![1, 1, 1]]);
        let sample = vec![mu.clone(), m(&s, &[(1, 0.0)]), m(&s, &[(0, -3.0), (2, 0.0)])];
        let lifted = lift_witness(&collapse, &sample).unwrap();
        let ends: Vec<_> = lifted.iter().map(|l| l.states.last().unwrap().clone()).collect();
        assert!(ends
            .iter()
            .all(|e| *e == IdempotentMeasure::dirac(s.clone(), Point(1)).unwrap()));

        let d = IdempotentMeasure::dirac(s.clone(), Point(2)).unwrap();
        let w = witness(&s, vec![vec![0, 1, 2], vec![0, 1, 1], vec![0, 0, 0]]);
        let lifted = lift_witness(&w, &[d]).unwrap();
        let images: Vec<Point> = lifted[0].states.iter().map(|st| st.support()[0]).collect();
        assert_eq!(images, vec![Point(2), Point(1), Point(0)]);
    }

    #[test]
    fn support_distance_is_hausdorff() {
        let s = space(4);
        let a = m(&s, &[(0, 0.0), (1, -1.0)]);
        let b = m(&s, &[(3, 0.0)]);
        assert_eq!(support_distance(&a, &b).unwrap(), 3.0);
        assert_eq!(support_distance(&a, &a).unwrap(), 0.0);
    }
}
