//! Idempotent probability measures with finite support.
//!
//! A measure `μ = ⊕ λ_i ⊙ δ_{x_i}` is stored in canonical form: atoms sorted
//! by point order, one atom per point, no bottom weights, and a maximum
//! weight of exactly `0`. Every constructor enforces this, so structural
//! equality is measure equality.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::maxplus::{odot, oplus, MaxPlus};
use crate::space::{same_space, FiniteMetricSpace, Point, SpaceMap, TestFunction};

/// Largest space the subset-scanning support oracle accepts.
pub const SUPPORT_ORACLE_MAX_POINTS: usize = 20;

/// What [`IdempotentMeasure::canonicalize`] does with a non-normalized input.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalize {
    Reject,
    /// Translate all weights by `⊙(−max)`.
    Shift,
}

#[derive(Clone, Debug)]
pub struct IdempotentMeasure {
    space: Arc<FiniteMetricSpace>,
    atoms: Vec<(Point, MaxPlus)>,
}

impl PartialEq for IdempotentMeasure {
    fn eq(&self, other: &Self) -> bool {
        self.atoms == other.atoms && same_space(&self.space, &other.space)
    }
}

impl IdempotentMeasure {
    /// Merges duplicate points by `⊕`, drops bottom atoms and normalizes.
    pub fn canonicalize<I>(space: Arc<FiniteMetricSpace>, raw: I, mode: Normalize) -> Result<Self>
    where
        I: IntoIterator<Item = (Point, MaxPlus)>,
    {
        let mut atoms = Vec::new();
        for (p, w) in raw {
            space.check(p)?;
            if !w.is_bottom() {
                atoms.push((p, w));
            }
        }
        atoms.sort_by_key(|a| a.0);
        atoms.dedup_by(|later, kept| {
            if later.0 == kept.0 {
                kept.1 = oplus(kept.1, later.1);
                true
            } else {
                false
            }
        });
        let max = MaxPlus::sum(atoms.iter().map(|a| a.1));
        if max.is_bottom() {
            return Err(Error::EmptySupport);
        }
        if max != MaxPlus::ONE {
            match mode {
                Normalize::Reject => return Err(Error::NotNormalized(max.value())),
                Normalize::Shift => {
                    for a in &mut atoms {
                        a.1 = MaxPlus::finite(a.1.value() - max.value())?;
                    }
                }
            }
        }
        Ok(IdempotentMeasure { space, atoms })
    }

    /// Canonicalizes atoms given by point id.
    pub fn from_ids(space: Arc<FiniteMetricSpace>, atoms: &[(&str, f64)], mode: Normalize) -> Result<Self> {
        let raw = atoms
            .iter()
            .map(|&(id, w)| Ok((space.point(id)?, MaxPlus::new(w)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::canonicalize(space, raw, mode)
    }

    /// The Dirac measure `δ_x`.
    pub fn dirac(space: Arc<FiniteMetricSpace>, x: Point) -> Result<Self> {
        space.check(x)?;
        Ok(IdempotentMeasure {
            space,
            atoms: vec![(x, MaxPlus::ONE)],
        })
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn atoms(&self) -> &[(Point, MaxPlus)] {
        &self.atoms
    }

    /// Number of atoms, i.e. `|supp μ|`.
    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Weight at `p`; bottom off the support.
    pub fn weight_at(&self, p: Point) -> MaxPlus {
        match self.atoms.binary_search_by_key(&p, |a| a.0) {
            Ok(i) => self.atoms[i].1,
            Err(_) => MaxPlus::BOTTOM,
        }
    }

    pub fn is_dirac(&self) -> bool {
        self.atoms.len() == 1
    }

    /// `⊕_i λ_i ⊙ φ(x_i)`.
    pub fn evaluate(&self, phi: &TestFunction) -> Result<f64> {
        if !same_space(&self.space, phi.space()) {
            return Err(Error::SpaceMismatch);
        }
        Ok(self.evaluate_values(phi.values()))
    }

    /// Evaluation against a raw value table indexed by point.
    pub fn evaluate_values(&self, values: &[f64]) -> f64 {
        self.atoms
            .iter()
            .map(|&(p, w)| w.value() + values[p.0])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// The support, in space order.
    pub fn support(&self) -> Vec<Point> {
        self.atoms.iter().map(|a| a.0).collect()
    }

    /// Replaces the weight of every atom by `f(point, weight)` and
    /// canonicalizes (reject mode).
    pub fn map_weights<F>(&self, mut f: F) -> Result<Self>
    where
        F: FnMut(Point, MaxPlus) -> MaxPlus,
    {
        let raw: Vec<_> = self.atoms.iter().map(|&(p, w)| (p, f(p, w))).collect();
        Self::canonicalize(self.space.clone(), raw, Normalize::Reject)
    }
}

impl fmt::Display for IdempotentMeasure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, (p, w)) in self.atoms.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "({}, {})", self.space.id(*p), w)?;
        }
        f.write_str("]")
    }
}

/// Residuals of the three defining properties of an idempotent measure.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct AxiomResiduals {
    /// `|μ(λ_X) − λ|`
    pub normalization: f64,
    /// `|μ(λ ⊙ φ) − λ ⊙ μ(φ)|`
    pub homogeneity: f64,
    /// `|μ(φ ⊕ ψ) − μ(φ) ⊕ μ(ψ)|`
    pub additivity: f64,
}

impl AxiomResiduals {
    pub fn max(&self) -> f64 {
        self.normalization.max(self.homogeneity).max(self.additivity)
    }
}

pub fn verify_axioms(
    mu: &IdempotentMeasure,
    phi: &TestFunction,
    psi: &TestFunction,
    lambda: f64,
) -> Result<AxiomResiduals> {
    let constant = TestFunction::constant(mu.space.clone(), lambda)?;
    let shifted = phi.shifted(lambda)?;
    let joined = phi.join(psi)?;
    let (m_phi, m_psi) = (mu.evaluate(phi)?, mu.evaluate(psi)?);
    Ok(AxiomResiduals {
        normalization: (mu.evaluate(&constant)? - lambda).abs(),
        homogeneity: (mu.evaluate(&shifted)? - (lambda + m_phi)).abs(),
        additivity: (mu.evaluate(&joined)? - m_phi.max(m_psi)).abs(),
    })
}

/// Support computed from the intersection formula over all subsets `A ⊆ X`.
///
/// Works from evaluations only: `μ ∈ I(A)` iff raising a test function at a
/// point outside `A` never changes `μ`. Each point is probed once with a
/// spike of height [`SPIKE`], then every subset is scanned.
pub fn support_oracle(mu: &IdempotentMeasure) -> Result<Vec<Point>> {
    const SPIKE: f64 = 1e300;
    let n = mu.space.len();
    if n > SUPPORT_ORACLE_MAX_POINTS {
        return Err(Error::SpaceTooLarge {
            len: n,
            max: SUPPORT_ORACLE_MAX_POINTS,
        });
    }
    let baseline = mu.evaluate_values(&vec![0.0; n]);
    // seen[x]: the functional reacts to a spike at x.
    let seen: Vec<bool> = (0..n)
        .map(|x| {
            let mut probe = vec![0.0; n];
            probe[x] = SPIKE;
            mu.evaluate_values(&probe) != baseline
        })
        .collect();
    let full: u32 = if n == 32 { u32::MAX } else { (1u32 << n) - 1 };
    let mut intersection = full;
    for subset in 0..=full {
        let carries_mu = (0..n).all(|x| subset & (1 << x) != 0 || !seen[x]);
        if carries_mu {
            intersection &= subset;
        }
    }
    Ok((0..n).filter(|x| intersection & (1 << x) != 0).map(Point).collect())
}

/// `I(f)(μ)`: atoms moved along `f`, collisions merged by `⊕`.
pub fn pushforward(f: &SpaceMap, mu: &IdempotentMeasure) -> Result<IdempotentMeasure> {
    if !same_space(f.domain(), &mu.space) {
        return Err(Error::SpaceMismatch);
    }
    let raw = mu.atoms.iter().map(|&(p, w)| (f.apply(p), w));
    IdempotentMeasure::canonicalize(f.codomain().clone(), raw, Normalize::Reject)
}

/// `λ1 ⊙ ν ⊕ λ2 ⊙ μ` for `λ1 ⊕ λ2 = 0`.
pub fn tropical_combination(
    l1: MaxPlus,
    nu: &IdempotentMeasure,
    l2: MaxPlus,
    mu: &IdempotentMeasure,
) -> Result<IdempotentMeasure> {
    if oplus(l1, l2) != MaxPlus::ONE {
        return Err(Error::CoefficientNormalization(l1.value(), l2.value()));
    }
    if !same_space(&nu.space, &mu.space) {
        return Err(Error::SpaceMismatch);
    }
    let raw = nu
        .atoms
        .iter()
        .map(|&(p, w)| (p, odot(l1, w)))
        .chain(mu.atoms.iter().map(|&(p, w)| (p, odot(l2, w))));
    IdempotentMeasure::canonicalize(mu.space.clone(), raw, Normalize::Reject)
}

/// `max_{φ ∈ family} |μ(φ) − ν(φ)|`.
pub fn eval_gap(mu: &IdempotentMeasure, nu: &IdempotentMeasure, family: &[TestFunction]) -> Result<f64> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if !same_space(&mu.space, &nu.space) {
        return Err(Error::SpaceMismatch);
    }
    family.iter().try_fold(0.0f64, |acc, phi| {
        Ok(acc.max((mu.evaluate(phi)? - nu.evaluate(phi)?).abs()))
    })
}
