//! The subspace `I_f(X)` of measures with a single dominant atom, and the
//! retractions built on it.
//!
//! `μ ∈ I_f(X)` when exactly one atom has weight `0` (the *top* atom) and
//! every other weight is at most `−ln(n+1)`, `n = |supp μ|`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::maxplus::{oplus, MaxPlus};
use crate::measure::{pushforward, IdempotentMeasure, Normalize};
use crate::space::{same_space, FiniteMetricSpace, Point, SpaceMap};

/// `−ln(n+1)`, the ceiling for non-top weights of an `n`-atom measure in `I_f`.
pub fn if_threshold(n: usize) -> f64 {
    -((n + 1) as f64).ln()
}

/// `−ln 2`, the ceiling for non-top weights inside `O_δx`.
pub fn o_delta_threshold() -> f64 {
    -std::f64::consts::LN_2
}

#[derive(Clone, Debug, PartialEq)]
pub enum IfViolation {
    /// Zero or several atoms carry weight 0.
    NonUniqueZero {
        zeros: usize,
    },
    AboveThreshold {
        point: Point,
        weight: f64,
        threshold: f64,
    },
}

impl fmt::Display for IfViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IfViolation::NonUniqueZero { zeros } => write!(f, "non-unique zero ({zeros} zero-weight atoms)"),
            IfViolation::AboveThreshold {
                point,
                weight,
                threshold,
            } => write!(f, "weight {weight} at point #{} exceeds {threshold}", point.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct IfClassification {
    /// Smallest `n` with `μ ∈ I_n`.
    pub support_size: usize,
    pub in_if: bool,
    /// The unique zero-weight atom, when there is exactly one.
    pub top: Option<Point>,
    pub violation: Option<IfViolation>,
}

pub fn classify(mu: &IdempotentMeasure) -> IfClassification {
    classify_with(mu, 0.0)
}

/// Classification with weight tolerance `tau`: weights `≥ −tau` count as
/// zero and the threshold test is `λ ≤ −ln(n+1) + tau`.
pub fn classify_with(mu: &IdempotentMeasure, tau: f64) -> IfClassification {
    let n = mu.len();
    let mut zeros = mu.atoms().iter().filter(|a| a.1.value() >= -tau);
    let top = match (zeros.next(), zeros.next()) {
        (Some(&(p, _)), None) => Some(p),
        _ => None,
    };
    let violation = match top {
        None => Some(IfViolation::NonUniqueZero {
            zeros: mu.atoms().iter().filter(|a| a.1.value() >= -tau).count(),
        }),
        Some(top) => {
            let threshold = if_threshold(n);
            mu.atoms()
                .iter()
                .find(|&&(p, w)| p != top && w.value() > threshold + tau)
                .map(|&(point, w)| IfViolation::AboveThreshold {
                    point,
                    weight: w.value(),
                    threshold,
                })
        }
    };
    IfClassification {
        support_size: n,
        in_if: violation.is_none(),
        top,
        violation,
    }
}

fn require_if(mu: &IdempotentMeasure) -> Result<Point> {
    let c = classify(mu);
    match (c.in_if, c.top, c.violation) {
        (true, Some(top), _) => Ok(top),
        (_, _, Some(v)) => Err(Error::NotInIf(v.to_string())),
        _ => Err(Error::NotInIf("unclassified".into())),
    }
}

/// The retraction `I_f(X) → δ(X)`, `μ ↦ δ_{top}`.
pub fn retract_to_dirac(mu: &IdempotentMeasure) -> Result<IdempotentMeasure> {
    let top = require_if(mu)?;
    IdempotentMeasure::dirac(mu.space().clone(), top)
}

/// Whether `μ` lies in the fibre of [`retract_to_dirac`] over `δ_x`.
pub fn fibre_contains(x: Point, mu: &IdempotentMeasure) -> bool {
    let c = classify(mu);
    c.in_if && c.top == Some(x)
}

/// Membership in `O_δx`: weight 0 at `x`, every other weight `< −ln 2`.
pub fn o_delta_contains(x: Point, nu: &IdempotentMeasure) -> bool {
    o_delta_contains_with(x, nu, 0.0)
}

pub fn o_delta_contains_with(x: Point, nu: &IdempotentMeasure, tau: f64) -> bool {
    let limit = o_delta_threshold();
    nu.weight_at(x).value() >= -tau && nu.atoms().iter().all(|&(p, w)| p == x || w.value() < limit - tau)
}

/// The `x` with `ν ∈ O_δx`, if any (the sets are pairwise disjoint).
pub fn o_delta_center(nu: &IdempotentMeasure) -> Option<Point> {
    let top = nu.atoms().iter().find(|a| a.1 == MaxPlus::ONE)?.0;
    o_delta_contains(top, nu).then_some(top)
}

/// How [`neighborhood_retract`] treats non-top weights above `−ln(n+1)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum RetractVariant {
    /// If any non-top weight exceeds the threshold, set all of them to it.
    /// Discontinuous where weights straddle the threshold.
    PaperLiteral,
    /// Clamp each non-top weight to `min(λ_i, −ln(n+1))`.
    #[default]
    AtomClamp,
}

impl RetractVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            RetractVariant::PaperLiteral => "paper_literal",
            RetractVariant::AtomClamp => "atom_clamp",
        }
    }

    pub const ALL: [RetractVariant; 2] = [RetractVariant::PaperLiteral, RetractVariant::AtomClamp];
}

impl fmt::Display for RetractVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RetractVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper_literal" => Ok(RetractVariant::PaperLiteral),
            "atom_clamp" => Ok(RetractVariant::AtomClamp),
            other => Err(Error::Config(format!("unknown retraction variant {other:?}"))),
        }
    }
}

/// Retraction of `⋃_x O_δx` onto `I_f(X)`.
pub fn neighborhood_retract(nu: &IdempotentMeasure, variant: RetractVariant) -> Result<IdempotentMeasure> {
    let top = o_delta_center(nu).ok_or_else(|| Error::NotInNeighborhood(nu.to_string()))?;
    let threshold = MaxPlus::finite(if_threshold(nu.len()))?;
    match variant {
        RetractVariant::PaperLiteral => {
            let above = nu.atoms().iter().any(|&(p, w)| p != top && w > threshold);
            if above {
                nu.map_weights(|p, w| if p == top { w } else { threshold })
            } else {
                Ok(nu.clone())
            }
        }
        RetractVariant::AtomClamp => nu.map_weights(|p, w| if p == top { w } else { w.min(threshold) }),
    }
}

/// A retraction `r: U → X` for `X ⊆ U ⊆ Y`.
#[derive(Clone, Debug)]
pub struct AmbientRetractionData {
    space: Arc<FiniteMetricSpace>,
    x: Vec<Point>,
    u: Vec<Point>,
    // r(p) for p in U, None off U.
    table: Vec<Option<Point>>,
}

impl AmbientRetractionData {
    /// `r` may list points of `U \ X` only, or also points of `X` mapped to
    /// themselves.
    pub fn new(
        space: Arc<FiniteMetricSpace>,
        mut x: Vec<Point>,
        mut u: Vec<Point>,
        r: &BTreeMap<Point, Point>,
    ) -> Result<Self> {
        let bad = |m: String| Error::InvalidRetraction(m);
        for p in x.iter().chain(&u).chain(r.keys()).chain(r.values()) {
            space.check(*p)?;
        }
        x.sort();
        x.dedup();
        u.sort();
        u.dedup();
        if x.is_empty() {
            return Err(bad("X is empty".into()));
        }
        let n = space.len();
        let mut in_x = vec![false; n];
        let mut in_u = vec![false; n];
        x.iter().for_each(|p| in_x[p.0] = true);
        u.iter().for_each(|p| in_u[p.0] = true);
        if let Some(p) = x.iter().find(|p| !in_u[p.0]) {
            return Err(bad(format!("{} is in X but not in U", space.id(*p))));
        }
        let mut table = vec![None; n];
        for &p in &u {
            let image = match r.get(&p) {
                Some(&q) => q,
                None if in_x[p.0] => p,
                None => return Err(bad(format!("r is undefined at {}", space.id(p)))),
            };
            if in_x[p.0] && image != p {
                return Err(bad(format!("r moves {} which lies in X", space.id(p))));
            }
            if !in_x[image.0] {
                return Err(bad(format!("r sends {} outside X", space.id(p))));
            }
            table[p.0] = Some(image);
        }
        if let Some(p) = r.keys().find(|p| !in_u[p.0]) {
            return Err(bad(format!("r is given at {} outside U", space.id(*p))));
        }
        let data = AmbientRetractionData { space, x, u, table };
        debug_assert!(data.is_retraction());
        Ok(data)
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    pub fn x(&self) -> &[Point] {
        &self.x
    }

    pub fn u(&self) -> &[Point] {
        &self.u
    }

    pub fn retract_point(&self, p: Point) -> Option<Point> {
        self.table.get(p.0).copied().flatten()
    }

    /// `r ∘ r = r` on `U` and `r(U) = X`.
    pub fn is_retraction(&self) -> bool {
        let idempotent = self.u.iter().all(|&p| {
            let q = self.table[p.0].expect("defined on U");
            self.table[q.0] == Some(q)
        });
        let mut image: Vec<Point> = self.u.iter().filter_map(|&p| self.table[p.0]).collect();
        image.sort();
        image.dedup();
        idempotent && image == self.x
    }

    /// `r` extended by the identity off `U`, as a self-map of `Y`.
    pub fn as_space_map(&self) -> SpaceMap {
        let table = self.space.points().map(|p| self.table[p.0].unwrap_or(p)).collect();
        SpaceMap::new(self.space.clone(), self.space.clone(), table).expect("table is total")
    }
}

/// Folds the mass of atoms outside `U` into the top atom and drops them.
pub fn ambient_merge(nu: &IdempotentMeasure, u: &[Point]) -> Result<IdempotentMeasure> {
    let top = o_delta_center(nu).ok_or_else(|| Error::NotInNeighborhood(nu.to_string()))?;
    let mut in_u = vec![false; nu.space().len()];
    for &p in u {
        in_u[nu.space().check(p)?.0] = true;
    }
    if !in_u[top.0] {
        return Err(Error::TopOutsideU(nu.space().id(top).into()));
    }
    let folded = nu
        .atoms()
        .iter()
        .filter(|a| !in_u[a.0 .0])
        .fold(nu.weight_at(top), |acc, a| oplus(acc, a.1));
    let raw = nu
        .atoms()
        .iter()
        .filter(|&&(p, _)| in_u[p.0] && p != top)
        .copied()
        .chain(std::iter::once((top, folded)));
    IdempotentMeasure::canonicalize(nu.space().clone(), raw, Normalize::Reject)
}

/// `R(r_U^Y(ν))`: merge onto `U`, then push forward along `r`. Defined on
/// measures of `I_f(Y)` whose top atom lies in `U`.
pub fn ambient_retract(nu: &IdempotentMeasure, data: &AmbientRetractionData) -> Result<IdempotentMeasure> {
    if !same_space(nu.space(), data.space()) {
        return Err(Error::SpaceMismatch);
    }
    if !data.is_retraction() {
        return Err(Error::InvalidRetraction("r is not a retraction of U onto X".into()));
    }
    require_if(nu)?;
    let merged = ambient_merge(nu, data.u())?;
    pushforward(&data.as_space_map(), &merged)
}
