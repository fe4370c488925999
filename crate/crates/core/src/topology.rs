//! Weak-topology neighborhoods of finite-support measures.
//!
//! A bracket neighborhood `⟨μ; U_1, …, U_n; ε⟩` traps the support of `ν`
//! inside open balls around the atoms of `μ`, requires every ball to be hit,
//! and keeps the weights of the atoms inside `U_i` within `ε` of `λ_i`. A
//! subbase neighborhood `⟨μ; φ; ε⟩` bounds `|μ(φ) − ν(φ)|`.

use crate::error::{Error, Result};
use crate::maxplus::MaxPlus;
use crate::measure::{IdempotentMeasure, Normalize};
use crate::space::{same_space, Point, TestFunction};
use crate::subspace::{classify, retract_to_dirac};

/// Floor applied to Lipschitz bounds when sizing refinement balls.
pub const MIN_LIPSCHITZ: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct BracketNeighborhood {
    base: IdempotentMeasure,
    radii: Vec<f64>,
    epsilon: f64,
}

impl BracketNeighborhood {
    /// Ball `i` is the open ball of radius `radii[i]` around atom `i` of `base`.
    pub fn new(base: IdempotentMeasure, radii: Vec<f64>, epsilon: f64) -> Result<Self> {
        if radii.len() != base.len() {
            return Err(Error::InvalidNeighborhood(format!(
                "{} radii for {} atoms",
                radii.len(),
                base.len()
            )));
        }
        if let Some(r) = radii.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
            return Err(Error::InvalidNeighborhood(format!("radius {r} must be positive")));
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidNeighborhood(format!(
                "epsilon {epsilon} must be positive"
            )));
        }
        Ok(BracketNeighborhood { base, radii, epsilon })
    }

    pub fn base(&self) -> &IdempotentMeasure {
        &self.base
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    #[inline]
    pub fn in_ball(&self, i: usize, p: Point) -> bool {
        self.base.space().dist(self.base.atoms()[i].0, p) < self.radii[i]
    }

    pub fn ball_points(&self, i: usize) -> Vec<Point> {
        self.base.space().points().filter(|&p| self.in_ball(i, p)).collect()
    }

    /// First pair of balls sharing a point, as `(i, j, point)`.
    pub fn overlap(&self) -> Option<(usize, usize, Point)> {
        let n = self.radii.len();
        for p in self.base.space().points() {
            let mut hit = (0..n).filter(|&i| self.in_ball(i, p));
            if let (Some(i), Some(j)) = (hit.next(), hit.next()) {
                return Some((i, j, p));
            }
        }
        None
    }
}

/// Support inside `⋃U_i`, meeting every `U_i`, and
/// `max_{y_j ∈ U_i} |λ_i − γ_j| < ε` for every `i`.
pub fn bracket_contains(n: &BracketNeighborhood, nu: &IdempotentMeasure) -> Result<bool> {
    if !same_space(n.base.space(), nu.space()) {
        return Err(Error::SpaceMismatch);
    }
    let balls = n.radii.len();
    let mut hit = vec![false; balls];
    for &(y, gamma) in nu.atoms() {
        let mut inside_any = false;
        for (i, &(_, lambda)) in n.base.atoms().iter().enumerate() {
            if n.in_ball(i, y) {
                inside_any = true;
                hit[i] = true;
                if (lambda.value() - gamma.value()).abs() >= n.epsilon {
                    return Ok(false);
                }
            }
        }
        if !inside_any {
            return Ok(false);
        }
    }
    Ok(hit.into_iter().all(|h| h))
}

#[derive(Clone, Debug)]
pub struct SubbaseNeighborhood {
    base: IdempotentMeasure,
    phi: TestFunction,
    epsilon: f64,
}

impl SubbaseNeighborhood {
    pub fn new(base: IdempotentMeasure, phi: TestFunction, epsilon: f64) -> Result<Self> {
        if !same_space(base.space(), phi.space()) {
            return Err(Error::SpaceMismatch);
        }
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(Error::InvalidNeighborhood(format!(
                "epsilon {epsilon} must be positive"
            )));
        }
        Ok(SubbaseNeighborhood { base, phi, epsilon })
    }

    pub fn base(&self) -> &IdempotentMeasure {
        &self.base
    }

    pub fn phi(&self) -> &TestFunction {
        &self.phi
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// `|μ(φ) − ν(φ)| < ε`.
pub fn subbase_contains(n: &SubbaseNeighborhood, nu: &IdempotentMeasure) -> Result<bool> {
    Ok((n.base.evaluate(&n.phi)? - nu.evaluate(&n.phi)?).abs() < n.epsilon)
}

/// Bracket with radius `ε / 2L` around every atom and tolerance `ε / 2`,
/// contained in the subbase set.
pub fn refine_to_bracket(n: &SubbaseNeighborhood) -> BracketNeighborhood {
    let l = n.phi.lipschitz().max(MIN_LIPSCHITZ);
    let radius = n.epsilon / (2.0 * l);
    BracketNeighborhood {
        base: n.base.clone(),
        radii: vec![radius; n.base.len()],
        epsilon: n.epsilon / 2.0,
    }
}

/// A probe inside the bracket and in `I_f` whose retraction leaves `U_{i0}`.
#[derive(Clone, Debug, PartialEq)]
pub struct ForwardFailure {
    pub probe: IdempotentMeasure,
    pub image: Point,
}

/// A grid point whose witness measure misses the bracket or retracts elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessFailure {
    pub y: Point,
    pub witness: IdempotentMeasure,
    pub in_bracket: bool,
    pub image: Option<Point>,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct OpennessReport {
    pub top_index: usize,
    pub probes_total: usize,
    pub probes_in_bracket: usize,
    /// Probes in the bracket and in `I_f`; the forward check runs on these.
    pub probes_checked: usize,
    pub forward_failures: Vec<ForwardFailure>,
    pub witnesses_checked: usize,
    pub witness_failures: Vec<WitnessFailure>,
}

impl OpennessReport {
    pub fn passed(&self) -> bool {
        self.forward_failures.is_empty() && self.witness_failures.is_empty()
    }
}

/// `μ_y = 0 ⊙ δ_y ⊕ ⊕_{i ≠ i0} λ_i ⊙ δ_{x_i}`.
pub fn openness_witness(base: &IdempotentMeasure, top: Point, y: Point) -> Result<IdempotentMeasure> {
    let raw = base
        .atoms()
        .iter()
        .filter(|a| a.0 != top)
        .copied()
        .chain(std::iter::once((y, MaxPlus::ONE)));
    IdempotentMeasure::canonicalize(base.space().clone(), raw, Normalize::Reject)
}

/// Checks `r(⟨μ; U; ε⟩ ∩ I_f) = δ(U_{i0})` in both directions: every probe in
/// the bracket retracts into `U_{i0}`, and every grid point `y ∈ U_{i0}` is
/// reached by its witness `μ_y`.
pub fn openness_check(n: &BracketNeighborhood, grid: &[Point], probes: &[IdempotentMeasure]) -> Result<OpennessReport> {
    let ln3 = 3f64.ln();
    if n.epsilon >= ln3 {
        return Err(Error::EpsilonTooLarge(n.epsilon));
    }
    let c = classify(&n.base);
    let top = match (c.in_if, c.top) {
        (true, Some(top)) => top,
        _ => return Err(Error::NotInIf(c.violation.map(|v| v.to_string()).unwrap_or_default())),
    };
    let space = n.base.space();
    if let Some((i, j, p)) = n.overlap() {
        return Err(Error::BallsOverlap(i, j, space.id(p).into()));
    }
    let i0 = n.base.atoms().iter().position(|a| a.0 == top).expect("top is an atom");
    for &y in grid {
        space.check(y)?;
        if !n.in_ball(i0, y) {
            return Err(Error::GridOutsideBall(space.id(y).into()));
        }
    }

    let mut report = OpennessReport {
        top_index: i0,
        probes_total: probes.len(),
        ..OpennessReport::default()
    };
    for probe in probes {
        if !bracket_contains(n, probe)? {
            continue;
        }
        report.probes_in_bracket += 1;
        if !classify(probe).in_if {
            continue;
        }
        report.probes_checked += 1;
        let image = retract_to_dirac(probe)?.support()[0];
        if !n.in_ball(i0, image) {
            report.forward_failures.push(ForwardFailure {
                probe: probe.clone(),
                image,
            });
        }
    }
    for &y in grid {
        let witness = openness_witness(&n.base, top, y)?;
        report.witnesses_checked += 1;
        let in_bracket = bracket_contains(n, &witness)?;
        let image = retract_to_dirac(&witness).ok().map(|d| d.support()[0]);
        if !in_bracket || image != Some(y) {
            report.witness_failures.push(WitnessFailure {
                y,
                witness,
                in_bracket,
                image,
            });
        }
    }
    Ok(report)
}
