//! Finite metric spaces, point maps between them, Lipschitz test functions
//! and discrete homotopy witnesses.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};

/// Relative slack allowed in the triangle inequality and in Lipschitz
/// checks, absorbing rounding in distances computed from coordinates.
pub const METRIC_SLACK: f64 = 1e-12;

/// Index of a point inside its [`FiniteMetricSpace`]. Ordering follows the
/// space's point order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Point(pub usize);

impl Point {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

/// One violated instance of a metric axiom, named by point ids.
#[derive(Clone, Debug, PartialEq)]
pub enum MetricViolation {
    NotFinite {
        a: String,
        b: String,
        value: f64,
    },
    Negative {
        a: String,
        b: String,
        value: f64,
    },
    NonZeroDiagonal {
        a: String,
        value: f64,
    },
    ZeroBetweenDistinct {
        a: String,
        b: String,
    },
    Asymmetric {
        a: String,
        b: String,
        ab: f64,
        ba: f64,
    },
    Triangle {
        a: String,
        b: String,
        c: String,
        ac: f64,
        ab_bc: f64,
    },
}

impl fmt::Display for MetricViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricViolation::NotFinite { a, b, value } => write!(f, "d({a},{b}) = {value} is not finite"),
            MetricViolation::Negative { a, b, value } => write!(f, "d({a},{b}) = {value} < 0"),
            MetricViolation::NonZeroDiagonal { a, value } => write!(f, "d({a},{a}) = {value} != 0"),
            MetricViolation::ZeroBetweenDistinct { a, b } => write!(f, "d({a},{b}) = 0 for distinct points"),
            MetricViolation::Asymmetric { a, b, ab, ba } => {
                write!(f, "symmetry: d({a},{b}) = {ab} but d({b},{a}) = {ba}")
            }
            MetricViolation::Triangle { a, b, c, ac, ab_bc } => {
                write!(f, "triangle: d({a},{c}) = {ac} > d({a},{b}) + d({b},{c}) = {ab_bc}")
            }
        }
    }
}

/// Id and (possibly empty) coordinates of one point.
#[derive(Clone, Debug, PartialEq)]
pub struct PointSpec {
    pub id: String,
    pub coords: Vec<f64>,
}

impl PointSpec {
    pub fn new(id: impl Into<String>, coords: Vec<f64>) -> Self {
        PointSpec { id: id.into(), coords }
    }
}

/// A finite metric space, validated against every metric axiom instance at
/// construction.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteMetricSpace {
    ids: Vec<String>,
    coords: Vec<Vec<f64>>,
    dist: Vec<f64>,
    index: HashMap<String, usize>,
}

/// Builds a space from points and an optional distance table. Without a
/// table the Euclidean metric on the coordinates is used.
pub fn build_space(points: Vec<PointSpec>, metric: Option<Vec<Vec<f64>>>) -> Result<FiniteMetricSpace> {
    if points.is_empty() {
        return Err(Error::EmptySpace);
    }
    let n = points.len();
    let mut index = HashMap::with_capacity(n);
    for (i, p) in points.iter().enumerate() {
        if index.insert(p.id.clone(), i).is_some() {
            return Err(Error::DuplicatePoint(p.id.clone()));
        }
    }
    let dist = match metric {
        Some(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::MalformedSpace(format!("metric table must be {n}x{n}")));
            }
            rows.into_iter().flatten().collect()
        }
        None => {
            let dim = points[0].coords.len();
            if dim == 0 {
                return Err(Error::MalformedSpace("no metric and no coordinates".into()));
            }
            if let Some(p) = points.iter().find(|p| p.coords.len() != dim) {
                return Err(Error::MalformedSpace(format!(
                    "point {:?} has {} coordinates, expected {dim}",
                    p.id,
                    p.coords.len()
                )));
            }
            let mut d = vec![0.0; n * n];
            for i in 0..n {
                for j in 0..n {
                    d[i * n + j] = euclidean(&points[i].coords, &points[j].coords);
                }
            }
            d
        }
    };
    let (ids, coords): (Vec<_>, Vec<_>) = points.into_iter().map(|p| (p.id, p.coords)).unzip();
    let space = FiniteMetricSpace {
        ids,
        coords,
        dist,
        index,
    };
    let violations = space.metric_violations();
    if violations.is_empty() {
        Ok(space)
    } else {
        Err(Error::MetricAxioms(violations))
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

impl FiniteMetricSpace {
    fn metric_violations(&self) -> Vec<MetricViolation> {
        let n = self.len();
        let id = |i: usize| self.ids[i].clone();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = self.dist[i * n + j];
                if !v.is_finite() {
                    out.push(MetricViolation::NotFinite {
                        a: id(i),
                        b: id(j),
                        value: v,
                    });
                } else if v < 0.0 {
                    out.push(MetricViolation::Negative {
                        a: id(i),
                        b: id(j),
                        value: v,
                    });
                } else if i == j && v != 0.0 {
                    out.push(MetricViolation::NonZeroDiagonal { a: id(i), value: v });
                } else if i < j && v == 0.0 {
                    out.push(MetricViolation::ZeroBetweenDistinct { a: id(i), b: id(j) });
                }
                if i < j && v != self.dist[j * n + i] {
                    out.push(MetricViolation::Asymmetric {
                        a: id(i),
                        b: id(j),
                        ab: v,
                        ba: self.dist[j * n + i],
                    });
                }
            }
        }
        if !out.is_empty() {
            // Triangle checks are meaningless on a table that is not even finite and symmetric.
            return out;
        }
        for a in 0..n {
            for b in 0..n {
                let ab = self.dist[a * n + b];
                for c in 0..n {
                    let ac = self.dist[a * n + c];
                    let ab_bc = ab + self.dist[b * n + c];
                    if ac > ab_bc * (1.0 + METRIC_SLACK) {
                        out.push(MetricViolation::Triangle {
                            a: id(a),
                            b: id(b),
                            c: id(c),
                            ac,
                            ab_bc,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = Point> + Clone {
        (0..self.len()).map(Point)
    }

    pub fn id(&self, p: Point) -> &str {
        &self.ids[p.0]
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn coords(&self, p: Point) -> &[f64] {
        &self.coords[p.0]
    }

    pub fn point(&self, id: &str) -> Result<Point> {
        self.index
            .get(id)
            .map(|&i| Point(i))
            .ok_or_else(|| Error::UnknownPoint(id.to_string()))
    }

    pub fn check(&self, p: Point) -> Result<Point> {
        if p.0 < self.len() {
            Ok(p)
        } else {
            Err(Error::PointOutOfRange {
                index: p.0,
                len: self.len(),
            })
        }
    }

    #[inline]
    pub fn dist(&self, a: Point, b: Point) -> f64 {
        self.dist[a.0 * self.len() + b.0]
    }

    pub fn metric_rows(&self) -> Vec<Vec<f64>> {
        self.dist.chunks(self.len()).map(<[f64]>::to_vec).collect()
    }

    /// Points of the open ball `B(center, radius)`.
    pub fn ball(&self, center: Point, radius: f64) -> Vec<Point> {
        self.points().filter(|&q| self.dist(center, q) < radius).collect()
    }

    /// Point closest to `coords` (first one on ties).
    pub fn nearest(&self, coords: &[f64]) -> Point {
        self.points()
            .min_by(|&a, &b| {
                euclidean(self.coords(a), coords)
                    .partial_cmp(&euclidean(self.coords(b), coords))
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("spaces are nonempty")
    }

    /// The metric subspace on `keep`, in the given order. Ids and coordinates
    /// carry over.
    pub fn subspace(&self, keep: &[Point]) -> Result<FiniteMetricSpace> {
        if keep.is_empty() {
            return Err(Error::EmptySpace);
        }
        let points = keep
            .iter()
            .map(|&p| {
                self.check(p)
                    .map(|p| PointSpec::new(self.id(p), self.coords(p).to_vec()))
            })
            .collect::<Result<Vec<_>>>()?;
        let metric = keep
            .iter()
            .map(|&a| keep.iter().map(|&b| self.dist(a, b)).collect())
            .collect();
        build_space(points, Some(metric))
    }
}

/// Same space by identity or by value.
pub fn same_space(a: &Arc<FiniteMetricSpace>, b: &Arc<FiniteMetricSpace>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}

/// A real function on a finite space with a validated Lipschitz bound.
#[derive(Clone, Debug)]
pub struct TestFunction {
    space: Arc<FiniteMetricSpace>,
    values: Vec<f64>,
    lipschitz: f64,
}

impl TestFunction {
    pub fn new(space: Arc<FiniteMetricSpace>, values: Vec<f64>, lipschitz: f64) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::InvalidTestFunction(format!(
                "{} values for a space of {} points",
                values.len(),
                space.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidTestFunction(format!("non-finite value {v}")));
        }
        if !(lipschitz.is_finite() && lipschitz >= 0.0) {
            return Err(Error::InvalidTestFunction(format!("Lipschitz bound {lipschitz}")));
        }
        for a in space.points() {
            for b in space.points().skip(a.0 + 1) {
                let gap = (values[a.0] - values[b.0]).abs();
                let allowed = lipschitz * space.dist(a, b);
                if gap > allowed * (1.0 + METRIC_SLACK) + METRIC_SLACK * gap {
                    return Err(Error::Lipschitz {
                        a: space.id(a).into(),
                        b: space.id(b).into(),
                        bound: lipschitz,
                        needed: gap / space.dist(a, b),
                    });
                }
            }
        }
        Ok(TestFunction {
            space,
            values,
            lipschitz,
        })
    }

    /// Uses the smallest valid Lipschitz bound.
    pub fn tight(space: Arc<FiniteMetricSpace>, values: Vec<f64>) -> Result<Self> {
        let mut l: f64 = 0.0;
        if values.len() == space.len() {
            for a in space.points() {
                for b in space.points().skip(a.0 + 1) {
                    l = l.max((values[a.0] - values[b.0]).abs() / space.dist(a, b));
                }
            }
        }
        Self::new(space, values, l)
    }

    pub fn constant(space: Arc<FiniteMetricSpace>, c: f64) -> Result<Self> {
        let n = space.len();
        Self::new(space, vec![c; n], 0.0)
    }

    pub fn space(&self) -> &Arc<FiniteMetricSpace> {
        &self.space
    }

    #[inline]
    pub fn value(&self, p: Point) -> f64 {
        self.values[p.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// `λ ⊙ φ`.
    pub fn shifted(&self, lambda: f64) -> Result<Self> {
        Self::tight(self.space.clone(), self.values.iter().map(|v| v + lambda).collect())
    }

    /// `φ ⊕ ψ`.
    pub fn join(&self, other: &TestFunction) -> Result<Self> {
        if !same_space(&self.space, &other.space) {
            return Err(Error::SpaceMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| a.max(*b)).collect();
        Self::new(self.space.clone(), values, self.lipschitz.max(other.lipschitz))
    }

    /// `ψ ∘ f` on the domain of `f`.
    pub fn pullback(&self, f: &SpaceMap) -> Result<Self> {
        if !same_space(&self.space, f.codomain()) {
            return Err(Error::SpaceMismatch);
        }
        let values = f.domain().points().map(|p| self.value(f.apply(p))).collect();
        Self::tight(f.domain().clone(), values)
    }
}

/// A total map between finite spaces.
#[derive(Clone, Debug)]
pub struct SpaceMap {
    domain: Arc<FiniteMetricSpace>,
    codomain: Arc<FiniteMetricSpace>,
    table: Vec<Point>,
}

impl PartialEq for SpaceMap {
    fn eq(&self, other: &Self) -> bool {
        same_space(&self.domain, &other.domain)
            && same_space(&self.codomain, &other.codomain)
            && self.table == other.table
    }
}

impl SpaceMap {
    pub fn new(domain: Arc<FiniteMetricSpace>, codomain: Arc<FiniteMetricSpace>, table: Vec<Point>) -> Result<Self> {
        if table.len() != domain.len() {
            return Err(Error::MapNotTotal(format!(
                "{} entries for a domain of {} points",
                table.len(),
                domain.len()
            )));
        }
        for &p in &table {
            codomain.check(p)?;
        }
        Ok(SpaceMap {
            domain,
            codomain,
            table,
        })
    }

    pub fn identity(space: Arc<FiniteMetricSpace>) -> Self {
        let table = space.points().collect();
        SpaceMap {
            domain: space.clone(),
            codomain: space,
            table,
        }
    }

    pub fn constant(domain: Arc<FiniteMetricSpace>, codomain: Arc<FiniteMetricSpace>, target: Point) -> Result<Self> {
        let table = vec![target; domain.len()];
        Self::new(domain, codomain, table)
    }

    pub fn domain(&self) -> &Arc<FiniteMetricSpace> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FiniteMetricSpace> {
        &self.codomain
    }

    pub fn table(&self) -> &[Point] {
        &self.table
    }

    #[inline]
    pub fn apply(&self, p: Point) -> Point {
        self.table[p.0]
    }

    pub fn is_identity(&self) -> bool {
        same_space(&self.domain, &self.codomain) && self.table.iter().enumerate().all(|(i, p)| p.0 == i)
    }

    /// The single image point, if the map is constant.
    pub fn constant_value(&self) -> Option<Point> {
        let first = self.table[0];
        self.table.iter().all(|&p| p == first).then_some(first)
    }
}

/// `g ∘ f`.
pub fn compose_maps(f: &SpaceMap, g: &SpaceMap) -> Result<SpaceMap> {
    if !same_space(&f.codomain, &g.domain) {
        return Err(Error::DomainMismatch);
    }
    let table = f.table.iter().map(|&p| g.apply(p)).collect();
    Ok(SpaceMap {
        domain: f.domain.clone(),
        codomain: g.codomain.clone(),
        table,
    })
}

/// A homotopy sampled at steps `h_0, …, h_K`, with consecutive images at
/// most `step_bound` apart.
#[derive(Clone, Debug)]
pub struct HomotopyWitness {
    steps: Vec<SpaceMap>,
    step_bound: f64,
}

impl HomotopyWitness {
    pub fn new(steps: Vec<SpaceMap>, step_bound: f64) -> Result<Self> {
        let first = steps.first().ok_or(Error::EmptyWitness)?;
        if !(step_bound.is_finite() && step_bound >= 0.0) {
            return Err(Error::Config(format!(
                "step bound {step_bound} must be finite and >= 0"
            )));
        }
        for s in &steps[1..] {
            if !same_space(s.domain(), first.domain()) || !same_space(s.codomain(), first.codomain()) {
                return Err(Error::DomainMismatch);
            }
        }
        let cod = first.codomain();
        for (k, pair) in steps.windows(2).enumerate() {
            for x in first.domain().points() {
                let moved = cod.dist(pair[0].apply(x), pair[1].apply(x));
                if moved > step_bound {
                    return Err(Error::StepBound {
                        step: k,
                        point: first.domain().id(x).into(),
                        moved,
                        bound: step_bound,
                    });
                }
            }
        }
        Ok(HomotopyWitness { steps, step_bound })
    }

    /// Witness whose bound is the largest displacement actually present.
    pub fn tight(steps: Vec<SpaceMap>) -> Result<Self> {
        let bound = max_step_displacement(&steps);
        Self::new(steps, bound)
    }

    pub fn steps(&self) -> &[SpaceMap] {
        &self.steps
    }

    pub fn step(&self, k: usize) -> Result<&SpaceMap> {
        self.steps.get(k).ok_or(Error::StepOutOfRange {
            index: k,
            len: self.steps.len(),
        })
    }

    /// Index of the last step, `K`.
    pub fn last_index(&self) -> usize {
        self.steps.len() - 1
    }

    pub fn step_bound(&self) -> f64 {
        self.step_bound
    }

    pub fn domain(&self) -> &Arc<FiniteMetricSpace> {
        self.steps[0].domain()
    }

    pub fn codomain(&self) -> &Arc<FiniteMetricSpace> {
        self.steps[0].codomain()
    }

    pub fn max_displacement(&self) -> f64 {
        max_step_displacement(&self.steps)
    }
}

fn max_step_displacement(steps: &[SpaceMap]) -> f64 {
    let mut m: f64 = 0.0;
    for pair in steps.windows(2) {
        let cod = pair[0].codomain();
        for x in pair[0].domain().points() {
            m = m.max(cod.dist(pair[0].apply(x), pair[1].apply(x)));
        }
    }
    m
}

/// True iff the witness starts at the identity and ends at a constant map.
pub fn verify_collapse(w: &HomotopyWitness) -> bool {
    w.steps[0].is_identity() && w.steps[w.last_index()].constant_value().is_some()
}
