//! Scenario spaces and the random objects the suites draw from them.

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::maxplus::MaxPlus;
use crate::measure::{IdempotentMeasure, Normalize};
use crate::space::{build_space, FiniteMetricSpace, HomotopyWitness, Point, PointSpec, SpaceMap, TestFunction};
use crate::subspace::if_threshold;
use crate::topology::BracketNeighborhood;

/// Space generator spec, written `grid_1d:N`, `circle:N` or
/// `random_points:D:N:SEED`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpaceGen {
    Grid1d(usize),
    Circle(usize),
    RandomPoints { dim: usize, n: usize, seed: u64 },
}

impl fmt::Display for SpaceGen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpaceGen::Grid1d(n) => write!(f, "grid_1d:{n}"),
            SpaceGen::Circle(n) => write!(f, "circle:{n}"),
            SpaceGen::RandomPoints { dim, n, seed } => write!(f, "random_points:{dim}:{n}:{seed}"),
        }
    }
}

impl FromStr for SpaceGen {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad space spec {s:?}"));
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| parts[i].parse::<usize>().map_err(|_| bad());
        match (parts[0], parts.len()) {
            ("grid_1d", 2) => Ok(SpaceGen::Grid1d(num(1)?)),
            ("circle", 2) => Ok(SpaceGen::Circle(num(1)?)),
            ("random_points", 4) => Ok(SpaceGen::RandomPoints {
                dim: num(1)?,
                n: num(2)?,
                seed: parts[3].parse().map_err(|_| bad())?,
            }),
            _ => Err(bad()),
        }
    }
}

pub fn generate_space(spec: &SpaceGen) -> Result<FiniteMetricSpace> {
    let coords: Vec<Vec<f64>> = match *spec {
        SpaceGen::Grid1d(0) | SpaceGen::Circle(0) | SpaceGen::RandomPoints { n: 0, .. } => {
            return Err(Error::Config(format!("{spec}: need at least one point")))
        }
        SpaceGen::RandomPoints { dim: 0, .. } => {
            return Err(Error::Config(format!("{spec}: dimension must be positive")))
        }
        SpaceGen::Grid1d(1) => vec![vec![0.0]],
        SpaceGen::Grid1d(n) => (0..n).map(|i| vec![i as f64 / (n - 1) as f64]).collect(),
        SpaceGen::Circle(n) => (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                vec![a.cos(), a.sin()]
            })
            .collect(),
        SpaceGen::RandomPoints { dim, n, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| (0..dim).map(|_| rng.gen::<f64>()).collect()).collect()
        }
    };
    let points = coords
        .into_iter()
        .enumerate()
        .map(|(i, c)| PointSpec::new(format!("x{i}"), c))
        .collect();
    build_space(points, None)
}

/// Independent stream for one trial of a seeded run.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `k / 1024` with `|k| ≤ 2^20`. Sums of three such values are exact.
pub fn dyadic(rng: &mut impl Rng) -> f64 {
    rng.gen_range(-(1i64 << 20)..=(1i64 << 20)) as f64 / 1024.0
}

/// Sorted random subset with a size drawn from `lo..=hi` (clamped to the space).
pub fn random_subset(rng: &mut impl Rng, space: &FiniteMetricSpace, lo: usize, hi: usize) -> Vec<Point> {
    let hi = hi.min(space.len()).max(1);
    let k = rng.gen_range(lo.clamp(1, hi)..=hi);
    let mut pts: Vec<Point> = space
        .points()
        .collect::<Vec<_>>()
        .choose_multiple(rng, k)
        .copied()
        .collect();
    pts.sort();
    pts
}

fn finish(space: &Arc<FiniteMetricSpace>, atoms: Vec<(Point, f64)>) -> IdempotentMeasure {
    let raw = atoms
        .into_iter()
        .map(|(p, w)| (p, MaxPlus::finite(w).expect("finite weight")));
    IdempotentMeasure::canonicalize(space.clone(), raw, Normalize::Reject).expect("generated measure is normalized")
}

/// Arbitrary measure on `pool` with up to `max_atoms` atoms. About one in ten
/// has a tie at the top.
pub fn random_measure(
    rng: &mut impl Rng,
    space: &Arc<FiniteMetricSpace>,
    pool: &[Point],
    max_atoms: usize,
) -> IdempotentMeasure {
    let k = rng.gen_range(1..=max_atoms.min(pool.len()).max(1));
    let pts: Vec<Point> = pool.choose_multiple(rng, k).copied().collect();
    let tie = k > 1 && rng.gen_bool(0.1);
    let atoms = pts
        .iter()
        .enumerate()
        .map(|(i, &p)| {
            let w = if i == 0 || (i == 1 && tie) {
                0.0
            } else {
                -rng.gen_range(0.0..8.0)
            };
            (p, w)
        })
        .collect();
    finish(space, atoms)
}

/// Measure in `I_f` with top atom `top` and other atoms from `pool`. About
/// one in ten non-top weights sits exactly on the threshold.
pub fn if_measure_with_top(
    rng: &mut impl Rng,
    space: &Arc<FiniteMetricSpace>,
    top: Point,
    pool: &[Point],
    max_atoms: usize,
) -> IdempotentMeasure {
    let others: Vec<Point> = pool.iter().copied().filter(|&p| p != top).collect();
    let extra = rng.gen_range(0..=max_atoms.saturating_sub(1).min(others.len()));
    let threshold = if_threshold(extra + 1);
    let mut atoms = vec![(top, 0.0)];
    for &p in others.choose_multiple(rng, extra) {
        let w = if rng.gen_bool(0.1) {
            threshold
        } else {
            threshold - rng.gen_range(0.0..6.0)
        };
        atoms.push((p, w));
    }
    finish(space, atoms)
}

pub fn random_if_measure(
    rng: &mut impl Rng,
    space: &Arc<FiniteMetricSpace>,
    pool: &[Point],
    max_atoms: usize,
) -> IdempotentMeasure {
    let top = *pool.choose(rng).expect("nonempty pool");
    if_measure_with_top(rng, space, top, pool, max_atoms)
}

/// Measure in `O_δx` for a random `x` in `pool`: non-top weights in
/// `[−ln 2 − 3, −ln 2)`, so they straddle the `I_f` threshold.
pub fn random_o_delta_measure(
    rng: &mut impl Rng,
    space: &Arc<FiniteMetricSpace>,
    pool: &[Point],
    max_atoms: usize,
) -> IdempotentMeasure {
    let k = rng.gen_range(1..=max_atoms.min(pool.len()).max(1));
    let pts: Vec<Point> = pool.choose_multiple(rng, k).copied().collect();
    let atoms = pts
        .iter()
        .enumerate()
        .map(|(i, &p)| (p, if i == 0 { 0.0 } else { -LN_2 - rng.gen_range(1e-6..3.0) }))
        .collect();
    finish(space, atoms)
}

pub fn random_map(rng: &mut impl Rng, dom: &Arc<FiniteMetricSpace>, cod: &Arc<FiniteMetricSpace>) -> SpaceMap {
    let table = dom.points().map(|_| Point(rng.gen_range(0..cod.len()))).collect();
    SpaceMap::new(dom.clone(), cod.clone(), table).expect("table is total")
}

/// `c + Σ a_j d(·, z_j)` with `Σ |a_j| ≤ lipschitz`, declared with bound `lipschitz`.
pub fn random_test_function(rng: &mut impl Rng, space: &Arc<FiniteMetricSpace>, lipschitz: f64) -> TestFunction {
    let terms = rng.gen_range(1..=3);
    let mut coeffs: Vec<f64> = (0..terms).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let total: f64 = coeffs.iter().map(|a: &f64| a.abs()).sum();
    if total > 0.0 {
        let scale = lipschitz * rng.gen_range(0.5..1.0) / total;
        coeffs.iter_mut().for_each(|a| *a *= scale);
    }
    let centers: Vec<Point> = (0..terms).map(|_| Point(rng.gen_range(0..space.len()))).collect();
    let c = rng.gen_range(-5.0..5.0);
    let values = space
        .points()
        .map(|x| {
            c + coeffs
                .iter()
                .zip(&centers)
                .map(|(a, &z)| a * space.dist(x, z))
                .sum::<f64>()
        })
        .collect();
    TestFunction::new(space.clone(), values, lipschitz).expect("sum of distance functions respects its bound")
}

/// `count` fixed functions `d(·, z_j)` with `z_j` spread over the space.
pub fn distance_family(space: &Arc<FiniteMetricSpace>, count: usize) -> Vec<TestFunction> {
    let n = space.len();
    (0..count)
        .map(|j| {
            let z = Point(j * n / count.max(1) % n);
            let values = space.points().map(|x| space.dist(x, z)).collect();
            TestFunction::new(space.clone(), values, 1.0).expect("distance functions are 1-Lipschitz")
        })
        .collect()
}

/// Bracket sample: one or two atoms per ball with weights moved by less than
/// `ε/2`, shifted to max 0, and kept only if the bracket accepts it.
pub fn sample_in_bracket(rng: &mut impl Rng, n: &BracketNeighborhood, tries: usize) -> Option<IdempotentMeasure> {
    let base = n.base();
    for _ in 0..tries {
        let spread = if rng.gen_bool(0.8) { 0.5 } else { 1.0 } * n.epsilon();
        let mut raw = Vec::new();
        for (i, &(_, lambda)) in base.atoms().iter().enumerate() {
            let ball = n.ball_points(i);
            for _ in 0..rng.gen_range(1..=2) {
                let y = *ball.choose(rng).expect("ball holds its center");
                let w = lambda.value() + rng.gen_range(-0.999..0.999) * spread;
                raw.push((y, MaxPlus::finite(w).ok()?));
            }
        }
        let nu = IdempotentMeasure::canonicalize(base.space().clone(), raw, Normalize::Shift).ok()?;
        if crate::topology::bracket_contains(n, &nu).ok()? {
            return Some(nu);
        }
    }
    None
}

/// Admissible openness configuration: a top ball holding at least
/// `min_grid` points, up to three more atoms outside it with disjoint balls,
/// weights in `I_f` and `ε < ln 3`. Returns the neighborhood and the points
/// of the top ball.
pub fn openness_config(
    rng: &mut impl Rng,
    space: &Arc<FiniteMetricSpace>,
    min_grid: usize,
) -> Result<(BracketNeighborhood, Vec<Point>)> {
    if space.len() < min_grid {
        return Err(Error::Config(format!(
            "openness needs at least {min_grid} points, space has {}",
            space.len()
        )));
    }
    let center = Point(rng.gen_range(0..space.len()));
    let mut d: Vec<f64> = space.points().map(|q| space.dist(center, q)).collect();
    d.sort_by(f64::total_cmp);
    let cut = d[min_grid - 1];
    let rho0 = match d.iter().find(|&&v| v > cut) {
        Some(&next) => 0.5 * (cut + next),
        None => 2.0 * cut + 1.0,
    };

    let mut centers = vec![center];
    let mut radii = vec![rho0];
    let diameter = d[d.len() - 1];
    for _ in 0..rng.gen_range(0..=3) {
        let free: Vec<Point> = space
            .points()
            .filter(|&q| centers.iter().zip(&radii).all(|(&c, &r)| space.dist(c, q) >= r))
            .collect();
        let Some(&x) = free.choose(rng) else { break };
        let nearest = space
            .points()
            .filter(|&q| q != x)
            .map(|q| space.dist(x, q))
            .fold(f64::INFINITY, f64::min);
        let mut r = rng.gen_range(0.01..0.5) * diameter;
        // Shrink until disjoint; a radius below `nearest` is a singleton ball.
        while r >= nearest
            && space
                .points()
                .any(|q| space.dist(x, q) < r && centers.iter().zip(&radii).any(|(&c, &rc)| space.dist(c, q) < rc))
        {
            r *= 0.5;
        }
        centers.push(x);
        radii.push(r);
    }

    let threshold = if_threshold(centers.len());
    let mut atoms: Vec<(Point, f64)> = vec![(center, 0.0)];
    atoms.extend(centers[1..].iter().map(|&x| (x, threshold - rng.gen_range(0.0..4.0))));
    // Canonical order sorts atoms by point; radii must follow.
    let mut paired: Vec<(Point, f64, f64)> = atoms.iter().zip(&radii).map(|(&(p, w), &r)| (p, w, r)).collect();
    paired.sort_by_key(|a| a.0);
    let base = finish(space, paired.iter().map(|a| (a.0, a.1)).collect());
    let epsilon = rng.gen_range(0.05..1.09);
    let n = BracketNeighborhood::new(base, paired.iter().map(|a| a.2).collect(), epsilon)?;
    let i0 = paired.iter().position(|a| a.0 == center).expect("center is an atom");
    let grid = n.ball_points(i0);
    Ok((n, grid))
}

fn lerp_nearest(space: &FiniteMetricSpace, a: Point, b: Point, s: f64) -> Point {
    let target: Vec<f64> = space
        .coords(a)
        .iter()
        .zip(space.coords(b))
        .map(|(x, y)| x + s * (y - x))
        .collect();
    space.nearest(&target)
}

fn has_coords(space: &FiniteMetricSpace) -> bool {
    let dim = space.coords(Point(0)).len();
    dim > 0 && space.points().all(|p| space.coords(p).len() == dim)
}

/// Straight-line homotopy from `f` to `g` in coordinates, snapped to the
/// nearest point, with `steps + 1` maps and a tight step bound.
pub fn straight_line_witness(f: &SpaceMap, g: &SpaceMap, steps: usize) -> Result<HomotopyWitness> {
    let space = f.codomain();
    if !has_coords(space) {
        return Err(Error::Config("straight-line witnesses need coordinates".into()));
    }
    let maps = (0..=steps)
        .map(|k| {
            let s = k as f64 / steps as f64;
            let table = f
                .domain()
                .points()
                .map(|x| lerp_nearest(space, f.apply(x), g.apply(x), s))
                .collect();
            SpaceMap::new(f.domain().clone(), space.clone(), table)
        })
        .collect::<Result<Vec<_>>>()?;
    HomotopyWitness::tight(maps)
}

/// Contraction of the space onto `target` along straight lines.
pub fn contraction_witness(space: &Arc<FiniteMetricSpace>, target: Point, steps: usize) -> Result<HomotopyWitness> {
    let id = SpaceMap::identity(space.clone());
    let constant = SpaceMap::constant(space.clone(), space.clone(), target)?;
    straight_line_witness(&id, &constant, steps)
}
