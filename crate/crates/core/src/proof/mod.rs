//! Discretized sweep over the first-generation parameter region.
//!
//! Each cube of side `δ` around a lattice pair `(p₁, p₂)` is disposed of by
//! one of three sufficient conditions, tried in order:
//!
//! * S1: `M♯({O, p₁, p₂})` already exceeds `m^δ = √2·δ`;
//! * S2: for some `δ₁`, every dangerous child of `p₂` lies in a set of
//!   diameter below `2σ − √2·δ₁`, so `p₂` cannot have a Δ-pair of them;
//! * S3: the compatibility graph between dangerous children of `p₁` and
//!   `p₂` has no K₄ with two vertices on each side.
//!
//! All comparisons lean towards "unproven": lower bounds are compared with
//! `>` after adding `eps`, upper thresholds are widened by `eps`.

mod checkpoint;
mod sweep;

pub use checkpoint::{CheckpointError, CheckpointHeader};
pub use sweep::{
    run_sweep, run_sweep_with, Counts, CubeRecord, ProofReport, RunOptions, SweepError, Verdict,
};

use std::f64::consts::SQRT_2;
use std::fmt;
use std::ops::ControlFlow;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::geometry::{omega_membership_eps, DistanceTable, Point2, EPS};
use crate::objective::{sharp_max_until, ObjectiveOptions};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub sigma: f64,
    pub delta: f64,
    pub s2_deltas: Vec<f64>,
    pub s3_delta: f64,
    /// Tolerance for every comparison and LP certification margin.
    pub eps: f64,
    /// Amount subtracted from lattice steps so that accumulated rounding
    /// cannot open gaps between neighbouring cubes.
    pub lattice_eps: f64,
    pub seed: u64,
    pub sample: Option<usize>,
    /// Enumerate all subsets in the five-point compatibility test instead
    /// of only those containing both children.
    pub exact_subsets: bool,
}

impl Default for SweepParams {
    fn default() -> Self {
        Self {
            sigma: 0.7,
            delta: 0.008,
            s2_deltas: vec![0.05, 0.02, 0.01],
            s3_delta: 0.03,
            eps: EPS,
            lattice_eps: EPS,
            seed: 2024,
            sample: Some(1000),
            exact_subsets: false,
        }
    }
}

#[derive(Debug, thiserror::Error, Clone, PartialEq)]
#[error("invalid sweep parameters: {0}")]
pub struct ParamsError(pub String);

impl SweepParams {
    pub fn m_delta(&self) -> f64 {
        SQRT_2 * self.delta
    }

    pub fn r_delta(&self) -> f64 {
        1.0 + self.delta / SQRT_2
    }

    pub fn validate(&self) -> Result<(), ParamsError> {
        let err = |m: &str| Err(ParamsError(m.to_string()));
        if !(0.5..=1.0).contains(&self.sigma) {
            return err("sigma must lie in [1/2, 1]");
        }
        if !(self.delta > 0.0 && self.delta < 0.1) {
            return err("delta must lie in (0, 0.1)");
        }
        if !(self.s3_delta > 0.0 && self.s3_delta <= 0.05) {
            return err("s3 delta must lie in (0, 0.05]");
        }
        if self.s2_deltas.iter().any(|d| !(*d > 0.0 && *d < 1.0)) {
            return err("s2 deltas must lie in (0, 1)");
        }
        if !(self.eps >= 0.0 && self.eps < 1e-2) || !(self.lattice_eps >= 0.0 && self.lattice_eps < 1e-3) {
            return err("tolerances out of range");
        }
        if self.sample == Some(0) {
            return err("sample must be positive");
        }
        Ok(())
    }

    fn objective_options(&self) -> ObjectiveOptions {
        ObjectiveOptions { eps: self.eps, singletons: false }
    }
}

/// Which condition disposed of a cube.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Disposition {
    S1,
    S2(f64),
    S3,
    Failed,
}

impl Disposition {
    pub fn is_proved(self) -> bool {
        !matches!(self, Disposition::Failed)
    }
}

impl fmt::Display for Disposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Disposition::S1 => write!(f, "S1"),
            Disposition::S2(d) => write!(f, "S2({d})"),
            Disposition::S3 => write!(f, "S3"),
            Disposition::Failed => write!(f, "Failed"),
        }
    }
}

impl FromStr for Disposition {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "S1" => Ok(Disposition::S1),
            "S3" => Ok(Disposition::S3),
            "Failed" => Ok(Disposition::Failed),
            _ => s
                .strip_prefix("S2(")
                .and_then(|r| r.strip_suffix(')'))
                .and_then(|d| d.parse().ok())
                .map(Disposition::S2)
                .ok_or_else(|| format!("unknown disposition `{s}`")),
        }
    }
}

impl From<Disposition> for String {
    fn from(d: Disposition) -> String {
        d.to_string()
    }
}

impl TryFrom<String> for Disposition {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

/// Lattice pairs `(p₁, p₂)` with `p₁ = (0, y₁)` whose cubes cover the
/// reduced region. Steps accumulate exactly as `v += δ − lattice_eps`.
pub fn discretize_omega(params: &SweepParams) -> Vec<(Point2, Point2)> {
    let delta = params.delta;
    let l = 1.0 + 3.0 * delta;
    let step = delta - params.lattice_eps;
    let mut out = Vec::new();
    let mut y1 = -l;
    while y1 <= l {
        let p1 = Point2::new(0.0, y1);
        let mut x2 = -l;
        while x2 <= l {
            let mut y2 = -l;
            while y2 <= l {
                let p2 = Point2::new(x2, y2);
                if omega_membership_eps(p1, p2, params.sigma, delta, params.eps) {
                    out.push((p1, p2));
                }
                y2 += step;
            }
            x2 += step;
        }
        y1 += step;
    }
    out
}

/// `M♯({O, p₁, p₂})` with singletons skipped; `None` if nothing is feasible.
fn triple_sharp(params: &SweepParams, pa: Point2, pb: Point2) -> Option<f64> {
    let table = DistanceTable::from_points(&[Point2::ORIGIN, pa, pb]);
    sharp_max_until(&table, params.sigma, 0, params.objective_options(), |_| false)
        .ok()
        .flatten()
        .map(|b| b.value)
}

/// True when `M♯({O, pa, pb, q})` is certifiably above `threshold`.
fn child_exceeds(params: &SweepParams, base: Option<f64>, pa: Point2, pb: Point2, q: Point2, threshold: f64) -> bool {
    if base.is_some_and(|b| b > threshold) {
        return true;
    }
    let table = DistanceTable::from_points(&[Point2::ORIGIN, pa, pb, q]);
    // an LP failure gives no lower bound, so the point stays in the net
    sharp_max_until(&table, params.sigma, 1, params.objective_options(), |v| v > threshold)
        .ok()
        .flatten()
        .is_some_and(|b| b.value > threshold)
}

/// Visits the net points of `X^{δ₁}(pa, pb, r, m)` in lattice order until
/// `visit` breaks. Returns `Break` if it did.
pub fn x_net_visit(
    params: &SweepParams,
    delta1: f64,
    pa: Point2,
    pb: Point2,
    r: f64,
    m: f64,
    mut visit: impl FnMut(Point2) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let d1 = delta1 - params.lattice_eps;
    let radius = r + d1 / SQRT_2;
    let threshold = m + d1 / SQRT_2 + params.eps;
    let base = triple_sharp(params, pa, pb);
    if base.is_some_and(|b| b > threshold) {
        return ControlFlow::Continue(());
    }
    let mut x = -radius;
    while x <= radius {
        let mut y = -radius;
        while y <= radius {
            let q = Point2::new(x, y);
            if q.norm() <= radius {
                let point = pa + q;
                if !child_exceeds(params, base, pa, pb, point, threshold) {
                    visit(point)?;
                }
            }
            y += d1;
        }
        x += d1;
    }
    ControlFlow::Continue(())
}

/// Lattice points `pa + q`, `|q| ≤ r + δ₁/√2`, on step `δ₁ − lattice_eps`,
/// whose `M♯({O, pa, pb, pa + q})` is not certifiably above
/// `m + δ₁/√2 + eps`.
pub fn x_net(params: &SweepParams, delta1: f64, pa: Point2, pb: Point2, r: f64, m: f64) -> Vec<Point2> {
    let mut out = Vec::new();
    let _ = x_net_visit(params, delta1, pa, pb, r, m, |q| {
        out.push(q);
        ControlFlow::Continue(())
    });
    out
}

/// Number of lattice points the net generator visits before filtering.
pub fn x_lattice_disk_count(params: &SweepParams, delta1: f64, r: f64) -> usize {
    let d1 = delta1 - params.lattice_eps;
    let radius = r + d1 / SQRT_2;
    let mut count = 0;
    let mut x = -radius;
    while x <= radius {
        let mut y = -radius;
        while y <= radius {
            if Point2::new(x, y).norm() <= radius {
                count += 1;
            }
            y += d1;
        }
        x += d1;
    }
    count
}

/// Over-estimate of the diameter: largest pairwise distance plus `eps`.
pub fn compute_diameter(points: &[Point2], eps: f64) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            d = d.max(points[i].dist(points[j]));
        }
    }
    d + eps
}

/// The S2 acceptance test for one `δ₁` on an explicit net.
pub fn s2_accepts(points: &[Point2], sigma: f64, delta1: f64, eps: f64) -> bool {
    eps + compute_diameter(points, eps) < 2.0 * sigma - SQRT_2 * delta1
}

pub fn check_s1(params: &SweepParams, p1: Point2, p2: Point2) -> bool {
    triple_sharp(params, p1, p2).is_some_and(|v| v > params.m_delta() + params.eps)
}

/// The first `δ₁` for which S2 succeeds.
pub fn check_s2(params: &SweepParams, p1: Point2, p2: Point2) -> Option<f64> {
    params.s2_deltas.iter().copied().find(|&delta1| s2_holds(params, delta1, p1, p2))
}

/// S2 at a single `δ₁`.
pub fn s2_holds(params: &SweepParams, delta1: f64, p1: Point2, p2: Point2) -> bool {
    // stop building the net once the diameter bound is already violated
    let limit = 2.0 * params.sigma - SQRT_2 * delta1;
    let mut net: Vec<Point2> = Vec::new();
    let mut diam: f64 = 0.0;
    let flow = x_net_visit(params, delta1, p2, p1, params.r_delta(), params.m_delta(), |q| {
        for p in &net {
            diam = diam.max(p.dist(q));
        }
        net.push(q);
        if params.eps + diam + params.eps < limit {
            ControlFlow::Continue(())
        } else {
            ControlFlow::Break(())
        }
    });
    flow.is_continue() && s2_accepts(&net, params.sigma, delta1, params.eps)
}

pub fn check_s3(params: &SweepParams, p1: Point2, p2: Point2) -> bool {
    let delta1 = params.s3_delta;
    let (m, r) = (params.m_delta(), params.r_delta());
    let x1 = x_net(params, delta1, p1, p2, r, m);
    let x2 = x_net(params, delta1, p2, p1, r, m);
    let dist = 2.0 * params.sigma - SQRT_2 * delta1;
    let m_val = m + SQRT_2 * delta1;
    let threshold = m_val + params.eps;
    let tail = if params.exact_subsets { 0 } else { 2 };
    let compatible = |a: Point2, b: Point2| {
        let table = DistanceTable::from_points(&[Point2::ORIGIN, p1, p2, a, b]);
        match sharp_max_until(&table, params.sigma, tail, params.objective_options(), |v| v >= threshold) {
            Ok(Some(best)) => best.value < threshold,
            Ok(None) => true,
            // no certified lower bound: the pair stays compatible
            Err(_) => true,
        }
    };

    let same1 = same_colour_edges(&x1, dist - params.eps, &compatible);
    let same2 = same_colour_edges(&x2, dist - params.eps, &compatible);
    let active1: Vec<usize> = (0..x1.len()).filter(|&x| !same1.row_is_empty(x)).collect();
    let mut cross: Vec<Option<Vec<u64>>> = vec![None; x2.len()];
    let mut cross_row = |i: usize| -> Vec<u64> {
        cross[i]
            .get_or_insert_with(|| {
                let mut row = vec![0u64; same1.words];
                for &x in &active1 {
                    if compatible(x1[x], x2[i]) {
                        row[x / 64] |= 1 << (x % 64);
                    }
                }
                row
            })
            .clone()
    };
    !bicolor_k4_split(&same2, &same1, &mut cross_row)
}

/// Symmetric adjacency over `n` vertices, one bitset row per vertex.
#[derive(Clone, Debug)]
struct BitGraph {
    words: usize,
    bits: Vec<u64>,
}

impl BitGraph {
    fn new(n: usize) -> Self {
        let words = n.div_ceil(64).max(1);
        Self { words, bits: vec![0; n * words] }
    }

    fn len(&self) -> usize {
        self.bits.len() / self.words
    }

    fn add(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
        self.bits[j * self.words + i / 64] |= 1 << (i % 64);
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.bits[i * self.words..(i + 1) * self.words]
    }

    fn row_is_empty(&self, i: usize) -> bool {
        self.row(i).iter().all(|&w| w == 0)
    }
}

fn ones(row: &[u64]) -> impl Iterator<Item = usize> + '_ {
    row.iter().enumerate().flat_map(|(k, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            (w != 0).then(|| {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                k * 64 + b
            })
        })
    })
}

fn same_colour_edges(x: &[Point2], min_dist: f64, compatible: &impl Fn(Point2, Point2) -> bool) -> BitGraph {
    let mut g = BitGraph::new(x.len());
    for i in 0..x.len() {
        for j in (i + 1)..x.len() {
            if x[i].dist(x[j]) > min_dist && compatible(x[i], x[j]) {
                g.add(i, j);
            }
        }
    }
    g
}

/// K₄ with both edges inside `first`, both inside `second`, and all four
/// cross edges present. `cross(i)` is the bitset of `second` vertices
/// adjacent to `first` vertex `i`; it is only asked for vertices that have
/// an edge in `first`.
fn bicolor_k4_split(first: &BitGraph, second: &BitGraph, cross: &mut impl FnMut(usize) -> Vec<u64>) -> bool {
    let mut cand = vec![0u64; second.words];
    for i in 0..first.len() {
        for j in ones(first.row(i)).filter(|&j| j > i) {
            let (ci, cj) = (cross(i), cross(j));
            for (c, (a, b)) in cand.iter_mut().zip(ci.iter().zip(&cj)) {
                *c = a & b;
            }
            for x in ones(&cand) {
                if second.row(x).iter().zip(&cand).any(|(r, c)| r & c != 0) {
                    return true;
                }
            }
        }
    }
    false
}

/// Whether a K₄ with two `false` vertices and two `true` vertices exists.
/// `adjacency` must be symmetric without self-loops.
pub fn contains_bicolor_k4(colors: &[bool], adjacency: &[Vec<bool>]) -> bool {
    let falses: Vec<usize> = (0..colors.len()).filter(|&i| !colors[i]).collect();
    let trues: Vec<usize> = (0..colors.len()).filter(|&i| colors[i]).collect();
    let induced = |part: &[usize]| {
        let mut g = BitGraph::new(part.len());
        for a in 0..part.len() {
            for b in (a + 1)..part.len() {
                if adjacency[part[a]][part[b]] {
                    g.add(a, b);
                }
            }
        }
        g
    };
    let (first, second) = (induced(&falses), induced(&trues));
    let mut cross = |i: usize| {
        let mut row = vec![0u64; second.words];
        for (x, &t) in trues.iter().enumerate() {
            if adjacency[falses[i]][t] {
                row[x / 64] |= 1 << (x % 64);
            }
        }
        row
    };
    bicolor_k4_split(&first, &second, &mut cross)
}

/// Runs S1, then S2, then S3 on one cube.
pub fn dispose(params: &SweepParams, p1: Point2, p2: Point2) -> Disposition {
    if check_s1(params, p1, p2) {
        Disposition::S1
    } else if let Some(d) = check_s2(params, p1, p2) {
        Disposition::S2(d)
    } else if check_s3(params, p1, p2) {
        Disposition::S3
    } else {
        Disposition::Failed
    }
}
