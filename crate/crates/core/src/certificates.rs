//! Built-in counterexample configurations and their verification reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::closed_form::{lower_cubic, max_diesis, sigma_lower, sigma_pt, TriangleParams};
use crate::geometry::{Configuration, FamilyTree, Point2};
use crate::lp::CertifiedLpResult;
use crate::objective::{
    bar_m_flat, eval_f_sharp, m_sharp, plus_flat_on, plus_sharp_on, singleton_sharp, ObjectiveError,
    RadiiAssignment,
};

pub const BUILTIN_NAMES: [&str; 3] = ["six_point_0683", "trapezoid_064368", "metric_quadrilateral_pt"];

#[derive(Debug, Error)]
pub enum CertificateError {
    #[error("unknown certificate `{0}` (known: six_point_0683, trapezoid_064368, metric_quadrilateral_pt, interval_set)")]
    UnknownName(String),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub description: String,
    pub value: f64,
    pub relation: String,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub name: String,
    pub checks: Vec<Check>,
    pub overall: bool,
}

impl CertificateReport {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), checks: Vec::new(), overall: true }
    }

    fn check(&mut self, description: impl Into<String>, value: f64, relation: impl Into<String>, pass: bool) {
        self.overall &= pass;
        self.checks.push(Check {
            description: description.into(),
            value,
            relation: relation.into(),
            pass,
        });
    }

    fn check_near(&mut self, description: impl Into<String>, value: f64, target: f64, tol: f64) {
        let pass = (value - target).abs() <= tol;
        self.check(description, value, format!("= {target} ± {tol:e}"), pass);
    }

    fn check_le(&mut self, description: impl Into<String>, value: f64, bound: f64) {
        self.check(description, value, format!("<= {bound}"), value <= bound);
    }

    fn check_lt(&mut self, description: impl Into<String>, value: f64, bound: f64) {
        self.check(description, value, format!("< {bound}"), value < bound);
    }

    fn check_true(&mut self, description: impl Into<String>, pass: bool) {
        self.check(description, if pass { 1.0 } else { 0.0 }, "holds", pass);
    }

    /// Plain-text table, one line per check.
    pub fn render(&self) -> String {
        let mut out = format!("{} [{}]\n", self.name, if self.overall { "PASS" } else { "FAIL" });
        for c in &self.checks {
            out.push_str(&format!(
                "  {:4}  {:<58} {:>+.10}  {}\n",
                if c.pass { "ok" } else { "FAIL" },
                c.description,
                c.value,
                c.relation
            ));
        }
        out
    }
}

pub fn builtin_config(name: &str) -> Result<Configuration, CertificateError> {
    match name {
        "six_point_0683" => Ok(six_point()),
        "trapezoid_064368" => Ok(trapezoid()),
        "metric_quadrilateral_pt" => Ok(metric_quadrilateral()),
        other => Err(CertificateError::UnknownName(other.to_string())),
    }
}

fn labelled(cfg: Configuration, labels: &[&str]) -> Configuration {
    cfg.with_labels(labels.iter().map(|s| s.to_string()).collect())
        .expect("label count matches")
}

fn six_point() -> Configuration {
    let pts = vec![
        Point2::new(0.0, 0.0),
        Point2::new(0.306, 0.952),
        Point2::new(0.034, -0.387),
        Point2::new(0.0, 0.0),
        Point2::new(0.464, 1.815),
        Point2::new(0.031, 0.599),
        Point2::new(0.516, -0.679),
    ];
    let cfg = Configuration::planar_with_origin(pts, 0.683, 0).expect("valid");
    labelled(cfg, &["O", "a", "b", "a1", "a2", "b1", "b2"])
        .with_tree(FamilyTree::new(vec![(0, 1, 2), (1, 3, 4), (2, 5, 6)]))
        .expect("valid tree")
}

/// Base lengths `(b, B)` of the trapezoid at `sigma`.
pub fn trapezoid_bases(sigma: f64) -> (f64, f64) {
    let cos = (8.0 * sigma - 5.0) / (4.0 * (1.0 - sigma));
    (2.0 * (1.0 - sigma), 2.0 * (1.0 - sigma + cos))
}

fn trapezoid() -> Configuration {
    let s = sigma_lower();
    let cos = (8.0 * s - 5.0) / (4.0 * (1.0 - s));
    let sin = (1.0 - cos * cos).sqrt();
    let b = 2.0 - 2.0 * s;
    let pts = vec![
        Point2::ORIGIN,
        Point2::new(b, 0.0),
        Point2::new(b + cos, -sin),
        Point2::new(-cos, -sin),
    ];
    let cfg = Configuration::planar_with_origin(pts, s, 0).expect("valid");
    labelled(cfg, &["p1", "p2", "p3", "p4"])
}

/// Edge lengths `(d12, d23, d34, d41)` of the metric quadrilateral.
pub fn quadrilateral_edges(sigma: f64) -> [f64; 4] {
    [
        (2.0 * sigma * sigma - sigma + 1.0) / (sigma + 1.0),
        2.0 * sigma / (sigma + 1.0),
        2.0 * sigma * sigma / (sigma + 1.0),
        1.0,
    ]
}

fn metric_quadrilateral() -> Configuration {
    let s = sigma_pt();
    let [d12, d23, d34, d41] = quadrilateral_edges(s);
    let d13 = d12 + d23;
    let d24 = 2.0 * s;
    let d = vec![
        vec![0.0, d12, d13, d41],
        vec![d12, 0.0, d23, d24],
        vec![d13, d23, 0.0, d34],
        vec![d41, d24, d34, 0.0],
    ];
    let cfg = Configuration::metric(d, s, 0).expect("valid metric");
    labelled(cfg, &["p1", "p2", "p3", "p4"])
}

/// Largest `M⁺♯` and `M⁺♭` over the subsets of `cfg` whose sizes lie in the
/// given ranges. Singletons use the sharp closed form.
fn subset_maxima(
    cfg: &Configuration,
    sharp_sizes: std::ops::RangeInclusive<usize>,
    flat_sizes: std::ops::RangeInclusive<usize>,
) -> Result<(f64, f64), ObjectiveError> {
    let table = cfg.table();
    let n = cfg.len();
    let s = cfg.sigma();
    let eps = crate::geometry::EPS;
    let (mut sharp, mut flat) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let k = idx.len();
        if sharp_sizes.contains(&k) {
            if k == 1 {
                sharp = sharp.max(singleton_sharp(table.norm(idx[0]), s));
            } else {
                for bar in 0..k {
                    if let CertifiedLpResult::Optimal { certified_value, .. } =
                        plus_sharp_on(&table, &idx, bar, s, eps)?
                    {
                        sharp = sharp.max(certified_value);
                    }
                }
            }
        }
        if flat_sizes.contains(&k) {
            for a in 0..k {
                for b in a..k {
                    if let CertifiedLpResult::Optimal { certified_value, .. } =
                        plus_flat_on(&table, &idx, a, b, s, eps)?
                    {
                        flat = flat.max(certified_value);
                    }
                }
            }
        }
    }
    Ok((sharp, flat))
}

fn delta_checks(report: &mut CertificateReport, cfg: &Configuration, relations: &[(usize, usize, usize)]) {
    let name = |i: usize| cfg.labels()[i].clone();
    for &(q1, q2, parent) in relations {
        let ok = cfg.in_delta(q1, q2, parent, 1.0).unwrap_or(false);
        report.check_true(format!("({}, {}) in Delta({}, 1)", name(q1), name(q2), name(parent)), ok);
    }
}

pub fn certify_six_point() -> Result<CertificateReport, CertificateError> {
    certify_six_point_on(&six_point())
}

/// The six-point checks on an arbitrary configuration of the same shape
/// (seven labelled points with the built-in tree).
pub fn certify_six_point_on(cfg: &Configuration) -> Result<CertificateReport, CertificateError> {
    let mut report = CertificateReport::new("six_point_0683");
    let tree = cfg.tree().cloned().unwrap_or_else(|| FamilyTree::new(vec![(0, 1, 2), (1, 3, 4), (2, 5, 6)]));
    let family = cfg.validate_family(&tree).map_err(ObjectiveError::from)?;
    report.check_true("configuration belongs to the second-generation family", family);
    let sharp = m_sharp(cfg, 0)?.map_or(f64::NEG_INFINITY, |v| v.value);
    report.check_near("M_sharp(P)", sharp, -0.00032, 1e-4);
    report.check_lt("M_sharp(P) strictly negative", sharp, 0.0);
    let flat = bar_m_flat(cfg)?.map_or(f64::NEG_INFINITY, |v| v.value);
    report.check_near("bar M_flat(P)", flat, -0.1803, 1e-3);
    report.check_lt("bar M_flat(P) strictly negative", flat, 0.0);
    let min_x = cfg.points().map_or(0.0, |p| p.iter().map(|q| q.x).fold(f64::INFINITY, f64::min));
    report.check("smallest first coordinate", min_x, ">= 0", min_x >= 0.0);
    Ok(report)
}

pub fn certify_trapezoid() -> Result<CertificateReport, CertificateError> {
    let cfg = trapezoid();
    let s = cfg.sigma();
    let mut report = CertificateReport::new("trapezoid_064368");
    report.check("cubic residual at sigma", lower_cubic(s), "|.| < 1e-12", lower_cubic(s).abs() < 1e-12);
    delta_checks(&mut report, &cfg, &[(1, 3, 0), (0, 2, 1), (1, 3, 2), (0, 2, 3)]);

    let (b, big_b) = trapezoid_bases(s);
    report.check_near("long base B", big_b, 0.92239, 1e-5);
    let d = |i, j| cfg.distance(i, j).expect("valid indices");
    report.check_near("|p3 - p4| equals B", d(2, 3), big_b, 1e-12);
    report.check_near("|p1 - p2| equals b", d(0, 1), b, 1e-12);
    report.check_near("diagonal |p1 - p3|", d(0, 2), 2.0 * s, 1e-12);
    report.check_near("diagonal |p2 - p4|", d(1, 3), 2.0 * s, 1e-12);
    report.check_near("leg |p2 - p3|", d(1, 2), 1.0, 1e-12);
    report.check_near("leg |p4 - p1|", d(3, 0), 1.0, 1e-12);

    let (sharp, flat) = subset_maxima(&cfg, 1..=3, 2..=3)?;
    report.check_le("max M+_sharp over subsets of size 1-3", sharp, -0.03014 + 1e-4);
    report.check_le("max M+_flat over subsets of size 2-3", flat, -0.23604 + 1e-4);

    let q = 1.0 - 1.0 / (4.0 * s);
    let sharp_bound = b + q * big_b - (1.0 / (2.0 * s) + 0.5);
    let flat_bound = q * (b + big_b) - 1.0;
    report.check("full-set sharp bound b + (1-1/4s)B - (1/2s + 1/2)", sharp_bound, "|.| < 1e-10", sharp_bound.abs() < 1e-10);
    report.check("full-set flat bound (1-1/4s)(b+B) - 1", flat_bound, "|.| < 1e-10", flat_bound.abs() < 1e-10);
    let reduced = lower_cubic(s) / (8.0 * s * (1.0 - s));
    report.check("reduced form (32s^3-32s^2+12s-3)/(8s(1-s))", reduced, "|.| < 1e-10", reduced.abs() < 1e-10);

    let (full_sharp, full_flat) = subset_maxima(&cfg, 4..=4, 4..=4)?;
    report.check_le("LP lower bound for M+_sharp(P) under the analytic bound", full_sharp, 1e-9);
    report.check_le("LP lower bound for M+_flat(P) under the analytic bound", full_flat, 1e-9);

    let max_y = cfg.points().map_or(0.0, |p| p.iter().map(|q| q.y).fold(f64::NEG_INFINITY, f64::max));
    report.check("largest second coordinate", max_y, "<= 0", max_y <= 0.0);
    Ok(report)
}

pub fn certify_metric_quadrilateral() -> Result<CertificateReport, CertificateError> {
    certify_metric_quadrilateral_with(1000, 2024)
}

pub fn certify_metric_quadrilateral_with(samples: usize, seed: u64) -> Result<CertificateReport, CertificateError> {
    let cfg = metric_quadrilateral();
    let s = cfg.sigma();
    let mut report = CertificateReport::new("metric_quadrilateral_pt");
    let d = |i, j| cfg.distance(i, j).expect("valid indices");
    let edges = quadrilateral_edges(s);
    report.check_true("distance matrix is a metric (triangle inequality)", cfg.validate().is_ok());
    report.check_le("longest finite edge", edges.iter().take(3).cloned().fold(0.0, f64::max), 1.0);
    report.check("d13 = d12 + d23", d(0, 2), format!("> 2 sigma = {}", 2.0 * s), d(0, 2) > 2.0 * s);
    report.check_near("d13 = d14 + d43", d(0, 3) + d(3, 2), d(0, 2), 1e-12);
    report.check_near("d24 = d23 + d34", d(1, 2) + d(2, 3), 2.0 * s, 1e-12);
    delta_checks(&mut report, &cfg, &[(1, 3, 0), (0, 2, 1), (1, 3, 2), (0, 2, 3)]);

    let flat = bar_m_flat(&cfg)?.map_or(f64::NEG_INFINITY, |v| v.value);
    report.check_near("bar M_flat(P)", flat, -0.148, 1e-3);
    report.check_lt("bar M_flat(P) strictly negative", flat, 0.0);

    let tri = TriangleParams::new(d(1, 3), d(0, 3), d(0, 1));
    let exact = max_diesis(s, tri).map_err(|_| ObjectiveError::Radii("sub-triangle inadmissible".into()))?;
    report.check_near("M_sharp({p1, p2, p4}) by the triangle formula", exact, 0.0, 1e-9);
    let sub = cfg.subset(&[0, 1, 3]).map_err(ObjectiveError::from)?;
    let lp_sub = m_sharp(&sub, 0)?.map_or(f64::NEG_INFINITY, |v| v.value);
    report.check("M_sharp({p1, p2, p4}) by LP", lp_sub, "in [-1e-4, 1e-9]", (-1e-4..=1e-9).contains(&lp_sub));
    let lp_full = m_sharp(&cfg, 0)?.map_or(f64::NEG_INFINITY, |v| v.value);
    report.check_le("LP lower bound for M_sharp(P)", lp_full, 1e-9);

    let (worst_gain, inadmissible) = competitor_trials(&cfg, samples, seed)?;
    report.check_le(
        format!("F_sharp(r) - F_sharp(r') over {samples} samples with r3 > 0"),
        worst_gain,
        1e-12,
    );
    report.check(
        "competitor radii outside R(P)",
        inadmissible as f64,
        "= 0",
        inadmissible == 0,
    );
    Ok(report)
}

/// Samples admissible radii with `r3 > 0` and compares against the
/// competitor that moves `r3` onto `p2` and `p4`. Returns the largest
/// `F♯(r) − F♯(r′)` and the number of inadmissible competitors.
fn competitor_trials(cfg: &Configuration, samples: usize, seed: u64) -> Result<(f64, usize), ObjectiveError> {
    let d = |i: usize, j: usize| cfg.distance(i, j).expect("valid indices");
    let admissible = |r: &[f64]| {
        (0..4).all(|i| (0.0..=1.0).contains(&r[i]))
            && (0..4).all(|i| {
                ((i + 1)..4).all(|j| r[i] == 0.0 || r[j] == 0.0 || r[i] + r[j] <= d(i, j) + 1e-12)
            })
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::NEG_INFINITY;
    let mut bad = 0;
    let mut accepted = 0;
    while accepted < samples {
        let mut r = [0.0; 4];
        r[2] = rng.gen_range(0.0..d(1, 2).min(d(2, 3)));
        for i in [0, 1, 3] {
            let limit = (0..4).filter(|&j| j != i).map(|j| d(i, j)).fold(1.0, f64::min);
            r[i] = if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..limit) };
        }
        if r[2] <= 0.0 || !admissible(&r) {
            continue;
        }
        accepted += 1;
        let comp = [(r[0] - r[2]).max(0.0), r[1] + r[2], 0.0, r[3] + r[2]];
        if !admissible(&comp) {
            bad += 1;
            continue;
        }
        let f = eval_f_sharp(cfg, &RadiiAssignment::new(cfg, r.to_vec())?);
        let g = eval_f_sharp(cfg, &RadiiAssignment::new(cfg, comp.to_vec())?);
        worst = worst.max(f - g);
    }
    Ok((worst, bad))
}

// ---------------------------------------------------------------------------
// Interval set

/// Intervals `I_{-1} = [-1, 0]` and `I_k = [2^-k, (7/4)·2^-k]` for
/// `0 ≤ k ≤ depth`, in increasing order of left endpoint.
pub fn interval_set(depth: u32) -> Vec<(f64, f64)> {
    let mut v: Vec<(f64, f64)> = (0..=depth)
        .rev()
        .map(|k| {
            let s = (-(k as f64)).exp2();
            (s, 1.75 * s)
        })
        .collect();
    v.insert(0, (-1.0, 0.0));
    v
}

/// Length of `[lo, hi] ∩ E`.
pub fn measure_in(intervals: &[(f64, f64)], lo: f64, hi: f64) -> f64 {
    intervals
        .iter()
        .map(|&(a, b)| (b.min(hi) - a.max(lo)).max(0.0))
        .sum()
}

/// Depth used to stand in for the infinite union: the omitted intervals
/// have total length below `2^-(DEPTH-1)`.
const INTERVAL_DEPTH: u32 = 200;

pub fn interval_set_check(k_max: u32, samples: usize) -> CertificateReport {
    interval_set_check_seeded(k_max, samples, 2024)
}

pub fn interval_set_check_seeded(k_max: u32, samples: usize, seed: u64) -> CertificateReport {
    let mut report = CertificateReport::new("interval_set");
    let intervals = interval_set(INTERVAL_DEPTH);
    let mut worst_margin = f64::INFINITY;
    for k in 1..k_max {
        let s = (-(k as f64)).exp2();
        let a_len = 0.75 * s;
        let right_gap = 2.0 * s - 1.75 * s;
        let left_gap = s - 1.75 * s / 2.0;
        worst_margin = worst_margin.min((a_len - right_gap - left_gap) / s);
        if a_len < right_gap + left_gap {
            report.check(format!("|I_{k}| >= adjacent gaps"), a_len - right_gap - left_gap, ">= 0", false);
        }
    }
    report.check(
        format!("min over 1 <= k <= {} of (|A| - |B| - |C|) / 2^-k", k_max - 1),
        worst_margin,
        "= 3/8 exactly",
        worst_margin == 0.375,
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    let mut failures = 0usize;
    for i in 0..samples {
        let k = rng.gen_range(-1..=k_max as i64);
        let (lo, hi) = if k < 0 { (-1.0, 0.0) } else { intervals[intervals.len() - 1 - k as usize] };
        // every fourth sample sits on an interval endpoint
        let a = match i % 8 {
            0 => lo,
            4 => hi,
            _ => rng.gen_range(lo..=hi),
        };
        let r = rng.gen_range(0.0..=0.25f64).max(1e-300);
        let inside = measure_in(&intervals, a - r, a + r);
        let outside = 2.0 * r - inside;
        let margin = (inside - outside) / (2.0 * r);
        worst = worst.min(margin);
        if margin < -1e-12 {
            failures += 1;
        }
    }
    report.check(
        format!("min normalized density margin over {samples} windows (r <= 1/4)"),
        worst,
        ">= -1e-12",
        worst >= -1e-12,
    );
    report.check("windows violating the density inequality", failures as f64, "= 0", failures == 0);
    report
}

pub fn certify(name: &str) -> Result<CertificateReport, CertificateError> {
    match name {
        "six_point_0683" => certify_six_point(),
        "trapezoid_064368" => certify_trapezoid(),
        "metric_quadrilateral_pt" => certify_metric_quadrilateral(),
        "interval_set" => Ok(interval_set_check(31, 10_000)),
        other => Err(CertificateError::UnknownName(other.to_string())),
    }
}

pub fn certify_all() -> Result<Vec<CertificateReport>, CertificateError> {
    BUILTIN_NAMES.iter().map(|n| certify(n)).collect()
}
