//! The objective `F_σ`, its sharp and flat branches, and the certified
//! maxima `M⁺♯`, `M⁺♭`, `M♯`, `M♭`, `M̄♭` and `M_σ`.
//!
//! `M⁺♯` and `M⁺♭` are per-candidate linear programs. The maxima solve one
//! LP per subset in which the enclosing radius (or diameter) is itself a
//! variable, which equals the best candidate of that subset. Each LP
//! point is re-scored by evaluating the branch objective directly at that
//! point (enclosing radius or diameter taken over all points of the subset,
//! which can only lower the score) and subtracting the margin `eps`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Configuration, DistanceTable, GeometryError, EPS};
use crate::lp::{solve_max_with, CertifiedLpResult, LpError, LpProblem, RowKind};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ObjectiveError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error("inadmissible radii: {0}")]
    Radii(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Sharp,
    Flat,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveOptions {
    /// Margin subtracted from every LP-derived value.
    pub eps: f64,
    /// Include one-point subsets via their closed forms. The sweep turns
    /// this off.
    pub singletons: bool,
}

impl Default for ObjectiveOptions {
    fn default() -> Self {
        Self { eps: EPS, singletons: true }
    }
}

impl ObjectiveOptions {
    pub fn pipeline_parity() -> Self {
        Self { eps: EPS, singletons: false }
    }
}

/// Radii in `[0, 1]` whose positive entries give disjoint balls (up to EPS).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RadiiAssignment(Vec<f64>);

impl RadiiAssignment {
    pub fn new(cfg: &Configuration, radii: Vec<f64>) -> Result<Self, ObjectiveError> {
        if radii.len() != cfg.len() {
            return Err(ObjectiveError::Radii(format!(
                "{} radii for {} points",
                radii.len(),
                cfg.len()
            )));
        }
        for (i, &r) in radii.iter().enumerate() {
            if !(0.0..=1.0).contains(&r) {
                return Err(ObjectiveError::Radii(format!("radius {r} at {i} outside [0, 1]")));
            }
        }
        for i in 0..radii.len() {
            for j in (i + 1)..radii.len() {
                if radii[i] > 0.0 && radii[j] > 0.0 && radii[i] + radii[j] > cfg.distance(i, j)? + EPS {
                    return Err(ObjectiveError::Radii(format!("balls at {i} and {j} overlap")));
                }
            }
        }
        Ok(Self(radii))
    }

    pub fn zeros(n: usize) -> Self {
        Self(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub value: f64,
    pub witness: RadiiAssignment,
    pub branch: Branch,
}

// ---------------------------------------------------------------------------
// Direct evaluation

struct Terms {
    sum: f64,
    enclosing: f64,
    diameter: f64,
    any_positive: bool,
}

fn terms(table: &DistanceTable, r: &[f64]) -> Terms {
    let mut t = Terms { sum: 0.0, enclosing: 0.0, diameter: 0.0, any_positive: false };
    for i in 0..r.len() {
        if r[i] <= 0.0 {
            continue;
        }
        t.any_positive = true;
        t.sum += r[i];
        t.enclosing = t.enclosing.max(table.norm(i) + r[i]);
        for j in i..r.len() {
            if r[j] > 0.0 {
                t.diameter = t.diameter.max(table.dist(i, j) + r[i] + r[j]);
            }
        }
    }
    t
}

pub fn eval_f(cfg: &Configuration, r: &RadiiAssignment) -> f64 {
    let t = terms(&cfg.table(), r.as_slice());
    if !t.any_positive {
        return 0.0;
    }
    t.sum - t.diameter.min(0.5 + t.enclosing) / (2.0 * cfg.sigma())
}

pub fn eval_f_sharp(cfg: &Configuration, r: &RadiiAssignment) -> f64 {
    let t = terms(&cfg.table(), r.as_slice());
    t.sum - (0.5 + t.enclosing) / (2.0 * cfg.sigma())
}

pub fn eval_f_flat(cfg: &Configuration, r: &RadiiAssignment) -> f64 {
    let t = terms(&cfg.table(), r.as_slice());
    t.sum - t.diameter / (2.0 * cfg.sigma())
}

// ---------------------------------------------------------------------------
// Per-candidate LPs on a distance table

/// LP for `M⁺♯(P′, p̄)` where `P′ = idx` and `p̄ = idx[bar]`.
pub fn sharp_lp(table: &DistanceTable, idx: &[usize], bar: usize, sigma: f64) -> LpProblem {
    let k = idx.len();
    let mut objective = vec![1.0; k];
    objective[bar] = 1.0 - 1.0 / (2.0 * sigma);
    let mut lp = LpProblem::new(vec![(0.0, 1.0); k], objective);
    lp.objective_offset = -(table.norm(idx[bar]) + 0.5) / (2.0 * sigma);
    push_separation(&mut lp, table, idx);
    for a in 0..k {
        if a != bar {
            lp.push_sparse(&[a], &[bar], table.norm(idx[bar]) - table.norm(idx[a]), RowKind::General);
        }
    }
    lp
}

/// LP for `M⁺♭(P′, p̄, p̄′)` with `p̄ = idx[bar0]`, `p̄′ = idx[bar1]`.
pub fn flat_lp(table: &DistanceTable, idx: &[usize], bar0: usize, bar1: usize, sigma: f64) -> LpProblem {
    let k = idx.len();
    let mut objective = vec![1.0; k];
    objective[bar0] -= 1.0 / (2.0 * sigma);
    objective[bar1] -= 1.0 / (2.0 * sigma);
    let reach = table.dist(idx[bar0], idx[bar1]);
    let mut lp = LpProblem::new(vec![(0.0, 1.0); k], objective);
    lp.objective_offset = -reach / (2.0 * sigma);
    push_separation(&mut lp, table, idx);
    let (lo, hi) = (bar0.min(bar1), bar0.max(bar1));
    for a in 0..k {
        for b in a..k {
            if (a, b) != (lo, hi) {
                lp.push_sparse(&[a, b], &[bar0, bar1], reach - table.dist(idx[a], idx[b]), RowKind::General);
            }
        }
    }
    lp
}

fn push_separation(lp: &mut LpProblem, table: &DistanceTable, idx: &[usize]) {
    for a in 0..idx.len() {
        for b in (a + 1)..idx.len() {
            lp.push_sparse(&[a, b], &[], table.dist(idx[a], idx[b]), RowKind::Separation);
        }
    }
}

/// One LP whose optimum is `max_p̄ M⁺♯(P′, p̄)`. The enclosing radius is a
/// variable `R = max|p| + t` bounded below by every `|p| + r`, so the best
/// `p̄` is whichever row ends up tight. All right-hand sides are
/// nonnegative, so the origin is a feasible basis.
pub fn sharp_subset_lp(table: &DistanceTable, idx: &[usize], sigma: f64) -> LpProblem {
    let k = idx.len();
    let far = idx.iter().map(|&i| table.norm(i)).fold(0.0, f64::max);
    let mut objective = vec![1.0; k + 1];
    objective[k] = -1.0 / (2.0 * sigma);
    let mut lp = LpProblem::new(vec![(0.0, 1.0); k + 1], objective);
    lp.objective_offset = -(far + 0.5) / (2.0 * sigma);
    push_separation(&mut lp, table, idx);
    for a in 0..k {
        lp.push_sparse(&[a], &[k], far - table.norm(idx[a]), RowKind::General);
    }
    lp
}

/// One LP whose optimum is `max_{p̄,p̄′} M⁺♭(P′, p̄, p̄′)`, with the
/// diameter written as `D = max d + t ≥ d_ab + r_a + r_b`.
pub fn flat_subset_lp(table: &DistanceTable, idx: &[usize], sigma: f64) -> LpProblem {
    let k = idx.len();
    let mut far: f64 = 0.0;
    for a in 0..k {
        for b in (a + 1)..k {
            far = far.max(table.dist(idx[a], idx[b]));
        }
    }
    let mut objective = vec![1.0; k + 1];
    objective[k] = -1.0 / (2.0 * sigma);
    let mut lp = LpProblem::new(vec![(0.0, 1.0); k], objective);
    lp.bounds.push((0.0, 2.0));
    lp.objective_offset = -far / (2.0 * sigma);
    push_separation(&mut lp, table, idx);
    for a in 0..k {
        for b in a..k {
            lp.push_sparse(&[a, b], &[k], far - table.dist(idx[a], idx[b]), RowKind::General);
        }
    }
    lp
}

/// Sharp score at `r` with the enclosing radius taken over every point of
/// `idx`, regardless of which radii are positive.
fn sharp_score(table: &DistanceTable, idx: &[usize], r: &[f64], sigma: f64) -> f64 {
    let mut sum = 0.0;
    let mut enclosing: f64 = 0.0;
    for (k, &i) in idx.iter().enumerate() {
        sum += r[k];
        enclosing = enclosing.max(table.norm(i) + r[k]);
    }
    sum - (enclosing + 0.5) / (2.0 * sigma)
}

fn flat_score(table: &DistanceTable, idx: &[usize], r: &[f64], sigma: f64) -> f64 {
    let mut sum = 0.0;
    let mut diameter: f64 = 0.0;
    for a in 0..idx.len() {
        sum += r[a];
        for b in a..idx.len() {
            diameter = diameter.max(table.dist(idx[a], idx[b]) + r[a] + r[b]);
        }
    }
    sum - diameter / (2.0 * sigma)
}

fn rescore(
    lp_result: CertifiedLpResult,
    score: impl FnOnce(&[f64]) -> f64,
    eps: f64,
) -> CertifiedLpResult {
    match lp_result {
        CertifiedLpResult::Optimal { point, certified_value } => {
            let direct = score(&point) - eps;
            CertifiedLpResult::Optimal { certified_value: direct.min(certified_value), point }
        }
        CertifiedLpResult::Infeasible => CertifiedLpResult::Infeasible,
    }
}

pub fn plus_sharp_on(
    table: &DistanceTable,
    idx: &[usize],
    bar: usize,
    sigma: f64,
    eps: f64,
) -> Result<CertifiedLpResult, LpError> {
    let res = solve_max_with(&sharp_lp(table, idx, bar, sigma), eps)?;
    Ok(rescore(res, |r| sharp_score(table, idx, r, sigma), eps))
}

pub fn plus_flat_on(
    table: &DistanceTable,
    idx: &[usize],
    bar0: usize,
    bar1: usize,
    sigma: f64,
    eps: f64,
) -> Result<CertifiedLpResult, LpError> {
    let res = solve_max_with(&flat_lp(table, idx, bar0, bar1, sigma), eps)?;
    Ok(rescore(res, |r| flat_score(table, idx, r, sigma), eps))
}

/// Certified `max_p̄ M⁺♯(idx, p̄)`; the returned point is the radii alone.
pub fn best_sharp_on(table: &DistanceTable, idx: &[usize], sigma: f64, eps: f64) -> Result<CertifiedLpResult, LpError> {
    let res = solve_max_with(&sharp_subset_lp(table, idx, sigma), eps)?;
    Ok(rescore(drop_aux(res), |r| sharp_score(table, idx, r, sigma), eps))
}

/// Certified `max M⁺♭(idx, p̄, p̄′)` over all pairs `p̄, p̄′`.
pub fn best_flat_on(table: &DistanceTable, idx: &[usize], sigma: f64, eps: f64) -> Result<CertifiedLpResult, LpError> {
    let res = solve_max_with(&flat_subset_lp(table, idx, sigma), eps)?;
    Ok(rescore(drop_aux(res), |r| flat_score(table, idx, r, sigma), eps))
}

fn drop_aux(res: CertifiedLpResult) -> CertifiedLpResult {
    match res {
        CertifiedLpResult::Optimal { mut point, certified_value } => {
            point.pop();
            CertifiedLpResult::Optimal { point, certified_value }
        }
        other => other,
    }
}

/// Closed form `M⁺♯({p}) = (2σ − 3/2 − |p|)/(2σ)`, attained at radius 1.
pub fn singleton_sharp(norm: f64, sigma: f64) -> f64 {
    (2.0 * sigma - 1.5 - norm) / (2.0 * sigma)
}

/// Best sharp candidate found so far: value plus the subset and radii.
#[derive(Clone, Debug, PartialEq)]
pub struct SharpBest {
    pub value: f64,
    pub subset: Vec<usize>,
    pub radii: Vec<f64>,
}

/// Maximum of `M⁺♯` over subsets of the table containing its last `tail`
/// indices. Stops as soon as `stop(best)` holds. `None` when no candidate
/// is feasible.
pub fn sharp_max_until(
    table: &DistanceTable,
    sigma: f64,
    tail: usize,
    opts: ObjectiveOptions,
    mut stop: impl FnMut(f64) -> bool,
) -> Result<Option<SharpBest>, LpError> {
    let n = table.len();
    assert!(n < 32 && tail <= n, "subset enumeration limited to 31 points");
    let required: u32 = ((1u32 << tail) - 1) << (n - tail);
    let mut best: Option<SharpBest> = None;
    let mut idx = Vec::with_capacity(n);
    for mask in 1u32..(1u32 << n) {
        if mask & required != required {
            continue;
        }
        let size = mask.count_ones() as usize;
        if size == 1 && !opts.singletons {
            continue;
        }
        idx.clear();
        idx.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        if size == 1 {
            let value = singleton_sharp(table.norm(idx[0]), sigma);
            if best.as_ref().is_none_or(|b| value > b.value) {
                best = Some(SharpBest { value, subset: idx.clone(), radii: vec![1.0] });
                if stop(value) {
                    return Ok(best);
                }
            }
            continue;
        }
        if let CertifiedLpResult::Optimal { point, certified_value } = best_sharp_on(table, &idx, sigma, opts.eps)? {
            if best.as_ref().is_none_or(|b| certified_value > b.value) {
                best = Some(SharpBest { value: certified_value, subset: idx.clone(), radii: point });
                if stop(certified_value) {
                    return Ok(best);
                }
            }
        }
    }
    Ok(best)
}

/// Value-only `M♯` of a planar point list, as used by the sweep.
pub fn sharp_value(table: &DistanceTable, sigma: f64, tail: usize, opts: ObjectiveOptions) -> Result<Option<f64>, LpError> {
    Ok(sharp_max_until(table, sigma, tail, opts, |_| false)?.map(|b| b.value))
}

/// Maximum of `M⁺♭` over subsets with at least two points and no
/// coincident pair (those admit no positive radii).
pub fn flat_max_until(
    table: &DistanceTable,
    sigma: f64,
    eps: f64,
    mut stop: impl FnMut(f64) -> bool,
) -> Result<Option<SharpBest>, LpError> {
    let n = table.len();
    assert!(n < 32, "subset enumeration limited to 31 points");
    let mut best: Option<SharpBest> = None;
    let mut idx = Vec::with_capacity(n);
    'subsets: for mask in 1u32..(1u32 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        idx.clear();
        idx.extend((0..n).filter(|&i| mask & (1 << i) != 0));
        for a in 0..idx.len() {
            for b in (a + 1)..idx.len() {
                if table.dist(idx[a], idx[b]) < 1e-12 {
                    continue 'subsets;
                }
            }
        }
        if let CertifiedLpResult::Optimal { point, certified_value } = best_flat_on(table, &idx, sigma, eps)? {
            if best.as_ref().is_none_or(|b| certified_value > b.value) {
                best = Some(SharpBest { value: certified_value, subset: idx.clone(), radii: point });
                if stop(certified_value) {
                    return Ok(best);
                }
            }
        }
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Configuration-level API

fn full_witness(n: usize, best: &SharpBest) -> RadiiAssignment {
    let mut r = vec![0.0; n];
    for (k, &i) in best.subset.iter().enumerate() {
        r[i] = best.radii[k];
    }
    RadiiAssignment(r)
}

pub fn m_plus_sharp(cfg: &Configuration, i0: usize) -> Result<CertifiedLpResult, ObjectiveError> {
    m_plus_sharp_with(cfg, i0, ObjectiveOptions::default())
}

pub fn m_plus_sharp_with(
    cfg: &Configuration,
    i0: usize,
    opts: ObjectiveOptions,
) -> Result<CertifiedLpResult, ObjectiveError> {
    cfg.distance(i0, i0)?;
    let table = cfg.table();
    let idx: Vec<usize> = (0..cfg.len()).collect();
    Ok(plus_sharp_on(&table, &idx, i0, cfg.sigma(), opts.eps)?)
}

pub fn m_plus_flat(cfg: &Configuration, i0: usize, j0: usize) -> Result<CertifiedLpResult, ObjectiveError> {
    m_plus_flat_with(cfg, i0, j0, ObjectiveOptions::default())
}

pub fn m_plus_flat_with(
    cfg: &Configuration,
    i0: usize,
    j0: usize,
    opts: ObjectiveOptions,
) -> Result<CertifiedLpResult, ObjectiveError> {
    cfg.distance(i0, j0)?;
    let table = cfg.table();
    let idx: Vec<usize> = (0..cfg.len()).collect();
    Ok(plus_flat_on(&table, &idx, i0, j0, cfg.sigma(), opts.eps)?)
}

pub fn m_sharp(cfg: &Configuration, tail: usize) -> Result<Option<ObjectiveValue>, ObjectiveError> {
    m_sharp_with(cfg, tail, ObjectiveOptions::default())
}

pub fn m_sharp_with(
    cfg: &Configuration,
    tail: usize,
    opts: ObjectiveOptions,
) -> Result<Option<ObjectiveValue>, ObjectiveError> {
    if tail > cfg.len() {
        return Err(ObjectiveError::Geometry(GeometryError::IndexOutOfRange {
            index: tail,
            len: cfg.len(),
        }));
    }
    let best = sharp_max_until(&cfg.table(), cfg.sigma(), tail, opts, |_| false)?;
    Ok(best.map(|b| ObjectiveValue {
        value: b.value,
        witness: full_witness(cfg.len(), &b),
        branch: Branch::Sharp,
    }))
}

/// `M̄♭`: flat candidates with at least two positive radii. `None` when the
/// configuration has fewer than two distinct points.
pub fn bar_m_flat(cfg: &Configuration) -> Result<Option<ObjectiveValue>, ObjectiveError> {
    bar_m_flat_with(cfg, ObjectiveOptions::default())
}

pub fn bar_m_flat_with(cfg: &Configuration, opts: ObjectiveOptions) -> Result<Option<ObjectiveValue>, ObjectiveError> {
    let best = flat_max_until(&cfg.table(), cfg.sigma(), opts.eps, |_| false)?;
    Ok(best.map(|b| ObjectiveValue {
        value: b.value,
        witness: full_witness(cfg.len(), &b),
        branch: Branch::Flat,
    }))
}

/// `M♭`, joined with the all-zero assignment (value 0).
pub fn m_flat(cfg: &Configuration) -> Result<ObjectiveValue, ObjectiveError> {
    m_flat_with(cfg, ObjectiveOptions::default())
}

pub fn m_flat_with(cfg: &Configuration, opts: ObjectiveOptions) -> Result<ObjectiveValue, ObjectiveError> {
    let zero = ObjectiveValue { value: 0.0, witness: RadiiAssignment::zeros(cfg.len()), branch: Branch::Flat };
    Ok(match bar_m_flat_with(cfg, opts)? {
        Some(v) if v.value > 0.0 => v,
        _ => zero,
    })
}

pub fn m_sigma(cfg: &Configuration) -> Result<ObjectiveValue, ObjectiveError> {
    m_sigma_with(cfg, ObjectiveOptions::default())
}

pub fn m_sigma_with(cfg: &Configuration, opts: ObjectiveOptions) -> Result<ObjectiveValue, ObjectiveError> {
    let flat = m_flat_with(cfg, opts)?;
    Ok(match m_sharp_with(cfg, 0, opts)? {
        Some(sharp) if sharp.value > flat.value => sharp,
        _ => flat,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point2;

    fn planar(points: &[(f64, f64)], sigma: f64) -> Configuration {
        let pts = points.iter().map(|&(x, y)| Point2::new(x, y)).collect();
        Configuration::planar(pts, sigma).unwrap()
    }

    fn radii(cfg: &Configuration, r: &[f64]) -> RadiiAssignment {
        RadiiAssignment::new(cfg, r.to_vec()).unwrap()
    }

    #[test]
    fn subset_lp_matches_best_candidate() {
        let pts = [(0.0, 0.0), (0.3, 0.4), (-0.5, 0.2), (0.1, -0.9), (0.6, -0.1)];
        let cfg = planar(&pts, 0.7);
        let table = cfg.table();
        for mask in 3u32..32 {
            let idx: Vec<usize> = (0..5).filter(|&i| mask & (1 << i) != 0).collect();
            if idx.len() < 2 {
                continue;
            }
            let sharp = (0..idx.len())
                .filter_map(|b| plus_sharp_on(&table, &idx, b, 0.7, EPS).unwrap().value())
                .fold(f64::NEG_INFINITY, f64::max);
            let merged = best_sharp_on(&table, &idx, 0.7, EPS).unwrap().value().unwrap();
            assert!((sharp - merged).abs() < 1e-9, "{idx:?}: {sharp} vs {merged}");
            let mut flat = f64::NEG_INFINITY;
            for b0 in 0..idx.len() {
                for b1 in b0..idx.len() {
                    if let Some(v) = plus_flat_on(&table, &idx, b0, b1, 0.7, EPS).unwrap().value() {
                        flat = flat.max(v);
                    }
                }
            }
            let merged = best_flat_on(&table, &idx, 0.7, EPS).unwrap().value().unwrap();
            assert!((flat - merged).abs() < 1e-9, "{idx:?}: {flat} vs {merged}");
        }
    }

    #[test]
    fn zero_radii() {
        let cfg = planar(&[(0.0, 0.0), (0.0, 1.0)], 0.7);
        let r = radii(&cfg, &[0.0, 0.0]);
        assert_eq!(eval_f(&cfg, &r), 0.0);
        assert!((eval_f_sharp(&cfg, &r) + 1.0 / 2.8).abs() < 1e-15);
        assert_eq!(eval_f_flat(&cfg, &r), 0.0);
    }

    #[test]
    fn direct_values() {
        let single = planar(&[(0.0, 0.0)], 0.7);
        let r = radii(&single, &[1.0]);
        assert!((eval_f(&single, &r) - (1.0 - 1.5 / 1.4)).abs() < 1e-15);
        assert!((eval_f_sharp(&single, &r) - (1.0 - 1.5 / 1.4)).abs() < 1e-15);
        assert!((eval_f_flat(&single, &r) - (1.0 - 2.0 / 1.4)).abs() < 1e-15);

        let pair = planar(&[(0.0, 0.0), (0.0, 1.0)], 0.7);
        let r = radii(&pair, &[0.0, 1.0]);
        assert!((eval_f(&pair, &r) - (1.0 - 2.0 / 1.4)).abs() < 1e-15);
    }

    #[test]
    fn inadmissible_radii() {
        let cfg = planar(&[(0.0, 0.0), (0.0, 1.0)], 0.7);
        assert!(RadiiAssignment::new(&cfg, vec![0.6, 0.6]).is_err());
        assert!(RadiiAssignment::new(&cfg, vec![1.5, 0.0]).is_err());
        assert!(RadiiAssignment::new(&cfg, vec![0.5]).is_err());
        assert!(RadiiAssignment::new(&cfg, vec![1.0, 0.0]).is_ok());
    }

    #[test]
    fn plus_sharp_closed_forms() {
        let s = 0.7;
        let single = planar(&[(0.0, 0.0)], s);
        let v = m_plus_sharp(&single, 0).unwrap().value().unwrap();
        assert!((v - ((2.0 * s - 1.5) / (2.0 * s) - EPS)).abs() < 1e-9);

        let pair = planar(&[(0.0, 0.0), (0.0, 1.0)], s);
        let v = m_plus_sharp(&pair, 1).unwrap().value().unwrap();
        assert!((v - (((2.0 * s - 1.0) - 0.5) / (2.0 * s) - EPS)).abs() < 1e-9, "{v}");

        // {(0,1), (0,−1)} without the origin
        let table = DistanceTable::from_points(&[Point2::new(0.0, 1.0), Point2::new(0.0, -1.0)]);
        for bar in 0..2 {
            let v = plus_sharp_on(&table, &[0, 1], bar, s, EPS).unwrap().value().unwrap();
            assert!((v - ((2.8 - 2.5) / 1.4 - EPS)).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn plus_flat_closed_forms() {
        let single = planar(&[(0.0, 0.0)], 0.7);
        let v = m_plus_flat(&single, 0, 0).unwrap().value().unwrap();
        assert!((v + EPS).abs() < 1e-9);

        let pair = planar(&[(0.0, 0.0), (1.4, 0.0)], 0.7);
        let v = m_plus_flat(&pair, 0, 1).unwrap().value().unwrap();
        assert!((v - (2.0 * (0.7 - 1.0) * 1.4 / 1.4 - EPS)).abs() < 1e-9, "{v}");

        let tri = planar(&[(0.0, 0.0), (0.0, 1.0), (0.0, -1.0)], 0.7);
        for i in 0..3 {
            for j in i..3 {
                let v = m_plus_flat(&tri, i, j).unwrap().value().unwrap_or(-1.0);
                assert!(v <= 1e-9, "({i},{j}) -> {v}");
            }
        }
    }

    #[test]
    fn sharp_maxima() {
        let tri = planar(&[(0.0, 0.0), (0.0, 1.0), (0.0, -1.0)], 0.7);
        let v = m_sharp(&tri, 0).unwrap().unwrap();
        assert!((v.value - 0.3 / 1.4).abs() < 3.0 * EPS, "{}", v.value);
        assert!(eval_f_sharp(&tri, &v.witness) >= v.value);

        let single = planar(&[(0.0, 0.0)], 0.7);
        let v = m_sharp(&single, 0).unwrap().unwrap();
        assert!((v.value - (1.4 - 1.5) / 1.4).abs() < 1e-12);
        assert!(m_sharp_with(&single, 0, ObjectiveOptions::pipeline_parity()).unwrap().is_none());
    }

    #[test]
    fn sigma_on_singletons() {
        let v = m_sigma(&planar(&[(0.0, 0.0)], 0.8)).unwrap();
        assert!((v.value - 0.0625).abs() < 1e-12);
        assert_eq!(v.branch, Branch::Sharp);
        let v = m_sigma(&planar(&[(0.0, 0.0)], 0.7)).unwrap();
        assert_eq!(v.value, 0.0);
        assert_eq!(m_flat(&planar(&[(0.0, 0.0)], 0.9)).unwrap().value, 0.0);
        assert!(bar_m_flat(&planar(&[(0.0, 0.0)], 0.9)).unwrap().is_none());
    }

    #[test]
    fn tail_restricts_subsets() {
        let cfg = planar(&[(0.0, 0.0), (0.0, 1.0), (0.0, -1.0), (0.9, 0.1)], 0.7);
        let all = m_sharp(&cfg, 0).unwrap().unwrap().value;
        let t1 = m_sharp(&cfg, 1).unwrap().unwrap();
        let t2 = m_sharp(&cfg, 2).unwrap().unwrap().value;
        assert!(t2 <= t1.value && t1.value <= all);
        assert!(t1.witness.as_slice()[3] >= 0.0);
        assert!(m_sharp(&cfg, 5).is_err());
    }

    #[test]
    fn early_stop() {
        let tri = planar(&[(0.0, 0.0), (0.0, 1.0), (0.0, -1.0)], 0.7);
        let table = tri.table();
        let mut calls = 0;
        let best = sharp_max_until(&table, 0.7, 0, ObjectiveOptions::default(), |_| {
            calls += 1;
            true
        })
        .unwrap()
        .unwrap();
        assert_eq!(calls, 1);
        assert!(best.value <= 0.3 / 1.4);
    }
}
