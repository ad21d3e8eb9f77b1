//! Small dense linear programs with post-hoc certification.
//!
//! The solver is a two-phase tableau simplex with Bland's rule. Its output
//! is never trusted directly: the returned point is re-checked against every
//! bound and row, and the certified value is the objective evaluated at that
//! point minus [`EPS`]. A buggy pivot can therefore cost optimality but never
//! soundness of the lower bound.

use thiserror::Error;

use crate::geometry::EPS;

/// Absolute+relative tolerance used when re-checking a solver point.
pub const FEAS_TOL: f64 = 1e-9;

const PIVOT_TOL: f64 = 1e-11;
const MAX_PIVOTS: usize = 10_000;

/// Distinguishes disjoint-ball rows (`r_i + r_j ≤ d_ij`), which
/// [`verify_feasible`] checks against `max(0, d − EPS)`, from everything else.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowKind {
    Separation,
    General,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub bound: f64,
    pub kind: RowKind,
}

impl Constraint {
    pub fn general(coeffs: Vec<f64>, bound: f64) -> Self {
        Self { coeffs, bound, kind: RowKind::General }
    }

    pub fn separation(coeffs: Vec<f64>, bound: f64) -> Self {
        Self { coeffs, bound, kind: RowKind::Separation }
    }
}

/// Maximize `objective · x + objective_offset` subject to
/// `lo ≤ x ≤ hi` and `row · x ≤ bound` for every constraint. Rows are
/// stored densely, row-major.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpProblem {
    pub bounds: Vec<(f64, f64)>,
    pub objective: Vec<f64>,
    pub objective_offset: f64,
    matrix: Vec<f64>,
    rhs: Vec<f64>,
    kinds: Vec<RowKind>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CertifiedLpResult {
    Optimal { point: Vec<f64>, certified_value: f64 },
    Infeasible,
}

impl CertifiedLpResult {
    pub fn value(&self) -> Option<f64> {
        match self {
            CertifiedLpResult::Optimal { certified_value, .. } => Some(*certified_value),
            CertifiedLpResult::Infeasible => None,
        }
    }

    pub fn point(&self) -> Option<&[f64]> {
        match self {
            CertifiedLpResult::Optimal { point, .. } => Some(point),
            CertifiedLpResult::Infeasible => None,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("no progress after {pivots} pivots")]
    Degenerate { pivots: usize },
    #[error("solver point failed verification (worst violation {violation:e})")]
    Unverified { violation: f64 },
}

impl LpProblem {
    pub fn new(bounds: Vec<(f64, f64)>, objective: Vec<f64>) -> Self {
        Self { bounds, objective, ..Self::default() }
    }

    pub fn num_vars(&self) -> usize {
        self.bounds.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rhs.len()
    }

    pub fn push(&mut self, c: Constraint) {
        self.push_row(&c.coeffs, c.bound, c.kind);
    }

    /// Appends `coeffs · x ≤ bound`. Short rows are zero-padded; rows longer
    /// than the variable count are kept so [`LpProblem::check`] can reject them.
    pub fn push_row(&mut self, coeffs: &[f64], bound: f64, kind: RowKind) {
        let n = self.num_vars();
        if coeffs.len() > n {
            self.matrix.extend(coeffs[..n].iter());
            self.rhs.push(f64::NAN);
        } else {
            self.matrix.extend_from_slice(coeffs);
            self.matrix.extend(std::iter::repeat_n(0.0, n - coeffs.len()));
            self.rhs.push(if coeffs.len() < n { f64::NAN } else { bound });
        }
        self.kinds.push(kind);
    }

    /// Appends the row with `+1` on each of `plus` and `−1` on each of
    /// `minus` (repeated indices accumulate).
    pub fn push_sparse(&mut self, plus: &[usize], minus: &[usize], bound: f64, kind: RowKind) {
        let n = self.num_vars();
        let start = self.matrix.len();
        self.matrix.extend(std::iter::repeat_n(0.0, n));
        for &i in plus {
            self.matrix[start + i] += 1.0;
        }
        for &i in minus {
            self.matrix[start + i] -= 1.0;
        }
        self.rhs.push(bound);
        self.kinds.push(kind);
    }

    pub fn row(&self, k: usize) -> &[f64] {
        let n = self.num_vars();
        &self.matrix[k * n..(k + 1) * n]
    }

    pub fn bound(&self, k: usize) -> f64 {
        self.rhs[k]
    }

    pub fn kind(&self, k: usize) -> RowKind {
        self.kinds[k]
    }

    fn row_dot(&self, k: usize, x: &[f64]) -> f64 {
        self.row(k).iter().zip(x).map(|(a, v)| a * v).sum()
    }

    pub fn check(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        if self.objective.len() != n {
            return Err(LpError::Malformed(format!(
                "objective has {} coefficients for {n} variables",
                self.objective.len()
            )));
        }
        if !self.objective_offset.is_finite() || self.objective.iter().any(|c| !c.is_finite()) {
            return Err(LpError::Malformed("non-finite objective".into()));
        }
        for (i, &(lo, hi)) in self.bounds.iter().enumerate() {
            if !lo.is_finite() || !hi.is_finite() || lo > hi {
                return Err(LpError::Malformed(format!("bad bounds [{lo}, {hi}] on variable {i}")));
            }
        }
        for k in 0..self.num_rows() {
            if !self.rhs[k].is_finite() || self.row(k).iter().any(|a| !a.is_finite()) {
                return Err(LpError::Malformed(format!("row {k} is malformed or non-finite")));
            }
        }
        Ok(())
    }

    pub fn objective_at(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum::<f64>() + self.objective_offset
    }

    /// Largest amount by which `x` breaks a bound or a row.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &(lo, hi)) in x.iter().zip(&self.bounds) {
            worst = worst.max(lo - v).max(v - hi);
        }
        for k in 0..self.num_rows() {
            worst = worst.max((self.row_dot(k, x) - self.rhs[k]) / (1.0 + self.rhs[k].abs()));
        }
        worst
    }
}

pub fn solve_max(problem: &LpProblem) -> Result<CertifiedLpResult, LpError> {
    solve_max_with(problem, EPS)
}

/// As [`solve_max`] with an explicit certification margin.
pub fn solve_max_with(problem: &LpProblem, eps: f64) -> Result<CertifiedLpResult, LpError> {
    problem.check()?;
    let Some(raw) = simplex(problem)? else {
        return Ok(CertifiedLpResult::Infeasible);
    };
    let point: Vec<f64> = raw
        .iter()
        .zip(&problem.bounds)
        .map(|(&v, &(lo, hi))| v.clamp(lo, hi))
        .collect();
    let violation = problem.max_violation(&point);
    if violation > FEAS_TOL {
        return Err(LpError::Unverified { violation });
    }
    let certified_value = problem.objective_at(&point) - eps;
    Ok(CertifiedLpResult::Optimal { point, certified_value })
}

pub fn verify_feasible(problem: &LpProblem, point: &[f64], shrink: f64) -> bool {
    verify_feasible_with(problem, point, shrink, EPS)
}

/// Shrinks every coordinate by `shrink` (clamped to its bounds) and checks
/// the rows: separation rows against `max(0, bound − eps)`, general rows
/// against `bound` plus the slack the clamped shrink can add through
/// negative coefficients.
pub fn verify_feasible_with(problem: &LpProblem, point: &[f64], shrink: f64, eps: f64) -> bool {
    if point.len() != problem.num_vars() || point.iter().any(|v| !v.is_finite()) {
        return false;
    }
    if point
        .iter()
        .zip(&problem.bounds)
        .any(|(&v, &(lo, hi))| v < lo - FEAS_TOL || v > hi + FEAS_TOL)
    {
        return false;
    }
    let shrunk: Vec<f64> = point
        .iter()
        .zip(&problem.bounds)
        .map(|(&v, &(lo, hi))| (v - shrink).clamp(lo, hi))
        .collect();
    (0..problem.num_rows()).all(|k| {
        let lhs = problem.row_dot(k, &shrunk);
        let bound = problem.bound(k);
        match problem.kind(k) {
            RowKind::Separation => lhs <= (bound - eps).max(0.0),
            RowKind::General => {
                let neg: f64 = problem.row(k).iter().filter(|a| **a < 0.0).map(|a| -a).sum();
                lhs <= bound + shrink * neg + FEAS_TOL * (1.0 + bound.abs())
            }
        }
    })
}

// ---------------------------------------------------------------------------
// Tableau simplex

struct Tableau {
    rows: usize,
    cols: usize,
    /// `rows × (cols + 1)`, the last column is the right-hand side.
    a: Vec<f64>,
    basis: Vec<usize>,
    pivots: usize,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * (self.cols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.cols)
    }

    fn pivot(&mut self, r: usize, c: usize, obj: &mut [f64]) {
        let w = self.cols + 1;
        let p = self.a[r * w + c];
        for j in 0..w {
            self.a[r * w + j] /= p;
        }
        let (before, rest) = self.a.split_at_mut(r * w);
        let (prow, after) = rest.split_at_mut(w);
        for row in before.chunks_exact_mut(w).chain(after.chunks_exact_mut(w)) {
            let f = row[c];
            if f != 0.0 {
                for (x, y) in row.iter_mut().zip(prow.iter()) {
                    *x -= f * y;
                }
                row[c] = 0.0;
            }
        }
        let f = obj[c];
        if f != 0.0 {
            for (x, y) in obj.iter_mut().zip(prow.iter()) {
                *x -= f * y;
            }
            obj[c] = 0.0;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Maximizes with reduced costs in `obj` (positive entries improve).
    /// Columns at or beyond `allowed` never enter. Returns false if
    /// unbounded.
    fn run(&mut self, obj: &mut [f64], allowed: usize) -> Result<bool, LpError> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(LpError::Degenerate { pivots: self.pivots });
            }
            let Some(c) = (0..allowed).find(|&j| obj[j] > PIVOT_TOL) else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let aij = self.at(i, c);
                if aij > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / aij;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-15 || (ratio <= br + 1e-15 && self.basis[i] < self.basis[bi]) {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                Some((r, _)) => self.pivot(r, c, obj),
                None => return Ok(false),
            }
        }
    }

    fn drop_row(&mut self, r: usize) {
        let w = self.cols + 1;
        self.a.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

/// Returns the raw optimizer in original coordinates, or `None` when phase
/// one finds no feasible point.
fn simplex(problem: &LpProblem) -> Result<Option<Vec<f64>>, LpError> {
    let n = problem.num_vars();
    let rc = problem.num_rows();
    // x = lo + y, y ∈ [0, hi − lo]; upper bounds become rows
    let m = rc + n;
    let rhs = |i: usize| -> f64 {
        if i < rc {
            let shift: f64 = problem.row(i).iter().zip(&problem.bounds).map(|(a, b)| a * b.0).sum();
            problem.bound(i) - shift
        } else {
            let (lo, hi) = problem.bounds[i - rc];
            hi - lo
        }
    };
    let b: Vec<f64> = (0..m).map(rhs).collect();
    let artificial: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let cols = n + m + artificial.len();
    let w = cols + 1;
    let mut t = Tableau { rows: m, cols, a: vec![0.0; m * w], basis: vec![0; m], pivots: 0 };
    let mut next_art = n + m;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let row = &mut t.a[i * w..(i + 1) * w];
        if i < rc {
            for (dst, a) in row.iter_mut().zip(problem.row(i)) {
                *dst = sign * a;
            }
        } else {
            row[i - rc] = 1.0;
        }
        row[n + i] = sign;
        row[cols] = sign * b[i];
        if b[i] < 0.0 {
            row[next_art] = 1.0;
            t.basis[i] = next_art;
            next_art += 1;
        } else {
            t.basis[i] = n + i;
        }
    }

    if !artificial.is_empty() {
        // maximize −Σ artificials
        let mut obj = vec![0.0; w];
        for &i in &artificial {
            for j in 0..(n + m) {
                obj[j] += t.at(i, j);
            }
            obj[cols] += t.rhs(i);
        }
        t.run(&mut obj, n + m)?;
        let residual: f64 = (0..t.rows)
            .filter(|&i| t.basis[i] >= n + m)
            .map(|i| t.rhs(i).abs())
            .sum();
        let scale = 1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if residual > FEAS_TOL * scale {
            return Ok(None);
        }
        // drive remaining artificials out of the basis
        let mut i = 0;
        while i < t.rows {
            if t.basis[i] >= n + m {
                match (0..(n + m)).find(|&j| t.at(i, j).abs() > 1e-9) {
                    Some(j) => {
                        t.pivot(i, j, &mut obj);
                        i += 1;
                    }
                    None => t.drop_row(i),
                }
            } else {
                i += 1;
            }
        }
    }

    // phase two: reduced costs c_j − Σ c_B t_ij over the original columns
    let cost = |j: usize| if j < n { problem.objective[j] } else { 0.0 };
    let mut obj = vec![0.0; w];
    for (j, o) in obj.iter_mut().enumerate().take(n + m) {
        *o = cost(j);
    }
    for i in 0..t.rows {
        let cb = cost(t.basis[i]);
        if cb != 0.0 {
            for j in 0..w {
                obj[j] -= cb * t.at(i, j);
            }
        }
    }
    if !t.run(&mut obj, n + m)? {
        return Err(LpError::Malformed("unbounded objective".into()));
    }
    let mut y = vec![0.0; n];
    for i in 0..t.rows {
        if t.basis[i] < n {
            y[t.basis[i]] = t.rhs(i);
        }
    }
    Ok(Some(y.iter().zip(&problem.bounds).map(|(v, b)| b.0 + v).collect()))
}
