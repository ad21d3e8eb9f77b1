//! Exhaustive grid search for `M♯`, `M♭` and `M_σ` on configurations with
//! at most three points. Shares no code with the LP path: every support is
//! enumerated, all radii but the last run over a grid of step `h`, and the
//! last radius is chosen among the breakpoints of the (piecewise linear)
//! branch objectives. Rounding the gridded radii down keeps them admissible
//! and costs at most `h` per gridded point.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Configuration;

pub const ORACLE_MAX_POINTS: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("grid oracle handles at most {ORACLE_MAX_POINTS} points, got {0}")]
    TooManyPoints(usize),
    #[error("grid step must lie in (0, 1], got {0}")]
    BadStep(f64),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleValues {
    pub sharp: f64,
    pub flat: f64,
    pub sigma: f64,
    pub step: f64,
}

impl OracleValues {
    /// Worst-case shortfall of the grid values below the true maxima.
    pub fn tolerance(&self, points: usize) -> f64 {
        self.step * points as f64
    }
}

struct Support {
    norms: Vec<f64>,
    dist: Vec<Vec<f64>>,
    sigma: f64,
}

impl Support {
    fn sharp(&self, r: &[f64]) -> f64 {
        let enclosing = r.iter().zip(&self.norms).map(|(r, n)| n + r).fold(0.0, f64::max);
        r.iter().sum::<f64>() - (0.5 + enclosing) / (2.0 * self.sigma)
    }

    fn flat(&self, r: &[f64]) -> f64 {
        let mut diameter: f64 = 0.0;
        for a in 0..r.len() {
            for b in a..r.len() {
                diameter = diameter.max(self.dist[a][b] + r[a] + r[b]);
            }
        }
        r.iter().sum::<f64>() - diameter / (2.0 * self.sigma)
    }

    /// Best `(sharp, flat)` over the last radius with the others fixed.
    fn best_last(&self, r: &mut [f64]) -> Option<(f64, f64)> {
        let k = r.len() - 1;
        let mut upper: f64 = 1.0;
        for i in 0..k {
            upper = upper.min(self.dist[i][k] - r[i]);
        }
        if upper < 0.0 {
            return None;
        }
        let mut cands = vec![0.0, upper];
        let enclosing = (0..k).map(|i| self.norms[i] + r[i]).fold(0.0, f64::max);
        cands.push(enclosing - self.norms[k]);
        let mut others: f64 = 0.0;
        for a in 0..k {
            for b in a..k {
                others = others.max(self.dist[a][b] + r[a] + r[b]);
            }
        }
        cands.push(others / 2.0);
        for i in 0..k {
            cands.push(others - self.dist[i][k] - r[i]);
            cands.push(self.dist[i][k] + r[i]);
        }
        let (mut sharp, mut flat) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for c in cands {
            r[k] = c.clamp(0.0, upper);
            sharp = sharp.max(self.sharp(r));
            flat = flat.max(self.flat(r));
        }
        Some((sharp, flat))
    }
}

/// Grid maxima of the sharp branch (singletons included), the flat branch
/// (joined with the empty assignment, value 0) and their maximum.
pub fn grid_maxima(cfg: &Configuration, step: f64) -> Result<OracleValues, OracleError> {
    let n = cfg.len();
    if n > ORACLE_MAX_POINTS {
        return Err(OracleError::TooManyPoints(n));
    }
    if !(step > 0.0 && step <= 1.0) {
        return Err(OracleError::BadStep(step));
    }
    let table = cfg.table();
    let steps = (1.0 / step).floor() as usize;
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * step).collect();
    let (mut sharp, mut flat) = (f64::NEG_INFINITY, 0.0f64);
    for mask in 1usize..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&i| mask & (1 << i) != 0).collect();
        let support = Support {
            norms: idx.iter().map(|&i| table.norm(i)).collect(),
            dist: idx.iter().map(|&i| idx.iter().map(|&j| table.dist(i, j)).collect()).collect(),
            sigma: cfg.sigma(),
        };
        let mut r = vec![0.0; idx.len()];
        let mut visit = |r: &mut [f64]| {
            if let Some((s, f)) = support.best_last(r) {
                sharp = sharp.max(s);
                flat = flat.max(f);
            }
        };
        match idx.len() {
            1 => visit(&mut r),
            2 => {
                for &a in &grid {
                    r[0] = a;
                    visit(&mut r);
                }
            }
            _ => {
                for &a in &grid {
                    for &b in &grid {
                        if a + b > support.dist[0][1] {
                            break;
                        }
                        r[0] = a;
                        r[1] = b;
                        visit(&mut r);
                    }
                }
            }
        }
    }
    Ok(OracleValues { sharp, flat, sigma: sharp.max(flat), step })
}
