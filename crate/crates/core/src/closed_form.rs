//! Exact formulas for the zero- and one-generation min-max values, the
//! triangle formula for `M♯({O, p₁, p₂})`, and the cubic thresholds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DomainError {
    #[error("sigma {sigma} outside {range}")]
    Sigma { sigma: f64, range: &'static str },
    #[error("inadmissible triangle (D={d}, d1={d1}, d2={d2}): {reason}")]
    Triangle { d: f64, d1: f64, d2: f64, reason: &'static str },
}

/// Side lengths of `{O, p₁, p₂}`: `d = |p₁ − p₂|`, `d1 = |p₁|`, `d2 = |p₂|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangleParams {
    pub d: f64,
    pub d1: f64,
    pub d2: f64,
}

const TOL: f64 = 1e-12;

impl TriangleParams {
    pub fn new(d: f64, d1: f64, d2: f64) -> Self {
        Self { d, d1, d2 }
    }

    /// `0 ≤ d2 ≤ d1 ≤ 1` and `2σ ≤ D ≤ d1 + d2`, up to 1e-12.
    pub fn check(&self, sigma: f64) -> Result<(), DomainError> {
        let err = |reason| Err(DomainError::Triangle { d: self.d, d1: self.d1, d2: self.d2, reason });
        if ![self.d, self.d1, self.d2].iter().all(|v| v.is_finite()) {
            return err("non-finite side");
        }
        if self.d2 < -TOL || self.d2 > self.d1 + TOL || self.d1 > 1.0 + TOL {
            return err("need 0 <= d2 <= d1 <= 1");
        }
        if self.d < 2.0 * sigma - TOL {
            return err("need D >= 2 sigma");
        }
        if self.d > self.d1 + self.d2 + TOL {
            return err("need D <= d1 + d2");
        }
        Ok(())
    }
}

fn open_half_to(sigma: f64, hi: f64, range: &'static str) -> Result<(), DomainError> {
    if sigma.is_finite() && sigma > 0.5 && sigma <= hi {
        Ok(())
    } else {
        Err(DomainError::Sigma { sigma, range })
    }
}

/// `max{0, 1 − 3/(4σ)}` on `(1/2, 1]`.
pub fn zero_gen_minmax(sigma: f64) -> Result<f64, DomainError> {
    open_half_to(sigma, 1.0, "(1/2, 1]")?;
    Ok((1.0 - 3.0 / (4.0 * sigma)).max(0.0))
}

fn one_gen_numerator(s: f64) -> f64 {
    8.0 * s * s * s + 4.0 * s * s - 3.0 * s - 3.0
}

/// `max{0, 8σ³ + 4σ² − 3σ − 3} / (4σ(σ + 1))` on `(1/2, 3/4]`.
pub fn one_gen_minmax(sigma: f64) -> Result<f64, DomainError> {
    open_half_to(sigma, 0.75, "(1/2, 3/4]")?;
    Ok(one_gen_numerator(sigma).max(0.0) / (4.0 * sigma * (sigma + 1.0)))
}

/// `M♯({O, p₁, p₂})` for an admissible triangle.
pub fn max_diesis(sigma: f64, t: TriangleParams) -> Result<f64, DomainError> {
    open_half_to(sigma, 1.0, "(1/2, 1]")?;
    t.check(sigma)?;
    let TriangleParams { d, d1, d2 } = t;
    let best = (2.0 * sigma - 1.0)
        .max(2.0 * sigma * d - (d + d1 + d2) / 2.0)
        .max(sigma * (d + d1 + d2) - (d + 3.0 * d1 - d2) / 2.0);
    Ok((best - 0.5) / (2.0 * sigma))
}

/// The admissible triangle minimizing [`max_diesis`].
pub fn one_gen_minimizer(sigma: f64) -> Result<TriangleParams, DomainError> {
    open_half_to(sigma, 0.75, "(1/2, 3/4]")?;
    Ok(TriangleParams::new(
        2.0 * sigma,
        1.0,
        (2.0 * sigma * sigma - sigma + 1.0) / (sigma + 1.0),
    ))
}

/// Root of an increasing function on `[lo, hi]` by Newton steps kept inside
/// a shrinking bisection bracket.
pub fn safeguarded_newton(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let (flo, fhi) = (f(lo), f(hi));
    assert!(flo <= 0.0 && fhi >= 0.0, "root not bracketed");
    let mut x = 0.5 * (lo + hi);
    for _ in 0..200 {
        let fx = f(x);
        if fx == 0.0 {
            return x;
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let step = x - fx / df(x);
        let next = if step > lo && step < hi { step } else { 0.5 * (lo + hi) };
        if (next - x).abs() <= f64::EPSILON * x.abs() || hi - lo <= f64::EPSILON * hi.abs() {
            return next;
        }
        x = next;
    }
    x
}

/// Positive root of `8s³ + 4s² − 3s − 3`, ≈ 0.72655.
pub fn sigma_pt() -> f64 {
    safeguarded_newton(one_gen_numerator, |s| 24.0 * s * s + 8.0 * s - 3.0, 0.5, 0.75)
}

pub fn lower_cubic(s: f64) -> f64 {
    32.0 * s * s * s - 32.0 * s * s + 12.0 * s - 3.0
}

/// Positive root of `32s³ − 32s² + 12s − 3`, ≈ 0.64368.
pub fn sigma_lower() -> f64 {
    safeguarded_newton(lower_cubic, |s| 96.0 * s * s - 64.0 * s + 12.0, 0.5, 0.75)
}

/// Zero-generation threshold: `0⓵MinMax_σ > 0` exactly when `σ > 3/4`.
pub fn sigma_b() -> f64 {
    0.75
}

pub fn pt_cubic(s: f64) -> f64 {
    one_gen_numerator(s)
}
