//! Absolute moments and moment-growth (ψ_q) norms.

use serde::Serialize;

use super::{log_sum_exp, StandardizedDistribution};
use crate::error::{Error, Result};

/// `E|a|^k`: closed form for the named kinds, exact sums for atoms and a
/// per-cell Gauss rule for tabulated densities.
pub fn abs_moment(dist: &StandardizedDistribution, k: f64) -> Result<f64> {
    let v = dist.ln_abs_moment(k)?.exp();
    if !v.is_finite() {
        return Err(Error::Unavailable(format!("E|a|^{k} is not finite in double precision")));
    }
    Ok(v)
}

/// Log-spaced grid of `n` points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

/// The default order grid: 64 log-spaced points on `[1, 200]`.
pub fn default_psi_grid() -> Vec<f64> {
    log_grid(1.0, 200.0, 64)
}

/// Grid approximation of `sup_{p ≥ 1} p^{-1/q} (E|X|^p)^{1/p}`.
///
/// The value is a lower approximation of the supremum. When the maximum
/// sits at the last grid point the supremum may lie beyond the grid and
/// `at_grid_end` is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PsiNorm {
    pub value: f64,
    pub argmax_p: f64,
    pub at_grid_end: bool,
}

fn grid_max(q: f64, grid: &[f64], ln_moment: impl Fn(f64) -> Result<f64>) -> Result<PsiNorm> {
    if grid.is_empty() {
        return Err(Error::spec("psi-norm grid is empty"));
    }
    if grid.iter().any(|p| !(*p >= 1.0) || !p.is_finite()) {
        return Err(Error::spec("psi-norm grid entries must be finite and at least 1"));
    }
    if !(q > 0.0) {
        return Err(Error::spec("psi-norm index q must be positive"));
    }
    let end = grid.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut best = PsiNorm { value: f64::NEG_INFINITY, argmax_p: f64::NAN, at_grid_end: false };
    for &p in grid {
        let lm = ln_moment(p)?;
        if !lm.is_finite() && lm > 0.0 {
            return Err(Error::Unavailable(format!("E|X|^{p} is infinite")));
        }
        let v = (lm / p - p.ln() / q).exp();
        if v > best.value {
            best = PsiNorm { value: v, argmax_p: p, at_grid_end: p == end };
        }
    }
    Ok(best)
}

/// ψ_q-norm of a standardized law on an order grid.
pub fn psi_norm(dist: &StandardizedDistribution, q: f64, p_grid: &[f64]) -> Result<PsiNorm> {
    grid_max(q, p_grid, |p| dist.ln_abs_moment(p))
}

/// ψ_q-norm of the empirical law of `samples`.
pub fn empirical_psi_norm(samples: &[f64], q: f64, p_grid: &[f64]) -> Result<PsiNorm> {
    if samples.is_empty() {
        return Err(Error::spec("empirical psi-norm needs at least one sample"));
    }
    let ln_n = (samples.len() as f64).ln();
    grid_max(q, p_grid, |p| {
        Ok(log_sum_exp(samples.iter().filter(|x| **x != 0.0).map(|x| p * x.abs().ln())) - ln_n)
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    pub abs_moment_3: f64,
    pub abs_moment_4: f64,
    pub abs_moment_6: f64,
    pub psi2: f64,
    pub psi1: f64,
    /// Set when either ψ maximum was attained at the end of the order grid.
    pub psi_grid_warning: bool,
}

pub fn moment_report(dist: &StandardizedDistribution) -> Result<MomentReport> {
    let grid = default_psi_grid();
    let psi2 = psi_norm(dist, 2.0, &grid)?;
    let psi1 = psi_norm(dist, 1.0, &grid)?;
    Ok(MomentReport {
        abs_moment_3: abs_moment(dist, 3.0)?,
        abs_moment_4: abs_moment(dist, 4.0)?,
        abs_moment_6: abs_moment(dist, 6.0)?,
        psi2: psi2.value,
        psi1: psi1.value,
        psi_grid_warning: psi2.at_grid_end || psi1.at_grid_end,
    })
}
