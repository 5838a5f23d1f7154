//! Zero-bias transform, Stein coefficients and the discrepancy measures
//! built from them.
//!
//! For a mean-zero, variance-one law the zero-bias density is the partial
//! expectation `p*(y) = E[a 1(a > y)] = -E[a 1(a ≤ y)]`, and integrating it
//! gives the closed form `F*(y) = E[a² 1(a ≤ y)] - y E[a 1(a ≤ y)]`. Both
//! only need the partial moments every [`StandardizedDistribution`] exposes.
//!
//! Total-variation distances here are the L1 distance between densities,
//! without the factor one half.

use rand::distr::Open01;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::distributions::{bisect_quantile, Law, StandardizedDistribution};
use crate::error::{Error, Result};
use crate::quad;
use crate::rng;
use crate::special::{normal_quantile, scaled_normal_tail, SQRT_2_OVER_PI};

const INTEGRAL_TOL: f64 = 1e-11;

/// The `a`-zero-biased law `a*` of a standardized `a`.
#[derive(Debug, Clone)]
pub struct ZeroBiasLaw {
    base: StandardizedDistribution,
}

/// Builds the zero-bias law. Exists for every standardized law.
pub fn zero_bias(dist: &StandardizedDistribution) -> ZeroBiasLaw {
    ZeroBiasLaw { base: dist.clone() }
}

impl ZeroBiasLaw {
    pub fn base(&self) -> &StandardizedDistribution {
        &self.base
    }

    /// `p*(y) = E[a 1(a > y)]`.
    pub fn density_star(&self, y: f64) -> f64 {
        (-self.base.partial_moments(y)[1]).max(0.0)
    }

    pub fn cdf_star(&self, y: f64) -> f64 {
        let [_, m1, m2] = self.base.partial_moments(y);
        let tail = if m1 == 0.0 { 0.0 } else { y * m1 };
        (m2 - tail).clamp(0.0, 1.0)
    }

    /// Inverse of [`Self::cdf_star`] by bisection; exact for the Gaussian
    /// fixed point.
    pub fn quantile_star(&self, u: f64) -> f64 {
        if self.base.is_gaussian() {
            return normal_quantile(u);
        }
        let (lo, hi) = self.base.support();
        bisect_quantile(|y| self.cdf_star(y), u, lo, hi)
    }
}

impl Law for ZeroBiasLaw {
    fn cdf(&self, y: f64) -> f64 {
        self.cdf_star(y)
    }

    fn ac_density(&self, y: f64) -> f64 {
        self.density_star(y)
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        Vec::new()
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.base.breakpoints()
    }
}

/// `γ_a`: Wasserstein-1 distance between `a` and `a*`, computed as
/// `∫ |F(t) - F*(t)| dt`.
pub fn gamma(dist: &StandardizedDistribution) -> Result<f64> {
    let star = zero_bias(dist);
    quad::integrate(|t| (dist.cdf(t) - star.cdf_star(t)).abs(), &dist.breakpoints(), INTEGRAL_TOL)
}

fn merged_breakpoints(a: &dyn Law, b: &dyn Law) -> Vec<f64> {
    let pa = a.breakpoints();
    let pb = b.breakpoints();
    let lo = pa[0].min(pb[0]);
    let hi = pa[pa.len() - 1].max(pb[pb.len() - 1]);
    quad::breakpoints(lo, hi, pa.into_iter().chain(pb))
}

/// L1 distance `∫|p1 - p2| + Σ|w1 - w2|` between two laws, where the sum
/// runs over atoms. Mutually singular laws are at distance 2.
pub fn tv_distance(d1: &dyn Law, d2: &dyn Law) -> Result<f64> {
    let atoms1 = d1.atoms();
    let atoms2 = d2.atoms();
    let mass1: f64 = atoms1.iter().map(|a| a.1).sum();
    let mass2: f64 = atoms2.iter().map(|a| a.1).sum();
    // A purely atomic law against one without atoms.
    if (mass1 >= 1.0 - 1e-15 && atoms2.is_empty()) || (mass2 >= 1.0 - 1e-15 && atoms1.is_empty()) {
        return Ok(2.0);
    }
    let pts = merged_breakpoints(d1, d2);
    let continuous = quad::integrate(|y| (d1.ac_density(y) - d2.ac_density(y)).abs(), &pts, INTEGRAL_TOL)?;
    let mut locations: Vec<f64> = atoms1.iter().chain(&atoms2).map(|a| a.0).collect();
    locations.sort_by(f64::total_cmp);
    locations.dedup();
    let weight = |atoms: &[(f64, f64)], x: f64| atoms.iter().filter(|a| a.0 == x).map(|a| a.1).sum::<f64>();
    let atomic: f64 = locations.iter().map(|&x| (weight(&atoms1, x) - weight(&atoms2, x)).abs()).sum();
    Ok(continuous + atomic)
}

/// Stein coefficient `h(y) = p*(y)/p(y)` of a law with a density on an
/// interval.
#[derive(Debug, Clone)]
pub struct SteinCoefficient {
    star: ZeroBiasLaw,
}

impl SteinCoefficient {
    pub fn eval(&self, y: f64) -> f64 {
        let p = self.star.base.ac_density(y);
        if p > 0.0 {
            self.star.density_star(y) / p
        } else {
            0.0
        }
    }

    /// `E[h(a)]`, which equals the variance one.
    pub fn mean(&self) -> Result<f64> {
        let base = &self.star.base;
        quad::integrate(|y| self.eval(y) * base.ac_density(y), &base.breakpoints(), INTEGRAL_TOL)
    }
}

/// Returns `None` when no Stein coefficient that is a function of `a`
/// exists, in particular for laws with atoms.
pub fn stein_coefficient(dist: &StandardizedDistribution) -> Option<SteinCoefficient> {
    dist.has_density_on_interval().then(|| SteinCoefficient { star: zero_bias(dist) })
}

/// `E|1 - h(a)|`, integrated through the Stein coefficient.
pub fn e_one_minus_t(dist: &StandardizedDistribution) -> Result<f64> {
    let h = stein_coefficient(dist).ok_or_else(|| {
        Error::Unavailable(format!("{} has no Stein coefficient; use gamma instead", dist.spec().name()))
    })?;
    quad::integrate(|y| (1.0 - h.eval(y)).abs() * dist.ac_density(y), &dist.breakpoints(), INTEGRAL_TOL)
}

/// Discrepancy of one law from the standard normal.
#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyReport {
    pub kind: String,
    /// `d_1(a, a*)`.
    pub gamma_a: f64,
    /// `E|1 - T|`, absent when no Stein coefficient exists.
    pub e_one_minus_t: Option<f64>,
    /// `∫|p - p*|`.
    pub tv_a_astar: f64,
    /// `∫|p - φ|` (2 for atomic laws).
    pub tv_a_g: f64,
    pub third_abs_moment: f64,
}

pub fn discrepancy_report(dist: &StandardizedDistribution) -> Result<DiscrepancyReport> {
    let star = zero_bias(dist);
    let g = StandardizedDistribution::gaussian();
    let e_one_minus_t = match e_one_minus_t(dist) {
        Ok(v) => Some(v),
        Err(Error::Unavailable(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(DiscrepancyReport {
        kind: dist.spec().name().to_string(),
        gamma_a: gamma(dist)?,
        e_one_minus_t,
        tv_a_astar: tv_distance(dist, &star)?,
        tv_a_g: tv_distance(dist, &g)?,
        third_abs_moment: crate::distributions::abs_moment(dist, 3.0)?,
    })
}

/// Draws `n` pairs `(F⁻¹(U), F*⁻¹(U))` from the monotone coupling, which
/// attains the Wasserstein-1 infimum between `a` and `a*`.
pub fn quantile_coupling_sample(dist: &StandardizedDistribution, n: usize, seed: u64) -> Vec<(f64, f64)> {
    let star = zero_bias(dist);
    rng::batches(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|(stream, len)| {
            let mut r = rng::stream(seed, stream);
            let star = &star;
            (0..len)
                .map(move |_| {
                    let u: f64 = r.sample(Open01);
                    (dist.quantile(u), star.quantile_star(u))
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Draws `n` pairs `(Y, Y*)` with `Y = Σ w_i a_i` and `Y*` having the
/// `Y`-zero-biased law: one index `I` is chosen with probability
/// `w_I²/‖w‖²` and its summand is replaced by `w_I a_I*`, with `(a_I, a_I*)`
/// drawn from the monotone coupling.
pub fn zero_bias_of_weighted_sum(
    weights: &[f64],
    dist: &StandardizedDistribution,
    n: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    let total: f64 = weights.iter().map(|w| w * w).sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::spec("weights must have a positive finite sum of squares"));
    }
    let mut acc = 0.0;
    let cum: Vec<f64> = weights
        .iter()
        .map(|w| {
            acc += w * w / total;
            acc
        })
        .collect();
    let star = zero_bias(dist);
    let out = rng::batches(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|(stream, len)| {
            let mut r = rng::stream(seed, stream);
            let (star, cum) = (&star, &cum);
            (0..len)
                .map(move |_| {
                    let u: f64 = r.random();
                    let pick = cum.partition_point(|c| *c < u).min(cum.len() - 1);
                    let coupling: f64 = r.sample(Open01);
                    let mut y = 0.0;
                    for (i, w) in weights.iter().enumerate() {
                        if i != pick {
                            y += w * dist.draw(&mut r);
                        }
                    }
                    let w = weights[pick];
                    let a = dist.quantile(coupling);
                    let a_star = star.quantile_star(coupling);
                    (y + w * a, y + w * a_star)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    Ok(out)
}

/// Value and first two derivatives of the bounded solution of
/// `f'(x) - x f(x) = |x| - √(2/π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteinSolution {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
}

/// For `x ≥ 0`, `f(x) = -1 + 2 e^{x²/2}(1 - Φ(x))`; negative arguments use
/// the odd reflection `-f(-x)`. At `x = 0` the right limit `f''(0+) = 1` is
/// returned.
pub fn stein_solution_abs(x: f64) -> SteinSolution {
    let t = x.abs();
    let r = scaled_normal_tail(t);
    let f = -1.0 + 2.0 * r;
    let df = t * f + t - SQRT_2_OVER_PI;
    // (1 + t²) f + t (t - √(2/π)) + 1 with the O(t²) terms cancelled.
    let d2f = 2.0 * (1.0 + t * t) * r - t * SQRT_2_OVER_PI;
    if x < 0.0 {
        SteinSolution { f: -f, df, d2f: -d2f }
    } else {
        SteinSolution { f, df, d2f }
    }
}
