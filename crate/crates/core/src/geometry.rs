//! Gaussian mean width `ω(T) = E sup_{t ∈ T} ⟨g, t⟩` by Monte Carlo.

use rand_distr::StandardNormal;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::recovery::{Constraint, ConstraintSet};
use crate::rng;

pub const DEFAULT_WIDTH_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthEstimate {
    pub mean: f64,
    /// Sample standard deviation over `√n`.
    pub stderr: f64,
    pub n_samples: usize,
    pub set_descriptor: String,
}

/// Width of the `s`-sparse unit vectors of `ℝ^d`. For each draw the
/// supremum is the ℓ2 norm of the `s` largest entries of `|g|`.
pub fn width_sparse_sphere(d: usize, s: usize, n: usize, seed: u64) -> Result<WidthEstimate> {
    if s == 0 || s > d {
        return Err(Error::spec(format!("sparsity must lie in [1, {d}], got {s}")));
    }
    let desc = if s == d { format!("sphere(d={d})") } else { format!("sparse_sphere(d={d}, s={s})") };
    mc_width(d, n, seed, desc, |g| {
        let mut sq: Vec<f64> = g.iter().map(|v| v * v).collect();
        top_sum(&mut sq, s).sqrt()
    })
}

/// Width of a finite set of points of `ℝ^d`.
pub fn width_finite_set(points: &[Vec<f64>], n: usize, seed: u64) -> Result<WidthEstimate> {
    let d = points.first().map(|p| p.len()).unwrap_or(0);
    if d == 0 || points.iter().any(|p| p.len() != d) {
        return Err(Error::spec("points must be nonempty and share one dimension"));
    }
    mc_width(d, n, seed, format!("finite_set(d={d}, n={})", points.len()), |g| {
        points.iter().map(|p| p.iter().zip(g).map(|(a, b)| a * b).sum::<f64>()).fold(f64::NEG_INFINITY, f64::max)
    })
}

fn mc_width<F: Fn(&[f64]) -> f64 + Sync>(d: usize, n: usize, seed: u64, set_descriptor: String, sup: F) -> Result<WidthEstimate> {
    if n < 2 {
        return Err(Error::spec("width estimation needs at least two draws"));
    }
    let sums: Vec<(f64, f64)> = rng::batches(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(stream, len)| {
            let mut r = rng::stream(seed, stream);
            let mut g = vec![0.0; d];
            let (mut s1, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                for v in g.iter_mut() {
                    *v = r.sample(StandardNormal);
                }
                let v = sup(&g);
                s1 += v;
                s2 += v * v;
            }
            (s1, s2)
        })
        .collect();
    let (s1, s2) = sums.iter().fold((0.0, 0.0), |a, b| (a.0 + b.0, a.1 + b.1));
    let nf = n as f64;
    let mean = s1 / nf;
    let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
    Ok(WidthEstimate { mean, stderr: (var / nf).sqrt(), n_samples: n, set_descriptor })
}

/// Sum of the `s` largest values; reorders `v`.
fn top_sum(v: &mut [f64], s: usize) -> f64 {
    if s < v.len() {
        v.select_nth_unstable_by(s - 1, |a, b| b.total_cmp(a));
    }
    v[..s].iter().sum()
}

/// Width of the `2s`-sparse unit vectors, which contain the spherical
/// section of every descent cone of the `s`-sparse set. When `2s > d` the
/// full sphere is used.
pub fn width_descent_cone_sparse_proxy(d: usize, s: usize, n: usize, seed: u64) -> Result<WidthEstimate> {
    if s == 0 || s > d {
        return Err(Error::spec(format!("sparsity must lie in [1, {d}], got {s}")));
    }
    let k = (2 * s).min(d);
    let mut w = width_sparse_sphere(d, k, n, seed)?;
    w.set_descriptor = format!("descent_cone_proxy(d={d}, s={s}, k={k})");
    Ok(w)
}

/// Width used for a constraint set: the sparse proxy for sparse sets and
/// the full sphere otherwise.
pub fn width_for_constraint(k: &ConstraintSet, n: usize, seed: u64) -> Result<WidthEstimate> {
    match k.constraint {
        Constraint::Sparse { s } => width_descent_cone_sparse_proxy(k.dim, s, n, seed),
        _ => width_sparse_sphere(k.dim, k.dim, n, seed),
    }
}

/// `⌈ω²⌉`, the smallest admissible sample size.
pub fn min_samples(width: &WidthEstimate) -> u64 {
    (width.mean.max(0.0).powi(2)).ceil() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::SQRT_2_OVER_PI;
    use rand::SeedableRng;
    use statrs::function::gamma::ln_gamma;

    fn with_mean(mean: f64) -> WidthEstimate {
        WidthEstimate { mean, stderr: 0.0, n_samples: 1, set_descriptor: String::new() }
    }

    #[test]
    fn chi_mean_for_full_sphere() {
        let w = width_sparse_sphere(2, 2, 100_000, 1).unwrap();
        let d = 2.0f64;
        let chi = 2f64.sqrt() * (ln_gamma((d + 1.0) / 2.0) - ln_gamma(d / 2.0)).exp();
        assert!((chi - (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-12);
        assert!((w.mean - chi).abs() <= 4.0 * w.stderr);
        let w = width_sparse_sphere(1, 1, 100_000, 2).unwrap();
        assert!((w.mean - SQRT_2_OVER_PI).abs() <= 4.0 * w.stderr);
    }

    #[test]
    fn width_grows_with_sparsity() {
        let a = width_sparse_sphere(64, 1, 100_000, 3).unwrap();
        let b = width_sparse_sphere(64, 2, 100_000, 3).unwrap();
        assert!(b.mean > a.mean);
    }

    #[test]
    fn proxy_cases() {
        let full = width_sparse_sphere(8, 8, 50_000, 4).unwrap();
        let half = width_descent_cone_sparse_proxy(8, 4, 50_000, 5).unwrap();
        let pooled = (full.stderr.powi(2) + half.stderr.powi(2)).sqrt();
        assert!((full.mean - half.mean).abs() <= 4.0 * pooled);
        let w = width_descent_cone_sparse_proxy(256, 4, 10_000, 6).unwrap();
        let h = (2.0 * 8.0 * (2.0f64 * 256.0 / 8.0).ln()).sqrt();
        assert!(w.mean >= 0.5 * h && w.mean <= 1.5 * h, "{} vs {h}", w.mean);
        let over = width_descent_cone_sparse_proxy(5, 3, 1000, 1).unwrap();
        assert!(over.set_descriptor.contains("k=5"));
    }

    #[test]
    fn stderr_scales_with_n() {
        let a = width_descent_cone_sparse_proxy(64, 3, 20_000, 7).unwrap();
        let b = width_descent_cone_sparse_proxy(64, 3, 80_000, 8).unwrap();
        let ratio = b.stderr / a.stderr;
        assert!((ratio - 0.5).abs() <= 0.15, "{ratio}");
    }

    #[test]
    fn min_samples_examples() {
        assert_eq!(min_samples(&with_mean(0.0)), 0);
        assert_eq!(min_samples(&with_mean(10.0)), 100);
        assert_eq!(min_samples(&with_mean(SQRT_2_OVER_PI)), 1);
    }

    #[test]
    fn per_draw_sup_matches_subset_enumeration() {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for d in 1..=8usize {
            for s in 1..=d {
                let g: Vec<f64> = (0..d).map(|_| r.sample(StandardNormal)).collect();
                let mut sq: Vec<f64> = g.iter().map(|v| v * v).collect();
                let fast = top_sum(&mut sq, s).sqrt();
                let mut brute = 0.0f64;
                for mask in 0u32..(1 << d) {
                    if mask.count_ones() as usize == s {
                        // sup over unit vectors on this support is the norm of g there.
                        let n: f64 = (0..d).filter(|i| mask >> i & 1 == 1).map(|i| g[i] * g[i]).sum();
                        brute = brute.max(n.sqrt());
                    }
                }
                assert!((fast - brute).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn width_of_a_set_and_its_negation_agree() {
        let mut r = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let pts: Vec<Vec<f64>> = (0..12).map(|_| (0..5).map(|_| r.random_range(-1.0..2.0)).collect()).collect();
        let neg: Vec<Vec<f64>> = pts.iter().map(|p| p.iter().map(|c| -c).collect()).collect();
        let a = width_finite_set(&pts, 50_000, 21).unwrap();
        let b = width_finite_set(&neg, 50_000, 22).unwrap();
        let pooled = (a.stderr.powi(2) + b.stderr.powi(2)).sqrt();
        assert!((a.mean - b.mean).abs() <= 4.0 * pooled);
    }

    #[test]
    fn bad_arguments() {
        assert!(width_sparse_sphere(4, 0, 10, 1).is_err());
        assert!(width_sparse_sphere(4, 5, 10, 1).is_err());
        assert!(width_sparse_sphere(4, 2, 1, 1).is_err());
    }
}
