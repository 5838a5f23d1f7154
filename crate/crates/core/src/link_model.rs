//! Link functions, sensing models and the population quantities `λ`,
//! `v_x = E[a θ(⟨a, x⟩)]` and `α = ‖v_x - λx‖₂`, together with the closed-form
//! upper bounds on `α`.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{abs_moment, StandardizedDistribution};
use crate::error::{Error, Result};
use crate::rng;
use crate::special::SQRT_2_OVER_PI;
use crate::zero_bias::{e_one_minus_t, gamma};

/// `c₁ = √(2/π) - 1/2`, the constant in the sign-link norm condition
/// `‖x‖₃³ ≤ c₁/γ_a`.
pub const SIGN_C1: f64 = SQRT_2_OVER_PI - 0.5;

/// Largest enumeration (number of outcome patterns) attempted before
/// falling back to Monte Carlo.
pub const MAX_ENUMERATION: usize = 1 << 20;

/// Smallest Monte Carlo sample accepted for `v_x`.
pub const MIN_MC_SAMPLES: usize = 10_000;

/// The link `θ` with the metadata the α bounds need.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum LinkFunction {
    /// `θ(w) = μw`.
    Linear { mu: f64 },
    Tanh,
    Sin,
    /// `θ(w) = 1` for `w ≥ 0`, `-1` otherwise.
    Sign,
}

impl LinkFunction {
    pub fn eval(&self, w: f64) -> f64 {
        match self {
            LinkFunction::Linear { mu } => mu * w,
            LinkFunction::Tanh => w.tanh(),
            LinkFunction::Sin => w.sin(),
            LinkFunction::Sign => {
                if w >= 0.0 {
                    1.0
                } else {
                    -1.0
                }
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            LinkFunction::Linear { .. } => "linear",
            LinkFunction::Tanh => "tanh",
            LinkFunction::Sin => "sin",
            LinkFunction::Sign => "sign",
        }
    }

    pub fn lipschitz_const(&self) -> Option<f64> {
        match self {
            LinkFunction::Linear { mu } => Some(mu.abs()),
            LinkFunction::Tanh | LinkFunction::Sin => Some(1.0),
            LinkFunction::Sign => None,
        }
    }

    /// `‖θ''‖_∞`. For tanh the maximum of `2 tanh(w) sech²(w)` is attained
    /// at `tanh² w = 1/3`.
    pub fn second_deriv_bound(&self) -> Option<f64> {
        match self {
            LinkFunction::Linear { .. } => Some(0.0),
            LinkFunction::Tanh => Some(4.0 / (3.0 * 3f64.sqrt())),
            LinkFunction::Sin => Some(1.0),
            LinkFunction::Sign => None,
        }
    }

    pub fn is_sign(&self) -> bool {
        matches!(self, LinkFunction::Sign)
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, LinkFunction::Linear { .. })
    }

    /// Points where `θ` is not smooth.
    pub fn kinks(&self) -> &'static [f64] {
        match self {
            LinkFunction::Sign => &[0.0],
            _ => &[],
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "linear" => LinkFunction::Linear { mu: 1.0 },
            "tanh" => LinkFunction::Tanh,
            "sin" => LinkFunction::Sin,
            "sign" => LinkFunction::Sign,
            _ => return None,
        })
    }
}

/// How `y` is produced from `θ(⟨a, x⟩)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Channel {
    /// `y = θ(⟨a, x⟩)`.
    #[default]
    Exact,
    /// `y = θ(⟨a, x⟩) + σ z` with independent standard normal `z`.
    AdditiveNoise { sigma: f64 },
    /// Sign link only: the sign is flipped with probability `q`. The
    /// conditional mean is `(1 - 2q) θ`, so `λ` and `v_x` are scaled by
    /// `1 - 2q`.
    BitFlip { q: f64 },
}

impl Channel {
    /// Factor relating `E[y | a]` to `θ(⟨a, x⟩)`.
    pub fn mean_scale(&self) -> f64 {
        match self {
            Channel::BitFlip { q } => 1.0 - 2.0 * q,
            _ => 1.0,
        }
    }
}

/// A single-index model `E[y | a] = θ(⟨a, x⟩)` with i.i.d. entries of `a`.
#[derive(Debug, Clone)]
pub struct SensingModel {
    dist: StandardizedDistribution,
    link: LinkFunction,
    x: Vec<f64>,
    channel: Channel,
}

impl SensingModel {
    /// Fails unless `‖x‖₂ = 1` within `1e-12` and the channel parameters
    /// are valid for the link.
    pub fn new(dist: StandardizedDistribution, link: LinkFunction, x: Vec<f64>, channel: Channel) -> Result<Self> {
        if x.is_empty() {
            return Err(Error::spec("x must have at least one coordinate"));
        }
        let norm = l2(&x);
        if !((norm - 1.0).abs() <= 1e-12) {
            return Err(Error::spec(format!("x must be a unit vector, ‖x‖₂ = {norm}")));
        }
        match channel {
            Channel::Exact => {}
            Channel::AdditiveNoise { sigma } => {
                if !(sigma >= 0.0 && sigma.is_finite()) {
                    return Err(Error::spec(format!("noise level must be finite and nonnegative, got {sigma}")));
                }
            }
            Channel::BitFlip { q } => {
                if !link.is_sign() {
                    return Err(Error::spec("bit_flip channel needs the sign link"));
                }
                if !(0.0..0.5).contains(&q) {
                    return Err(Error::spec(format!("flip probability must lie in [0, 1/2), got {q}")));
                }
            }
        }
        if let LinkFunction::Linear { mu } = link {
            if !mu.is_finite() {
                return Err(Error::spec("linear link slope must be finite"));
            }
        }
        Ok(SensingModel { dist, link, x, channel })
    }

    pub fn dist(&self) -> &StandardizedDistribution {
        &self.dist
    }

    pub fn link(&self) -> LinkFunction {
        self.link
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    pub fn channel(&self) -> Channel {
        self.channel
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Applies the channel to `θ(w)`.
    pub fn observe<R: Rng + ?Sized>(&self, w: f64, rng: &mut R) -> f64 {
        let t = self.link.eval(w);
        match self.channel {
            Channel::Exact => t,
            Channel::AdditiveNoise { sigma } => {
                let z: f64 = rng.sample(StandardNormal);
                t + sigma * z
            }
            Channel::BitFlip { q } => {
                let u: f64 = rng.random();
                if u < q {
                    -t
                } else {
                    t
                }
            }
        }
    }

    /// Fills `row` with a fresh `a` and returns the matching `y`.
    pub fn draw_row<R: Rng + ?Sized>(&self, rng: &mut R, row: &mut [f64]) -> f64 {
        for a in row.iter_mut() {
            *a = self.dist.draw(rng);
        }
        let w = dot(row, &self.x);
        self.observe(w, rng)
    }

    /// Stable hash of the model description.
    pub fn fingerprint(&self) -> u64 {
        let desc = serde_json::json!({
            "dist": self.dist.spec(),
            "link": self.link,
            "channel": self.channel,
            "x": self.x,
        });
        rng::fingerprint(desc.to_string().as_bytes())
    }

    fn enumerable(&self) -> Option<&crate::distributions::Discrete> {
        let d = self.dist.as_discrete()?;
        let k = d.atoms().count();
        let mut total: usize = 1;
        for _ in 0..self.dim() {
            total = total.checked_mul(k)?;
            if total > MAX_ENUMERATION {
                return None;
            }
        }
        Some(d)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LambdaMethod {
    Quadrature,
    MonteCarlo { n: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LambdaEstimate {
    pub value: f64,
    pub stderr: f64,
    /// Set when a Monte Carlo estimate used fewer than 10⁴ samples.
    pub low_sample_warning: bool,
}

/// `λ = E[y⟨a, x⟩]`.
///
/// Quadrature is available when `⟨a, x⟩` has a known one-dimensional law:
/// Gaussian entries, or `d = 1`.
pub fn lambda_of(model: &SensingModel, method: LambdaMethod) -> Result<LambdaEstimate> {
    match method {
        LambdaMethod::Quadrature => {
            let value = lambda_quadrature(model)?;
            Ok(LambdaEstimate { value, stderr: 0.0, low_sample_warning: false })
        }
        LambdaMethod::MonteCarlo { n, seed } => {
            if n == 0 {
                return Err(Error::spec("Monte Carlo sample size must be positive"));
            }
            let m = mc_pass(model, n, seed, std::slice::from_ref(&model.x));
            let var = m.dir_var[0];
            Ok(LambdaEstimate {
                value: dot(&m.mean, &model.x),
                stderr: (var / n as f64).sqrt(),
                low_sample_warning: n < MIN_MC_SAMPLES,
            })
        }
    }
}

fn lambda_quadrature(model: &SensingModel) -> Result<f64> {
    let link = model.link;
    let scale = model.channel.mean_scale();
    if model.dist.is_gaussian() {
        let g = StandardizedDistribution::gaussian();
        return Ok(scale * g.expect(|w| w * link.eval(w), link.kinks())?);
    }
    if model.dim() == 1 {
        let s = model.x[0];
        let breaks: Vec<f64> = link.kinks().iter().map(|k| k / s).collect();
        return Ok(scale * model.dist.expect(|a| a * s * link.eval(a * s), &breaks)?);
    }
    Err(Error::precondition(
        "quadrature for λ needs Gaussian entries or a one-dimensional model",
    ))
}

#[derive(Debug, Clone, Serialize)]
pub struct VxEstimate {
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
}

/// Monte Carlo estimate of `v_x = E[y a]` with per-coordinate standard
/// errors.
pub fn v_x_of(model: &SensingModel, n: usize, seed: u64) -> Result<VxEstimate> {
    check_mc_size(n)?;
    let m = mc_pass(model, n, seed, &[]);
    let stderr = m.var.iter().map(|v| (v / n as f64).sqrt()).collect();
    Ok(VxEstimate { mean: m.mean, stderr })
}

fn check_mc_size(n: usize) -> Result<()> {
    if n < MIN_MC_SAMPLES {
        return Err(Error::precondition(format!(
            "Monte Carlo needs at least {MIN_MC_SAMPLES} samples, got {n}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PopulationMethod {
    /// Closed form: Gaussian entries or a linear link.
    Exact,
    /// Exhaustive sum over all outcomes of a discrete sensing law.
    Enumeration,
    MonteCarlo,
}

/// `λ`, `v_x` and `α` for one model.
#[derive(Debug, Clone, Serialize)]
pub struct PopulationSummary {
    pub lambda: f64,
    pub v_x: Vec<f64>,
    pub alpha: f64,
    /// Standard error of `alpha` (delta method); zero for exact methods.
    pub mc_stderr: f64,
    pub lambda_stderr: f64,
    pub v_x_stderr: Vec<f64>,
    pub method: PopulationMethod,
    pub n_samples: usize,
}

/// Monte Carlo `λ̂ = ⟨v̂, x⟩` and `α̂ = ‖v̂ - λ̂x‖₂` from one sample.
pub fn alpha_of(model: &SensingModel, n: usize, seed: u64) -> Result<PopulationSummary> {
    check_mc_size(n)?;
    Ok(mc_estimate(model, n, seed).summary)
}

/// `λ`, `v_x` and `α` without sampling, when available: zero `α` for
/// Gaussian entries or linear links, and full enumeration for discrete
/// laws with at most 2²⁰ outcome patterns.
pub fn population_exact(model: &SensingModel) -> Result<Option<PopulationSummary>> {
    let d = model.dim();
    let scale = model.channel.mean_scale();
    let closed = |lambda: f64| PopulationSummary {
        lambda,
        v_x: model.x.iter().map(|xi| lambda * xi).collect(),
        alpha: 0.0,
        mc_stderr: 0.0,
        lambda_stderr: 0.0,
        v_x_stderr: vec![0.0; d],
        method: PopulationMethod::Exact,
        n_samples: 0,
    };
    if let LinkFunction::Linear { mu } = model.link {
        return Ok(Some(closed(scale * mu)));
    }
    if model.dist.is_gaussian() {
        return Ok(Some(closed(lambda_quadrature(model)?)));
    }
    let Some(disc) = model.enumerable() else {
        return Ok(None);
    };
    let v = enumerate_v_x(model, disc);
    let lambda = dot(&v, &model.x);
    let resid: Vec<f64> = v.iter().zip(&model.x).map(|(vi, xi)| vi - lambda * xi).collect();
    Ok(Some(PopulationSummary {
        lambda,
        alpha: l2(&resid),
        v_x: v,
        mc_stderr: 0.0,
        lambda_stderr: 0.0,
        v_x_stderr: vec![0.0; d],
        method: PopulationMethod::Enumeration,
        n_samples: 0,
    }))
}

/// Exact `α` when [`population_exact`] applies.
pub fn alpha_exact(model: &SensingModel) -> Result<Option<f64>> {
    Ok(population_exact(model)?.map(|s| s.alpha))
}

fn enumerate_v_x(model: &SensingModel, disc: &crate::distributions::Discrete) -> Vec<f64> {
    let atoms: Vec<(f64, f64)> = disc.atoms().collect();
    let k = atoms.len();
    let d = model.dim();
    let total = k.pow(d as u32);
    let scale = model.channel.mean_scale();
    let chunk = 1 << 12;
    let partials: Vec<Vec<f64>> = (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; d];
            let mut idx = vec![0usize; d];
            for code in c * chunk..((c + 1) * chunk).min(total) {
                let mut r = code;
                for slot in idx.iter_mut() {
                    *slot = r % k;
                    r /= k;
                }
                let mut prob = 1.0;
                let mut w = 0.0;
                for (j, &i) in idx.iter().enumerate() {
                    prob *= atoms[i].1;
                    w += atoms[i].0 * model.x[j];
                }
                let t = prob * model.link.eval(w);
                for (j, &i) in idx.iter().enumerate() {
                    acc[j] += t * atoms[i].0;
                }
            }
            acc
        })
        .collect();
    let mut v = vec![0.0; d];
    for p in partials {
        for (vi, pi) in v.iter_mut().zip(p) {
            *vi += pi;
        }
    }
    v.iter().map(|vi| scale * vi).collect()
}

struct McMoments {
    mean: Vec<f64>,
    var: Vec<f64>,
    dir_var: Vec<f64>,
}

/// One pass over `n` draws of `y a`: coordinate means and variances and
/// the variance of `⟨u, y a⟩` for each direction `u` in `dirs`.
fn mc_pass(model: &SensingModel, n: usize, seed: u64, dirs: &[Vec<f64>]) -> McMoments {
    let d = model.dim();
    let k = dirs.len();
    let parts: Vec<(Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>)> = rng::batches(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(stream, len)| {
            let mut r = rng::stream(seed, stream);
            let mut row = vec![0.0; d];
            let (mut s, mut q) = (vec![0.0; d], vec![0.0; d]);
            let (mut ds, mut dq) = (vec![0.0; k], vec![0.0; k]);
            for _ in 0..len {
                let y = model.draw_row(&mut r, &mut row);
                for j in 0..d {
                    let z = y * row[j];
                    s[j] += z;
                    q[j] += z * z;
                }
                for (i, u) in dirs.iter().enumerate() {
                    let z = y * dot(u, &row);
                    ds[i] += z;
                    dq[i] += z * z;
                }
            }
            (s, q, ds, dq)
        })
        .collect();
    let (mut s, mut q) = (vec![0.0; d], vec![0.0; d]);
    let (mut ds, mut dq) = (vec![0.0; k], vec![0.0; k]);
    for (ps, pq, pds, pdq) in parts {
        add(&mut s, &ps);
        add(&mut q, &pq);
        add(&mut ds, &pds);
        add(&mut dq, &pdq);
    }
    let nf = n as f64;
    let var_of = |sum: f64, sq: f64| (sq / nf - (sum / nf).powi(2)).max(0.0) * nf / (nf - 1.0).max(1.0);
    McMoments {
        mean: s.iter().map(|v| v / nf).collect(),
        var: s.iter().zip(&q).map(|(a, b)| var_of(*a, *b)).collect(),
        dir_var: ds.iter().zip(&dq).map(|(a, b)| var_of(*a, *b)).collect(),
    }
}

fn add(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a += b;
    }
}

struct McEstimate {
    summary: PopulationSummary,
    norm_stderr: f64,
}

fn mc_estimate(model: &SensingModel, n: usize, seed: u64) -> McEstimate {
    let d = model.dim();
    let nf = n as f64;
    let first = mc_pass(model, n, seed, std::slice::from_ref(&model.x));
    let v = first.mean;
    let lambda = dot(&v, &model.x);
    let resid: Vec<f64> = v.iter().zip(&model.x).map(|(vi, xi)| vi - lambda * xi).collect();
    let alpha = l2(&resid);
    let norm = l2(&v);
    let unit = |w: &[f64], len: f64| -> Vec<f64> {
        if len > 0.0 {
            w.iter().map(|c| c / len).collect()
        } else {
            vec![0.0; d]
        }
    };
    // Gradients of ‖P v‖ and ‖v‖ for the delta-method errors; the same
    // seed replays the first pass.
    let second = mc_pass(model, n, seed, &[unit(&resid, alpha), unit(&v, norm)]);
    McEstimate {
        summary: PopulationSummary {
            lambda,
            alpha,
            mc_stderr: (second.dir_var[0] / nf).sqrt(),
            lambda_stderr: (first.dir_var[0] / nf).sqrt(),
            v_x_stderr: first.var.iter().map(|s| (s / nf).sqrt()).collect(),
            v_x: v,
            method: PopulationMethod::MonteCarlo,
            n_samples: n,
        },
        norm_stderr: (second.dir_var[1] / nf).sqrt(),
    }
}

/// `L·E|1 - T|` where `L` is the link's Lipschitz constant.
pub fn alpha_bound_lipschitz(dist: &StandardizedDistribution, link: &LinkFunction) -> Result<f64> {
    let l = link
        .lipschitz_const()
        .ok_or_else(|| Error::Unavailable(format!("{} link is not Lipschitz", link.name())))?;
    Ok(l * e_one_minus_t(dist)?)
}

/// `‖θ''‖ γ_a`.
pub fn alpha_bound_c2(dist: &StandardizedDistribution, link: &LinkFunction) -> Result<f64> {
    let b = link
        .second_deriv_bound()
        .ok_or_else(|| Error::Unavailable(format!("{} link has no second-derivative bound", link.name())))?;
    if b == 0.0 {
        return Ok(0.0);
    }
    Ok(b * gamma(dist)?)
}

/// `(10 γ_a E|a|³ ‖x‖_∞)^{1/2}` for the sign link. Requires a symmetric
/// law, `‖x‖₃³ ≤ c₁/γ_a` and `‖x‖_∞ ≤ 1/2`.
pub fn alpha_bound_sign(dist: &StandardizedDistribution, x: &[f64]) -> Result<f64> {
    if !dist.is_symmetric() {
        return Err(Error::precondition(format!("{} is not symmetric", dist.spec().name())));
    }
    let g = gamma(dist)?;
    let (inf, l3) = (sup_norm(x), l3_cubed(x));
    if l3 * g > SIGN_C1 {
        return Err(Error::precondition(format!("‖x‖₃³ = {l3} exceeds c₁/γ_a = {}", SIGN_C1 / g)));
    }
    if inf > 0.5 {
        return Err(Error::precondition(format!("‖x‖_∞ = {inf} exceeds 1/2")));
    }
    Ok((10.0 * g * abs_moment(dist, 3.0)? * inf).sqrt())
}

pub(crate) fn sup_norm(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

pub(crate) fn l3_cubed(x: &[f64]) -> f64 {
    x.iter().map(|v| v.abs().powi(3)).sum()
}

/// One inequality about `v_x` for the sign link.
#[derive(Debug, Clone, Serialize)]
pub struct LemmaCheck {
    pub name: &'static str,
    pub statement: &'static str,
    /// Why the hypothesis fails, if it does; the check is then not judged.
    pub precondition_failure: Option<String>,
    pub lhs: f64,
    pub rhs: f64,
    /// Monte Carlo allowance (4 standard errors; zero when enumerated).
    pub slack: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub passed: Option<bool>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub method: PopulationMethod,
    pub gamma: f64,
    pub abs_moment_3: f64,
    pub x_l3_cubed: f64,
    pub x_sup_norm: f64,
    pub checks: Vec<LemmaCheck>,
}

impl LemmaReport {
    /// True when every check whose hypotheses hold has passed.
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed != Some(false))
    }
}

/// Evaluates, for the sign link,
///
/// * `|⟨v_x, x⟩ - √(2/π)| ≤ γ_a ‖x‖₃³`,
/// * `‖v_x‖₂ ≤ 1`, and `‖v_x‖₂ ≥ 1/2` when `‖x‖₃³ ≤ c₁/γ_a`,
/// * `‖v_x‖_∞ ≤ 2E|a|³‖x‖_∞` when `‖x‖_∞ ≤ 1/2` and the law is symmetric.
///
/// Discrete laws small enough to enumerate are evaluated exactly; otherwise
/// `v_x` comes from `n` Monte Carlo draws and a check fails only beyond 4
/// standard errors.
pub fn v_x_lemma_checks(dist: &StandardizedDistribution, x: &[f64], n: usize, seed: u64) -> Result<LemmaReport> {
    let model = SensingModel::new(dist.clone(), LinkFunction::Sign, x.to_vec(), Channel::Exact)?;
    let g = gamma(dist)?;
    let m3 = abs_moment(dist, 3.0)?;
    let (inf, l3) = (sup_norm(x), l3_cubed(x));

    let (method, v, inner_se, norm_se, coord_se) = match population_exact(&model)? {
        Some(s) => (s.method, s.v_x, 0.0, 0.0, vec![0.0; x.len()]),
        None => {
            check_mc_size(n)?;
            let est = mc_estimate(&model, n, seed);
            let s = est.summary;
            (s.method, s.v_x, s.lambda_stderr, est.norm_stderr, s.v_x_stderr)
        }
    };
    const ROUNDING: f64 = 1e-12;
    let judge = |name, statement, failure: Option<String>, lhs: f64, rhs: f64, se: f64| {
        let slack = 4.0 * se + ROUNDING;
        LemmaCheck {
            name,
            statement,
            passed: failure.is_none().then_some(lhs <= rhs + slack),
            precondition_failure: failure,
            lhs,
            rhs,
            slack,
            margin: rhs - lhs,
        }
    };
    let norm = l2(&v);
    let (arg, vinf) = v
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |(bi, bv), (i, c)| if c.abs() > bv { (i, c.abs()) } else { (bi, bv) });

    let lower_failure =
        (l3 * g > SIGN_C1).then(|| format!("‖x‖₃³ = {l3} exceeds c₁/γ_a = {}", SIGN_C1 / g));
    let sup_failure = if inf > 0.5 {
        Some(format!("‖x‖_∞ = {inf} exceeds 1/2"))
    } else if !dist.is_symmetric() {
        Some(format!("{} is not symmetric", dist.spec().name()))
    } else {
        None
    };
    let checks = vec![
        judge(
            "inner_product",
            "|⟨v_x, x⟩ - √(2/π)| ≤ γ_a ‖x‖₃³",
            None,
            (dot(&v, x) - SQRT_2_OVER_PI).abs(),
            g * l3,
            inner_se,
        ),
        judge("norm_upper", "‖v_x‖₂ ≤ 1", None, norm, 1.0, norm_se),
        judge("norm_lower", "1/2 ≤ ‖v_x‖₂", lower_failure, 0.5, norm, norm_se),
        judge("sup_norm", "‖v_x‖_∞ ≤ 2 E|a|³ ‖x‖_∞", sup_failure, vinf, 2.0 * m3 * inf, coord_se[arg]),
    ];
    Ok(LemmaReport { method, gamma: g, abs_moment_3: m3, x_l3_cubed: l3, x_sup_norm: inf, checks })
}
