//! Standardized (mean zero, variance one) sensing laws.

mod moments;
mod spec;
mod tabulated;

pub use moments::{
    abs_moment, default_psi_grid, empirical_psi_norm, log_grid, moment_report, psi_norm, MomentReport,
    PsiNorm,
};
pub use spec::DistributionSpec;
pub use tabulated::Tabulated;

use rand::distr::Open01;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use statrs::function::gamma::ln_gamma;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::contamination;
use crate::error::{Error, Result};
use crate::quad;
use crate::rng;
use crate::special::{normal_cdf, normal_pdf, normal_quantile};

/// Half-width of the standardized uniform law.
pub const UNIFORM_HALF_WIDTH: f64 = 1.732_050_807_568_877_2;
/// Scale of the standardized Laplace law.
pub const LAPLACE_SCALE: f64 = FRAC_1_SQRT_2;

/// Effective support used for quadrature over the real line.
const GAUSS_REACH: f64 = 40.0;
const LAPLACE_REACH: f64 = 60.0;

/// Identifies the representation behind a [`StandardizedDistribution`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Gaussian,
    Rademacher,
    Uniform,
    Laplace,
    ScaledBernoulli,
    TwoPoint,
    Tabulated,
    Mixture,
}

/// Finite-atom law with atoms sorted ascending.
#[derive(Debug, Clone)]
pub struct Discrete {
    x: Vec<f64>,
    w: Vec<f64>,
    cum: Vec<f64>,
}

impl Discrete {
    fn new(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let x: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        let w: Vec<f64> = atoms.iter().map(|a| a.1).collect();
        let mut acc = 0.0;
        let cum = w
            .iter()
            .map(|v| {
                acc += v;
                acc
            })
            .collect();
        Discrete { x, w, cum }
    }

    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.x.iter().copied().zip(self.w.iter().copied())
    }

    fn quantile(&self, u: f64) -> f64 {
        let i = self.cum.partition_point(|c| *c < u).min(self.x.len() - 1);
        self.x[i]
    }
}

/// `(1 - eps)·N(0,1) + eps·component`.
#[derive(Debug, Clone)]
pub struct Mixture {
    pub eps: f64,
    pub component: StandardizedDistribution,
}

#[derive(Debug, Clone)]
enum Repr {
    Gaussian,
    Uniform,
    Laplace,
    Discrete(Discrete),
    Tabulated(Tabulated),
    Mixture(Box<Mixture>),
}

/// A mean-zero, variance-one law with exact-where-possible CDF, quantile,
/// density and partial moments.
///
/// Values are immutable after construction.
#[derive(Debug, Clone)]
pub struct StandardizedDistribution {
    spec: DistributionSpec,
    kind: Kind,
    repr: Repr,
}

/// Builds a standardized law from its specification.
pub fn make_distribution(spec: &DistributionSpec) -> Result<StandardizedDistribution> {
    StandardizedDistribution::new(spec)
}

/// Draws `n` i.i.d. values; a pure function of `(dist, n, seed)`.
pub fn sample(dist: &StandardizedDistribution, n: usize, seed: u64) -> Vec<f64> {
    let mut r = rng::stream(seed, 0);
    (0..n).map(|_| dist.draw(&mut r)).collect()
}

/// Common interface of the one-dimensional laws compared by the discrepancy
/// measures: a standardized law and its zero-bias transform.
pub trait Law {
    fn cdf(&self, y: f64) -> f64;
    /// Density of the absolutely continuous part (zero if purely atomic).
    fn ac_density(&self, y: f64) -> f64;
    /// Point masses `(location, weight)`.
    fn atoms(&self) -> Vec<(f64, f64)>;
    /// Sorted support endpoints plus points where the density or CDF is
    /// not smooth.
    fn breakpoints(&self) -> Vec<f64>;
}

impl StandardizedDistribution {
    pub fn new(spec: &DistributionSpec) -> Result<Self> {
        let (kind, repr) = match spec {
            DistributionSpec::Gaussian {} => (Kind::Gaussian, Repr::Gaussian),
            DistributionSpec::Uniform {} => (Kind::Uniform, Repr::Uniform),
            DistributionSpec::Laplace {} => (Kind::Laplace, Repr::Laplace),
            DistributionSpec::Rademacher {} => (
                Kind::Rademacher,
                Repr::Discrete(Discrete::new(vec![(-1.0, 0.5), (1.0, 0.5)])),
            ),
            DistributionSpec::ScaledBernoulli { p } => {
                let p = *p;
                if !(p > 0.0 && p < 1.0) {
                    return Err(Error::Degenerate(format!(
                        "scaled_bernoulli needs p in (0,1), got {p}"
                    )));
                }
                let q = 1.0 - p;
                let atoms = vec![(-(p / q).sqrt(), q), ((q / p).sqrt(), p)];
                (Kind::ScaledBernoulli, Repr::Discrete(Discrete::new(atoms)))
            }
            DistributionSpec::TwoPoint { w } => {
                let w = *w;
                if !(w > 0.0 && w.is_finite()) {
                    return Err(Error::Degenerate(format!(
                        "two_point needs a positive finite right atom, got {w}"
                    )));
                }
                let atoms = vec![(-1.0 / w.sqrt(), w / (1.0 + w)), (w.sqrt(), 1.0 / (1.0 + w))];
                (Kind::TwoPoint, Repr::Discrete(Discrete::new(atoms)))
            }
            DistributionSpec::Tabulated { grid, pdf } => (
                Kind::Tabulated,
                Repr::Tabulated(Tabulated::standardized(grid, pdf)?),
            ),
            DistributionSpec::Contaminated(model) => {
                let law = contamination::contaminated_law(model)?;
                return Ok(StandardizedDistribution { spec: spec.clone(), ..law });
            }
        };
        let out = StandardizedDistribution { spec: spec.clone(), kind, repr };
        out.check_standardized()?;
        Ok(out)
    }

    pub fn gaussian() -> Self {
        Self::new(&DistributionSpec::gaussian()).expect("gaussian")
    }

    pub fn rademacher() -> Self {
        Self::new(&DistributionSpec::rademacher()).expect("rademacher")
    }

    pub fn uniform() -> Self {
        Self::new(&DistributionSpec::uniform()).expect("uniform")
    }

    pub fn laplace() -> Self {
        Self::new(&DistributionSpec::laplace()).expect("laplace")
    }

    /// Wraps an already standardized tabulated law.
    pub(crate) fn from_tabulated(spec: DistributionSpec, t: Tabulated) -> Self {
        StandardizedDistribution { spec, kind: Kind::Tabulated, repr: Repr::Tabulated(t) }
    }

    /// `(1 - eps)·N(0,1) + eps·component`; requires `0 < eps < 1`.
    pub(crate) fn mixture(spec: DistributionSpec, eps: f64, component: Self) -> Self {
        StandardizedDistribution {
            spec,
            kind: Kind::Mixture,
            repr: Repr::Mixture(Box::new(Mixture { eps, component })),
        }
    }

    pub(crate) fn respec(self, spec: DistributionSpec) -> Self {
        StandardizedDistribution { spec, ..self }
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    pub fn is_gaussian(&self) -> bool {
        matches!(self.repr, Repr::Gaussian)
    }

    pub fn as_mixture(&self) -> Option<&Mixture> {
        match &self.repr {
            Repr::Mixture(m) => Some(m),
            _ => None,
        }
    }

    pub fn as_discrete(&self) -> Option<&Discrete> {
        match &self.repr {
            Repr::Discrete(d) => Some(d),
            _ => None,
        }
    }

    /// Effective support `(lo, hi)`; unbounded kinds report the truncation
    /// used for numerics, beyond which the mass is below `1e-300`.
    pub fn support(&self) -> (f64, f64) {
        match &self.repr {
            Repr::Gaussian => (-GAUSS_REACH, GAUSS_REACH),
            Repr::Uniform => (-UNIFORM_HALF_WIDTH, UNIFORM_HALF_WIDTH),
            Repr::Laplace => (-LAPLACE_REACH, LAPLACE_REACH),
            Repr::Discrete(d) => (d.x[0], d.x[d.x.len() - 1]),
            Repr::Tabulated(t) => (t.lo(), t.hi()),
            Repr::Mixture(m) => {
                let (lo, hi) = m.component.support();
                (lo.min(-GAUSS_REACH), hi.max(GAUSS_REACH))
            }
        }
    }

    /// Whether the support is bounded, as a real property of the law.
    pub fn bounded_support(&self) -> Option<f64> {
        match &self.repr {
            Repr::Uniform | Repr::Discrete(_) | Repr::Tabulated(_) => {
                let (lo, hi) = self.support();
                Some(lo.abs().max(hi.abs()))
            }
            _ => None,
        }
    }

    pub fn is_symmetric(&self) -> bool {
        match &self.repr {
            Repr::Gaussian | Repr::Uniform | Repr::Laplace => true,
            Repr::Discrete(d) => {
                let n = d.x.len();
                (0..n).all(|i| {
                    (d.x[i] + d.x[n - 1 - i]).abs() <= 1e-12 && (d.w[i] - d.w[n - 1 - i]).abs() <= 1e-12
                })
            }
            Repr::Tabulated(t) => t.is_symmetric(),
            Repr::Mixture(m) => m.component.is_symmetric(),
        }
    }

    /// True when the law has a density (no atoms).
    pub fn has_density(&self) -> bool {
        match &self.repr {
            Repr::Discrete(_) => false,
            Repr::Mixture(m) => m.component.has_density(),
            _ => true,
        }
    }

    /// True when the law has a density that is positive on an interval and
    /// zero outside it, the setting in which a Stein coefficient exists.
    pub fn has_density_on_interval(&self) -> bool {
        match &self.repr {
            Repr::Discrete(_) => false,
            Repr::Tabulated(t) => t.positive_on_interval(),
            Repr::Mixture(m) => m.component.has_density(),
            _ => true,
        }
    }

    /// Density, or `None` for laws with atoms.
    pub fn density(&self, y: f64) -> Option<f64> {
        self.has_density().then(|| self.ac_density(y))
    }

    /// `[P(a ≤ y), E[a 1(a ≤ y)], E[a² 1(a ≤ y)]]`.
    pub fn partial_moments(&self, y: f64) -> [f64; 3] {
        match &self.repr {
            Repr::Gaussian => Self::gaussian_partial(y),
            Repr::Uniform => {
                let b = UNIFORM_HALF_WIDTH;
                let y = y.clamp(-b, b);
                [(y + b) / (2.0 * b), (y * y - b * b) / (4.0 * b), (y * y * y + b * b * b) / (6.0 * b)]
            }
            Repr::Laplace => {
                let beta = LAPLACE_SCALE;
                if y.is_infinite() {
                    return if y > 0.0 { [1.0, 0.0, 1.0] } else { [0.0; 3] };
                }
                if y < 0.0 {
                    let e = 0.5 * (y / beta).exp();
                    [e, e * (y - beta), e * (y * y - 2.0 * beta * y + 2.0 * beta * beta)]
                } else {
                    let e = 0.5 * (-y / beta).exp();
                    [
                        1.0 - e,
                        -e * (y + beta),
                        1.0 - e * (y * y + 2.0 * beta * y + 2.0 * beta * beta),
                    ]
                }
            }
            Repr::Discrete(d) => {
                let mut out = [0.0; 3];
                for (x, w) in d.atoms().take_while(|(x, _)| *x <= y) {
                    out[0] += w;
                    out[1] += w * x;
                    out[2] += w * x * x;
                }
                out
            }
            Repr::Tabulated(t) => t.partial_moments(y),
            Repr::Mixture(m) => {
                let g = Self::gaussian_partial(y);
                let c = m.component.partial_moments(y);
                std::array::from_fn(|k| (1.0 - m.eps) * g[k] + m.eps * c[k])
            }
        }
    }

    fn gaussian_partial(y: f64) -> [f64; 3] {
        let cdf = normal_cdf(y);
        let pdf = normal_pdf(y);
        [cdf, -pdf, cdf - if pdf == 0.0 { 0.0 } else { y * pdf }]
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.partial_moments(y)[0].clamp(0.0, 1.0)
    }

    /// Generalized inverse `inf{y : F(y) ≥ u}`.
    pub fn quantile(&self, u: f64) -> f64 {
        let b = UNIFORM_HALF_WIDTH;
        match &self.repr {
            Repr::Gaussian => normal_quantile(u),
            Repr::Uniform => (-b + 2.0 * b * u).clamp(-b, b),
            Repr::Laplace => {
                if u < 0.5 {
                    LAPLACE_SCALE * (2.0 * u).ln()
                } else {
                    -LAPLACE_SCALE * (2.0 * (1.0 - u)).ln()
                }
            }
            Repr::Discrete(d) => d.quantile(u),
            Repr::Tabulated(t) => t.quantile(u),
            Repr::Mixture(_) => {
                let (lo, hi) = self.support();
                bisect_quantile(|y| self.cdf(y), u, lo, hi)
            }
        }
    }

    /// Draws one value.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.repr {
            Repr::Gaussian => rng.sample(StandardNormal),
            Repr::Uniform => {
                let u: f64 = rng.random();
                UNIFORM_HALF_WIDTH * (2.0 * u - 1.0)
            }
            Repr::Laplace => {
                let u: f64 = rng.sample(Open01);
                self.quantile(u)
            }
            Repr::Discrete(d) => {
                if d.x.len() == 2 {
                    let u: f64 = rng.random();
                    if u < d.w[0] {
                        d.x[0]
                    } else {
                        d.x[1]
                    }
                } else {
                    d.quantile(rng.random())
                }
            }
            Repr::Tabulated(t) => t.quantile(rng.sample(Open01)),
            Repr::Mixture(m) => {
                let u: f64 = rng.random();
                if u < m.eps {
                    m.component.draw(rng)
                } else {
                    rng.sample(StandardNormal)
                }
            }
        }
    }

    /// `E f(a)`; `breaks` lists points where `f` is not smooth.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> Result<f64> {
        self.expect_dyn(&f, breaks)
    }

    fn expect_dyn(&self, f: &dyn Fn(f64) -> f64, breaks: &[f64]) -> Result<f64> {
        const TOL: f64 = 1e-12;
        match &self.repr {
            Repr::Discrete(d) => Ok(d.atoms().map(|(x, w)| w * f(x)).sum()),
            Repr::Tabulated(t) => Ok(t.expect(f, breaks)),
            Repr::Mixture(m) => {
                let g = Self::gaussian_expect(f, breaks, TOL)?;
                let c = m.component.expect_dyn(f, breaks)?;
                Ok((1.0 - m.eps) * g + m.eps * c)
            }
            Repr::Gaussian => Self::gaussian_expect(f, breaks, TOL),
            Repr::Uniform | Repr::Laplace => {
                let (lo, hi) = self.support();
                let pts = quad::breakpoints(lo, hi, self.smooth_breaks().into_iter().chain(breaks.iter().copied()));
                quad::integrate(|y| f(y) * self.ac_density(y), &pts, TOL)
            }
        }
    }

    fn gaussian_expect(f: &dyn Fn(f64) -> f64, breaks: &[f64], tol: f64) -> Result<f64> {
        let pts = quad::breakpoints(
            -GAUSS_REACH,
            GAUSS_REACH,
            [-10.0, -4.0, 0.0, 4.0, 10.0].into_iter().chain(breaks.iter().copied()),
        );
        quad::integrate(|y| f(y) * normal_pdf(y), &pts, tol)
    }

    fn smooth_breaks(&self) -> Vec<f64> {
        match &self.repr {
            Repr::Gaussian => vec![-10.0, -4.0, 0.0, 4.0, 10.0],
            Repr::Uniform => vec![0.0],
            Repr::Laplace => vec![-20.0, -5.0, 0.0, 5.0, 20.0],
            Repr::Discrete(d) => d.x.clone(),
            Repr::Tabulated(t) => {
                let g = t.grid();
                let step = (g.len() / 64).max(1);
                g.iter().step_by(step).copied().chain([0.0]).collect()
            }
            Repr::Mixture(m) => {
                let mut v = m.component.smooth_breaks();
                v.extend([-10.0, -4.0, 0.0, 4.0, 10.0]);
                v
            }
        }
    }

    /// `ln E|a|^k` for `k > 0`, computed without overflow.
    pub fn ln_abs_moment(&self, k: f64) -> Result<f64> {
        if !(k > 0.0 && k.is_finite()) {
            return Err(Error::spec(format!("moment order must be positive and finite, got {k}")));
        }
        Ok(match &self.repr {
            Repr::Gaussian => 0.5 * k * 2f64.ln() + ln_gamma(0.5 * (k + 1.0)) - 0.5 * PI.ln(),
            Repr::Uniform => k * UNIFORM_HALF_WIDTH.ln() - (k + 1.0).ln(),
            Repr::Laplace => ln_gamma(k + 1.0) + k * LAPLACE_SCALE.ln(),
            Repr::Discrete(d) => log_sum_exp(
                d.atoms()
                    .filter(|(x, w)| *x != 0.0 && *w > 0.0)
                    .map(|(x, w)| w.ln() + k * x.abs().ln()),
            ),
            Repr::Tabulated(t) => {
                let (scaled, ln_m) = t.scaled_abs_moment(k);
                scaled.ln() + k * ln_m
            }
            Repr::Mixture(m) => {
                let g = StandardizedDistribution::gaussian().ln_abs_moment(k)?;
                let c = m.component.ln_abs_moment(k)?;
                log_sum_exp([(1.0 - m.eps).ln() + g, m.eps.ln() + c].into_iter())
            }
        })
    }

    /// Mean and variance recomputed from the representation.
    pub fn mean_variance(&self) -> (f64, f64) {
        let [_, m1, m2] = self.partial_moments(f64::INFINITY);
        (m1, m2 - m1 * m1)
    }

    fn check_standardized(&self) -> Result<()> {
        let (mean, var) = self.mean_variance();
        if mean.abs() > 1e-10 || (var - 1.0).abs() > 1e-10 {
            return Err(Error::Degenerate(format!(
                "{} is not standardized: mean {mean:e}, variance {var}",
                self.spec.name()
            )));
        }
        Ok(())
    }
}

impl Law for StandardizedDistribution {
    fn cdf(&self, y: f64) -> f64 {
        StandardizedDistribution::cdf(self, y)
    }

    fn ac_density(&self, y: f64) -> f64 {
        match &self.repr {
            Repr::Gaussian => normal_pdf(y),
            Repr::Uniform => {
                if y.abs() <= UNIFORM_HALF_WIDTH {
                    0.5 / UNIFORM_HALF_WIDTH
                } else {
                    0.0
                }
            }
            Repr::Laplace => FRAC_1_SQRT_2 * (-std::f64::consts::SQRT_2 * y.abs()).exp(),
            Repr::Discrete(_) => 0.0,
            Repr::Tabulated(t) => t.density(y),
            Repr::Mixture(m) => (1.0 - m.eps) * normal_pdf(y) + m.eps * m.component.ac_density(y),
        }
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        match &self.repr {
            Repr::Discrete(d) => d.atoms().collect(),
            Repr::Mixture(m) => m.component.atoms().into_iter().map(|(x, w)| (x, m.eps * w)).collect(),
            _ => Vec::new(),
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        quad::breakpoints(lo, hi, self.smooth_breaks())
    }
}

/// Bisection for the generalized inverse of a nondecreasing `cdf` on `[lo, hi]`.
pub(crate) fn bisect_quantile<F: Fn(f64) -> f64>(cdf: F, u: f64, mut lo: f64, mut hi: f64) -> f64 {
    if u <= cdf(lo) {
        return lo;
    }
    if u > cdf(hi) {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 1e-13 * (1.0 + mid.abs()) {
            break;
        }
        if cdf(mid) >= u {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

pub(crate) fn log_sum_exp(it: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = it.collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
