//! ε-contaminated Gaussian sensing laws and the α bounds they inherit.
//!
//! Two models are supported: the additive law `√(1-ε) g + √ε a` and the
//! mixture that draws `a` with probability `ε` and `g` otherwise.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{abs_moment, make_distribution, DistributionSpec, StandardizedDistribution, Tabulated};
use crate::error::{Error, Result};
use crate::link_model::{LinkFunction, SIGN_C1};
use crate::special::{normal_pdf, SQRT_2_OVER_PI};
use crate::zero_bias::{e_one_minus_t, gamma};

/// Half-width of the grid carrying the additive law's density.
pub const CONVOLUTION_HALF_WIDTH: f64 = 12.0;
/// Number of grid points for the additive law's density.
pub const CONVOLUTION_POINTS: usize = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContaminationMode {
    Additive,
    Mixture,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContaminationModel {
    pub mode: ContaminationMode,
    pub eps: f64,
    pub contaminant: Box<DistributionSpec>,
}

impl ContaminationModel {
    pub fn new(mode: ContaminationMode, eps: f64, contaminant: DistributionSpec) -> Self {
        ContaminationModel { mode, eps, contaminant: Box::new(contaminant) }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.eps) {
            return Err(Error::spec(format!("contamination eps must lie in [0, 1], got {}", self.eps)));
        }
        Ok(())
    }
}

/// Builds the contaminated law `g_ε`.
///
/// The additive law is carried as a piecewise-linear density on
/// `[-12, 12]`, tabulated by integrating `φ_σ(y - √ε t)` against the
/// contaminant with `σ² = 1 - ε`, then restandardized. The endpoints
/// `ε = 0` and `ε = 1` return the Gaussian and the contaminant exactly.
pub fn contaminated_law(model: &ContaminationModel) -> Result<StandardizedDistribution> {
    model.validate()?;
    let spec = DistributionSpec::Contaminated(model.clone());
    let contaminant = make_distribution(&model.contaminant)?;
    let eps = model.eps;
    if eps == 0.0 || contaminant.is_gaussian() {
        return Ok(StandardizedDistribution::gaussian().respec(spec));
    }
    if eps == 1.0 {
        return Ok(contaminant.respec(spec));
    }
    match model.mode {
        ContaminationMode::Mixture => Ok(StandardizedDistribution::mixture(spec, eps, contaminant)),
        ContaminationMode::Additive => {
            let (grid, pdf) = additive_density(&contaminant, eps)?;
            let t = Tabulated::standardized(&grid, &pdf)?;
            Ok(StandardizedDistribution::from_tabulated(spec, t))
        }
    }
}

fn additive_density(contaminant: &StandardizedDistribution, eps: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = CONVOLUTION_POINTS;
    let h = 2.0 * CONVOLUTION_HALF_WIDTH / (n - 1) as f64;
    let grid: Vec<f64> = (0..n).map(|i| -CONVOLUTION_HALF_WIDTH + h * i as f64).collect();
    let sigma = (1.0 - eps).sqrt();
    let scale = eps.sqrt();
    let width = sigma / scale;
    let pdf = grid
        .par_iter()
        .map(|&y| {
            let c = y / scale;
            let breaks = [c - 8.0 * width, c - 3.0 * width, c, c + 3.0 * width, c + 8.0 * width];
            contaminant
                .expect(|t| normal_pdf((y - scale * t) / sigma) / sigma, &breaks)
                .map(|v| v.max(0.0))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok((grid, pdf))
}

/// `γ` of the contaminated law.
pub fn contaminated_gamma(model: &ContaminationModel) -> Result<f64> {
    gamma(&contaminated_law(model)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Lipschitz,
    C2,
    Sign,
}

/// Closed-form α bounds for a contaminated sensing law. A bound is `None`
/// when it does not apply to the link or its hypotheses fail; `notes`
/// records why.
#[derive(Debug, Clone, Default, Serialize)]
pub struct BoundSet {
    pub lipschitz: Option<f64>,
    pub c2: Option<f64>,
    pub sign: Option<f64>,
    pub notes: Vec<String>,
}

/// All bounds that apply to `link`.
pub fn contaminated_alpha_bounds(model: &ContaminationModel, link: &LinkFunction, x: &[f64]) -> Result<BoundSet> {
    model.validate()?;
    let mut out = BoundSet::default();
    let kinds = [
        (BoundKind::Lipschitz, link.lipschitz_const().is_some()),
        (BoundKind::C2, link.second_deriv_bound().is_some()),
        (BoundKind::Sign, link.is_sign()),
    ];
    for (kind, applies) in kinds {
        if !applies {
            continue;
        }
        let value = match contaminated_alpha_bound(model, kind, link, x) {
            Ok(v) => Some(v),
            Err(e @ (Error::Precondition(_) | Error::Unavailable(_))) => {
                out.notes.push(format!("{kind:?}: {e}"));
                None
            }
            Err(e) => return Err(e),
        };
        match kind {
            BoundKind::Lipschitz => out.lipschitz = value,
            BoundKind::C2 => out.c2 = value,
            BoundKind::Sign => out.sign = value,
        }
    }
    Ok(out)
}

/// One α bound for the contaminated law:
///
/// * Lipschitz: `L·ε·E|1 - T|`, with `L` the link's Lipschitz constant;
/// * C²: `ε^{3/2}‖θ''‖γ_a` (additive) or `ε‖θ''‖γ_a` (mixture);
/// * sign: the square-root bound with the third absolute moment of the
///   contaminated law bounded through Minkowski's inequality.
///
/// The sign bound requires a symmetric contaminant, `‖x‖_∞ ≤ 1/2` and
/// `‖x‖₃³ ≤ c₁/γ` with `γ` computed for the contaminated law.
pub fn contaminated_alpha_bound(
    model: &ContaminationModel,
    kind: BoundKind,
    link: &LinkFunction,
    x: &[f64],
) -> Result<f64> {
    model.validate()?;
    let eps = model.eps;
    let a = make_distribution(&model.contaminant)?;
    match kind {
        BoundKind::Lipschitz => {
            let l = link
                .lipschitz_const()
                .ok_or_else(|| Error::Unavailable(format!("{} link is not Lipschitz", link.name())))?;
            if eps == 0.0 {
                return Ok(0.0);
            }
            Ok(l * eps * e_one_minus_t(&a)?)
        }
        BoundKind::C2 => {
            let b = link
                .second_deriv_bound()
                .ok_or_else(|| Error::Unavailable(format!("{} link has no second-derivative bound", link.name())))?;
            if eps == 0.0 || b == 0.0 {
                return Ok(0.0);
            }
            let factor = match model.mode {
                ContaminationMode::Additive => eps.powf(1.5),
                ContaminationMode::Mixture => eps,
            };
            Ok(factor * b * gamma(&a)?)
        }
        BoundKind::Sign => {
            if !link.is_sign() {
                return Err(Error::Unavailable(format!("{} link is not the sign function", link.name())));
            }
            if !a.is_symmetric() {
                return Err(Error::precondition(format!("contaminant {} is not symmetric", a.spec().name())));
            }
            let inf = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let l3: f64 = x.iter().map(|v| v.abs().powi(3)).sum();
            if inf > 0.5 {
                return Err(Error::precondition(format!("‖x‖_∞ = {inf} exceeds 1/2")));
            }
            let g_eps = contaminated_gamma(model)?;
            if l3 * g_eps > SIGN_C1 {
                return Err(Error::precondition(format!(
                    "‖x‖₃³ = {l3} exceeds c₁/γ = {} for the contaminated law",
                    SIGN_C1 / g_eps
                )));
            }
            if eps == 0.0 {
                return Ok(0.0);
            }
            let ga = gamma(&a)?;
            let m3 = abs_moment(&a, 3.0)?;
            let g3 = 2.0 * SQRT_2_OVER_PI;
            let inner = match model.mode {
                ContaminationMode::Additive => {
                    eps.powf(1.5) * ga * ((1.0 - eps).sqrt() * g3.cbrt() + eps.sqrt() * m3.cbrt()).powi(3)
                }
                ContaminationMode::Mixture => {
                    eps * ga * (((1.0 - eps) * g3).cbrt() + (eps * m3).cbrt()).powi(3)
                }
            };
            Ok((10.0 * inner * inf).sqrt())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::Law;
    use crate::zero_bias::stein_coefficient;

    fn model(mode: ContaminationMode, eps: f64, spec: DistributionSpec) -> ContaminationModel {
        ContaminationModel::new(mode, eps, spec)
    }

    fn sup_cdf_gap(a: &StandardizedDistribution, b: &StandardizedDistribution) -> f64 {
        (0..=2000).map(|i| -10.0 + 0.01 * i as f64).map(|y| (a.cdf(y) - b.cdf(y)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn endpoints_are_exact() {
        let g = StandardizedDistribution::gaussian();
        let l = StandardizedDistribution::laplace();
        for mode in [ContaminationMode::Additive, ContaminationMode::Mixture] {
            let zero = contaminated_law(&model(mode, 0.0, DistributionSpec::laplace())).unwrap();
            assert!(sup_cdf_gap(&zero, &g) <= 1e-8);
            let one = contaminated_law(&model(mode, 1.0, DistributionSpec::laplace())).unwrap();
            assert!(sup_cdf_gap(&one, &l) <= 1e-8);
        }
        let r = contaminated_law(&model(ContaminationMode::Additive, 1.0, DistributionSpec::rademacher())).unwrap();
        assert!(r.as_discrete().is_some());
    }

    #[test]
    fn mixture_cdf_at_zero() {
        let d = contaminated_law(&model(ContaminationMode::Mixture, 0.3, DistributionSpec::rademacher())).unwrap();
        // 0.7·Φ(0) + 0.3·½.
        assert!((d.cdf(-1e-12) - 0.5).abs() < 1e-10);
    }

    #[test]
    fn bad_eps_is_rejected() {
        assert!(contaminated_law(&model(ContaminationMode::Mixture, 1.5, DistributionSpec::laplace())).is_err());
        assert!(contaminated_law(&model(ContaminationMode::Mixture, f64::NAN, DistributionSpec::laplace())).is_err());
    }

    #[test]
    fn contaminated_laws_are_standardized() {
        for mode in [ContaminationMode::Additive, ContaminationMode::Mixture] {
            for eps in [0.1, 0.5, 0.9] {
                for spec in [DistributionSpec::rademacher(), DistributionSpec::laplace(), DistributionSpec::uniform()] {
                    let d = contaminated_law(&model(mode, eps, spec)).unwrap();
                    let (m, v) = d.mean_variance();
                    assert!(m.abs() <= 1e-8 && (v - 1.0).abs() <= 1e-8, "{mode:?} {eps}: {m} {v}");
                }
            }
        }
    }

    #[test]
    fn additive_density_matches_gaussian_mixture_for_rademacher() {
        let eps: f64 = 0.4;
        let d = contaminated_law(&model(ContaminationMode::Additive, eps, DistributionSpec::rademacher())).unwrap();
        let s = (1.0 - eps).sqrt();
        for y in [-2.0, -0.3, 0.0, 0.77, 3.1] {
            let want = 0.5 * (normal_pdf((y - eps.sqrt()) / s) + normal_pdf((y + eps.sqrt()) / s)) / s;
            assert!((d.ac_density(y) - want).abs() < 1e-6, "{y}");
        }
    }

    #[test]
    fn gamma_bounds_for_rademacher() {
        for eps in [0.1, 0.25, 0.5, 1.0] {
            let mix = contaminated_gamma(&model(ContaminationMode::Mixture, eps, DistributionSpec::rademacher())).unwrap();
            assert!(mix <= eps * 0.5 + 1e-6, "mixture {eps}: {mix}");
            let add = contaminated_gamma(&model(ContaminationMode::Additive, eps, DistributionSpec::rademacher())).unwrap();
            assert!(add <= eps.powf(1.5) * 0.5 + 5e-4, "additive {eps}: {add}");
        }
        let zero = contaminated_gamma(&model(ContaminationMode::Additive, 0.0, DistributionSpec::laplace())).unwrap();
        assert!(zero <= 1e-8);
    }

    // Observed behaviour on these laws, not a guaranteed property.
    #[test]
    fn gamma_is_nondecreasing_in_eps() {
        for spec in [DistributionSpec::rademacher(), DistributionSpec::uniform(), DistributionSpec::laplace()] {
            for mode in [ContaminationMode::Additive, ContaminationMode::Mixture] {
                let vals: Vec<f64> = [0.0, 0.25, 0.5, 0.75, 1.0]
                    .iter()
                    .map(|&e| contaminated_gamma(&model(mode, e, spec.clone())).unwrap())
                    .collect();
                assert!(vals.windows(2).all(|w| w[1] >= w[0] - 1e-6), "{mode:?} {spec:?}: {vals:?}");
            }
        }
    }

    #[test]
    fn mixture_stein_coefficient_discrepancy_scales_with_eps() {
        let eps = 0.3;
        let d = contaminated_law(&model(ContaminationMode::Mixture, eps, DistributionSpec::laplace())).unwrap();
        assert!(stein_coefficient(&d).is_some());
        let e = e_one_minus_t(&d).unwrap();
        assert!((e - eps / std::f64::consts::E).abs() <= 1e-6, "{e}");
    }

    #[test]
    fn bounds_at_the_endpoints() {
        let x = vec![0.25; 16];
        let link = LinkFunction::Sign;
        let one = model(ContaminationMode::Additive, 1.0, DistributionSpec::rademacher());
        let b = contaminated_alpha_bound(&one, BoundKind::Sign, &link, &x).unwrap();
        // (10 γ E|a|³ ‖x‖_∞)^{1/2} with γ = 1/2, E|a|³ = 1.
        assert!((b - (10.0f64 * 0.5 * 0.25).sqrt()).abs() < 1e-8, "{b}");
        for mode in [ContaminationMode::Additive, ContaminationMode::Mixture] {
            let zero = model(mode, 0.0, DistributionSpec::laplace());
            for link in [LinkFunction::Tanh, LinkFunction::Sign] {
                let set = contaminated_alpha_bounds(&zero, &link, &x).unwrap();
                for v in [set.lipschitz, set.c2, set.sign].into_iter().flatten() {
                    assert_eq!(v, 0.0);
                }
            }
        }
    }

    #[test]
    fn mixture_lipschitz_bound_for_laplace() {
        let m = model(ContaminationMode::Mixture, 0.25, DistributionSpec::laplace());
        let b = contaminated_alpha_bound(&m, BoundKind::Lipschitz, &LinkFunction::Tanh, &[1.0]).unwrap();
        assert!((b - 0.25 / std::f64::consts::E).abs() < 1e-6);
        let r = model(ContaminationMode::Mixture, 0.25, DistributionSpec::rademacher());
        assert!(contaminated_alpha_bound(&r, BoundKind::Lipschitz, &LinkFunction::Tanh, &[1.0]).is_err());
    }

    #[test]
    fn sign_bound_checks_hypotheses() {
        let m = model(ContaminationMode::Mixture, 0.5, DistributionSpec::rademacher());
        let err = contaminated_alpha_bound(&m, BoundKind::Sign, &LinkFunction::Sign, &[1.0, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
        let skew = model(ContaminationMode::Mixture, 0.5, DistributionSpec::ScaledBernoulli { p: 0.2 });
        let x = vec![0.25; 16];
        assert!(contaminated_alpha_bound(&skew, BoundKind::Sign, &LinkFunction::Sign, &x).is_err());
        let set = contaminated_alpha_bounds(&skew, &LinkFunction::Sign, &x).unwrap();
        assert!(set.sign.is_none() && !set.notes.is_empty());
    }

    #[test]
    fn json_shape() {
        let m = model(ContaminationMode::Additive, 0.5, DistributionSpec::laplace());
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["mode"], "additive");
        assert_eq!(v["contaminant"]["kind"], "laplace");
        let back: ContaminationModel = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }
}
