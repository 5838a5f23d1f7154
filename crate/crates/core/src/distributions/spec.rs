use serde::{Deserialize, Serialize};

use crate::contamination::ContaminationModel;

/// Serializable description of a sensing law.
///
/// The JSON form is `{"kind": "...", "params": {...}}`. Every kind is
/// standardized to mean zero and variance one when built; kinds whose
/// natural parametrization does not have unit variance (`two_point`,
/// `tabulated`) are affinely rescaled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum DistributionSpec {
    Gaussian {},
    Rademacher {},
    /// Uniform on `[-√3, √3]`.
    Uniform {},
    /// Double exponential with density `e^{-√2|y|}/√2`.
    Laplace {},
    /// `(B - p)/√(p(1-p))` for `B ~ Bernoulli(p)`.
    ScaledBernoulli { p: f64 },
    /// Mean-zero two-point law on `{-1, w}`, rescaled to unit variance.
    TwoPoint { w: f64 },
    /// Piecewise-linear density through `(grid[i], pdf[i])`.
    Tabulated { grid: Vec<f64>, pdf: Vec<f64> },
    /// An ε-contaminated standard normal.
    Contaminated(ContaminationModel),
}

impl DistributionSpec {
    pub fn gaussian() -> Self {
        DistributionSpec::Gaussian {}
    }

    pub fn rademacher() -> Self {
        DistributionSpec::Rademacher {}
    }

    pub fn uniform() -> Self {
        DistributionSpec::Uniform {}
    }

    pub fn laplace() -> Self {
        DistributionSpec::Laplace {}
    }

    /// Parses a parameterless kind name such as `"laplace"`.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "gaussian" | "normal" => Some(Self::gaussian()),
            "rademacher" => Some(Self::rademacher()),
            "uniform" => Some(Self::uniform()),
            "laplace" => Some(Self::laplace()),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DistributionSpec::Gaussian {} => "gaussian",
            DistributionSpec::Rademacher {} => "rademacher",
            DistributionSpec::Uniform {} => "uniform",
            DistributionSpec::Laplace {} => "laplace",
            DistributionSpec::ScaledBernoulli { .. } => "scaled_bernoulli",
            DistributionSpec::TwoPoint { .. } => "two_point",
            DistributionSpec::Tabulated { .. } => "tabulated",
            DistributionSpec::Contaminated(_) => "contaminated",
        }
    }
}
