use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contamination::ContaminationMode;
use crate::distributions::DistributionSpec;
use crate::error::{Error, Result};
use crate::link_model::{l2, Channel, LinkFunction};
use crate::recovery::{Constraint, ConstraintSet};
use crate::rng;

/// The true direction `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum XSpec {
    /// `s` coordinates chosen at random, random signs, magnitudes `1/√s`.
    UnitSparse { s: usize, d: usize, seed: u64 },
    /// Any nonzero vector; rescaled to unit length.
    Explicit { values: Vec<f64> },
}

impl XSpec {
    pub fn build(&self) -> Result<Vec<f64>> {
        match self {
            XSpec::UnitSparse { s, d, seed } => {
                let (s, d) = (*s, *d);
                if s == 0 || s > d {
                    return Err(Error::spec(format!("unit_sparse needs 1 ≤ s ≤ d, got s={s}, d={d}")));
                }
                let mut r = rng::stream(*seed, 0);
                let mut idx: Vec<usize> = (0..d).collect();
                for i in 0..s {
                    let j = r.random_range(i..d);
                    idx.swap(i, j);
                }
                let mag = 1.0 / (s as f64).sqrt();
                let mut x = vec![0.0; d];
                for &i in &idx[..s] {
                    x[i] = if r.random::<bool>() { mag } else { -mag };
                }
                Ok(x)
            }
            XSpec::Explicit { values } => {
                let n = l2(values);
                if !(n > 0.0 && n.is_finite()) {
                    return Err(Error::spec("explicit x must be a nonzero finite vector"));
                }
                Ok(values.iter().map(|v| v / n).collect())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    /// The sensing law, or the contaminant when `contamination` is set.
    pub dist: DistributionSpec,
    pub link: LinkFunction,
    #[serde(default)]
    pub channel: Channel,
    pub x: XSpec,
}

/// The constraint set. Missing parameters are filled from the true
/// signal so that `λx ∈ K`: the support size of `x`, or the radius
/// `|λ|‖x‖₁` (ℓ1) and `|λ|` (ℓ2).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum ConstraintSpec {
    Sparse {
        #[serde(default)]
        s: Option<usize>,
    },
    L1Ball {
        #[serde(default)]
        radius: Option<f64>,
    },
    L2Ball {
        #[serde(default)]
        radius: Option<f64>,
    },
    FullSpace,
}

impl ConstraintSpec {
    pub fn resolve(&self, x: &[f64], lambda: f64) -> Result<ConstraintSet> {
        let d = x.len();
        let auto = |r: Option<f64>, default: f64| {
            let r = r.unwrap_or(default);
            if r > 0.0 {
                Ok(r)
            } else {
                Err(Error::precondition(format!("automatic radius is {r}; λ must be nonzero")))
            }
        };
        let c = match *self {
            ConstraintSpec::Sparse { s } => Constraint::Sparse {
                s: s.unwrap_or_else(|| x.iter().filter(|v| **v != 0.0).count()),
            },
            ConstraintSpec::L1Ball { radius } => Constraint::L1Ball {
                radius: auto(radius, lambda.abs() * x.iter().map(|v| v.abs()).sum::<f64>())?,
            },
            ConstraintSpec::L2Ball { radius } => Constraint::L2Ball { radius: auto(radius, lambda.abs())? },
            ConstraintSpec::FullSpace => Constraint::FullSpace,
        };
        ConstraintSet::new(c, d)
    }
}

fn default_eps_grid() -> Vec<f64> {
    vec![1.0]
}

fn default_u() -> f64 {
    2.0
}

fn default_c0() -> f64 {
    1.0
}

fn default_mc_samples() -> usize {
    200_000
}

fn default_width_samples() -> usize {
    crate::geometry::DEFAULT_WIDTH_SAMPLES
}

/// A sweep over sample sizes and contamination levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    /// When set, each cell uses the ε-contaminated Gaussian with
    /// `model.dist` as the contaminant and ε from `eps_grid`.
    #[serde(default)]
    pub contamination: Option<ContaminationMode>,
    pub constraint: ConstraintSpec,
    pub m_grid: Vec<usize>,
    #[serde(default = "default_eps_grid")]
    pub eps_grid: Vec<f64>,
    pub n_trials: usize,
    pub base_seed: u64,
    #[serde(default = "default_u")]
    pub u: f64,
    #[serde(default = "default_c0")]
    pub c0: f64,
    /// Monte Carlo draws for `α` when no exact route exists, and for the
    /// empirical ψ₂-norm of `y`.
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_width_samples")]
    pub width_samples: usize,
    /// Records wall-clock time per trial. Off by default because timings
    /// make the CSV differ between runs.
    #[serde(default)]
    pub record_runtime: bool,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u >= 2.0 && self.u.is_finite()) {
            return Err(Error::spec(format!("u must be at least 2, got {}", self.u)));
        }
        if !(self.c0 > 0.0 && self.c0.is_finite()) {
            return Err(Error::spec(format!("c0 must be positive, got {}", self.c0)));
        }
        if self.m_grid.is_empty() || self.m_grid[0] == 0 || self.m_grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::spec("m_grid must be nonempty, positive and strictly ascending"));
        }
        if self.n_trials == 0 {
            return Err(Error::spec("n_trials must be at least 1"));
        }
        if self.eps_grid.is_empty() || self.eps_grid.iter().any(|e| !(0.0..=1.0).contains(e)) {
            return Err(Error::spec("eps_grid must be nonempty with values in [0, 1]"));
        }
        if self.contamination.is_none() && self.eps_grid.iter().any(|e| *e != 1.0) {
            return Err(Error::spec("eps_grid other than [1.0] needs a contamination mode"));
        }
        if self.mc_samples < crate::link_model::MIN_MC_SAMPLES {
            return Err(Error::spec(format!(
                "mc_samples must be at least {}",
                crate::link_model::MIN_MC_SAMPLES
            )));
        }
        if self.width_samples < 2 {
            return Err(Error::spec("width_samples must be at least 2"));
        }
        self.model.x.build()?;
        Ok(())
    }
}
