//! Data generation, the empirical loss and the constrained least-squares
//! estimator.
//!
//! Since `L_m(t) = ‖t‖² - 2⟨v̂, t⟩ = ‖t - v̂‖² - ‖v̂‖²` with
//! `v̂ = (1/m) Σ yᵢ aᵢ`, minimizing the loss over `K` is the Euclidean
//! projection of `v̂` onto `K`.

use std::io::{Read, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::link_model::{dot, l2, SensingModel};
use crate::rng;

/// The shape of a constraint set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum Constraint {
    /// Vectors with at most `s` nonzero entries.
    Sparse { s: usize },
    L1Ball { radius: f64 },
    L2Ball { radius: f64 },
    FullSpace,
}

/// A closed set `K ⊆ ℝ^d` with an exact Euclidean projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub constraint: Constraint,
    pub dim: usize,
}

impl ConstraintSet {
    pub fn new(constraint: Constraint, dim: usize) -> Result<Self> {
        match constraint {
            Constraint::Sparse { s } if s == 0 || s > dim => {
                return Err(Error::spec(format!("sparsity must lie in [1, {dim}], got {s}")));
            }
            Constraint::L1Ball { radius } | Constraint::L2Ball { radius } if !(radius > 0.0 && radius.is_finite()) => {
                return Err(Error::spec(format!("ball radius must be positive and finite, got {radius}")));
            }
            _ => {}
        }
        if dim == 0 {
            return Err(Error::spec("constraint dimension must be positive"));
        }
        Ok(ConstraintSet { constraint, dim })
    }

    pub fn sparse(s: usize, dim: usize) -> Result<Self> {
        Self::new(Constraint::Sparse { s }, dim)
    }

    pub fn l1_ball(radius: f64, dim: usize) -> Result<Self> {
        Self::new(Constraint::L1Ball { radius }, dim)
    }

    pub fn l2_ball(radius: f64, dim: usize) -> Result<Self> {
        Self::new(Constraint::L2Ball { radius }, dim)
    }

    pub fn full_space(dim: usize) -> Self {
        ConstraintSet { constraint: Constraint::FullSpace, dim }
    }

    /// Membership up to `tol`.
    pub fn contains(&self, t: &[f64], tol: f64) -> bool {
        match self.constraint {
            Constraint::Sparse { s } => t.iter().filter(|v| **v != 0.0).count() <= s,
            Constraint::L1Ball { radius } => t.iter().map(|v| v.abs()).sum::<f64>() <= radius + tol,
            Constraint::L2Ball { radius } => l2(t) <= radius + tol,
            Constraint::FullSpace => true,
        }
    }
}

/// Euclidean projection of `v` onto `k`.
///
/// Sparse sets keep the `s` largest magnitudes, ties going to the lowest
/// index. The ℓ1 ball uses the sort-based soft-threshold pivot.
pub fn project(v: &[f64], k: &ConstraintSet) -> Result<Vec<f64>> {
    check_dim(k.dim, v.len())?;
    Ok(match k.constraint {
        Constraint::FullSpace => v.to_vec(),
        Constraint::L2Ball { radius } => {
            let n = l2(v);
            if n <= radius {
                v.to_vec()
            } else {
                v.iter().map(|c| c * radius / n).collect()
            }
        }
        Constraint::Sparse { s } => {
            let mut idx: Vec<usize> = (0..v.len()).collect();
            idx.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j)));
            let mut out = vec![0.0; v.len()];
            for &i in &idx[..s] {
                out[i] = v[i];
            }
            out
        }
        Constraint::L1Ball { radius } => project_l1(v, radius),
    })
}

fn project_l1(v: &[f64], radius: f64) -> Vec<f64> {
    if v.iter().map(|c| c.abs()).sum::<f64>() <= radius {
        return v.to_vec();
    }
    let mut u: Vec<f64> = v.iter().map(|c| c.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut tau = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cum += uj;
        let t = (cum - radius) / (j + 1) as f64;
        if uj > t {
            tau = t;
        } else {
            break;
        }
    }
    v.iter().map(|c| c.signum() * (c.abs() - tau).max(0.0)).collect()
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// `x/‖x‖₂`, or the zero vector for zero input.
pub fn normalize(x: &[f64]) -> Vec<f64> {
    let n = l2(x);
    if n == 0.0 {
        vec![0.0; x.len()]
    } else {
        x.iter().map(|c| c / n).collect()
    }
}

/// `m` i.i.d. pairs `(yᵢ, aᵢ)`; `a` is row-major `m × d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub y: Vec<f64>,
    pub a: Vec<f64>,
    pub m: usize,
    pub d: usize,
    pub model_fingerprint: u64,
    pub seed: u64,
}

const MAGIC: &[u8; 5] = b"SSNS1";

impl Dataset {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.d..(i + 1) * self.d]
    }

    /// `v̂ = (1/m) Σ yᵢ aᵢ`.
    pub fn v_hat(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.d];
        for i in 0..self.m {
            let y = self.y[i];
            for (vj, aj) in v.iter_mut().zip(self.row(i)) {
                *vj += y * aj;
            }
        }
        let m = self.m as f64;
        v.iter().map(|c| c / m).collect()
    }

    /// Binary layout, all little-endian: the magic `SSNS1`, `d: u32`,
    /// `m: u32`, `seed: u64`, `model_fingerprint: u64`, then `A` row-major
    /// and `y` as `f64`.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        let (d, m) = (dim_u32(self.d)?, dim_u32(self.m)?);
        w.write_all(MAGIC)?;
        w.write_all(&d.to_le_bytes())?;
        w.write_all(&m.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        w.write_all(&self.model_fingerprint.to_le_bytes())?;
        for v in self.a.iter().chain(&self.y) {
            w.write_all(&v.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 5];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::spec("not a dataset file (bad magic)"));
        }
        let mut w4 = [0u8; 4];
        let mut w8 = [0u8; 8];
        r.read_exact(&mut w4)?;
        let d = u32::from_le_bytes(w4) as usize;
        r.read_exact(&mut w4)?;
        let m = u32::from_le_bytes(w4) as usize;
        r.read_exact(&mut w8)?;
        let seed = u64::from_le_bytes(w8);
        r.read_exact(&mut w8)?;
        let model_fingerprint = u64::from_le_bytes(w8);
        let mut read_vec = |n: usize| -> Result<Vec<f64>> {
            (0..n)
                .map(|_| {
                    r.read_exact(&mut w8)?;
                    Ok(f64::from_le_bytes(w8))
                })
                .collect()
        };
        let a = read_vec(m * d)?;
        let y = read_vec(m)?;
        Ok(Dataset { y, a, m, d, model_fingerprint, seed })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.write_to(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

fn dim_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| Error::spec(format!("size {n} does not fit the file format")))
}

/// Draws `m` pairs. Rows are produced in batches of [`rng::BATCH`], batch
/// `b` from stream `b` of `seed`, so the output does not depend on the
/// thread count.
pub fn generate(model: &SensingModel, m: usize, seed: u64) -> Result<Dataset> {
    if m == 0 {
        return Err(Error::spec("sample size m must be positive"));
    }
    let d = model.dim();
    let parts: Vec<(Vec<f64>, Vec<f64>)> = rng::batches(m)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(stream, len)| {
            let mut r = rng::stream(seed, stream);
            let mut a = vec![0.0; len * d];
            let y = a.chunks_mut(d).map(|row| model.draw_row(&mut r, row)).collect();
            (a, y)
        })
        .collect();
    let mut a = Vec::with_capacity(m * d);
    let mut y = Vec::with_capacity(m);
    for (pa, py) in parts {
        a.extend(pa);
        y.extend(py);
    }
    Ok(Dataset { y, a, m, d, model_fingerprint: model.fingerprint(), seed })
}

/// `L_m(t) = ‖t‖² - (2/m) Σ yᵢ⟨aᵢ, t⟩`.
pub fn empirical_loss(ds: &Dataset, t: &[f64]) -> Result<f64> {
    check_dim(ds.d, t.len())?;
    let s: f64 = (0..ds.m).map(|i| ds.y[i] * dot(ds.row(i), t)).sum();
    Ok(dot(t, t) - 2.0 * s / ds.m as f64)
}

/// `argmin_{t ∈ K} L_m(t)`, computed as the projection of `v̂`.
pub fn estimate(ds: &Dataset, k: &ConstraintSet) -> Result<Vec<f64>> {
    check_dim(k.dim, ds.d)?;
    project(&ds.v_hat(), k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecoveryError {
    /// `‖x̂ - λx‖₂`.
    pub err_scaled: f64,
    /// `‖x̂/‖x̂‖ - x‖₂`; absent when `λ ≤ 0`.
    pub err_normalized: Option<f64>,
}

pub fn recovery_error(x_hat: &[f64], model: &SensingModel, lambda: f64) -> Result<RecoveryError> {
    let x = model.x();
    check_dim(x.len(), x_hat.len())?;
    let scaled: Vec<f64> = x_hat.iter().zip(x).map(|(a, b)| a - lambda * b).collect();
    let err_normalized = (lambda > 0.0).then(|| {
        let bar = normalize(x_hat);
        l2(&bar.iter().zip(x).map(|(a, b)| a - b).collect::<Vec<_>>())
    });
    Ok(RecoveryError { err_scaled: l2(&scaled), err_normalized })
}
