//! Piecewise-linear densities.
//!
//! The law is the linear interpolant of `(x[i], p[i])`, so its CDF is
//! piecewise quadratic and its first two partial moments are exact under a
//! two-point Gauss rule on each cell.

use crate::error::{Error, Result};
use crate::quad::gauss_legendre5;

const GL2: f64 = 0.577_350_269_189_625_8;

#[derive(Debug, Clone)]
pub struct Tabulated {
    x: Vec<f64>,
    p: Vec<f64>,
    /// `cum[k][i] = ∫_{x[0]}^{x[i]} t^k p(t) dt` for `k = 0, 1, 2`.
    cum: [Vec<f64>; 3],
    symmetric: bool,
    interval: bool,
}

/// `∫_lo^hi t^k p(t) dt` for `p` linear through `(x0, p0)` with slope `s`.
fn cell_moment(k: i32, x0: f64, p0: f64, s: f64, lo: f64, hi: f64) -> f64 {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    let f = |t: f64| t.powi(k) * (p0 + s * (t - x0));
    h * (f(c - h * GL2) + f(c + h * GL2))
}

impl Tabulated {
    /// Builds the law, renormalizes to unit mass and rescales to mean zero,
    /// variance one.
    pub fn standardized(grid: &[f64], pdf: &[f64]) -> Result<Self> {
        if grid.len() < 2 || grid.len() != pdf.len() {
            return Err(Error::spec(
                "tabulated law needs matching grid and pdf with at least two points",
            ));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) || grid.iter().any(|x| !x.is_finite()) {
            return Err(Error::spec("tabulated grid must be finite and strictly increasing"));
        }
        if pdf.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::spec("tabulated pdf values must be finite and nonnegative"));
        }
        let raw = Self::build(grid.to_vec(), pdf.to_vec());
        let mass = raw.total(0);
        if !(mass > 0.0) {
            return Err(Error::Degenerate("tabulated pdf has zero mass".into()));
        }
        let mean = raw.total(1) / mass;
        let var = raw.total(2) / mass - mean * mean;
        if !(var > 1e-300) {
            return Err(Error::Degenerate("tabulated law has zero variance".into()));
        }
        let sd = var.sqrt();
        let x: Vec<f64> = grid.iter().map(|g| (g - mean) / sd).collect();
        let p: Vec<f64> = pdf.iter().map(|v| v * sd / mass).collect();
        let out = Self::build(x, p);
        // Second pass removes the rounding left by the first.
        let m0 = out.total(0);
        let m1 = out.total(1) / m0;
        let v1 = out.total(2) / m0 - m1 * m1;
        let s1 = v1.sqrt();
        let x: Vec<f64> = out.x.iter().map(|g| (g - m1) / s1).collect();
        let p: Vec<f64> = out.p.iter().map(|v| v * s1 / m0).collect();
        Ok(Self::build(x, p))
    }

    fn build(x: Vec<f64>, p: Vec<f64>) -> Self {
        let n = x.len();
        let mut cum = [vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        for i in 0..n - 1 {
            let s = (p[i + 1] - p[i]) / (x[i + 1] - x[i]);
            for (k, c) in cum.iter_mut().enumerate() {
                c[i + 1] = c[i] + cell_moment(k as i32, x[i], p[i], s, x[i], x[i + 1]);
            }
        }
        let symmetric = {
            let scale = p.iter().cloned().fold(0.0, f64::max);
            x.iter()
                .zip(x.iter().rev())
                .all(|(a, b)| (a + b).abs() <= 1e-9 * (1.0 + a.abs()))
                && p.iter()
                    .zip(p.iter().rev())
                    .all(|(a, b)| (a - b).abs() <= 1e-9 * scale)
        };
        let interval = n <= 2 || p[1..n - 1].iter().all(|v| *v > 0.0);
        Tabulated { x, p, cum, symmetric, interval }
    }

    fn total(&self, k: usize) -> f64 {
        *self.cum[k].last().expect("nonempty")
    }

    pub fn grid(&self) -> &[f64] {
        &self.x
    }

    pub fn lo(&self) -> f64 {
        self.x[0]
    }

    pub fn hi(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    /// Whether the density is positive throughout the open hull of the grid.
    pub fn positive_on_interval(&self) -> bool {
        self.interval
    }

    /// Index `i` of the cell `[x[i], x[i+1]]` containing `y` (clamped).
    fn cell(&self, y: f64) -> usize {
        let i = self.x.partition_point(|v| *v <= y);
        i.saturating_sub(1).min(self.x.len() - 2)
    }

    fn slope(&self, i: usize) -> f64 {
        (self.p[i + 1] - self.p[i]) / (self.x[i + 1] - self.x[i])
    }

    pub fn density(&self, y: f64) -> f64 {
        if y < self.lo() || y > self.hi() {
            return 0.0;
        }
        let i = self.cell(y);
        self.p[i] + self.slope(i) * (y - self.x[i])
    }

    /// `E[a^k 1(a ≤ y)]` for `k = 0, 1, 2`.
    pub fn partial_moments(&self, y: f64) -> [f64; 3] {
        if y < self.lo() {
            return [0.0; 3];
        }
        if y >= self.hi() {
            return [self.total(0), self.total(1), self.total(2)];
        }
        let i = self.cell(y);
        let s = self.slope(i);
        let mut out = [0.0; 3];
        for (k, o) in out.iter_mut().enumerate() {
            *o = self.cum[k][i] + cell_moment(k as i32, self.x[i], self.p[i], s, self.x[i], y);
        }
        out
    }

    pub fn cdf(&self, y: f64) -> f64 {
        self.partial_moments(y)[0].clamp(0.0, 1.0)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        let c0 = &self.cum[0];
        if u <= 0.0 {
            // Left end of the support of the law.
            let first = self.p.iter().position(|v| *v > 0.0).unwrap_or(0);
            return self.x[first.saturating_sub(1)];
        }
        if u >= self.total(0) {
            let last = self.p.iter().rposition(|v| *v > 0.0).unwrap_or(self.x.len() - 1);
            return self.x[(last + 1).min(self.x.len() - 1)];
        }
        let i = c0.partition_point(|v| *v < u).saturating_sub(1).min(self.x.len() - 2);
        let r = u - c0[i];
        let h = self.x[i + 1] - self.x[i];
        let pa = self.p[i];
        let k = self.slope(i);
        // Solve pa·s + k s²/2 = r in the rationalized form.
        let disc = (pa * pa + 2.0 * k * r).max(0.0);
        let denom = pa + disc.sqrt();
        let s = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
        self.x[i] + s.clamp(0.0, h)
    }

    /// `E|a|^k / M^k` with `M = max |x|`, returned with `ln M`.
    pub fn scaled_abs_moment(&self, k: f64) -> (f64, f64) {
        let m = self.lo().abs().max(self.hi().abs());
        let mut total = 0.0;
        for i in 0..self.x.len() - 1 {
            let (a, b) = (self.x[i], self.x[i + 1]);
            let s = self.slope(i);
            let f = |t: f64| (t.abs() / m).powf(k) * (self.p[i] + s * (t - a));
            total += if a < 0.0 && b > 0.0 {
                gauss_legendre5(f, a, 0.0) + gauss_legendre5(f, 0.0, b)
            } else {
                gauss_legendre5(f, a, b)
            };
        }
        (total, m.ln())
    }

    /// `E f(a)`, splitting cells at the supplied nonsmooth points of `f`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F, breaks: &[f64]) -> f64 {
        let mut total = 0.0;
        for i in 0..self.x.len() - 1 {
            let (a, b) = (self.x[i], self.x[i + 1]);
            if self.p[i] == 0.0 && self.p[i + 1] == 0.0 {
                continue;
            }
            let s = self.slope(i);
            let g = |t: f64| f(t) * (self.p[i] + s * (t - a));
            let mut lo = a;
            for &br in breaks.iter().filter(|v| **v > a && **v < b) {
                total += gauss_legendre5(g, lo, br);
                lo = br;
            }
            total += gauss_legendre5(g, lo, b);
        }
        total
    }
}
