//! Adaptive Gauss–Kronrod quadrature and fixed Gauss–Legendre rules.
//!
//! Integrals are taken over a sequence of breakpoints; each segment is
//! refined independently by bisecting the subinterval with the largest
//! error estimate until the summed estimate drops below the tolerance.

use crate::error::{Error, Result};

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

// Gauss weights for the 10-point rule embedded at odd Kronrod indices.
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

const MAX_SUBDIVISIONS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Piece {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn gk21<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Piece {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    for (j, (&x, &w)) in XGK[..10].iter().zip(&WGK[..10]).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Piece { lo, hi, value, error }
}

/// Integrates `f` over `[points[0], points[last]]`, splitting at every
/// interior point. Nonsmooth locations of `f` should appear in `points`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, points: &[f64], abs_tol: f64) -> Result<f64> {
    if points.len() < 2 {
        return Ok(0.0);
    }
    let mut pieces: Vec<Piece> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gk21(&f, w[0], w[1]))
        .collect();
    let mut iterations = 0;
    loop {
        let total_err: f64 = pieces.iter().map(|p| p.error).sum();
        if total_err <= abs_tol {
            break;
        }
        let (worst, _) = pieces
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("nonempty");
        let p = pieces[worst];
        let mid = 0.5 * (p.lo + p.hi);
        if iterations >= MAX_SUBDIVISIONS || mid <= p.lo || mid >= p.hi {
            if total_err <= abs_tol.max(1e-7) {
                break;
            }
            return Err(Error::Quadrature(format!(
                "error estimate {total_err:e} above tolerance {abs_tol:e} on [{}, {}]",
                points[0],
                points[points.len() - 1]
            )));
        }
        pieces[worst] = gk21(&f, p.lo, mid);
        pieces.push(gk21(&f, mid, p.hi));
        iterations += 1;
    }
    // Sum small pieces first for a slightly better rounding profile.
    let mut values: Vec<f64> = pieces.iter().map(|p| p.value).collect();
    values.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
    Ok(values.iter().sum())
}

/// Sorts, deduplicates and clips breakpoints to `[lo, hi]`, keeping both ends.
pub fn breakpoints(lo: f64, hi: f64, interior: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = interior
        .into_iter()
        .filter(|x| x.is_finite() && *x > lo && *x < hi)
        .collect();
    pts.push(lo);
    pts.push(hi);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

/// Five-point Gauss–Legendre nodes and weights on `[-1, 1]`.
pub const GL5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Fixed five-point Gauss–Legendre rule on `[lo, hi]`; exact for degree ≤ 9.
pub fn gauss_legendre5<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let c = 0.5 * (lo + hi);
    let h = 0.5 * (hi - lo);
    GL5.iter().map(|&(x, w)| w * f(c + h * x)).sum::<f64>() * h
}
