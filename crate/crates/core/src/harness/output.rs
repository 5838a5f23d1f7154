use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::Serialize;

use super::{rate_term, TrialRow};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 16] = [
    "m",
    "eps",
    "trial",
    "seed",
    "err_scaled",
    "err_normalized",
    "lambda",
    "alpha_mc",
    "alpha_bound",
    "width_mean",
    "psi2_a",
    "psi2_y",
    "u",
    "c0",
    "bound_value",
    "runtime_ms",
];

/// 17 significant digits, enough to round-trip any `f64`.
fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Writes rows as CSV with the fixed [`CSV_HEADER`]. Absent values are
/// empty fields.
pub fn write_rows<W: Write>(rows: &[TrialRow], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(CSV_HEADER)?;
    for r in rows {
        out.write_record([
            r.m.to_string(),
            fmt(r.eps),
            r.trial.to_string(),
            r.seed.to_string(),
            fmt(r.err_scaled),
            fmt_opt(r.err_normalized),
            fmt(r.lambda),
            fmt(r.alpha_mc),
            fmt_opt(r.alpha_bound),
            fmt(r.width_mean),
            fmt(r.psi2_a),
            fmt(r.psi2_y),
            fmt(r.u),
            fmt(r.c0),
            fmt(r.bound_value),
            fmt(r.runtime_ms),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_rows<R: Read>(r: R) -> Result<Vec<TrialRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != CSV_HEADER {
        return Err(Error::spec(format!("unexpected CSV header: {}", header.join(","))));
    }
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let bad = |col: &str| Error::spec(format!("row {}: bad value in column {col}", line + 1));
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad(CSV_HEADER[i]));
        let opt = |i: usize| if rec[i].is_empty() { Ok(None) } else { f(i).map(Some) };
        let int = |i: usize| rec[i].parse::<u64>().map_err(|_| bad(CSV_HEADER[i]));
        rows.push(TrialRow {
            m: int(0)? as usize,
            eps: f(1)?,
            trial: int(2)? as usize,
            seed: int(3)?,
            err_scaled: f(4)?,
            err_normalized: opt(5)?,
            lambda: f(6)?,
            alpha_mc: f(7)?,
            alpha_bound: opt(8)?,
            width_mean: f(9)?,
            psi2_a: f(10)?,
            psi2_y: f(11)?,
            u: f(12)?,
            c0: f(13)?,
            bound_value: f(14)?,
            runtime_ms: f(15)?,
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub stderr: f64,
    pub q05: f64,
    pub q50: f64,
    pub q95: f64,
}

impl Stats {
    pub fn of(v: &[f64]) -> Stats {
        let n = v.len();
        if n == 0 {
            return Stats { n, mean: f64::NAN, sd: f64::NAN, stderr: f64::NAN, q05: f64::NAN, q50: f64::NAN, q95: f64::NAN };
        }
        let nf = n as f64;
        let mean = v.iter().sum::<f64>() / nf;
        let sd = if n > 1 { (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0)).sqrt() } else { 0.0 };
        let mut s = v.to_vec();
        s.sort_by(f64::total_cmp);
        // Linear interpolation between order statistics.
        let q = |p: f64| {
            let h = p * (nf - 1.0);
            let lo = h.floor() as usize;
            let hi = (lo + 1).min(n - 1);
            s[lo] + (h - lo as f64) * (s[hi] - s[lo])
        };
        Stats { n, mean, sd, stderr: sd / nf.sqrt(), q05: q(0.05), q50: q(0.5), q95: q(0.95) }
    }
}

/// The normalized-estimator comparison `‖x̄ - x‖ ≤ 4α/λ + 2·rate/λ`.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizedReport {
    pub bound: f64,
    pub violations: usize,
    pub calibrated_c0: f64,
}

/// Empirical errors of one `(m, ε)` cell against the bound.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub m: usize,
    pub eps: f64,
    pub n_trials: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub bound_value: f64,
    /// The `C₀` term alone; equals `bound_value` when `α = 0`.
    pub rate_term: f64,
    pub violations: usize,
    pub violation_fraction: f64,
    /// `4e^{-u}`, the largest violation probability the bound allows.
    pub allowed_fraction: f64,
    /// `n·4e^{-u}` plus four binomial standard deviations.
    pub allowed_violations: f64,
    pub within_allowance: bool,
    /// Smallest `C₀` for which every trial satisfies the bound.
    pub calibrated_c0: f64,
    /// `m < ⌈ω²⌉`: the sample-size hypothesis fails.
    pub inadmissible: bool,
    pub normalized: Option<NormalizedReport>,
    /// Why the normalized comparison is missing.
    pub normalized_note: Option<String>,
}

/// Compares the trials of one cell with the bound. All rows must share
/// `m` and `ε`.
pub fn bound_report(rows: &[TrialRow]) -> Result<BoundReport> {
    let first = rows.first().ok_or_else(|| Error::spec("bound_report needs at least one row"))?;
    if rows.iter().any(|r| r.m != first.m || r.eps != first.eps) {
        return Err(Error::spec("bound_report rows must come from one (m, eps) cell"));
    }
    let (m, alpha, lambda, u) = (first.m, first.alpha_mc, first.lambda, first.u);
    let unit_rate = rate_term(1.0, first.psi2_a, first.psi2_y, first.width_mean, u, m);
    let n = rows.len();
    let violations = rows.iter().filter(|r| r.err_scaled > r.bound_value).count();
    let p = (4.0 * (-u).exp()).min(1.0);
    let allowed = n as f64 * p + 4.0 * (n as f64 * p * (1.0 - p)).sqrt();
    let calibrated_c0 = rows.iter().map(|r| ((r.err_scaled - 2.0 * alpha) / unit_rate).max(0.0)).fold(0.0, f64::max);
    let (normalized, normalized_note) = if lambda > 0.0 {
        let bound = 4.0 * alpha / lambda + 2.0 * first.c0 * unit_rate / lambda;
        let errs: Vec<f64> = rows.iter().filter_map(|r| r.err_normalized).collect();
        let calibrated = errs
            .iter()
            .map(|e| ((e - 4.0 * alpha / lambda) * lambda / (2.0 * unit_rate)).max(0.0))
            .fold(0.0, f64::max);
        (
            Some(NormalizedReport { bound, violations: errs.iter().filter(|e| **e > bound).count(), calibrated_c0: calibrated }),
            None,
        )
    } else {
        (None, Some(format!("N/A: λ = {lambda} is not positive")))
    };
    Ok(BoundReport {
        m,
        eps: first.eps,
        n_trials: n,
        alpha,
        lambda,
        bound_value: first.bound_value,
        rate_term: first.c0 * unit_rate,
        violations,
        violation_fraction: violations as f64 / n as f64,
        allowed_fraction: p,
        allowed_violations: allowed,
        within_allowance: violations as f64 <= allowed,
        calibrated_c0,
        inadmissible: (m as f64) < (first.width_mean.max(0.0).powi(2)).ceil(),
        normalized,
        normalized_note,
    })
}

/// Least-squares slope of `log(mean err_scaled - 2α)` against `log m`.
#[derive(Debug, Clone, Serialize)]
pub struct RateFit {
    pub group: String,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub points: usize,
    /// Points left out because the residual was not positive.
    pub skipped: Vec<String>,
    /// Set when no slope could be fitted.
    pub reason: Option<String>,
}

/// Fits one rate per group. Every group needs at least four distinct `m`.
pub fn fit_rate<K: Fn(&TrialRow) -> String>(rows: &[TrialRow], key: K) -> Result<Vec<RateFit>> {
    let mut groups: BTreeMap<String, BTreeMap<usize, (f64, f64, usize)>> = BTreeMap::new();
    for r in rows {
        let e = groups.entry(key(r)).or_default().entry(r.m).or_insert((0.0, 0.0, 0));
        e.0 += r.err_scaled;
        e.1 += r.alpha_mc;
        e.2 += 1;
    }
    let mut out = Vec::new();
    for (group, by_m) in groups {
        if by_m.len() < 4 {
            return Err(Error::spec(format!("group {group} has {} distinct m values; at least 4 are needed", by_m.len())));
        }
        let mut pts = Vec::new();
        let mut skipped = Vec::new();
        for (m, (err, alpha, n)) in by_m {
            let resid = err / n as f64 - 2.0 * alpha / n as f64;
            if resid > 0.0 {
                pts.push(((m as f64).ln(), resid.ln()));
            } else {
                skipped.push(format!("m={m}: mean error minus 2α is {resid:e}"));
            }
        }
        let fit = (pts.len() >= 2).then(|| least_squares(&pts));
        out.push(RateFit {
            group,
            slope: fit.map(|f| f.0),
            intercept: fit.map(|f| f.1),
            points: pts.len(),
            reason: fit.is_none().then(|| "fewer than two points with positive residual".to_string()),
            skipped,
        });
    }
    Ok(out)
}

fn least_squares(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// One `(x, y, stderr)` point of a plotted series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlotPoint {
    pub series: String,
    pub x: f64,
    pub y: f64,
    pub stderr: f64,
}

/// Series of mean errors and bounds against `m`, one set per ε.
pub fn plot_series(rows: &[TrialRow]) -> Vec<PlotPoint> {
    let mut cells: BTreeMap<(u64, usize), Vec<&TrialRow>> = BTreeMap::new();
    for r in rows {
        cells.entry((r.eps.to_bits(), r.m)).or_default().push(r);
    }
    let mut out = Vec::new();
    for ((eps_bits, m), rs) in cells {
        let eps = f64::from_bits(eps_bits);
        let scaled = Stats::of(&rs.iter().map(|r| r.err_scaled).collect::<Vec<_>>());
        out.push(PlotPoint { series: format!("err_scaled eps={eps}"), x: m as f64, y: scaled.mean, stderr: scaled.stderr });
        let norm: Vec<f64> = rs.iter().filter_map(|r| r.err_normalized).collect();
        if !norm.is_empty() {
            let s = Stats::of(&norm);
            out.push(PlotPoint { series: format!("err_normalized eps={eps}"), x: m as f64, y: s.mean, stderr: s.stderr });
        }
        out.push(PlotPoint { series: format!("bound eps={eps}"), x: m as f64, y: rs[0].bound_value, stderr: 0.0 });
    }
    out.sort_by(|a, b| a.series.cmp(&b.series).then(a.x.total_cmp(&b.x)));
    out
}

pub fn write_plot_data<W: Write>(points: &[PlotPoint], w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["series", "x", "y", "stderr"])?;
    for p in points {
        out.write_record([p.series.clone(), fmt(p.x), fmt(p.y), fmt(p.stderr)])?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(m: usize, eps: f64, trial: usize, err: f64, alpha: f64) -> TrialRow {
        let mut r = TrialRow {
            m,
            eps,
            trial,
            seed: 42 + trial as u64,
            err_scaled: err,
            err_normalized: Some(err / 2.0),
            lambda: 0.8,
            alpha_mc: alpha,
            alpha_bound: None,
            width_mean: 3.0,
            psi2_a: 1.0,
            psi2_y: 1.0,
            u: 2.0,
            c0: 1.0,
            bound_value: 0.0,
            runtime_ms: 0.0,
        };
        r.bound_value = r.recomputed_bound();
        r
    }

    #[test]
    fn csv_round_trip_is_lossless() {
        let mut rows = vec![row(64, 0.1, 0, 0.1 + 0.2, 1.0 / 3.0), row(128, 1.0, 1, std::f64::consts::PI, 0.0)];
        rows[1].err_normalized = None;
        rows[1].alpha_bound = Some(f64::MIN_POSITIVE);
        rows[0].runtime_ms = 1e300;
        let mut buf = Vec::new();
        write_rows(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(&CSV_HEADER.join(",")));
        let back = read_rows(&buf[..]).unwrap();
        assert_eq!(back, rows);
        let mut again = Vec::new();
        write_rows(&back, &mut again).unwrap();
        assert_eq!(again, buf);
    }

    #[test]
    fn bad_header_is_rejected() {
        assert!(read_rows("a,b\n1,2\n".as_bytes()).is_err());
    }

    #[test]
    fn constant_error_has_zero_slope() {
        let rows: Vec<TrialRow> = [256, 512, 1024, 2048, 4096].iter().map(|&m| row(m, 1.0, 0, 0.25, 0.0)).collect();
        let fits = fit_rate(&rows, |_| "all".into()).unwrap();
        assert_eq!(fits.len(), 1);
        assert!(fits[0].slope.unwrap().abs() < 1e-6);
    }

    #[test]
    fn exact_power_law_slope() {
        let rows: Vec<TrialRow> =
            [256, 512, 1024, 2048].iter().map(|&m| row(m, 1.0, 0, 0.2 + 3.0 / (m as f64).sqrt(), 0.1)).collect();
        let fits = fit_rate(&rows, |_| "g".into()).unwrap();
        assert!((fits[0].slope.unwrap() + 0.5).abs() < 1e-10);
    }

    #[test]
    fn groups_are_fitted_separately() {
        let mut rows = Vec::new();
        for &m in &[100, 200, 400, 800] {
            rows.push(row(m, 0.5, 0, 1.0 / m as f64, 0.0));
            rows.push(row(m, 1.0, 0, 0.3, 0.2));
        }
        let fits = fit_rate(&rows, |r| format!("eps={}", r.eps)).unwrap();
        assert_eq!(fits.len(), 2);
        assert!((fits[0].slope.unwrap() + 1.0).abs() < 1e-10);
        assert!(fits[1].slope.is_none() && fits[1].skipped.len() == 4);
    }

    #[test]
    fn too_few_m_values() {
        let rows: Vec<TrialRow> = [1, 2, 3].iter().map(|&m| row(m, 1.0, 0, 0.2, 0.0)).collect();
        assert!(fit_rate(&rows, |_| "g".into()).is_err());
    }

    #[test]
    fn report_counts_and_calibrates() {
        let rows: Vec<TrialRow> = (0..10).map(|t| row(100, 1.0, t, 0.1 * t as f64, 0.0)).collect();
        let rep = bound_report(&rows).unwrap();
        // rate = (1 + 1)(3 + 2)/10 = 1 with C₀ = 1.
        assert!((rep.bound_value - 1.0).abs() < 1e-15);
        assert_eq!(rep.rate_term, rep.bound_value);
        assert_eq!(rep.violations, 0);
        assert!((rep.calibrated_c0 - 0.9).abs() < 1e-12);
        assert!(!rep.inadmissible);
        assert!(rep.normalized.is_some());
        let mut low = rows.clone();
        for r in &mut low {
            r.lambda = -0.1;
        }
        let rep = bound_report(&low).unwrap();
        assert!(rep.normalized.is_none() && rep.normalized_note.as_deref().unwrap().starts_with("N/A"));
        let small: Vec<TrialRow> = (0..3).map(|t| row(8, 1.0, t, 0.1, 0.0)).collect();
        assert!(bound_report(&small).unwrap().inadmissible);
        assert!(bound_report(&[]).is_err());
    }

    #[test]
    fn stats_quantiles() {
        let s = Stats::of(&(0..=100).map(|i| i as f64).collect::<Vec<_>>());
        assert_eq!((s.q05, s.q50, s.q95), (5.0, 50.0, 95.0));
        assert_eq!(s.mean, 50.0);
    }

    #[test]
    fn plot_points_cover_each_series() {
        let rows: Vec<TrialRow> = [64, 128].iter().flat_map(|&m| (0..3).map(move |t| row(m, 1.0, t, 0.5, 0.0))).collect();
        let pts = plot_series(&rows);
        assert_eq!(pts.len(), 6);
        let mut buf = Vec::new();
        write_plot_data(&pts, &mut buf).unwrap();
        assert!(String::from_utf8(buf).unwrap().starts_with("series,x,y,stderr"));
    }
}
