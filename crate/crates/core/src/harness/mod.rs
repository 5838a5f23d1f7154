//! Reproducible sweeps comparing recovery errors with the error bound
//! `2α + C₀(‖a‖²_ψ₂ + ‖y‖²_ψ₂)(ω + u)/√m`.
//!
//! Every random quantity is drawn from a seed derived from the base seed:
//! trial `(m, ε, k)` uses `derive_seed([base_seed, m, ε bits, k])`. Rows are
//! returned in `(m, ε, trial)` order, so the output is the same for any
//! thread count.

mod config;
mod output;

pub use config::{ConstraintSpec, ExperimentConfig, ModelConfig, XSpec};
pub use output::{
    bound_report, fit_rate, plot_series, read_rows, write_plot_data, write_rows, BoundReport, NormalizedReport,
    PlotPoint, RateFit, Stats, CSV_HEADER,
};

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::contamination::{contaminated_alpha_bounds, contaminated_law, ContaminationModel};
use crate::distributions::{default_psi_grid, empirical_psi_norm, make_distribution, psi_norm, StandardizedDistribution};
use crate::error::{Error, Result};
use crate::geometry::{min_samples, width_for_constraint, WidthEstimate};
use crate::link_model::{
    alpha_bound_c2, alpha_bound_lipschitz, alpha_bound_sign, alpha_of, population_exact, PopulationMethod,
    SensingModel,
};
use crate::recovery::{estimate, generate, recovery_error, ConstraintSet};
use crate::rng::{self, derive_seed};

pub const SUMMARY_SCHEMA: &str = "ssns-1";

const TAG_POPULATION: u64 = 0x706f_7075;
const TAG_PSI_Y: u64 = 0x7073_6979;
const TAG_WIDTH: u64 = 0x7769_6474;
const PSI_Y_SAMPLES: usize = 200_000;

/// One recovery trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRow {
    pub m: usize,
    pub eps: f64,
    pub trial: usize,
    pub seed: u64,
    pub err_scaled: f64,
    /// Absent when `λ ≤ 0`.
    pub err_normalized: Option<f64>,
    pub lambda: f64,
    /// `α` of the cell: exact when available, otherwise Monte Carlo.
    pub alpha_mc: f64,
    /// Smallest applicable closed-form bound on `α`.
    pub alpha_bound: Option<f64>,
    pub width_mean: f64,
    pub psi2_a: f64,
    pub psi2_y: f64,
    pub u: f64,
    pub c0: f64,
    pub bound_value: f64,
    pub runtime_ms: f64,
}

/// `2α + C₀(ψa² + ψy²)(ω + u)/√m`.
pub fn bound_value(alpha: f64, c0: f64, psi2_a: f64, psi2_y: f64, width: f64, u: f64, m: usize) -> f64 {
    2.0 * alpha + rate_term(c0, psi2_a, psi2_y, width, u, m)
}

pub(crate) fn rate_term(c0: f64, psi2_a: f64, psi2_y: f64, width: f64, u: f64, m: usize) -> f64 {
    c0 * (psi2_a * psi2_a + psi2_y * psi2_y) * (width + u) / (m as f64).sqrt()
}

impl TrialRow {
    /// Recomputes the bound from the other columns.
    pub fn recomputed_bound(&self) -> f64 {
        bound_value(self.alpha_mc, self.c0, self.psi2_a, self.psi2_y, self.width_mean, self.u, self.m)
    }
}

/// Population quantities shared by all trials at one ε.
#[derive(Debug, Clone, Serialize)]
pub struct EpsCell {
    pub eps: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub alpha_stderr: f64,
    pub alpha_method: PopulationMethod,
    pub alpha_bound: Option<f64>,
    pub psi2_a: f64,
    pub psi2_y: f64,
    pub constraint: ConstraintSet,
    pub notes: Vec<String>,
    #[serde(skip)]
    model: Option<SensingModel>,
}

/// Per-`(m, ε)` summary.
#[derive(Debug, Clone, Serialize)]
pub struct CellSummary {
    pub m: usize,
    pub eps: f64,
    pub n_trials: usize,
    pub lambda: f64,
    pub alpha: f64,
    pub alpha_stderr: f64,
    pub alpha_method: PopulationMethod,
    pub alpha_bound: Option<f64>,
    pub err_scaled: Stats,
    pub err_normalized: Option<Stats>,
    pub report: BoundReport,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub schema: &'static str,
    pub config: ExperimentConfig,
    pub width: WidthEstimate,
    pub min_samples: u64,
    pub cells: Vec<CellSummary>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub rows: Vec<TrialRow>,
    pub summary: SweepSummary,
}

impl SweepOutput {
    /// True when some cell recorded a failed hypothesis: an inadmissible
    /// sample size or a bound whose preconditions do not hold.
    pub fn has_precondition_failures(&self) -> bool {
        self.summary.cells.iter().any(|c| c.report.inadmissible || !c.notes.is_empty())
    }
}

/// Runs the sweep on a pool of `threads` workers (`None`: one per core).
pub fn run_sweep(config: &ExperimentConfig, threads: Option<usize>) -> Result<SweepOutput> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Error::spec(format!("cannot build thread pool: {e}")))?;
    pool.install(|| run_sweep_inner(config))
}

fn cell_law(config: &ExperimentConfig, eps: f64) -> Result<StandardizedDistribution> {
    match config.contamination {
        Some(mode) => contaminated_law(&ContaminationModel::new(mode, eps, config.model.dist.clone())),
        None => make_distribution(&config.model.dist),
    }
}

fn eps_cell(config: &ExperimentConfig, x: &[f64], eps: f64) -> Result<EpsCell> {
    let law = cell_law(config, eps)?;
    let model = SensingModel::new(law.clone(), config.model.link, x.to_vec(), config.model.channel)?;
    let mut notes = Vec::new();
    let pop = match population_exact(&model)? {
        Some(p) => p,
        None => alpha_of(&model, config.mc_samples, derive_seed(&[config.base_seed, TAG_POPULATION, eps.to_bits()]))?,
    };
    let alpha_bound = cell_alpha_bound(config, &law, x, eps, &mut notes)?;

    let grid = default_psi_grid();
    let psi_a = psi_norm(&law, 2.0, &grid)?;
    if psi_a.at_grid_end {
        notes.push(format!("psi2_a maximized at the grid end p={}; grid value is a lower estimate", psi_a.argmax_p));
    }
    let ys = sample_y(&model, PSI_Y_SAMPLES.min(config.mc_samples), derive_seed(&[config.base_seed, TAG_PSI_Y, eps.to_bits()]));
    let psi_y = empirical_psi_norm(&ys, 2.0, &grid)?;
    if psi_y.at_grid_end {
        notes.push(format!("psi2_y maximized at the grid end p={}; grid value is a lower estimate", psi_y.argmax_p));
    }
    let constraint = config.constraint.resolve(x, pop.lambda)?;
    Ok(EpsCell {
        eps,
        lambda: pop.lambda,
        alpha: pop.alpha,
        alpha_stderr: pop.mc_stderr,
        alpha_method: pop.method,
        alpha_bound,
        psi2_a: psi_a.value,
        psi2_y: psi_y.value,
        constraint,
        notes,
        model: Some(model),
    })
}

fn cell_alpha_bound(
    config: &ExperimentConfig,
    law: &StandardizedDistribution,
    x: &[f64],
    eps: f64,
    notes: &mut Vec<String>,
) -> Result<Option<f64>> {
    let link = config.model.link;
    let mut found = Vec::new();
    if let Some(mode) = config.contamination {
        let set = contaminated_alpha_bounds(&ContaminationModel::new(mode, eps, config.model.dist.clone()), &link, x)?;
        notes.extend(set.notes);
        found.extend([set.lipschitz, set.c2, set.sign].into_iter().flatten());
    } else {
        let mut attempt = |r: Result<f64>, label: &str| -> Result<()> {
            match r {
                Ok(v) => found.push(v),
                Err(e @ (Error::Precondition(_) | Error::Unavailable(_))) => notes.push(format!("{label}: {e}")),
                Err(e) => return Err(e),
            }
            Ok(())
        };
        if link.lipschitz_const().is_some() {
            attempt(alpha_bound_lipschitz(law, &link), "Lipschitz")?;
        }
        if link.second_deriv_bound().is_some() {
            attempt(alpha_bound_c2(law, &link), "C2")?;
        }
        if link.is_sign() {
            attempt(alpha_bound_sign(law, x), "Sign")?;
        }
    }
    Ok(found.into_iter().reduce(f64::min))
}

fn sample_y(model: &SensingModel, n: usize, seed: u64) -> Vec<f64> {
    let d = model.dim();
    rng::batches(n)
        .collect::<Vec<_>>()
        .into_par_iter()
        .flat_map_iter(|(stream, len)| {
            let mut r = rng::stream(seed, stream);
            let mut row = vec![0.0; d];
            (0..len).map(|_| model.draw_row(&mut r, &mut row)).collect::<Vec<_>>()
        })
        .collect()
}

fn run_sweep_inner(config: &ExperimentConfig) -> Result<SweepOutput> {
    let x = config.model.x.build()?;
    let cells: Vec<EpsCell> = config.eps_grid.iter().map(|&e| eps_cell(config, &x, e)).collect::<Result<_>>()?;
    // The width does not depend on the radius, only on the shape of K.
    let width = width_for_constraint(
        &cells[0].constraint,
        config.width_samples,
        derive_seed(&[config.base_seed, TAG_WIDTH]),
    )?;
    log::debug!("{}: width {:.4} ± {:.4}", width.set_descriptor, width.mean, width.stderr);
    for cell in &cells {
        log::debug!("eps={}: λ = {}, α = {} ({:?})", cell.eps, cell.lambda, cell.alpha, cell.alpha_method);
    }

    let mut jobs = Vec::new();
    for &m in &config.m_grid {
        for ci in 0..cells.len() {
            for trial in 0..config.n_trials {
                jobs.push((m, ci, trial));
            }
        }
    }
    let mut rows: Vec<TrialRow> = jobs
        .into_par_iter()
        .map(|(m, ci, trial)| run_trial(config, &cells[ci], &width, m, trial))
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.m.cmp(&b.m).then(a.eps.total_cmp(&b.eps)).then(a.trial.cmp(&b.trial)));

    let needed = min_samples(&width);
    let mut summaries = Vec::new();
    for &m in &config.m_grid {
        let mut by_eps: Vec<&EpsCell> = cells.iter().collect();
        by_eps.sort_by(|a, b| a.eps.total_cmp(&b.eps));
        for cell in by_eps {
            let cell_rows: Vec<TrialRow> = rows.iter().filter(|r| r.m == m && r.eps == cell.eps).cloned().collect();
            let report = bound_report(&cell_rows)?;
            let err_normalized = if cell.lambda > 0.0 {
                Some(Stats::of(&cell_rows.iter().filter_map(|r| r.err_normalized).collect::<Vec<_>>()))
            } else {
                None
            };
            summaries.push(CellSummary {
                m,
                eps: cell.eps,
                n_trials: cell_rows.len(),
                lambda: cell.lambda,
                alpha: cell.alpha,
                alpha_stderr: cell.alpha_stderr,
                alpha_method: cell.alpha_method,
                alpha_bound: cell.alpha_bound,
                err_scaled: Stats::of(&cell_rows.iter().map(|r| r.err_scaled).collect::<Vec<_>>()),
                err_normalized,
                report,
                notes: cell.notes.clone(),
            });
        }
    }
    Ok(SweepOutput {
        rows,
        summary: SweepSummary {
            schema: SUMMARY_SCHEMA,
            config: config.clone(),
            width,
            min_samples: needed,
            cells: summaries,
        },
    })
}

fn run_trial(config: &ExperimentConfig, cell: &EpsCell, width: &WidthEstimate, m: usize, trial: usize) -> Result<TrialRow> {
    let start = Instant::now();
    let model = cell.model.as_ref().expect("cell model");
    let seed = derive_seed(&[config.base_seed, m as u64, cell.eps.to_bits(), trial as u64]);
    let ds = generate(model, m, seed)?;
    let x_hat = estimate(&ds, &cell.constraint)?;
    let err = recovery_error(&x_hat, model, cell.lambda)?;
    let runtime_ms = if config.record_runtime { start.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    Ok(TrialRow {
        m,
        eps: cell.eps,
        trial,
        seed,
        err_scaled: err.err_scaled,
        err_normalized: err.err_normalized,
        lambda: cell.lambda,
        alpha_mc: cell.alpha,
        alpha_bound: cell.alpha_bound,
        width_mean: width.mean,
        psi2_a: cell.psi2_a,
        psi2_y: cell.psi2_y,
        u: config.u,
        c0: config.c0,
        bound_value: bound_value(cell.alpha, config.c0, cell.psi2_a, cell.psi2_y, width.mean, config.u, m),
        runtime_ms,
    })
}

/// Writes `trials.csv`, `summary.json` and `plot_data.csv` into `dir`.
pub fn write_outputs(out: &SweepOutput, dir: &std::path::Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_rows(&out.rows, std::fs::File::create(dir.join("trials.csv"))?)?;
    let summary = serde_json::to_string_pretty(&out.summary)?;
    std::fs::write(dir.join("summary.json"), summary + "\n")?;
    write_plot_data(&plot_series(&out.rows), std::fs::File::create(dir.join("plot_data.csv"))?)?;
    Ok(())
}
