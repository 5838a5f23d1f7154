use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use stein_sense::contamination::{contaminated_law, ContaminationMode, ContaminationModel};
use stein_sense::distributions::{make_distribution, moment_report, DistributionSpec, MomentReport};
use stein_sense::geometry::{
    min_samples, width_descent_cone_sparse_proxy, width_sparse_sphere, DEFAULT_WIDTH_SAMPLES,
};
use stein_sense::harness::{
    bound_report, fit_rate, read_rows, run_sweep, write_outputs, write_rows, BoundReport, ConstraintSpec,
    ExperimentConfig, ModelConfig, RateFit, SUMMARY_SCHEMA,
};
use stein_sense::link_model::{
    alpha_bound_c2, alpha_bound_lipschitz, alpha_bound_sign, alpha_of, population_exact, PopulationSummary,
    SensingModel,
};
use stein_sense::recovery::{estimate, generate, recovery_error, Dataset};
use stein_sense::zero_bias::{discrepancy_report, DiscrepancyReport};
use stein_sense::Error as CoreError;

use crate::{Cli, Command, Failure, Format};

type Outcome = Result<(), Failure>;

const DEFAULT_ALPHA_SAMPLES: usize = 1_000_000;

pub fn run(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Discrepancy { dist } => discrepancy(cli, dist.as_deref()),
        Command::Contaminate => contaminate(cli),
        Command::Alpha => alpha(cli),
        Command::Recover { data } => recover(cli, data.as_deref()),
        Command::Width => width(cli),
        Command::Sweep => sweep(cli),
        Command::Report { input } => report(cli, input),
    }
}

fn read_config<T: for<'de> Deserialize<'de>>(cli: &Cli) -> Result<T, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Config("--config FILE is required".into()))?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

/// Writes `body` to `dir/name` when `--out` is set, otherwise to stdout.
fn emit(cli: &Cli, name: &str, body: &str) -> Outcome {
    match &cli.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(name);
            std::fs::write(&path, body)?;
            log::info!("wrote {}", path.display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(body.as_bytes())?;
        }
    }
    Ok(())
}

fn json<T: Serialize>(v: &T) -> Result<String, Failure> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

fn strict_check(cli: &Cli, problems: &[String]) -> Outcome {
    if cli.strict && !problems.is_empty() {
        return Err(Failure::Precondition(problems.join("; ")));
    }
    Ok(())
}

#[derive(Serialize)]
struct DiscrepancyOutput {
    dist: DistributionSpec,
    discrepancy: DiscrepancyReport,
    moments: MomentReport,
}

fn discrepancy(cli: &Cli, name: Option<&str>) -> Outcome {
    let spec: DistributionSpec = match (name, &cli.config) {
        (Some(n), None) => {
            DistributionSpec::from_name(n).ok_or_else(|| Failure::Config(format!("unknown distribution '{n}'")))?
        }
        (None, Some(_)) => read_config(cli)?,
        (Some(_), Some(_)) => return Err(Failure::Config("give either --dist or --config, not both".into())),
        (None, None) => return Err(Failure::Config("--dist NAME or --config FILE is required".into())),
    };
    let dist = make_distribution(&spec)?;
    let out = DiscrepancyOutput { discrepancy: discrepancy_report(&dist)?, moments: moment_report(&dist)?, dist: spec };
    let body = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json(&out)?,
        Format::Csv => {
            let (r, m) = (&out.discrepancy, &out.moments);
            format!(
                "kind,gamma_a,e_one_minus_t,tv_a_astar,tv_a_g,third_abs_moment,psi2,psi1\n{},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.kind, r.gamma_a, opt(r.e_one_minus_t), r.tv_a_astar, r.tv_a_g, r.third_abs_moment, m.psi2, m.psi1
            )
        }
    };
    emit(cli, "discrepancy.json", &body)
}

#[derive(Serialize)]
struct ContaminateOutput {
    model: ContaminationModel,
    discrepancy: DiscrepancyReport,
    /// `ε^{3/2}γ_c` (additive) or `εγ_c` (mixture), with `γ_c` the
    /// contaminant's γ.
    gamma_bound: f64,
}

fn contaminate(cli: &Cli) -> Outcome {
    let model: ContaminationModel = read_config(cli)?;
    model.validate()?;
    let law = contaminated_law(&model)?;
    let discrepancy = discrepancy_report(&law)?;
    let contaminant = discrepancy_report(&make_distribution(&model.contaminant)?)?;
    let scale = match model.mode {
        ContaminationMode::Additive => model.eps.powf(1.5),
        ContaminationMode::Mixture => model.eps,
    };
    let out = ContaminateOutput { gamma_bound: scale * contaminant.gamma_a, discrepancy, model };
    let body = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json(&out)?,
        Format::Csv => {
            let r = &out.discrepancy;
            format!(
                "mode,eps,gamma,gamma_bound,e_one_minus_t,tv_a_astar,tv_a_g\n{:?},{:.16e},{:.16e},{:.16e},{},{:.16e},{:.16e}\n",
                out.model.mode, out.model.eps, r.gamma_a, out.gamma_bound, opt(r.e_one_minus_t), r.tv_a_astar, r.tv_a_g
            )
            .to_lowercase()
        }
    };
    emit(cli, "contamination.json", &body)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AlphaConfig {
    model: ModelConfig,
    /// Monte Carlo draws when no exact route exists.
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize, Default)]
struct AlphaBounds {
    lipschitz: Option<f64>,
    c2: Option<f64>,
    sign: Option<f64>,
    notes: Vec<String>,
}

#[derive(Serialize)]
struct AlphaOutput {
    population: PopulationSummary,
    bounds: AlphaBounds,
}

fn build_model(cfg: &ModelConfig) -> Result<SensingModel, Failure> {
    let x = cfg.x.build()?;
    Ok(SensingModel::new(make_distribution(&cfg.dist)?, cfg.link, x, cfg.channel)?)
}

fn population(model: &SensingModel, samples: usize, seed: u64) -> Result<PopulationSummary, Failure> {
    Ok(match population_exact(model)? {
        Some(p) => p,
        None => alpha_of(model, samples, seed)?,
    })
}

fn alpha(cli: &Cli) -> Outcome {
    let cfg: AlphaConfig = read_config(cli)?;
    let model = build_model(&cfg.model)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let pop = population(&model, cfg.samples.unwrap_or(DEFAULT_ALPHA_SAMPLES), seed)?;

    let (dist, link) = (model.dist(), model.link());
    let mut bounds = AlphaBounds::default();
    let mut keep = |r: Result<f64, CoreError>, label: &str| -> Result<Option<f64>, Failure> {
        match r {
            Ok(v) => Ok(Some(v)),
            Err(e @ (CoreError::Precondition(_) | CoreError::Unavailable(_))) => {
                bounds.notes.push(format!("{label}: {e}"));
                Ok(None)
            }
            Err(e) => Err(e.into()),
        }
    };
    let lipschitz = if link.lipschitz_const().is_some() { keep(alpha_bound_lipschitz(dist, &link), "lipschitz")? } else { None };
    let c2 = if link.second_deriv_bound().is_some() { keep(alpha_bound_c2(dist, &link), "c2")? } else { None };
    let sign = if link.is_sign() { keep(alpha_bound_sign(dist, model.x()), "sign")? } else { None };
    bounds.lipschitz = lipschitz;
    bounds.c2 = c2;
    bounds.sign = sign;

    let problems = bounds.notes.clone();
    let out = AlphaOutput { population: pop, bounds };
    let body = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json(&out)?,
        Format::Csv => {
            let p = &out.population;
            format!(
                "lambda,alpha,alpha_stderr,method,n_samples,bound_lipschitz,bound_c2,bound_sign\n{:.16e},{:.16e},{:.16e},{},{},{},{},{}\n",
                p.lambda,
                p.alpha,
                p.mc_stderr,
                serde_json::to_value(p.method)?.as_str().unwrap_or_default(),
                p.n_samples,
                opt(out.bounds.lipschitz),
                opt(out.bounds.c2),
                opt(out.bounds.sign)
            )
        }
    };
    emit(cli, "alpha.json", &body)?;
    strict_check(cli, &problems)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RecoverConfig {
    model: ModelConfig,
    constraint: ConstraintSpec,
    m: usize,
    #[serde(default)]
    seed: u64,
    /// Monte Carlo draws for λ when no exact route exists.
    #[serde(default)]
    samples: Option<usize>,
}

#[derive(Serialize)]
struct RecoverOutput {
    m: usize,
    d: usize,
    seed: u64,
    lambda: f64,
    err_scaled: f64,
    err_normalized: Option<f64>,
    x: Vec<f64>,
    x_hat: Vec<f64>,
}

fn recover(cli: &Cli, data: Option<&Path>) -> Outcome {
    let cfg: RecoverConfig = read_config(cli)?;
    let model = build_model(&cfg.model)?;
    let seed = cli.seed.unwrap_or(cfg.seed);
    let ds = match data {
        Some(path) => {
            let ds = Dataset::load(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
            if ds.model_fingerprint != model.fingerprint() {
                return Err(Failure::Config(format!("{} was drawn from a different model", path.display())));
            }
            ds
        }
        None => generate(&model, cfg.m, seed)?,
    };
    let pop = population(&model, cfg.samples.unwrap_or(DEFAULT_ALPHA_SAMPLES), seed)?;
    let k = cfg.constraint.resolve(model.x(), pop.lambda)?;
    let x_hat = estimate(&ds, &k)?;
    let err = recovery_error(&x_hat, &model, pop.lambda)?;
    let out = RecoverOutput {
        m: ds.m,
        d: ds.d,
        seed: ds.seed,
        lambda: pop.lambda,
        err_scaled: err.err_scaled,
        err_normalized: err.err_normalized,
        x: model.x().to_vec(),
        x_hat,
    };
    if let Some(dir) = &cli.out {
        std::fs::create_dir_all(dir)?;
        if data.is_none() {
            ds.save(&dir.join("dataset.bin"))?;
        }
    }
    let (name, body) = match cli.format.unwrap_or(Format::Csv) {
        Format::Json => ("recovery.json", json(&out)?),
        Format::Csv => {
            let mut s = String::from("coord,x,x_hat\n");
            for (i, (a, b)) in out.x.iter().zip(&out.x_hat).enumerate() {
                s.push_str(&format!("{i},{a:.16e},{b:.16e}\n"));
            }
            ("recovery.csv", s)
        }
    };
    log::info!("err_scaled = {:.6}, err_normalized = {}", out.err_scaled, opt(out.err_normalized));
    emit(cli, name, &body)
}

#[derive(Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
enum WidthSet {
    Sphere { d: usize },
    SparseSphere { d: usize, s: usize },
    DescentConeSparse { d: usize, s: usize },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct WidthConfig {
    set: WidthSet,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    seed: u64,
}

#[derive(Serialize)]
struct WidthOutput {
    mean: f64,
    stderr: f64,
    n: usize,
    set: String,
    min_samples: u64,
}

fn width(cli: &Cli) -> Outcome {
    let cfg: WidthConfig = read_config(cli)?;
    let n = cfg.samples.unwrap_or(DEFAULT_WIDTH_SAMPLES);
    let seed = cli.seed.unwrap_or(cfg.seed);
    let w = match cfg.set {
        WidthSet::Sphere { d } => width_sparse_sphere(d, d, n, seed)?,
        WidthSet::SparseSphere { d, s } => width_sparse_sphere(d, s, n, seed)?,
        WidthSet::DescentConeSparse { d, s } => width_descent_cone_sparse_proxy(d, s, n, seed)?,
    };
    let out = WidthOutput { mean: w.mean, stderr: w.stderr, n: w.n_samples, min_samples: min_samples(&w), set: w.set_descriptor };
    let body = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json(&out)?,
        Format::Csv => format!(
            "set,mean,stderr,n,min_samples\n\"{}\",{:.16e},{:.16e},{},{}\n",
            out.set, out.mean, out.stderr, out.n, out.min_samples
        ),
    };
    emit(cli, "width.json", &body)
}

fn sweep(cli: &Cli) -> Outcome {
    let mut cfg: ExperimentConfig = read_config(cli)?;
    if let Some(seed) = cli.seed {
        cfg.base_seed = seed;
    }
    cfg.validate()?;
    let out = run_sweep(&cfg, cli.threads)?;
    match &cli.out {
        Some(dir) => {
            write_outputs(&out, dir)?;
            log::info!("wrote {} rows to {}", out.rows.len(), dir.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            match cli.format.unwrap_or(Format::Csv) {
                Format::Csv => write_rows(&out.rows, &mut stdout)?,
                Format::Json => stdout.write_all(json(&out.summary)?.as_bytes())?,
            }
        }
    }
    // Notes belong to an ε cell and repeat for every m.
    let mut problems: Vec<String> = Vec::new();
    for c in &out.summary.cells {
        for n in &c.notes {
            let p = format!("eps={}: {n}", c.eps);
            if !problems.contains(&p) {
                problems.push(p);
            }
        }
        if c.report.inadmissible {
            problems.push(format!("m={} eps={} is below the minimal sample size {}", c.m, c.eps, out.summary.min_samples));
        }
    }
    for p in &problems {
        log::warn!("{p}");
    }
    strict_check(cli, &problems)
}

#[derive(Serialize)]
struct ReportOutput {
    schema: &'static str,
    cells: Vec<BoundReport>,
    fits: Vec<RateFit>,
    fit_error: Option<String>,
}

fn report(cli: &Cli, input: &Path) -> Outcome {
    let path: PathBuf = if input.is_dir() { input.join("trials.csv") } else { input.to_path_buf() };
    let file = std::fs::File::open(&path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let rows = read_rows(file)?;
    if rows.is_empty() {
        return Err(Failure::Config(format!("{} has no rows", path.display())));
    }
    let mut cells = Vec::new();
    let mut start = 0;
    for i in 1..=rows.len() {
        if i == rows.len() || rows[i].m != rows[start].m || rows[i].eps != rows[start].eps {
            cells.push(bound_report(&rows[start..i])?);
            start = i;
        }
    }
    let (fits, fit_error) = match fit_rate(&rows, |r| format!("eps={}", r.eps)) {
        Ok(f) => (f, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let problems: Vec<String> =
        cells.iter().filter(|c| c.inadmissible).map(|c| format!("m={} eps={} is inadmissible", c.m, c.eps)).collect();
    let out = ReportOutput { schema: SUMMARY_SCHEMA, cells, fits, fit_error };
    let body = match cli.format.unwrap_or(Format::Json) {
        Format::Json => json(&out)?,
        Format::Csv => {
            let mut s = String::from(
                "m,eps,n_trials,alpha,lambda,bound_value,violations,allowed_violations,within_allowance,calibrated_c0,inadmissible\n",
            );
            for c in &out.cells {
                s.push_str(&format!(
                    "{},{:.16e},{},{:.16e},{:.16e},{:.16e},{},{:.16e},{},{:.16e},{}\n",
                    c.m,
                    c.eps,
                    c.n_trials,
                    c.alpha,
                    c.lambda,
                    c.bound_value,
                    c.violations,
                    c.allowed_violations,
                    c.within_allowance,
                    c.calibrated_c0,
                    c.inadmissible
                ));
            }
            s
        }
    };
    emit(cli, "report.json", &body)?;
    strict_check(cli, &problems)
}
