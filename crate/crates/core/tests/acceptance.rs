//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::f64::consts::E;
use std::panic;
use std::time::{Duration, Instant};

use stein_sense::contamination::{contaminated_gamma, ContaminationMode, ContaminationModel};
use stein_sense::distributions::{abs_moment, make_distribution, DistributionSpec};
use stein_sense::harness::{fit_rate, run_sweep, write_rows, ExperimentConfig};
use stein_sense::link_model::{
    alpha_bound_sign, alpha_of, population_exact, v_x_lemma_checks, Channel, LinkFunction, PopulationMethod,
    SensingModel,
};
use stein_sense::recovery::{estimate, generate, project, ConstraintSet};
use stein_sense::special::SQRT_2_OVER_PI;
use stein_sense::zero_bias::{e_one_minus_t, gamma, stein_solution_abs, tv_distance, zero_bias};
use stein_sense::StandardizedDistribution;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(cond: bool, msg: String) -> Outcome {
    if cond {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn builtins() -> Vec<(&'static str, StandardizedDistribution)> {
    let spec = |s: DistributionSpec| make_distribution(&s).unwrap();
    vec![
        ("gaussian", StandardizedDistribution::gaussian()),
        ("rademacher", StandardizedDistribution::rademacher()),
        ("uniform", StandardizedDistribution::uniform()),
        ("laplace", StandardizedDistribution::laplace()),
        ("scaled_bernoulli(0.3)", spec(DistributionSpec::ScaledBernoulli { p: 0.3 })),
        ("two_point(2)", spec(DistributionSpec::TwoPoint { w: 2.0 })),
        (
            "tabulated(triangle)",
            spec(DistributionSpec::Tabulated { grid: vec![-1.0, 0.0, 2.0], pdf: vec![0.0, 1.0, 0.0] }),
        ),
    ]
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    v.into_iter().map(|c| c / n).collect()
}

fn ac01() -> Outcome {
    let start = Instant::now();
    let v = e_one_minus_t(&StandardizedDistribution::laplace()).map_err(|e| e.to_string())?;
    let t = start.elapsed();
    check(
        (v - 1.0 / E).abs() <= 1e-6 && t < Duration::from_secs(1),
        format!("laplace E|1-T| = {v:.10} vs 1/e = {:.10}, {:.3}s", 1.0 / E, t.as_secs_f64()),
    )
}

fn ac02() -> Outcome {
    let g = StandardizedDistribution::gaussian();
    let gam = gamma(&g).map_err(|e| e.to_string())?;
    let tv = tv_distance(&g, &zero_bias(&g)).map_err(|e| e.to_string())?;
    check(gam <= 1e-8 && tv <= 1e-8, format!("gaussian γ = {gam:.2e}, TV(g, g*) = {tv:.2e}"))
}

fn ac03() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut rad = f64::NAN;
    let mut ok = true;
    for (name, d) in builtins() {
        let g = gamma(&d).map_err(|e| format!("{name}: {e}"))?;
        let m3 = abs_moment(&d, 3.0).map_err(|e| format!("{name}: {e}"))?;
        ok &= g <= 0.5 * m3 + 1e-8;
        worst = worst.max(g - 0.5 * m3);
        if name == "rademacher" {
            rad = g;
        }
    }
    ok &= (rad - 0.5).abs() <= 1e-8;
    check(ok, format!("max(γ - E|a|³/2) = {worst:.3e} over {} laws; rademacher γ = {rad:.12}", builtins().len()))
}

fn ac04() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, d) in [("laplace", StandardizedDistribution::laplace()), ("uniform", StandardizedDistribution::uniform())] {
        let e = e_one_minus_t(&d).map_err(|e| e.to_string())?;
        let tv = tv_distance(&d, &zero_bias(&d)).map_err(|e| e.to_string())?;
        ok &= (e - tv).abs() <= 1e-6;
        parts.push(format!("{name}: |E|1-T| - TV(a,a*)| = {:.2e}", (e - tv).abs()));
    }
    check(ok, parts.join("; "))
}

fn ac05() -> Outcome {
    let g = StandardizedDistribution::gaussian();
    let mut parts = Vec::new();
    let mut ok = true;
    for (name, d) in [("laplace", StandardizedDistribution::laplace()), ("uniform", StandardizedDistribution::uniform())] {
        let tv_ag = tv_distance(&d, &g).map_err(|e| e.to_string())?;
        let tv_star = tv_distance(&d, &zero_bias(&d)).map_err(|e| e.to_string())?;
        let e = e_one_minus_t(&d).map_err(|e| e.to_string())?;
        ok &= tv_ag <= 2.0 * tv_star && tv_ag <= 2.0 * e;
        parts.push(format!("{name}: TV(a,g) = {tv_ag:.5} ≤ 2TV(a,a*) = {:.5}, ≤ 2E|1-T| = {:.5}", 2.0 * tv_star, 2.0 * e));
        if name == "uniform" {
            let b2 = 3.0;
            ok &= tv_star <= (1.0 + b2) * tv_ag;
            parts.push(format!("TV(a,a*) = {tv_star:.5} ≤ (1+b²)TV(a,g) = {:.5}", (1.0 + b2) * tv_ag));
        }
    }
    check(ok, parts.join("; "))
}

fn ac06() -> Outcome {
    let mut ok = true;
    let mut worst_mix = f64::NEG_INFINITY;
    let mut worst_add = f64::NEG_INFINITY;
    for eps in [0.1f64, 0.25, 0.5, 1.0] {
        let mix = contaminated_gamma(&ContaminationModel::new(ContaminationMode::Mixture, eps, DistributionSpec::rademacher()))
            .map_err(|e| e.to_string())?;
        let add = contaminated_gamma(&ContaminationModel::new(ContaminationMode::Additive, eps, DistributionSpec::rademacher()))
            .map_err(|e| e.to_string())?;
        ok &= mix <= eps * 0.5 + 1e-6 && add <= eps.powf(1.5) * 0.5 + 5e-4;
        worst_mix = worst_mix.max(mix - eps * 0.5);
        worst_add = worst_add.max(add - eps.powf(1.5) * 0.5);
    }
    check(ok, format!("max excess over εγ_a: mixture {worst_mix:.3e}, over ε^1.5γ_a: additive {worst_add:.3e}"))
}

fn ac07() -> Outcome {
    let (d, n) = (32usize, 1_000_000usize);
    let x = unit((1..=d).map(|i| 1.0 + (i % 5) as f64).collect());
    let limit = 4.0 * (d as f64).sqrt() / (n as f64).sqrt();
    let mut parts = Vec::new();
    let mut ok = true;
    for link in [LinkFunction::Tanh, LinkFunction::Linear { mu: 1.0 }] {
        let m = SensingModel::new(StandardizedDistribution::gaussian(), link, x.clone(), Channel::Exact)
            .map_err(|e| e.to_string())?;
        let s = alpha_of(&m, n, 7).map_err(|e| e.to_string())?;
        ok &= s.alpha <= limit;
        parts.push(format!("{}: α̂ = {:.5}", link.name(), s.alpha));
    }
    check(ok, format!("{} (limit 4√d/√N = {limit:.5})", parts.join(", ")))
}

fn ac08() -> Outcome {
    let d = 16;
    let x = unit((0..d).map(|j| 1.0 + j as f64 / 8.0).collect());
    let r = StandardizedDistribution::rademacher();
    let m = SensingModel::new(r.clone(), LinkFunction::Sign, x.clone(), Channel::Exact).map_err(|e| e.to_string())?;
    let exact = population_exact(&m).map_err(|e| e.to_string())?.ok_or("no enumeration")?;
    if exact.method != PopulationMethod::Enumeration {
        return Err("rademacher model was not enumerated".into());
    }
    let mc = alpha_of(&m, 1_000_000, 8).map_err(|e| e.to_string())?;
    let agree = (exact.alpha - mc.alpha).abs() <= 4.0 * mc.mc_stderr;
    let bound = alpha_bound_sign(&r, &x).map_err(|e| e.to_string())?;
    check(
        agree && exact.alpha <= bound,
        format!(
            "enumerated α = {:.6}, Monte Carlo α̂ = {:.6} ± {:.6}, sign bound = {bound:.4}",
            exact.alpha, mc.alpha, mc.mc_stderr
        ),
    )
}

fn ac09() -> Outcome {
    let h = 1e-3;
    let f = |x: f64| stein_solution_abs(x).f;
    let mut max_resid = 0.0f64;
    let mut max_d2 = 0.0f64;
    let mut near_zero = 0.0f64;
    for i in 0..=2000 {
        let x = i as f64 * 0.005;
        let s = stein_solution_abs(x);
        max_d2 = max_d2.max(s.d2f.abs());
        if x <= 0.05 {
            near_zero = near_zero.max(s.d2f.abs());
        }
        // Five-point derivative; stencils stay on one side of the kink at 0.
        if x >= 0.05 {
            let fd = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
            max_resid = max_resid.max((fd - x * s.f - (x.abs() - SQRT_2_OVER_PI)).abs());
        }
    }
    check(
        max_resid <= 1e-8 && max_d2 <= 1.0 + 1e-6 && near_zero >= 0.999,
        format!("max residual {max_resid:.2e}, max|f''| = {max_d2:.9}, max near 0 = {near_zero:.6}"),
    )
}

fn ac10() -> Outcome {
    let mut r = ChaCha8Rng::seed_from_u64(10);
    let mut worst_sparse = 0.0f64;
    let mut worst_l1 = 0.0f64;
    for _ in 0..1000 {
        let d = r.random_range(1..=10usize);
        let v: Vec<f64> = (0..d).map(|_| r.random_range(-3.0..3.0)).collect();
        let s = r.random_range(1..=d);
        let p = project(&v, &ConstraintSet::sparse(s, d).unwrap()).map_err(|e| e.to_string())?;
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << d) {
            if mask.count_ones() as usize != s {
                continue;
            }
            let cand: Vec<f64> = (0..d).map(|i| if mask >> i & 1 == 1 { v[i] } else { 0.0 }).collect();
            let dist: f64 = cand.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum();
            if dist < best {
                best = dist;
            }
        }
        let pd: f64 = p.iter().zip(&v).map(|(a, b)| (a - b).powi(2)).sum();
        worst_sparse = worst_sparse.max((pd - best).abs());

        let radius = r.random_range(0.05..5.0);
        let p = project(&v, &ConstraintSet::l1_ball(radius, d).unwrap()).map_err(|e| e.to_string())?;
        let o = l1_kkt_oracle(&v, radius);
        worst_l1 = worst_l1.max(p.iter().zip(&o).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    // The estimator is the projection of v̂.
    let m = SensingModel::new(StandardizedDistribution::laplace(), LinkFunction::Tanh, unit(vec![1.0, -2.0, 0.0, 0.5]), Channel::Exact)
        .map_err(|e| e.to_string())?;
    let ds = generate(&m, 500, 3).map_err(|e| e.to_string())?;
    let k = ConstraintSet::l1_ball(0.3, 4).unwrap();
    let est = estimate(&ds, &k).map_err(|e| e.to_string())?;
    let oracle = l1_kkt_oracle(&ds.v_hat(), 0.3);
    let est_gap = est.iter().zip(&oracle).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    check(
        worst_sparse <= 1e-9 && worst_l1 <= 1e-9 && est_gap <= 1e-9,
        format!("max deviations: sparse {worst_sparse:.1e}, ℓ1 {worst_l1:.1e}, estimator {est_gap:.1e}"),
    )
}

/// Solves the KKT system of the ℓ1-ball projection: the output is the
/// soft threshold at the `τ ≥ 0` with `Σ max(|vᵢ| - τ, 0) = R`, found by
/// bisection.
fn l1_kkt_oracle(v: &[f64], radius: f64) -> Vec<f64> {
    if v.iter().map(|c| c.abs()).sum::<f64>() <= radius {
        return v.to_vec();
    }
    let mass = |t: f64| v.iter().map(|c| (c.abs() - t).max(0.0)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, v.iter().fold(0.0f64, |m, c| m.max(c.abs())));
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mass(mid) > radius {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    v.iter().map(|c| c.signum() * (c.abs() - t).max(0.0)).collect()
}

fn sweep_config(link: &str) -> ExperimentConfig {
    let text = format!(
        r#"{{
            "model": {{
                "dist": {{"kind": "gaussian", "params": {{}}}},
                "link": {link},
                "x": {{"kind": "unit_sparse", "params": {{"s": 4, "d": 256, "seed": 2024}}}}
            }},
            "constraint": {{"kind": "sparse", "params": {{"s": 4}}}},
            "m_grid": [256, 512, 1024, 2048, 4096, 8192, 16384],
            "n_trials": 50,
            "base_seed": 20240611
        }}"#
    );
    ExperimentConfig::from_json(&text).expect("valid config")
}

fn ac11() -> Outcome {
    let start = Instant::now();
    let out = run_sweep(&sweep_config(r#"{"kind": "linear", "params": {"mu": 1.0}}"#), None).map_err(|e| e.to_string())?;
    let fits = fit_rate(&out.rows, |_| "gaussian/linear".into()).map_err(|e| e.to_string())?;
    let slope = fits[0].slope.ok_or("no slope")?;
    let t = start.elapsed();
    check(
        (-0.6..=-0.4).contains(&slope) && t < Duration::from_secs(180),
        format!("fitted slope {slope:.4} over {} points, {:.1}s", fits[0].points, t.as_secs_f64()),
    )
}

fn ac12() -> Outcome {
    let out = run_sweep(&sweep_config(r#"{"kind": "sign"}"#), None).map_err(|e| e.to_string())?;
    let cells = &out.summary.cells;
    let lambda = cells[0].lambda;
    if (lambda - SQRT_2_OVER_PI).abs() > 1e-12 {
        return Err(format!("λ = {lambda}, expected √(2/π)"));
    }
    let stats: Vec<_> = cells.iter().map(|c| c.err_normalized.clone().expect("λ > 0")).collect();
    let monotone = stats.windows(2).all(|w| w[1].mean <= w[0].mean + 4.0 * (w[0].stderr.powi(2) + w[1].stderr.powi(2)).sqrt());
    let last = stats.last().unwrap().mean;
    let means: Vec<String> = stats.iter().map(|s| format!("{:.4}", s.mean)).collect();
    check(last < 0.15 && monotone, format!("mean ‖x̄ - x‖ by m: [{}]", means.join(", ")))
}

fn ac13() -> Outcome {
    let rad = v_x_lemma_checks(&StandardizedDistribution::rademacher(), &[0.25; 16], 0, 0).map_err(|e| e.to_string())?;
    let mut r = ChaCha8Rng::seed_from_u64(13);
    let x = loop {
        let x = unit((0..12).map(|_| r.random_range(-1.0..1.0)).collect());
        if x.iter().all(|c| c.abs() <= 0.5) {
            break x;
        }
    };
    let uni = v_x_lemma_checks(&StandardizedDistribution::uniform(), &x, 1_000_000, 14).map_err(|e| e.to_string())?;
    let judged = |rep: &stein_sense::link_model::LemmaReport| rep.checks.iter().filter(|c| c.passed.is_some()).count();
    check(
        rad.method == PopulationMethod::Enumeration
            && rad.all_passed()
            && uni.all_passed()
            && judged(&rad) == 4
            && judged(&uni) == 4,
        format!(
            "rademacher (enumerated): {}/4 pass; uniform (Monte Carlo): {}/4 pass",
            rad.checks.iter().filter(|c| c.passed == Some(true)).count(),
            uni.checks.iter().filter(|c| c.passed == Some(true)).count()
        ),
    )
}

fn ac14() -> Outcome {
    let mut cfg = sweep_config(r#"{"kind": "sign"}"#);
    cfg.m_grid = vec![256, 1024, 4096];
    cfg.n_trials = 10;
    let csv = |threads| -> Result<Vec<u8>, String> {
        let out = run_sweep(&cfg, Some(threads)).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        write_rows(&out.rows, &mut buf).map_err(|e| e.to_string())?;
        Ok(buf)
    };
    let serial = csv(1)?;
    let parallel = csv(8)?;
    let again = csv(1)?;
    check(
        serial == parallel && serial == again,
        format!("{} CSV bytes; serial vs 8 threads identical: {}", serial.len(), serial == parallel),
    )
}

fn main() {
    let criteria: [(&str, &str, fn() -> Outcome); 14] = [
        ("AC01", "Laplace Stein-coefficient discrepancy", ac01),
        ("AC02", "Gaussian zero-bias fixed point", ac02),
        ("AC03", "γ versus third absolute moment", ac03),
        ("AC04", "E|1-T| equals TV(a, a*)", ac04),
        ("AC05", "total-variation inequalities", ac05),
        ("AC06", "contaminated γ bounds", ac06),
        ("AC07", "α vanishes for Gaussian sensing", ac07),
        ("AC08", "sign-link enumeration oracle", ac08),
        ("AC09", "Stein-equation solution", ac09),
        ("AC10", "projection and estimator oracles", ac10),
        ("AC11", "1/√m error rate", ac11),
        ("AC12", "one-bit recovery", ac12),
        ("AC13", "v_x inequalities for the sign link", ac13),
        ("AC14", "sweep determinism", ac14),
    ];
    panic::set_hook(Box::new(|_| {}));
    let total = Instant::now();
    let mut failed = 0;
    for (id, title, run) in criteria {
        let start = Instant::now();
        let outcome = panic::catch_unwind(run).unwrap_or_else(|p| {
            Err(p.downcast_ref::<String>().cloned().or(p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(msg) => println!("[PASS] {id} {title}: {msg} ({secs:.2}s)"),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] {id} {title}: {msg} ({secs:.2}s)");
            }
        }
    }
    println!("{} of 14 criteria passed in {:.1}s", 14 - failed, total.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
