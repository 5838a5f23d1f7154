use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use stein_sense::contamination::{contaminated_law, ContaminationMode, ContaminationModel};
use stein_sense::distributions::DistributionSpec;
use stein_sense::geometry::width_descent_cone_sparse_proxy;
use stein_sense::link_model::{alpha_of, population_exact, LinkFunction};
use stein_sense::recovery::{estimate, ConstraintSet};
use stein_sense::zero_bias::{discrepancy_report, e_one_minus_t};
use stein_sense::StandardizedDistribution;
use stein_sense_bench::{dataset, model};

fn discrepancies(c: &mut Criterion) {
    let laplace = StandardizedDistribution::laplace();
    c.bench_function("e_one_minus_t/laplace", |b| b.iter(|| e_one_minus_t(black_box(&laplace)).unwrap()));
    let uniform = StandardizedDistribution::uniform();
    c.bench_function("discrepancy_report/uniform", |b| b.iter(|| discrepancy_report(black_box(&uniform)).unwrap()));
}

fn contamination(c: &mut Criterion) {
    let mut g = c.benchmark_group("contaminated_law");
    g.sample_size(10);
    for mode in [ContaminationMode::Mixture, ContaminationMode::Additive] {
        let m = ContaminationModel::new(mode, 0.5, DistributionSpec::laplace());
        g.bench_function(format!("{mode:?}").to_lowercase(), |b| b.iter(|| contaminated_law(black_box(&m)).unwrap()));
    }
    g.finish();
}

fn population(c: &mut Criterion) {
    let mut g = c.benchmark_group("population");
    g.sample_size(10);
    let mc = model(&DistributionSpec::laplace(), LinkFunction::Tanh, 64, 8);
    g.bench_function("alpha_of/laplace_tanh_d64_n1e5", |b| b.iter(|| alpha_of(&mc, 100_000, 1).unwrap()));
    let en = model(&DistributionSpec::rademacher(), LinkFunction::Sign, 16, 16);
    g.bench_function("enumeration/rademacher_sign_d16", |b| b.iter(|| population_exact(&en).unwrap()));
    g.finish();
}

fn recovery(c: &mut Criterion) {
    let mut g = c.benchmark_group("estimate");
    let d = 256;
    for m in [1024usize, 8192] {
        let ds = dataset(d, 4, m, 3);
        let sparse = ConstraintSet::sparse(4, d).unwrap();
        let l1 = ConstraintSet::l1_ball(1.5, d).unwrap();
        g.bench_with_input(BenchmarkId::new("sparse", m), &ds, |b, ds| b.iter(|| estimate(ds, &sparse).unwrap()));
        g.bench_with_input(BenchmarkId::new("l1_ball", m), &ds, |b, ds| b.iter(|| estimate(ds, &l1).unwrap()));
    }
    g.finish();
}

fn width(c: &mut Criterion) {
    let mut g = c.benchmark_group("width");
    g.sample_size(10);
    g.bench_function("descent_cone_proxy/d256_s4_n1e4", |b| {
        b.iter(|| width_descent_cone_sparse_proxy(256, 4, 10_000, 5).unwrap())
    });
    g.finish();
}

criterion_group!(benches, discrepancies, contamination, population, recovery, width);
criterion_main!(benches);
