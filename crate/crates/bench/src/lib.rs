//! Fixtures shared by the criterion benchmarks.

use stein_sense::distributions::DistributionSpec;
use stein_sense::link_model::{Channel, LinkFunction, SensingModel};
use stein_sense::recovery::{generate, Dataset};
use stein_sense::StandardizedDistribution;

/// Unit vector with `s` equal entries followed by zeros.
pub fn flat_sparse_x(d: usize, s: usize) -> Vec<f64> {
    let v = 1.0 / (s as f64).sqrt();
    (0..d).map(|i| if i < s { v } else { 0.0 }).collect()
}

pub fn model(spec: &DistributionSpec, link: LinkFunction, d: usize, s: usize) -> SensingModel {
    let dist = StandardizedDistribution::new(spec).expect("built-in spec");
    SensingModel::new(dist, link, flat_sparse_x(d, s), Channel::Exact).expect("valid model")
}

pub fn dataset(d: usize, s: usize, m: usize, seed: u64) -> Dataset {
    generate(&model(&DistributionSpec::gaussian(), LinkFunction::Sign, d, s), m, seed).expect("dataset")
}
