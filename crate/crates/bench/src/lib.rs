//! Shared fixtures for the benchmark targets.

use stream_ot::cost::CostSpec;
use stream_ot::grid::Points;
use stream_ot::potential::Potential;
use stream_ot::sampling::{sample, DistributionSpec, RngState};
use stream_ot::WeightedMeasure;

pub fn gaussian_pair() -> (DistributionSpec, DistributionSpec) {
    (
        DistributionSpec::gaussian_1d(3.0, 4.0).unwrap(),
        DistributionSpec::gaussian_1d(1.0, 2.0).unwrap(),
    )
}

/// A potential with `n` Gaussian-sampled atoms and smooth log-weights.
pub fn fixture_potential(n: usize, epsilon: f64, seed: u64) -> Potential {
    let mut rng = RngState::from_seed(seed);
    let spec = DistributionSpec::gaussian_1d(1.0, 2.0).unwrap();
    let atoms = sample(&spec, n, &mut rng);
    let weights: Vec<f64> = atoms.iter().map(|y| -0.3 * y[0] * y[0]).collect();
    Potential::new(
        epsilon,
        CostSpec::squared_euclidean(1).unwrap(),
        atoms,
        weights,
    )
    .unwrap()
}

/// A smooth discrete measure on `n` quasi-uniform atoms.
pub fn fixture_measure(n: usize) -> WeightedMeasure {
    let atoms: Vec<f64> = (0..n)
        .map(|i| -2.0 + 4.0 * i as f64 / (n - 1) as f64)
        .collect();
    let weights: Vec<f64> = atoms
        .iter()
        .map(|y| (2.0 + (3.0 * y).sin()) * (-y * y / 2.0).exp() / n as f64)
        .collect();
    WeightedMeasure::new(Points::from_1d(&atoms), weights).unwrap()
}

pub fn fixture_points(n: usize, seed: u64) -> Points {
    let mut rng = RngState::from_seed(seed);
    let spec = DistributionSpec::gaussian_1d(2.0, 3.0).unwrap();
    sample(&spec, n, &mut rng)
}
