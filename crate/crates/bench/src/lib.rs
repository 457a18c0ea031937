//! Shared fixtures for the benchmarks.

use gainsense_core::{DetectorSpec, Gain};

/// Gains spanning the low, moderate and high amplification regimes.
pub const BENCH_GAINS: [f64; 3] = [1.2, 2.0, 10.0];

pub fn gain(g: f64) -> Gain {
    Gain::new(g).expect("benchmark gain in range")
}

pub fn detector(eta: f64) -> DetectorSpec {
    DetectorSpec::new(eta).expect("benchmark efficiency in (0, 1]")
}
