//! Shared fixtures for the pipeline benchmarks.

use pointssim::{generators::generate_one, BinaryImage, Scenario, ScenarioConfig};

/// Sizes benchmarked for the per-image stages.
pub const SIZES: [usize; 3] = [128, 256, 512];

/// First realization of `scenario` at `size` with a fixed seed.
pub fn fixture(scenario: Scenario, size: usize) -> BinaryImage {
    generate_one(&ScenarioConfig::new(scenario, size, 42, 1), 0).expect("default config is valid")
}
