//! Numerical tolerances and work caps shared by every stage of the pipeline.

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    /// Newton polish target for polynomial roots, relative backward error.
    pub root_polish: f64,
    /// Sup-norm residual a factorization must meet to be emitted.
    pub residual: f64,
    /// Single-linkage distance for clustering critical values and zeros.
    pub cluster: f64,
    /// Allowed deviation of |lambda| from 1.
    pub unimodular: f64,
    /// Fiber points must be polished to |B(z) - w| at or below this.
    pub fiber_residual: f64,
    /// Iteration cap for the simultaneous root iteration.
    pub max_root_iterations: usize,
    /// Longest step (in the w-plane) the continuation may take.
    pub max_step: f64,
    pub max_newton_iterations: usize,
    pub max_bisections: u32,
    /// Groups up to this order get their elements materialized.
    pub enumeration_cap: u128,
    /// Largest degree the analysis accepts before declining.
    pub max_degree: usize,
    /// Equispaced angles per verification radius, also the number of random samples.
    pub grid: usize,
    /// Seed for verification samples and the degenerate-fiber conjugation.
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            root_polish: 1e-12,
            residual: 1e-8,
            cluster: 1e-9,
            unimodular: 1e-12,
            fiber_residual: 1e-11,
            max_root_iterations: 500,
            max_step: 0.05,
            max_newton_iterations: 10,
            max_bisections: 40,
            enumeration_cap: 200_000,
            max_degree: 16,
            grid: 50,
            seed: 0,
        }
    }
}
