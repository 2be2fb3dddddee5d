//! Pinned grids, tolerances and seeds shared by the verification suites,
//! the unit tests and the acceptance target. Changing a value here changes
//! what every stochastic check sees, so they are kept in one place.

/// Significance level of every hypothesis test.
pub const ALPHA: f64 = 0.001;

/// Master seeds. Each suite owns one so suites can be rerun in isolation.
pub mod seeds {
    pub const ORACLE: u64 = 0x0DE6_0001;
    pub const MOMENTS: u64 = 0x0DE6_0002;
    pub const CLT: u64 = 0x0DE6_0003;
    pub const EXTREME: u64 = 0x0DE6_0004;
    pub const SAMPLER_DENSE: u64 = 0x0DE6_0005;
    pub const SAMPLER_SPARSE: u64 = 0x0DE6_0006;
    pub const BENCH: u64 = 0x0DE6_0007;
    pub const DETERMINISM: u64 = 0x0DE6_0008;
    pub const ESTIMATE: u64 = 0x0DE6_0009;
}

/// `n` values of the survival sandwich grid.
pub const SURVIVAL_N: [u64; 4] = [10, 100, 500, 1000];

/// `μ ∈ {0.1, ..., 0.9}`.
pub fn mu_grid() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}

/// Largest `max C / min C` across `n` for the Normal-approximation constant.
pub const BERRY_ESSEEN_SPREAD: f64 = 2.0;

/// Enumeration oracle: sizes, instances per size, tolerance and time limit.
pub const ORACLE_SIZES: std::ops::RangeInclusive<usize> = 2..=12;
pub const ORACLE_INSTANCES: usize = 50;
pub const ORACLE_TOL: f64 = 1e-12;
pub const ORACLE_SECONDS: f64 = 60.0;

pub const MOMENT_VECTORS: usize = 100;
pub const MOMENT_MAX_N: usize = 200;
pub const MOMENT_TOL: f64 = 1e-9;

pub const DISPERSION_N: [usize; 2] = [50, 200];
pub const DISPERSION_TOL: f64 = 1e-6;

/// Power-law mixing used for the Theorem-3 scale checks.
pub const PARETO_BETA: f64 = 3.0;
pub const PARETO_A: f64 = 1.0 / 3.0;
pub const PARETO_B: f64 = 1.0;
pub const PARETO_N: usize = 1000;
pub const PARETO_REL_TOL: f64 = 1e-3;
pub const PARETO_PMF_FLOOR: f64 = 1e-12;
pub const PARETO_OUTSIDE_MASS: f64 = 1e-6;
pub const PARETO_SLOPE_TOL: f64 = 0.05;
/// Binomial standard deviations kept clear of each censoring edge when
/// fitting the interior slope.
pub const PARETO_INTERIOR_SD: f64 = 3.0;
pub const PARETO_SECONDS: f64 = 120.0;

pub const REPRO_N: [usize; 3] = [250, 500, 1000];
/// Allowed deviation of the error ratio from 2 per doubling of `n`.
pub const REPRO_HALVING_TOL: f64 = 0.3;
pub const REPRO_SECONDS: f64 = 120.0;

pub const POISSON_GAMMAS: [f64; 3] = [0.3, 0.5, 0.7];
pub const POISSON_N: [usize; 3] = [100, 1000, 10_000];
pub const POISSON_RATIO_MAX: f64 = 2.0;

pub const CLT_GAMMA: f64 = 0.3;
pub const CLT_N: usize = 2000;
pub const CLT_REPLICATES: u64 = 2000;
pub const CLT_LEVEL: f64 = 0.95;
pub const CLT_KS_MAX: f64 = 0.05;
pub const CLT_COVERAGE: (f64, f64) = (0.93, 0.97);
pub const CLT_SECONDS: f64 = 300.0;
/// Spread bound on `√‖d‖₁ - √E‖d‖₁` across replicates.
pub const CLT_ROOT_SD_MAX: f64 = 2.0;

pub const EXTREME_ZETA: f64 = 12.0;
pub const EXTREME_N: usize = 100_000;
pub const EXTREME_REPLICATES: u64 = 50;
pub const EXTREME_MEAN_REL: f64 = 0.02;
pub const EXTREME_DISPERSION_REL: f64 = 0.05;
pub const EXTREME_CLOSED_FORM_TOL: f64 = 1e-10;

pub const SAMPLER_N: usize = 100;
pub const SAMPLER_REPLICATES: u64 = 400;
pub const BENCH_N: (usize, usize) = (100_000, 1_000_000);
pub const BENCH_ZETA: f64 = 4.0;
pub const BENCH_RATIO_MAX: f64 = 15.0;
/// Timed runs per size; the fastest is kept.
pub const BENCH_RUNS: usize = 3;

/// Doubling grid `z = 32, ..., 1024` for the Gamma-ratio expansion.
pub fn gamma_ratio_z_grid() -> Vec<f64> {
    (5..=10).map(|e| f64::from(1u32 << e)).collect()
}
pub const GAMMA_RATIO_BETAS: [u32; 3] = [2, 3, 5];
pub const GAMMA_RATIO_ORDER: f64 = -3.0;
pub const GAMMA_RATIO_ORDER_TOL: f64 = 0.15;

/// `μ_n = c n^{-0.6}` family for the Beta-to-Gamma lemmas.
pub const SPARSE_FAMILY_C: f64 = 1.0;
pub const SPARSE_FAMILY_EXPONENT: f64 = -0.6;
pub const SPARSE_FAMILY_N: [usize; 3] = [1000, 10_000, 100_000];
pub const SPARSE_FAMILY_DELTAS: [f64; 3] = [0.5, 1.0, 2.0];
/// Multiplier on `k²/n + kμ_n + nμ_n²` in the Beta-to-Gamma envelope.
pub const SPARSE_ENVELOPE_C: f64 = 1.0;

pub const DETERMINISM_THREADS: [usize; 3] = [1, 2, 4];
