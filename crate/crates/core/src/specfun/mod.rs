//! Special-function kernel: incomplete Beta and Gamma functions, the Binomial
//! and Poisson tail identities built on them, and asymptotic expansions.
//!
//! Tail ratios are evaluated in log space. A ratio whose denominator is not
//! representable even as a logarithm yields [`Error::Underflow`](crate::Error)
//! rather than a silent zero.

mod beta;
mod gamma;
pub mod lgamma;
mod normal;
mod sums;

pub use beta::{
    beta_ratio_step, binom_survival, iota, ln_reg_inc_beta, reg_inc_beta, survival_bounds,
    SurvivalBounds,
};
pub use gamma::{
    gamma_ratio_expansion, gamma_ratio_expansion_z_form, ln_reg_inc_gamma_lower,
    reg_inc_gamma_lower, reg_inc_gamma_upper, rho,
};
pub use lgamma::{ln_beta, ln_choose, ln_gamma};
pub use normal::{std_normal_cdf, std_normal_quantile, std_normal_sf};
pub use sums::{power_sum, zeta, PowerSum, EULER_GAMMA};
