//! Degree distributions of random graphs with edge probabilities `π_i π_j`.
//!
//! - [`weights`] builds `π` from deterministic sequences or mixing laws and
//!   applies the sparse scaling map.
//! - [`degree_laws`] computes exact, quadrature and closed-form degree pmfs.
//! - [`sampler`] draws graphs reproducibly in `O(n + E)`.
//! - [`estimate`] recovers `π` from degrees, with Normal intervals.
//! - [`commands`] is the engine behind the `degreenet` binary.
//!
//! ```
//! use degreenet::degree_laws::{marginal_pmf_quadrature, MixingLaw};
//! use degreenet::weights::PointMass;
//!
//! // Without variation in π the marginal law is Binomial(n-1, μ²).
//! let law = marginal_pmf_quadrature(&MixingLaw::PointMass(PointMass::new(0.5).unwrap()), 3).unwrap();
//! assert!((law.pmf[0] - 0.5625).abs() < 1e-14);
//! ```
//!
//! The guide in `book/` walks through each part; its examples run as doctests.

pub mod commands;
pub mod degree_laws;
pub mod error;
pub mod estimate;
pub mod numeric;
pub mod oracle;
pub mod quad;
pub mod sampler;
pub mod weights;
pub mod specfun;
pub mod stats;
pub mod testcfg;
pub mod verify;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/weights.md")]
    mod weights {}
    #[doc = include_str!("../../../book/src/exact-laws.md")]
    mod exact_laws {}
    #[doc = include_str!("../../../book/src/approximations.md")]
    mod approximations {}
    #[doc = include_str!("../../../book/src/special-functions.md")]
    mod special_functions {}
    #[doc = include_str!("../../../book/src/sampling.md")]
    mod sampling {}
    #[doc = include_str!("../../../book/src/estimation.md")]
    mod estimation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
