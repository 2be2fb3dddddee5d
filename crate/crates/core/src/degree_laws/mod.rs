//! Exact and approximate degree distributions.
//!
//! Conditional on the weights, a degree is a sum of independent Bernoulli
//! trials and its law is computed exactly. Integrating over a mixing density
//! gives Binomial mixtures, evaluated by quadrature, in closed form for the
//! bounded Pareto density, or through the reproduction approximation for
//! smooth densities. Rescaled sparse models and their mixed Poisson limit
//! live in the same module.

mod approx;
mod exact;
mod law;
mod mixture;
mod sparse;

pub use approx::{pareto_eps_exact, pareto_eps_leading, pareto_population_pmf, smooth_repro_pmf};
pub use exact::{
    conditional_degree_law, conditional_moments, degree_covariance, edge_probs, marginal_moments,
    poisson_binomial_pmf, tv_distance_to_poisson, ConditionalMoments, MarginalMoments, PoissonDistance,
};
pub use law::{Column, DegreeLaw, Provenance, SCHEMA_HEADER};
pub use mixture::{marginal_pmf_quadrature, mixed_binomial_entry, mixed_poisson_entry, MixingLaw};
pub use sparse::{default_k_max, extreme_sparse_pmf, sparse_pmf, sparse_pmf_form, SparseForm};
