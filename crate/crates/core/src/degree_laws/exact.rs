//! Exact conditional degree laws and the closed-form moment identities.

use serde::Serialize;

use super::law::{DegreeLaw, Provenance};
use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::specfun::lgamma::ln_dpois_raw;
use crate::weights::WeightVector;

/// Exact pmf of a sum of independent Bernoulli variables with the given
/// success probabilities, by sequential convolution in `O(m²)`.
///
/// ```
/// use degreenet::degree_laws::poisson_binomial_pmf;
/// let law = poisson_binomial_pmf(&[0.5, 0.5]).unwrap();
/// assert_eq!(law.pmf, vec![0.25, 0.5, 0.25]);
/// ```
pub fn poisson_binomial_pmf(probs: &[f64]) -> Result<DegreeLaw> {
    let pmf = pb_pmf(probs)?;
    Ok(DegreeLaw::new(pmf, Provenance::ExactDp, probs.len() + 1))
}

pub(crate) fn pb_pmf(probs: &[f64]) -> Result<Vec<f64>> {
    if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::domain("poisson_binomial_pmf", format!("probability {p} outside [0, 1]")));
    }
    let mut pmf = vec![0.0; probs.len() + 1];
    pmf[0] = 1.0;
    for (m, &p) in probs.iter().enumerate() {
        let q = 1.0 - p;
        // Walk downwards so each entry reads the previous generation.
        pmf[m + 1] = pmf[m] * p;
        for j in (1..=m).rev() {
            pmf[j] = pmf[j].mul_add(q, pmf[j - 1] * p);
        }
        pmf[0] *= q;
    }
    Ok(pmf)
}

fn check_index(pi: &WeightVector, i: usize) -> Result<()> {
    if i >= pi.len() {
        return Err(Error::Index {
            index: i,
            len: pi.len(),
        });
    }
    Ok(())
}

/// Edge probabilities `π_i π_j` for `j ≠ i`.
pub fn edge_probs(pi: &WeightVector, i: usize) -> Result<Vec<f64>> {
    check_index(pi, i)?;
    let v = pi.values();
    Ok(v.iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .map(|(_, &pj)| v[i] * pj)
        .collect())
}

/// Law of `d_i` given the full weight vector.
pub fn conditional_degree_law(pi: &WeightVector, i: usize) -> Result<DegreeLaw> {
    let probs = edge_probs(pi, i)?;
    let m = conditional_moments_unchecked(pi, i);
    Ok(DegreeLaw::new(pb_pmf(&probs)?, Provenance::ExactDp, pi.len())
        .with_meta("node", i)
        .with_meta("analytic_mean", m.0)
        .with_meta("analytic_variance", m.1))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalMoments {
    pub mean: f64,
    pub variance: f64,
    /// `variance / mean`, never above one.
    pub dispersion: f64,
    /// Lower bound `E(d_i)/(n-1)` on `1 - dispersion`.
    pub disp_gap_lower: f64,
    /// Upper bound `π_i` on `1 - dispersion`.
    pub disp_gap_upper: f64,
}

/// `(mean, variance, Σ_{j≠i} π_j, Σ_{j≠i} π_j²)`.
fn conditional_moments_unchecked(pi: &WeightVector, i: usize) -> (f64, f64, f64, f64) {
    let v = pi.values();
    let pi_i = v[i];
    let mut s1 = KahanSum::new();
    let mut s2 = KahanSum::new();
    let mut var = KahanSum::new();
    for (j, &pj) in v.iter().enumerate() {
        if j != i {
            s1.add(pj);
            s2.add(pj * pj);
            let p = pi_i * pj;
            var.add(p * (1.0 - p));
        }
    }
    (pi_i * s1.value(), var.value(), s1.value(), s2.value())
}

/// Conditional mean, variance and dispersion of `d_i`.
///
/// ```
/// use degreenet::{degree_laws::conditional_moments, weights::WeightVector};
/// let pi = WeightVector::homogeneous(0.5, 11).unwrap();
/// let m = conditional_moments(&pi, 0).unwrap();
/// assert!((m.mean - 2.5).abs() < 1e-15);
/// assert!((m.dispersion - 0.75).abs() < 1e-15);
/// ```
pub fn conditional_moments(pi: &WeightVector, i: usize) -> Result<ConditionalMoments> {
    check_index(pi, i)?;
    let (mean, variance, s1, s2) = conditional_moments_unchecked(pi, i);
    if !(mean > 0.0) {
        return Err(Error::Degenerate(format!(
            "node {i} has zero expected degree; its dispersion is undefined"
        )));
    }
    let pi_i = pi.values()[i];
    Ok(ConditionalMoments {
        mean,
        variance,
        dispersion: 1.0 - pi_i * s2 / s1,
        disp_gap_lower: mean / (pi.len() - 1) as f64,
        disp_gap_upper: pi_i,
    })
}

/// `Cov(d_i, d_j | π) = π_i π_j (1 - π_i π_j)` for `i ≠ j`.
pub fn degree_covariance(pi: &WeightVector, i: usize, j: usize) -> Result<f64> {
    check_index(pi, i)?;
    check_index(pi, j)?;
    if i == j {
        return Err(Error::domain("degree_covariance", "need distinct nodes"));
    }
    let p = pi.values()[i] * pi.values()[j];
    Ok(p * (1.0 - p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalMoments {
    pub mean: f64,
    pub variance: f64,
    pub covariance: f64,
    pub dispersion: f64,
    pub correlation: f64,
}

/// Moments of a single degree with `π` integrated out, for mixing mean `mu`
/// and variance `sigma2`.
///
/// ```
/// use degreenet::degree_laws::marginal_moments;
/// let m = marginal_moments(0.5, 1.0 / 12.0, 14).unwrap();
/// assert!((m.dispersion - 1.75).abs() < 1e-14);
/// ```
pub fn marginal_moments(mu: f64, sigma2: f64, n: usize) -> Result<MarginalMoments> {
    if !(0.0..=1.0).contains(&mu) {
        return Err(Error::domain("marginal_moments", format!("need mu in [0, 1], got {mu}")));
    }
    if !(sigma2 >= 0.0) || sigma2 > mu * (1.0 - mu) * (1.0 + 1e-12) {
        return Err(Error::domain(
            "marginal_moments",
            format!("need 0 <= sigma2 <= mu(1-mu) = {}, got {sigma2}", mu * (1.0 - mu)),
        ));
    }
    if n < 3 {
        return Err(Error::domain("marginal_moments", format!("need n >= 3, got {n}")));
    }
    let nf = n as f64;
    let mu2 = mu * mu;
    let d = (nf - 2.0) * sigma2 + 1.0 - mu2;
    let mean = (nf - 1.0) * mu2;
    let variance = mean * d;
    if !(variance > 0.0) {
        return Err(Error::Degenerate("marginal degree variance is zero".into()));
    }
    let covariance = mu2 * (3.0 * (nf - 2.0) * sigma2 + 1.0 - mu2);
    Ok(MarginalMoments {
        mean,
        variance,
        covariance,
        dispersion: d,
        correlation: (1.0 + 2.0 * (nf - 2.0) * sigma2 / d) / (nf - 1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonDistance {
    pub tv: f64,
    /// `min(E, 1)(1 - Var/E)`, the order of the total variation bound.
    pub bound_scale: f64,
}

/// Total variation distance between the law of `d_i | π` and the Poisson law
/// with the same mean.
pub fn tv_distance_to_poisson(pi: &WeightVector, i: usize) -> Result<PoissonDistance> {
    let cm = conditional_moments(pi, i)?;
    let pb = pb_pmf(&edge_probs(pi, i)?)?;
    let lambda = cm.mean;
    let mut acc = KahanSum::new();
    let mut cum = KahanSum::new();
    let mut k = 0usize;
    loop {
        let pois = ln_dpois_raw(k as f64, lambda).exp();
        cum.add(pois);
        let p = pb.get(k).copied().unwrap_or(0.0);
        acc.add((p - pois).abs());
        k += 1;
        if k >= pb.len() && (k as f64 > lambda) && 1.0 - cum.value() < 1e-14 {
            break;
        }
    }
    Ok(PoissonDistance {
        tv: 0.5 * acc.value(),
        bound_scale: lambda.min(1.0) * (1.0 - cm.dispersion),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{binomial_pmf, poisson_binomial_enumerate};
    use crate::weights::{materialize_power_law, PowerLawModel};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_probs() {
        let (p1, p2) = (0.3, 0.8);
        let pmf = pb_pmf(&[p1, p2]).unwrap();
        assert!((pmf[0] - (1.0 - p1) * (1.0 - p2)).abs() < 1e-16);
        assert!((pmf[1] - (p1 * (1.0 - p2) + (1.0 - p1) * p2)).abs() < 1e-16);
        assert!((pmf[2] - p1 * p2).abs() < 1e-16);
    }

    #[test]
    fn iid_is_binomial() {
        let pmf = pb_pmf(&[0.37; 40]).unwrap();
        let want = binomial_pmf(40, 0.37);
        for (a, b) in pmf.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn matches_enumeration_eleven() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let probs: Vec<f64> = (0..11).map(|_| rng.random::<f64>()).collect();
        let pmf = pb_pmf(&probs).unwrap();
        let oracle = poisson_binomial_enumerate(&probs);
        for (a, b) in pmf.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn homogeneous_conditional() {
        let p: f64 = 0.09;
        let pi = WeightVector::homogeneous(p.sqrt(), 30).unwrap();
        let law = conditional_degree_law(&pi, 4).unwrap();
        assert!((law.mean - 29.0 * p).abs() < 1e-12);
        let m = conditional_moments(&pi, 4).unwrap();
        assert!((m.dispersion - (1.0 - p)).abs() < 1e-12);
        assert!(m.disp_gap_lower <= 1.0 - m.dispersion + 1e-15);
        assert!(1.0 - m.dispersion <= m.disp_gap_upper + 1e-15);
    }

    #[test]
    fn power_law_mean_envelope() {
        let pi = materialize_power_law(&PowerLawModel::new(0.5, 1.0).unwrap(), 1000).unwrap();
        let m = conditional_moments(&pi, 0).unwrap();
        let lead = 1.0 / 0.5 * 1000f64.sqrt();
        // Correction is O(n^{γ-1}) relative.
        assert!((m.mean / lead - 1.0).abs() < 3.0 * 1000f64.powf(-0.5), "{}", m.mean);
    }

    #[test]
    fn isolated_node_is_degenerate() {
        let pi = WeightVector::new(vec![0.5, 0.0, 0.0], "t", None).unwrap();
        assert!(matches!(conditional_moments(&pi, 0), Err(Error::Degenerate(_))));
        assert!(matches!(conditional_moments(&pi, 5), Err(Error::Index { .. })));
    }

    #[test]
    fn marginal_examples() {
        assert!((marginal_moments(0.5, 1.0 / 12.0, 101).unwrap().mean - 25.0).abs() < 1e-13);
        let p: f64 = 0.2;
        let m = marginal_moments(p.sqrt(), 0.0, 40).unwrap();
        assert!((m.dispersion - (1.0 - p)).abs() < 1e-15);
        assert!((m.covariance - p * (1.0 - p)).abs() < 1e-15);
        assert!(marginal_moments(0.5, 0.3, 10).is_err());
    }

    #[test]
    fn marginal_covariance_by_simulation_free_check() {
        // Two-point mixing law: π ∈ {0.2, 0.8} equally likely. Check the pair
        // covariance against direct conditioning on three nodes.
        let (lo, hi) = (0.2f64, 0.8f64);
        let mu = 0.5 * (lo + hi);
        let s2 = 0.25 * (hi - lo) * (hi - lo);
        let n = 3usize;
        let mut e_didj = 0.0;
        let mut e_d = 0.0;
        for mask in 0..8u32 {
            let p: Vec<f64> = (0..3).map(|b| if mask >> b & 1 == 1 { hi } else { lo }).collect();
            // E[d0 d1 | π] = Var-free expansion over the three edges.
            let (a01, a02, a12) = (p[0] * p[1], p[0] * p[2], p[1] * p[2]);
            let ed0 = a01 + a02;
            let ed1 = a01 + a12;
            e_didj += (ed0 * ed1 + a01 * (1.0 - a01)) / 8.0;
            e_d += ed0 / 8.0;
        }
        let cov = e_didj - e_d * e_d;
        let m = marginal_moments(mu, s2, n).unwrap();
        assert!((m.covariance - cov).abs() < 1e-14, "{} vs {cov}", m.covariance);
    }

    #[test]
    fn tv_rare_events() {
        let base = WeightVector::homogeneous(0.3, 50).unwrap();
        let small = WeightVector::homogeneous(0.03, 50).unwrap();
        let a = tv_distance_to_poisson(&base, 0).unwrap();
        let b = tv_distance_to_poisson(&small, 0).unwrap();
        assert!(b.tv < a.tv);
        assert!(b.tv < 1e-3);
        assert!(a.tv / a.bound_scale < 1.0);
    }

    fn weights() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(0.0f64..=1.0, 2..60)
    }

    proptest! {
        #[test]
        fn exact_law_matches_identities(v in weights(), idx in 0usize..60) {
            let pi = WeightVector::new(v, "prop", None).unwrap();
            let i = idx % pi.len();
            let law = conditional_degree_law(&pi, i).unwrap();
            prop_assert!(law.pmf.iter().all(|&p| p >= 0.0));
            prop_assert!((law.mass - 1.0).abs() < 1e-10);
            if let Ok(m) = conditional_moments(&pi, i) {
                prop_assert!((law.mean - m.mean).abs() < 1e-9);
                prop_assert!((law.variance - m.variance).abs() < 1e-9);
                prop_assert!(m.variance <= m.mean + 1e-12);
                let gap = 1.0 - m.dispersion;
                prop_assert!(m.disp_gap_lower <= gap + 1e-12);
                prop_assert!(gap <= m.disp_gap_upper + 1e-12);
                prop_assert!((m.dispersion - m.variance / m.mean).abs() < 1e-9);
            }
        }

        #[test]
        fn covariance_at_most_quarter(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let pi = WeightVector::new(vec![a, b, 0.5], "prop", None).unwrap();
            prop_assert!(degree_covariance(&pi, 0, 1).unwrap() <= 0.25);
        }

        #[test]
        fn marginal_correlation_bounded(mu in 0.01f64..0.99, frac in 0.0f64..=1.0, n in 3usize..5000) {
            let m = marginal_moments(mu, frac * mu * (1.0 - mu), n).unwrap();
            prop_assert!(m.variance >= 0.0);
            prop_assert!(m.correlation.abs() <= 1.0);
            prop_assert!((m.dispersion - m.variance / m.mean).abs() < 1e-9 * m.dispersion);
        }
    }
}
