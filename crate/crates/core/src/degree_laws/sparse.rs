//! Degree laws of rescaled (sparse) networks and their mixed Poisson limit.

use rayon::prelude::*;
use serde::Serialize;

use super::approx::{repro, LN_NEGLIGIBLE};
use super::law::{DegreeLaw, Provenance};
use super::mixture::{mixed_poisson_entry, pmf_quad_config};
use crate::error::{Error, Result};
use crate::quad::integrate_log;
use crate::specfun::lgamma::ln_gamma_ratio;
use crate::specfun::{ln_reg_inc_gamma_lower, reg_inc_gamma_lower, rho};
use crate::weights::{MixingDensity, ScalingMap, SmoothDensityModel};

/// Which sparse approximation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SparseForm {
    /// Incomplete Beta with `μ` replaced by `μ_n`.
    Beta,
    /// Incomplete Gamma with the finite-`n` censoring correction.
    Gamma,
}

impl SparseForm {
    /// Beta form through `γ = 1/4` inclusive, Gamma form above.
    pub fn for_gamma(gamma: f64) -> Self {
        if gamma <= 0.25 {
            SparseForm::Beta
        } else {
            SparseForm::Gamma
        }
    }
}

fn check_scale(map: &ScalingMap, n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::domain("sparse_pmf", format!("need n >= 2, got {n}")));
    }
    if map.scale(n) > 1.0 {
        return Err(Error::domain(
            "sparse_pmf",
            format!("n = {n} too small: scale √(ζ/n^(2γ)) = {} exceeds 1", map.scale(n)),
        ));
    }
    Ok(())
}

/// Approximate degree law of the rescaled model `π ↦ √(ζ/n^{2γ}) π`.
///
/// Requires `γ ∈ (0, 1/2]` and no additive shift. The Beta form is used for
/// `γ ≤ 1/4`, the Gamma form otherwise; see [`sparse_pmf_form`] to force one.
pub fn sparse_pmf(model: &SmoothDensityModel, map: &ScalingMap, n: usize) -> Result<DegreeLaw> {
    if !(map.gamma > 0.0 && map.gamma <= 0.5) || map.zeta_prime != 0.0 {
        return Err(Error::Regime {
            gamma: map.gamma,
            zeta_prime: map.zeta_prime,
        });
    }
    sparse_pmf_form(model, map, n, SparseForm::for_gamma(map.gamma))
}

/// [`sparse_pmf`] with an explicit choice of form, also allowing `γ = 0`.
pub fn sparse_pmf_form(model: &SmoothDensityModel, map: &ScalingMap, n: usize, form: SparseForm) -> Result<DegreeLaw> {
    if !(0.0..=0.5).contains(&map.gamma) || map.zeta_prime != 0.0 {
        return Err(Error::Regime {
            gamma: map.gamma,
            zeta_prime: map.zeta_prime,
        });
    }
    check_scale(map, n)?;
    let mu = model.mean();
    let mu_n = map.mu_n(mu, n);
    let law = match form {
        SparseForm::Beta => {
            let r = repro(model, mu_n, n)?;
            DegreeLaw::new(r.pmf, Provenance::SparseBeta, n)
                .with_column("arg", r.arg)
                .with_column("bound", r.bound)
        }
        SparseForm::Gamma => {
            let (pmf, arg) = gamma_form(model, mu_n, n)?;
            DegreeLaw::new(pmf, Provenance::SparseGamma, n).with_column("arg", arg)
        }
    };
    let nf = n as f64;
    Ok(law
        .with_meta("form", form)
        .with_meta("mu_n", mu_n)
        .with_meta("effective_range", nf * mu_n)
        .with_meta("sparse_mean", nf.powf(1.0 - 2.0 * map.gamma) * map.zeta * mu * mu))
}

/// `n_k μ_n P(d=k) = f((k+1)ρ_k(n_k μ_n)/(n_k μ_n)) P(k+1, n_k μ_n) Γ(n_k+k+1)/(Γ(n_k+1) n_k^k)`
/// with `n_k = n - k - 1`.
fn gamma_form(model: &SmoothDensityModel, mu_n: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut pmf = vec![0.0; n];
    let mut arg = vec![f64::NAN; n];
    const CHUNK: usize = 256;
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let block: Vec<Option<(f64, f64)>> = (start..end)
            .into_par_iter()
            .map(|k| -> Result<Option<(f64, f64)>> {
                let nk = (n - k - 1) as f64;
                if nk == 0.0 {
                    return Ok(None);
                }
                let kf = k as f64;
                let lambda = nk * mu_n;
                let ln_p = ln_reg_inc_gamma_lower(kf + 1.0, lambda)?;
                let ln_g = ln_gamma_ratio(nk + 1.0, kf) - kf * nk.ln();
                if ln_p + ln_g < LN_NEGLIGIBLE {
                    return Ok(None);
                }
                let a = ((kf + 1.0) * rho(k as u64, lambda)? / lambda).clamp(0.0, 1.0);
                Ok(Some((model.density(a) * (ln_p + ln_g).exp() / lambda, a)))
            })
            .collect::<Result<_>>()?;
        let mut done = false;
        for (j, row) in block.into_iter().enumerate() {
            let k = start + j;
            match row {
                Some((p, a)) => {
                    pmf[k] = p;
                    arg[k] = a;
                }
                None if k as f64 > n as f64 * mu_n => done = true,
                None => {}
            }
        }
        if done {
            break;
        }
        start = end;
    }
    Ok((pmf, arg))
}

const LIMIT_TAIL: f64 = 1e-12;

/// Smallest `k_max` for which the limiting law puts less than `1e-12` beyond
/// it, using `P(k+1, μζπ) ≤ P(k+1, μζ)`.
pub fn default_k_max(model: &SmoothDensityModel, zeta: f64) -> Result<usize> {
    let lambda = model.mean() * zeta;
    let mut k = lambda.ceil() as usize;
    while reg_inc_gamma_lower((k + 1) as f64, lambda)? >= LIMIT_TAIL {
        k += 1;
    }
    Ok(k)
}

/// Mass of the limiting law above `k_max`.
fn limit_tail(model: &SmoothDensityModel, lambda: f64, k_max: usize) -> Result<f64> {
    let a = (k_max + 1) as f64;
    let ln_f = |t: f64| -> f64 {
        if t <= 0.0 {
            return f64::NEG_INFINITY;
        }
        ln_reg_inc_gamma_lower(a, lambda * t).unwrap_or(f64::NEG_INFINITY) + model.density(t).ln()
    };
    let scale = [1.0, 1.0 - 1e-9, 0.5]
        .iter()
        .map(|&t| ln_f(t))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let (ln_v, _) = integrate_log(ln_f, 0.0, 1.0, &[0.5], scale, &pmf_quad_config())?;
    Ok(ln_v.exp())
}

/// Limit of the degree law as `n → ∞` with `π ↦ √(ζ/n) π`: a mixed Poisson
/// law with rate `μζπ`, `π ~ f`.
///
/// Extra columns: `approx`, the Gamma-form approximation
/// `f((k+1)ρ_k(μζ)/(μζ)) P(k+1, μζ)/(μζ)`, and `arg`. Its relative error
/// bound `c/ζ` with `c = sup|f''|/(2μ inf f)` is in the metadata as
/// `relative_bound` (null when `f` touches zero).
///
/// ```
/// use degreenet::degree_laws::extreme_sparse_pmf;
/// use degreenet::weights::SmoothDensityModel;
/// let law = extreme_sparse_pmf(&SmoothDensityModel::uniform(), 2.0, 40).unwrap();
/// assert!((law.pmf[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-10);
/// ```
pub fn extreme_sparse_pmf(model: &SmoothDensityModel, zeta: f64, k_max: usize) -> Result<DegreeLaw> {
    if !(zeta > 0.0 && zeta.is_finite()) {
        return Err(Error::domain("extreme_sparse_pmf", format!("need zeta > 0, got {zeta}")));
    }
    let mu = model.mean();
    let lambda = mu * zeta;
    let tail = limit_tail(model, lambda, k_max)?;
    if tail > LIMIT_TAIL {
        return Err(Error::KMaxTooSmall {
            k_max,
            tail,
            limit: LIMIT_TAIL,
        });
    }
    let cfg = pmf_quad_config();
    let pmf: Vec<f64> = (0..=k_max)
        .into_par_iter()
        .map(|k| mixed_poisson_entry(model, lambda, k, &cfg))
        .collect::<Result<_>>()?;
    let rows: Vec<(f64, f64)> = (0..=k_max)
        .map(|k| -> Result<(f64, f64)> {
            let ln_p = ln_reg_inc_gamma_lower((k + 1) as f64, lambda)?;
            if ln_p < LN_NEGLIGIBLE {
                return Ok((0.0, f64::NAN));
            }
            let a = ((k + 1) as f64 * rho(k as u64, lambda)? / lambda).clamp(0.0, 1.0);
            Ok((model.density(a) * ln_p.exp() / lambda, a))
        })
        .collect::<Result<_>>()?;
    let inf_f = model.inf_density();
    let c = model.f_second_deriv_sup() / (2.0 * mu * inf_f);
    let bound = if inf_f > 0.0 { Some(c / zeta) } else { None };
    Ok(DegreeLaw::new(pmf, Provenance::ExtremeLimit, 0)
        .with_column("approx", rows.iter().map(|r| r.0).collect())
        .with_column("arg", rows.iter().map(|r| r.1).collect())
        .with_meta("zeta", zeta)
        .with_meta("tail_mass", tail)
        .with_meta("relative_bound", bound))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree_laws::{marginal_pmf_quadrature, smooth_repro_pmf, MixingLaw};

    #[test]
    fn regime_checks() {
        let f = SmoothDensityModel::uniform();
        let bad = ScalingMap::new(0.6, 1.0, 0.0, 0.0).unwrap();
        assert!(matches!(sparse_pmf(&f, &bad, 100), Err(Error::Regime { .. })));
        let shifted = ScalingMap::new(0.3, 1.0, 0.2, 1.0).unwrap();
        assert!(matches!(sparse_pmf(&f, &shifted, 100), Err(Error::Regime { .. })));
        let zero = ScalingMap::sparse(0.0, 1.0).unwrap();
        assert!(matches!(sparse_pmf(&f, &zero, 100), Err(Error::Regime { .. })));
        let big = ScalingMap::sparse(0.5, 50.0).unwrap();
        assert!(sparse_pmf(&f, &big, 20).is_err());
        assert_eq!(SparseForm::for_gamma(0.25), SparseForm::Beta);
    }

    #[test]
    fn dense_limit_recovers_repro() {
        let f = SmoothDensityModel::polynomial(vec![0.8, 0.4], None).unwrap();
        let n = 200;
        let a = sparse_pmf_form(&f, &ScalingMap::identity(), n, SparseForm::Beta).unwrap();
        let b = smooth_repro_pmf(&f, n).unwrap();
        assert_eq!(a.pmf, b.pmf);
    }

    #[test]
    fn beta_and_gamma_forms_agree() {
        // γ = 0.35, n = 10^5: the forms differ by O(k²/n + kμ_n + nμ_n²).
        let f = SmoothDensityModel::uniform();
        let map = ScalingMap::sparse(0.35, 1.0).unwrap();
        let n = 100_000;
        let b = sparse_pmf_form(&f, &map, n, SparseForm::Beta).unwrap();
        let g = sparse_pmf_form(&f, &map, n, SparseForm::Gamma).unwrap();
        let mu_n = map.mu_n(0.5, n);
        let nf = n as f64;
        for k in 0..n {
            if b.pmf[k] < 1e-12 {
                continue;
            }
            let kf = k as f64;
            let env = 4.0 * ((kf + 1.0).powi(2) / nf + (kf + 1.0) * mu_n + nf * mu_n * mu_n);
            assert!(((g.pmf[k] - b.pmf[k]) / b.pmf[k]).abs() < env, "k={k}");
        }
    }

    #[test]
    fn sparse_mean() {
        let f = SmoothDensityModel::uniform();
        for (gamma, form) in [(0.2, SparseForm::Beta), (0.35, SparseForm::Gamma)] {
            let map = ScalingMap::sparse(gamma, 1.0).unwrap();
            let n = 20_000;
            let law = sparse_pmf_form(&f, &map, n, form).unwrap();
            let want = (n as f64).powf(1.0 - 2.0 * gamma) * 0.25;
            // Approximation defect O(1/(nμ_n)) on top of O(n^{-2γ}).
            assert!((law.mean - want).abs() / want < 0.05, "γ={gamma}: {} vs {want}", law.mean);
        }
    }

    #[test]
    fn uniform_limit_closed_form() {
        let f = SmoothDensityModel::uniform();
        let zeta = 6.0;
        let k_max = default_k_max(&f, zeta).unwrap();
        let law = extreme_sparse_pmf(&f, zeta, k_max).unwrap();
        let lam = zeta / 2.0;
        for k in 0..=k_max {
            let want = reg_inc_gamma_lower((k + 1) as f64, lam).unwrap() / lam;
            assert!((law.pmf[k] - want).abs() < 1e-13, "k={k}");
            // Uniform f has c = 0, so the approximation is exact too.
            assert!((law.column("approx").unwrap()[k] - want).abs() < 1e-13);
        }
        assert!((law.mean - zeta / 4.0).abs() < 1e-9);
        assert!((law.dispersion() - (1.0 + zeta / 12.0)).abs() < 1e-9);
        assert!(matches!(extreme_sparse_pmf(&f, zeta, 3), Err(Error::KMaxTooSmall { .. })));
    }

    #[test]
    fn small_zeta_zero_mass() {
        let f = SmoothDensityModel::uniform();
        let zeta = 0.1;
        let law = extreme_sparse_pmf(&f, zeta, 12).unwrap();
        let gap = law.pmf[0] - (1.0 - 0.25 * zeta);
        // The O(ζ²) remainder is μ²ζ² E(π²)/2 to leading order.
        assert!(gap.abs() < zeta * zeta);
        assert!((gap - 0.25 * zeta * zeta / 6.0).abs() < 1e-5);
    }

    #[test]
    fn limit_approx_within_bound() {
        let f = SmoothDensityModel::polynomial(vec![0.75, 0.0, 0.75], None).unwrap();
        for zeta in [4.0, 16.0] {
            let law = extreme_sparse_pmf(&f, zeta, default_k_max(&f, zeta).unwrap()).unwrap();
            let bound = law.metadata["relative_bound"].as_f64().unwrap();
            let approx = law.column("approx").unwrap();
            for (k, (&p, &a)) in law.pmf.iter().zip(approx).enumerate() {
                if p > 1e-300 && a > 0.0 {
                    assert!((a / p - 1.0).abs() < bound, "ζ={zeta} k={k}");
                }
            }
        }
    }

    #[test]
    fn finite_n_approaches_limit() {
        let f = SmoothDensityModel::uniform();
        let zeta = 4.0;
        let limit = extreme_sparse_pmf(&f, zeta, 40).unwrap();
        let mut prev = f64::INFINITY;
        for n in [100usize, 400, 1600] {
            let p = 1.0 / (n as f64).sqrt() * zeta.sqrt();
            // Exact finite-n law of the scaled model: uniform on [0, p).
            let scaled = crate::weights::BoundedParetoModel::new(0.0, 0.0, p).unwrap();
            let exact = marginal_pmf_quadrature(&MixingLaw::BoundedPareto(scaled), n).unwrap();
            let gap = (0..10).map(|k| (exact.pmf[k] - limit.pmf[k]).abs()).fold(0.0, f64::max);
            assert!(gap < prev);
            prev = gap;
        }
    }
}
