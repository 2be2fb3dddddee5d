//! Closed-form and reproduction approximations to the marginal degree law.

use rayon::prelude::*;

use super::law::{DegreeLaw, Provenance};
use super::mixture::{mixed_binomial_entry, pmf_quad_config};
use crate::error::{Error, Result};
use crate::specfun::lgamma::ln_gamma_ratio;
use crate::specfun::{iota, ln_reg_inc_beta, reg_inc_beta, std_normal_sf};
use crate::weights::{BoundedParetoModel, MixingDensity, SmoothDensityModel};

/// Entries whose log tail falls below this are reported as zero.
pub(crate) const LN_NEGLIGIBLE: f64 = -700.0;

/// `ln (I_{x_hi} - I_{x_lo})(a, b)` without cancellation when both are near one.
fn ln_beta_difference(x_lo: f64, x_hi: f64, a: f64, b: f64) -> Result<f64> {
    let ln_hi = ln_reg_inc_beta(x_hi, a, b)?;
    let ln_lo = if x_lo > 0.0 {
        ln_reg_inc_beta(x_lo, a, b)?
    } else {
        f64::NEG_INFINITY
    };
    if ln_lo > -std::f64::consts::LN_2 {
        // Both tails are mostly mass; difference of the upper complements.
        let q_lo = reg_inc_beta(1.0 - x_lo, b, a)?;
        let q_hi = reg_inc_beta(1.0 - x_hi, b, a)?;
        return Ok((q_lo - q_hi).max(0.0).ln());
    }
    Ok(ln_hi + (-(ln_lo - ln_hi).exp()).ln_1p())
}

/// `ln (1 + ε)` where `1 + ε = n^{1-β} k^β Γ(n)Γ(k+1-β) / (Γ(n+1-β)Γ(k+1))`.
fn ln_one_plus_eps(beta: f64, n: f64, k: f64) -> f64 {
    (1.0 - beta) * n.ln() + beta * k.ln() + ln_gamma_ratio(n + 1.0 - beta, beta - 1.0)
        - ln_gamma_ratio(k + 1.0 - beta, beta)
}

/// Leading term `β(β-1)(n-k)/(2nk)` of the Pareto correction.
pub fn pareto_eps_leading(beta: f64, n: usize, k: usize) -> f64 {
    let (nf, kf) = (n as f64, k as f64);
    beta * (beta - 1.0) * (nf - kf) / (2.0 * nf * kf)
}

/// Exact value of the Pareto correction `ε_{k,n}(β)`.
pub fn pareto_eps_exact(beta: f64, n: usize, k: usize) -> f64 {
    ln_one_plus_eps(beta, n as f64, k as f64).exp_m1()
}

/// Marginal degree law when `π` follows a bounded Pareto density, via the
/// incomplete-Beta closed form.
///
/// For `β < k` the entry is `c (k/(nμ))^{-β} (I_{μb} - I_{μa})(k+1-β, n-k)
/// (1 + ε) / (nμ)` with the leading term `ε = β(β-1)(n-k)/(2nk)`. The
/// entries with `k ≤ β` come from quadrature and are listed in the metadata
/// under `quadrature_entries`.
///
/// Extra columns: `closed_form_bare` (without the `1 + ε` factor),
/// `closed_form_exact` (with `ε` from its Gamma-ratio definition, which is
/// the mixture integral itself), `eps_exact` and `eps_leading`.
pub fn pareto_population_pmf(model: &BoundedParetoModel, n: usize) -> Result<DegreeLaw> {
    if n < 2 {
        return Err(Error::domain("pareto_population_pmf", format!("need n >= 2, got {n}")));
    }
    let beta = model.beta;
    let mu = model.mean();
    let nf = n as f64;
    let nmu = nf * mu;
    let cfg = pmf_quad_config();

    struct Entry {
        pmf: f64,
        bare: f64,
        exact: f64,
        eps: f64,
        eps_lead: f64,
        fallback: bool,
    }

    let rows: Vec<Entry> = (0..n)
        .into_par_iter()
        .map(|k| -> Result<Entry> {
            let kf = k as f64;
            if kf <= beta {
                let v = mixed_binomial_entry(model, n, k, &cfg)?;
                return Ok(Entry {
                    pmf: v,
                    bare: f64::NAN,
                    exact: f64::NAN,
                    eps: f64::NAN,
                    eps_lead: f64::NAN,
                    fallback: true,
                });
            }
            let ln_diff = ln_beta_difference(mu * model.a, mu * model.b, kf + 1.0 - beta, nf - kf)?;
            let ln_bare = model.c.ln() + beta * (nmu / kf).ln() + ln_diff - nmu.ln();
            let ln_eps = ln_one_plus_eps(beta, nf, kf);
            let eps_lead = pareto_eps_leading(beta, n, k);
            let bare = ln_bare.exp();
            Ok(Entry {
                pmf: bare * (1.0 + eps_lead),
                bare,
                exact: (ln_bare + ln_eps).exp(),
                eps: ln_eps.exp_m1(),
                eps_lead,
                fallback: false,
            })
        })
        .collect::<Result<_>>()?;

    let fallback: Vec<usize> = rows.iter().enumerate().filter(|(_, r)| r.fallback).map(|(k, _)| k).collect();
    Ok(DegreeLaw::new(rows.iter().map(|r| r.pmf).collect(), Provenance::ParetoClosedForm, n)
        .with_column("closed_form_bare", rows.iter().map(|r| r.bare).collect())
        .with_column("closed_form_exact", rows.iter().map(|r| r.exact).collect())
        .with_column("eps_exact", rows.iter().map(|r| r.eps).collect())
        .with_column("eps_leading", rows.iter().map(|r| r.eps_lead).collect())
        .with_meta("quadrature_entries", fallback)
        .with_meta("mixing_mean", mu)
        .with_meta("lower_censoring_k", nmu * model.a)
        .with_meta("upper_censoring_k", nmu * model.b))
}

pub(crate) struct Repro {
    pub pmf: Vec<f64>,
    pub arg: Vec<f64>,
    pub bound: Vec<f64>,
}

/// The reproduction formula `nμ P(d=k) = f((k+1)ι_{k,n}(μ)/((n+1)μ)) I_μ(k+1, n-k)`
/// for an arbitrary success scale `mu`.
///
/// `bound` holds `(c/(nμ)) · arg · I_μ / (nμ)`, the entrywise error bound
/// in pmf units. Entries past the mean whose tail is negligible are zero and
/// end the scan.
pub(crate) fn repro(model: &SmoothDensityModel, mu: f64, n: usize) -> Result<Repro> {
    let nf = n as f64;
    let nmu = nf * mu;
    let c = model.c_constant();
    let mut pmf = vec![0.0; n];
    let mut arg = vec![f64::NAN; n];
    let mut bound = vec![0.0; n];
    const CHUNK: usize = 256;
    let mut start = 0;
    while start < n {
        let end = (start + CHUNK).min(n);
        let block: Vec<Option<(f64, f64, f64)>> = (start..end)
            .into_par_iter()
            .map(|k| -> Result<Option<(f64, f64, f64)>> {
                let kf = k as f64;
                let ln_i = ln_reg_inc_beta(mu, kf + 1.0, nf - kf)?;
                if ln_i < LN_NEGLIGIBLE {
                    return Ok(None);
                }
                let t = iota(k as u64, n as u64, mu)?;
                let a = ((kf + 1.0) * t / ((nf + 1.0) * mu)).clamp(0.0, 1.0);
                let i = ln_i.exp();
                Ok(Some((model.density(a) * i / nmu, a, c / nmu * a * i / nmu)))
            })
            .collect::<Result<_>>()?;
        let mut done = false;
        for (j, row) in block.into_iter().enumerate() {
            let k = start + j;
            match row {
                Some((p, a, b)) => {
                    pmf[k] = p;
                    arg[k] = a;
                    bound[k] = b;
                }
                None if k as f64 > nmu => done = true,
                None => {}
            }
        }
        if done {
            break;
        }
        start = end;
    }
    Ok(Repro { pmf, arg, bound })
}

/// Reproduction approximation to the marginal law for a smooth mixing density.
///
/// Extra columns: `arg` (the point where `f` is evaluated), `bound` (the
/// entrywise error bound) and `heuristic`, the simplified comparison curve
/// `f(k/(nμ) ∧ 1) (1 - Φ((k-nμ)/√(nμ(1-μ)))) / (nμ)`, which carries no
/// error guarantee.
///
/// ```
/// use degreenet::degree_laws::smooth_repro_pmf;
/// use degreenet::specfun::reg_inc_beta;
/// use degreenet::weights::SmoothDensityModel;
/// let law = smooth_repro_pmf(&SmoothDensityModel::uniform(), 40).unwrap();
/// let want = reg_inc_beta(0.5, 4.0, 37.0).unwrap() / 20.0;
/// assert!((law.pmf[3] - want).abs() < 1e-15);
/// ```
pub fn smooth_repro_pmf(model: &SmoothDensityModel, n: usize) -> Result<DegreeLaw> {
    if n < 2 {
        return Err(Error::domain("smooth_repro_pmf", format!("need n >= 2, got {n}")));
    }
    let mu = model.mean();
    let r = repro(model, mu, n)?;
    let nmu = n as f64 * mu;
    let sd = (nmu * (1.0 - mu)).sqrt();
    let heuristic = (0..n)
        .map(|k| {
            let kf = k as f64;
            model.density((kf / nmu).min(1.0)) * std_normal_sf((kf - nmu) / sd) / nmu
        })
        .collect();
    Ok(DegreeLaw::new(r.pmf, Provenance::SmoothRepro, n)
        .with_column("arg", r.arg)
        .with_column("bound", r.bound)
        .with_column("heuristic", heuristic)
        .with_meta("mixing_mean", mu)
        .with_meta("c_constant", model.c_constant()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree_laws::mixture::mixed_binomial_pmf;
    use proptest::prelude::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn beta_zero_exact() {
        let m = BoundedParetoModel::new(0.0, 0.2, 0.7).unwrap();
        let n = 150;
        let law = pareto_population_pmf(&m, n).unwrap();
        let quad = mixed_binomial_pmf(&m, n).unwrap();
        for k in 1..n {
            if quad[k] > 1e-12 {
                assert!(rel(law.pmf[k], quad[k]) < 1e-9, "k={k}");
                assert!(law.column("eps_exact").unwrap()[k].abs() < 1e-12);
            }
        }
    }

    #[test]
    fn beta_one_exact() {
        let m = BoundedParetoModel::new(1.0, 0.25, 1.0).unwrap();
        let n = 200;
        let law = pareto_population_pmf(&m, n).unwrap();
        let quad = mixed_binomial_pmf(&m, n).unwrap();
        for k in 2..n {
            if quad[k] > 1e-12 {
                assert!(rel(law.pmf[k], quad[k]) < 1e-9, "k={k}");
                assert!(law.column("eps_exact").unwrap()[k].abs() < 1e-12);
            }
        }
        assert_eq!(law.metadata["quadrature_entries"], serde_json::json!([0, 1]));
    }

    #[test]
    fn bare_form_within_eps() {
        for beta in [2.0, 3.0] {
            let m = BoundedParetoModel::new(beta, 1.0 / 3.0, 1.0).unwrap();
            let n = 400;
            let law = pareto_population_pmf(&m, n).unwrap();
            let quad = mixed_binomial_pmf(&m, n).unwrap();
            let bare = law.column("closed_form_bare").unwrap();
            let eps = law.column("eps_exact").unwrap();
            for k in (beta as usize + 1)..n {
                if quad[k] > 1e-12 {
                    assert!(rel(bare[k], quad[k]) <= eps[k].abs() + 1e-9, "β={beta} k={k}");
                    let exact = law.column("closed_form_exact").unwrap()[k];
                    assert!(rel(exact, quad[k]) < 1e-9, "β={beta} k={k}");
                    let lead = law.column("eps_leading").unwrap()[k];
                    assert!(rel(law.pmf[k], quad[k]) <= (eps[k] - lead).abs() * 1.01 + 1e-9, "β={beta} k={k}");
                }
            }
        }
    }

    #[test]
    fn eps_leading_order() {
        for beta in [2.0, 3.0, 5.0] {
            for k in [20usize, 40, 80, 160] {
                let gap = pareto_eps_exact(beta, 1000, k) - pareto_eps_leading(beta, 1000, k);
                let scale = beta * beta * (beta - 1.0) * (beta + 1.0) / (k * k) as f64;
                assert!(gap.abs() < scale, "β={beta} k={k}: {gap}");
            }
        }
    }

    #[test]
    fn uniform_repro_is_exact() {
        let n = 300;
        let law = smooth_repro_pmf(&SmoothDensityModel::uniform(), n).unwrap();
        let quad = mixed_binomial_pmf(&SmoothDensityModel::uniform(), n).unwrap();
        for k in 0..n {
            assert!((law.pmf[k] - quad[k]).abs() < 1e-13, "k={k}");
        }
    }

    #[test]
    fn linear_density_bound() {
        // f = (2/3)(1+π): f'' = 0 so the reproduction bound is zero, and the
        // remaining error is the linearization of ι, of order 1/(n+2).
        let m = SmoothDensityModel::polynomial(vec![2.0 / 3.0, 2.0 / 3.0], None).unwrap();
        assert!((m.mean() - 5.0 / 9.0).abs() < 1e-15);
        let n = 500;
        let law = smooth_repro_pmf(&m, n).unwrap();
        let quad = mixed_binomial_pmf(&m, n).unwrap();
        let nmu = n as f64 * m.mean();
        for k in 0..n {
            let gap = nmu * (law.pmf[k] - quad[k]).abs();
            assert!(gap < 1e-9, "k={k} gap={gap}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]
        #[test]
        fn reproduction_bound_holds(c1 in -0.4f64..0.4, c2 in -0.4f64..0.4, n in 60usize..240) {
            // f(π) = 1 + c1(2π-1) + c2(6π²-6π+1), shifted Legendre terms integrate to zero.
            let coeffs = vec![1.0 - c1 + c2, 2.0 * c1 - 6.0 * c2, 6.0 * c2];
            let m = SmoothDensityModel::polynomial(coeffs, None).unwrap();
            let law = smooth_repro_pmf(&m, n).unwrap();
            let quad = mixed_binomial_pmf(&m, n).unwrap();
            let bound = law.column("bound").unwrap();
            for k in 0..n {
                prop_assert!((law.pmf[k] - quad[k]).abs() <= bound[k] + 1e-13, "k={}", k);
            }
        }
    }
}
