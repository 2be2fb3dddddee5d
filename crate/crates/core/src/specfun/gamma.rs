//! Regularized incomplete Gamma functions, Poisson tail ratios and the
//! asymptotic expansion of Gamma-function ratios.

use super::lgamma::ln_dpois_raw;
use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

fn check_args(func: &'static str, a: f64, x: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::domain(func, format!("need a > 0, got {a}")));
    }
    if !(x >= 0.0) || x.is_infinite() {
        return Err(Error::domain(func, format!("need finite x >= 0, got {x}")));
    }
    Ok(())
}

/// `Σ x^j / ((a+1)...(a+j))`, so that `P(a,x) = e^{-x} x^a / Γ(a+1) · S`.
fn series(a: f64, x: f64) -> Result<f64> {
    let mut ap = a;
    let mut del = 1.0;
    let mut sum = 1.0;
    for _ in 0..MAX_ITER {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if del.abs() < sum.abs() * EPS {
            return Ok(sum);
        }
    }
    Err(Error::NoConvergence {
        func: "reg_inc_gamma",
        detail: format!("series at a = {a}, x = {x}"),
    })
}

/// Continued fraction `h` with `Q(a,x) = e^{-x} x^a / Γ(a) · h`.
fn cont_frac(a: f64, x: f64) -> Result<f64> {
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..=MAX_ITER {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an.mul_add(d, b);
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        func: "reg_inc_gamma",
        detail: format!("continued fraction at a = {a}, x = {x}"),
    })
}

/// `(ln P, ln Q)` where only the directly computed side is accurate to full
/// relative precision; the other is obtained by complement.
fn ln_pq(a: f64, x: f64) -> Result<(f64, f64)> {
    if x == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    let ln_pre = ln_dpois_raw(a, x);
    if x < a + 1.0 {
        let ln_p = ln_pre + series(a, x)?.ln();
        Ok((ln_p, (-ln_p.exp()).ln_1p()))
    } else {
        let ln_q = ln_pre + a.ln() + cont_frac(a, x)?.ln();
        Ok(((-ln_q.exp()).ln_1p(), ln_q))
    }
}

/// Regularized lower incomplete Gamma function `P(a, x)`.
///
/// For integer `a = k+1` this is `P(Y >= k+1)` with `Y ~ Poisson(x)`.
pub fn reg_inc_gamma_lower(a: f64, x: f64) -> Result<f64> {
    check_args("reg_inc_gamma_lower", a, x)?;
    if x == 0.0 {
        return Ok(0.0);
    }
    if a == 1.0 {
        return Ok(-(-x).exp_m1());
    }
    let (ln_p, ln_q) = ln_pq(a, x)?;
    Ok(if x < a + 1.0 { ln_p.exp() } else { 1.0 - ln_q.exp() })
}

/// Regularized upper incomplete Gamma function `Q(a, x) = 1 - P(a, x)`.
pub fn reg_inc_gamma_upper(a: f64, x: f64) -> Result<f64> {
    check_args("reg_inc_gamma_upper", a, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    let (ln_p, ln_q) = ln_pq(a, x)?;
    Ok(if x < a + 1.0 { 1.0 - ln_p.exp() } else { ln_q.exp() })
}

/// `ln P(a, x)`, accurate where `P` itself underflows.
pub fn ln_reg_inc_gamma_lower(a: f64, x: f64) -> Result<f64> {
    check_args("ln_reg_inc_gamma_lower", a, x)?;
    Ok(ln_pq(a, x)?.0)
}

/// `ρ_k(λ) = P(k+2, λ) / P(k+1, λ) = 1 - P(Y = k+1) / P(Y >= k+1)`.
pub fn rho(k: u64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::domain("rho", format!("need lambda > 0, got {lambda}")));
    }
    let a = (k + 1) as f64;
    let ln_tail = ln_reg_inc_gamma_lower(a, lambda)?;
    if !ln_tail.is_finite() {
        return Err(Error::Underflow {
            func: "rho",
            detail: format!("ln P(k+1, λ) not finite at k = {k}, λ = {lambda}"),
        });
    }
    let hazard = (ln_dpois_raw(a, lambda) - ln_tail).exp();
    if hazard <= 0.5 {
        return Ok(1.0 - hazard);
    }
    let ln_next = ln_reg_inc_gamma_lower(a + 1.0, lambda)?;
    if !ln_next.is_finite() {
        return Err(Error::Underflow {
            func: "rho",
            detail: format!("ln P(k+2, λ) not finite at k = {k}, λ = {lambda}"),
        });
    }
    Ok((ln_next - ln_tail).exp())
}

fn check_ratio(func: &'static str, z: f64, beta: f64) -> Result<()> {
    if !(beta >= 0.0) || !(z > beta) || !z.is_finite() {
        return Err(Error::domain(func, format!("need z > beta >= 0, got z = {z}, beta = {beta}")));
    }
    Ok(())
}

/// `Γ(z)/Γ(z-β)` expanded about `(z-β)^β` through second order in `1/z`.
///
/// ```
/// use degreenet::specfun::gamma_ratio_expansion;
/// assert_eq!(gamma_ratio_expansion(7.5, 1.0).unwrap(), 6.5);
/// ```
pub fn gamma_ratio_expansion(z: f64, beta: f64) -> Result<f64> {
    check_ratio("gamma_ratio_expansion", z, beta)?;
    let b = beta;
    let c1 = b * (b - 1.0) / (2.0 * z);
    let c2 = (3.0 * b + 2.0) * (b + 1.0) * b * (b - 1.0) / (24.0 * z * z);
    Ok((z - b).powf(b) * (1.0 + c1 + c2))
}

/// The same ratio expanded about `z^β`, which carries a smaller constant in
/// the remainder.
pub fn gamma_ratio_expansion_z_form(z: f64, beta: f64) -> Result<f64> {
    check_ratio("gamma_ratio_expansion_z_form", z, beta)?;
    let b = beta;
    let c1 = -b * (b + 1.0) / (2.0 * z);
    let c2 = (3.0 * b + 2.0) * (b + 1.0) * b * (b - 1.0) / (24.0 * z * z);
    Ok(z.powf(b) * (1.0 + c1 + c2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{gamma_ratio_product, poisson_pmf, poisson_tail};

    #[test]
    fn exponential_cdf() {
        for &x in &[1e-8, 0.3, 1.0, 7.0, 40.0] {
            let got = reg_inc_gamma_lower(1.0, x).unwrap();
            assert!((got - (1.0 - (-x).exp())).abs() < 1e-15);
        }
        assert_eq!(reg_inc_gamma_lower(3.2, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn poisson_tail_identity() {
        let oracle = poisson_tail(4, 2.5);
        assert!((reg_inc_gamma_lower(4.0, 2.5).unwrap() - oracle).abs() < 1e-14);
        for &lam in &[0.01, 0.7, 3.0, 12.0, 60.0] {
            for k in 0..40usize {
                let got = reg_inc_gamma_lower((k + 1) as f64, lam).unwrap();
                let want = poisson_tail(k + 1, lam);
                assert!((got - want).abs() < 1e-13, "k={k} λ={lam}");
            }
        }
    }

    #[test]
    fn upper_complements_lower() {
        for &(a, x) in &[(0.5, 0.2), (3.0, 8.0), (100.0, 90.0), (20.0, 40.0)] {
            let p = reg_inc_gamma_lower(a, x).unwrap();
            let q = reg_inc_gamma_upper(a, x).unwrap();
            assert!((p + q - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn rho_closed_form_at_zero() {
        for lam in [0.01f64, 0.5, 2.0, 30.0] {
            let want = 1.0 - lam * (-lam).exp() / (-(-lam).exp_m1());
            assert!((rho(0, lam).unwrap() - want).abs() < 1e-14, "λ={lam}");
        }
    }

    #[test]
    fn rho_tail_sums() {
        let (k, lam) = (3usize, 2.0);
        let direct = poisson_tail(k + 2, lam) / poisson_tail(k + 1, lam);
        assert!((rho(3, lam).unwrap() - direct).abs() < 1e-13);
        let pmf = poisson_pmf(lam, k + 1);
        let alt = 1.0 - pmf[k + 1] / poisson_tail(k + 1, lam);
        assert!((rho(3, lam).unwrap() - alt).abs() < 1e-13);
    }

    #[test]
    fn rho_in_unit_interval_deep_tail() {
        for &lam in &[1e-4, 0.3, 5.0, 30.0] {
            for k in [0u64, 1, 10, 100, 1000] {
                let r = rho(k, lam).unwrap();
                assert!(r > 0.0 && r < 1.0, "k={k} λ={lam}: {r}");
            }
        }
        // 1 - ρ_0(200) ≈ 3e-85 rounds away, but the ratio stays well defined.
        assert_eq!(rho(0, 200.0).unwrap(), 1.0);
        assert!(rho(5000, 200.0).unwrap() < 0.05);
    }

    #[test]
    fn ratio_trivial_cases() {
        assert_eq!(gamma_ratio_expansion(12.0, 0.0).unwrap(), 1.0);
        assert_eq!(gamma_ratio_expansion(12.0, 1.0).unwrap(), 11.0);
        assert!(gamma_ratio_expansion(3.0, 3.0).is_err());
    }

    #[test]
    fn ratio_at_hundred() {
        let exact = gamma_ratio_product(100.0, 3);
        assert_eq!(exact, 941_094.0);
        let rel = (gamma_ratio_expansion(100.0, 3.0).unwrap() / exact - 1.0).abs();
        // The remainder at this z is a few times 1e-5.
        assert!(rel < 1e-4, "{rel}");
        let rel_z = (gamma_ratio_expansion_z_form(100.0, 3.0).unwrap() / exact - 1.0).abs();
        assert!(rel_z < 1e-5, "{rel_z}");
    }
}
