//! Regularized incomplete Beta function and the Binomial tail quantities
//! built on it.

use super::lgamma::ln_dbinom_raw;
use super::normal::std_normal_sf;
use crate::error::{Error, Result};

const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAX_ITER: usize = 100_000;

/// `ln [x^a (1-x)^b / B(a, b)]`.
pub(crate) fn ln_beta_prefactor(x: f64, a: f64, b: f64) -> f64 {
    ln_dbinom_raw(a, a + b, x, 1.0 - x) + (a * b / (a + b)).ln()
}

/// Continued fraction for `I_x(a,b) · a / prefactor`, modified Lentz.
fn beta_cf(x: f64, a: f64, b: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = aa.mul_add(d, 1.0);
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = aa.mul_add(d, 1.0);
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
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
        func: "reg_inc_beta",
        detail: format!("continued fraction at x = {x}, a = {a}, b = {b}"),
    })
}

/// Either `ln I` directly, or the complement `1 - I` when that is the
/// accurately computed quantity.
enum Tail {
    Log(f64),
    Complement(f64),
}

fn check_args(func: &'static str, x: f64, a: f64, b: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain(func, format!("x = {x} outside [0, 1]")));
    }
    if !(a > 0.0 && a.is_finite()) || !(b > 0.0 && b.is_finite()) {
        return Err(Error::domain(func, format!("need a, b > 0, got a = {a}, b = {b}")));
    }
    Ok(())
}

fn inc_beta_tail(x: f64, a: f64, b: f64) -> Result<Tail> {
    if x == 0.0 {
        return Ok(Tail::Log(f64::NEG_INFINITY));
    }
    if x == 1.0 {
        return Ok(Tail::Log(0.0));
    }
    if b == 1.0 {
        return Ok(Tail::Log(a * x.ln()));
    }
    if a == 1.0 {
        // I = 1 - (1-x)^b
        return Ok(Tail::Complement((b * (-x).ln_1p()).exp()));
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        let cf = beta_cf(x, a, b)?;
        Ok(Tail::Log(ln_beta_prefactor(x, a, b) + cf.ln() - a.ln()))
    } else {
        let y = 1.0 - x;
        let cf = beta_cf(y, b, a)?;
        Ok(Tail::Complement(
            (ln_beta_prefactor(y, b, a) + cf.ln() - b.ln()).exp(),
        ))
    }
}

/// Regularized incomplete Beta function `I_x(a, b)`.
///
/// ```
/// use degreenet::specfun::reg_inc_beta;
/// let half = reg_inc_beta(0.5, 3.0, 3.0).unwrap();
/// assert!((half - 0.5).abs() < 1e-15);
/// ```
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    check_args("reg_inc_beta", x, a, b)?;
    Ok(match inc_beta_tail(x, a, b)? {
        Tail::Log(l) => l.exp(),
        Tail::Complement(c) => 1.0 - c,
    })
}

/// `ln I_x(a, b)`, accurate deep in the lower tail where `I` itself underflows.
pub fn ln_reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    check_args("ln_reg_inc_beta", x, a, b)?;
    Ok(match inc_beta_tail(x, a, b)? {
        Tail::Log(l) => l,
        Tail::Complement(c) => (-c).ln_1p(),
    })
}

/// `P(X >= k+1)` for `X ~ Binomial(n, mu)`, i.e. `I_mu(k+1, n-k)`.
pub fn binom_survival(k: u64, n: u64, mu: f64) -> Result<f64> {
    check_binom("binom_survival", k, n, mu)?;
    reg_inc_beta(mu, (k + 1) as f64, (n - k) as f64)
}

fn check_binom(func: &'static str, k: u64, n: u64, mu: f64) -> Result<()> {
    if k >= n {
        return Err(Error::domain(func, format!("need k < n, got k = {k}, n = {n}")));
    }
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::domain(func, format!("need 0 < mu < 1, got {mu}")));
    }
    Ok(())
}

/// Hoeffding sandwich and Normal approximation for `P(X >= k+1)`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct SurvivalBounds {
    pub lower: f64,
    pub upper: f64,
    pub normal_approx: f64,
}

/// Bounds on `I_mu(k+1, n-k)` from Hoeffding's inequality.
///
/// Below the mean the lower tail `P(X <= k)` is at most
/// `exp(-2(nμ-k)²/n)`; above it the upper tail `P(X >= k+1)` is at most
/// `exp(-2(k+1-nμ)²/n)`.
pub fn survival_bounds(k: u64, n: u64, mu: f64) -> Result<SurvivalBounds> {
    check_binom("survival_bounds", k, n, mu)?;
    let (kf, nf) = (k as f64, n as f64);
    let nmu = nf * mu;
    let (lower, upper) = if kf <= nmu {
        (-(-2.0 * (kf - nmu).powi(2) / nf).exp_m1(), 1.0)
    } else {
        (0.0, (-2.0 * (kf - nmu + 1.0).powi(2) / nf).exp())
    };
    let z = (kf - nmu) / (nmu * (1.0 - mu)).sqrt();
    Ok(SurvivalBounds {
        lower,
        upper,
        normal_approx: std_normal_sf(z),
    })
}

/// `I_x(a+1, b) / I_x(a, b)`, computed from the hazard
/// `x^a (1-x)^b / (a B(a,b) I_x(a,b))` in log space.
pub fn beta_ratio_step(x: f64, a: f64, b: f64) -> Result<f64> {
    check_args("beta_ratio_step", x, a, b)?;
    if x == 0.0 {
        return Err(Error::domain("beta_ratio_step", "ratio undefined at x = 0"));
    }
    if x == 1.0 {
        return Ok(1.0);
    }
    let ln_i = ln_reg_inc_beta(x, a, b)?;
    if !ln_i.is_finite() {
        return Err(Error::Underflow {
            func: "beta_ratio_step",
            detail: format!("ln I_x(a, b) not finite at x = {x}, a = {a}, b = {b}"),
        });
    }
    let hazard = (ln_beta_prefactor(x, a, b) - a.ln() - ln_i).exp();
    if hazard <= 0.5 {
        return Ok(1.0 - hazard);
    }
    // Ratio is small: both tails are accurate in log form.
    let ln_next = ln_reg_inc_beta(x, a + 1.0, b)?;
    if !ln_next.is_finite() {
        return Err(Error::Underflow {
            func: "beta_ratio_step",
            detail: format!("ln I_x(a+1, b) not finite at x = {x}, a = {a}, b = {b}"),
        });
    }
    Ok((ln_next - ln_i).exp())
}

/// `ι_{k,n}(μ) = I_μ(k+2, n-k) / I_μ(k+1, n-k)`.
///
/// Equivalently `1 - (1-μ) P(X = k+1) / P(X >= k+1)` with `X ~ Binomial(n, μ)`.
pub fn iota(k: u64, n: u64, mu: f64) -> Result<f64> {
    check_binom("iota", k, n, mu)?;
    if k + 1 == n {
        return Ok(mu);
    }
    beta_ratio_step(mu, (k + 1) as f64, (n - k) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::kahan_sum;
    use crate::oracle::{binomial_pmf, binomial_tail as tail_sum};

    fn binom_pmf(j: u64, n: u64, p: f64) -> f64 {
        binomial_pmf(n, p)[j as usize]
    }

    #[test]
    fn endpoints_and_symmetry() {
        assert_eq!(reg_inc_beta(1.0, 5.0, 7.0).unwrap(), 1.0);
        assert_eq!(reg_inc_beta(0.0, 5.0, 7.0).unwrap(), 0.0);
        assert!((reg_inc_beta(0.5, 3.0, 3.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn half_binomial_500_tail() {
        // P(X >= 251) for X ~ Binomial(500, 1/2), by direct tail summation.
        let oracle = tail_sum(251, 500, 0.5);
        let got = reg_inc_beta(0.5, 251.0, 250.0).unwrap();
        assert!((got - oracle).abs() < 1e-10, "{got} vs {oracle}");
    }

    #[test]
    fn survival_closed_forms() {
        let got = binom_survival(0, 10, 0.1).unwrap();
        assert!((got - (1.0 - 0.9f64.powi(10))).abs() < 1e-15);
        let got = binom_survival(9, 10, 0.3).unwrap();
        assert!((got - 0.3f64.powi(10)).abs() < 1e-20);
    }

    #[test]
    fn survival_matches_tail_sums() {
        for &(n, p) in &[(20u64, 0.3), (100, 0.07), (500, 0.5), (1000, 0.9)] {
            for k in (0..n).step_by((n / 17).max(1) as usize) {
                let got = binom_survival(k, n, p).unwrap();
                let oracle = tail_sum(k + 1, n, p);
                assert!((got - oracle).abs() < 1e-13, "n={n} p={p} k={k}");
                if oracle > 1e-290 {
                    assert!(((got - oracle) / oracle).abs() < 1e-11, "rel n={n} p={p} k={k}");
                }
            }
        }
    }

    #[test]
    fn survival_complements_cdf() {
        let (n, p) = (60u64, 0.35);
        for k in 0..n {
            let cdf = kahan_sum((0..=k).map(|j| binom_pmf(j, n, p)));
            assert!((binom_survival(k, n, p).unwrap() + cdf - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn domain_errors() {
        assert!(reg_inc_beta(1.5, 1.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 0.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 1.0, -2.0).is_err());
        assert!(binom_survival(10, 10, 0.5).is_err());
        assert!(iota(3, 3, 0.5).is_err());
    }

    #[test]
    fn hoeffding_examples() {
        let b = survival_bounds(0, 100, 0.5).unwrap();
        assert_eq!(b.upper, 1.0);
        assert!((b.lower - (1.0 - (-50.0f64).exp())).abs() < 1e-30);
        let b = survival_bounds(99, 100, 0.5).unwrap();
        assert_eq!(b.lower, 0.0);
        assert!((b.upper / (-50.0f64).exp() - 1.0).abs() < 1e-14);
        let b = survival_bounds(50, 100, 0.5).unwrap();
        assert!((b.normal_approx - 0.5).abs() < 1e-16);
    }

    #[test]
    fn iota_cases() {
        assert_eq!(iota(9, 10, 0.37).unwrap(), 0.37);
        assert!((iota(2, 1000, 0.5).unwrap() - 1.0).abs() < 1e-6);
        // I_μ(k+2, n-k) is a tail of Binomial(n+1, μ).
        let direct = tail_sum(7, 21, 0.3) / tail_sum(6, 20, 0.3);
        let got = iota(5, 20, 0.3).unwrap();
        assert!((got - direct).abs() < 1e-14, "{got} vs {direct}");
    }

    #[test]
    fn iota_pmf_form() {
        for &(k, n, mu) in &[(5u64, 20u64, 0.3), (150, 500, 0.2), (0, 7, 0.9)] {
            let pmf = binom_pmf(k + 1, n, mu);
            let tail = tail_sum(k + 1, n, mu);
            let alt = 1.0 - (1.0 - mu) * pmf / tail;
            assert!((iota(k, n, mu).unwrap() - alt).abs() < 1e-12);
        }
    }

    #[test]
    fn deep_tail_ratio_is_finite() {
        // I itself underflows f64 here.
        let r = iota(900, 1000, 0.1).unwrap();
        assert!(r > 0.1 && r < 1.0);
        let l = ln_reg_inc_beta(0.1, 901.0, 100.0).unwrap();
        assert!(l.is_finite() && l < -1000.0);
    }
}
