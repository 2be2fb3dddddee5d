//! Goodness-of-fit statistics used by the stochastic checks.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{reg_inc_gamma_upper, std_normal_cdf};

/// Kolmogorov–Smirnov distance between the empirical law of `xs` and the
/// standard Normal.
pub fn ks_normal(xs: &[f64]) -> f64 {
    let mut v: Vec<f64> = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    v.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = std_normal_cdf(x);
            (f - i as f64 / n).max((i + 1) as f64 / n - f)
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Adjacent bins merged until each holds at least this many pooled counts.
const MIN_POOLED: u64 = 10;

/// Two-sample chi-square homogeneity test on histograms over the same bins.
pub fn chi_square_two_sample(a: &[u64], b: &[u64]) -> Result<ChiSquare> {
    let len = a.len().max(b.len());
    let get = |h: &[u64], k: usize| h.get(k).copied().unwrap_or(0);
    let mut bins: Vec<(u64, u64)> = Vec::new();
    let mut cur = (0u64, 0u64);
    for k in 0..len {
        cur.0 += get(a, k);
        cur.1 += get(b, k);
        if cur.0 + cur.1 >= MIN_POOLED {
            bins.push(cur);
            cur = (0, 0);
        }
    }
    if cur.0 + cur.1 > 0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += cur.0;
                last.1 += cur.1;
            }
            None => bins.push(cur),
        }
    }
    let na: u64 = bins.iter().map(|b| b.0).sum();
    let nb: u64 = bins.iter().map(|b| b.1).sum();
    if na == 0 || nb == 0 {
        return Err(Error::InsufficientData("both samples need observations".into()));
    }
    if bins.len() < 2 {
        return Ok(ChiSquare {
            statistic: 0.0,
            dof: 0,
            p_value: 1.0,
        });
    }
    let (ka, kb) = ((nb as f64 / na as f64).sqrt(), (na as f64 / nb as f64).sqrt());
    let statistic: f64 = bins
        .iter()
        .map(|&(x, y)| {
            let d = ka * x as f64 - kb * y as f64;
            d * d / (x + y) as f64
        })
        .sum();
    let dof = bins.len() - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: reg_inc_gamma_upper(0.5 * dof as f64, 0.5 * statistic)?,
    })
}

/// Pearson chi-square of observed counts against a pmf, merging sparse bins.
pub fn chi_square_goodness(observed: &[u64], pmf: &[f64]) -> Result<ChiSquare> {
    let total: u64 = observed.iter().sum();
    if total == 0 {
        return Err(Error::InsufficientData("no observations".into()));
    }
    let t = total as f64;
    let len = observed.len().max(pmf.len());
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let mut cur = (0.0, 0.0);
    for k in 0..len {
        cur.0 += observed.get(k).copied().unwrap_or(0) as f64;
        cur.1 += pmf.get(k).copied().unwrap_or(0.0) * t;
        if cur.1 >= 5.0 {
            bins.push(cur);
            cur = (0.0, 0.0);
        }
    }
    if let Some(last) = bins.last_mut() {
        last.0 += cur.0;
        last.1 += cur.1;
    }
    if bins.len() < 2 {
        return Err(Error::InsufficientData("fewer than two bins with expected count >= 5".into()));
    }
    let statistic: f64 = bins.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    let dof = bins.len() - 1;
    Ok(ChiSquare {
        statistic,
        dof,
        p_value: reg_inc_gamma_upper(0.5 * dof as f64, 0.5 * statistic)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_quantiles_is_small() {
        let n = 1000;
        let xs: Vec<f64> = (0..n)
            .map(|i| crate::specfun::std_normal_quantile((i as f64 + 0.5) / n as f64))
            .collect();
        let d = ks_normal(&xs);
        assert!((d - 0.5 / n as f64).abs() < 1e-9, "{d}");
    }

    #[test]
    fn ks_detects_shift() {
        let xs: Vec<f64> = (0..500).map(|i| 1.0 + crate::specfun::std_normal_quantile((i as f64 + 0.5) / 500.0)).collect();
        assert!(ks_normal(&xs) > 0.3);
    }

    #[test]
    fn identical_histograms_do_not_reject() {
        let h = vec![50, 120, 300, 200, 80, 9, 1];
        let c = chi_square_two_sample(&h, &h).unwrap();
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.p_value, 1.0);
    }

    #[test]
    fn shifted_histograms_reject() {
        let a = vec![500, 300, 200, 0];
        let b = vec![0, 200, 300, 500];
        assert!(chi_square_two_sample(&a, &b).unwrap().p_value < 1e-10);
    }

    #[test]
    fn goodness_exact_counts() {
        let pmf = [0.25, 0.5, 0.25];
        let c = chi_square_goodness(&[250, 500, 250], &pmf).unwrap();
        assert!(c.statistic.abs() < 1e-12);
        assert_eq!(c.dof, 2);
    }
}
