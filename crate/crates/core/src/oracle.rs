//! Slow reference computations, independent of the special-function kernel.
//!
//! These are used by the test suites and by `verify`. None of them touch
//! `lgamma` or the continued fractions, so agreement is a genuine cross-check.

use crate::numeric::kahan_sum;

/// Poisson–Binomial pmf by enumerating all `2^m` outcomes.
///
/// Panics if `probs.len() > 24`.
pub fn poisson_binomial_enumerate(probs: &[f64]) -> Vec<f64> {
    let m = probs.len();
    assert!(m <= 24, "enumeration oracle limited to m <= 24");
    let mut buckets: Vec<Vec<f64>> = vec![Vec::new(); m + 1];
    for mask in 0u32..(1u32 << m) {
        let mut p = 1.0;
        for (j, &q) in probs.iter().enumerate() {
            p *= if mask >> j & 1 == 1 { q } else { 1.0 - q };
        }
        buckets[mask.count_ones() as usize].push(p);
    }
    buckets
        .into_iter()
        .map(|mut b| {
            b.sort_by(f64::total_cmp);
            kahan_sum(b)
        })
        .collect()
}

/// Binomial pmf over `0..=n` by ratio recursion outward from the mode.
pub fn binomial_pmf(n: u64, p: f64) -> Vec<f64> {
    let len = n as usize + 1;
    if p <= 0.0 || p >= 1.0 {
        let mut v = vec![0.0; len];
        v[if p <= 0.0 { 0 } else { n as usize }] = 1.0;
        return v;
    }
    let q = 1.0 - p;
    let mode = (((n + 1) as f64 * p).floor() as usize).min(n as usize);
    let mut v = vec![0.0; len];
    v[mode] = 1.0;
    for j in mode..n as usize {
        v[j + 1] = v[j] * ((n as usize - j) as f64 / (j + 1) as f64) * (p / q);
    }
    for j in (1..=mode).rev() {
        v[j - 1] = v[j] * (j as f64 / (n as usize - j + 1) as f64) * (q / p);
    }
    let total = kahan_sum(v.iter().copied());
    v.iter_mut().for_each(|x| *x /= total);
    v
}

/// `P(X >= k)` for `X ~ Binomial(n, p)`.
pub fn binomial_tail(k: u64, n: u64, p: f64) -> f64 {
    let pmf = binomial_pmf(n, p);
    kahan_sum(pmf[k as usize..].iter().rev().copied())
}

/// Poisson pmf over `0..=k_max` by the product recursion.
pub fn poisson_pmf(lambda: f64, k_max: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(k_max + 1);
    let mut term = (-lambda).exp();
    for k in 0..=k_max {
        v.push(term);
        term *= lambda / (k + 1) as f64;
    }
    v
}

/// `P(Y >= k)` for `Y ~ Poisson(lambda)`, as one minus a finite sum.
pub fn poisson_tail(k: usize, lambda: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    1.0 - kahan_sum(poisson_pmf(lambda, k - 1))
}

/// `Γ(z)/Γ(z-β)` for integer `β`, as the falling product.
pub fn gamma_ratio_product(z: f64, beta: u32) -> f64 {
    (1..=beta).map(|j| z - j as f64).product()
}
