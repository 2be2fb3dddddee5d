//! Power sums `Σ i^{-δ}` and the Riemann zeta function.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Exact and leading-order values of `Σ_{i=1}^n i^{-δ}`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PowerSum {
    pub exact: f64,
    /// `n^{1-δ}/(1-δ)` for `δ < 1`, `ln n + γ_E` at `δ = 1`, `ζ(δ)` for `δ > 1`.
    pub asymptotic: f64,
}

pub fn power_sum(n: u64, delta: f64) -> Result<PowerSum> {
    if n == 0 {
        return Err(Error::domain("power_sum", "need n >= 1"));
    }
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::domain("power_sum", format!("need finite delta >= 0, got {delta}")));
    }
    // Smallest terms first.
    let mut acc = KahanSum::new();
    for i in (1..=n).rev() {
        acc.add((i as f64).powf(-delta));
    }
    let nf = n as f64;
    let asymptotic = if delta < 1.0 {
        nf.powf(1.0 - delta) / (1.0 - delta)
    } else if delta == 1.0 {
        nf.ln() + EULER_GAMMA
    } else {
        zeta(delta)?
    };
    Ok(PowerSum {
        exact: acc.value(),
        asymptotic,
    })
}

/// Riemann zeta function for real `s > 1`, by Euler–Maclaurin summation.
pub fn zeta(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::domain("zeta", format!("need s > 1, got {s}")));
    }
    const N: usize = 10;
    // B_{2j}/(2j)!
    const B: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
    ];
    let nf = N as f64;
    let mut acc = KahanSum::new();
    for i in (1..N).rev() {
        acc.add((i as f64).powf(-s));
    }
    let n_s = nf.powf(-s);
    acc.add(nf.powf(1.0 - s) / (s - 1.0));
    acc.add(0.5 * n_s);
    // Tail corrections B_{2j}/(2j)! · s(s+1)...(s+2j-2) · N^{-s-2j+1}.
    let mut rising = s;
    let mut pow = n_s / nf;
    for (j, b) in B.iter().enumerate() {
        acc.add(b * rising * pow);
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        pow /= nf * nf;
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zeta_known_values() {
        assert!((zeta(2.0).unwrap() - PI * PI / 6.0).abs() < 1e-15);
        assert!((zeta(4.0).unwrap() - PI.powi(4) / 90.0).abs() < 1e-15);
        assert!((zeta(1.5).unwrap() - 2.612_375_348_685_488_3).abs() < 1e-14);
        assert!(zeta(1.0).is_err());
    }

    #[test]
    fn harmonic_regime() {
        for &n in &[10u64, 100, 1000, 100_000] {
            let s = power_sum(n, 1.0).unwrap();
            let gap = s.exact - s.asymptotic;
            // H_n - ln n - γ = 1/(2n) + O(n^-2)
            assert!((gap - 0.5 / n as f64).abs() < 0.1 / (n as f64).powi(2));
        }
    }

    #[test]
    fn square_root_regime() {
        let s = power_sum(100, 0.5).unwrap();
        assert_eq!(s.asymptotic, 20.0);
        // Σ i^{-1/2} = 2√n + ζ(1/2) + O(n^{-1/2}), ζ(1/2) ≈ -1.46
        assert!((s.exact - s.asymptotic + 1.460_354_508_809_586_8).abs() < 0.06);
    }

    #[test]
    fn convergent_regime() {
        let s = power_sum(1_000_000, 2.0).unwrap();
        assert!((s.asymptotic - PI * PI / 6.0).abs() < 1e-15);
        assert!((s.asymptotic - s.exact - 1e-6).abs() < 1e-11);
    }

    #[test]
    fn delta_zero_counts() {
        let s = power_sum(1_000_000, 0.0).unwrap();
        assert_eq!(s.exact, 1e6);
        assert_eq!(s.asymptotic, 1e6);
    }
}
