//! Marginal degree laws by quadrature over the mixing density.
//!
//! Both kernels (Binomial in `π` for finite `n`, Poisson in `π` for the
//! limiting law) are evaluated in log space and integrated after rescaling by
//! their peak value, so entries far in the tails keep full relative accuracy.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::law::{DegreeLaw, Provenance};
use crate::error::{Error, Result};
use crate::quad::{integrate_log, peak_breaks, QuadConfig};
use crate::specfun::lgamma::{ln_dbinom_raw, ln_dpois_raw};
use crate::weights::{BoundedParetoModel, MixingDensity, PointMass, SmoothDensityModel, WeightModel};

/// Mixing laws admitted by the marginal computations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MixingLaw {
    BoundedPareto(BoundedParetoModel),
    Smooth(SmoothDensityModel),
    PointMass(PointMass),
}

impl TryFrom<WeightModel> for MixingLaw {
    type Error = Error;
    fn try_from(m: WeightModel) -> Result<Self> {
        match m {
            WeightModel::BoundedPareto(p) => Ok(MixingLaw::BoundedPareto(p)),
            WeightModel::Smooth(s) => Ok(MixingLaw::Smooth(s)),
            WeightModel::PointMass(p) => Ok(MixingLaw::PointMass(p)),
            other => Err(Error::ModelInvalid(format!(
                "{} is a deterministic weight sequence, not a mixing law",
                other.kind()
            ))),
        }
    }
}

impl MixingLaw {
    pub fn mean(&self) -> f64 {
        match self {
            MixingLaw::BoundedPareto(m) => m.mean(),
            MixingLaw::Smooth(m) => m.mean(),
            MixingLaw::PointMass(p) => p.value,
        }
    }

    pub fn variance(&self) -> f64 {
        match self {
            MixingLaw::BoundedPareto(m) => m.variance(),
            MixingLaw::Smooth(m) => m.variance(),
            MixingLaw::PointMass(_) => 0.0,
        }
    }
}

/// Quadrature tolerances used for all pmf entries.
pub(crate) fn pmf_quad_config() -> QuadConfig {
    QuadConfig {
        abs_tol: 0.0,
        rel_tol: 1e-12,
        max_intervals: 4000,
    }
}

/// `∫ exp(ln_kernel(t)) f(t) dt` over the support of `f`.
///
/// `mode` and `width` locate the kernel peak in `t`; `slope` is the
/// derivative of `ln_kernel`, used to size the first panel when the peak lies
/// outside the support.
fn mixed_entry<F, K, S>(f: &F, ln_kernel: K, slope: S, mode: f64, width: f64, cfg: &QuadConfig) -> Result<f64>
where
    F: MixingDensity + ?Sized,
    K: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    let (lo, hi) = f.support();
    let ln_f = |t: f64| ln_kernel(t) + f.density(t).ln();
    let inset = 1e-9 * (hi - lo);
    let (center, w) = if mode > lo && mode < hi {
        (mode, width)
    } else {
        let edge = if mode <= lo { lo } else { hi };
        let probe = if mode <= lo { lo + inset } else { hi - inset };
        let s = slope(probe).abs();
        let w = if s > 0.0 { width.min(1.0 / s) } else { width };
        (edge, w)
    };
    let mut breaks = peak_breaks(center, w, lo, hi);
    breaks.extend(f.kinks());
    let probes = [
        center.clamp(lo + inset, hi - inset),
        lo + inset,
        hi - inset,
    ];
    let ln_scale = probes
        .iter()
        .map(|&t| ln_f(t))
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    let (ln_v, _) = integrate_log(ln_f, lo, hi, &breaks, ln_scale, cfg)?;
    Ok(ln_v.exp())
}

/// `P(d = k)` for a degree in a graph of `n` nodes with `π` drawn from `f`.
pub fn mixed_binomial_entry<F: MixingDensity + ?Sized>(f: &F, n: usize, k: usize, cfg: &QuadConfig) -> Result<f64> {
    if k >= n {
        return Ok(0.0);
    }
    let mu = f.mean();
    let m = (n - 1) as f64;
    let kf = k as f64;
    let t = kf / m;
    let mode = t / mu;
    let width = (t * (1.0 - t)).max(1.0 / m).sqrt() / (m.sqrt() * mu);
    mixed_entry(
        f,
        |pi| {
            let p = mu * pi;
            ln_dbinom_raw(kf, m, p, 1.0 - p)
        },
        |pi| kf / pi - (m - kf) * mu / (1.0 - mu * pi),
        mode,
        width,
        cfg,
    )
}

/// `P(Y = k)` for `Y` mixed Poisson with rate `λ π`, `π ~ f`.
pub fn mixed_poisson_entry<F: MixingDensity + ?Sized>(f: &F, lambda: f64, k: usize, cfg: &QuadConfig) -> Result<f64> {
    let kf = k as f64;
    let mode = kf / lambda;
    let width = kf.max(1.0).sqrt() / lambda;
    mixed_entry(
        f,
        |pi| ln_dpois_raw(kf, lambda * pi),
        |pi| kf / pi - lambda,
        mode,
        width,
        cfg,
    )
}

pub(crate) fn mixed_binomial_pmf<F: MixingDensity + Sync + ?Sized>(f: &F, n: usize) -> Result<Vec<f64>> {
    let cfg = pmf_quad_config();
    (0..n)
        .into_par_iter()
        .map(|k| mixed_binomial_entry(f, n, k, &cfg))
        .collect()
}

/// Marginal law of a degree under the hierarchical model, by adaptive
/// quadrature of the Binomial mixture.
///
/// A point mass `π ≡ v` gives the Binomial `(n-1, v²)` law directly.
pub fn marginal_pmf_quadrature(mixing: &MixingLaw, n: usize) -> Result<DegreeLaw> {
    if n < 2 {
        return Err(Error::domain("marginal_pmf_quadrature", format!("need n >= 2, got {n}")));
    }
    let (pmf, prov) = match mixing {
        MixingLaw::PointMass(p) => {
            let q = p.value * p.value;
            let m = (n - 1) as f64;
            let pmf = (0..n).map(|k| ln_dbinom_raw(k as f64, m, q, 1.0 - q).exp()).collect();
            (pmf, Provenance::ExactDp)
        }
        MixingLaw::BoundedPareto(m) => (mixed_binomial_pmf(m, n)?, Provenance::Quadrature),
        MixingLaw::Smooth(m) => (mixed_binomial_pmf(m, n)?, Provenance::Quadrature),
    };
    Ok(DegreeLaw::new(pmf, prov, n).with_meta("mixing_mean", mixing.mean()))
}
