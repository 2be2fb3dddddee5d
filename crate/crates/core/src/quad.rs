//! Globally adaptive 21-point Gauss–Kronrod quadrature.
//!
//! The interval with the largest error estimate is bisected until the summed
//! estimate meets `max(abs_tol, rel_tol · |I|)`. Callers may force initial
//! breakpoints, which matters for the sharply peaked Binomial kernels.

use crate::error::{Error, Result};
use crate::numeric::KahanSum;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689,
    0.973_906_528_517_171_720_077_964_012_084,
    0.930_157_491_355_708_226_001_207_180_060,
    0.865_063_366_688_984_510_732_096_688_423,
    0.780_817_726_586_416_897_063_717_578_345,
    0.679_409_568_299_024_406_234_327_365_115,
    0.562_757_134_668_604_683_339_000_099_273,
    0.433_395_394_129_247_190_799_265_943_166,
    0.294_392_862_701_460_198_131_126_603_104,
    0.148_874_338_981_631_210_884_826_001_130,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062,
    0.032_558_162_307_964_727_478_818_972_459,
    0.054_755_896_574_351_996_031_381_300_245,
    0.075_039_674_810_919_952_767_043_140_916,
    0.093_125_454_583_697_605_535_065_465_083,
    0.109_387_158_802_297_641_899_210_590_326,
    0.123_491_976_262_065_851_077_600_525_478,
    0.134_709_217_311_473_325_928_054_001_772,
    0.142_775_938_577_060_080_797_094_273_139,
    0.147_739_104_901_338_491_374_841_515_972,
    0.149_445_554_002_916_905_664_936_468_390,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893,
    0.149_451_349_150_580_593_145_776_339_658,
    0.219_086_362_515_982_043_995_534_934_228,
    0.269_266_719_309_996_355_091_226_921_569,
    0.295_524_224_714_752_870_173_892_994_651,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            max_intervals: 2000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct QuadResult {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

#[derive(Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Panel {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[10] * fc;
    let mut gauss = 0.0;
    for j in 0..10 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let value = kron * h;
    let error = ((kron - gauss) * h).abs();
    Panel { a, b, value, error }
}

/// Integrate `f` over `[a, b]`, starting from the panels cut at `breaks`.
///
/// Breakpoints outside `(a, b)` are ignored. Gauss–Kronrod never samples panel
/// endpoints, so a narrow peak should be bracketed by breakpoints at its own
/// width scale rather than merely split at its location.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    cfg: &QuadConfig,
) -> Result<QuadResult> {
    if !(a.is_finite() && b.is_finite()) || a > b {
        return Err(Error::domain("integrate", format!("bad interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            error: 0.0,
            intervals: 0,
        });
    }
    let mut cuts: Vec<f64> = breaks
        .iter()
        .copied()
        .filter(|&x| x > a && x < b && x.is_finite())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut edges = Vec::with_capacity(cuts.len() + 2);
    edges.push(a);
    edges.extend(cuts);
    edges.push(b);

    let mut panels: Vec<Panel> = edges.windows(2).map(|w| gk21(&f, w[0], w[1])).collect();
    loop {
        let total: f64 = panels.iter().map(|p| p.value).collect::<KahanSum>().value();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        if !total.is_finite() {
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
                intervals: panels.len(),
            });
        }
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            return Ok(QuadResult {
                value: total,
                error: err,
                intervals: panels.len(),
            });
        }
        if panels.len() >= cfg.max_intervals {
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
                intervals: panels.len(),
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1.error.total_cmp(&y.1.error))
            .expect("nonempty");
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // Cannot bisect further in floating point.
            return Err(Error::Quadrature {
                estimate: total,
                error: err,
                intervals: panels.len() + 1,
            });
        }
        panels.push(gk21(&f, p.a, mid));
        panels.push(gk21(&f, mid, p.b));
    }
}

/// Breakpoints bracketing a peak of scale `width` at `center`, spaced
/// geometrically outward (ratio 3) until they leave `[lo, hi]`.
pub fn peak_breaks(center: f64, width: f64, lo: f64, hi: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(center.is_finite() && width > 0.0) {
        return out;
    }
    out.push(center);
    let mut d = width;
    while center - d > lo || center + d < hi {
        out.push(center - d);
        out.push(center + d);
        d *= 3.0;
    }
    out.retain(|&x| x > lo && x < hi);
    out.sort_by(f64::total_cmp);
    out
}

/// Integrate `exp(ln_f)` where the integrand may be far below the smallest
/// positive double. Returns `(ln ∫ exp(ln_f), relative error)`.
///
/// `ln_scale` should be near the maximum of `ln_f`; the integrand is divided by
/// `exp(ln_scale)` before integration, so relative accuracy is preserved.
pub fn integrate_log<F: Fn(f64) -> f64>(
    ln_f: F,
    a: f64,
    b: f64,
    breaks: &[f64],
    ln_scale: f64,
    cfg: &QuadConfig,
) -> Result<(f64, f64)> {
    if !ln_scale.is_finite() {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    let scaled = |x: f64| {
        let v = ln_f(x) - ln_scale;
        if v.is_nan() {
            0.0
        } else {
            v.exp()
        }
    };
    let rel = QuadConfig {
        abs_tol: 0.0,
        ..*cfg
    };
    let r = integrate(scaled, a, b, breaks, &rel)?;
    if r.value <= 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    Ok((r.value.ln() + ln_scale, r.error / r.value))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, &[], &QuadConfig::default()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-14);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn peaked_gaussian_with_breakpoint() {
        let s = 1e-4;
        let f = |x: f64| (-(x - 0.3) * (x - 0.3) / (2.0 * s * s)).exp();
        let want = s * (2.0 * std::f64::consts::PI).sqrt();
        let breaks = peak_breaks(0.3, s, 0.0, 1.0);
        let cfg = QuadConfig {
            abs_tol: 0.0,
            ..QuadConfig::default()
        };
        let r = integrate(f, 0.0, 1.0, &breaks, &cfg).unwrap();
        assert!(((r.value - want) / want).abs() < 1e-10, "{r:?} vs {want}");
    }

    #[test]
    fn log_scaled_tiny_integrand() {
        // ∫_0^1 e^{-2000} dx underflows directly but not in log form.
        let (l, rel) =
            integrate_log(|_| -2000.0, 0.0, 1.0, &[], -2000.0, &QuadConfig::default()).unwrap();
        assert!((l + 2000.0).abs() < 1e-12);
        assert!(rel < 1e-12);
    }

    #[test]
    fn reports_failure_on_singularity() {
        let cfg = QuadConfig {
            max_intervals: 50,
            ..QuadConfig::default()
        };
        let e = integrate(|x: f64| 1.0 / (x - 0.1).abs(), 0.0, 1.0, &[], &cfg);
        assert!(matches!(e, Err(Error::Quadrature { .. })));
    }
}
