//! Weight vectors `π` and the generative models that produce them.
//!
//! Every model serializes to a JSON block tagged by `kind`:
//!
//! ```json
//! {"kind": "bounded_pareto", "beta": 3.0, "a": 0.3333333333333333, "b": 1.0, "seed": 7}
//! ```
//!
//! Kinds are `power_law`, `envelope`, `bounded_pareto`, `smooth` and
//! `point_mass`. The optional `seed` only matters for random models.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::KahanSum;
use crate::quad::{integrate, QuadConfig};

/// The parameter vector `π ∈ [0,1]^n`; edge `{i,j}` appears with probability `π_i π_j`.
///
/// Values are stored in generation order. Use [`WeightVector::sorted_desc`]
/// for a sorted view that keeps track of the original indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightVector {
    values: Vec<f64>,
    model_tag: String,
    seed: Option<u64>,
}

impl WeightVector {
    pub fn new(values: Vec<f64>, model_tag: impl Into<String>, seed: Option<u64>) -> Result<Self> {
        if values.len() < 2 {
            return Err(Error::ModelInvalid(format!(
                "weight vector needs n >= 2, got {}",
                values.len()
            )));
        }
        if let Some((i, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(0.0..=1.0).contains(*v))
        {
            return Err(Error::ModelInvalid(format!("pi[{i}] = {v} outside [0, 1]")));
        }
        Ok(Self {
            values,
            model_tag: model_tag.into(),
            seed,
        })
    }

    /// Constant vector `π_i = value`.
    pub fn homogeneous(value: f64, n: usize) -> Result<Self> {
        Self::new(vec![value; n], "point_mass", None)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn model_tag(&self) -> &str {
        &self.model_tag
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `‖π‖₁`.
    pub fn l1(&self) -> f64 {
        self.values.iter().copied().collect::<KahanSum>().value()
    }

    /// `‖π‖₂²`.
    pub fn l2sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).collect::<KahanSum>().value()
    }

    /// Values in nonincreasing order together with `order[r]`, the original
    /// index of the value at rank `r`.
    pub fn sorted_desc(&self) -> (Vec<f64>, Vec<usize>) {
        // Nonnegative values sort like their bit patterns (adding 0.0 maps
        // -0.0 to 0.0). Sorting (key, index) pairs keeps comparisons in cache.
        let mut keyed: Vec<(u64, usize)> = self.values.iter().map(|v| (!(v + 0.0).to_bits(), 0)).collect();
        for (i, k) in keyed.iter_mut().enumerate() {
            k.1 = i;
        }
        keyed.sort_unstable();
        keyed.into_iter().map(|(k, i)| (f64::from_bits(!k), i)).unzip()
    }
}

fn check_gamma_theta(gamma: f64, theta_n: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::ModelInvalid(format!("power-law exponent gamma = {gamma} not in (0, 1)")));
    }
    if !(0.0..=1.0).contains(&theta_n) {
        return Err(Error::ModelInvalid(format!("theta_n = {theta_n} not in [0, 1]")));
    }
    Ok(())
}

/// Deterministic power law `π_i = θ_n i^{-γ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PowerLawRaw")]
pub struct PowerLawModel {
    pub gamma: f64,
    pub theta_n: f64,
}

#[derive(Deserialize)]
struct PowerLawRaw {
    gamma: f64,
    theta_n: f64,
}

impl TryFrom<PowerLawRaw> for PowerLawModel {
    type Error = Error;
    fn try_from(r: PowerLawRaw) -> Result<Self> {
        Self::new(r.gamma, r.theta_n)
    }
}

impl PowerLawModel {
    pub fn new(gamma: f64, theta_n: f64) -> Result<Self> {
        check_gamma_theta(gamma, theta_n)?;
        Ok(Self { gamma, theta_n })
    }
}

/// Power law modulated by a bounded envelope, `π_i = ξ(i/n) θ_n i^{-γ}`.
///
/// `ξ` is tabulated at increasing abscissae ending at 1 and interpolated
/// linearly; below the first abscissa it is held constant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EnvelopeRaw")]
pub struct EnvelopeModel {
    pub gamma: f64,
    pub theta_n: f64,
    pub xi_x: Vec<f64>,
    pub xi_y: Vec<f64>,
    pub xi_min: f64,
    pub xi_max: f64,
}

#[derive(Deserialize)]
struct EnvelopeRaw {
    gamma: f64,
    theta_n: f64,
    xi_x: Vec<f64>,
    xi_y: Vec<f64>,
    xi_min: f64,
    xi_max: f64,
}

impl TryFrom<EnvelopeRaw> for EnvelopeModel {
    type Error = Error;
    fn try_from(r: EnvelopeRaw) -> Result<Self> {
        Self::new(r.gamma, r.theta_n, r.xi_x, r.xi_y, r.xi_min, r.xi_max)
    }
}

impl EnvelopeModel {
    pub fn new(
        gamma: f64,
        theta_n: f64,
        xi_x: Vec<f64>,
        xi_y: Vec<f64>,
        xi_min: f64,
        xi_max: f64,
    ) -> Result<Self> {
        check_gamma_theta(gamma, theta_n)?;
        if xi_x.is_empty() || xi_x.len() != xi_y.len() {
            return Err(Error::ModelInvalid("xi table needs matching nonempty x and y".into()));
        }
        if xi_x.windows(2).any(|w| !(w[0] < w[1])) || !(xi_x[0] > 0.0) {
            return Err(Error::ModelInvalid("xi abscissae must increase within (0, 1]".into()));
        }
        if *xi_x.last().unwrap() != 1.0 {
            return Err(Error::ModelInvalid("last xi abscissa must be 1".into()));
        }
        if !(0.0 < xi_min && xi_min <= xi_max && xi_max.is_finite()) {
            return Err(Error::ModelInvalid(format!("need 0 < xi_min <= xi_max < inf, got [{xi_min}, {xi_max}]")));
        }
        if let Some(y) = xi_y.iter().find(|y| !(xi_min..=xi_max).contains(*y)) {
            return Err(Error::ModelInvalid(format!("xi value {y} outside [{xi_min}, {xi_max}]")));
        }
        Ok(Self {
            gamma,
            theta_n,
            xi_x,
            xi_y,
            xi_min,
            xi_max,
        })
    }

    /// Envelope identically equal to one.
    pub fn flat(gamma: f64, theta_n: f64) -> Result<Self> {
        Self::new(gamma, theta_n, vec![1.0], vec![1.0], 1.0, 1.0)
    }

    pub fn xi(&self, x: f64) -> Result<f64> {
        if !(x > 0.0 && x <= 1.0) {
            return Err(Error::domain("xi", format!("x = {x} outside (0, 1]")));
        }
        let j = self.xi_x.partition_point(|&t| t < x);
        if j == 0 {
            return Ok(self.xi_y[0]);
        }
        let (x0, x1) = (self.xi_x[j - 1], self.xi_x[j]);
        let (y0, y1) = (self.xi_y[j - 1], self.xi_y[j]);
        Ok(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
    }
}

/// Either of the deterministic power-law families.
#[derive(Debug, Clone, Copy)]
pub enum PowerLawSpec<'a> {
    Plain(&'a PowerLawModel),
    Envelope(&'a EnvelopeModel),
}

impl<'a> From<&'a PowerLawModel> for PowerLawSpec<'a> {
    fn from(m: &'a PowerLawModel) -> Self {
        PowerLawSpec::Plain(m)
    }
}

impl<'a> From<&'a EnvelopeModel> for PowerLawSpec<'a> {
    fn from(m: &'a EnvelopeModel) -> Self {
        PowerLawSpec::Envelope(m)
    }
}

/// `π_i = θ_n i^{-γ}` for `i = 1..=n`, times `ξ(i/n)` for an envelope.
///
/// ```
/// use degreenet::weights::{materialize_power_law, PowerLawModel};
/// let pi = materialize_power_law(&PowerLawModel::new(0.5, 1.0).unwrap(), 4).unwrap();
/// assert_eq!(pi.values()[3], 0.5);
/// ```
pub fn materialize_power_law<'a>(model: impl Into<PowerLawSpec<'a>>, n: usize) -> Result<WeightVector> {
    let spec = model.into();
    let (gamma, theta, tag) = match spec {
        PowerLawSpec::Plain(m) => (m.gamma, m.theta_n, "power_law"),
        PowerLawSpec::Envelope(m) => (m.gamma, m.theta_n, "envelope"),
    };
    let mut values = Vec::with_capacity(n);
    for i in 1..=n {
        let base = theta * (i as f64).powf(-gamma);
        let v = match spec {
            PowerLawSpec::Plain(_) => base,
            PowerLawSpec::Envelope(m) => base * m.xi(i as f64 / n as f64)?,
        };
        if v > 1.0 {
            return Err(Error::ModelInvalid(format!("pi_{i} = {v} exceeds 1")));
        }
        values.push(v);
    }
    WeightVector::new(values, tag, None)
}

/// A density on `[0,1]` used as the mixing law of `π`.
pub trait MixingDensity {
    fn support(&self) -> (f64, f64);
    fn density(&self, pi: f64) -> f64;
    fn mean(&self) -> f64;
    fn variance(&self) -> f64;
    /// Points in the support where the density is not smooth.
    fn kinks(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// Bounded Pareto density `f(π) = c π^{-β}` on `[a, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ParetoRaw")]
pub struct BoundedParetoModel {
    pub beta: f64,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Deserialize)]
struct ParetoRaw {
    beta: f64,
    a: f64,
    b: f64,
    #[serde(default)]
    c: Option<f64>,
}

impl TryFrom<ParetoRaw> for BoundedParetoModel {
    type Error = Error;
    fn try_from(r: ParetoRaw) -> Result<Self> {
        let m = Self::new(r.beta, r.a, r.b)?;
        if let Some(c) = r.c {
            if ((c - m.c) / m.c).abs() > 1e-12 {
                return Err(Error::ModelInvalid(format!(
                    "declared normalizer c = {c} inconsistent with computed {}",
                    m.c
                )));
            }
        }
        Ok(m)
    }
}

/// `∫_a^b π^s dπ`, stable for `s` near -1.
fn power_integral(s: f64, a: f64, b: f64) -> f64 {
    let e = s + 1.0;
    if a == 0.0 {
        return b.powf(e) / e;
    }
    let l = (b / a).ln();
    if e == 0.0 {
        l
    } else {
        a.powf(e) * (e * l).exp_m1() / e
    }
}

impl BoundedParetoModel {
    pub fn new(beta: f64, a: f64, b: f64) -> Result<Self> {
        if !(beta >= 0.0 && beta.is_finite()) {
            return Err(Error::ModelInvalid(format!("beta = {beta} must be >= 0")));
        }
        if !(0.0 <= a && a < b && b <= 1.0) {
            return Err(Error::ModelInvalid(format!("need 0 <= a < b <= 1, got a = {a}, b = {b}")));
        }
        if beta >= 1.0 && a == 0.0 {
            return Err(Error::ModelInvalid("a must be positive when beta >= 1".into()));
        }
        let c = 1.0 / power_integral(-beta, a, b);
        Ok(Self { beta, a, b, c })
    }

    /// `E π^j`.
    pub fn raw_moment(&self, j: u32) -> f64 {
        self.c * power_integral(j as f64 - self.beta, self.a, self.b)
    }

    pub fn cdf(&self, pi: f64) -> f64 {
        if pi <= self.a {
            0.0
        } else if pi >= self.b {
            1.0
        } else {
            self.c * power_integral(-self.beta, self.a, pi)
        }
    }

    /// `F^{-1}(u)`, clamped into `[a, b)`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let (a, b, beta) = (self.a, self.b, self.beta);
        let x = if beta == 1.0 {
            a * (b / a).powf(u)
        } else if a == 0.0 {
            let e = 1.0 - beta;
            (u * e / self.c).powf(1.0 / e)
        } else {
            // (a^e + u e / c)^{1/e}, factored about a so β near 1 keeps precision.
            let e = 1.0 - beta;
            a * ((u * e / (self.c * a.powf(e))).ln_1p() / e).exp()
        };
        if x >= b {
            f64::from_bits(b.to_bits() - 1)
        } else {
            x.max(a)
        }
    }
}

impl MixingDensity for BoundedParetoModel {
    fn support(&self) -> (f64, f64) {
        (self.a, self.b)
    }
    fn density(&self, pi: f64) -> f64 {
        if pi >= self.a && pi < self.b {
            self.c * pi.powf(-self.beta)
        } else {
            0.0
        }
    }
    fn mean(&self) -> f64 {
        self.raw_moment(1)
    }
    fn variance(&self) -> f64 {
        let m = self.mean();
        (self.raw_moment(2) - m * m).max(0.0)
    }
}

/// I.i.d. draws from a bounded Pareto law by inversion.
pub fn sample_bounded_pareto<R: Rng + ?Sized>(
    model: &BoundedParetoModel,
    n: usize,
    rng: &mut R,
    seed: Option<u64>,
) -> Result<WeightVector> {
    let values = (0..n).map(|_| model.inverse_cdf(rng.random::<f64>())).collect();
    WeightVector::new(values, "bounded_pareto", seed)
}

/// Polynomial density on `[0, 1]`, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SmoothRaw", into = "SmoothRaw")]
pub struct SmoothDensityModel {
    coefficients: Vec<f64>,
    f_second_deriv_sup: f64,
    mu: f64,
    sigma2: f64,
    f_min: f64,
}

#[derive(Serialize, Deserialize)]
struct SmoothRaw {
    coefficients: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    f_second_deriv_sup: Option<f64>,
}

impl TryFrom<SmoothRaw> for SmoothDensityModel {
    type Error = Error;
    fn try_from(r: SmoothRaw) -> Result<Self> {
        Self::polynomial(r.coefficients, r.f_second_deriv_sup)
    }
}

impl From<SmoothDensityModel> for SmoothRaw {
    fn from(m: SmoothDensityModel) -> Self {
        SmoothRaw {
            coefficients: m.coefficients,
            f_second_deriv_sup: Some(m.f_second_deriv_sup),
        }
    }
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &cj| acc.mul_add(x, cj))
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(j, cj)| j as f64 * cj).collect()
}

/// Extreme of `g` over `[0, 1]`: grid scan then golden-section refinement.
fn extremum<G: Fn(f64) -> f64>(g: G, maximize: bool) -> f64 {
    let sign = if maximize { 1.0 } else { -1.0 };
    let h = |x: f64| sign * g(x);
    const GRID: usize = 2000;
    let mut best = 0usize;
    let mut best_v = h(0.0);
    for i in 1..=GRID {
        let v = h(i as f64 / GRID as f64);
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    let mut lo = (best.saturating_sub(1)) as f64 / GRID as f64;
    let mut hi = ((best + 1).min(GRID)) as f64 / GRID as f64;
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let x1 = hi - phi * (hi - lo);
        let x2 = lo + phi * (hi - lo);
        if h(x1) < h(x2) {
            lo = x1;
        } else {
            hi = x2;
        }
    }
    sign * best_v.max(h(0.5 * (lo + hi)))
}

impl SmoothDensityModel {
    /// Validate a polynomial density and derive its moments.
    ///
    /// `declared_sup`, if given, is the user's bound on `sup |f''|` and must
    /// not be smaller than the computed value.
    pub fn polynomial(coefficients: Vec<f64>, declared_sup: Option<f64>) -> Result<Self> {
        if coefficients.is_empty() || coefficients.iter().any(|c| !c.is_finite()) {
            return Err(Error::ModelInvalid("density needs finite coefficients".into()));
        }
        let c = &coefficients;
        let moment = |j: usize| -> f64 {
            c.iter()
                .enumerate()
                .map(|(i, ci)| ci / (i + j + 1) as f64)
                .collect::<KahanSum>()
                .value()
        };
        let mass = moment(0);
        if (mass - 1.0).abs() > 1e-8 {
            return Err(Error::ModelInvalid(format!("density integrates to {mass}, not 1")));
        }
        let f_min = extremum(|x| horner(c, x), false);
        if f_min < 0.0 {
            return Err(Error::ModelInvalid(format!("density negative on [0,1] (min {f_min})")));
        }
        let mu = moment(1);
        let sigma2 = moment(2) - mu * mu;

        let cfg = QuadConfig::default();
        let q = |g: &dyn Fn(f64) -> f64| integrate(g, 0.0, 1.0, &[], &cfg).map(|r| r.value);
        let q_mass = q(&|x| horner(c, x))?;
        let q_mu = q(&|x| x * horner(c, x))?;
        let q_m2 = q(&|x| x * x * horner(c, x))?;
        if (q_mass - mass).abs() > 1e-8
            || (q_mu - mu).abs() > 1e-8
            || (q_m2 - q_mu * q_mu - sigma2).abs() > 1e-8
        {
            return Err(Error::ModelInvalid("moments disagree with quadrature".into()));
        }

        let d2 = derivative(&derivative(c));
        let sup = if d2.is_empty() {
            0.0
        } else {
            extremum(|x| horner(&d2, x).abs(), true)
        };
        let declared = match declared_sup {
            Some(s) if s + 1e-9 < sup => {
                return Err(Error::ModelInvalid(format!(
                    "declared sup|f''| = {s} is below the computed {sup}"
                )))
            }
            Some(s) => s,
            None => sup,
        };
        Ok(Self {
            coefficients,
            f_second_deriv_sup: declared,
            mu,
            sigma2,
            f_min,
        })
    }

    pub fn uniform() -> Self {
        Self::polynomial(vec![1.0], None).expect("uniform density is valid")
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn f_second_deriv_sup(&self) -> f64 {
        self.f_second_deriv_sup
    }

    /// `c = sup |f''| / 2`, the constant in the reproduction bound.
    pub fn c_constant(&self) -> f64 {
        0.5 * self.f_second_deriv_sup
    }

    pub fn inf_density(&self) -> f64 {
        self.f_min
    }

    pub fn is_uniform(&self) -> bool {
        self.coefficients.iter().skip(1).all(|&c| c == 0.0) && self.coefficients[0] == 1.0
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let x = x.clamp(0.0, 1.0);
        let anti: f64 = self
            .coefficients
            .iter()
            .enumerate()
            .map(|(j, c)| c * x.powi(j as i32 + 1) / (j + 1) as f64)
            .sum();
        anti.clamp(0.0, 1.0)
    }

    /// `F^{-1}(u)` by safeguarded Newton iteration.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        if self.is_uniform() {
            return u;
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let mut x = u;
        for _ in 0..100 {
            let g = self.cdf(x) - u;
            if g == 0.0 {
                return x;
            }
            if g > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let d = self.density(x);
            let mut next = if d > 0.0 { x - g / d } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * x.max(1e-300) || hi - lo <= 1e-16 {
                return next;
            }
            x = next;
        }
        x
    }
}

impl MixingDensity for SmoothDensityModel {
    fn support(&self) -> (f64, f64) {
        (0.0, 1.0)
    }
    fn density(&self, pi: f64) -> f64 {
        if (0.0..=1.0).contains(&pi) {
            horner(&self.coefficients, pi)
        } else {
            0.0
        }
    }
    fn mean(&self) -> f64 {
        self.mu
    }
    fn variance(&self) -> f64 {
        self.sigma2
    }
}

/// Degenerate mixing law `π ≡ value`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointMassRaw")]
pub struct PointMass {
    pub value: f64,
}

#[derive(Deserialize)]
struct PointMassRaw {
    value: f64,
}

impl TryFrom<PointMassRaw> for PointMass {
    type Error = Error;
    fn try_from(r: PointMassRaw) -> Result<Self> {
        Self::new(r.value)
    }
}

impl PointMass {
    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::ModelInvalid(format!("point mass {value} outside [0, 1]")));
        }
        Ok(Self { value })
    }
}

/// A weight model as it appears in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightModel {
    PowerLaw(PowerLawModel),
    Envelope(EnvelopeModel),
    BoundedPareto(BoundedParetoModel),
    Smooth(SmoothDensityModel),
    PointMass(PointMass),
}

impl WeightModel {
    pub fn kind(&self) -> &'static str {
        match self {
            WeightModel::PowerLaw(_) => "power_law",
            WeightModel::Envelope(_) => "envelope",
            WeightModel::BoundedPareto(_) => "bounded_pareto",
            WeightModel::Smooth(_) => "smooth",
            WeightModel::PointMass(_) => "point_mass",
        }
    }

    /// True when `π` is redrawn for every replicate.
    pub fn is_random(&self) -> bool {
        matches!(self, WeightModel::BoundedPareto(_) | WeightModel::Smooth(_))
    }

    /// Produce a weight vector of length `n`; random models consume `rng`.
    pub fn draw<R: Rng + ?Sized>(&self, n: usize, rng: &mut R, seed: Option<u64>) -> Result<WeightVector> {
        match self {
            WeightModel::PowerLaw(m) => materialize_power_law(m, n),
            WeightModel::Envelope(m) => materialize_power_law(m, n),
            WeightModel::BoundedPareto(m) => sample_bounded_pareto(m, n, rng, seed),
            WeightModel::Smooth(m) => {
                let values = (0..n).map(|_| m.inverse_cdf(rng.random::<f64>())).collect();
                WeightVector::new(values, "smooth", seed)
            }
            WeightModel::PointMass(p) => WeightVector::new(vec![p.value; n], "point_mass", None),
        }
    }
}

/// Model block with the optional seed used by configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBlock {
    #[serde(flatten)]
    pub model: WeightModel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

/// Affine rescaling `π ↦ (√(ζ/n^{2γ}) π + √(ζ'/n^{2γ'})) ∧ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScalingRaw")]
pub struct ScalingMap {
    pub gamma: f64,
    pub zeta: f64,
    #[serde(default)]
    pub gamma_prime: f64,
    #[serde(default)]
    pub zeta_prime: f64,
}

#[derive(Deserialize)]
struct ScalingRaw {
    gamma: f64,
    zeta: f64,
    #[serde(default)]
    gamma_prime: f64,
    #[serde(default)]
    zeta_prime: f64,
}

impl TryFrom<ScalingRaw> for ScalingMap {
    type Error = Error;
    fn try_from(r: ScalingRaw) -> Result<Self> {
        Self::new(r.gamma, r.zeta, r.gamma_prime, r.zeta_prime)
    }
}

impl ScalingMap {
    pub fn new(gamma: f64, zeta: f64, gamma_prime: f64, zeta_prime: f64) -> Result<Self> {
        for (name, v) in [
            ("gamma", gamma),
            ("zeta", zeta),
            ("gamma_prime", gamma_prime),
            ("zeta_prime", zeta_prime),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::ModelInvalid(format!("scaling {name} = {v} must be finite and >= 0")));
            }
        }
        Ok(Self {
            gamma,
            zeta,
            gamma_prime,
            zeta_prime,
        })
    }

    /// The pure multiplicative map with `ζ' = 0`.
    pub fn sparse(gamma: f64, zeta: f64) -> Result<Self> {
        Self::new(gamma, zeta, 0.0, 0.0)
    }

    pub fn identity() -> Self {
        Self {
            gamma: 0.0,
            zeta: 1.0,
            gamma_prime: 0.0,
            zeta_prime: 0.0,
        }
    }

    /// Multiplier `√(ζ/n^{2γ})`.
    pub fn scale(&self, n: usize) -> f64 {
        (self.zeta / (n as f64).powf(2.0 * self.gamma)).sqrt()
    }

    /// Additive shift `√(ζ'/n^{2γ'})`.
    pub fn shift(&self, n: usize) -> f64 {
        (self.zeta_prime / (n as f64).powf(2.0 * self.gamma_prime)).sqrt()
    }

    pub fn map_value(&self, pi: f64, n: usize) -> f64 {
        self.scale(n).mul_add(pi, self.shift(n)).min(1.0)
    }

    /// `μ_n = μ ζ / n^{2γ}`, the effective mixing mean of the scaled model.
    pub fn mu_n(&self, mu: f64, n: usize) -> f64 {
        mu * self.zeta / (n as f64).powf(2.0 * self.gamma)
    }
}

/// Apply `map` elementwise, clamping at one last.
pub fn apply_scaling(pi: &WeightVector, map: &ScalingMap, n: usize) -> Result<WeightVector> {
    let (s, t) = (map.scale(n), map.shift(n));
    let values = pi.values().iter().map(|&v| s.mul_add(v, t).min(1.0)).collect();
    WeightVector::new(values, format!("{}+scaled", pi.model_tag()), pi.seed())
}
