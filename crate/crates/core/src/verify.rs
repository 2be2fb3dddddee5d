//! Verification batteries. Each suite runs one group of numerical checks at
//! the grids and tolerances pinned in [`testcfg`](crate::testcfg) and
//! reports every measured quantity next to the bound it is held to.
//!
//! ```
//! use degreenet::verify::{run, Suite};
//! let report = run(Suite::Dispersion).unwrap();
//! assert!(report.passed);
//! ```

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commands::{self, RunConfig};
use crate::degree_laws::{
    conditional_degree_law, conditional_moments, degree_covariance, edge_probs, extreme_sparse_pmf,
    marginal_moments, marginal_pmf_quadrature, pareto_population_pmf, smooth_repro_pmf, tv_distance_to_poisson,
    default_k_max, MixingLaw,
};
use crate::error::{Error, Result};
use crate::estimate::clt_report;
use crate::numeric::{linear_fit, sample_mean_var};
use crate::oracle::{gamma_ratio_product, poisson_binomial_enumerate};
use crate::sampler::{
    pooled_histogram, replicate_weights, sample_graph_sparse, sample_population, stream_rng, with_pool,
    SampleOptions, SamplerKind, Stream,
};
use crate::specfun::lgamma::ln_gamma_ratio;
use crate::specfun::{
    beta_ratio_step, binom_survival, gamma_ratio_expansion, iota, ln_reg_inc_beta, ln_reg_inc_gamma_lower,
    survival_bounds,
};
use crate::stats::{chi_square_two_sample, ks_normal};
use crate::testcfg::{self as cfg, seeds};
use crate::weights::{
    materialize_power_law, BoundedParetoModel, MixingDensity, PointMass, PowerLawModel, ScalingMap, SmoothDensityModel,
    WeightModel, WeightVector,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    /// Poisson–Binomial recursion against brute-force enumeration.
    Oracle,
    /// Conditional mean, variance, dispersion bounds and covariance.
    Moments,
    /// Marginal dispersion formula against quadrature.
    Dispersion,
    /// Power-law closed form, censoring window and interior slope.
    Pareto,
    /// Smooth-density reproduction bound and its rate in `n`.
    Repro,
    /// Hoeffding sandwich and Normal-approximation rate.
    Specfun,
    /// Poisson approximation of a conditional degree.
    Poisson,
    /// Central limit behaviour of the moment estimator.
    Clt,
    /// Extremely sparse limit by simulation and closed form.
    Extreme,
    /// Dense and sparse samplers agree; sparse cost is near linear.
    Sampler,
    /// Gamma-ratio expansion, truncated-Beta variance, Beta-to-Gamma envelopes.
    Appendix,
    /// Outputs do not depend on the thread count.
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::Oracle,
        Suite::Moments,
        Suite::Dispersion,
        Suite::Pareto,
        Suite::Repro,
        Suite::Specfun,
        Suite::Poisson,
        Suite::Clt,
        Suite::Extreme,
        Suite::Sampler,
        Suite::Appendix,
        Suite::Determinism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Oracle => "oracle",
            Suite::Moments => "moments",
            Suite::Dispersion => "dispersion",
            Suite::Pareto => "pareto",
            Suite::Repro => "repro",
            Suite::Specfun => "specfun",
            Suite::Poisson => "poisson",
            Suite::Clt => "clt",
            Suite::Extreme => "extreme",
            Suite::Sampler => "sampler",
            Suite::Appendix => "appendix",
            Suite::Determinism => "determinism",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::config("suite", format!("unknown suite `{s}`")))
    }
}

/// One measured quantity and the interval it must fall in.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub upper: Option<f64>,
    /// Whether the upper bound is strict.
    pub strict: bool,
    pub passed: bool,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub note: String,
}

impl Check {
    fn make(name: impl Into<String>, measured: f64, lower: Option<f64>, upper: Option<f64>, strict: bool) -> Self {
        let above = lower.map_or(true, |l| measured >= l);
        let below = upper.map_or(true, |u| if strict { measured < u } else { measured <= u });
        Check {
            name: name.into(),
            measured,
            lower,
            upper,
            strict,
            passed: !measured.is_nan() && above && below,
            note: String::new(),
        }
    }

    /// `measured < bound`.
    pub fn below(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::make(name, measured, None, Some(bound), true)
    }

    /// `measured <= bound`.
    pub fn at_most(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        Self::make(name, measured, None, Some(bound), false)
    }

    /// `lo <= measured <= hi`.
    pub fn within(name: impl Into<String>, measured: f64, lo: f64, hi: f64) -> Self {
        Self::make(name, measured, Some(lo), Some(hi), false)
    }

    /// A count of violations out of `total` cases, which must be zero.
    pub fn none_of(name: impl Into<String>, violations: usize, total: usize) -> Self {
        Self::make(name, violations as f64, None, Some(0.0), false).note(format!("{violations} of {total} cases"))
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub passed: bool,
    pub elapsed_seconds: f64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Run one suite on the calling thread's rayon pool.
pub fn run(suite: Suite) -> Result<SuiteReport> {
    let start = Instant::now();
    let checks = match suite {
        Suite::Oracle => oracle()?,
        Suite::Moments => moments()?,
        Suite::Dispersion => dispersion()?,
        Suite::Pareto => pareto()?,
        Suite::Repro => repro()?,
        Suite::Specfun => survival()?,
        Suite::Poisson => poisson()?,
        Suite::Clt => clt()?,
        Suite::Extreme => extreme()?,
        Suite::Sampler => sampler()?,
        Suite::Appendix => appendix()?,
        Suite::Determinism => determinism()?,
    };
    Ok(SuiteReport {
        suite,
        passed: checks.iter().all(|c| c.passed),
        elapsed_seconds: start.elapsed().as_secs_f64(),
        checks,
    })
}

fn elapsed_check(name: &str, start: Instant, limit: f64) -> Check {
    Check::below(format!("{name} runtime seconds"), start.elapsed().as_secs_f64(), limit)
}

/// Weights uniform on `(0, 1]`.
fn random_weights<R: Rng>(rng: &mut R, n: usize) -> Result<WeightVector> {
    let v = (0..n).map(|_| 1.0 - rng.random::<f64>()).collect();
    WeightVector::new(v, "uniform_draw", None)
}

fn oracle() -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut cases = 0;
    for m in cfg::ORACLE_SIZES {
        let mut rng = stream_rng(seeds::ORACLE, m as u64, Stream::Weights);
        for _ in 0..cfg::ORACLE_INSTANCES {
            let pi = random_weights(&mut rng, m + 1)?;
            let i = rng.random_range(0..=m);
            let law = conditional_degree_law(&pi, i)?;
            let brute = poisson_binomial_enumerate(&edge_probs(&pi, i)?);
            for (a, b) in law.pmf.iter().zip(&brute) {
                worst = worst.max((a - b).abs());
            }
            cases += 1;
        }
    }
    Ok(vec![
        Check::at_most("max |recursion - enumeration|", worst, cfg::ORACLE_TOL).note(format!("{cases} instances")),
        elapsed_check("oracle", start, cfg::ORACLE_SECONDS),
    ])
}

fn moments() -> Result<Vec<Check>> {
    let mut rng = stream_rng(seeds::MOMENTS, 0, Stream::Weights);
    let (mut mean_err, mut var_err) = (0.0f64, 0.0f64);
    let (mut gap_bad, mut cov_bad) = (0, 0);
    let mut cov_max = 0.0f64;
    for _ in 0..cfg::MOMENT_VECTORS {
        let n = rng.random_range(2..=cfg::MOMENT_MAX_N);
        let pi = random_weights(&mut rng, n)?;
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let law = conditional_degree_law(&pi, i)?;
        let cm = conditional_moments(&pi, i)?;
        mean_err = mean_err.max((law.mean - cm.mean).abs() / cm.mean.abs().max(1.0));
        var_err = var_err.max((law.variance - cm.variance).abs() / cm.variance.abs().max(1.0));
        let gap = 1.0 - law.variance / law.mean;
        let slack = cfg::MOMENT_TOL;
        if gap < cm.disp_gap_lower - slack || gap > cm.disp_gap_upper + slack {
            gap_bad += 1;
        }
        let cov = degree_covariance(&pi, i, j)?;
        cov_max = cov_max.max(cov);
        if cov > 0.25 {
            cov_bad += 1;
        }
    }
    let total = cfg::MOMENT_VECTORS;
    Ok(vec![
        Check::at_most("pmf mean vs closed form, relative", mean_err, cfg::MOMENT_TOL),
        Check::at_most("pmf variance vs closed form, relative", var_err, cfg::MOMENT_TOL),
        Check::none_of("dispersion gap outside [E/(n-1), pi_i]", gap_bad, total),
        Check::none_of("degree covariance above 1/4", cov_bad, total),
        Check::at_most("largest degree covariance", cov_max, 0.25),
    ])
}

fn reference_pareto() -> Result<BoundedParetoModel> {
    BoundedParetoModel::new(cfg::PARETO_BETA, cfg::PARETO_A, cfg::PARETO_B)
}

fn dispersion() -> Result<Vec<Check>> {
    let laws = [
        ("uniform", MixingLaw::Smooth(SmoothDensityModel::uniform())),
        ("pareto", MixingLaw::BoundedPareto(reference_pareto()?)),
    ];
    let mut out = Vec::new();
    for (name, law) in &laws {
        for n in cfg::DISPERSION_N {
            let closed = marginal_moments(law.mean(), law.variance(), n)?.dispersion;
            let quad = marginal_pmf_quadrature(law, n)?.dispersion();
            out.push(Check::at_most(
                format!("{name} n={n}: |formula - quadrature| dispersion"),
                (closed - quad).abs(),
                cfg::DISPERSION_TOL,
            ));
        }
    }
    Ok(out)
}

fn pareto() -> Result<Vec<Check>> {
    let start = Instant::now();
    let model = reference_pareto()?;
    let n = cfg::PARETO_N;
    let law = pareto_population_pmf(&model, n)?;
    let quad = marginal_pmf_quadrature(&MixingLaw::BoundedPareto(model), n)?;
    let mut worst = 0.0f64;
    let mut worst_k = 0;
    for k in 0..n {
        if k as f64 > cfg::PARETO_BETA && law.pmf[k] > cfg::PARETO_PMF_FLOOR {
            let rel = ((law.pmf[k] - quad.pmf[k]) / quad.pmf[k]).abs();
            if rel > worst {
                worst = rel;
                worst_k = k;
            }
        }
    }
    let nf = n as f64;
    let mu = model.mean();
    let (lo, hi) = (nf * mu * model.a - 5.0 * nf.sqrt(), nf * mu * model.b + 5.0 * nf.sqrt());
    let outside: f64 = law
        .pmf
        .iter()
        .enumerate()
        .filter(|(k, _)| (*k as f64) < lo || (*k as f64) > hi)
        .map(|(_, p)| p)
        .sum();
    let (ka, kb) = interior_window(nf, mu * model.a, mu * model.b);
    let (xs, ys): (Vec<f64>, Vec<f64>) = (ka..=kb)
        .map(|k| ((k as f64).ln(), law.pmf[k].ln()))
        .unzip();
    let slope = linear_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope);
    Ok(vec![
        Check::at_most("max relative |closed form - quadrature|", worst, cfg::PARETO_REL_TOL)
            .note(format!("at k = {worst_k}")),
        Check::below("mass outside the censoring window", outside, cfg::PARETO_OUTSIDE_MASS)
            .note(format!("window [{lo:.1}, {hi:.1}]")),
        Check::within(
            "interior log-log slope",
            slope,
            -cfg::PARETO_BETA - cfg::PARETO_SLOPE_TOL,
            -cfg::PARETO_BETA + cfg::PARETO_SLOPE_TOL,
        )
        .note(format!("k in [{ka}, {kb}]")),
        elapsed_check("pareto", start, cfg::PARETO_SECONDS),
    ])
}

/// Degrees at least `PARETO_INTERIOR_SD` Binomial standard deviations
/// inside both censoring edges `n p_lo` and `n p_hi`.
pub fn interior_window(n: f64, p_lo: f64, p_hi: f64) -> (usize, usize) {
    let s = cfg::PARETO_INTERIOR_SD;
    let lo = n * p_lo + s * (n * p_lo * (1.0 - p_lo)).sqrt();
    let hi = n * p_hi - s * (n * p_hi * (1.0 - p_hi)).sqrt();
    (lo.ceil() as usize, hi.floor() as usize)
}

fn repro() -> Result<Vec<Check>> {
    let start = Instant::now();
    let mut out = Vec::new();
    for (name, f) in commands::figure3_densities().into_iter().take(2) {
        let mut sup = Vec::new();
        for n in cfg::REPRO_N {
            let approx = smooth_repro_pmf(&f, n)?;
            let quad = marginal_pmf_quadrature(&MixingLaw::Smooth(f.clone()), n)?;
            let bound = approx.column("bound").unwrap_or_default();
            let nmu = n as f64 * f.mean();
            let mut bad = 0;
            let mut worst = 0.0f64;
            let mut tight = 0.0f64;
            for k in 0..n {
                let err = (quad.pmf[k] - approx.pmf[k]).abs();
                worst = worst.max(nmu * err);
                if bound[k] > 0.0 {
                    tight = tight.max(err / bound[k]);
                }
                if err >= bound[k] && err > 0.0 {
                    bad += 1;
                }
            }
            out.push(Check::none_of(format!("{name} n={n}: entries breaking the bound"), bad, n).note(format!(
                "largest error/bound {tight:.3}"
            )));
            sup.push(worst);
        }
        for (w, n) in sup.windows(2).zip(cfg::REPRO_N.windows(2)) {
            let t = cfg::REPRO_HALVING_TOL;
            out.push(Check::within(
                format!("{name}: sup error ratio n={} to n={}", n[0], n[1]),
                w[0] / w[1],
                2.0 * (1.0 - t),
                2.0 * (1.0 + t),
            ));
        }
    }
    out.push(elapsed_check("repro", start, cfg::REPRO_SECONDS));
    Ok(out)
}

fn survival() -> Result<Vec<Check>> {
    let mut bad = 0;
    let mut total = 0;
    let mut consts = Vec::new();
    for n in cfg::SURVIVAL_N {
        let mut c_n = 0.0f64;
        for mu in cfg::mu_grid() {
            for k in 0..n {
                let s = binom_survival(k, n, mu)?;
                let b = survival_bounds(k, n, mu)?;
                if !(b.lower <= s && s <= b.upper) {
                    bad += 1;
                }
                total += 1;
                c_n = c_n.max((s - b.normal_approx).abs() * (n as f64).sqrt());
            }
        }
        consts.push(c_n);
    }
    let (lo, hi) = consts.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &c| (a.min(c), b.max(c)));
    Ok(vec![
        Check::none_of("survival outside the Hoeffding sandwich", bad, total),
        Check::at_most("max C / min C for |I - Normal| <= C/sqrt(n)", hi / lo, cfg::BERRY_ESSEEN_SPREAD)
            .note(format!("C by n: {consts:?}")),
    ])
}

fn poisson() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for gamma in cfg::POISSON_GAMMAS {
        let model = PowerLawModel::new(gamma, 1.0)?;
        let mut rows: Vec<(usize, usize, f64, f64)> = Vec::new();
        for n in cfg::POISSON_N {
            let pi = materialize_power_law(&model, n)?;
            for node in [1, n / 2] {
                let d = tv_distance_to_poisson(&pi, node - 1)?;
                rows.push((node, n, d.tv, d.tv / d.bound_scale));
            }
        }
        for which in ["1", "n/2"] {
            let series: Vec<&(usize, usize, f64, f64)> = rows
                .iter()
                .filter(|r| (which == "1") == (r.0 == 1))
                .collect();
            let rises = series.windows(2).filter(|w| w[1].2 >= w[0].2).count();
            let tvs: Vec<f64> = series.iter().map(|r| r.2).collect();
            out.push(
                Check::none_of(format!("gamma={gamma} i={which}: TV not decreasing in n"), rises, series.len() - 1)
                    .note(format!("TV {}", sci(&tvs))),
            );
            let ratio = series.iter().map(|r| r.3).fold(0.0, f64::max);
            out.push(Check::below(
                format!("gamma={gamma} i={which}: max TV / bound scale"),
                ratio,
                cfg::POISSON_RATIO_MAX,
            ));
        }
    }
    Ok(out)
}

fn clt() -> Result<Vec<Check>> {
    let start = Instant::now();
    let model = WeightModel::PowerLaw(PowerLawModel::new(cfg::CLT_GAMMA, 1.0)?);
    let n = cfg::CLT_N;
    let pi = replicate_weights(&model, None, n, seeds::CLT, 0)?;
    let pi1 = pi.values()[0];
    let expected_sum = pi.l1() * pi.l1() - pi.l2sq();
    let samples = sample_population(&model, None, n, cfg::CLT_REPLICATES, seeds::CLT, &SampleOptions::default())?;
    let rows: Vec<(f64, bool, f64)> = samples
        .par_iter()
        .map(|s| {
            let d: Vec<u64> = s.degrees.iter().map(|&x| u64::from(x)).collect();
            let r = clt_report(&d, cfg::CLT_LEVEL)?;
            let (lo, hi) = r.intervals[0];
            let root_gap = (r.degree_sum as f64).sqrt() - expected_sum.sqrt();
            Ok(((r.pi_hat[0] - pi1) / r.std_errors[0], lo <= pi1 && pi1 <= hi, root_gap))
        })
        .collect::<Result<_>>()?;
    let z: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let coverage = rows.iter().filter(|r| r.1).count() as f64 / rows.len() as f64;
    let gaps: Vec<f64> = rows.iter().map(|r| r.2).collect();
    let (_, gap_var) = sample_mean_var(&gaps);
    let (z_mean, z_var) = sample_mean_var(&z);
    let (c_lo, c_hi) = cfg::CLT_COVERAGE;
    Ok(vec![
        Check::below("KS distance of standardized estimate to N(0,1)", ks_normal(&z), cfg::CLT_KS_MAX)
            .note(format!("standardized mean {z_mean:.4}, sd {:.4}", z_var.sqrt())),
        Check::within("interval coverage of pi_1", coverage, c_lo, c_hi),
        Check::below("sd of sqrt(sum d) - sqrt(E sum d)", gap_var.sqrt(), cfg::CLT_ROOT_SD_MAX),
        elapsed_check("clt", start, cfg::CLT_SECONDS),
    ])
}

fn extreme() -> Result<Vec<Check>> {
    let uniform = SmoothDensityModel::uniform();
    let zeta = cfg::EXTREME_ZETA;
    let model = WeightModel::Smooth(uniform.clone());
    let map = ScalingMap::sparse(0.5, zeta)?;
    let samples = sample_population(
        &model,
        Some(&map),
        cfg::EXTREME_N,
        cfg::EXTREME_REPLICATES,
        seeds::EXTREME,
        &SampleOptions::default(),
    )?;
    let hist = pooled_histogram(&samples);
    let (mean, var) = hist_moments(&hist);
    let want_mean = zeta / 4.0;
    let want_disp = 1.0 + zeta / 12.0;
    let limit = extreme_sparse_pmf(&uniform, 2.0, default_k_max(&uniform, 2.0)?)?;
    let closed = 1.0 - (-1.0f64).exp();
    Ok(vec![
        Check::at_most("pooled mean, relative gap to zeta/4", (mean / want_mean - 1.0).abs(), cfg::EXTREME_MEAN_REL)
            .note(format!("mean {mean:.4}")),
        Check::at_most(
            "pooled dispersion, relative gap to 1 + zeta/12",
            (var / mean / want_disp - 1.0).abs(),
            cfg::EXTREME_DISPERSION_REL,
        )
        .note(format!("dispersion {:.4}", var / mean)),
        Check::at_most(
            "limit pmf at zeta=2, k=0 vs 1 - 1/e",
            (limit.pmf[0] - closed).abs(),
            cfg::EXTREME_CLOSED_FORM_TOL,
        ),
    ])
}

fn sci(xs: &[f64]) -> String {
    let parts: Vec<String> = xs.iter().map(|x| format!("{x:.3e}")).collect();
    parts.join(", ")
}

/// Mean and unbiased variance of the values tallied in `hist`.
pub fn hist_moments(hist: &[u64]) -> (f64, f64) {
    let total: f64 = hist.iter().map(|&c| c as f64).sum();
    let mean = hist.iter().enumerate().map(|(k, &c)| k as f64 * c as f64).sum::<f64>() / total;
    let ss: f64 = hist
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 * (k as f64 - mean).powi(2))
        .sum();
    (mean, ss / (total - 1.0))
}

fn sampler() -> Result<Vec<Check>> {
    let models = [
        ("power law 0.5", WeightModel::PowerLaw(PowerLawModel::new(0.5, 1.0)?)),
        ("point mass", WeightModel::PointMass(PointMass::new(0.3f64.sqrt())?)),
        ("pareto", WeightModel::BoundedPareto(reference_pareto()?)),
    ];
    let dense = SampleOptions {
        kind: SamplerKind::Dense,
        ..SampleOptions::default()
    };
    let sparse = SampleOptions::default();
    let mut out = Vec::new();
    for (name, model) in &models {
        let run = |seed, opts| sample_population(model, None, cfg::SAMPLER_N, cfg::SAMPLER_REPLICATES, seed, opts);
        let a = run(seeds::SAMPLER_DENSE, &dense)?;
        let b = run(seeds::SAMPLER_SPARSE, &sparse)?;
        let bad = a.iter().chain(&b).filter(|s| !s.handshake_holds()).count();
        out.push(Check::none_of(format!("{name}: handshake failures"), bad, a.len() + b.len()));
        let chi = chi_square_two_sample(&pooled_histogram(&a), &pooled_histogram(&b))?;
        out.push(
            Check::make(format!("{name}: dense vs sparse chi-square p-value"), chi.p_value, Some(cfg::ALPHA), None, false)
                .note(format!("statistic {:.2} on {} dof", chi.statistic, chi.dof)),
        );
    }
    let (t_small, t_large) = (bench(cfg::BENCH_N.0)?, bench(cfg::BENCH_N.1)?);
    out.push(
        Check::at_most("sparse sampler time ratio, 10x nodes", t_large / t_small, cfg::BENCH_RATIO_MAX)
            .note(format!("{t_small:.4}s vs {t_large:.4}s")),
    );
    Ok(out)
}

/// Fastest of `BENCH_RUNS` timings of the sparse sampler at size `n`.
fn bench(n: usize) -> Result<f64> {
    let model = WeightModel::Smooth(SmoothDensityModel::uniform());
    let map = ScalingMap::sparse(0.5, cfg::BENCH_ZETA)?;
    let pi = replicate_weights(&model, Some(&map), n, seeds::BENCH, 0)?;
    let mut best = f64::INFINITY;
    for r in 0..cfg::BENCH_RUNS {
        let t = Instant::now();
        let g = sample_graph_sparse(&pi, seeds::BENCH, r as u64)?;
        best = best.min(t.elapsed().as_secs_f64());
        std::hint::black_box(g);
    }
    Ok(best)
}

fn appendix() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let zs = cfg::gamma_ratio_z_grid();
    for beta in cfg::GAMMA_RATIO_BETAS {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &z in &zs {
            let exact = gamma_ratio_product(z, beta);
            let rel = (gamma_ratio_expansion(z, f64::from(beta))? / exact - 1.0).abs();
            xs.push(z.ln());
            ys.push(rel.ln());
        }
        let slope = linear_fit(&xs, &ys).map_or(f64::NAN, |f| f.slope);
        let (o, t) = (cfg::GAMMA_RATIO_ORDER, cfg::GAMMA_RATIO_ORDER_TOL);
        out.push(Check::within(
            format!("beta={beta}: log-log decay rate of expansion error"),
            slope,
            o - t,
            o + t,
        ));
    }
    out.extend(truncated_beta_variance()?);
    out.extend(beta_gamma_envelopes()?);
    Ok(out)
}

/// `(k+2)/(n+2) ι' - (k+1)/(n+1) ι < 1/(n+2)` over the survival grid.
fn truncated_beta_variance() -> Result<Vec<Check>> {
    let mut worst = f64::NEG_INFINITY;
    let mut bad = 0;
    let mut failed = 0;
    let mut total = 0;
    for n in cfg::SURVIVAL_N {
        let nf = n as f64;
        for mu in cfg::mu_grid() {
            for k in 0..n {
                total += 1;
                let kf = k as f64;
                let r1 = iota(k, n, mu);
                let r2 = beta_ratio_step(mu, kf + 2.0, nf - kf);
                match (r1, r2) {
                    (Ok(r1), Ok(r2)) => {
                        let lhs = (kf + 2.0) / (nf + 2.0) * r2 - (kf + 1.0) / (nf + 1.0) * r1;
                        let scaled = lhs * (nf + 2.0);
                        worst = worst.max(scaled);
                        if scaled >= 1.0 {
                            bad += 1;
                        }
                    }
                    _ => failed += 1,
                }
            }
        }
    }
    Ok(vec![
        Check::below("max (n+2) x truncated-Beta variance gap", worst, 1.0),
        Check::none_of("truncated-Beta inequality violations", bad, total),
        Check::none_of("truncated-Beta grid points not evaluable", failed, total),
    ])
}

fn beta_gamma_envelopes() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    let mut maxima = Vec::new();
    let (mut eps_bad, mut eps_total) = (0, 0);
    let mut eps_min = f64::INFINITY;
    let mut eps_rel = 0.0f64;
    for n in cfg::SPARSE_FAMILY_N {
        let nf = n as f64;
        let mu_n = cfg::SPARSE_FAMILY_C * nf.powf(cfg::SPARSE_FAMILY_EXPONENT);
        let k_top = nf.powf(0.4).floor() as usize;
        let mut worst = 0.0f64;
        let mut worst_env = 0.0f64;
        for k in 0..=k_top {
            let kf = k as f64;
            for delta in cfg::SPARSE_FAMILY_DELTAS {
                let a = kf + delta;
                let ln_i = ln_reg_inc_beta(mu_n, a, nf - kf)?;
                let err = (ln_i - ln_reg_inc_gamma_lower(a, nf * mu_n)?).exp_m1().abs();
                let env = kf * kf / nf + kf * mu_n + nf * mu_n * mu_n;
                worst = worst.max(err);
                worst_env = worst_env.max(err / env);

                let m = nf - kf - 1.0;
                let ln_lead = ln_gamma_ratio(nf - kf, kf + delta) - a * m.ln() + ln_reg_inc_gamma_lower(a, m * mu_n)?;
                let eps = -(ln_i - ln_lead).exp_m1();
                let bound = m * mu_n * mu_n / (1.0 - mu_n).powi(2) / 2.0;
                eps_total += 1;
                eps_min = eps_min.min(eps);
                eps_rel = eps_rel.max(eps / bound);
                if !(eps >= 0.0 && eps < bound) {
                    eps_bad += 1;
                }
            }
        }
        out.push(Check::at_most(
            format!("n={n}: Beta/Gamma relative error over envelope"),
            worst_env,
            cfg::SPARSE_ENVELOPE_C,
        ));
        maxima.push(worst);
    }
    let rises = maxima.windows(2).filter(|w| w[1] >= w[0]).count();
    out.push(
        Check::none_of("Beta/Gamma max error not shrinking in n", rises, maxima.len() - 1)
            .note(format!("max errors {}", sci(&maxima))),
    );
    out.push(
        Check::none_of("deficit outside [0, (n-k-1) mu^2 / (2 (1-mu)^2))", eps_bad, eps_total)
            .note(format!("smallest deficit {eps_min:.3e}, largest deficit/bound {eps_rel:.3}")),
    );
    Ok(out)
}

/// Configurations replayed under each thread count.
fn determinism_configs() -> Result<Vec<RunConfig>> {
    let sim = r#"{"command": "simulate", "model": {"kind": "bounded_pareto", "beta": 3, "a": 0.3333333333333333, "b": 1},
        "n": 3000, "replicates": 12, "master_seed": 20240601}"#;
    let sparse = r#"{"command": "simulate", "model": {"kind": "smooth", "coefficients": [1]},
        "scaling": {"gamma": 0.5, "zeta": 12}, "n": 20000, "replicates": 6, "master_seed": 7}"#;
    let pmf = r#"{"command": "exact_pmf", "model": {"kind": "smooth", "coefficients": [0.5, 0, 1.5]}, "n": 300}"#;
    let mut out = Vec::new();
    for text in [sim, sparse, pmf] {
        let mut c = RunConfig::from_json(text, "determinism")?;
        c.master_seed = c.master_seed.map(|s| s ^ seeds::DETERMINISM);
        out.push(c);
    }
    Ok(out)
}

fn determinism() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for cfg_run in determinism_configs()? {
        let runs: Vec<Vec<(String, Vec<u8>)>> = cfg::DETERMINISM_THREADS
            .iter()
            .map(|&t| with_pool(Some(t), || commands::execute(&cfg_run)))
            .map(|r| r.map(|o| o.artifacts.into_iter().map(|a| (a.name, a.bytes)).collect()))
            .collect::<Result<_>>()?;
        let differing = runs[1..].iter().filter(|r| **r != runs[0]).count();
        out.push(
            Check::none_of(
                format!("{}: outputs differing from the 1-thread run", cfg_run.command_name()),
                differing,
                runs.len() - 1,
            )
            .note(format!("threads {:?}, {} files", cfg::DETERMINISM_THREADS, runs[0].len())),
        );
    }
    Ok(out)
}
