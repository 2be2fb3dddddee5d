//! Run configurations and the command implementations behind the CLI.
//!
//! [`execute`] turns a [`RunConfig`] into in-memory artifacts plus a
//! manifest, and [`write_outputs`] puts them on disk. Keeping the two apart
//! lets the same run be compared byte for byte under different thread counts.
//!
//! ```
//! use degreenet::commands::{execute, RunConfig};
//! let cfg = RunConfig::from_json(
//!     r#"{"command": "exact_pmf", "model": {"kind": "point_mass", "value": 0.5}, "n": 5}"#,
//!     "inline",
//! ).unwrap();
//! let out = execute(&cfg).unwrap();
//! let csv = String::from_utf8(out.artifacts[0].bytes.clone()).unwrap();
//! assert!(csv.starts_with("# degreenet-schema v1\nk,pmf,provenance,n\n"));
//! let p0: f64 = csv.lines().nth(2).unwrap().split(',').nth(1).unwrap().parse().unwrap();
//! assert!((p0 - 81.0 / 256.0).abs() < 1e-15);
//! ```

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::degree_laws::{
    conditional_degree_law, default_k_max, extreme_sparse_pmf, marginal_pmf_quadrature, pareto_population_pmf,
    smooth_repro_pmf, sparse_pmf, DegreeLaw, MixingLaw, SCHEMA_HEADER,
};
use crate::error::{Error, Result};
use crate::estimate::{clt_report, fit_exponent, parse_degrees, parse_edge_list};
use crate::sampler::{
    pooled_histogram, histograms_csv, replicate_weights, sample_population, stream_seed, GraphSample,
    SampleOptions, SamplerKind, Stream,
};
use crate::specfun::{ln_reg_inc_beta, survival_bounds};
use crate::verify::{self, Suite};
use crate::weights::{BoundedParetoModel, MixingDensity, ModelBlock, ScalingMap, SmoothDensityModel, WeightModel};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VALIDATION: u8 = 1;
pub const EXIT_NUMERIC: u8 = 2;
pub const EXIT_VERIFY: u8 = 3;

/// Process exit status for a failed run.
pub fn exit_code(e: &Error) -> u8 {
    if e.is_numeric() {
        EXIT_NUMERIC
    } else {
        EXIT_VALIDATION
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    ExactPmf,
    Simulate,
    Figure,
    Estimate,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::ExactPmf => "exact_pmf",
            Command::Simulate => "simulate",
            Command::Figure => "figure",
            Command::Estimate => "estimate",
            Command::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Which degree law `exact_pmf` computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Law {
    /// Poisson–Binomial law of one node given the weights.
    Conditional,
    /// Mixed Binomial law by quadrature.
    Marginal,
    /// Power-law closed form beside its quadrature ground truth.
    Pareto,
    /// Smooth-density reproduction formula beside quadrature.
    Repro,
    /// Sparse-regime Beta or Gamma form.
    Sparse,
    /// Mixed Poisson limit of the extremely sparse regime.
    Extreme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputFormat {
    #[default]
    EdgeList,
    Degrees,
}

/// Everything a run needs. Fields a command does not use are ignored by it;
/// missing required fields are reported by name.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelBlock>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingMap>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicates: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub law: Option<Law>,
    /// Node index (0-based) for the conditional law.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub node: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampler: Option<SamplerKind>,
    /// Also write every replicate's degree vector.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub write_degrees: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub figure: Option<u8>,
    /// Mixing densities for figure 3.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub densities: Option<Vec<SmoothDensityModel>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_format: Option<InputFormat>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub one_indexed: bool,
    /// A suite name or `all`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suite: Option<String>,
}

impl RunConfig {
    /// Parse JSON, reporting syntax and schema errors with line and column.
    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            Error::config(
                format!("{source} line {} column {}", e.line(), e.column()),
                e.to_string(),
            )
        })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
        Self::from_json(&text, &path.display().to_string())
    }

    pub fn command_name(&self) -> &'static str {
        self.command.map_or("unset", Command::name)
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}

fn required<T: Clone>(v: &Option<T>, field: &str, command: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::config(format!("field `{field}`"), format!("required by {command}")))
}

fn invalid(field: &str, message: impl Into<String>) -> Error {
    Error::config(format!("field `{field}`"), message)
}

/// A named output file held in memory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

impl Artifact {
    fn text(name: &str, s: String) -> Self {
        Artifact {
            name: name.to_string(),
            bytes: s.into_bytes(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputEntry {
    pub path: String,
    pub bytes: usize,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateSeeds {
    pub replicate_id: u64,
    pub weights: u64,
    pub graph: u64,
}

/// What was run, from which inputs, producing which files.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    /// The configuration with defaults filled in and `output_dir` removed.
    pub config: RunConfig,
    pub config_sha256: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub master_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed_scheme: Option<&'static str>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub replicate_seeds: Vec<ReplicateSeeds>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input_sha256: Option<String>,
    pub outputs: Vec<OutputEntry>,
    pub summary: Value,
}

/// Artifacts of one run. The manifest is the last artifact.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub artifacts: Vec<Artifact>,
    pub manifest: Manifest,
    /// Set by `verify` when any check failed.
    pub verification_failed: bool,
}

impl RunOutput {
    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }

    pub fn exit_code(&self) -> u8 {
        if self.verification_failed {
            EXIT_VERIFY
        } else {
            EXIT_OK
        }
    }
}

const SEED_SCHEME: &str = "chacha8 seeded by splitmix64(splitmix64(splitmix64(master) ^ replicate) ^ stream)";

fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Results of a command before the manifest is attached.
struct Produced {
    config: RunConfig,
    artifacts: Vec<Artifact>,
    summary: Value,
    replicates: Option<u64>,
    input_sha256: Option<String>,
    verification_failed: bool,
}

impl Produced {
    fn new(config: RunConfig, artifacts: Vec<Artifact>, summary: Value) -> Self {
        Produced {
            config,
            artifacts,
            summary,
            replicates: None,
            input_sha256: None,
            verification_failed: false,
        }
    }
}

/// Run the configured command.
pub fn execute(cfg: &RunConfig) -> Result<RunOutput> {
    let command = required(&cfg.command, "command", "every run")?;
    let produced = match command {
        Command::ExactPmf => exact_pmf(cfg)?,
        Command::Simulate => simulate(cfg)?,
        Command::Figure => figure(cfg)?,
        Command::Estimate => estimate(cfg)?,
        Command::Verify => verify_cmd(cfg)?,
    };
    let mut config = produced.config;
    config.command = Some(command);
    config.output_dir = None;
    let config_sha256 = sha256_hex(serde_json::to_string(&config)?.as_bytes());
    let replicate_seeds = match (config.master_seed, produced.replicates) {
        (Some(m), Some(r)) => (0..r)
            .map(|id| ReplicateSeeds {
                replicate_id: id,
                weights: stream_seed(m, id, Stream::Weights),
                graph: stream_seed(m, id, Stream::Graph),
            })
            .collect(),
        _ => Vec::new(),
    };
    let manifest = Manifest {
        tool: "degreenet",
        version: env!("CARGO_PKG_VERSION"),
        command: command.name(),
        master_seed: config.master_seed,
        seed_scheme: produced.replicates.map(|_| SEED_SCHEME),
        config,
        config_sha256,
        replicate_seeds,
        input_sha256: produced.input_sha256,
        outputs: produced
            .artifacts
            .iter()
            .map(|a| OutputEntry {
                path: a.name.clone(),
                bytes: a.bytes.len(),
                sha256: sha256_hex(&a.bytes),
            })
            .collect(),
        summary: produced.summary,
    };
    let mut artifacts = produced.artifacts;
    let mut text = serde_json::to_string_pretty(&manifest)?;
    text.push('\n');
    artifacts.push(Artifact::text("manifest.json", text));
    Ok(RunOutput {
        artifacts,
        manifest,
        verification_failed: produced.verification_failed,
    })
}

/// Write every artifact under `dir`, creating it if needed.
pub fn write_outputs(out: &RunOutput, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| Error::config(format!("output_dir {}", dir.display()), e.to_string()))?;
    out.artifacts
        .iter()
        .map(|a| {
            let path = dir.join(&a.name);
            std::fs::write(&path, &a.bytes).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
            Ok(path)
        })
        .collect()
}

/// CSV builder that writes the schema header first and leaves non-finite
/// numbers empty.
struct Table(String);

enum Cell<'a> {
    I(u64),
    F(f64),
    S(&'a str),
}

impl Table {
    fn new(columns: &[&str]) -> Self {
        Table(format!("{SCHEMA_HEADER}\n{}\n", columns.join(",")))
    }

    fn row(&mut self, cells: &[Cell]) {
        for (i, c) in cells.iter().enumerate() {
            if i > 0 {
                self.0.push(',');
            }
            let _ = match c {
                Cell::I(v) => write!(self.0, "{v}"),
                Cell::F(v) if v.is_finite() => write!(self.0, "{v}"),
                Cell::F(_) => Ok(()),
                Cell::S(s) => write!(self.0, "{s}"),
            };
        }
        self.0.push('\n');
    }

    fn finish(self, name: &str) -> Artifact {
        Artifact::text(name, self.0)
    }
}

fn law_artifact(law: &DegreeLaw, format: Format, stem: &str) -> Result<Artifact> {
    Ok(match format {
        Format::Csv => Artifact::text(&format!("{stem}.csv"), law.to_csv()),
        Format::Json => Artifact::text(&format!("{stem}.json"), law.to_json()? + "\n"),
    })
}

fn default_law(model: &WeightModel, scaling: Option<&ScalingMap>) -> Law {
    match model {
        WeightModel::PowerLaw(_) | WeightModel::Envelope(_) => Law::Conditional,
        WeightModel::PointMass(_) => Law::Marginal,
        WeightModel::BoundedPareto(_) => Law::Pareto,
        WeightModel::Smooth(_) => match scaling {
            Some(m) if m.gamma > 0.0 => Law::Sparse,
            _ => Law::Repro,
        },
    }
}

fn smooth_of(model: &WeightModel, law: Law) -> Result<SmoothDensityModel> {
    match model {
        WeightModel::Smooth(f) => Ok(f.clone()),
        other => Err(invalid("model", format!("law {law:?} needs a smooth density, got {}", other.kind()))),
    }
}

fn pareto_of(model: &WeightModel) -> Result<BoundedParetoModel> {
    match model {
        WeightModel::BoundedPareto(m) => Ok(*m),
        other => Err(invalid("model", format!("law Pareto needs a bounded_pareto model, got {}", other.kind()))),
    }
}

fn exact_pmf(cfg: &RunConfig) -> Result<Produced> {
    let cmd = "exact_pmf";
    let block = required(&cfg.model, "model", cmd)?;
    let model = &block.model;
    let law_kind = cfg.law.unwrap_or_else(|| default_law(model, cfg.scaling.as_ref()));
    let mut resolved = cfg.clone();
    resolved.law = Some(law_kind);
    let n = if law_kind == Law::Extreme {
        0
    } else {
        required(&cfg.n, "n", cmd)?
    };
    let law = match law_kind {
        Law::Conditional => {
            let seed = block.seed.or(cfg.master_seed);
            if model.is_random() && seed.is_none() {
                return Err(invalid("master_seed", "a random weight model needs a seed"));
            }
            let node = cfg.node.unwrap_or(0);
            resolved.node = Some(node);
            let pi = replicate_weights(model, cfg.scaling.as_ref(), n, seed.unwrap_or(0), 0)?;
            conditional_degree_law(&pi, node)?
        }
        Law::Marginal => {
            if cfg.scaling.is_some() {
                return Err(invalid("scaling", "the marginal law is unscaled; use law sparse or extreme"));
            }
            let mixing = MixingLaw::try_from(model.clone()).map_err(|e| invalid("model", e.to_string()))?;
            marginal_pmf_quadrature(&mixing, n)?
        }
        Law::Pareto => {
            let m = pareto_of(model)?;
            let law = pareto_population_pmf(&m, n)?;
            let quad = marginal_pmf_quadrature(&MixingLaw::BoundedPareto(m), n)?;
            let rel: Vec<f64> = law
                .pmf
                .iter()
                .zip(&quad.pmf)
                .map(|(a, q)| ((a - q) / q).abs())
                .collect();
            let worst = (0..n)
                .filter(|&k| k as f64 > m.beta && law.pmf[k] > 1e-12)
                .map(|k| rel[k])
                .fold(0.0, f64::max);
            law.with_column("quadrature", quad.pmf)
                .with_column("rel_error", rel)
                .with_meta("max_rel_error", worst)
        }
        Law::Repro => {
            let f = smooth_of(model, law_kind)?;
            repro_with_quadrature(&f, n)?
        }
        Law::Sparse => {
            let f = smooth_of(model, law_kind)?;
            let map = required(&cfg.scaling, "scaling", "law sparse")?;
            sparse_pmf(&f, &map, n)?
        }
        Law::Extreme => {
            let f = smooth_of(model, law_kind)?;
            let zeta = required(&cfg.scaling, "scaling", "law extreme")?.zeta;
            let k_max = match cfg.k_max {
                Some(k) => k,
                None => default_k_max(&f, zeta)?,
            };
            resolved.k_max = Some(k_max);
            extreme_sparse_pmf(&f, zeta, k_max)?
        }
    };
    let summary = json!({
        "law": law_kind,
        "provenance": law.provenance,
        "mean": law.mean,
        "variance": law.variance,
        "mass": law.mass,
        "metadata": law.metadata,
    });
    let art = law_artifact(&law, cfg.format, "pmf")?;
    Ok(Produced::new(resolved, vec![art], summary))
}

/// Reproduction formula with quadrature and the scaled comparison columns
/// `nμ·pmf` and `f(k/(nμ) ∧ 1)`.
fn repro_with_quadrature(f: &SmoothDensityModel, n: usize) -> Result<DegreeLaw> {
    let law = smooth_repro_pmf(f, n)?;
    let quad = marginal_pmf_quadrature(&MixingLaw::Smooth(f.clone()), n)?;
    let nmu = n as f64 * f.mean();
    let scaled_quad: Vec<f64> = quad.pmf.iter().map(|p| nmu * p).collect();
    let scaled_approx: Vec<f64> = law.pmf.iter().map(|p| nmu * p).collect();
    let target: Vec<f64> = (0..n).map(|k| f.density((k as f64 / nmu).min(1.0))).collect();
    let dev = (0..n)
        .filter(|&k| k as f64 <= nmu)
        .map(|k| (scaled_quad[k] - target[k]).abs())
        .fold(0.0, f64::max);
    let err = law
        .pmf
        .iter()
        .zip(&quad.pmf)
        .map(|(a, q)| nmu * (a - q).abs())
        .fold(0.0, f64::max);
    Ok(law
        .with_column("quadrature", quad.pmf)
        .with_column("scaled_quadrature", scaled_quad)
        .with_column("scaled_approx", scaled_approx)
        .with_column("f_k_over_nmu", target)
        .with_meta("max_deviation_k_le_nmu", dev)
        .with_meta("max_scaled_error", err))
}

fn simulate(cfg: &RunConfig) -> Result<Produced> {
    let cmd = "simulate";
    let block = required(&cfg.model, "model", cmd)?;
    let n = required(&cfg.n, "n", cmd)?;
    let seed = required(&cfg.master_seed, "master_seed", cmd)?;
    let replicates = cfg.replicates.unwrap_or(1);
    let kind = cfg.sampler.unwrap_or_default();
    let mut resolved = cfg.clone();
    resolved.replicates = Some(replicates);
    resolved.sampler = Some(kind);
    let opts = SampleOptions {
        kind,
        ..SampleOptions::default()
    };
    let samples = sample_population(&block.model, cfg.scaling.as_ref(), n, replicates, seed, &opts)?;
    let pooled = pooled_histogram(&samples);
    let mut artifacts = vec![Artifact::text("histograms.csv", histograms_csv(&samples))];
    artifacts.push(pooled_artifact(&pooled, cfg.format)?);
    artifacts.push(replicate_summary(&samples, cfg.format)?);
    if cfg.write_degrees {
        let mut t = Table::new(&["replicate_id", "node", "degree"]);
        for s in &samples {
            for (i, &d) in s.degrees.iter().enumerate() {
                t.row(&[Cell::I(s.replicate_id), Cell::I(i as u64), Cell::I(u64::from(d))]);
            }
        }
        artifacts.push(t.finish("degrees.csv"));
    }
    let (mean, var) = verify::hist_moments(&pooled);
    let summary = json!({
        "pooled_mean": mean,
        "pooled_variance": var,
        "pooled_dispersion": var / mean,
        "handshake_ok": samples.iter().all(GraphSample::handshake_holds),
    });
    let mut p = Produced::new(resolved, artifacts, summary);
    p.replicates = Some(replicates);
    Ok(p)
}

fn pooled_artifact(pooled: &[u64], format: Format) -> Result<Artifact> {
    let total: u64 = pooled.iter().sum();
    Ok(match format {
        Format::Csv => {
            let mut t = Table::new(&["k", "count", "frequency"]);
            for (k, &c) in pooled.iter().enumerate() {
                t.row(&[Cell::I(k as u64), Cell::I(c), Cell::F(c as f64 / total as f64)]);
            }
            t.finish("pooled.csv")
        }
        Format::Json => Artifact::text("pooled.json", serde_json::to_string(&json!({ "counts": pooled }))? + "\n"),
    })
}

fn replicate_summary(samples: &[GraphSample], format: Format) -> Result<Artifact> {
    let rows: Vec<Value> = samples
        .iter()
        .map(|s| {
            let d: Vec<f64> = s.degrees.iter().map(|&x| f64::from(x)).collect();
            let (mean, var) = crate::numeric::sample_mean_var(&d);
            json!({
                "replicate_id": s.replicate_id,
                "edge_count": s.edge_count,
                "degree_sum": s.degree_sum(),
                "mean": mean,
                "variance": var,
                "max_degree": s.degrees.iter().copied().max().unwrap_or(0),
            })
        })
        .collect();
    Ok(match format {
        Format::Csv => {
            let mut t = Table::new(&["replicate_id", "edge_count", "degree_sum", "mean", "variance", "max_degree"]);
            for s in samples {
                let d: Vec<f64> = s.degrees.iter().map(|&x| f64::from(x)).collect();
                let (mean, var) = crate::numeric::sample_mean_var(&d);
                t.row(&[
                    Cell::I(s.replicate_id),
                    Cell::I(s.edge_count),
                    Cell::I(s.degree_sum()),
                    Cell::F(mean),
                    Cell::F(var),
                    Cell::I(u64::from(s.degrees.iter().copied().max().unwrap_or(0))),
                ]);
            }
            t.finish("summary.csv")
        }
        Format::Json => Artifact::text("summary.json", serde_json::to_string_pretty(&rows)? + "\n"),
    })
}

/// The three mixing densities drawn in figure 3 by default. They are our
/// choice of strictly positive smooth polynomials, one convex, one concave
/// and one with an inflection.
pub fn figure3_densities() -> Vec<(&'static str, SmoothDensityModel)> {
    let make = |c: &[f64]| SmoothDensityModel::polynomial(c.to_vec(), None).expect("valid built-in density");
    vec![
        ("convex", make(&[0.5, 0.0, 1.5])),
        ("concave", make(&[0.5, 3.0, -3.0])),
        ("inflected", make(&[0.2, 4.8, -9.6, 6.4])),
    ]
}

/// The power-law mixing of figure 2.
pub fn figure2_model() -> BoundedParetoModel {
    BoundedParetoModel::new(3.0, 1.0 / 3.0, 1.0).expect("valid built-in model")
}

fn figure(cfg: &RunConfig) -> Result<Produced> {
    match cfg.figure {
        Some(1) => figure1(cfg),
        Some(2) => figure2(cfg),
        Some(3) => figure3(cfg),
        Some(other) => Err(invalid("figure", format!("must be 1, 2 or 3, got {other}"))),
        None => Err(invalid("figure", "required by figure")),
    }
}

/// Step in `k` and `μ` of the figure 1 surface.
const SURFACE_K_STEP: usize = 5;
const SURFACE_MU_STEPS: usize = 100;

fn figure1(cfg: &RunConfig) -> Result<Produced> {
    let n = cfg.n.unwrap_or(500);
    if n < 2 {
        return Err(invalid("n", "figure 1 needs n >= 2"));
    }
    let mut resolved = cfg.clone();
    resolved.n = Some(n);
    let nu = n as u64;
    let mut curve = Table::new(&["k", "survival", "normal_approx", "hoeffding_lower", "hoeffding_upper"]);
    for k in 0..nu {
        let b = survival_bounds(k, nu, 0.5)?;
        let s = crate::specfun::binom_survival(k, nu, 0.5)?;
        curve.row(&[Cell::I(k), Cell::F(s), Cell::F(b.normal_approx), Cell::F(b.lower), Cell::F(b.upper)]);
    }
    let mut surface = Table::new(&["k", "mu", "survival"]);
    for j in 1..SURFACE_MU_STEPS {
        let mu = j as f64 / SURFACE_MU_STEPS as f64;
        for k in (0..nu).step_by(SURFACE_K_STEP) {
            surface.row(&[Cell::I(k), Cell::F(mu), Cell::F(crate::specfun::binom_survival(k, nu, mu)?)]);
        }
    }
    let summary = json!({ "n": n, "midpoint": n as f64 / 2.0 });
    Ok(Produced::new(
        resolved,
        vec![curve.finish("figure1_curve.csv"), surface.finish("figure1_surface.csv")],
        summary,
    ))
}

fn figure2(cfg: &RunConfig) -> Result<Produced> {
    let model = match &cfg.model {
        Some(b) => pareto_of(&b.model)?,
        None => figure2_model(),
    };
    let n = cfg.n.unwrap_or(1000);
    let replicates = cfg.replicates.unwrap_or(500);
    let seed = required(&cfg.master_seed, "master_seed", "figure 2")?;
    let mut resolved = cfg.clone();
    resolved.model = Some(ModelBlock {
        model: WeightModel::BoundedPareto(model),
        seed: None,
    });
    resolved.n = Some(n);
    resolved.replicates = Some(replicates);

    let wm = WeightModel::BoundedPareto(model);
    let samples = sample_population(&wm, None, n, replicates, seed, &SampleOptions::default())?;
    let pooled = pooled_histogram(&samples);
    let total: u64 = pooled.iter().sum();
    let law = pareto_population_pmf(&model, n)?;
    let quad = marginal_pmf_quadrature(&MixingLaw::BoundedPareto(model), n)?;

    let nf = n as f64;
    let mu = model.mean();
    let nmu = nf * mu;
    let p_hi = mu * model.b;
    let ln_cut = |k: usize| -> Result<f64> {
        let a = k as f64 + 1.0 - model.beta;
        if a <= 0.0 || k + 1 >= n {
            return Ok(f64::NAN);
        }
        ln_reg_inc_beta(p_hi, a, nf - k as f64)
    };
    let k0 = (nf * p_hi).round() as usize;
    let k0 = k0.clamp(1, n.saturating_sub(3));
    let slope = 0.5 * (ln_cut(k0 + 1)? - ln_cut(k0 - 1)?);
    let ln_cut0 = ln_cut(k0)?;
    let eps = law.column("eps_leading").map(<[f64]>::to_vec).unwrap_or_default();

    let mut t = Table::new(&[
        "k",
        "count",
        "empirical",
        "closed_form",
        "quadrature",
        "cutoff",
        "cutoff_taylor",
        "cutoff_model",
        "residual",
    ]);
    let sd = (nf * p_hi * (1.0 - p_hi)).sqrt();
    let mut near = Vec::new();
    for k in 0..n {
        let count = pooled.get(k).copied().unwrap_or(0);
        let emp = count as f64 / total as f64;
        let lc = ln_cut(k)?;
        let taylor = (ln_cut0 + slope * (k as f64 - k0 as f64)).exp();
        let e = eps.get(k).copied().unwrap_or(f64::NAN);
        let model_val = if k as f64 > model.beta {
            (model.c.ln() - model.beta * (k as f64 / nmu).ln() + e.ln_1p() + lc - nmu.ln()).exp()
        } else {
            f64::NAN
        };
        let residual = if count > 0 && model_val > 0.0 {
            emp.ln() - model_val.ln()
        } else {
            f64::NAN
        };
        if residual.is_finite() && (k as f64 - nf * p_hi).abs() <= 2.0 * sd {
            near.push(residual);
        }
        t.row(&[
            Cell::I(k as u64),
            Cell::I(count),
            Cell::F(emp),
            Cell::F(law.pmf[k]),
            Cell::F(quad.pmf[k]),
            Cell::F(lc.exp()),
            Cell::F(taylor),
            Cell::F(model_val),
            Cell::F(residual),
        ]);
    }
    let max_near = near.iter().map(|r| r.abs()).fold(0.0, f64::max);
    let summary = json!({
        "mixing_mean": mu,
        "lower_edge": nmu * model.a,
        "upper_edge": nmu * model.b,
        "taylor_center": k0,
        "taylor_log_slope": slope,
        "max_abs_residual_within_2sd_of_upper_edge": max_near,
        "degrees_pooled": total,
    });
    let mut p = Produced::new(resolved, vec![t.finish("figure2.csv")], summary);
    p.replicates = Some(replicates);
    Ok(p)
}

fn figure3(cfg: &RunConfig) -> Result<Produced> {
    let n = cfg.n.unwrap_or(500);
    let densities: Vec<(String, SmoothDensityModel)> = match &cfg.densities {
        Some(ds) => ds.iter().enumerate().map(|(i, d)| (format!("density{i}"), d.clone())).collect(),
        None => figure3_densities().into_iter().map(|(s, d)| (s.to_string(), d)).collect(),
    };
    let mut resolved = cfg.clone();
    resolved.n = Some(n);
    resolved.densities = Some(densities.iter().map(|d| d.1.clone()).collect());
    let mut t = Table::new(&[
        "density",
        "k",
        "scaled_quadrature",
        "scaled_approx",
        "f_k_over_nmu",
        "scaled_bound",
    ]);
    let mut s = Table::new(&["density", "mu", "c_constant", "max_deviation_k_le_nmu", "max_scaled_error"]);
    let mut summary = Vec::new();
    for (name, f) in &densities {
        let law = repro_with_quadrature(f, n)?;
        let nmu = n as f64 * f.mean();
        let col = |c: &str| law.column(c).map(<[f64]>::to_vec).unwrap_or_default();
        let (sq, sa, target, bound) = (col("scaled_quadrature"), col("scaled_approx"), col("f_k_over_nmu"), col("bound"));
        for k in 0..n {
            t.row(&[
                Cell::S(name),
                Cell::I(k as u64),
                Cell::F(sq[k]),
                Cell::F(sa[k]),
                Cell::F(target[k]),
                Cell::F(nmu * bound[k]),
            ]);
        }
        let dev = law.metadata["max_deviation_k_le_nmu"].as_f64().unwrap_or(f64::NAN);
        let err = law.metadata["max_scaled_error"].as_f64().unwrap_or(f64::NAN);
        s.row(&[Cell::S(name), Cell::F(f.mean()), Cell::F(f.c_constant()), Cell::F(dev), Cell::F(err)]);
        summary.push(json!({ "density": name, "max_deviation_k_le_nmu": dev, "max_scaled_error": err }));
    }
    Ok(Produced::new(
        resolved,
        vec![t.finish("figure3.csv"), s.finish("figure3_summary.csv")],
        Value::Array(summary),
    ))
}

fn estimate(cfg: &RunConfig) -> Result<Produced> {
    let path = required(&cfg.input, "input", "estimate")?;
    let bytes = std::fs::read(&path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::config(path.display().to_string(), "input is not UTF-8"))?;
    let input_format = cfg.input_format.unwrap_or_default();
    let level = cfg.level.unwrap_or(0.95);
    let mut resolved = cfg.clone();
    resolved.input_format = Some(input_format);
    resolved.level = Some(level);
    let located = |e: Error| match e {
        Error::Config { location, message } => Error::config(format!("{} {location}", path.display()), message),
        other => other,
    };
    let degrees = match input_format {
        InputFormat::EdgeList => parse_edge_list(&text, cfg.one_indexed, cfg.n).map_err(located)?,
        InputFormat::Degrees => parse_degrees(&text).map_err(located)?,
    };
    let report = clt_report(&degrees, level)?;
    let mut artifacts = vec![match cfg.format {
        Format::Csv => Artifact::text("estimate.csv", report.to_csv()),
        Format::Json => Artifact::text("estimate.json", serde_json::to_string_pretty(&report)? + "\n"),
    }];
    let fit = fit_exponent(&degrees);
    let fit_summary = match &fit {
        Ok(f) => {
            artifacts.push(Artifact::text("exponent_fit.json", serde_json::to_string_pretty(f)? + "\n"));
            json!(f)
        }
        Err(e) => json!({ "skipped": e.to_string() }),
    };
    let summary = json!({
        "nodes": degrees.len(),
        "degree_sum": report.degree_sum,
        "low_degree_count": report.low_degree_count,
        "low_degree_warning": report.low_degree_warning,
        "exponent_fit": fit_summary,
    });
    let mut p = Produced::new(resolved, artifacts, summary);
    p.input_sha256 = Some(sha256_hex(&bytes));
    Ok(p)
}

fn verify_cmd(cfg: &RunConfig) -> Result<Produced> {
    let name = required(&cfg.suite, "suite", "verify")?;
    let suites: Vec<Suite> = if name == "all" {
        Suite::ALL.to_vec()
    } else {
        vec![name.parse().map_err(|_| invalid("suite", format!("unknown suite `{name}`")))?]
    };
    let reports = suites.into_iter().map(verify::run).collect::<Result<Vec<_>>>()?;
    let passed = reports.iter().all(|r| r.passed);
    let body = json!({ "passed": passed, "suites": reports });
    let summary = json!({
        "passed": passed,
        "suites": reports.iter().map(|r| json!({ "suite": r.suite, "passed": r.passed })).collect::<Vec<_>>(),
    });
    let mut p = Produced::new(
        cfg.clone(),
        vec![Artifact::text("verify_report.json", serde_json::to_string_pretty(&body)? + "\n")],
        summary,
    );
    p.verification_failed = !passed;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(text: &str) -> RunConfig {
        RunConfig::from_json(text, "test").unwrap()
    }

    fn csv_of(out: &RunOutput, name: &str) -> String {
        String::from_utf8(out.artifact(name).unwrap().bytes.clone()).unwrap()
    }

    #[test]
    fn unknown_field_reports_line() {
        let err = RunConfig::from_json("{\n  \"n\": 10,\n  \"nn\": 3\n}", "cfg.json").unwrap_err();
        match err {
            Error::Config { location, message } => {
                assert!(location.starts_with("cfg.json line 3"), "{location}");
                assert!(message.contains("unknown field"), "{message}");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_field_is_named() {
        let err = execute(&cfg(r#"{"command": "simulate", "n": 10, "master_seed": 1}"#)).unwrap_err();
        assert!(err.to_string().contains("field `model`"), "{err}");
        assert_eq!(exit_code(&err), EXIT_VALIDATION);
    }

    #[test]
    fn simulate_needs_seed() {
        let c = cfg(r#"{"command": "simulate", "model": {"kind": "point_mass", "value": 0.5}, "n": 10}"#);
        let err = execute(&c).unwrap_err();
        assert!(err.to_string().contains("master_seed"));
    }

    #[test]
    fn homogeneous_gives_binomial() {
        let c = cfg(r#"{"command": "exact_pmf", "model": {"kind": "point_mass", "value": 0.6}, "n": 21}"#);
        let out = execute(&c).unwrap();
        let want = crate::oracle::binomial_pmf(20, 0.36);
        let csv = csv_of(&out, "pmf.csv");
        for (line, w) in csv.lines().skip(2).zip(&want) {
            let p: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert!((p - w).abs() < 1e-14);
        }
        assert_eq!(out.manifest.config.law, Some(Law::Marginal));
    }

    #[test]
    fn manifest_hash_ignores_output_dir() {
        let mut c = cfg(r#"{"command": "figure", "figure": 1, "n": 20}"#);
        let a = execute(&c).unwrap();
        c.output_dir = Some(PathBuf::from("elsewhere"));
        let b = execute(&c).unwrap();
        assert_eq!(a.manifest.config_sha256, b.manifest.config_sha256);
        assert_eq!(a.artifacts, b.artifacts);
    }

    #[test]
    fn simulate_is_reproducible() {
        let text = r#"{"command": "simulate", "model": {"kind": "smooth", "coefficients": [1]},
            "n": 10, "replicates": 1, "master_seed": 5, "write_degrees": true}"#;
        let a = execute(&cfg(text)).unwrap();
        let b = execute(&cfg(text)).unwrap();
        assert_eq!(a.artifacts, b.artifacts);
        let degrees = csv_of(&a, "degrees.csv");
        assert_eq!(degrees.lines().count(), 2 + 10);
        assert_eq!(a.manifest.replicate_seeds.len(), 1);
    }

    #[test]
    fn figure1_curve_is_the_survival_function() {
        let out = execute(&cfg(r#"{"command": "figure", "figure": 1}"#)).unwrap();
        let csv = csv_of(&out, "figure1_curve.csv");
        let rows: Vec<&str> = csv.lines().skip(2).collect();
        assert_eq!(rows.len(), 500);
        for (k, row) in rows.iter().enumerate() {
            let s: f64 = row.split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(s, crate::specfun::binom_survival(k as u64, 500, 0.5).unwrap());
        }
    }

    #[test]
    fn bad_figure_number() {
        let err = execute(&cfg(r#"{"command": "figure", "figure": 4}"#)).unwrap_err();
        assert!(err.to_string().contains("figure"));
    }

    #[test]
    fn estimate_from_edge_list() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.txt");
        std::fs::write(&path, "1 2\n2 3\n3 1\n").unwrap();
        let mut c = cfg(r#"{"command": "estimate", "one_indexed": true}"#);
        c.input = Some(path);
        let out = execute(&c).unwrap();
        let csv = csv_of(&out, "estimate.csv");
        assert!(csv.contains("\n0,2,0.816496580927726"), "{csv}");
        assert!(out.manifest.input_sha256.is_some());
    }

    #[test]
    fn estimate_parse_error_names_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("edges.txt");
        std::fs::write(&path, "0 1\n0 x\n").unwrap();
        let mut c = cfg(r#"{"command": "estimate"}"#);
        c.input = Some(path);
        let err = execute(&c).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("edges.txt") && msg.contains("line 2"), "{msg}");
    }

    #[test]
    fn write_outputs_creates_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = execute(&cfg(r#"{"command": "figure", "figure": 1, "n": 10}"#)).unwrap();
        let paths = write_outputs(&out, &dir.path().join("nested")).unwrap();
        assert_eq!(paths.len(), 3);
        assert!(paths.iter().all(|p| p.exists()));
    }

    #[test]
    fn figure3_defaults_are_valid_densities() {
        for (_, f) in figure3_densities() {
            assert!(f.inf_density() > 0.0);
            assert!(f.c_constant() > 0.0);
        }
    }
}
