use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use degreenet::commands::{self, Command, Format, InputFormat, Law, RunConfig};
use degreenet::sampler::{with_pool, SamplerKind};
use degreenet::weights::{ModelBlock, ScalingMap};
use degreenet::Error;
use serde::de::DeserializeOwned;

#[derive(Parser)]
#[command(name = "degreenet", version, about = "Degree laws, samplers and estimators for multiplicative edge models")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a degree pmf: conditional, marginal or one of the approximations.
    ExactPmf {
        #[command(flatten)]
        common: Common,
        /// conditional, marginal, pareto, repro, sparse or extreme.
        #[arg(long, value_parser = snake::<Law>)]
        law: Option<Law>,
        /// Node index (0-based) for the conditional law.
        #[arg(long)]
        node: Option<usize>,
        #[arg(long)]
        k_max: Option<usize>,
    },
    /// Sample graphs and write degree histograms.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// dense or sparse.
        #[arg(long, value_parser = snake::<SamplerKind>)]
        sampler: Option<SamplerKind>,
        /// Also write each replicate's degree vector.
        #[arg(long)]
        write_degrees: bool,
    },
    /// Write the data behind figure 1, 2 or 3.
    Figure {
        which: u8,
        #[command(flatten)]
        common: Common,
    },
    /// Estimate weights from an edge list or degree vector.
    Estimate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
        /// edge_list or degrees.
        #[arg(long, value_parser = snake::<InputFormat>)]
        input_format: Option<InputFormat>,
        /// Edge-list node labels start at 1.
        #[arg(long)]
        one_indexed: bool,
        /// Confidence level of the intervals.
        #[arg(long)]
        level: Option<f64>,
    },
    /// Run a verification suite, or `all`.
    Verify {
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

/// Options shared by every subcommand. Flags override the config file.
#[derive(Args)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Weight model block as JSON, e.g. '{"kind":"point_mass","value":0.5}'.
    #[arg(long)]
    model: Option<String>,
    /// Scaling block as JSON, e.g. '{"gamma":0.5,"zeta":12}'.
    #[arg(long)]
    scaling: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    replicates: Option<u64>,
    #[arg(long = "seed")]
    master_seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// csv or json.
    #[arg(long, value_parser = snake::<Format>)]
    format: Option<Format>,
    /// Worker threads; overrides DEGREENET_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

/// Parse a snake_case name through the type's serde representation.
fn snake<T: DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn json_flag<T: DeserializeOwned>(flag: &str, text: &str) -> Result<T, Error> {
    serde_json::from_str(text).map_err(|e| Error::Config {
        location: format!("--{flag} column {}", e.column()),
        message: e.to_string(),
    })
}

impl Common {
    fn into_config(self, command: Command) -> Result<(RunConfig, Option<usize>), Error> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_path(p)?,
            None => RunConfig::default(),
        };
        if let Some(c) = cfg.command {
            if c != command {
                return Err(Error::Config {
                    location: "field `command`".into(),
                    message: format!("config is for {} but the subcommand is {}", c.name(), command.name()),
                });
            }
        }
        cfg.command = Some(command);
        if let Some(m) = &self.model {
            cfg.model = Some(json_flag::<ModelBlock>("model", m)?);
        }
        if let Some(s) = &self.scaling {
            cfg.scaling = Some(json_flag::<ScalingMap>("scaling", s)?);
        }
        cfg.n = self.n.or(cfg.n);
        cfg.replicates = self.replicates.or(cfg.replicates);
        cfg.master_seed = self.master_seed.or(cfg.master_seed);
        cfg.output_dir = self.output_dir.or(cfg.output_dir);
        if let Some(f) = self.format {
            cfg.format = f;
        }
        Ok((cfg, self.threads))
    }
}

fn build(cmd: Cmd) -> Result<(RunConfig, Option<usize>), Error> {
    Ok(match cmd {
        Cmd::ExactPmf { common, law, node, k_max } => {
            let (mut c, t) = common.into_config(Command::ExactPmf)?;
            c.law = law.or(c.law);
            c.node = node.or(c.node);
            c.k_max = k_max.or(c.k_max);
            (c, t)
        }
        Cmd::Simulate {
            common,
            sampler,
            write_degrees,
        } => {
            let (mut c, t) = common.into_config(Command::Simulate)?;
            c.sampler = sampler.or(c.sampler);
            c.write_degrees |= write_degrees;
            (c, t)
        }
        Cmd::Figure { which, common } => {
            let (mut c, t) = common.into_config(Command::Figure)?;
            c.figure = Some(which);
            (c, t)
        }
        Cmd::Estimate {
            common,
            input,
            input_format,
            one_indexed,
            level,
        } => {
            let (mut c, t) = common.into_config(Command::Estimate)?;
            c.input = input.or(c.input);
            c.input_format = input_format.or(c.input_format);
            c.one_indexed |= one_indexed;
            c.level = level.or(c.level);
            (c, t)
        }
        Cmd::Verify { suite, common } => {
            let (mut c, t) = common.into_config(Command::Verify)?;
            c.suite = Some(suite);
            (c, t)
        }
    })
}

fn run(cli: Cli) -> Result<u8, Error> {
    let (cfg, threads) = build(cli.command)?;
    let out = with_pool(threads, || commands::execute(&cfg))?;
    let dir = cfg.output_dir();
    let paths = commands::write_outputs(&out, &dir)?;
    if cfg.command == Some(Command::Verify) {
        if let Some(suites) = out.manifest.summary["suites"].as_array() {
            for s in suites {
                let status = if s["passed"].as_bool() == Some(true) { "PASS" } else { "FAIL" };
                println!("{status} {}", s["suite"].as_str().unwrap_or("?"));
            }
        }
    }
    println!("wrote {} files to {}", paths.len(), dir.display());
    Ok(out.exit_code())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
