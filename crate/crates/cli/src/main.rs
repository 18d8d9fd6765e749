//! `elliptic-shooter`: ground states, hypothesis checks, diagnostics, dual
//! solves, spectra and parameter sweeps from the command line.

mod commands;
mod config;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Map, Value};

use crate::config::{Format, RunConfig};

pub const SCHEMA: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] elliptic_shooter_core::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Parser, Debug)]
#[command(
    name = "elliptic-shooter",
    version,
    about = "Radial ground states by shooting"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the structural hypotheses on g (or on a and h with a diffusion).
    Check(Common),
    /// Classify initial heights as crossing, positive or ground candidates.
    Classify(Common),
    /// Compute the ground state and its admissibility verdict.
    Ground(Common),
    /// Ground state with hypothesis, comparison-lemma and optional spectral checks.
    Diagnose(Common),
    /// Solve a quasilinear problem through its dual semilinear problem.
    Dual(Common),
    /// Sector spectra of the linearized operator.
    Spectrum(Common),
    /// Independent solves over a list of parameter values.
    Sweep(Common),
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// JSON run configuration; flags override its entries.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Builtin nonlinearity family (power, cubic_quintic_defocusing,
    /// cubic_quintic_focusing, nagumo, quadratic_cubic, linear).
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    p: Option<f64>,
    #[arg(long)]
    c: Option<f64>,
    /// Sign for quadratic_cubic (plus or minus).
    #[arg(long)]
    sign: Option<String>,
    /// Use the mNLS diffusion a(t) = 1 + 2 kappa t^2.
    #[arg(long)]
    mnls: bool,
    #[arg(long)]
    kappa: Option<f64>,
    /// Diffusion coefficient as a JSON object.
    #[arg(long)]
    diffusion: Option<String>,
    /// Space dimension.
    #[arg(long = "N")]
    dim: Option<usize>,
    #[arg(long)]
    d_tol: Option<f64>,
    #[arg(long)]
    ode_tol: Option<f64>,
    #[arg(long)]
    r_max_factor: Option<f64>,
    #[arg(long)]
    mesh_n: Option<usize>,
    /// Initial heights for classify.
    #[arg(long = "d", value_delimiter = ',')]
    heights: Vec<f64>,
    /// Include sector spectra.
    #[arg(long)]
    spectrum: bool,
    /// Sweep parameter (lambda, p, c, kappa, N).
    #[arg(long = "param")]
    parameter: Option<String>,
    /// Sweep values, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    values: Option<Vec<f64>>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write the report here and print the summary to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, env = "ELLIPTIC_SHOOTER_JOBS")]
    jobs: Option<usize>,
}

impl Command {
    fn parts(&self) -> (&'static str, &Common) {
        match self {
            Command::Check(c) => ("check", c),
            Command::Classify(c) => ("classify", c),
            Command::Ground(c) => ("ground", c),
            Command::Diagnose(c) => ("diagnose", c),
            Command::Dual(c) => ("dual", c),
            Command::Spectrum(c) => ("spectrum", c),
            Command::Sweep(c) => ("sweep", c),
        }
    }
}

fn object_params(v: &Option<Value>) -> Map<String, Value> {
    v.as_ref()
        .and_then(|m| m.get("params"))
        .and_then(Value::as_object)
        .cloned()
        .unwrap_or_default()
}

fn build_config(name: &str, c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &c.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(cmd) = &cfg.command {
        if cmd != name {
            return Err(CliError::Usage(format!(
                "config is for '{cmd}' but the command is '{name}'"
            )));
        }
    }
    cfg.command = Some(name.to_string());

    let model_flags = c.lambda.is_some() || c.p.is_some() || c.c.is_some() || c.sign.is_some();
    if c.family.is_some() || model_flags {
        let family = c
            .family
            .clone()
            .or_else(|| {
                cfg.model
                    .as_ref()
                    .and_then(|m| m.get("family"))
                    .and_then(Value::as_str)
                    .map(str::to_string)
            })
            .unwrap_or_else(|| "power".into());
        let mut params = if c.family.is_none() {
            object_params(&cfg.model)
        } else {
            Map::new()
        };
        for (k, v) in [("lambda", c.lambda), ("p", c.p), ("c", c.c)] {
            if let Some(v) = v {
                params.insert(k.into(), v.into());
            }
        }
        if let Some(s) = &c.sign {
            params.insert("sign".into(), s.clone().into());
        }
        cfg.model = Some(json!({"family": family, "params": params}));
    }

    if c.mnls && c.diffusion.is_some() {
        return Err(CliError::Usage(
            "--mnls and --diffusion are exclusive".into(),
        ));
    }
    if let Some(d) = &c.diffusion {
        cfg.diffusion = Some(
            serde_json::from_str(d)
                .map_err(|e| CliError::Usage(format!("invalid --diffusion: {e}")))?,
        );
    }
    if c.mnls {
        let kappa = c
            .kappa
            .or_else(|| {
                object_params(&cfg.diffusion)
                    .get("kappa")
                    .and_then(Value::as_f64)
            })
            .unwrap_or(1.0);
        cfg.diffusion = Some(json!({"family": "mnls", "params": {"kappa": kappa}}));
    } else if let Some(k) = c.kappa {
        let mut params = object_params(&cfg.diffusion);
        if cfg.diffusion.is_none() || !params.contains_key("kappa") {
            return Err(CliError::Usage(
                "--kappa needs --mnls or a diffusion with 'kappa'".into(),
            ));
        }
        params.insert("kappa".into(), k.into());
        cfg.diffusion.as_mut().unwrap()["params"] = Value::Object(params);
    }

    if let Some(n) = c.dim {
        cfg.dim = n;
    }
    if let Some(x) = c.d_tol {
        cfg.d_tol = x;
    }
    if let Some(x) = c.ode_tol {
        cfg.ode_tol = x;
    }
    if let Some(x) = c.r_max_factor {
        cfg.r_max_factor = x;
    }
    if let Some(x) = c.mesh_n {
        cfg.mesh_n = x;
    }
    if !c.heights.is_empty() {
        cfg.heights = c.heights.clone();
    }
    if c.spectrum {
        cfg.spectrum = true;
    }
    if let Some(p) = &c.parameter {
        cfg.parameter = Some(p.clone());
    }
    if let Some(v) = &c.values {
        cfg.values = v.clone();
    }
    if let Some(f) = c.format {
        cfg.format = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(name: &str, c: &Common) -> Result<i32, CliError> {
    let cfg = build_config(name, c)?;
    let jobs = match c.jobs {
        Some(0) => return Err(CliError::Usage("--jobs must be positive".into())),
        Some(j) => j,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let outcome = match name {
        "check" => commands::check(&cfg)?,
        "classify" => commands::classify_heights(&cfg)?,
        "ground" => commands::ground(&cfg)?,
        "diagnose" => commands::diagnose(&cfg)?,
        "dual" => commands::dual(&cfg)?,
        "spectrum" => commands::spectrum(&cfg)?,
        "sweep" => commands::sweep(&cfg, jobs)?,
        other => unreachable!("unknown command {other}"),
    };
    let body = match cfg.format {
        Format::Json => {
            let envelope = json!({
                "schema": SCHEMA,
                "version": env!("CARGO_PKG_VERSION"),
                "command": name,
                "config_hash": cfg.hash(),
                "config": cfg,
                "tolerances": {
                    "d_tol": cfg.d_tol,
                    "ode_tol": cfg.ode_tol,
                    "r_max_factor": cfg.r_max_factor,
                    "mesh_n": cfg.mesh_n,
                    "grid": cfg.grid(),
                },
                "result": outcome.result,
            });
            let mut s = serde_json::to_string_pretty(&envelope)?;
            s.push('\n');
            s
        }
        Format::Csv => outcome
            .csv
            .ok_or_else(|| CliError::Usage(format!("'{name}' has no CSV output")))?,
    };
    match &c.out {
        Some(path) => {
            std::fs::write(path, body)?;
            println!("{}", outcome.summary);
        }
        None => {
            std::io::stdout().write_all(body.as_bytes())?;
            eprintln!("{}", outcome.summary);
        }
    }
    Ok(outcome.exit)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (name, common) = cli.command.parts();
    match run(name, common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
