//! Pipelines behind each subcommand.

use elliptic_shooter_core::dual::{DiffusionFamily, DiffusionModel};
use elliptic_shooter_core::nonlinearity::Family;
use elliptic_shooter_core::spectrum::default_r_max;
use elliptic_shooter_core::{
    check_quasilinear, check_semilinear_model, classify, find_ground_state_with,
    ground_spectral_report, key_lemma_report, mnls_kernel_report, nondegeneracy_check,
    solve_quasilinear, structural_constants, Error, GroundState, NondegeneracyReport,
    QuasilinearSolution, RadialProblem, SemilinearModel, ShootingOptions, SpectralReport,
    Strictness, StructuralConstants,
};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::CliError;

/// Search bound for the structural constants of `g`.
const SEARCH_BOUND: f64 = 1e8;

pub struct Outcome {
    pub result: Value,
    pub csv: Option<String>,
    pub summary: String,
    pub exit: i32,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt_num(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn model(cfg: &RunConfig) -> Result<SemilinearModel, CliError> {
    let v = cfg.model.as_ref().ok_or_else(|| {
        CliError::Usage("no model given (use --family or a config 'model')".into())
    })?;
    Ok(SemilinearModel::from_config(v)?)
}

fn diffusion(cfg: &RunConfig) -> Result<Option<DiffusionModel>, CliError> {
    cfg.diffusion
        .as_ref()
        .map(|v| DiffusionModel::from_config(v).map_err(CliError::from))
        .transpose()
}

fn shooting_options(cfg: &RunConfig, problem: &RadialProblem) -> ShootingOptions {
    ShootingOptions {
        d_tol: cfg.d_tol,
        ode_tol: cfg.ode_tol,
        r_max: Some(cfg.r_max_factor * problem.default_r_max()),
    }
}

fn semilinear_ground(cfg: &RunConfig) -> Result<(GroundState, StructuralConstants), CliError> {
    let m = model(cfg)?;
    let consts = structural_constants(&m, SEARCH_BOUND)?;
    let problem = RadialProblem::new(cfg.dim, m)?;
    let opts = shooting_options(cfg, &problem);
    let gs = find_ground_state_with(&problem, &consts, &opts)?;
    Ok((gs, consts))
}

fn quasilinear(cfg: &RunConfig, a: &DiffusionModel) -> Result<QuasilinearSolution, CliError> {
    let h = model(cfg)?;
    let probe = RadialProblem::new(cfg.dim, h.clone())?;
    let opts = ShootingOptions {
        r_max: None,
        ..shooting_options(cfg, &probe)
    };
    Ok(solve_quasilinear(a, &h, cfg.dim, &opts)?)
}

fn verdict_name(s: Strictness) -> &'static str {
    match s {
        Strictness::Strict => "strict",
        Strictness::NotStrict => "not_strict",
        Strictness::Undetermined => "undetermined",
    }
}

fn nondegeneracy_exit(nd: &NondegeneracyReport) -> i32 {
    match nd.verdict {
        Strictness::Strict => 0,
        Strictness::NotStrict => 2,
        Strictness::Undetermined => 3,
    }
}

fn ground_json(gs: &GroundState, consts: &StructuralConstants, nd: &NondegeneracyReport) -> Value {
    json!({
        "d0": gs.d0,
        "bracket": gs.bracket,
        "bracket_evidence": gs.bracket_evidence,
        "decay_rate": gs.decay.map(|d| d.rate),
        "decay_fit": gs.decay,
        "r_delta": gs.r_delta,
        "r_trust": gs.r_trust,
        "r_max": gs.r_max,
        "monotone": gs.monotone,
        "bisection_steps": gs.bisection_steps,
        "constants": consts,
        "strict_admissibility": verdict_name(nd.verdict),
        "nondegeneracy": nd,
    })
}

fn ground_summary(prefix: &str, gs: &GroundState, nd: &NondegeneracyReport) -> String {
    format!(
        "{prefix}: d0 = {:.12}, decay_rate = {}, r_delta = {}, admissibility = {}",
        gs.d0,
        gs.decay.map_or("n/a".into(), |d| format!("{:.6}", d.rate)),
        gs.r_delta.map_or("n/a".into(), |r| format!("{r:.6}")),
        verdict_name(nd.verdict)
    )
}

fn spectral_exit(rep: &SpectralReport) -> i32 {
    if rep.all_pass() {
        0
    } else {
        2
    }
}

fn spectral_summary(rep: &SpectralReport) -> String {
    if rep.all_pass() {
        format!(
            "spectrum ({}): all {} verdicts pass",
            rep.kind,
            rep.verdicts.len()
        )
    } else {
        format!(
            "spectrum ({}): failed {}",
            rep.kind,
            rep.failures().join(", ")
        )
    }
}

/// `(λ, κ, p)` when the run is an mNLS problem with a power nonlinearity.
fn mnls_params(h: &SemilinearModel, a: &DiffusionModel) -> Option<(f64, f64, f64)> {
    match (h.family(), a.family()) {
        (Some(Family::Power { lambda, p }), Some(DiffusionFamily::Mnls { kappa })) => {
            Some((lambda, kappa, p))
        }
        _ => None,
    }
}

fn require_semilinear(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    if cfg.diffusion.is_some() {
        return Err(CliError::Usage(format!(
            "'{command}' works on semilinear models; use 'dual' for a diffusion coefficient"
        )));
    }
    Ok(())
}

fn require_json(cfg: &RunConfig, command: &str) -> Result<(), CliError> {
    if cfg.format == Format::Csv {
        return Err(CliError::Usage(format!("'{command}' has no CSV output")));
    }
    Ok(())
}

pub fn check(cfg: &RunConfig) -> Result<Outcome, CliError> {
    require_json(cfg, "check")?;
    let h = model(cfg)?;
    let rep = match diffusion(cfg)? {
        Some(a) => check_quasilinear(&a, &h, &cfg.grid(), cfg.dim)?,
        None => check_semilinear_model(&h, &cfg.grid(), cfg.dim)?,
    };
    let exit = rep.exit_code();
    let mut summary = format!("check ({}): ", rep.model);
    if exit == 0 {
        summary.push_str(&format!("all {} conditions pass", rep.verdicts.len()));
    } else {
        let parts: Vec<String> = rep
            .verdicts
            .iter()
            .filter(|(_, c)| c.verdict != elliptic_shooter_core::Verdict::Pass)
            .map(|(k, c)| {
                let v = serde_json::to_value(c.verdict).unwrap_or(Value::Null);
                match &c.witness {
                    Some(w) => format!("{k} {} (witness s = {})", v.as_str().unwrap_or(""), w.s),
                    None => format!("{k} {}", v.as_str().unwrap_or("")),
                }
            })
            .collect();
        summary.push_str(&parts.join("; "));
    }
    Ok(Outcome {
        result: serde_json::to_value(&rep)?,
        csv: None,
        summary,
        exit,
    })
}

pub fn classify_heights(cfg: &RunConfig) -> Result<Outcome, CliError> {
    require_semilinear(cfg, "classify")?;
    if cfg.heights.is_empty() {
        return Err(CliError::Usage("classify needs heights (--d)".into()));
    }
    let m = model(cfg)?;
    let consts = structural_constants(&m, SEARCH_BOUND)?;
    let problem = RadialProblem::new(cfg.dim, m)?;
    let r_max = cfg.r_max_factor * problem.default_r_max();
    let mut rows = Vec::new();
    let mut csv = String::from("d,classification,r\n");
    let mut exit = 0;
    for &d in &cfg.heights {
        let c = classify(&problem, &consts, d, r_max, cfg.ode_tol)?;
        let v = serde_json::to_value(c)?;
        let r = v
            .get("r")
            .or_else(|| v.get("r_trust"))
            .or_else(|| v.get("r_max"))
            .and_then(Value::as_f64);
        csv.push_str(&format!("{},{},{}\n", num(d), c.name(), opt_num(r)));
        if c.name() == "undetermined" {
            exit = 3;
        }
        rows.push(json!({"d": d, "classification": v}));
    }
    let names: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{}: {}",
                r["d"],
                r["classification"]["kind"].as_str().unwrap_or("")
            )
        })
        .collect();
    Ok(Outcome {
        result: json!({"constants": consts, "r_max": r_max, "rows": rows}),
        csv: Some(csv),
        summary: format!("classify: {}", names.join(", ")),
        exit,
    })
}

pub fn ground(cfg: &RunConfig) -> Result<Outcome, CliError> {
    require_semilinear(cfg, "ground")?;
    let (gs, consts) = semilinear_ground(cfg)?;
    let nd = nondegeneracy_check(&gs)?;
    Ok(Outcome {
        result: ground_json(&gs, &consts, &nd),
        csv: Some(gs.trajectory.to_csv()),
        summary: ground_summary("ground", &gs, &nd),
        exit: nondegeneracy_exit(&nd),
    })
}

pub fn diagnose(cfg: &RunConfig) -> Result<Outcome, CliError> {
    require_semilinear(cfg, "diagnose")?;
    require_json(cfg, "diagnose")?;
    let (gs, consts) = semilinear_ground(cfg)?;
    let nd = nondegeneracy_check(&gs)?;
    let hyp = check_semilinear_model(&gs.problem().model, &cfg.grid(), cfg.dim)?;
    let lemma = key_lemma_report(&gs, &consts)?;
    let spectrum = if cfg.spectrum {
        Some(ground_spectral_report(&gs, cfg.mesh_n, default_r_max(&gs))?)
    } else {
        None
    };
    let mut exit = nondegeneracy_exit(&nd).max(hyp.exit_code());
    if !lemma.all_pass() {
        exit = exit.max(2);
    }
    if let Some(s) = &spectrum {
        exit = exit.max(spectral_exit(s));
    }
    let mut summary = ground_summary("diagnose", &gs, &nd);
    summary.push_str(&format!(
        ", hypotheses failed [{}], lemma clauses failed [{}]",
        hyp.failed().join(", "),
        lemma.failures().join(", ")
    ));
    if let Some(s) = &spectrum {
        summary.push_str(&format!(", {}", spectral_summary(s)));
    }
    Ok(Outcome {
        result: json!({
            "ground": ground_json(&gs, &consts, &nd),
            "hypotheses": hyp,
            "key_lemma": lemma,
            "spectrum": spectrum,
        }),
        csv: None,
        summary,
        exit,
    })
}

pub fn dual(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let a = diffusion(cfg)?.ok_or_else(|| {
        CliError::Usage("'dual' needs a diffusion (--mnls or --diffusion)".into())
    })?;
    let h = model(cfg)?;
    let sol = quasilinear(cfg, &a)?;
    let nd = nondegeneracy_check(&sol.dual)?;
    let hyp = if cfg.format == Format::Json {
        Some(check_quasilinear(&a, &h, &cfg.grid(), cfg.dim)?)
    } else {
        None
    };
    let spectrum = if cfg.spectrum {
        let r_max = default_r_max(&sol.dual);
        Some(match mnls_params(&h, &a) {
            Some((lambda, kappa, p)) => {
                mnls_kernel_report(&sol, lambda, kappa, p, cfg.mesh_n, r_max)?
            }
            None => ground_spectral_report(&sol.dual, cfg.mesh_n, r_max)?,
        })
    } else {
        None
    };
    let mut exit = nondegeneracy_exit(&nd);
    if let Some(h) = &hyp {
        exit = exit.max(h.exit_code());
    }
    if let Some(s) = &spectrum {
        exit = exit.max(spectral_exit(s));
    }
    let mut summary =
        format!(
        "dual: u0 = {:.12}, v0 = {:.12}, decay_rate = {}, admissibility = {}, residual = {:.2e}",
        sol.u0(),
        sol.dual.d0,
        sol.dual.decay.map_or("n/a".into(), |d| format!("{:.6}", d.rate)),
        verdict_name(nd.verdict),
        sol.residual_nodes.max(sol.residual_midpoints)
    );
    if let Some(h) = &hyp {
        if !h.failed().is_empty() {
            summary.push_str(&format!(", hypotheses failed [{}]", h.failed().join(", ")));
        }
    }
    if let Some(s) = &spectrum {
        summary.push_str(&format!(", {}", spectral_summary(s)));
    }
    let result = json!({
        "u0": sol.u0(),
        "v0": sol.dual.d0,
        "expected_decay": sol.expected_decay(),
        "mapped_b": [sol.mapped_b.0, sol.mapped_b.1],
        "residual_nodes": sol.residual_nodes,
        "residual_midpoints": sol.residual_midpoints,
        "transform": sol.transform.summary(),
        "h_constants": sol.h_constants,
        "dual_ground": ground_json(&sol.dual, &sol.dual_constants, &nd),
        "hypotheses": hyp,
        "spectrum": spectrum,
    });
    Ok(Outcome {
        result,
        csv: Some(sol.to_csv()),
        summary,
        exit,
    })
}

pub fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rep = match diffusion(cfg)? {
        Some(a) => {
            let h = model(cfg)?;
            let (lambda, kappa, p) = mnls_params(&h, &a).ok_or_else(|| {
                CliError::Usage(
                    "quasilinear spectra need an mnls diffusion and a power model".into(),
                )
            })?;
            let sol = quasilinear(cfg, &a)?;
            let r_max = default_r_max(&sol.dual);
            mnls_kernel_report(&sol, lambda, kappa, p, cfg.mesh_n, r_max)?
        }
        None => {
            let (gs, _) = semilinear_ground(cfg)?;
            ground_spectral_report(&gs, cfg.mesh_n, default_r_max(&gs))?
        }
    };
    Ok(Outcome {
        csv: Some(rep.to_csv()),
        summary: spectral_summary(&rep),
        exit: spectral_exit(&rep),
        result: serde_json::to_value(&rep)?,
    })
}

struct Row {
    value: f64,
    d0: Option<f64>,
    decay_rate: Option<f64>,
    r_delta: Option<f64>,
    verdict: Option<Strictness>,
    error: Option<String>,
    exit: i32,
}

fn sweep_row(base: &RunConfig, parameter: &str, value: f64) -> Row {
    let mut row = Row {
        value,
        d0: None,
        decay_rate: None,
        r_delta: None,
        verdict: None,
        error: None,
        exit: 0,
    };
    let attempt = || -> Result<(GroundState, NondegeneracyReport), CliError> {
        let mut cfg = base.clone();
        cfg.set_parameter(parameter, value)?;
        cfg.validate()?;
        let gs = match diffusion(&cfg)? {
            Some(a) => quasilinear(&cfg, &a)?.dual,
            None => semilinear_ground(&cfg)?.0,
        };
        let nd = nondegeneracy_check(&gs)?;
        Ok((gs, nd))
    };
    match attempt() {
        Ok((gs, nd)) => {
            row.d0 = Some(gs.d0);
            row.decay_rate = gs.decay.map(|d| d.rate);
            row.r_delta = gs.r_delta;
            row.exit = nondegeneracy_exit(&nd);
            row.verdict = Some(nd.verdict);
        }
        Err(e) => {
            row.exit = e.exit_code();
            row.error = Some(e.to_string());
        }
    }
    row
}

pub fn sweep(cfg: &RunConfig, jobs: usize) -> Result<Outcome, CliError> {
    let parameter = cfg
        .parameter
        .clone()
        .ok_or_else(|| CliError::Usage("sweep needs --param".into()))?;
    if cfg.values.is_empty() {
        return Err(CliError::Usage(
            "sweep needs a non-empty --values list".into(),
        ));
    }
    cfg.clone().set_parameter(&parameter, cfg.values[0])?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {jobs} workers: {e}")))?;
    let rows: Vec<Row> = pool.install(|| {
        cfg.values
            .par_iter()
            .map(|&v| sweep_row(cfg, &parameter, v))
            .collect()
    });

    let mut csv =
        String::from("parameter,value,d0,decay_rate,r_delta,nondegenerate,verdict,error\n");
    let mut json_rows = Vec::new();
    for r in &rows {
        let verdict = r.verdict.map(verdict_name);
        csv.push_str(&format!(
            "{parameter},{},{},{},{},{},{},{}\n",
            num(r.value),
            opt_num(r.d0),
            opt_num(r.decay_rate),
            opt_num(r.r_delta),
            r.verdict
                .map_or(String::new(), |v| (v == Strictness::Strict).to_string()),
            verdict.unwrap_or(""),
            r.error.as_deref().unwrap_or("").replace(',', ";"),
        ));
        json_rows.push(json!({
            "value": r.value,
            "d0": r.d0,
            "decay_rate": r.decay_rate,
            "r_delta": r.r_delta,
            "nondegenerate": r.verdict.map(|v| v == Strictness::Strict),
            "verdict": verdict,
            "error": r.error,
        }));
    }
    let exit = rows.iter().map(|r| r.exit).max().unwrap_or(0);
    let ok = rows.iter().filter(|r| r.exit == 0).count();
    Ok(Outcome {
        result: json!({"parameter": parameter, "rows": json_rows}),
        csv: Some(csv),
        summary: format!(
            "sweep over {parameter}: {ok}/{} rows non-degenerate",
            rows.len()
        ),
        exit,
    })
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) | CliError::Json(_) => 1,
            CliError::Core(e) => match e {
                Error::StructureNotFound(_) | Error::TooManyZeros(_) | Error::Pole { .. } => 2,
                Error::Undetermined { .. } => 3,
                e if e.is_numerical() => 4,
                _ => 1,
            },
        }
    }
}
