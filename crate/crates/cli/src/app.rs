//! Orchestration: validation, checks, classification and simulation, plus the
//! machine-readable report and the text summary.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use arbcheck_core::criteria::{
    applicable_checks, check_mu_1d, run_checks, ConditionReport, CriteriaError, SkippedCheck,
};
use arbcheck_core::model::{validate_model, MarketModel, SamplePlan, ValidationReport};
use arbcheck_core::quadrature::{feller_classify, FellerClassification, TailOptions};
use arbcheck_core::simulate::{
    defect_condition, defect_report, emit_paths, simulate_exit, DriftMode, SimConfig, SimError, SimEstimate, Trend,
};
use arbcheck_core::verdict::{classify, ContradictionError, Dims, Flag, MarketVerdict};
use serde::Serialize;
use thiserror::Error;

use crate::config::{CheckSelection, ConfigError, RunConfig, Verbosity};

pub const TOOL: &str = "arbcheck";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Simulate,
    Report,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Simulate => "simulate",
            Command::Report => "report",
        }
    }
}

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("cannot write {path}: {message}")]
    Io { path: String, message: String },
}

impl AppError {
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Config(_) | AppError::Io { .. } => 1,
            AppError::Numeric(_) => 2,
        }
    }
}

impl From<CriteriaError> for AppError {
    fn from(e: CriteriaError) -> Self {
        AppError::Numeric(e.to_string())
    }
}

impl From<SimError> for AppError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Config(m) => AppError::Numeric(format!("simulation config: {m}")),
            other => AppError::Numeric(other.to_string()),
        }
    }
}

/// Source of exit estimates; tests swap in a double.
pub trait Simulator {
    fn exit_estimate(&self, model: &MarketModel, cfg: &SimConfig) -> Result<SimEstimate, SimError>;
}

pub struct EulerSimulator;

impl Simulator for EulerSimulator {
    fn exit_estimate(&self, model: &MarketModel, cfg: &SimConfig) -> Result<SimEstimate, SimError> {
        simulate_exit(model, cfg)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectSummary {
    pub asset: Option<usize>,
    pub defect: f64,
    pub defect_ci: (f64, f64),
    pub trend: Trend,
    pub interpretation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub config: SimConfig,
    pub estimate: SimEstimate,
    /// Absent for drift mode `p`, which does not estimate a defect.
    pub defect: Option<DefectSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContradictionReport {
    pub flag: Flag,
    pub exists_rules: Vec<String>,
    pub not_exists_rules: Vec<String>,
    pub message: String,
}

impl From<&ContradictionError> for ContradictionReport {
    fn from(e: &ContradictionError) -> Self {
        ContradictionReport {
            flag: e.flag,
            exists_rules: e.exists_rules.clone(),
            not_exists_rules: e.not_exists_rules.clone(),
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config_digest: String,
    pub master_seed: u64,
    pub validation: ValidationReport,
    pub reports: Vec<ConditionReport>,
    pub skipped: Vec<SkippedCheck>,
    pub verdict: Option<MarketVerdict>,
    pub contradiction: Option<ContradictionReport>,
    pub simulation: Option<SimulationReport>,
}

impl Report {
    pub fn exit_code(&self) -> u8 {
        if self.contradiction.is_some() {
            3
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn validation(model: &MarketModel, seed: u64) -> Result<ValidationReport, AppError> {
    let plan = SamplePlan { seed, ..SamplePlan::default() };
    let rep = validate_model(model, &plan).map_err(|e| AppError::Numeric(e.to_string()))?;
    if !rep.pass {
        let (t, x) = &rep.min_eigenvalue_at;
        return Err(AppError::Numeric(format!(
            "a is not symmetric positive semi-definite on the probes (max symmetry defect {:.3e}, min eigenvalue {:.3e} at t={t}, x={x:?})",
            rep.max_symmetry_defect, rep.min_eigenvalue
        )));
    }
    Ok(rep)
}

fn simulation(model: &MarketModel, sim: &SimConfig, simulator: &dyn Simulator) -> Result<(SimulationReport, Option<ConditionReport>), AppError> {
    let estimate = simulator.exit_estimate(model, sim)?;
    let asset = match sim.drift_mode {
        DriftMode::P => {
            let report = SimulationReport { config: sim.clone(), estimate, defect: None };
            return Ok((report, None));
        }
        DriftMode::Q => None,
        DriftMode::QShift(i) => Some(i),
    };
    let d = defect_report(asset, estimate);
    let condition = defect_condition(&d);
    let report = SimulationReport {
        config: sim.clone(),
        defect: Some(DefectSummary {
            asset: d.asset,
            defect: d.defect,
            defect_ci: d.defect_ci,
            trend: d.trend,
            interpretation: d.interpretation,
        }),
        estimate: d.estimate,
    };
    Ok((report, Some(condition)))
}

/// Runs `command` on `cfg`. A contradiction between derived flags is
/// reported inside the returned report (exit code 3), not as an error.
pub fn execute(command: Command, cfg: &RunConfig, simulator: &dyn Simulator) -> Result<Report, AppError> {
    let model = &cfg.model;
    if command == Command::Simulate && cfg.simulate.is_none() {
        return Err(AppError::Config(ConfigError {
            path: "config".into(),
            line: None,
            kind: crate::config::ConfigErrorKind::Invalid,
            message: "`simulate` needs a [simulate] section".into(),
        }));
    }
    let validation = validation(model, cfg.seed)?;
    let mut reports = Vec::new();
    let mut skipped = Vec::new();
    if command != Command::Simulate {
        let opts = cfg.check_options();
        let ids = match &cfg.checks {
            CheckSelection::AllApplicable => applicable_checks(model, &cfg.certificates, &opts),
            CheckSelection::List(ids) => ids.clone(),
        };
        let run = run_checks(model, &cfg.certificates, &ids, &opts)?;
        reports = run.reports;
        skipped = run.skipped;
        if let Some(mm) = &cfg.mu_model {
            let mu = check_mu_1d(&mm.mu, &mm.sigma, &opts)?;
            reports.extend([mu.slmd, mu.elmm, mu.emm]);
        }
    }
    let mut simulation_report = None;
    if let (true, Some(sim)) = (command != Command::Check, &cfg.simulate) {
        let (rep, condition) = simulation(model, sim, simulator)?;
        if command == Command::Report {
            reports.extend(condition);
        }
        simulation_report = Some(rep);
    }
    let (verdict, contradiction) = if command == Command::Simulate {
        (None, None)
    } else {
        match classify(&reports, Dims::of(model)) {
            Ok(v) => (Some(v), None),
            Err(e) => (None, Some(ContradictionReport::from(&e))),
        }
    };
    Ok(Report {
        tool: TOOL,
        version: VERSION,
        command: command.as_str(),
        config_digest: cfg.digest(),
        master_seed: cfg.simulate.as_ref().map_or(cfg.seed, |s| s.master_seed),
        validation,
        reports,
        skipped,
        verdict,
        contradiction,
        simulation: simulation_report,
    })
}

/// Where report and CSV files go: `--out DIR` wins, otherwise the paths in
/// `[output]` relative to `base`.
#[derive(Debug, Clone)]
pub struct OutputPaths {
    pub report: Option<PathBuf>,
    pub csv: Option<PathBuf>,
}

impl OutputPaths {
    pub fn resolve(cfg: &RunConfig, out_dir: Option<&Path>, base: &Path) -> OutputPaths {
        let o = &cfg.output;
        match out_dir {
            Some(dir) => OutputPaths {
                report: Some(dir.join(o.report.as_deref().unwrap_or("report.json"))),
                csv: cfg.simulate.as_ref().map(|_| dir.join(o.csv.as_deref().unwrap_or("paths.csv"))),
            },
            None => OutputPaths {
                report: o.report.as_ref().map(|r| base.join(r)),
                csv: o.csv.as_ref().map(|c| base.join(c)),
            },
        }
    }
}

fn io_error(path: &Path, e: impl ToString) -> AppError {
    AppError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

/// Writes the report and, for simulating commands, the path table.
pub fn write_outputs(command: Command, cfg: &RunConfig, report: &Report, paths: &OutputPaths) -> Result<(), AppError> {
    if let Some(p) = &paths.report {
        std::fs::write(p, report.to_json()).map_err(|e| io_error(p, e))?;
    }
    if command != Command::Check {
        if let (Some(p), Some(sim)) = (&paths.csv, &cfg.simulate) {
            let file = std::fs::File::create(p).map_err(|e| io_error(p, e))?;
            let mut w = std::io::BufWriter::new(file);
            let count = cfg.output.csv_paths.min(sim.paths);
            emit_paths(&cfg.model, sim, count, cfg.output.csv_thin, &mut w)?;
            std::io::Write::flush(&mut w).map_err(|e| io_error(p, e))?;
        }
    }
    Ok(())
}

/// Human-readable summary; empty when quiet.
pub fn summary(report: &Report, verbosity: Verbosity) -> String {
    let mut s = String::new();
    if verbosity == Verbosity::Quiet {
        return s;
    }
    let v = &report.validation;
    let _ = writeln!(
        s,
        "{} {} {}  config {}  seed {}",
        report.tool,
        report.version,
        report.command,
        &report.config_digest[..12],
        report.master_seed
    );
    let _ = writeln!(
        s,
        "validation: pass ({} probes, min eigenvalue {:.3e})",
        v.points_checked, v.min_eigenvalue
    );
    if !report.reports.is_empty() {
        let _ = writeln!(s, "conditions:");
        for r in &report.reports {
            let _ = writeln!(s, "  {:<24} {:<13} {:?}", r.condition_id.as_str(), format!("{:?}", r.verdict).to_lowercase(), r.mode);
            if verbosity == Verbosity::Verbose {
                for c in &r.evidence.checks {
                    let _ = writeln!(s, "      {:?} {}: {}", c.outcome, c.name, c.detail);
                }
                for w in &r.evidence.witnesses {
                    let _ = writeln!(s, "      witness x={:?} t={:?}: {} ({:.3e})", w.x, w.t, w.reason, w.value);
                }
            }
        }
    }
    for k in &report.skipped {
        let _ = writeln!(s, "  skipped {}: {}", k.condition_id, k.reason);
    }
    if let Some(sim) = &report.simulation {
        let e = &sim.estimate;
        let _ = writeln!(
            s,
            "simulation: drift {:?}, {} valid paths, {} steps (h = {:.3e})",
            e.drift_mode, e.valid_paths, e.steps, e.step_size
        );
        for r in &e.per_radius {
            let _ = writeln!(
                s,
                "  radius {:>8}: exit probability {:.5} [{:.5}, {:.5}]",
                r.radius, r.p_hat, r.ci.0, r.ci.1
            );
        }
        for w in &e.warnings {
            let _ = writeln!(s, "  warning: {w}");
        }
        if let Some(d) = &sim.defect {
            let _ = writeln!(s, "  {}", d.interpretation);
        }
    }
    if let Some(v) = &report.verdict {
        let _ = writeln!(
            s,
            "verdict: slmd={} smd={} elmm={} emm={} elmm_unique={} emm_unique={}",
            json_word(&v.slmd),
            json_word(&v.smd),
            json_word(&v.elmm),
            json_word(&v.emm),
            json_word(&v.elmm_unique),
            json_word(&v.emm_unique)
        );
        let t = &v.taxonomy;
        let _ = writeln!(
            s,
            "taxonomy: nupbr={} nflvr={} nra={} nga={}  bubble={}",
            json_word(&t.nupbr),
            json_word(&t.nflvr),
            json_word(&t.nra),
            json_word(&t.nga),
            json_word(&v.bubble)
        );
        if verbosity == Verbosity::Verbose {
            for p in &v.provenance {
                let _ = writeln!(s, "  {} by \"{}\" from {:?} ({:?})", p.conclusion, p.rule, p.condition_ids, p.grade);
            }
        }
        for n in &v.notes {
            let _ = writeln!(s, "note: {n}");
        }
    }
    if let Some(c) = &report.contradiction {
        let _ = writeln!(s, "CONTRADICTION: {}", c.message);
    }
    s
}

fn json_word<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FellerReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub mu: String,
    pub sigma2: String,
    pub interval: (f64, f64),
    pub c: f64,
    pub classification: FellerClassification,
}

/// Feller's test for `dY = μ dt + σ dW` with `μ`, `σ²` in `x1`.
pub fn feller(mu: &str, sigma2: &str, interval: (f64, f64), c: f64) -> Result<FellerReport, AppError> {
    use arbcheck_core::dsl::{Expr, Scope};
    let bind = |what: &str, s: &str| {
        Expr::parse_in(s, Scope::State { dim: 1 }).map_err(|e| ConfigError {
            path: "feller".into(),
            line: None,
            kind: crate::config::ConfigErrorKind::Bind,
            message: format!("{what}: {e}"),
        })
    };
    let mu_e = bind("mu", mu)?;
    let s2_e = bind("sigma2", sigma2)?;
    if mu_e.uses_time() || s2_e.uses_time() {
        return Err(AppError::Config(ConfigError {
            path: "feller".into(),
            line: None,
            kind: crate::config::ConfigErrorKind::Bind,
            message: "mu and sigma2 must not depend on t".into(),
        }));
    }
    let classification = feller_classify(
        |y| mu_e.eval_state(0.0, &[y]),
        |y| s2_e.eval_state(0.0, &[y]),
        interval,
        c,
        &TailOptions::default(),
    )
    .map_err(|e| AppError::Numeric(e.to_string()))?;
    Ok(FellerReport {
        tool: TOOL,
        version: VERSION,
        command: "feller",
        mu: mu.to_string(),
        sigma2: sigma2.to_string(),
        interval,
        c,
        classification,
    })
}
