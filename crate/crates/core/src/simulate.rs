//! Euler–Maruyama estimates of the exit probabilities `Q_n(τ_n ≤ T)` under the
//! candidate measures, and the martingale defects they imply.
//!
//! Every path draws from its own counter-based stream, so results do not
//! depend on the number of worker threads. One pass records, for each path,
//! how many of the increasing stopping radii it reached before `T`.

use std::io::{self, Write};

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::criteria::{ConditionId, ConditionReport, Evidence, Mode, Outcome};
use crate::model::{asset_path, linalg, norm, sqrt_psd, MarketModel, Mat, ModelError, StatePath};
use crate::rng;

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;

/// Fraction of invalid paths above which a run is rejected.
pub const MAX_INVALID_FRACTION: f64 = 1e-3;

const BRIDGE_TAG: u64 = 0xb41d_6e;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "asset")]
pub enum DriftMode {
    /// The real-world drift `b`.
    P,
    /// `(0, μ)`.
    Q,
    /// `(0, μ) + a e_i`, `i` 1-based.
    QShift(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    pub steps_per_unit_time: usize,
    pub paths: usize,
    pub radii: Vec<f64>,
    pub master_seed: u64,
    pub drift_mode: DriftMode,
    /// Count an exit between grid points with the Brownian-bridge crossing
    /// probability of the radial component.
    pub bridge_correction: bool,
    /// Worker threads; `None` uses rayon's default.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            steps_per_unit_time: 1024,
            paths: 20_000,
            radii: vec![4.0, 8.0, 16.0, 32.0],
            master_seed: 0,
            drift_mode: DriftMode::Q,
            bridge_correction: false,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid simulation config: {0}")]
    Config(String),
    #[error("{invalid} of {paths} paths were invalid (first: path {first_path}: {first_reason})")]
    TooManyInvalid {
        invalid: u64,
        paths: u64,
        first_path: u64,
        first_reason: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("failed to write paths: {0}")]
    Io(String),
}

impl SimConfig {
    pub fn validate(&self, model: &MarketModel) -> Result<(), SimError> {
        let bad = |m: String| Err(SimError::Config(m));
        if self.paths == 0 {
            return bad("paths must be at least 1".into());
        }
        if self.steps_per_unit_time == 0 {
            return bad("steps_per_unit_time must be at least 1".into());
        }
        if self.radii.is_empty() {
            return bad("radii must not be empty".into());
        }
        if self.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return bad("radii must be positive and finite".into());
        }
        if self.radii.windows(2).any(|w| w[0] >= w[1]) {
            return bad("radii must be strictly increasing".into());
        }
        if let DriftMode::QShift(i) = self.drift_mode {
            if i == 0 || i > model.m {
                return bad(format!("shifted drift asset {i} outside 1..={}", model.m));
            }
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    /// Number of Euler steps on `[0, T]`; the step is `T / steps`.
    pub fn steps(&self, horizon: f64) -> usize {
        ((horizon * self.steps_per_unit_time as f64).ceil() as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusEstimate {
    pub radius: f64,
    pub exit_count: u64,
    pub paths: u64,
    pub p_hat: f64,
    pub ci: (f64, f64),
    pub survival: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimEstimate {
    pub drift_mode: DriftMode,
    pub steps: usize,
    pub step_size: f64,
    pub valid_paths: u64,
    pub invalid_paths: u64,
    pub per_radius: Vec<RadiusEstimate>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Trend {
    Vanishing,
    Plateau,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefectReport {
    /// `None` for the density defect, the 1-based asset otherwise.
    pub asset: Option<usize>,
    pub estimate: SimEstimate,
    pub defect: f64,
    pub defect_ci: (f64, f64),
    pub trend: Trend,
    pub interpretation: String,
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let p = k as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if k == n { 1.0 } else { (center + half).min(1.0) };
    (lo, hi)
}

enum Diffusion {
    Constant(Mat),
    Diagonal,
    Full,
}

struct Stepper<'a> {
    model: &'a MarketModel,
    mode: DriftMode,
    diffusion: Diffusion,
    b_zero: bool,
    mu_zero: bool,
}

/// Coefficient buffers for one path.
struct Scratch {
    drift: Vec<f64>,
    root: Mat,
    a_diag: Vec<f64>,
    a: Mat,
    noise: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(model: &'a MarketModel, mode: DriftMode) -> Result<Self, String> {
        let diffusion = if model.a_is_state_independent() && model.a_is_time_independent() {
            let a = model.eval_a(0.0, &model.x0).map_err(|e| e.to_string())?;
            Diffusion::Constant(sqrt_psd(&a, linalg::psd_tolerance(&a)).map_err(|e| e.to_string())?)
        } else if model.a_is_diagonal() {
            Diffusion::Diagonal
        } else {
            Diffusion::Full
        };
        Ok(Stepper {
            model,
            mode,
            diffusion,
            b_zero: model.b_is_zero_literal(),
            mu_zero: model.mu_is_zero_literal(),
        })
    }

    fn scratch(&self) -> Scratch {
        let d = self.model.d;
        Scratch {
            drift: vec![0.0; d],
            root: match &self.diffusion {
                Diffusion::Constant(r) => r.clone(),
                _ => Mat::zeros(d, d),
            },
            a_diag: vec![0.0; d],
            a: Mat::zeros(d, d),
            noise: vec![0.0; d],
        }
    }

    fn needs_a(&self) -> bool {
        !matches!(self.diffusion, Diffusion::Constant(_)) || matches!(self.mode, DriftMode::QShift(_))
    }

    /// Fills drift, `a` and its square root at `(t, x)`.
    fn coefficients(&self, t: f64, x: &[f64], s: &mut Scratch) -> Result<(), String> {
        let m = self.model;
        let d = m.d;
        let err = |e: crate::dsl::DslError| e.to_string();
        if self.needs_a() {
            match self.diffusion {
                Diffusion::Diagonal => {
                    for i in 0..d {
                        let v = m.a[i][i].eval_state(t, x).map_err(err)?;
                        if !v.is_finite() || v < -1e-9 * (1.0 + v.abs()) {
                            return Err(format!("a is not positive semi-definite at t={t}, x={x:?}"));
                        }
                        s.a_diag[i] = v;
                        s.root[(i, i)] = v.max(0.0).sqrt();
                    }
                }
                _ => {
                    s.a = m.eval_a(t, x).map_err(err)?;
                    if let Diffusion::Full = self.diffusion {
                        s.root = sqrt_psd(&s.a, linalg::psd_tolerance(&s.a))
                            .map_err(|e| format!("{e} at t={t}, x={x:?}"))?;
                    }
                    for i in 0..d {
                        s.a_diag[i] = s.a[(i, i)];
                    }
                }
            }
        }
        s.drift.iter_mut().for_each(|v| *v = 0.0);
        match self.mode {
            DriftMode::P => {
                if !self.b_zero {
                    for (i, e) in m.b.iter().enumerate() {
                        s.drift[i] = e.eval_state(t, x).map_err(err)?;
                    }
                }
            }
            DriftMode::Q | DriftMode::QShift(_) => {
                if !self.mu_zero {
                    for (k, e) in m.mu.iter().enumerate() {
                        s.drift[m.m + k] = e.eval_state(t, x).map_err(err)?;
                    }
                }
                if let DriftMode::QShift(i) = self.mode {
                    if let Diffusion::Diagonal = self.diffusion {
                        s.drift[i - 1] += s.a_diag[i - 1];
                    } else {
                        for k in 0..d {
                            s.drift[k] += s.a[(k, i - 1)];
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Variance rate of `‖X‖` at `x`: `x̂ᵀ a x̂`.
    fn radial_variance(&self, x: &[f64], s: &Scratch) -> f64 {
        let r = norm(x);
        if r == 0.0 {
            return s.root.iter().map(|v| v * v).sum::<f64>() / self.model.d as f64;
        }
        let mut acc = 0.0;
        for i in 0..x.len() {
            let mut row = 0.0;
            for j in 0..x.len() {
                row += s.root[(i, j)] * x[j];
            }
            acc += row * row;
        }
        acc / (r * r)
    }
}

/// One step `x ← x + drift·h + a^{1/2}·√h·ξ`.
fn euler_step(x: &mut [f64], s: &mut Scratch, g: &mut rand_chacha::ChaCha8Rng, h: f64, sqrt_h: f64) {
    let d = x.len();
    for v in s.noise.iter_mut() {
        *v = rng::gaussian(g);
    }
    for i in 0..d {
        let mut dw = 0.0;
        for j in 0..d {
            dw += s.root[(i, j)] * s.noise[j];
        }
        x[i] += s.drift[i] * h + sqrt_h * dw;
    }
}

enum PathOutcome {
    Reached(usize),
    Invalid(String),
}

fn run_path(stepper: &Stepper<'_>, cfg: &SimConfig, horizon: f64, index: u64) -> PathOutcome {
    let model = stepper.model;
    let radii = &cfg.radii;
    let steps = cfg.steps(horizon);
    let h = horizon / steps as f64;
    let sqrt_h = h.sqrt();
    let mut g = rng::stream(cfg.master_seed, index);
    let mut bridge = cfg.bridge_correction.then(|| rng::stream(rng::derive_seed(cfg.master_seed, BRIDGE_TAG), index));
    let mut s = stepper.scratch();
    let mut x = model.x0.clone();
    let mut r = norm(&x);
    let mut reached = radii.partition_point(|n| *n <= r);
    for k in 0..steps {
        if reached == radii.len() {
            break;
        }
        let t = k as f64 * h;
        if let Err(e) = stepper.coefficients(t, &x, &mut s) {
            return PathOutcome::Invalid(e);
        }
        let var = if bridge.is_some() { stepper.radial_variance(&x, &s) } else { 0.0 };
        euler_step(&mut x, &mut s, &mut g, h, sqrt_h);
        let r_new = norm(&x);
        if !r_new.is_finite() {
            return PathOutcome::Invalid(format!("state is not finite after step {k}"));
        }
        reached = reached.max(radii.partition_point(|n| *n <= r_new));
        if let Some(b) = bridge.as_mut() {
            while reached < radii.len() && var > 0.0 {
                let n = radii[reached];
                let p = (-2.0 * (n - r) * (n - r_new) / (var * h)).exp();
                if b.random::<f64>() < p {
                    reached += 1;
                } else {
                    break;
                }
            }
        }
        r = r_new;
    }
    PathOutcome::Reached(reached)
}

#[derive(Default)]
struct Tally {
    /// `hist[j]` = valid paths that reached exactly `j` radii.
    hist: Vec<u64>,
    invalid: u64,
    first_invalid: Option<(u64, String)>,
}

impl Tally {
    fn merge(mut self, other: Tally) -> Tally {
        if self.hist.len() < other.hist.len() {
            self.hist.resize(other.hist.len(), 0);
        }
        for (a, b) in self.hist.iter_mut().zip(other.hist) {
            *a += b;
        }
        self.invalid += other.invalid;
        self.first_invalid = match (self.first_invalid, other.first_invalid) {
            (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
            (a, b) => a.or(b),
        };
        self
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, SimError> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| SimError::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

/// Exit-probability estimates for every radius from one pass over the paths.
pub fn simulate_exit(model: &MarketModel, cfg: &SimConfig) -> Result<SimEstimate, SimError> {
    cfg.validate(model)?;
    let stepper = Stepper::new(model, cfg.drift_mode).map_err(|e| SimError::Config(format!("diffusion: {e}")))?;
    let nr = cfg.radii.len();
    let tally = with_pool(cfg.threads, || {
        (0..cfg.paths as u64)
            .into_par_iter()
            .fold(
                || Tally { hist: vec![0; nr + 1], ..Tally::default() },
                |mut t, i| {
                    match run_path(&stepper, cfg, model.horizon, i) {
                        PathOutcome::Reached(j) => t.hist[j] += 1,
                        PathOutcome::Invalid(reason) => {
                            t.invalid += 1;
                            if t.first_invalid.as_ref().is_none_or(|f| i < f.0) {
                                t.first_invalid = Some((i, reason));
                            }
                        }
                    }
                    t
                },
            )
            .reduce(|| Tally { hist: vec![0; nr + 1], ..Tally::default() }, Tally::merge)
    })?;
    let paths = cfg.paths as u64;
    let mut warnings = Vec::new();
    if let Some((first_path, first_reason)) = tally.first_invalid {
        if tally.invalid as f64 > MAX_INVALID_FRACTION * paths as f64 {
            return Err(SimError::TooManyInvalid { invalid: tally.invalid, paths, first_path, first_reason });
        }
        warnings.push(format!(
            "{} of {paths} paths were invalid and excluded (first: path {first_path}: {first_reason})",
            tally.invalid
        ));
    }
    let valid = paths - tally.invalid;
    let steps = cfg.steps(model.horizon);
    let per_radius = cfg
        .radii
        .iter()
        .enumerate()
        .map(|(j, &radius)| {
            let exit_count: u64 = tally.hist[j + 1..].iter().sum();
            let p_hat = if valid == 0 { 0.0 } else { exit_count as f64 / valid as f64 };
            RadiusEstimate {
                radius,
                exit_count,
                paths: valid,
                p_hat,
                ci: wilson(exit_count, valid, Z95),
                survival: 1.0 - p_hat,
            }
        })
        .collect();
    Ok(SimEstimate {
        drift_mode: cfg.drift_mode,
        steps,
        step_size: model.horizon / steps as f64,
        valid_paths: valid,
        invalid_paths: tally.invalid,
        per_radius,
        warnings,
    })
}

/// Vanishing when the intervals at the two largest radii contain 0; plateau
/// when those two defects agree within 2 interval widths and the last sits
/// more than 3 widths above 0.
pub fn classify_trend(est: &SimEstimate) -> Trend {
    let pr = &est.per_radius;
    let Some(last) = pr.last() else { return Trend::Undetermined };
    let prev = if pr.len() >= 2 { &pr[pr.len() - 2] } else { last };
    if last.ci.0 <= 0.0 && prev.ci.0 <= 0.0 {
        return Trend::Vanishing;
    }
    let width = (last.ci.1 - last.ci.0).max(prev.ci.1 - prev.ci.0);
    if (last.p_hat - prev.p_hat).abs() <= 2.0 * width && last.p_hat > 3.0 * width {
        Trend::Plateau
    } else {
        Trend::Undetermined
    }
}

/// Defect and trend of an exit estimate; `asset` is `None` for the density.
pub fn defect_report(asset: Option<usize>, estimate: SimEstimate) -> DefectReport {
    let last = estimate.per_radius.last().expect("validated non-empty radii");
    let trend = classify_trend(&estimate);
    let what = match asset {
        None => "the density process".to_string(),
        Some(i) => format!("the discounted asset S{i} under the candidate measure"),
    };
    let interpretation = match trend {
        Trend::Vanishing => format!("vanishing defect: consistent with {what} being a true martingale"),
        Trend::Plateau => format!("plateau defect: evidence that {what} is a strict local martingale"),
        Trend::Undetermined => "undetermined: the defect neither vanishes nor settles at these radii".to_string(),
    };
    DefectReport {
        asset,
        defect: last.p_hat,
        defect_ci: last.ci,
        trend,
        interpretation,
        estimate,
    }
}

/// `1 − lim_n Q_n(τ_n > T)` with drift `(0, μ)`.
pub fn martingale_defect(model: &MarketModel, cfg: &SimConfig) -> Result<DefectReport, SimError> {
    let cfg = SimConfig { drift_mode: DriftMode::Q, ..cfg.clone() };
    Ok(defect_report(None, simulate_exit(model, &cfg)?))
}

/// The same with drift `(0, μ) + a e_i`.
pub fn asset_defect(model: &MarketModel, i: usize, cfg: &SimConfig) -> Result<DefectReport, SimError> {
    let cfg = SimConfig { drift_mode: DriftMode::QShift(i), ..cfg.clone() };
    Ok(defect_report(Some(i), simulate_exit(model, &cfg)?))
}

/// Turns a defect into evidence for the verdict engine: plateau Holds,
/// vanishing Fails, anything else is Inconclusive.
pub fn defect_condition(report: &DefectReport) -> ConditionReport {
    let id = if report.asset.is_some() { ConditionId::SimulatedAssetDefect } else { ConditionId::SimulatedDefect };
    let mut ev = Evidence::default();
    for r in &report.estimate.per_radius {
        ev.value(format!("exit probability at radius {}", r.radius), r.p_hat);
    }
    let outcome = match report.trend {
        Trend::Plateau => Outcome::Pass,
        Trend::Vanishing => Outcome::Fail,
        Trend::Undetermined => Outcome::Unknown,
    };
    ev.check("positive defect", outcome, report.interpretation.clone());
    let verdict = match report.trend {
        Trend::Plateau => crate::criteria::Verdict::Holds,
        Trend::Vanishing => crate::criteria::Verdict::Fails,
        Trend::Undetermined => crate::criteria::Verdict::Inconclusive,
    };
    ConditionReport { condition_id: id, verdict, mode: Mode::Evidence, evidence: ev, notes: vec![] }
}

/// Writes `count` simulated paths as CSV rows `path_id,t,x1..xd,S1..Sm` at
/// every `thin`-th step. A path stops at the first step where its norm
/// reaches the largest radius; invalid paths end at their last valid state.
pub fn emit_paths<W: Write>(model: &MarketModel, cfg: &SimConfig, count: usize, thin: usize, out: &mut W) -> Result<(), SimError> {
    cfg.validate(model)?;
    if count > cfg.paths {
        return Err(SimError::Config(format!("count {count} exceeds paths {}", cfg.paths)));
    }
    let thin = thin.max(1);
    let io = |e: io::Error| SimError::Io(e.to_string());
    let stepper = Stepper::new(model, cfg.drift_mode).map_err(|e| SimError::Config(format!("diffusion: {e}")))?;
    let mut header = String::from("path_id,t");
    for i in 1..=model.d {
        header.push_str(&format!(",x{i}"));
    }
    for i in 1..=model.m {
        header.push_str(&format!(",S{i}"));
    }
    writeln!(out, "{header}").map_err(io)?;
    let steps = cfg.steps(model.horizon);
    let h = model.horizon / steps as f64;
    let top = *cfg.radii.last().expect("validated");
    for index in 0..count as u64 {
        let mut g = rng::stream(cfg.master_seed, index);
        let mut s = stepper.scratch();
        let mut x = model.x0.clone();
        let mut path = StatePath { times: vec![0.0], states: vec![x.clone()] };
        for k in 0..steps {
            if norm(&x) >= top || stepper.coefficients(k as f64 * h, &x, &mut s).is_err() {
                break;
            }
            euler_step(&mut x, &mut s, &mut g, h, h.sqrt());
            if !x.iter().all(|v| v.is_finite()) {
                break;
            }
            path.times.push(if k + 1 == steps { model.horizon } else { (k + 1) as f64 * h });
            path.states.push(x.clone());
        }
        let assets: Vec<Vec<f64>> = (1..=model.m).map(|i| asset_path(model, &path, i)).collect::<Result<_, _>>()?;
        let last = path.times.len() - 1;
        for (k, (t, state)) in path.times.iter().zip(&path.states).enumerate() {
            if k % thin != 0 && k != last {
                continue;
            }
            let mut row = format!("{index},{t:.16e}");
            for v in state {
                row.push_str(&format!(",{v:.16e}"));
            }
            for a in &assets {
                row.push_str(&format!(",{:.16e}", a[k]));
            }
            writeln!(out, "{row}").map_err(io)?;
        }
    }
    Ok(())
}
