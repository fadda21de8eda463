//! Deterministic sufficient conditions for the existence and non-existence of
//! martingale densities and measures. Every checker returns a
//! [`ConditionReport`] with the sub-checks it ran.
//!
//! Conditions quantified over unknown functions (`ζ`, `A`, `B`, `ξ`, `α`,
//! `â`) are checked in certificate mode when the functions are supplied and
//! verified on the probes, and in evidence mode when the checker fits them
//! from sampled envelopes.

mod growth;
mod market;
mod radial;
mod regularity;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::dsl::{DslError, Expr};
use crate::envelopes::{sphere_extremes, EnvelopeError, EnvelopeOptions, Probe, Witness};
use crate::model::{norm, CertificateBundle, MarketModel};
use crate::quadrature::{
    classify_tail, classify_windows, Direction, IntegralKind, IntegralVerdict, QuadError, TailEvidence, TailOptions,
};

pub use growth::{check_e3, check_el3, check_growth_cap, check_mckean};
pub use market::{check_1d_emm, check_mu_1d, check_radial_market, check_radial_shape, check_slmd, MuReports};
pub use radial::{check_e1, check_e1_asset, check_el1, check_n1, check_n1_asset, check_nl1};
pub use regularity::{check_holder_1d, check_u1, check_u2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ConditionId {
    Slmd,
    El1,
    E1,
    El3,
    E3,
    Mckean,
    U1,
    U2,
    Holder1d,
    Nl1,
    N1,
    GrowthCap,
    RadialShape,
    RadialExistence,
    RadialNonexistence,
    Emm1d,
    MuSlmd,
    MuElmm,
    MuEmm,
    SimulatedDefect,
    SimulatedAssetDefect,
}

impl ConditionId {
    pub const ALL: [ConditionId; 21] = [
        ConditionId::Slmd,
        ConditionId::El1,
        ConditionId::E1,
        ConditionId::El3,
        ConditionId::E3,
        ConditionId::Mckean,
        ConditionId::U1,
        ConditionId::U2,
        ConditionId::Holder1d,
        ConditionId::Nl1,
        ConditionId::N1,
        ConditionId::GrowthCap,
        ConditionId::RadialShape,
        ConditionId::RadialExistence,
        ConditionId::RadialNonexistence,
        ConditionId::Emm1d,
        ConditionId::MuSlmd,
        ConditionId::MuElmm,
        ConditionId::MuEmm,
        ConditionId::SimulatedDefect,
        ConditionId::SimulatedAssetDefect,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ConditionId::Slmd => "slmd",
            ConditionId::El1 => "el1",
            ConditionId::E1 => "e1",
            ConditionId::El3 => "el3",
            ConditionId::E3 => "e3",
            ConditionId::Mckean => "mckean",
            ConditionId::U1 => "u1",
            ConditionId::U2 => "u2",
            ConditionId::Holder1d => "holder_1d",
            ConditionId::Nl1 => "nl1",
            ConditionId::N1 => "n1",
            ConditionId::GrowthCap => "growth_cap",
            ConditionId::RadialShape => "radial_shape",
            ConditionId::RadialExistence => "radial_existence",
            ConditionId::RadialNonexistence => "radial_nonexistence",
            ConditionId::Emm1d => "emm_1d",
            ConditionId::MuSlmd => "mu_slmd",
            ConditionId::MuElmm => "mu_elmm",
            ConditionId::MuEmm => "mu_emm",
            ConditionId::SimulatedDefect => "simulated_defect",
            ConditionId::SimulatedAssetDefect => "simulated_asset_defect",
        }
    }
}

impl fmt::Display for ConditionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for ConditionId {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl FromStr for ConditionId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ConditionId::ALL
            .iter()
            .copied()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown condition id `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Grade of a report. `Evidence < Certificate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Evidence,
    Certificate,
}

/// A pointwise inequality `lhs ≥ rhs` checked on probes. `worst_margin` is the
/// smallest `(lhs − rhs)/(1 + |lhs| + |rhs|)` seen.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityRecord {
    pub name: String,
    pub holds: bool,
    pub worst_margin: f64,
    pub worst_at: Option<Witness>,
    pub probes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegralRecord {
    pub name: String,
    pub expected: IntegralKind,
    pub verdict: IntegralVerdict,
}

impl IntegralRecord {
    /// The classification came out as the opposite of what the condition needs.
    pub fn contradicts(&self) -> bool {
        matches!(
            (self.expected, self.verdict.kind),
            (IntegralKind::Converges, IntegralKind::Diverges) | (IntegralKind::Diverges, IntegralKind::Converges)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    Pass,
    Fail,
    Unknown,
}

/// Any other sub-check (modulus stability, shape probes, growth trends).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubCheck {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
    pub witness: Option<WitnessRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessRecord {
    pub reason: String,
    pub t: Option<f64>,
    pub x: Vec<f64>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedValue {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Evidence {
    pub inequalities: Vec<InequalityRecord>,
    pub integrals: Vec<IntegralRecord>,
    pub checks: Vec<SubCheck>,
    pub witnesses: Vec<WitnessRecord>,
    pub values: Vec<NamedValue>,
}

impl Evidence {
    pub(crate) fn value(&mut self, name: impl Into<String>, value: f64) {
        self.values.push(NamedValue { name: name.into(), value });
    }

    pub(crate) fn check(&mut self, name: impl Into<String>, outcome: Outcome, detail: impl Into<String>) {
        self.checks.push(SubCheck {
            name: name.into(),
            outcome,
            detail: detail.into(),
            witness: None,
        });
    }

    pub(crate) fn fail_with(&mut self, name: impl Into<String>, detail: impl Into<String>, witness: WitnessRecord) {
        self.checks.push(SubCheck {
            name: name.into(),
            outcome: Outcome::Fail,
            detail: detail.into(),
            witness: Some(witness),
        });
    }

    /// Appends `other` with every record name prefixed.
    pub(crate) fn absorb(&mut self, prefix: &str, other: Evidence) {
        let p = |n: String| format!("{prefix}{n}");
        self.inequalities.extend(other.inequalities.into_iter().map(|mut r| {
            r.name = p(r.name);
            r
        }));
        self.integrals.extend(other.integrals.into_iter().map(|mut r| {
            r.name = p(r.name);
            r
        }));
        self.checks.extend(other.checks.into_iter().map(|mut r| {
            r.name = p(r.name);
            r
        }));
        self.witnesses.extend(other.witnesses.into_iter().map(|mut r| {
            r.reason = p(r.reason);
            r
        }));
        self.values.extend(other.values.into_iter().map(|mut r| {
            r.name = p(r.name);
            r
        }));
    }

    fn failed(&self) -> bool {
        self.inequalities.iter().any(|r| !r.holds)
            || self.integrals.iter().any(IntegralRecord::contradicts)
            || self.checks.iter().any(|c| c.outcome == Outcome::Fail)
    }

    fn undecided(&self) -> bool {
        self.integrals.iter().any(|r| r.verdict.kind == IntegralKind::Inconclusive)
            || self.checks.iter().any(|c| c.outcome == Outcome::Unknown)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition_id: ConditionId,
    pub verdict: Verdict,
    pub mode: Mode,
    pub evidence: Evidence,
    pub notes: Vec<String>,
}

impl ConditionReport {
    /// Derives the verdict from the sub-checks: any failure gives `Fails`,
    /// otherwise any undecided sub-check gives `Inconclusive`. Witnesses of
    /// failed inequalities and checks are collected into `evidence.witnesses`.
    pub fn conclude(condition_id: ConditionId, mode: Mode, mut evidence: Evidence, notes: Vec<String>) -> Self {
        let verdict = if evidence.failed() {
            Verdict::Fails
        } else if evidence.undecided() {
            Verdict::Inconclusive
        } else {
            Verdict::Holds
        };
        if verdict == Verdict::Fails {
            let mut found: Vec<WitnessRecord> = Vec::new();
            for r in evidence.inequalities.iter().filter(|r| !r.holds) {
                if let Some(w) = &r.worst_at {
                    found.push(WitnessRecord {
                        reason: r.name.clone(),
                        t: Some(w.t),
                        x: w.x.clone(),
                        value: w.value,
                    });
                }
            }
            for c in evidence.checks.iter().filter(|c| c.outcome == Outcome::Fail) {
                if let Some(w) = &c.witness {
                    found.push(w.clone());
                }
            }
            for w in found {
                if !evidence.witnesses.contains(&w) {
                    evidence.witnesses.push(w);
                }
            }
        }
        ConditionReport {
            condition_id,
            verdict,
            mode,
            evidence,
            notes,
        }
    }

    pub fn inconclusive(condition_id: ConditionId, mode: Mode, evidence: Evidence, note: impl Into<String>) -> Self {
        ConditionReport {
            condition_id,
            verdict: Verdict::Inconclusive,
            mode,
            evidence,
            notes: vec![note.into()],
        }
    }

    /// A failing report points at a probe or carries a contradicting integral.
    pub fn has_witness(&self) -> bool {
        !self.evidence.witnesses.is_empty() || self.evidence.integrals.iter().any(IntegralRecord::contradicts)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CriteriaError {
    #[error("{condition}: missing certificate `{name}`")]
    MissingCertificate { condition: ConditionId, name: &'static str },
    #[error("{condition}: requires d = m (got d={d}, m={m})")]
    DimensionMismatch { condition: ConditionId, d: usize, m: usize },
    #[error("{condition}: {message}")]
    Precondition { condition: ConditionId, message: String },
    #[error("asset index {index} outside 1..={m}")]
    AssetIndex { index: usize, m: usize },
    #[error(transparent)]
    Envelope(#[from] EnvelopeError),
    #[error(transparent)]
    Eval(#[from] DslError),
}

impl CriteriaError {
    /// Errors that mean "this check does not apply" rather than a numeric failure.
    pub fn is_skip(&self) -> bool {
        matches!(
            self,
            CriteriaError::MissingCertificate { .. } | CriteriaError::DimensionMismatch { .. } | CriteriaError::Precondition { .. }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOptions {
    pub envelope: EnvelopeOptions,
    pub tail: TailOptions,
    /// Relative slack for pointwise inequalities.
    pub tol: f64,
    /// Fit missing certificate functions from envelopes (evidence grade).
    pub autonomous: bool,
    pub modulus_points: usize,
    pub modulus_levels: usize,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            envelope: EnvelopeOptions::default(),
            tail: TailOptions::default(),
            tol: 1e-9,
            autonomous: false,
            modulus_points: 32,
            modulus_levels: 16,
        }
    }
}

impl CheckOptions {
    pub fn seed(&self) -> u64 {
        self.envelope.seed
    }

    fn with_radii(&self, radii: Vec<f64>) -> EnvelopeOptions {
        EnvelopeOptions {
            radii,
            ..self.envelope.clone()
        }
    }
}

/// Radial anchor `max(½, ‖x0‖²/2)` for the nested integrals.
pub fn anchor(model: &MarketModel) -> f64 {
    let r = norm(&model.x0);
    (0.5f64).max(0.5 * r * r)
}

fn margin(lhs: f64, rhs: f64) -> f64 {
    if lhs.is_finite() && rhs.is_finite() {
        (lhs - rhs) / (1.0 + lhs.abs() + rhs.abs())
    } else if lhs == rhs {
        0.0
    } else if lhs > rhs {
        1.0
    } else {
        -1.0
    }
}

/// Checks `lhs ≥ rhs` on every sphere of `radii`, where `f` returns
/// `(lhs, rhs)` for a probe.
pub(crate) fn sphere_inequality<F>(
    model: &MarketModel,
    opts: &CheckOptions,
    radii: &[f64],
    name: &str,
    f: F,
) -> Result<InequalityRecord, CriteriaError>
where
    F: Fn(&Probe<'_>) -> Result<(f64, f64), DslError> + Sync,
{
    let env = opts.with_radii(radii.to_vec());
    let ext = sphere_extremes(model, &env, |p| {
        let (l, r) = f(p)?;
        Ok(margin(l, r))
    })?;
    let probes = ext.iter().map(|e| e.samples).sum();
    let worst = ext
        .into_iter()
        .filter(|e| e.samples > 0)
        .map(|e| e.inf)
        .min_by(|a, b| a.value.total_cmp(&b.value));
    let worst_margin = worst.as_ref().map_or(0.0, |w| w.value);
    Ok(InequalityRecord {
        name: name.into(),
        holds: worst_margin >= -opts.tol,
        worst_margin,
        worst_at: worst,
        probes,
    })
}

/// Checks `f(z) > 0` on the radial grid `zs`.
pub(crate) fn radial_positivity<F>(name: &str, zs: &[f64], mut f: F) -> Result<InequalityRecord, CriteriaError>
where
    F: FnMut(f64) -> Result<f64, DslError>,
{
    let mut worst: Option<Witness> = None;
    for &z in zs {
        let v = f(z)?;
        let ok = v > 0.0 && v.is_finite();
        let m = if ok { margin(v, 0.0) } else { -1.0 };
        if worst.as_ref().is_none_or(|w| m < w.value) {
            worst = Some(Witness { t: 0.0, x: vec![z], value: m });
        }
    }
    let worst_margin = worst.as_ref().map_or(0.0, |w| w.value);
    Ok(InequalityRecord {
        name: name.into(),
        holds: worst_margin > 0.0,
        worst_margin,
        worst_at: worst,
        probes: zs.len(),
    })
}

/// A verdict that did not come from window sums (closed forms, errors).
pub(crate) fn plain_verdict(kind: IntegralKind, value: Option<f64>, direction: Direction, note: String) -> IntegralVerdict {
    IntegralVerdict {
        kind,
        value,
        error_bound: if kind == IntegralKind::Converges { 0.0 } else { f64::INFINITY },
        evidence: TailEvidence {
            direction,
            windows: Vec::new(),
            partial_sum: value.unwrap_or(f64::NAN),
            window_slope: 0.0,
            fitted_exponent: 0.0,
            trailing_nondecreasing: 0,
            note,
        },
    }
}

/// Turns a quadrature outcome into a record. Evaluation failures propagate;
/// other quadrature failures make the record inconclusive.
pub(crate) fn integral_record(
    name: &str,
    expected: IntegralKind,
    direction: Direction,
    result: Result<IntegralVerdict, QuadError>,
) -> Result<IntegralRecord, CriteriaError> {
    let verdict = match result {
        Ok(v) => v,
        Err(QuadError::Eval { error, .. }) => return Err(error.into()),
        Err(e) => plain_verdict(IntegralKind::Inconclusive, None, direction, e.to_string()),
    };
    Ok(IntegralRecord {
        name: name.into(),
        expected,
        verdict,
    })
}

/// Time factor `ζ(t)` of a time-separable bound.
#[derive(Debug, Clone)]
pub(crate) enum Zeta<'a> {
    Expr(&'a Expr),
    Const(f64),
}

impl Zeta<'_> {
    pub fn eval(&self, t: f64) -> Result<f64, DslError> {
        match self {
            Zeta::Expr(e) => e.eval_time(t),
            Zeta::Const(c) => Ok(*c),
        }
    }

    /// Records for `∫_0^T ζ < ∞`: a closed form for constants, otherwise one
    /// tail classification toward each end of `[0, T]`.
    pub fn integrability(&self, horizon: f64, tail: &TailOptions) -> Result<Vec<IntegralRecord>, CriteriaError> {
        let constant = match self {
            Zeta::Const(c) => Some(*c),
            Zeta::Expr(e) if e.is_constant() => Some(e.eval_time(0.0)?),
            Zeta::Expr(_) => None,
        };
        if let Some(c) = constant {
            let kind = if c.is_finite() { IntegralKind::Converges } else { IntegralKind::Diverges };
            return Ok(vec![IntegralRecord {
                name: "zeta integrable on [0, T]".into(),
                expected: IntegralKind::Converges,
                verdict: plain_verdict(kind, Some(c * horizon), Direction::ToZero, "constant".into()),
            }]);
        }
        let half = 0.5 * horizon;
        let left = classify_tail(|t| self.eval(t), half, Direction::ToZero, tail);
        let right = classify_tail(|s| self.eval(horizon - s), half, Direction::ToZero, tail);
        Ok(vec![
            integral_record("zeta integrable near t = 0", IntegralKind::Converges, Direction::ToZero, left)?,
            integral_record("zeta integrable near t = T", IntegralKind::Converges, Direction::ToZero, right)?,
        ])
    }
}

/// Integrability near both ends of `[0, T]` of a time profile known only
/// pointwise: one midpoint sample per geometric window.
pub(crate) fn sampled_time_integrability<F>(
    mut f: F,
    horizon: f64,
    tail: &TailOptions,
) -> Result<Vec<IntegralRecord>, CriteriaError>
where
    F: FnMut(f64) -> Result<f64, CriteriaError>,
{
    let half = 0.5 * horizon;
    let mut out = Vec::with_capacity(2);
    for (name, left) in [("zeta integrable near t = 0", true), ("zeta integrable near t = T", false)] {
        let mut windows = Vec::with_capacity(tail.k_max);
        for k in 0..tail.k_max {
            let (a, b) = crate::quadrature::window(half, k, Direction::ToZero);
            let s = (a * b).sqrt();
            let t = if left { s } else { horizon - s };
            windows.push(f(t)?.max(0.0) * (b - a));
        }
        out.push(IntegralRecord {
            name: name.into(),
            expected: IntegralKind::Converges,
            verdict: classify_windows(&windows, Direction::ToZero, tail),
        });
    }
    Ok(out)
}

/// Piecewise-linear interpolant in `(ln z, ln v)`, extended by the end slopes.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LogLogFit {
    lz: Vec<f64>,
    lv: Vec<f64>,
    right_slope: f64,
    left_slope: f64,
}

impl LogLogFit {
    /// Values are clamped below at `1e-12·max v`; returns `None` without two
    /// usable points.
    pub fn new(z: &[f64], v: &[f64]) -> Option<Self> {
        let vmax = v.iter().copied().filter(|x| x.is_finite()).fold(f64::NEG_INFINITY, f64::max);
        if !(vmax > 0.0) {
            return None;
        }
        let floor = 1e-12 * vmax;
        let mut pts: Vec<(f64, f64)> = z
            .iter()
            .zip(v)
            .filter(|(z, v)| **z > 0.0 && v.is_finite())
            .map(|(z, v)| (z.ln(), v.max(floor).ln()))
            .collect();
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        if pts.len() < 2 {
            return None;
        }
        let n = pts.len();
        let left_slope = (pts[1].1 - pts[0].1) / (pts[1].0 - pts[0].0);
        let tail = &pts[n.saturating_sub(4)..];
        let m = tail.len() as f64;
        let mx = tail.iter().map(|p| p.0).sum::<f64>() / m;
        let my = tail.iter().map(|p| p.1).sum::<f64>() / m;
        let sxy: f64 = tail.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = tail.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
        Some(LogLogFit {
            lz: pts.iter().map(|p| p.0).collect(),
            lv: pts.iter().map(|p| p.1).collect(),
            right_slope: sxy / sxx,
            left_slope,
        })
    }

    pub fn eval(&self, z: f64) -> f64 {
        let x = z.ln();
        let n = self.lz.len();
        let y = if x <= self.lz[0] {
            self.lv[0] + self.left_slope * (x - self.lz[0])
        } else if x >= self.lz[n - 1] {
            self.lv[n - 1] + self.right_slope * (x - self.lz[n - 1])
        } else {
            let k = self.lz.partition_point(|v| *v <= x) - 1;
            let w = (x - self.lz[k]) / (self.lz[k + 1] - self.lz[k]);
            self.lv[k] + w * (self.lv[k + 1] - self.lv[k])
        };
        y.exp()
    }
}

/// A radial function `(0, ∞) → ℝ`: a certificate expression or a fitted envelope.
#[derive(Debug, Clone)]
pub(crate) enum RadialFn<'a> {
    Expr(&'a Expr),
    Fitted(LogLogFit),
}

impl RadialFn<'_> {
    pub fn eval(&self, z: f64) -> Result<f64, DslError> {
        match self {
            RadialFn::Expr(e) => e.eval_radial(z),
            RadialFn::Fitted(f) => Ok(f.eval(z)),
        }
    }
}

/// One line per check that did not run, with the reason.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SkippedCheck {
    pub condition_id: ConditionId,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CheckRun {
    pub reports: Vec<ConditionReport>,
    pub skipped: Vec<SkippedCheck>,
}

/// True when `a` is written as `f·Id` with one shared diagonal expression.
pub fn has_radial_form(model: &MarketModel) -> bool {
    model.m == model.d && model.a_is_diagonal() && (1..model.d).all(|i| model.a[i][i] == model.a[0][0])
}

/// Checks that make sense for this model and certificate bundle.
pub fn applicable_checks(model: &MarketModel, certs: &CertificateBundle, opts: &CheckOptions) -> Vec<ConditionId> {
    let square = model.d == model.m;
    let upper = (certs.big_a.is_some() && certs.big_b.is_some()) || opts.autonomous;
    let per_asset = (1..=model.m).all(|i| {
        certs
            .asset(i)
            .is_some_and(|c| c.big_a.is_some() && c.big_b.is_some())
    });
    let mut ids = vec![ConditionId::Slmd];
    if upper {
        ids.push(ConditionId::El1);
    }
    if per_asset || opts.autonomous {
        ids.push(ConditionId::E1);
    }
    ids.extend([ConditionId::El3, ConditionId::E3, ConditionId::GrowthCap, ConditionId::Mckean]);
    if square {
        ids.extend([ConditionId::U1, ConditionId::U2]);
        if model.d == 1 {
            ids.push(ConditionId::Holder1d);
        }
        if upper {
            ids.push(ConditionId::Nl1);
        }
        if (1..=model.d).any(|i| certs.asset(i).is_some_and(|c| c.big_a.is_some() && c.big_b.is_some())) || opts.autonomous {
            ids.push(ConditionId::N1);
        }
    }
    if has_radial_form(model) {
        ids.extend([ConditionId::RadialShape, ConditionId::RadialExistence, ConditionId::RadialNonexistence]);
        if model.d == 1 && model.a_is_time_independent() {
            ids.push(ConditionId::Emm1d);
        }
    }
    ids
}

/// Runs one check. The radial-market pair is computed together and filtered.
pub fn run_check(
    id: ConditionId,
    model: &MarketModel,
    certs: &CertificateBundle,
    opts: &CheckOptions,
) -> Result<ConditionReport, CriteriaError> {
    match id {
        ConditionId::Slmd => check_slmd(model, certs),
        ConditionId::El1 => check_el1(model, certs, opts),
        ConditionId::E1 => check_e1(model, certs, opts),
        ConditionId::El3 => check_el3(model, certs, opts),
        ConditionId::E3 => check_e3(model, certs, opts),
        ConditionId::Mckean => check_mckean(model, certs, opts),
        ConditionId::U1 => check_u1(model, opts),
        ConditionId::U2 => check_u2(model, opts),
        ConditionId::Holder1d => check_holder_1d(model, certs, opts),
        ConditionId::Nl1 => check_nl1(model, certs, opts),
        ConditionId::N1 => check_n1(model, certs, opts),
        ConditionId::GrowthCap => check_growth_cap(model, certs, opts),
        ConditionId::RadialShape => check_radial_shape(model, opts),
        ConditionId::RadialExistence => Ok(check_radial_market(model, certs, opts)?.0),
        ConditionId::RadialNonexistence => Ok(check_radial_market(model, certs, opts)?.1),
        ConditionId::Emm1d => check_1d_emm(model, opts),
        ConditionId::MuSlmd | ConditionId::MuElmm | ConditionId::MuEmm => Err(CriteriaError::Precondition {
            condition: id,
            message: "needs a separate one-dimensional (mu, sigma) model".into(),
        }),
        ConditionId::SimulatedDefect | ConditionId::SimulatedAssetDefect => Err(CriteriaError::Precondition {
            condition: id,
            message: "produced by the simulator, not by a checker".into(),
        }),
    }
}

/// Runs `ids` in order. Checks that do not apply (missing certificates,
/// dimension or shape preconditions) are listed in `skipped`; numeric
/// failures abort.
pub fn run_checks(
    model: &MarketModel,
    certs: &CertificateBundle,
    ids: &[ConditionId],
    opts: &CheckOptions,
) -> Result<CheckRun, CriteriaError> {
    let mut run = CheckRun::default();
    let mut radial_pair = None;
    for &id in ids {
        let result = match id {
            ConditionId::RadialExistence | ConditionId::RadialNonexistence => {
                if radial_pair.is_none() {
                    radial_pair = Some(check_radial_market(model, certs, opts));
                }
                match radial_pair.as_ref().expect("set above") {
                    Ok((e, n)) => Ok(if id == ConditionId::RadialExistence { e.clone() } else { n.clone() }),
                    Err(err) => Err(err.clone()),
                }
            }
            _ => run_check(id, model, certs, opts),
        };
        match result {
            Ok(r) => run.reports.push(r),
            Err(e) if e.is_skip() => run.skipped.push(SkippedCheck {
                condition_id: id,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ids_round_trip() {
        for id in ConditionId::ALL {
            assert_eq!(id.as_str().parse::<ConditionId>().unwrap(), id);
            assert_eq!(serde_json::to_string(&id).unwrap(), format!("\"{}\"", id.as_str()));
        }
        assert!("el9".parse::<ConditionId>().is_err());
    }

    #[test]
    fn loglog_fit_reproduces_power() {
        let z: Vec<f64> = (0..10).map(|k| 2f64.powi(k)).collect();
        let v: Vec<f64> = z.iter().map(|z| 3.0 * z.powf(1.5)).collect();
        let f = LogLogFit::new(&z, &v).unwrap();
        for q in [0.1, 3.0, 700.0, 1e6] {
            assert!((f.eval(q) / (3.0 * q.powf(1.5)) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn mode_order() {
        assert!(Mode::Evidence < Mode::Certificate);
    }

    #[test]
    fn conclude_collects_witnesses() {
        let mut ev = Evidence::default();
        ev.inequalities.push(InequalityRecord {
            name: "q".into(),
            holds: false,
            worst_margin: -0.5,
            worst_at: Some(Witness { t: 0.0, x: vec![1.0], value: -0.5 }),
            probes: 1,
        });
        let r = ConditionReport::conclude(ConditionId::El3, Mode::Evidence, ev, vec![]);
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.has_witness());
    }
}
