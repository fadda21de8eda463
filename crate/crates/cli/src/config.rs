//! Run configuration: a TOML document with the sections `[model]`,
//! `[certificates]`, `[options]`, `[simulate]`, `[mu_model]` and `[output]`.
//! Unknown keys are rejected everywhere.

use std::fmt;
use std::path::Path;

use arbcheck_core::criteria::{CheckOptions, ConditionId};
use arbcheck_core::dsl::{print_expr, DslError, Expr, Scope};
use arbcheck_core::model::{AssetCertificate, CertificateBundle, MarketModel, Modulus};
use arbcheck_core::simulate::{DriftMode, SimConfig};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;
use toml::Spanned;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfigErrorKind {
    Io,
    Syntax,
    UnknownKey,
    Dimension,
    Bind,
    Invalid,
    UnknownPreset,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ConfigError {
    pub path: String,
    pub line: Option<usize>,
    pub kind: ConfigErrorKind,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.path, line, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckSelection {
    AllApplicable,
    List(Vec<ConditionId>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verbosity {
    Quiet,
    Normal,
    Verbose,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub report: Option<String>,
    pub csv: Option<String>,
    pub csv_paths: usize,
    pub csv_thin: usize,
    pub verbosity: Verbosity,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            report: None,
            csv: None,
            csv_paths: 16,
            csv_thin: 1,
            verbosity: Verbosity::Normal,
        }
    }
}

/// One-dimensional homogeneous model `dY = μ(Y) dt + σ(Y) dW` on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MuModel {
    pub mu: Expr,
    pub sigma: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: MarketModel,
    pub certificates: CertificateBundle,
    pub checks: CheckSelection,
    pub tol: f64,
    pub autonomous: bool,
    pub seed: u64,
    pub simulate: Option<SimConfig>,
    pub mu_model: Option<MuModel>,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn new(model: MarketModel) -> Self {
        RunConfig {
            model,
            certificates: CertificateBundle::default(),
            checks: CheckSelection::AllApplicable,
            tol: CheckOptions::default().tol,
            autonomous: false,
            seed: 0,
            simulate: None,
            mu_model: None,
            output: OutputConfig::default(),
        }
    }

    pub fn check_options(&self) -> CheckOptions {
        let mut opts = CheckOptions {
            tol: self.tol,
            autonomous: self.autonomous,
            ..CheckOptions::default()
        };
        opts.envelope.seed = self.seed;
        opts
    }

    /// Applies a `--seed` override to both the checks and the simulation.
    pub fn set_seed(&mut self, seed: u64) {
        self.seed = seed;
        if let Some(sim) = self.simulate.as_mut() {
            sim.master_seed = seed;
        }
    }

    /// Canonical TOML text. Loading it gives back an equal config.
    pub fn to_toml(&self) -> String {
        toml::to_string(&ConfigFile::from_config(self)).expect("config serializes")
    }

    /// SHA-256 of the canonical text without the thread count, hex encoded.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        if let Some(sim) = c.simulate.as_mut() {
            sim.threads = None;
        }
        let hash = Sha256::digest(c.to_toml().as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let name = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: name.clone(),
        line: None,
        kind: ConfigErrorKind::Io,
        message: e.to_string(),
    })?;
    let cfg = parse_config(&text, &name)?;
    let base = path.parent().unwrap_or(Path::new("."));
    for target in [&cfg.output.report, &cfg.output.csv].into_iter().flatten() {
        let parent = base.join(target);
        let parent = parent.parent().unwrap_or(base);
        if !parent.as_os_str().is_empty() && !parent.is_dir() {
            return Err(ConfigError {
                path: name,
                line: None,
                kind: ConfigErrorKind::Invalid,
                message: format!("output directory {} does not exist", parent.display()),
            });
        }
    }
    Ok(cfg)
}

/// Parses config text; `name` labels error messages.
pub fn parse_config(text: &str, name: &str) -> Result<RunConfig, ConfigError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| {
        let message = e.message().to_string();
        let kind = if message.contains("unknown field") {
            ConfigErrorKind::UnknownKey
        } else {
            ConfigErrorKind::Syntax
        };
        ConfigError {
            path: name.to_string(),
            line: e.span().map(|s| line_of(text, s.start)),
            kind,
            message,
        }
    })?;
    Binder { text, name }.bind(file)
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    checks: Option<Spanned<Checks>>,
    model: Spanned<ModelSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    certificates: Option<CertSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    options: Option<OptionsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    simulate: Option<Spanned<SimSection>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    mu_model: Option<MuSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    output: Option<OutputSection>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum Checks {
    Keyword(String),
    List(Vec<String>),
}

type Src = Spanned<String>;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelSection {
    d: usize,
    m: usize,
    #[serde(rename = "T")]
    horizon: f64,
    x0: Vec<f64>,
    #[serde(rename = "S0")]
    s0: Vec<f64>,
    b: Spanned<Vec<Src>>,
    a: Spanned<Vec<Vec<Src>>>,
    #[serde(default)]
    mu: Vec<Src>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zeta: Option<Src>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    big_a: Option<Src>,
    #[serde(default, rename = "B", skip_serializing_if = "Option::is_none")]
    big_b: Option<Src>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    xi: Option<Src>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<Src>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    z0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    a_hat: Option<Src>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho_n: Option<Src>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa_n: Option<Src>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    h_n: Option<Src>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    assume_locally_bounded: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    assets: Vec<Spanned<AssetSection>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AssetSection {
    index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    zeta: Option<Src>,
    #[serde(default, rename = "A", skip_serializing_if = "Option::is_none")]
    big_a: Option<Src>,
    #[serde(default, rename = "B", skip_serializing_if = "Option::is_none")]
    big_b: Option<Src>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OptionsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    tol: Option<f64>,
    #[serde(default)]
    autonomous: bool,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SimSection {
    #[serde(default = "euler")]
    scheme: String,
    steps_per_unit_time: usize,
    paths: usize,
    radii: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    master_seed: Option<u64>,
    drift_mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    asset: Option<usize>,
    #[serde(default)]
    bridge_correction: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    threads: Option<usize>,
}

fn euler() -> String {
    "euler_maruyama".into()
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MuSection {
    mu: Src,
    sigma: Src,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    report: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    csv: Option<String>,
    #[serde(default = "default_csv_paths")]
    csv_paths: usize,
    #[serde(default = "default_csv_thin")]
    csv_thin: usize,
    #[serde(default = "default_verbosity")]
    verbosity: Verbosity,
}

fn default_csv_paths() -> usize {
    OutputConfig::default().csv_paths
}

fn default_csv_thin() -> usize {
    OutputConfig::default().csv_thin
}

fn default_verbosity() -> Verbosity {
    Verbosity::Normal
}

fn src(e: &Expr) -> Src {
    Spanned::new(0..0, print_expr(e))
}

fn modulus_src(m: &Modulus) -> Src {
    Spanned::new(
        0..0,
        match m {
            Modulus::Linear => "linear".into(),
            Modulus::Sqrt => "sqrt".into(),
            Modulus::Custom(e) => print_expr(e),
        },
    )
}

impl ConfigFile {
    fn from_config(c: &RunConfig) -> ConfigFile {
        let m = &c.model;
        let model = ModelSection {
            d: m.d,
            m: m.m,
            horizon: m.horizon,
            x0: m.x0.clone(),
            s0: m.s0.clone(),
            b: Spanned::new(0..0, m.b.iter().map(src).collect()),
            a: Spanned::new(0..0, m.a.iter().map(|row| row.iter().map(src).collect()).collect()),
            mu: m.mu.iter().map(src).collect(),
        };
        let k = &c.certificates;
        let certificates = CertSection {
            r: k.r,
            zeta: k.zeta.as_ref().map(src),
            big_a: k.big_a.as_ref().map(src),
            big_b: k.big_b.as_ref().map(src),
            xi: k.xi.as_ref().map(src),
            alpha: k.alpha.as_ref().map(src),
            z0: k.z0,
            a_hat: k.a_hat.as_ref().map(src),
            rho_n: k.rho_n.as_ref().map(modulus_src),
            kappa_n: k.kappa_n.as_ref().map(modulus_src),
            h_n: k.h_n.as_ref().map(modulus_src),
            assume_locally_bounded: k.assume_locally_bounded,
            assets: k
                .per_asset
                .iter()
                .map(|a| {
                    Spanned::new(
                        0..0,
                        AssetSection {
                            index: a.index,
                            r: a.r,
                            zeta: a.zeta.as_ref().map(src),
                            big_a: a.big_a.as_ref().map(src),
                            big_b: a.big_b.as_ref().map(src),
                        },
                    )
                })
                .collect(),
        };
        let checks = match &c.checks {
            CheckSelection::AllApplicable => Checks::Keyword("all-applicable".into()),
            CheckSelection::List(ids) => Checks::List(ids.iter().map(|i| i.as_str().to_string()).collect()),
        };
        let simulate = c.simulate.as_ref().map(|s| {
            let (drift_mode, asset) = match s.drift_mode {
                DriftMode::P => ("p", None),
                DriftMode::Q => ("q", None),
                DriftMode::QShift(i) => ("q_shift", Some(i)),
            };
            Spanned::new(
                0..0,
                SimSection {
                    scheme: euler(),
                    steps_per_unit_time: s.steps_per_unit_time,
                    paths: s.paths,
                    radii: s.radii.clone(),
                    master_seed: Some(s.master_seed),
                    drift_mode: drift_mode.into(),
                    asset,
                    bridge_correction: s.bridge_correction,
                    threads: s.threads,
                },
            )
        });
        let o = &c.output;
        ConfigFile {
            checks: Some(Spanned::new(0..0, checks)),
            model: Spanned::new(0..0, model),
            certificates: Some(certificates),
            options: Some(OptionsSection {
                tol: Some(c.tol),
                autonomous: c.autonomous,
                seed: c.seed,
            }),
            simulate,
            mu_model: c.mu_model.as_ref().map(|mm| MuSection {
                mu: src(&mm.mu),
                sigma: src(&mm.sigma),
            }),
            output: Some(OutputSection {
                report: o.report.clone(),
                csv: o.csv.clone(),
                csv_paths: o.csv_paths,
                csv_thin: o.csv_thin,
                verbosity: o.verbosity,
            }),
        }
    }
}

struct Binder<'a> {
    text: &'a str,
    name: &'a str,
}

impl Binder<'_> {
    fn err(&self, span: Option<std::ops::Range<usize>>, kind: ConfigErrorKind, message: impl Into<String>) -> ConfigError {
        ConfigError {
            path: self.name.to_string(),
            line: span.filter(|s| s.end > 0).map(|s| line_of(self.text, s.start)),
            kind,
            message: message.into(),
        }
    }

    fn expr(&self, what: &str, s: &Src, scope: Scope) -> Result<Expr, ConfigError> {
        Expr::parse_in(s.get_ref(), scope).map_err(|e: DslError| {
            self.err(Some(s.span()), ConfigErrorKind::Bind, format!("{what}: {e}"))
        })
    }

    fn opt_expr(&self, what: &str, s: &Option<Src>, scope: Scope) -> Result<Option<Expr>, ConfigError> {
        s.as_ref().map(|s| self.expr(what, s, scope)).transpose()
    }

    fn modulus(&self, what: &str, s: &Option<Src>) -> Result<Option<Modulus>, ConfigError> {
        s.as_ref()
            .map(|s| match s.get_ref().trim() {
                "linear" => Ok(Modulus::Linear),
                "sqrt" => Ok(Modulus::Sqrt),
                _ => self.expr(what, s, Scope::Radial).map(Modulus::Custom),
            })
            .transpose()
    }

    fn bind(&self, file: ConfigFile) -> Result<RunConfig, ConfigError> {
        let model_span = file.model.span();
        let ms = file.model.into_inner();
        let d = ms.d;
        let dim = |span, msg: String| self.err(Some(span), ConfigErrorKind::Dimension, msg);
        if ms.x0.len() != d {
            return Err(dim(model_span, format!("x0 has {} entries, expected d={d}", ms.x0.len())));
        }
        if ms.b.get_ref().len() != d {
            return Err(dim(ms.b.span(), format!("b has {} entries, expected d={d}", ms.b.get_ref().len())));
        }
        let a_rows = ms.a.get_ref();
        if a_rows.len() != d || a_rows.iter().any(|r| r.len() != d) {
            let shape: Vec<usize> = a_rows.iter().map(Vec::len).collect();
            return Err(dim(ms.a.span(), format!("a must be a {d}x{d} grid (row lengths {shape:?})")));
        }
        if ms.m == 0 || ms.m > d {
            return Err(dim(model_span, format!("m={} must satisfy 1 <= m <= d={d}", ms.m)));
        }
        if ms.s0.len() != ms.m {
            return Err(dim(model_span, format!("S0 has {} entries, expected m={}", ms.s0.len(), ms.m)));
        }
        if ms.mu.len() != d - ms.m {
            return Err(dim(model_span, format!("mu has {} entries, expected d-m={}", ms.mu.len(), d - ms.m)));
        }
        let state = Scope::State { dim: d };
        let b = ms
            .b
            .get_ref()
            .iter()
            .enumerate()
            .map(|(i, s)| self.expr(&format!("b[{}]", i + 1), s, state))
            .collect::<Result<_, _>>()?;
        let a = a_rows
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, s)| self.expr(&format!("a[{}][{}]", i + 1, j + 1), s, state))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<_, _>>()?;
        let mu = ms
            .mu
            .iter()
            .enumerate()
            .map(|(i, s)| self.expr(&format!("mu[{}]", i + 1), s, state))
            .collect::<Result<_, _>>()?;
        let model = MarketModel::new(d, ms.m, ms.horizon, ms.x0, ms.s0, b, a, mu)
            .map_err(|e| self.err(Some(model_span.clone()), ConfigErrorKind::Invalid, e.to_string()))?;

        let mut certificates = CertificateBundle::default();
        if let Some(c) = &file.certificates {
            certificates = CertificateBundle {
                r: c.r,
                zeta: self.opt_expr("zeta", &c.zeta, Scope::Time)?,
                big_a: self.opt_expr("A", &c.big_a, Scope::Radial)?,
                big_b: self.opt_expr("B", &c.big_b, Scope::Radial)?,
                per_asset: vec![],
                xi: self.opt_expr("xi", &c.xi, Scope::Radial)?,
                alpha: self.opt_expr("alpha", &c.alpha, Scope::Radial)?,
                z0: c.z0,
                a_hat: self.opt_expr("a_hat", &c.a_hat, state)?,
                rho_n: self.modulus("rho_n", &c.rho_n)?,
                kappa_n: self.modulus("kappa_n", &c.kappa_n)?,
                h_n: self.modulus("h_n", &c.h_n)?,
                assume_locally_bounded: c.assume_locally_bounded,
            };
            for a in &c.assets {
                let span = a.span();
                let a = a.get_ref();
                if a.index == 0 || a.index > model.m {
                    return Err(dim(span, format!("asset certificate index {} outside 1..={}", a.index, model.m)));
                }
                if certificates.asset(a.index).is_some() {
                    return Err(self.err(Some(span), ConfigErrorKind::Invalid, format!("duplicate asset certificate {}", a.index)));
                }
                certificates.per_asset.push(AssetCertificate {
                    index: a.index,
                    r: a.r,
                    zeta: self.opt_expr("zeta", &a.zeta, Scope::Time)?,
                    big_a: self.opt_expr("A", &a.big_a, Scope::Radial)?,
                    big_b: self.opt_expr("B", &a.big_b, Scope::Radial)?,
                });
            }
        }

        let checks = match file.checks {
            None => CheckSelection::AllApplicable,
            Some(spanned) => {
                let span = spanned.span();
                match spanned.into_inner() {
                    Checks::Keyword(k) if k == "all-applicable" => CheckSelection::AllApplicable,
                    Checks::Keyword(k) => {
                        return Err(self.err(Some(span), ConfigErrorKind::Invalid, format!("checks must be \"all-applicable\" or a list, got \"{k}\"")))
                    }
                    Checks::List(ids) => CheckSelection::List(
                        ids.iter()
                            .map(|s| s.parse::<ConditionId>().map_err(|e| self.err(Some(span.clone()), ConfigErrorKind::Invalid, e.to_string())))
                            .collect::<Result<_, _>>()?,
                    ),
                }
            }
        };

        let opts = file.options.unwrap_or_default();
        let tol = opts.tol.unwrap_or(CheckOptions::default().tol);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(self.err(None, ConfigErrorKind::Invalid, format!("options.tol must be positive, got {tol}")));
        }

        let simulate = file
            .simulate
            .map(|s| {
                let span = s.span();
                let s = s.into_inner();
                let invalid = |msg: String| self.err(Some(span.clone()), ConfigErrorKind::Invalid, msg);
                if s.scheme != "euler_maruyama" {
                    return Err(invalid(format!("unsupported scheme \"{}\" (only euler_maruyama)", s.scheme)));
                }
                let drift_mode = match (s.drift_mode.as_str(), s.asset) {
                    ("p", None) => DriftMode::P,
                    ("q", None) => DriftMode::Q,
                    ("q_shift", Some(i)) => DriftMode::QShift(i),
                    ("q_shift", None) => return Err(invalid("drift_mode q_shift needs `asset`".into())),
                    ("p" | "q", Some(_)) => return Err(invalid("`asset` is only used with drift_mode q_shift".into())),
                    (other, _) => return Err(invalid(format!("unknown drift_mode \"{other}\" (p, q, q_shift)"))),
                };
                let cfg = SimConfig {
                    steps_per_unit_time: s.steps_per_unit_time,
                    paths: s.paths,
                    radii: s.radii,
                    master_seed: s.master_seed.unwrap_or(opts.seed),
                    drift_mode,
                    bridge_correction: s.bridge_correction,
                    threads: s.threads,
                };
                cfg.validate(&model).map_err(|e| invalid(e.to_string()))?;
                Ok(cfg)
            })
            .transpose()?;

        let mu_model = file
            .mu_model
            .map(|mm| {
                let one = Scope::State { dim: 1 };
                Ok::<_, ConfigError>(MuModel {
                    mu: self.expr("mu_model.mu", &mm.mu, one)?,
                    sigma: self.expr("mu_model.sigma", &mm.sigma, one)?,
                })
            })
            .transpose()?;

        let output = file
            .output
            .map(|o| OutputConfig {
                report: o.report,
                csv: o.csv,
                csv_paths: o.csv_paths,
                csv_thin: o.csv_thin.max(1),
                verbosity: o.verbosity,
            })
            .unwrap_or_default();
        if output.csv.is_some() && simulate.is_none() {
            return Err(self.err(None, ConfigErrorKind::Invalid, "output.csv needs a [simulate] section"));
        }
        if let Some(sim) = &simulate {
            if output.csv.is_some() && output.csv_paths > sim.paths {
                return Err(self.err(None, ConfigErrorKind::Invalid, format!("output.csv_paths {} exceeds simulate.paths {}", output.csv_paths, sim.paths)));
            }
        }

        Ok(RunConfig {
            model,
            certificates,
            checks,
            tol,
            autonomous: opts.autonomous,
            seed: opts.seed,
            simulate,
            mu_model,
            output,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const RADIAL: &str = r#"
[model]
d = 3
m = 3
T = 1.0
x0 = [1.0, 0.0, 0.0]
S0 = [1.0, 1.0, 1.0]
b = ["0", "0", "0"]
a = [["(max(norm,1))^3", "0", "0"], ["0", "(max(norm,1))^3", "0"], ["0", "0", "(max(norm,1))^3"]]

[certificates]
alpha = "rho^3"
"#;

    #[test]
    fn parses_a_radial_model() {
        let cfg = parse_config(RADIAL, "radial.toml").unwrap();
        assert_eq!(cfg.model.d, 3);
        assert_eq!(cfg.certificates.alpha, Some(Expr::parse_in("rho^3", Scope::Radial).unwrap()));
        assert_eq!(cfg.checks, CheckSelection::AllApplicable);
        assert!(cfg.simulate.is_none());
    }

    #[test]
    fn rejects_bad_grids_and_keys() {
        let bad = RADIAL.replace(
            r#"a = [["(max(norm,1))^3", "0", "0"], ["0", "(max(norm,1))^3", "0"], ["0", "0", "(max(norm,1))^3"]]"#,
            r#"a = [["1", "0", "0"], ["0", "1", "0"]]"#,
        );
        let e = parse_config(&bad, "x.toml").unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::Dimension);
        assert_eq!(e.line, Some(9));

        let e = parse_config(&RADIAL.replace("T = 1.0", "T = 1.0\ndriift = 2"), "x.toml").unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::UnknownKey);
        assert!(e.message.contains("driift"));
        assert_eq!(e.line, Some(6));

        let e = parse_config(&RADIAL.replace("rho^3", "x1^3"), "x.toml").unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::Bind);
        assert_eq!(e.line, Some(12));
        assert!(e.to_string().starts_with("x.toml:12: alpha"));
    }

    #[test]
    fn simulate_section() {
        let text = format!("{RADIAL}\n[simulate]\nsteps_per_unit_time = 64\npaths = 100\nradii = [4, 16]\ndrift_mode = \"q_shift\"\nasset = 2\n");
        let cfg = parse_config(&text, "x.toml").unwrap();
        let sim = cfg.simulate.unwrap();
        assert_eq!(sim.drift_mode, DriftMode::QShift(2));
        assert_eq!(sim.radii, vec![4.0, 16.0]);
        let e = parse_config(&text.replace("asset = 2", "asset = 4"), "x.toml").unwrap_err();
        assert_eq!(e.kind, ConfigErrorKind::Invalid);
        let e = parse_config(&text.replace("asset = 2\n", ""), "x.toml").unwrap_err();
        assert!(e.message.contains("asset"));
    }

    #[test]
    fn canonical_round_trip() {
        let text = format!(
            "checks = [\"slmd\", \"el3\"]\n{RADIAL}h_n = \"sqrt\"\nrho_n = \"z^0.5\"\n\n[[certificates.assets]]\nindex = 2\nA = \"2*z\"\n\n[simulate]\nsteps_per_unit_time = 64\npaths = 100\nradii = [4, 16]\ndrift_mode = \"q\"\n\n[output]\nreport = \"r.json\"\nverbosity = \"quiet\"\n"
        );
        let cfg = parse_config(&text, "x.toml").unwrap();
        let canon = cfg.to_toml();
        let again = parse_config(&canon, "canonical").unwrap();
        assert_eq!(cfg, again);
        assert_eq!(canon, again.to_toml());
        assert_eq!(cfg.digest().len(), 64);
    }
}
