//! Built-in example markets. The files under `presets/` are these configs at
//! their default parameters.

use arbcheck_core::dsl::{Expr, Scope};
use arbcheck_core::model::MarketModel;
use arbcheck_core::simulate::{DriftMode, SimConfig};

use crate::config::{ConfigError, ConfigErrorKind, RunConfig};

pub struct PresetInfo {
    pub name: &'static str,
    pub summary: &'static str,
    /// Parameter names with their defaults.
    pub params: &'static [(&'static str, f64)],
}

pub const PRESETS: &[PresetInfo] = &[
    PresetInfo {
        name: "girsanov",
        summary: "d=1, b=0, a = min(|x|^0.5, 1): degenerate at the origin, bounded",
        params: &[],
    },
    PresetInfo {
        name: "novikov-fail",
        summary: "d=2, b = (c*x2, 0), a = Id: Novikov fails for the linear drift, criteria still give an EMM",
        params: &[("c", 5.0)],
    },
    PresetInfo {
        name: "radial-d",
        summary: "a = (max(|x|,1))^(2+eps) Id in dimension d; alpha = rho^(2+eps), A = 2z alpha(sqrt(2z)), B = d/(2z)",
        params: &[("d", 3.0), ("eps", 1.0)],
    },
    PresetInfo {
        name: "power-1d",
        summary: "d=1, a = (max(|x|,1))^delta: EMM iff delta <= 1, bubble otherwise",
        params: &[("delta", 1.5)],
    },
    PresetInfo {
        name: "bessel-cubed",
        summary: "law of the cubed Brownian motion: b = 3 x^(1/3), a = 9|x|^(4/3); no market price of risk at 0",
        params: &[],
    },
];

pub fn preset_info(name: &str) -> Option<&'static PresetInfo> {
    PRESETS.iter().find(|p| p.name == name)
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn unknown(name: &str, message: String) -> ConfigError {
    ConfigError {
        path: format!("preset:{name}"),
        line: None,
        kind: ConfigErrorKind::UnknownPreset,
        message,
    }
}

fn invalid(name: &str, message: String) -> ConfigError {
    ConfigError {
        path: format!("preset:{name}"),
        line: None,
        kind: ConfigErrorKind::Invalid,
        message,
    }
}

fn sim(drift_mode: DriftMode) -> SimConfig {
    SimConfig {
        steps_per_unit_time: 256,
        paths: 20_000,
        radii: vec![4.0, 16.0, 64.0, 256.0],
        master_seed: 0,
        drift_mode,
        bridge_correction: false,
        threads: None,
    }
}

fn diagonal(d: usize, f: &str) -> Vec<Vec<String>> {
    (0..d).map(|i| (0..d).map(|j| if i == j { f.to_string() } else { "0".into() }).collect()).collect()
}

fn model(name: &str, x0: Vec<f64>, b: &[String], a: &[Vec<String>]) -> Result<MarketModel, ConfigError> {
    let d = x0.len();
    let b: Vec<&str> = b.iter().map(String::as_str).collect();
    let rows: Vec<Vec<&str>> = a.iter().map(|r| r.iter().map(String::as_str).collect()).collect();
    let rows: Vec<&[&str]> = rows.iter().map(Vec::as_slice).collect();
    MarketModel::from_sources(d, 1.0, x0, vec![1.0; d], &b, &rows, &[]).map_err(|e| invalid(name, e.to_string()))
}

/// Builds a preset; `params` override the defaults listed in [`PRESETS`].
pub fn preset(name: &str, params: &[(String, f64)]) -> Result<RunConfig, ConfigError> {
    let info = preset_info(name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        unknown(name, format!("unknown preset `{name}` (known: {})", names.join(", ")))
    })?;
    for (k, _) in params {
        if !info.params.iter().any(|(p, _)| p == k) {
            return Err(invalid(name, format!("unknown parameter `{k}` for preset {name}")));
        }
    }
    let get = |key: &str| {
        params
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map(|(_, v)| *v)
            .or_else(|| info.params.iter().find(|(k, _)| *k == key).map(|(_, v)| *v))
            .expect("declared parameter")
    };
    let cfg = match name {
        "girsanov" => {
            let m = model(name, vec![0.0], &["0".into()], &[vec!["min(abs(x1)^0.5, 1)".into()]])?;
            let mut cfg = RunConfig::new(m);
            cfg.certificates.assume_locally_bounded = true;
            cfg.simulate = Some(sim(DriftMode::Q));
            cfg
        }
        "novikov-fail" => {
            let c = get("c");
            if !c.is_finite() {
                return Err(invalid(name, "c must be finite".into()));
            }
            let b = [format!("{} * x2", num(c)), "0".into()];
            let m = model(name, vec![1.0, 1.0], &b, &diagonal(2, "1"))?;
            let mut cfg = RunConfig::new(m);
            cfg.certificates.assume_locally_bounded = true;
            cfg.simulate = Some(sim(DriftMode::Q));
            cfg
        }
        "radial-d" => {
            let d = get("d");
            let eps = get("eps");
            if !(d >= 1.0 && d <= 16.0 && d.fract() == 0.0) {
                return Err(invalid(name, format!("d must be an integer in 1..=16, got {d}")));
            }
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(invalid(name, format!("eps must be positive, got {eps}")));
            }
            let d = d as usize;
            let p = num(2.0 + eps);
            let mut x0 = vec![0.0; d];
            x0[0] = 1.0;
            let m = model(name, x0, &vec!["0".to_string(); d], &diagonal(d, &format!("(max(norm, 1))^{p}")))?;
            let mut cfg = RunConfig::new(m);
            cfg.certificates.assume_locally_bounded = true;
            let radial = |s: String| Some(Expr::parse_in(&s, Scope::Radial).expect("valid certificate"));
            cfg.certificates.alpha = radial(format!("rho^{p}"));
            cfg.certificates.big_a = radial(format!("2 * z * (sqrt(2 * z))^{p}"));
            cfg.certificates.big_b = radial(format!("{d} / (2 * z)"));
            cfg.simulate = Some(sim(DriftMode::Q));
            cfg
        }
        "power-1d" => {
            let delta = get("delta");
            if !(delta >= 0.0 && delta.is_finite()) {
                return Err(invalid(name, format!("delta must be non-negative, got {delta}")));
            }
            let m = model(name, vec![1.0], &["0".into()], &[vec![format!("(max(abs(x1), 1))^{}", num(delta))]])?;
            let mut cfg = RunConfig::new(m);
            cfg.certificates.assume_locally_bounded = true;
            cfg.simulate = Some(sim(DriftMode::QShift(1)));
            cfg
        }
        "bessel-cubed" => {
            let m = model(
                name,
                vec![0.0],
                &["3 * (max(x1, 0)^(1/3) - max(-x1, 0)^(1/3))".into()],
                &[vec!["9 * abs(x1)^(4/3)".into()]],
            )?;
            RunConfig::new(m)
        }
        _ => unreachable!("listed in PRESETS"),
    };
    Ok(cfg)
}
