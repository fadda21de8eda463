use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use arbcheck_cli::app::{execute, Command as Run, Simulator};
use arbcheck_cli::config::{load_config, parse_config, ConfigErrorKind};
use arbcheck_cli::presets::{preset, PRESETS};
use arbcheck_core::model::MarketModel;
use arbcheck_core::simulate::{wilson, RadiusEstimate, SimConfig, SimError, SimEstimate, Z95};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_arbcheck"))
}

fn presets_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../presets")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

const BROWNIAN: &str = r#"
[model]
d = 1
m = 1
T = 1.0
x0 = [0.0]
S0 = [1.0]
b = ["0"]
a = [["1"]]
"#;

#[test]
fn shipped_preset_files_match_the_builtins() {
    for p in PRESETS {
        let path = presets_dir().join(format!("{}.toml", p.name));
        let shipped = load_config(&path).unwrap_or_else(|e| panic!("{e}"));
        assert_eq!(shipped, preset(p.name, &[]).unwrap(), "{}", p.name);
    }
}

#[test]
fn preset_subcommands() {
    let o = run(&["preset", "list"]);
    assert_eq!(code(&o), 0);
    let listing = String::from_utf8(o.stdout).unwrap();
    for p in PRESETS {
        assert!(listing.contains(p.name));
    }
    let o = run(&["preset", "show", "power-1d", "--param", "delta=0.5"]);
    assert_eq!(code(&o), 0);
    let cfg = parse_config(&String::from_utf8(o.stdout).unwrap(), "stdout").unwrap();
    assert_eq!(cfg, preset("power-1d", &[("delta".into(), 0.5)]).unwrap());
    assert_eq!(code(&run(&["preset", "show", "unknown"])), 1);
}

#[test]
fn config_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let typo = write(dir.path(), "typo.toml", &BROWNIAN.replace("T = 1.0", "T = 1.0\ndriift = 1"));
    let o = run(&["check", "--config", typo.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("driift") && err.contains("typo.toml:6"), "{err}");

    let grid = write(dir.path(), "grid.toml", &BROWNIAN.replace("d = 1\nm = 1", "d = 2\nm = 1").replace(
        "x0 = [0.0]\nS0 = [1.0]\nb = [\"0\"]\na = [[\"1\"]]",
        "x0 = [0.0, 0.0]\nS0 = [1.0]\nb = [\"0\", \"0\"]\na = [[\"1\", \"0\", \"0\"], [\"0\", \"1\", \"0\"]]\nmu = [\"0\"]",
    ));
    assert_eq!(load_config(&grid).unwrap_err().kind, ConfigErrorKind::Dimension);
    assert_eq!(code(&run(&["check", "--config", grid.to_str().unwrap()])), 1);

    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&run(&["check", "--config", missing.to_str().unwrap()])), 1);
    assert_eq!(code(&run(&["check"])), 1);
    assert_eq!(code(&run(&["check", "--bogus-flag"])), 1);
}

#[test]
fn numeric_failures_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let neg = write(dir.path(), "neg.toml", &BROWNIAN.replace("a = [[\"1\"]]", "a = [[\"-1\"]]"));
    let o = run(&["check", "--config", neg.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8(o.stderr).unwrap().contains("positive semi-definite"));

    let blowup = format!(
        "{}\n[simulate]\nsteps_per_unit_time = 16\npaths = 100\nradii = [4]\ndrift_mode = \"p\"\n",
        BROWNIAN.replace("b = [\"0\"]", "b = [\"log(x1)\"]")
    );
    let p = write(dir.path(), "blowup.toml", &blowup);
    assert_eq!(code(&run(&["simulate", "--config", p.to_str().unwrap()])), 2);
}

/// Returns a fixed plateau whatever the model.
struct PlateauDouble;

impl Simulator for PlateauDouble {
    fn exit_estimate(&self, _: &MarketModel, cfg: &SimConfig) -> Result<SimEstimate, SimError> {
        let n = cfg.paths as u64;
        let per_radius = cfg
            .radii
            .iter()
            .map(|&radius| {
                let k = n * 2 / 5;
                RadiusEstimate {
                    radius,
                    exit_count: k,
                    paths: n,
                    p_hat: k as f64 / n as f64,
                    ci: wilson(k, n, Z95),
                    survival: 1.0 - k as f64 / n as f64,
                }
            })
            .collect();
        Ok(SimEstimate {
            drift_mode: cfg.drift_mode,
            steps: 1,
            step_size: 1.0,
            valid_paths: n,
            invalid_paths: 0,
            per_radius,
            warnings: vec![],
        })
    }
}

#[test]
fn simulation_contradicting_a_certificate_gives_exit_3() {
    let cfg = preset("power-1d", &[("delta".into(), 0.5)]).unwrap();
    let report = execute(Run::Report, &cfg, &PlateauDouble).unwrap();
    assert_eq!(report.exit_code(), 3);
    let c = report.contradiction.as_ref().unwrap();
    assert!(!c.exists_rules.is_empty() && !c.not_exists_rules.is_empty());
    assert!(report.verdict.is_none());
    let check = execute(Run::Check, &cfg, &PlateauDouble).unwrap();
    assert_eq!(check.exit_code(), 0);
}

#[test]
fn bubble_preset_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["report", "--preset", "power-1d", "--param", "delta=1.5", "--out", out.to_str().unwrap(), "--quiet"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let r = read_json(&out.join("report.json"));
    assert_eq!(r["tool"], "arbcheck");
    assert_eq!(r["config_digest"].as_str().unwrap().len(), 64);
    assert_eq!(r["master_seed"], 0);
    let v = &r["verdict"];
    assert_eq!(v["elmm"], "exists");
    assert_eq!(v["emm"], "not_exists");
    assert_eq!(v["bubble"], "yes");
    let csv = std::fs::read_to_string(out.join("paths.csv")).unwrap();
    assert!(csv.starts_with("path_id,t,x1,S1\n"));
}

#[test]
fn feller_subcommand() {
    let o = run(&["feller", "--mu", "(max(abs(x1),1))^1.5", "--sigma2", "(max(abs(x1),1))^1.5"]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8(o.stdout).unwrap().contains("explosive: true"));
    let o = run(&["feller", "--mu", "0", "--sigma2", "1"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("explosive: false"));
    assert_eq!(code(&run(&["feller", "--mu", "y"])), 1);
}

#[test]
fn outputs_are_identical_across_thread_counts_and_runs() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(presets_dir().join("power-1d.toml"))
        .unwrap()
        .replace("paths = 20000", "paths = 3000")
        .replace("(max(abs(x1), 1))^1.5", "(max(abs(x1), 1))^2");
    let cfg = write(dir.path(), "cfg.toml", &text);
    let mut outputs = Vec::new();
    for threads in ["1", "4", "8", "4"] {
        let out = dir.path().join(format!("out{}", outputs.len()));
        let o = run(&[
            "report", "--config", cfg.to_str().unwrap(), "--threads", threads, "--seed", "7", "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push((std::fs::read(out.join("report.json")).unwrap(), std::fs::read(out.join("paths.csv")).unwrap()));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
    let r: Value = serde_json::from_slice(&outputs[0].0).unwrap();
    assert_eq!(r["master_seed"], 7);
    let csv = String::from_utf8(outputs[0].1.clone()).unwrap();
    assert!(!csv.contains('\r'));
    assert!(csv.lines().filter(|l| l.starts_with("0,")).count() > 1);
}

#[test]
fn simulate_without_section_is_a_config_error() {
    assert_eq!(code(&run(&["simulate", "--preset", "bessel-cubed"])), 1);
}
