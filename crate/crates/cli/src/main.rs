use std::path::{Path, PathBuf};
use std::process::ExitCode;

use arbcheck_cli::app::{self, AppError, Command, EulerSimulator, OutputPaths};
use arbcheck_cli::config::{load_config, ConfigError, ConfigErrorKind, RunConfig, Verbosity};
use arbcheck_cli::presets::{preset, PRESETS};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "arbcheck", version, about = "Martingale-measure existence checks for diffusion markets")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Global {
    /// Run configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Use a built-in preset instead of a config file.
    #[arg(long, global = true, value_name = "NAME", conflicts_with = "config")]
    preset: Option<String>,
    /// Preset parameter, e.g. `--param delta=2`. Repeatable.
    #[arg(long = "param", global = true, value_name = "KEY=VALUE", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Master seed for probes and simulation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for report.json and paths.csv.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Relative slack for pointwise inequalities.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Simulation worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Suppress the summary on standard output.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Validate the model, run the criteria and classify the market.
    Check,
    /// Estimate exit probabilities and the martingale defect.
    Simulate,
    /// Feller's explosion test for a one-dimensional diffusion.
    Feller(FellerArgs),
    /// Criteria and simulation merged into one verdict.
    Report,
    /// List or print the built-in presets.
    #[command(subcommand)]
    Preset(PresetCmd),
}

#[derive(Args)]
struct FellerArgs {
    /// Drift μ(x1); defaults to b of a one-dimensional config.
    #[arg(long)]
    mu: Option<String>,
    /// Squared diffusion σ²(x1); defaults to a of a one-dimensional config.
    #[arg(long)]
    sigma2: Option<String>,
    #[arg(long, default_value_t = f64::NEG_INFINITY, allow_hyphen_values = true)]
    left: f64,
    #[arg(long, default_value_t = f64::INFINITY, allow_hyphen_values = true)]
    right: f64,
    /// Reference point inside the interval.
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
}

#[derive(Subcommand)]
enum PresetCmd {
    List,
    Show { name: String },
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected KEY=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|e| format!("{k}: {e}"))?;
    Ok((k.trim().to_string(), v))
}

fn config_error(message: String) -> AppError {
    AppError::Config(ConfigError {
        path: "command line".into(),
        line: None,
        kind: ConfigErrorKind::Invalid,
        message,
    })
}

/// The run config and the directory its relative output paths refer to.
fn load(g: &Global) -> Result<(RunConfig, PathBuf), AppError> {
    let (mut cfg, base) = match (&g.config, &g.preset) {
        (Some(path), _) => {
            if !g.params.is_empty() {
                return Err(config_error("--param only applies to --preset".into()));
            }
            let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
            (load_config(path)?, base)
        }
        (None, Some(name)) => (preset(name, &g.params)?, PathBuf::new()),
        (None, None) => return Err(config_error("one of --config or --preset is required".into())),
    };
    if let Some(seed) = g.seed {
        cfg.set_seed(seed);
    }
    if let Some(tol) = g.tol {
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(config_error(format!("--tol must be positive, got {tol}")));
        }
        cfg.tol = tol;
    }
    if let Some(threads) = g.threads {
        if threads == 0 {
            return Err(config_error("--threads must be at least 1".into()));
        }
        if let Some(sim) = cfg.simulate.as_mut() {
            sim.threads = Some(threads);
        }
    }
    if g.quiet {
        cfg.output.verbosity = Verbosity::Quiet;
    }
    Ok((cfg, base))
}

fn run_command(g: &Global, command: Command) -> Result<u8, AppError> {
    let (cfg, base) = load(g)?;
    if let Some(dir) = &g.out {
        std::fs::create_dir_all(dir).map_err(|e| AppError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
    }
    let report = app::execute(command, &cfg, &EulerSimulator)?;
    let paths = OutputPaths::resolve(&cfg, g.out.as_deref(), &base);
    app::write_outputs(command, &cfg, &report, &paths)?;
    print!("{}", app::summary(&report, cfg.output.verbosity));
    if let Some(c) = &report.contradiction {
        eprintln!("error: {}", c.message);
    }
    Ok(report.exit_code())
}

fn run_feller(g: &Global, f: &FellerArgs) -> Result<u8, AppError> {
    let from_config = if g.config.is_some() || g.preset.is_some() {
        let (cfg, _) = load(g)?;
        if cfg.model.d != 1 {
            return Err(config_error(format!("feller needs a one-dimensional model (d={})", cfg.model.d)));
        }
        Some((cfg.model.b[0].to_string(), cfg.model.a[0][0].to_string()))
    } else {
        None
    };
    let pick = |flag: &Option<String>, cfg: Option<&String>, name: &str| {
        flag.clone()
            .or_else(|| cfg.cloned())
            .ok_or_else(|| config_error(format!("--{name} is required without a config")))
    };
    let mu = pick(&f.mu, from_config.as_ref().map(|c| &c.0), "mu")?;
    let sigma2 = pick(&f.sigma2, from_config.as_ref().map(|c| &c.1), "sigma2")?;
    let (l, r) = (f.left, f.right);
    let c = f.c.unwrap_or(if l < 0.0 && r > 0.0 {
        0.0
    } else if l.is_finite() && r.is_finite() {
        0.5 * (l + r)
    } else if l.is_finite() {
        l + 1.0
    } else {
        r - 1.0
    });
    let report = app::feller(&mu, &sigma2, (l, r), c)?;
    if let Some(dir) = &g.out {
        std::fs::create_dir_all(dir).map_err(|e| AppError::Io {
            path: dir.display().to_string(),
            message: e.to_string(),
        })?;
        let p = dir.join("feller.json");
        let mut text = serde_json::to_string_pretty(&report).expect("serializes");
        text.push('\n');
        std::fs::write(&p, text).map_err(|e| AppError::Io {
            path: p.display().to_string(),
            message: e.to_string(),
        })?;
    }
    if !g.quiet {
        let k = &report.classification;
        println!("feller: mu = {mu}, sigma^2 = {sigma2} on ({l}, {r}), c = {c}");
        println!("  left end:  {:?}", k.left.kind);
        println!("  right end: {:?}", k.right.kind);
        println!("  explosive: {}", k.explosive);
    }
    Ok(0)
}

fn run_preset(cmd: &PresetCmd, g: &Global) -> Result<u8, AppError> {
    match cmd {
        PresetCmd::List => {
            for p in PRESETS {
                let params: Vec<String> = p.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                println!("{:<14} {:<18} {}", p.name, params.join(" "), p.summary);
            }
        }
        PresetCmd::Show { name } => {
            print!("{}", preset(name, &g.params)?.to_toml());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 1 } else { 0 });
        }
    };
    let g = &cli.global;
    let result = match &cli.command {
        Cmd::Check => run_command(g, Command::Check),
        Cmd::Simulate => run_command(g, Command::Simulate),
        Cmd::Report => run_command(g, Command::Report),
        Cmd::Feller(f) => run_feller(g, f),
        Cmd::Preset(p) => run_preset(p, g),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
