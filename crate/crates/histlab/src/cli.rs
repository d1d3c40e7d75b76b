//! Command line entry: resolve layered settings, pick a scenario by name,
//! run it, and map every failure to a stable exit code. 0 is a clean run,
//! 1 a failed check inside a scenario, 2 a settings problem, 3 a numeric
//! or io failure.

mod config;
mod scenarios;

pub use config::{parse_file, parse_set, Assignment, ConfigError, ResolvedConfig};
pub use scenarios::{find, registry, RunError, Scenario};

use std::fs;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::Parser;

#[derive(Parser, Debug)]
#[command(
    name = "histlab",
    version,
    about = "semi-classical packet histories in a hard-wall well",
    after_help = listing()
)]
struct Cli {
    /// scenario to run; see the list below
    scenario: Option<String>,
    /// settings file, one `key = value` per line
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// where the scenario writes its table
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// override one setting, repeatable
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn listing() -> String {
    let mut s = String::from("Scenarios:\n");
    for sc in registry() {
        s.push_str(&format!("  {:<17} {}\n", sc.name(), sc.about()));
        if !sc.default_overrides().is_empty() {
            let ov: Vec<String> = sc
                .default_overrides()
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            s.push_str(&format!("  {:<17} (defaults: {})\n", "", ov.join(", ")));
        }
    }
    s.push_str(
        "\nSettings: a, q, x0_frac, lambda_frac, n_grid, dt_frac, tau_frac, n_modes,\n\
         threshold, delta, clip_mode (clip|freeze), out, scenario\n",
    );
    s
}

enum Failure {
    Config(String),
    Run(RunError),
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Failure {
        Failure::Config(e.to_string())
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Failure {
        Failure::Run(e)
    }
}

fn names() -> Vec<&'static str> {
    registry().iter().map(|s| s.name()).collect()
}

fn drive(cli: Cli) -> Result<i32, Failure> {
    let mut assignments: Vec<Assignment> = Vec::new();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)
            .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
        assignments.extend(parse_file(&text)?);
    }
    for kv in &cli.set {
        assignments.push(parse_set(kv)?);
    }
    // the positional name wins over any `scenario =` assignment
    let name = cli.scenario.clone().or_else(|| {
        assignments.iter().rev().find(|a| a.key == "scenario").map(|a| a.value.clone())
    });
    let Some(name) = name else {
        return Err(Failure::Config(format!("pick a scenario: {}", names().join(", "))));
    };
    let Some(sc) = find(&name) else {
        return Err(Failure::Config(format!(
            "no scenario named {name:?}; have {}",
            names().join(", ")
        )));
    };

    let mut cfg = ResolvedConfig::default();
    for (k, v) in sc.default_overrides() {
        let a = Assignment {
            at: "scenario default".to_string(),
            key: k.to_string(),
            value: v.to_string(),
        };
        cfg.apply(&a).expect("scenario defaults are valid");
    }
    for a in &assignments {
        cfg.apply(a)?;
    }
    if let Some(out) = &cli.out {
        cfg.out = Some(out.clone());
    }
    cfg.scenario = sc.name().to_string();

    if cfg.out.is_some() && sc.default_out().is_none() {
        return Err(Failure::Config(format!(
            "scenario {} writes no table; drop the output path",
            sc.name()
        )));
    }
    for (key, value) in [("threshold", cfg.threshold), ("delta", cfg.delta)] {
        if !(value.is_finite() && value > 0.0) {
            return Err(Failure::Config(format!("{key} must be positive, got {value}")));
        }
    }
    let warnings = cfg
        .params
        .validate(sc.uses_moving_box())
        .map_err(|e| Failure::Config(e.to_string()))?;
    for w in warnings {
        eprintln!("warning: {w}");
    }

    println!("# histlab {} config-hash={}", env!("CARGO_PKG_VERSION"), cfg.config_hash());
    println!("# scenario: {}", sc.name());
    Ok(sc.run(&cfg)?)
}

/// Returns the process exit code instead of exiting, so tests can call it.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    match drive(cli) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("settings error: {msg}");
            2
        }
        Err(Failure::Run(e)) => {
            eprintln!("run failed: {e}");
            3
        }
    }
}
