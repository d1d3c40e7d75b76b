//! Layered run settings: global defaults, then the scenario's own
//! overrides, then a settings file, then --set, last writer winning.

use std::path::PathBuf;

use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{ClipMode, SimParams};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{at}: expected `key = value`, got {got:?}")]
    Syntax { at: String, got: String },
    #[error("{at}: unknown setting {key:?}")]
    UnknownKey { at: String, key: String },
    #[error("{at}: bad value for {key}: {msg}")]
    BadValue { at: String, key: String, msg: String },
}

/// One `key = value` with where it came from, for error messages.
#[derive(Clone, Debug)]
pub struct Assignment {
    pub at: String,
    pub key: String,
    pub value: String,
}

fn split_assignment(at: String, text: &str) -> Result<Assignment, ConfigError> {
    let Some((k, v)) = text.split_once('=') else {
        return Err(ConfigError::Syntax { at, got: text.to_string() });
    };
    let (key, value) = (k.trim(), v.trim());
    if key.is_empty() || value.is_empty() {
        return Err(ConfigError::Syntax { at, got: text.to_string() });
    }
    Ok(Assignment { at, key: key.to_string(), value: value.to_string() })
}

/// Parse a settings file: one `key = value` per line, `#` comments.
pub fn parse_file(text: &str) -> Result<Vec<Assignment>, ConfigError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        out.push(split_assignment(format!("line {}", i + 1), line)?);
    }
    Ok(out)
}

/// Parse one --set argument.
pub fn parse_set(kv: &str) -> Result<Assignment, ConfigError> {
    split_assignment("--set".to_string(), kv.trim())
}

/// Everything a scenario run needs, after all layers are applied.
#[derive(Clone, Debug)]
pub struct ResolvedConfig {
    pub scenario: String,
    pub params: SimParams,
    /// consistency bar on |D(h, hbar)|
    pub threshold: f64,
    /// near-certainty margin: p counts as "almost one" above 1 - delta
    pub delta: f64,
    pub clip_mode: ClipMode,
    pub out: Option<PathBuf>,
}

impl Default for ResolvedConfig {
    fn default() -> ResolvedConfig {
        ResolvedConfig {
            scenario: String::new(),
            params: SimParams::default(),
            threshold: 0.01,
            delta: 0.01,
            clip_mode: ClipMode::ClipAtWalls,
            out: None,
        }
    }
}

fn f64v(a: &Assignment) -> Result<f64, ConfigError> {
    a.value.parse().map_err(|_| ConfigError::BadValue {
        at: a.at.clone(),
        key: a.key.clone(),
        msg: format!("{:?} is not a number", a.value),
    })
}

fn usizev(a: &Assignment) -> Result<usize, ConfigError> {
    a.value.parse().map_err(|_| ConfigError::BadValue {
        at: a.at.clone(),
        key: a.key.clone(),
        msg: format!("{:?} is not a whole number", a.value),
    })
}

impl ResolvedConfig {
    /// Apply one assignment. `scenario` and `out` are settings like any
    /// other; the command line may still override both afterwards.
    pub fn apply(&mut self, a: &Assignment) -> Result<(), ConfigError> {
        match a.key.as_str() {
            "a" => self.params.a = f64v(a)?,
            "q" => self.params.q = f64v(a)?,
            "x0_frac" => self.params.x0_frac = f64v(a)?,
            "lambda_frac" => self.params.lambda_frac = f64v(a)?,
            "dt_frac" => self.params.dt_frac = f64v(a)?,
            "tau_frac" => self.params.tau_frac = f64v(a)?,
            "n_grid" => self.params.n_grid = usizev(a)?,
            "n_modes" => self.params.n_modes = usizev(a)?,
            "threshold" => self.threshold = f64v(a)?,
            "delta" => self.delta = f64v(a)?,
            "clip_mode" => {
                self.clip_mode = match a.value.as_str() {
                    "clip" => ClipMode::ClipAtWalls,
                    "freeze" => ClipMode::FreezeAtWalls,
                    other => {
                        return Err(ConfigError::BadValue {
                            at: a.at.clone(),
                            key: a.key.clone(),
                            msg: format!("{other:?} is neither clip nor freeze"),
                        })
                    }
                }
            }
            "scenario" => self.scenario = a.value.clone(),
            "out" => self.out = Some(PathBuf::from(&a.value)),
            _ => {
                return Err(ConfigError::UnknownKey { at: a.at.clone(), key: a.key.clone() })
            }
        }
        Ok(())
    }

    /// The resolved settings as sorted `key=value` lines. Floats render
    /// through their shortest round-trip form, so equal settings give
    /// equal lines. The output path stays out: it never affects results.
    pub fn canonical_lines(&self) -> Vec<String> {
        let p = &self.params;
        let clip = match self.clip_mode {
            ClipMode::ClipAtWalls => "clip",
            ClipMode::FreezeAtWalls => "freeze",
        };
        vec![
            format!("a={}", p.a),
            format!("clip_mode={clip}"),
            format!("delta={}", self.delta),
            format!("dt_frac={}", p.dt_frac),
            format!("lambda_frac={}", p.lambda_frac),
            format!("n_grid={}", p.n_grid),
            format!("n_modes={}", p.n_modes),
            format!("q={}", p.q),
            format!("scenario={}", self.scenario),
            format!("tau_frac={}", p.tau_frac),
            format!("threshold={}", self.threshold),
            format!("x0_frac={}", p.x0_frac),
        ]
    }

    /// First 16 hex digits of the digest over the canonical lines.
    pub fn config_hash(&self) -> String {
        let mut h = Sha256::new();
        for line in self.canonical_lines() {
            h.update(line.as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
