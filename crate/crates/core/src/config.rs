//! Flat `key = value` configuration files.
//!
//! Keys are the `NetworkConfig` field names (`M` for the chain length), lists
//! are comma-separated, `#` starts a comment. Missing keys keep the default
//! operating point; missing lists are sized to `M`.
//!
//! ```text
//! M = 4
//! gamma = 0.8
//! gamma_out = 0.002
//! r = 0.1
//! j = 0.5
//! nbar_local = 0, 0, 0, 0, 0
//! direction = forward
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::network::{Direction, NetworkConfig};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

const KEYS: [&str; 9] = [
    "M",
    "omega",
    "r",
    "j",
    "gamma",
    "gamma_out",
    "nbar_local",
    "nbar_common",
    "direction",
];

pub fn read_config_file(path: &Path) -> Result<NetworkConfig, ConfigParseError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigParseError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<NetworkConfig, ConfigParseError> {
    let mut entries: HashMap<&str, (usize, &str)> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigParseError::Syntax {
                line,
                message: format!("expected `key = value`, found `{content}`"),
            })?;
        let key = key.trim();
        let value = value.trim();
        let key = KEYS
            .iter()
            .find(|k| **k == key)
            .ok_or_else(|| ConfigParseError::Syntax {
                line,
                message: format!("unknown key `{key}`"),
            })?;
        if value.is_empty() {
            return Err(ConfigParseError::Syntax {
                line,
                message: format!("missing value for `{key}`"),
            });
        }
        if let Some((first, _)) = entries.insert(key, (line, value)) {
            return Err(ConfigParseError::Syntax {
                line,
                message: format!("duplicate key `{key}` (first set on line {first})"),
            });
        }
    }

    let mut cfg = match entries.get("M") {
        Some(&(line, v)) => {
            let m = v.parse::<usize>().map_err(|_| ConfigParseError::Syntax {
                line,
                message: format!("`M` must be a nonnegative integer, found `{v}`"),
            })?;
            NetworkConfig::with_chain_len(m)
        }
        None => NetworkConfig::default(),
    };

    let mut ordered: Vec<_> = entries.iter().map(|(k, &(l, v))| (l, *k, v)).collect();
    ordered.sort_unstable_by_key(|e| e.0);
    for (line, key, value) in ordered {
        match key {
            "M" => {}
            "r" => cfg.r = scalar(line, key, value)?,
            "j" => cfg.j = scalar(line, key, value)?,
            "gamma" => cfg.gamma = scalar(line, key, value)?,
            "gamma_out" => cfg.gamma_out = scalar(line, key, value)?,
            "omega" => cfg.omega = list(line, key, value)?,
            "nbar_local" => cfg.nbar_local = list(line, key, value)?,
            "nbar_common" => cfg.nbar_common = list(line, key, value)?,
            "direction" => {
                cfg.direction =
                    value
                        .parse::<Direction>()
                        .map_err(|e| ConfigParseError::Syntax {
                            line,
                            message: e.to_string(),
                        })?
            }
            _ => unreachable!("keys are filtered against KEYS"),
        }
    }
    Ok(cfg)
}

fn scalar(line: usize, key: &str, value: &str) -> Result<f64, ConfigParseError> {
    value.parse::<f64>().map_err(|_| ConfigParseError::Syntax {
        line,
        message: format!("`{key}` must be a number, found `{value}`"),
    })
}

fn list(line: usize, key: &str, value: &str) -> Result<Vec<f64>, ConfigParseError> {
    value
        .split(',')
        .map(|item| scalar(line, key, item.trim()))
        .collect()
}

/// Serializes a configuration in the same format `parse_config` reads.
/// Values are written with 17 significant digits so they parse back exactly.
pub fn format_config(cfg: &NetworkConfig) -> String {
    fn join(values: &[f64]) -> String {
        values
            .iter()
            .map(|v| format!("{v:.16e}"))
            .collect::<Vec<_>>()
            .join(", ")
    }
    let mut s = String::new();
    let _ = writeln!(s, "M = {}", cfg.chain_len);
    let _ = writeln!(s, "omega = {}", join(&cfg.omega));
    let _ = writeln!(s, "r = {:.16e}", cfg.r);
    let _ = writeln!(s, "j = {:.16e}", cfg.j);
    let _ = writeln!(s, "gamma = {:.16e}", cfg.gamma);
    let _ = writeln!(s, "gamma_out = {:.16e}", cfg.gamma_out);
    let _ = writeln!(s, "nbar_local = {}", join(&cfg.nbar_local));
    if !cfg.nbar_common.is_empty() {
        let _ = writeln!(s, "nbar_common = {}", join(&cfg.nbar_common));
    }
    let _ = writeln!(s, "direction = {}", cfg.direction);
    s
}
