//! Physical-unit presets. These only convert dimensionless results to
//! physical units; the solver never sees them.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gaussian::{self, MeasureError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    /// Microwave electromechanical platform.
    Microwave,
}

/// Angular frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParameters {
    pub omega_cavity: f64,
    pub kappa: f64,
    pub omega_mechanical: f64,
    pub gamma_mechanical: f64,
}

impl Preset {
    pub fn parameters(self) -> PhysicalParameters {
        match self {
            Preset::Microwave => PhysicalParameters {
                omega_cavity: 2.0 * PI * 5e9,
                kappa: 2.0 * PI * 2e6,
                omega_mechanical: 2.0 * PI * 6e6,
                gamma_mechanical: 2.0 * PI * 100.0,
            },
        }
    }

    /// Effective temperature (K) of a node with occupation `nbar` at the
    /// preset's cavity frequency.
    pub fn effective_temperature(self, nbar: f64) -> Result<f64, MeasureError> {
        gaussian::effective_temperature(nbar, self.parameters().omega_cavity)
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Preset::Microwave => f.write_str("microwave"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown preset `{0}` (expected `microwave`)")]
pub struct ParsePresetError(pub String);

impl FromStr for Preset {
    type Err = ParsePresetError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "microwave" => Ok(Preset::Microwave),
            other => Err(ParsePresetError(other.to_string())),
        }
    }
}
