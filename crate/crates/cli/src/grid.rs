use std::str::FromStr;

use cvroute::sweep::linspace;
use serde::{Deserialize, Serialize};

/// Number of `r` and `j` samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    pub r_count: usize,
    pub j_count: usize,
}

impl FromStr for GridShape {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("grid must look like 101x101, got `{s}`");
        let (r, j) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let r_count: usize = r.trim().parse().map_err(|_| bad())?;
        let j_count: usize = j.trim().parse().map_err(|_| bad())?;
        if r_count == 0 || j_count == 0 {
            return Err(format!("grid needs at least one point per axis, got `{s}`"));
        }
        Ok(GridShape { r_count, j_count })
    }
}

/// Closed bounds of the `r` and `j` axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridRange {
    pub r: (f64, f64),
    pub j: (f64, f64),
}

fn parse_interval(s: &str) -> Option<(f64, f64)> {
    let (lo, hi) = s.split_once(':')?;
    let lo: f64 = lo.trim().parse().ok()?;
    let hi: f64 = hi.trim().parse().ok()?;
    (lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi).then_some((lo, hi))
}

impl FromStr for GridRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || format!("range must look like 0:1,0:1 with 0 <= min <= max, got `{s}`");
        let (r, j) = s.split_once(',').ok_or_else(bad)?;
        Ok(GridRange {
            r: parse_interval(r).ok_or_else(bad)?,
            j: parse_interval(j).ok_or_else(bad)?,
        })
    }
}

/// Grid recorded in run manifests.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub r_min: f64,
    pub r_max: f64,
    pub r_count: usize,
    pub j_min: f64,
    pub j_max: f64,
    pub j_count: usize,
}

impl GridSpec {
    pub fn new(shape: GridShape, range: GridRange) -> Self {
        GridSpec {
            r_min: range.r.0,
            r_max: range.r.1,
            r_count: shape.r_count,
            j_min: range.j.0,
            j_max: range.j.1,
            j_count: shape.j_count,
        }
    }

    pub fn r_values(&self) -> Vec<f64> {
        linspace(self.r_min, self.r_max, self.r_count)
    }

    pub fn j_values(&self) -> Vec<f64> {
        linspace(self.j_min, self.j_max, self.j_count)
    }
}
