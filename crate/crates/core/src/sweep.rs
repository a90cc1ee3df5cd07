//! Parameter sweeps over `(r/omega, j/omega)` and the tables built from them.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::gaussian::{self, CovarianceMatrix};
use crate::lyapunov::{self, DEFAULT_STABILITY_MARGIN};
use crate::network::{Direction, NetworkConfig, SystemMatrices, ValidatedNetwork, ValidationError};

/// `E_N` above this counts as entangled.
pub const ENTANGLEMENT_THRESHOLD: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error("sweep grid needs at least one r and one j value")]
    EmptyGrid,
    #[error("grid values must be finite and nonnegative, got {0}")]
    NegativeValue(f64),
    #[error("figure `{figure}` needs a {direction} sweep")]
    MissingDirection {
        figure: FigureKind,
        direction: Direction,
    },
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
}

/// Everything computed for one `(r, j, direction)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub r_over_omega: f64,
    pub j_over_omega: f64,
    pub direction: Direction,
    pub stable: bool,
    pub physical: bool,
    /// `E_N` between the source and node 2; forward sweeps only.
    pub en_forward_pair: Option<f64>,
    /// `E_N` between the source and node `M - 1`; backward sweeps only.
    pub en_backward_pair: Option<f64>,
    pub m_max: Option<usize>,
    /// Occupation of node `m_max`, when `m_max >= 1`.
    pub nbar_at_mmax: Option<f64>,
    pub spectral_abscissa: f64,
    /// Solver failure at a stable point, if any.
    pub failure: Option<String>,
}

impl PointResult {
    fn empty(net: &ValidatedNetwork, abscissa: f64) -> Self {
        let c = net.config();
        PointResult {
            r_over_omega: c.r,
            j_over_omega: c.j,
            direction: c.direction,
            stable: false,
            physical: false,
            en_forward_pair: None,
            en_backward_pair: None,
            m_max: None,
            nbar_at_mmax: None,
            spectral_abscissa: abscissa,
            failure: None,
        }
    }
}

/// Largest chain node `m` with `E_N(0, m) > threshold`, or 0. Every node is
/// checked; `E_N(0, m)` is not assumed monotone in `m`.
pub fn max_entangled_node(v: &CovarianceMatrix, threshold: f64) -> usize {
    (1..v.num_modes())
        .rev()
        .find(|&m| {
            gaussian::reduce_two_mode(v, 0, m)
                .and_then(|tm| gaussian::log_negativity(&tm))
                .map(|rec| rec.log_negativity > threshold)
                .unwrap_or(false)
        })
        .unwrap_or(0)
}

fn pair_entanglement(v: &CovarianceMatrix, m: usize) -> Result<f64, String> {
    gaussian::reduce_two_mode(v, 0, m)
        .and_then(|tm| gaussian::log_negativity(&tm))
        .map(|rec| rec.log_negativity)
        .map_err(|e| e.to_string())
}

/// Builds the matrices, checks stability, and evaluates the steady state.
///
/// Unstable points carry no entanglement or occupation data; their
/// `physical` flag is still evaluated on the formal solution of
/// `A V + V A^T + N = 0` when that system is solvable.
pub fn run_point(net: &ValidatedNetwork) -> PointResult {
    let mats = SystemMatrices::build(net);
    let abscissa = match lyapunov::spectral_abscissa(&mats.a) {
        Ok(x) => x,
        Err(e) => {
            let mut out = PointResult::empty(net, f64::NAN);
            out.failure = Some(e.to_string());
            return out;
        }
    };
    let report = lyapunov::StabilityReport::from_abscissa(abscissa, DEFAULT_STABILITY_MARGIN);
    let mut out = PointResult::empty(net, abscissa);
    out.stable = report.stable;

    if !report.stable {
        out.physical = lyapunov::solve_steady_state_vectorized(&mats.a, &mats.n)
            .map(|v| gaussian::check_physical(&v).physical)
            .unwrap_or(false);
        return out;
    }

    let v = match lyapunov::solve_steady_state_spectral(&mats.a, &mats.n) {
        Ok(v) => v,
        Err(e) => {
            out.failure = Some(e.to_string());
            return out;
        }
    };
    out.physical = gaussian::check_physical(&v).physical;

    let m = net.chain_len();
    let pair = match net.direction() {
        Direction::Forward => (m >= 2).then_some(2),
        Direction::Backward => (m >= 2).then(|| m - 1),
    };
    if let Some(node) = pair {
        match pair_entanglement(&v, node) {
            Ok(en) => match net.direction() {
                Direction::Forward => out.en_forward_pair = Some(en),
                Direction::Backward => out.en_backward_pair = Some(en),
            },
            Err(e) => out.failure = Some(e),
        }
    }

    let m_max = max_entangled_node(&v, ENTANGLEMENT_THRESHOLD);
    out.m_max = Some(m_max);
    if m_max >= 1 {
        out.nbar_at_mmax = gaussian::mean_occupation(&v, m_max).ok();
    }
    out
}

/// A dense `r x j` evaluation, stored row-major with `r` outer.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub r_values: Vec<f64>,
    pub j_values: Vec<f64>,
    pub base: NetworkConfig,
    pub direction: Direction,
    pub results: Vec<PointResult>,
}

impl SweepGrid {
    pub fn get(&self, r_index: usize, j_index: usize) -> &PointResult {
        &self.results[r_index * self.j_values.len() + j_index]
    }

    pub fn len(&self) -> usize {
        self.results.len()
    }

    pub fn is_empty(&self) -> bool {
        self.results.is_empty()
    }
}

/// `count` evenly spaced values from `min` to `max` inclusive.
pub fn linspace(min: f64, max: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![min],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    max
                } else {
                    min + (max - min) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

/// Evaluates [`run_point`] on every grid point. Points run in parallel on
/// the current rayon pool; the result order does not depend on scheduling.
pub fn sweep_grid(
    base: &NetworkConfig,
    r_values: &[f64],
    j_values: &[f64],
    direction: Direction,
) -> Result<SweepGrid, SweepError> {
    if r_values.is_empty() || j_values.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    if let Some(&bad) = r_values
        .iter()
        .chain(j_values)
        .find(|v| !(v.is_finite() && **v >= 0.0))
    {
        return Err(SweepError::NegativeValue(bad));
    }
    let net = base.validate()?;
    let points: Vec<(f64, f64)> = r_values
        .iter()
        .flat_map(|&r| j_values.iter().map(move |&j| (r, j)))
        .collect();
    let results = points
        .par_iter()
        .map(|&(r, j)| net.with_drive(r, j, direction).map(|p| run_point(&p)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SweepGrid {
        r_values: r_values.to_vec(),
        j_values: j_values.to_vec(),
        base: net.config().clone(),
        direction,
        results,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureKind {
    /// `E_N` of the source pair in both directions.
    Nonreciprocity,
    /// Propagation depth `m_max`.
    Depth,
    /// Occupation of node `m_max`.
    Occupation,
    /// Stability and physicality map.
    Stability,
}

impl FigureKind {
    pub const ALL: [FigureKind; 4] = [
        FigureKind::Nonreciprocity,
        FigureKind::Depth,
        FigureKind::Occupation,
        FigureKind::Stability,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            FigureKind::Nonreciprocity => "nonreciprocity",
            FigureKind::Depth => "depth",
            FigureKind::Occupation => "occupation",
            FigureKind::Stability => "stability",
        }
    }

    /// Sweep directions the figure is built from.
    pub fn directions(self) -> &'static [Direction] {
        match self {
            FigureKind::Nonreciprocity => &[Direction::Forward, Direction::Backward],
            _ => &[Direction::Forward],
        }
    }
}

impl fmt::Display for FigureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown figure `{0}` (expected nonreciprocity, depth, occupation or stability)")]
pub struct ParseFigureError(pub String);

impl FromStr for FigureKind {
    type Err = ParseFigureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        FigureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ParseFigureError(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    /// Undefined value, written as an empty field.
    Empty,
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Float)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Float(v) => write!(f, "{v:.16e}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Bool(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
            Cell::Empty => Ok(()),
        }
    }
}

/// Long-format table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::to_string).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

fn find_grid<'a>(
    grids: &[&'a SweepGrid],
    figure: FigureKind,
    direction: Direction,
) -> Result<&'a SweepGrid, SweepError> {
    grids
        .iter()
        .copied()
        .find(|g| g.direction == direction)
        .ok_or(SweepError::MissingDirection { figure, direction })
}

/// Builds the long-format table for one figure from the given sweeps.
/// `Nonreciprocity` needs a forward and a backward grid; the others use the
/// forward grid.
pub fn figure_dataset(kind: FigureKind, grids: &[&SweepGrid]) -> Result<Table, SweepError> {
    let forward = find_grid(grids, kind, Direction::Forward)?;
    let table = match kind {
        FigureKind::Nonreciprocity => {
            let backward = find_grid(grids, kind, Direction::Backward)?;
            let mut t = Table::new(&[
                "r_over_omega",
                "j_over_omega",
                "direction",
                "log_negativity",
            ]);
            for (grid, dir) in [
                (forward, Direction::Forward),
                (backward, Direction::Backward),
            ] {
                for p in &grid.results {
                    let value = match dir {
                        Direction::Forward => p.en_forward_pair,
                        Direction::Backward => p.en_backward_pair,
                    };
                    t.rows.push(vec![
                        Cell::Float(p.r_over_omega),
                        Cell::Float(p.j_over_omega),
                        Cell::Text(dir.to_string()),
                        value.into(),
                    ]);
                }
            }
            t
        }
        FigureKind::Depth => {
            let mut t = Table::new(&["r_over_omega", "j_over_omega", "m_max"]);
            for p in &forward.results {
                t.rows.push(vec![
                    Cell::Float(p.r_over_omega),
                    Cell::Float(p.j_over_omega),
                    p.m_max.map_or(Cell::Empty, |m| Cell::Int(m as i64)),
                ]);
            }
            t
        }
        FigureKind::Occupation => {
            let mut t = Table::new(&["r_over_omega", "j_over_omega", "nbar"]);
            for p in &forward.results {
                t.rows.push(vec![
                    Cell::Float(p.r_over_omega),
                    Cell::Float(p.j_over_omega),
                    p.nbar_at_mmax.into(),
                ]);
            }
            t
        }
        FigureKind::Stability => {
            let mut t = Table::new(&[
                "r_over_omega",
                "j_over_omega",
                "stable",
                "physical",
                "spectral_abscissa",
            ]);
            for p in &forward.results {
                t.rows.push(vec![
                    Cell::Float(p.r_over_omega),
                    Cell::Float(p.j_over_omega),
                    Cell::Bool(p.stable),
                    Cell::Bool(p.physical),
                    Cell::Float(p.spectral_abscissa),
                ]);
            }
            t
        }
    };
    Ok(table)
}

/// Writes `table` as UTF-8 CSV with a header row and LF line endings.
pub fn export_csv(table: &Table, path: &Path) -> Result<(), SweepError> {
    let mut out = BufWriter::new(File::create(path)?);
    table.write_csv(&mut out)?;
    out.flush()?;
    Ok(())
}
