//! Network configuration and the real matrices of the linear quadrature
//! dynamics `dr/dt = A r + B r_in`.
//!
//! Ordering contract used by every other module:
//!
//! * quadratures are interleaved, `(x_0, p_0, x_1, p_1, ..., x_M, p_M)`;
//! * bath quadratures list the distinct baths `0..=M` first, then the common
//!   baths `(1,2), (2,3), ..., (M-1,M)`.
//!
//! Node 0 is the squeezed source; nodes `1..=M` form the cascaded chain.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use nalgebra::{DMatrix, Matrix2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Which end of the chain the source node is attached to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Source couples to node 1, along the cascade.
    Forward,
    /// Source couples to node `M`, against the cascade.
    Backward,
}

impl Direction {
    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "forward",
            Direction::Backward => "backward",
        }
    }

    pub fn reversed(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown direction `{0}` (expected `forward` or `backward`)")]
pub struct ParseDirectionError(pub String);

impl FromStr for Direction {
    type Err = ParseDirectionError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "forward" | "fwd" => Ok(Direction::Forward),
            "backward" | "bwd" => Ok(Direction::Backward),
            other => Err(ParseDirectionError(other.to_string())),
        }
    }
}

/// Physical parameters of the network. All rates share one unit; after
/// validation they are expressed as ratios to the common node frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    /// Number of chain nodes `M` (the source is node 0, so there are `M + 1` modes).
    pub chain_len: usize,
    /// Node frequencies `omega_0..=omega_M`.
    pub omega: Vec<f64>,
    /// Squeezing rate of the source node.
    pub r: f64,
    /// Source-to-chain hopping magnitude.
    pub j: f64,
    /// Decay rate into each common bath. Chain hoppings are fixed to `gamma / 2`.
    pub gamma: f64,
    /// Decay rate of every node into its own bath.
    pub gamma_out: f64,
    /// Occupations of the `M + 1` distinct baths.
    pub nbar_local: Vec<f64>,
    /// Occupations of the `M - 1` common baths.
    pub nbar_common: Vec<f64>,
    pub direction: Direction,
}

impl Default for NetworkConfig {
    /// The operating point used throughout: `M = 10`, `gamma = 0.8`,
    /// `gamma_out = 0.002`, vacuum baths, no squeezing or source hopping.
    fn default() -> Self {
        NetworkConfig::with_chain_len(10)
    }
}

impl NetworkConfig {
    /// Default parameters for a chain of `m` nodes, with lists sized to match.
    pub fn with_chain_len(m: usize) -> Self {
        NetworkConfig {
            chain_len: m,
            omega: vec![1.0; m + 1],
            r: 0.0,
            j: 0.0,
            gamma: 0.8,
            gamma_out: 0.002,
            nbar_local: vec![0.0; m + 1],
            nbar_common: vec![0.0; m.saturating_sub(1)],
            direction: Direction::Forward,
        }
    }

    pub fn validate(&self) -> Result<ValidatedNetwork, ValidationError> {
        validate_config(self)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigViolation {
    #[error("chain must have at least one node (M = 0)")]
    ZeroModes,
    #[error("`{field}` must be nonnegative, got {value}")]
    NegativeRate { field: String, value: f64 },
    #[error("`{field}` must be finite, got {value}")]
    NonFinite { field: String, value: f64 },
    #[error("`{field}` has length {got}, expected {expected}")]
    LengthMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Every violation found in a configuration, not just the first.
#[derive(Debug, Clone, PartialEq, Error)]
pub struct ValidationError {
    pub violations: Vec<ConfigViolation>,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid network configuration: ")?;
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A configuration that passed validation, normalized so that a common node
/// frequency equals one.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedNetwork {
    config: NetworkConfig,
    omega_scale: f64,
}

impl ValidatedNetwork {
    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    /// The common frequency all rates were divided by (1 when no rescaling happened).
    pub fn omega_scale(&self) -> f64 {
        self.omega_scale
    }

    pub fn chain_len(&self) -> usize {
        self.config.chain_len
    }

    pub fn direction(&self) -> Direction {
        self.config.direction
    }

    /// Number of bosonic modes, `M + 1`.
    pub fn num_modes(&self) -> usize {
        self.config.chain_len + 1
    }

    /// Phase-space dimension `2(M + 1)`.
    pub fn dim(&self) -> usize {
        2 * self.num_modes()
    }

    /// Number of bath quadratures, `4M`.
    pub fn num_bath_quadratures(&self) -> usize {
        4 * self.config.chain_len
    }

    /// Node attached to the source by the coherent hopping `j`.
    pub fn source_partner(&self) -> usize {
        match self.config.direction {
            Direction::Forward => 1,
            Direction::Backward => self.config.chain_len,
        }
    }

    /// Total decay rate of node `k`: `gamma_out` plus `gamma` for every
    /// common bath the node is attached to.
    pub fn damping_rate(&self, k: usize) -> f64 {
        let c = &self.config;
        c.gamma_out + common_baths_of(c.chain_len, k).count() as f64 * c.gamma
    }

    /// Same network with a different source hopping and squeezing, in
    /// normalized units.
    pub fn with_drive(
        &self,
        r: f64,
        j: f64,
        direction: Direction,
    ) -> Result<Self, ValidationError> {
        let mut cfg = self.config.clone();
        cfg.r = r;
        cfg.j = j;
        cfg.direction = direction;
        validate_config(&cfg)
    }

    /// Occupation of bath `q` in noise order (distinct baths, then common).
    fn bath_occupation(&self, q: usize) -> f64 {
        let c = &self.config;
        if q <= c.chain_len {
            c.nbar_local[q]
        } else {
            c.nbar_common[q - c.chain_len - 1]
        }
    }
}

/// Common-bath indices `l` (bath `(l, l+1)`) attached to node `k`.
fn common_baths_of(m: usize, k: usize) -> impl Iterator<Item = usize> {
    (1..m).filter(move |&l| l == k || l + 1 == k)
}

pub fn validate_config(cfg: &NetworkConfig) -> Result<ValidatedNetwork, ValidationError> {
    let mut violations = Vec::new();
    let m = cfg.chain_len;
    if m < 1 {
        violations.push(ConfigViolation::ZeroModes);
    }

    let mut check = |field: String, value: f64| {
        if !value.is_finite() {
            violations.push(ConfigViolation::NonFinite { field, value });
        } else if value < 0.0 {
            violations.push(ConfigViolation::NegativeRate { field, value });
        }
    };
    check("r".into(), cfg.r);
    check("j".into(), cfg.j);
    check("gamma".into(), cfg.gamma);
    check("gamma_out".into(), cfg.gamma_out);
    for (name, list) in [
        ("omega", &cfg.omega),
        ("nbar_local", &cfg.nbar_local),
        ("nbar_common", &cfg.nbar_common),
    ] {
        for (i, &v) in list.iter().enumerate() {
            check(format!("{name}[{i}]"), v);
        }
    }

    if m >= 1 {
        for (field, expected, got) in [
            ("omega", m + 1, cfg.omega.len()),
            ("nbar_local", m + 1, cfg.nbar_local.len()),
            ("nbar_common", m - 1, cfg.nbar_common.len()),
        ] {
            if expected != got {
                violations.push(ConfigViolation::LengthMismatch {
                    field,
                    expected,
                    got,
                });
            }
        }
    }

    if !violations.is_empty() {
        return Err(ValidationError { violations });
    }

    let mut config = cfg.clone();
    let w0 = cfg.omega[0];
    let uniform = cfg.omega.iter().all(|&w| w == w0);
    let omega_scale = if uniform && w0 > 0.0 { w0 } else { 1.0 };
    if omega_scale != 1.0 {
        config.omega.iter_mut().for_each(|w| *w /= omega_scale);
        config.r /= omega_scale;
        config.j /= omega_scale;
        config.gamma /= omega_scale;
        config.gamma_out /= omega_scale;
    }
    Ok(ValidatedNetwork {
        config,
        omega_scale,
    })
}

/// `i sigma_y`, the real generator of phase-space rotations.
fn rotation_generator() -> Matrix2<f64> {
    Matrix2::new(0.0, 1.0, -1.0, 0.0)
}

fn add_block(target: &mut DMatrix<f64>, row: usize, col: usize, block: &Matrix2<f64>) {
    let mut view = target.view_mut((2 * row, 2 * col), (2, 2));
    view += block;
}

/// Drift matrix `A` of the quadrature Langevin equations.
pub fn build_dynamical_matrix(net: &ValidatedNetwork) -> DMatrix<f64> {
    let c = net.config();
    let m = c.chain_len;
    let n = net.dim();
    let rot = rotation_generator();
    let id = Matrix2::<f64>::identity();
    let mut a = DMatrix::zeros(n, n);

    for k in 0..=m {
        let block = -0.5 * net.damping_rate(k) * id + c.omega[k] * rot;
        add_block(&mut a, k, k, &block);
    }
    let squeeze = Matrix2::new(-c.r, 0.0, 0.0, c.r);
    add_block(&mut a, 0, 0, &squeeze);

    for k in 2..=m {
        add_block(&mut a, k, k - 1, &(-c.gamma * id));
    }

    let partner = net.source_partner();
    let hop = c.j * rot;
    add_block(&mut a, 0, partner, &hop);
    add_block(&mut a, partner, 0, &hop);
    a
}

/// Input matrix `B` coupling node quadratures to bath quadratures.
pub fn build_input_matrix(net: &ValidatedNetwork) -> DMatrix<f64> {
    let c = net.config();
    let m = c.chain_len;
    let mut b = DMatrix::zeros(net.dim(), net.num_bath_quadratures());
    let local = c.gamma_out.sqrt() * Matrix2::identity();
    let common = c.gamma.sqrt() * Matrix2::identity();
    for k in 0..=m {
        add_block(&mut b, k, k, &local);
    }
    for l in 1..m {
        let col = m + l;
        add_block(&mut b, l, col, &common);
        add_block(&mut b, l + 1, col, &common);
    }
    b
}

/// Noise matrix `N = B diag(2 nbar + 1) B^T`.
pub fn build_noise_matrix(net: &ValidatedNetwork) -> DMatrix<f64> {
    noise_from_input(net, &build_input_matrix(net))
}

fn noise_from_input(net: &ValidatedNetwork, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut scaled = b.clone();
    for (q, mut col) in scaled.column_iter_mut().enumerate() {
        col *= 2.0 * net.bath_occupation(q / 2) + 1.0;
    }
    let n = &scaled * b.transpose();
    (&n + n.transpose()) * 0.5
}

/// Labels for the interleaved quadrature ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum QuadratureOrder {
    /// `(x_0, p_0, ..., x_M, p_M)`
    Interleaved,
}

/// Labels for the bath ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NoiseOrder {
    /// Distinct baths `0..=M`, then common baths `(1,2) .. (M-1,M)`.
    DistinctThenCommon,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SystemMatrices {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub n: DMatrix<f64>,
    pub quadrature_order: QuadratureOrder,
    pub noise_order: NoiseOrder,
}

impl SystemMatrices {
    pub fn build(net: &ValidatedNetwork) -> Self {
        let b = build_input_matrix(net);
        SystemMatrices {
            a: build_dynamical_matrix(net),
            n: noise_from_input(net, &b),
            b,
            quadrature_order: QuadratureOrder::Interleaved,
            noise_order: NoiseOrder::DistinctThenCommon,
        }
    }
}

/// Human-readable name of quadrature `i`, e.g. `p3`.
pub fn quadrature_label(i: usize) -> String {
    format!("{}{}", if i.is_multiple_of(2) { 'x' } else { 'p' }, i / 2)
}

/// Human-readable name of bath quadrature `q` for a chain of `m` nodes.
pub fn bath_label(m: usize, q: usize) -> String {
    let quad = if q.is_multiple_of(2) { 'x' } else { 'p' };
    let bath = q / 2;
    if bath <= m {
        format!("{quad}_in{bath}")
    } else {
        let l = bath - m;
        format!("{quad}_in{l},{}", l + 1)
    }
}

/// Writes a matrix as headerless row-major CSV with 17 significant digits.
pub fn write_matrix_csv<W: Write>(m: &DMatrix<f64>, mut out: W) -> io::Result<()> {
    for row in m.row_iter() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}
