//! Steady-state Gaussian dynamics of a squeezed bosonic mode attached to a
//! cascaded (unidirectional) chain of bosonic nodes.
//!
//! The pipeline is: [`network`] builds the drift and noise matrices of the
//! quadrature Langevin equations, [`lyapunov`] checks stability and solves
//! for the steady-state covariance matrix, [`gaussian`] evaluates
//! entanglement and occupations on it, and [`sweep`] runs that over
//! `(r/omega, j/omega)` grids and exports tables.

pub mod config;
pub mod gaussian;
pub mod lyapunov;
pub mod network;
pub mod preset;
pub mod sweep;

pub use gaussian::{CovarianceMatrix, EntanglementRecord, TwoModeCovariance};
pub use network::{Direction, NetworkConfig, SystemMatrices, ValidatedNetwork};
pub use sweep::{FigureKind, PointResult, SweepGrid, Table};
