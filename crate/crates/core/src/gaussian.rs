//! State-level diagnostics on Gaussian covariance matrices.
//!
//! Covariance matrices are stored with vacuum equal to the identity,
//! `V_ij = <r_i r_j + r_j r_i> - 2 <r_i><r_j>`. Symplectic quantities
//! (PPT eigenvalues, log-negativity, physicality) are evaluated on the
//! rescaled matrix `sigma = V / 2`, where vacuum has symplectic eigenvalue 1/2.

use nalgebra::{DMatrix, Matrix2, Matrix4};
use thiserror::Error;

/// Reduced Planck constant, J s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Boltzmann constant, J/K (CODATA 2018, exact).
pub const K_BOLTZMANN: f64 = 1.380_649e-23;

/// Absolute slack on the positivity and uncertainty bounds in [`check_physical`].
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;

const SYMMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MeasureError {
    #[error("mode index {index} out of range for {modes} modes")]
    IndexOutOfRange { index: usize, modes: usize },
    #[error("two-mode reduction needs distinct modes, got {0} twice")]
    EqualIndices(usize),
    #[error(
        "PPT symplectic eigenvalue is complex (discriminant {discriminant:e}); input is unphysical"
    )]
    ComplexEigenvalue { discriminant: f64 },
    #[error("eigenvalue computation did not converge")]
    EigenFailure,
    #[error("covariance matrix must be square with even dimension, got {rows}x{cols}")]
    BadShape { rows: usize, cols: usize },
    #[error("covariance matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("covariance matrix has non-finite entries")]
    NonFinite,
    #[error("occupation must be positive, got {0}")]
    NonpositiveOccupation(f64),
    #[error("frequency must be positive, got {0}")]
    NonpositiveFrequency(f64),
}

/// Symmetric `2n x 2n` covariance matrix in the vacuum-equals-identity
/// convention, quadratures interleaved as `(x_0, p_0, x_1, p_1, ...)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    data: DMatrix<f64>,
}

impl CovarianceMatrix {
    pub fn new(data: DMatrix<f64>) -> Result<Self, MeasureError> {
        let (rows, cols) = data.shape();
        if rows != cols || rows % 2 != 0 || rows == 0 {
            return Err(MeasureError::BadShape { rows, cols });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(MeasureError::NonFinite);
        }
        let asym = (&data - data.transpose()).amax();
        if asym > SYMMETRY_TOLERANCE * data.amax().max(1.0) {
            return Err(MeasureError::NotSymmetric(asym));
        }
        Ok(CovarianceMatrix { data })
    }

    /// Replaces `data` by its symmetric part before validating.
    pub fn from_symmetrized(data: DMatrix<f64>) -> Result<Self, MeasureError> {
        let sym = (&data + data.transpose()) * 0.5;
        CovarianceMatrix::new(sym)
    }

    /// Vacuum state of `modes` modes.
    pub fn vacuum(modes: usize) -> Self {
        CovarianceMatrix {
            data: DMatrix::identity(2 * modes, 2 * modes),
        }
    }

    pub fn num_modes(&self) -> usize {
        self.data.nrows() / 2
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.data
    }

    fn check_mode(&self, k: usize) -> Result<(), MeasureError> {
        if k >= self.num_modes() {
            Err(MeasureError::IndexOutOfRange {
                index: k,
                modes: self.num_modes(),
            })
        } else {
            Ok(())
        }
    }
}

/// Two-mode reduction with its named `2 x 2` blocks, in the same convention
/// as [`CovarianceMatrix`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoModeCovariance {
    pub block_k: Matrix2<f64>,
    pub block_m: Matrix2<f64>,
    /// Correlation block: rows from mode `k`, columns from mode `m`.
    pub corr: Matrix2<f64>,
}

impl TwoModeCovariance {
    pub fn new(block_k: Matrix2<f64>, block_m: Matrix2<f64>, corr: Matrix2<f64>) -> Self {
        TwoModeCovariance {
            block_k,
            block_m,
            corr,
        }
    }

    /// Splits a `4 x 4` matrix, which must be symmetric.
    pub fn from_matrix(full: &Matrix4<f64>) -> Result<Self, MeasureError> {
        let asym = (full - full.transpose()).amax();
        if asym > SYMMETRY_TOLERANCE * full.amax().max(1.0) {
            return Err(MeasureError::NotSymmetric(asym));
        }
        Ok(TwoModeCovariance {
            block_k: full.fixed_view::<2, 2>(0, 0).into_owned(),
            block_m: full.fixed_view::<2, 2>(2, 2).into_owned(),
            corr: full.fixed_view::<2, 2>(0, 2).into_owned(),
        })
    }

    pub fn assembled(&self) -> Matrix4<f64> {
        let mut out = Matrix4::zeros();
        out.fixed_view_mut::<2, 2>(0, 0).copy_from(&self.block_k);
        out.fixed_view_mut::<2, 2>(2, 2).copy_from(&self.block_m);
        out.fixed_view_mut::<2, 2>(0, 2).copy_from(&self.corr);
        out.fixed_view_mut::<2, 2>(2, 0)
            .copy_from(&self.corr.transpose());
        out
    }

    /// Relabels the two modes.
    pub fn swapped(&self) -> Self {
        TwoModeCovariance {
            block_k: self.block_m,
            block_m: self.block_k,
            corr: self.corr.transpose(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntanglementRecord {
    /// Smallest symplectic eigenvalue of the partially transposed state (`sigma` scale).
    pub nu_minus: f64,
    pub log_negativity: f64,
    pub separable: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalityReport {
    pub min_eigenvalue: f64,
    /// Smallest symplectic eigenvalue of `sigma = V / 2`; NaN if it could not be computed.
    pub min_symplectic_eigenvalue: f64,
    pub physical: bool,
}

pub fn reduce_single_mode(v: &CovarianceMatrix, k: usize) -> Result<Matrix2<f64>, MeasureError> {
    v.check_mode(k)?;
    Ok(v.data.fixed_view::<2, 2>(2 * k, 2 * k).into_owned())
}

pub fn reduce_two_mode(
    v: &CovarianceMatrix,
    k: usize,
    m: usize,
) -> Result<TwoModeCovariance, MeasureError> {
    v.check_mode(k)?;
    v.check_mode(m)?;
    if k == m {
        return Err(MeasureError::EqualIndices(k));
    }
    Ok(TwoModeCovariance {
        block_k: v.data.fixed_view::<2, 2>(2 * k, 2 * k).into_owned(),
        block_m: v.data.fixed_view::<2, 2>(2 * m, 2 * m).into_owned(),
        corr: v.data.fixed_view::<2, 2>(2 * k, 2 * m).into_owned(),
    })
}

fn omega4() -> Matrix4<f64> {
    Matrix4::new(
        0.0, 1.0, 0.0, 0.0, //
        -1.0, 0.0, 0.0, 0.0, //
        0.0, 0.0, 0.0, 1.0, //
        0.0, 0.0, -1.0, 0.0,
    )
}

/// Smallest symplectic eigenvalue of the partially transposed two-mode state,
/// on the `sigma = V / 2` scale.
///
/// `nu_-^2 = (D - sqrt(D^2 - 4 det sigma)) / 2` with
/// `D = det sigma_k + det sigma_m - 2 det sigma_km`. The discriminant
/// `D^2 - 4 det sigma` equals `(nu_+^2 - nu_-^2)^2` and is evaluated as
/// `tr(X^2)`, `X = K - tr(K)/4`, `K = -(Omega sigma~)^2`, which avoids the
/// cancellation that otherwise leaves an `O(sqrt(eps))` error in `nu_-` when
/// `nu_+ ~ nu_-` (e.g. near vacuum).
pub fn ppt_symplectic_min(tm: &TwoModeCovariance) -> Result<f64, MeasureError> {
    let sk = tm.block_k * 0.5;
    let sm = tm.block_m * 0.5;
    let sc = tm.corr * 0.5;
    let delta = sk.determinant() + sm.determinant() - 2.0 * sc.determinant();

    // partial transpose: p_m -> -p_m
    let mut pt = tm.assembled() * 0.5;
    for i in 0..4 {
        pt[(3, i)] = -pt[(3, i)];
        pt[(i, 3)] = -pt[(i, 3)];
    }
    let os = omega4() * pt;
    let k = -(os * os);
    let x = k - Matrix4::identity() * (k.trace() / 4.0);
    let mut disc = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            disc += x[(i, j)] * x[(j, i)];
        }
    }

    let scale = k.trace() * k.trace();
    if disc < -1e-12 * scale {
        return Err(MeasureError::ComplexEigenvalue { discriminant: disc });
    }
    let nu_sq = 0.5 * (delta - disc.max(0.0).sqrt());
    if nu_sq.is_nan() || nu_sq < 0.0 {
        return Err(MeasureError::ComplexEigenvalue { discriminant: disc });
    }
    Ok(nu_sq.sqrt())
}

/// Logarithmic negativity `max(0, -ln(2 nu_-))`.
pub fn log_negativity(tm: &TwoModeCovariance) -> Result<EntanglementRecord, MeasureError> {
    let nu = ppt_symplectic_min(tm)?;
    let separable = nu >= 0.5;
    let log_negativity = if separable { 0.0 } else { -(2.0 * nu).ln() };
    Ok(EntanglementRecord {
        nu_minus: nu,
        log_negativity,
        separable,
    })
}

/// Block-diagonal symplectic form of `n` modes.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * modes, 2 * modes);
    for k in 0..modes {
        omega[(2 * k, 2 * k + 1)] = 1.0;
        omega[(2 * k + 1, 2 * k)] = -1.0;
    }
    omega
}

/// Symplectic eigenvalues of `sigma = V / 2`: moduli of the eigenvalues of
/// `i Omega sigma`, ascending, one per mode.
///
/// For positive definite `sigma` they are the square roots of the (doubly
/// degenerate) eigenvalues of the symmetric `sigma^1/2 Omega sigma Omega^T sigma^1/2`,
/// which stays accurate when many modes share a value. Indefinite input
/// falls back to a nonsymmetric eigensolve.
pub fn symplectic_eigenvalues(v: &CovarianceMatrix) -> Result<Vec<f64>, MeasureError> {
    let n = v.num_modes();
    let sigma = v.matrix() * 0.5;
    let omega = symplectic_form(n);
    let eig = sigma.clone().symmetric_eigen();
    let mut squares: Vec<f64> = if eig.eigenvalues.min() > 0.0 {
        let root = &eig.eigenvectors
            * DMatrix::from_diagonal(&eig.eigenvalues.map(f64::sqrt))
            * eig.eigenvectors.transpose();
        let m = &root * &omega * &sigma * omega.transpose() * &root;
        let m = (&m + m.transpose()) * 0.5;
        m.symmetric_eigenvalues()
            .iter()
            .map(|x| x.max(0.0))
            .collect()
    } else {
        let schur = nalgebra::linalg::Schur::try_new(omega * sigma, f64::EPSILON, 10_000)
            .ok_or(MeasureError::EigenFailure)?;
        schur
            .complex_eigenvalues()
            .iter()
            .map(|z| z.norm_sqr())
            .collect()
    };
    squares.sort_by(f64::total_cmp);
    Ok(squares.chunks(2).map(|pair| pair[0].sqrt()).collect())
}

/// Positivity of `V` and the uncertainty bound `nu_k >= 1/2` on `sigma`, both
/// with slack [`PHYSICALITY_TOLERANCE`].
pub fn check_physical(v: &CovarianceMatrix) -> PhysicalityReport {
    let min_eigenvalue = v
        .matrix()
        .clone()
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    let min_symplectic_eigenvalue = symplectic_eigenvalues(v)
        .ok()
        .and_then(|s| s.first().copied())
        .unwrap_or(f64::NAN);
    let physical = min_eigenvalue >= -PHYSICALITY_TOLERANCE
        && min_symplectic_eigenvalue >= 0.5 - PHYSICALITY_TOLERANCE;
    PhysicalityReport {
        min_eigenvalue,
        min_symplectic_eigenvalue,
        physical,
    }
}

/// Mean excitation number of mode `k`, `<a^dag a> = (tr V_k - 2) / 4`.
/// A thermal block `(2 nbar + 1) I` gives `nbar`.
pub fn mean_occupation(v: &CovarianceMatrix, k: usize) -> Result<f64, MeasureError> {
    let block = reduce_single_mode(v, k)?;
    Ok((block.trace() - 2.0) / 4.0)
}

/// Temperature, in kelvin, of a bath whose Bose occupation at angular
/// frequency `omega` (rad/s) equals `nbar`.
pub fn effective_temperature(nbar: f64, omega: f64) -> Result<f64, MeasureError> {
    if nbar.is_nan() || nbar <= 0.0 {
        return Err(MeasureError::NonpositiveOccupation(nbar));
    }
    if omega.is_nan() || omega <= 0.0 {
        return Err(MeasureError::NonpositiveFrequency(omega));
    }
    Ok(HBAR * omega / (K_BOLTZMANN * (1.0 / nbar).ln_1p()))
}
