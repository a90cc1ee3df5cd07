//! Stability analysis and solution of `dV/dt = A V + V A^T + N`.
//!
//! Two independent steady-state routes are provided: a spectral solution in
//! the eigenbasis of `A`, and a direct linear solve of the vectorized
//! equation. The spectral route needs a well-conditioned eigenbasis; when
//! `A` is (numerically) defective, as the cascaded chain is for more than a
//! few nodes, [`solve_steady_state_spectral`] switches to the vectorized solve.

use nalgebra::linalg::Schur;
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

use crate::gaussian::{CovarianceMatrix, MeasureError};

/// Default stability margin, in units of the node frequency.
pub const DEFAULT_STABILITY_MARGIN: f64 = 1e-9;
/// Largest accepted eigenvector condition number for the spectral route.
pub const MAX_EIGENVECTOR_CONDITION: f64 = 1e8;
/// Largest accepted relative reconstruction error `|A - P D P^-1| / |A|`.
pub const MAX_RECONSTRUCTION_ERROR: f64 = 1e-10;
/// Relative residual bound every returned steady state satisfies.
pub const RESIDUAL_TOLERANCE: f64 = 1e-8;
/// Largest imaginary part tolerated before a complex reconstruction is made real.
pub const IMAGINARY_TOLERANCE: f64 = 1e-10;
/// Below this `|alpha_j + alpha_k|` the evolution kernel uses its `t` limit.
pub const DEGENERATE_PAIR_TOLERANCE: f64 = 1e-12;

const SCHUR_MAX_ITER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LyapunovError {
    #[error("eigenvalue computation did not converge")]
    EigenFailure,
    #[error("matrix must be square, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: A is {a}x{a}, other operand is {rows}x{cols}")]
    DimensionMismatch { a: usize, rows: usize, cols: usize },
    #[error("dynamics not asymptotically stable (spectral abscissa {abscissa:e})")]
    Unstable { abscissa: f64 },
    #[error("eigenvector basis ill-conditioned (condition number {condition:e})")]
    IllConditioned { condition: f64 },
    #[error("Lyapunov operator is singular")]
    SingularSystem,
    #[error("steady state residual {residual:e} exceeds bound {bound:e}")]
    ResidualTooLarge { residual: f64, bound: f64 },
    #[error("evolution time must be finite and nonnegative, got {0}")]
    InvalidTime(f64),
    #[error(transparent)]
    Covariance(#[from] MeasureError),
}

fn check_square(a: &DMatrix<f64>) -> Result<usize, LyapunovError> {
    let (rows, cols) = a.shape();
    if rows != cols {
        return Err(LyapunovError::NotSquare { rows, cols });
    }
    Ok(rows)
}

fn check_same_dim(a: &DMatrix<f64>, other: &DMatrix<f64>) -> Result<usize, LyapunovError> {
    let n = check_square(a)?;
    let (rows, cols) = other.shape();
    if rows != n || cols != n {
        return Err(LyapunovError::DimensionMismatch { a: n, rows, cols });
    }
    Ok(n)
}

/// Eigenvalues of a real square matrix (real Schur form).
pub fn eigenvalues(a: &DMatrix<f64>) -> Result<Vec<Complex64>, LyapunovError> {
    check_square(a)?;
    let schur = Schur::try_new(a.clone(), f64::EPSILON, SCHUR_MAX_ITER)
        .ok_or(LyapunovError::EigenFailure)?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

/// Largest real part over the eigenvalues of `a`.
pub fn spectral_abscissa(a: &DMatrix<f64>) -> Result<f64, LyapunovError> {
    Ok(eigenvalues(a)?
        .iter()
        .map(|z| z.re)
        .fold(f64::NEG_INFINITY, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StabilityClass {
    Stable,
    /// `|abscissa|` below the margin; treated as not stable.
    Marginal,
    Unstable,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityReport {
    pub spectral_abscissa: f64,
    pub stable: bool,
    pub margin_tolerance: f64,
}

impl StabilityReport {
    pub fn from_abscissa(spectral_abscissa: f64, margin_tolerance: f64) -> Self {
        StabilityReport {
            spectral_abscissa,
            stable: spectral_abscissa < -margin_tolerance,
            margin_tolerance,
        }
    }

    pub fn class(&self) -> StabilityClass {
        if self.stable {
            StabilityClass::Stable
        } else if self.spectral_abscissa.abs() <= self.margin_tolerance {
            StabilityClass::Marginal
        } else {
            StabilityClass::Unstable
        }
    }
}

pub fn stability_report(a: &DMatrix<f64>, margin: f64) -> Result<StabilityReport, LyapunovError> {
    Ok(StabilityReport::from_abscissa(
        spectral_abscissa(a)?,
        margin,
    ))
}

/// `A = P diag(alpha) P^-1` over the complex numbers.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<Complex64>,
    /// Right eigenvectors as unit-norm columns.
    pub p: DMatrix<Complex64>,
    pub p_inv: DMatrix<Complex64>,
    /// 2-norm condition number of `p`.
    pub condition_number: f64,
    /// `|A - P D P^-1|_F / |A|_F`.
    pub reconstruction_error: f64,
}

impl SpectralDecomposition {
    /// Complex Schur form `A = Q T Q^*`, then eigenvectors of the triangular
    /// `T` by back substitution.
    pub fn new(a: &DMatrix<f64>) -> Result<Self, LyapunovError> {
        let n = check_square(a)?;
        let ac = a.map(|x| Complex64::new(x, 0.0));
        let schur = Schur::try_new(ac.clone(), f64::EPSILON, SCHUR_MAX_ITER)
            .ok_or(LyapunovError::EigenFailure)?;
        let (q, t) = schur.unpack();
        let eigenvalues: Vec<Complex64> = (0..n).map(|i| t[(i, i)]).collect();

        // Tiny denominators are floored, as in LAPACK's xTREVC.
        let small = (f64::EPSILON * t.norm()).max(f64::MIN_POSITIVE);
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            y[(k, k)] = Complex64::new(1.0, 0.0);
            for i in (0..k).rev() {
                let mut acc = Complex64::new(0.0, 0.0);
                for l in (i + 1)..=k {
                    acc += t[(i, l)] * y[(l, k)];
                }
                let mut denom = t[(i, i)] - t[(k, k)];
                if denom.norm() < small {
                    denom = Complex64::new(small, 0.0);
                }
                y[(i, k)] = -acc / denom;
            }
        }
        let mut p = q * y;
        for mut col in p.column_iter_mut() {
            let norm = col.norm();
            if norm > 0.0 {
                col /= Complex64::new(norm, 0.0);
            }
        }

        let singular = p.clone().singular_values();
        let smax = singular.max();
        let smin = singular.min();
        let condition_number = if smin > 0.0 {
            smax / smin
        } else {
            f64::INFINITY
        };
        let p_inv = p
            .clone()
            .try_inverse()
            .ok_or(LyapunovError::IllConditioned {
                condition: f64::INFINITY,
            })?;

        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(eigenvalues.clone()));
        let recon = &p * d * &p_inv - &ac;
        let scale = ac.norm().max(f64::MIN_POSITIVE);
        Ok(SpectralDecomposition {
            eigenvalues,
            p,
            p_inv,
            condition_number,
            reconstruction_error: recon.norm() / scale,
        })
    }

    pub fn is_well_conditioned(&self) -> bool {
        self.condition_number <= MAX_EIGENVECTOR_CONDITION
            && self.reconstruction_error <= MAX_RECONSTRUCTION_ERROR
    }

    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|z| z.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn require_conditioned(&self) -> Result<(), LyapunovError> {
        if self.is_well_conditioned() {
            Ok(())
        } else {
            Err(LyapunovError::IllConditioned {
                condition: self.condition_number,
            })
        }
    }

    /// `P^-1 X P^-T`: `X` expressed in the eigenbasis of `A` (left) and `A^T` (right).
    fn to_eigenbasis(&self, x: &DMatrix<f64>) -> DMatrix<Complex64> {
        let xc = x.map(|v| Complex64::new(v, 0.0));
        &self.p_inv * xc * self.p_inv.transpose()
    }

    /// `P W P^T`, checked to be real.
    fn to_physical_basis(&self, w: &DMatrix<Complex64>) -> Result<DMatrix<f64>, LyapunovError> {
        let v = &self.p * w * self.p.transpose();
        let re = v.map(|z| z.re);
        let im = v.map(|z| z.im).amax();
        let bound = IMAGINARY_TOLERANCE * re.amax().max(1.0);
        if im > bound {
            return Err(LyapunovError::ResidualTooLarge {
                residual: im,
                bound,
            });
        }
        Ok(re)
    }

    /// Steady state `V = P [G o (P^-1 N P^-T)] P^T`, `G_jk = -1 / (alpha_j + alpha_k)`.
    /// Fails with `IllConditioned` instead of falling back.
    pub fn steady_state(
        &self,
        a: &DMatrix<f64>,
        n: &DMatrix<f64>,
        margin: f64,
    ) -> Result<CovarianceMatrix, LyapunovError> {
        check_same_dim(a, n)?;
        let abscissa = self.spectral_abscissa();
        if abscissa >= -margin {
            return Err(LyapunovError::Unstable { abscissa });
        }
        self.require_conditioned()?;
        let mut w = self.to_eigenbasis(n);
        for ((j, k), entry) in indexed_mut(&mut w) {
            *entry *= -(self.eigenvalues[j] + self.eigenvalues[k]).inv();
        }
        let v = self.to_physical_basis(&w)?;
        finish_steady_state(a, n, v)
    }

    /// Closed-form `V(t)` for `t >= 0`.
    pub fn evolve(
        &self,
        n: &DMatrix<f64>,
        v0: &CovarianceMatrix,
        t: f64,
    ) -> Result<CovarianceMatrix, LyapunovError> {
        self.require_conditioned()?;
        let mut driven = self.to_eigenbasis(n);
        let mut initial = self.to_eigenbasis(v0.matrix());
        for ((j, k), entry) in indexed_mut(&mut driven) {
            *entry *= accumulation_kernel(self.eigenvalues[j] + self.eigenvalues[k], t);
        }
        for ((j, k), entry) in indexed_mut(&mut initial) {
            *entry *= ((self.eigenvalues[j] + self.eigenvalues[k]) * t).exp();
        }
        let v = self.to_physical_basis(&(driven + initial))?;
        Ok(CovarianceMatrix::from_symmetrized(v)?)
    }
}

fn indexed_mut(
    m: &mut DMatrix<Complex64>,
) -> impl Iterator<Item = ((usize, usize), &mut Complex64)> {
    let rows = m.nrows();
    m.iter_mut()
        .enumerate()
        .map(move |(idx, v)| ((idx % rows, idx / rows), v))
}

/// `int_0^t exp(s (t - u)) du`, with the `t` limit for `s ~ 0`.
fn accumulation_kernel(s: Complex64, t: f64) -> Complex64 {
    if s.norm() < DEGENERATE_PAIR_TOLERANCE {
        return Complex64::new(t, 0.0);
    }
    let st = s * t;
    if st.norm() < 1e-5 {
        // series avoids cancellation in exp(st) - 1
        Complex64::new(t, 0.0) * (Complex64::new(1.0, 0.0) + st / 2.0 + st * st / 6.0)
    } else {
        (st.exp() - 1.0) / s
    }
}

/// `max_ij |A V + V A^T + N|`.
pub fn lyapunov_residual(a: &DMatrix<f64>, v: &DMatrix<f64>, n: &DMatrix<f64>) -> f64 {
    (a * v + v * a.transpose() + n).amax()
}

fn finish_steady_state(
    a: &DMatrix<f64>,
    n: &DMatrix<f64>,
    v: DMatrix<f64>,
) -> Result<CovarianceMatrix, LyapunovError> {
    let v = (&v + v.transpose()) * 0.5;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(LyapunovError::SingularSystem);
    }
    let residual = lyapunov_residual(a, &v, n);
    let bound = RESIDUAL_TOLERANCE * n.amax().max(1.0);
    if residual.is_nan() || residual > bound {
        return Err(LyapunovError::ResidualTooLarge { residual, bound });
    }
    Ok(CovarianceMatrix::new(v)?)
}

/// Steady state through the eigenbasis of `A`, switching to
/// [`solve_steady_state_vectorized`] when the eigenbasis is ill-conditioned
/// or the spectral reconstruction misses the residual bound.
pub fn solve_steady_state_spectral(
    a: &DMatrix<f64>,
    n: &DMatrix<f64>,
) -> Result<CovarianceMatrix, LyapunovError> {
    check_same_dim(a, n)?;
    let report = stability_report(a, DEFAULT_STABILITY_MARGIN)?;
    if !report.stable {
        return Err(LyapunovError::Unstable {
            abscissa: report.spectral_abscissa,
        });
    }
    let spectral =
        SpectralDecomposition::new(a).and_then(|d| d.steady_state(a, n, DEFAULT_STABILITY_MARGIN));
    match spectral {
        Ok(v) => Ok(v),
        Err(LyapunovError::IllConditioned { .. } | LyapunovError::ResidualTooLarge { .. }) => {
            solve_steady_state_vectorized(a, n)
        }
        Err(e) => Err(e),
    }
}

/// Position of `V_ij` (`i <= j`) in the packed upper triangle.
fn packed_index(n: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * n - i * (i + 1) / 2 + j
}

/// Direct solve of `(A (x) I + I (x) A) vec(V) = -vec(N)`.
///
/// The system is restricted to symmetric `V`, one unknown per entry of the
/// upper triangle, which has the same solution whenever the full Kronecker
/// system is nonsingular and needs `n(n+1)/2` rather than `n^2` unknowns.
/// Does not check stability: for unstable `A` the result is the formal
/// fixed point of the Lyapunov equation.
pub fn solve_steady_state_vectorized(
    a: &DMatrix<f64>,
    n: &DMatrix<f64>,
) -> Result<CovarianceMatrix, LyapunovError> {
    let dim = check_same_dim(a, n)?;
    let unknowns = dim * (dim + 1) / 2;
    let mut op = DMatrix::<f64>::zeros(unknowns, unknowns);
    let mut rhs = nalgebra::DVector::<f64>::zeros(unknowns);
    for i in 0..dim {
        for j in i..dim {
            let row = packed_index(dim, i, j);
            rhs[row] = -n[(i, j)];
            for k in 0..dim {
                op[(row, packed_index(dim, k, j))] += a[(i, k)];
                op[(row, packed_index(dim, i, k))] += a[(j, k)];
            }
        }
    }
    let x = op.lu().solve(&rhs).ok_or(LyapunovError::SingularSystem)?;
    let mut v = DMatrix::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let value = x[packed_index(dim, i, j)];
            v[(i, j)] = value;
            v[(j, i)] = value;
        }
    }
    finish_steady_state(a, n, v)
}

/// Covariance matrix at time `t` starting from `v0`.
///
/// Uses the eigenbasis closed form when `A` is well-conditioned. Otherwise,
/// for stable `A`, `V(t) = V_inf + e^{At} (V0 - V_inf) e^{A^T t}`; for
/// non-stable `A`, the Gramian `int_0^t e^{As} N e^{A^T s} ds` comes from the
/// exponential of the block matrix `[[A, N], [0, -A^T]] t`.
pub fn evolve_covariance(
    a: &DMatrix<f64>,
    n: &DMatrix<f64>,
    v0: &CovarianceMatrix,
    t: f64,
) -> Result<CovarianceMatrix, LyapunovError> {
    let dim = check_same_dim(a, n)?;
    check_same_dim(a, v0.matrix())?;
    if !t.is_finite() || t < 0.0 {
        return Err(LyapunovError::InvalidTime(t));
    }
    if t == 0.0 {
        return Ok(v0.clone());
    }

    if let Ok(decomp) = SpectralDecomposition::new(a) {
        if decomp.is_well_conditioned() {
            return decomp.evolve(n, v0, t);
        }
    }

    let report = stability_report(a, DEFAULT_STABILITY_MARGIN)?;
    let v = if report.stable {
        let steady = solve_steady_state_vectorized(a, n)?.into_matrix();
        let phi = (a * t).exp();
        &phi * (v0.matrix() - &steady) * phi.transpose() + steady
    } else {
        let mut block = DMatrix::<f64>::zeros(2 * dim, 2 * dim);
        block.view_mut((0, 0), (dim, dim)).copy_from(a);
        block.view_mut((0, dim), (dim, dim)).copy_from(n);
        block
            .view_mut((dim, dim), (dim, dim))
            .copy_from(&(-a.transpose()));
        let e = (block * t).exp();
        let phi = e.view((0, 0), (dim, dim)).into_owned();
        let g = e.view((0, dim), (dim, dim)).into_owned();
        &phi * v0.matrix() * phi.transpose() + g * phi.transpose()
    };
    if v.iter().any(|x| !x.is_finite()) {
        return Err(LyapunovError::IllConditioned {
            condition: f64::INFINITY,
        });
    }
    Ok(CovarianceMatrix::from_symmetrized(v)?)
}
