#![allow(dead_code)]

use nalgebra::{DMatrix, Matrix2, Matrix4};
use rand::Rng;

/// Random `A` with spectral abscissa in `[-1.0, -0.05]` and random PSD `N`.
pub fn random_stable_system<R: Rng>(rng: &mut R, dim: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let x = DMatrix::from_fn(dim, dim, |_, _| rng.gen_range(-1.0..1.0));
    let abscissa = cvroute::lyapunov::spectral_abscissa(&x).unwrap();
    let target = rng.gen_range(-1.0..-0.05);
    let a = x - DMatrix::identity(dim, dim) * (abscissa - target);
    let cols = rng.gen_range(1..=dim);
    let b = DMatrix::from_fn(dim, cols, |_, _| rng.gen_range(-1.0..1.0));
    let n = &b * b.transpose();
    (a, (&n + n.transpose()) * 0.5)
}

/// Right-hand side of `dV/dt = A V + V A^T + N`.
fn lyapunov_rhs(a: &DMatrix<f64>, n: &DMatrix<f64>, v: &DMatrix<f64>) -> DMatrix<f64> {
    a * v + v * a.transpose() + n
}

/// Fixed-step classical RK4 integration of the covariance equation.
pub fn rk4_covariance(
    a: &DMatrix<f64>,
    n: &DMatrix<f64>,
    v0: &DMatrix<f64>,
    t: f64,
    steps: usize,
) -> DMatrix<f64> {
    let h = t / steps as f64;
    let mut v = v0.clone();
    for _ in 0..steps {
        let k1 = lyapunov_rhs(a, n, &v);
        let k2 = lyapunov_rhs(a, n, &(&v + &k1 * (h / 2.0)));
        let k3 = lyapunov_rhs(a, n, &(&v + &k2 * (h / 2.0)));
        let k4 = lyapunov_rhs(a, n, &(&v + &k3 * h));
        v += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
    }
    v
}

fn rotation(theta: f64) -> Matrix2<f64> {
    let (s, c) = theta.sin_cos();
    Matrix2::new(c, s, -s, c)
}

fn squeezer(s: f64) -> Matrix2<f64> {
    Matrix2::new((-s).exp(), 0.0, 0.0, s.exp())
}

pub fn local(s1: Matrix2<f64>, s2: Matrix2<f64>) -> Matrix4<f64> {
    let mut out = Matrix4::zeros();
    out.fixed_view_mut::<2, 2>(0, 0).copy_from(&s1);
    out.fixed_view_mut::<2, 2>(2, 2).copy_from(&s2);
    out
}

pub fn random_local_rotation<R: Rng>(rng: &mut R) -> Matrix2<f64> {
    rotation(rng.gen_range(0.0..std::f64::consts::TAU))
}

fn random_single_mode<R: Rng>(rng: &mut R, max_squeeze: f64) -> Matrix2<f64> {
    random_local_rotation(rng)
        * squeezer(rng.gen_range(-max_squeeze..max_squeeze))
        * random_local_rotation(rng)
}

fn beam_splitter(theta: f64) -> Matrix4<f64> {
    let (s, c) = theta.sin_cos();
    let id = Matrix2::identity();
    let mut out = Matrix4::zeros();
    out.fixed_view_mut::<2, 2>(0, 0).copy_from(&(id * c));
    out.fixed_view_mut::<2, 2>(0, 2).copy_from(&(id * s));
    out.fixed_view_mut::<2, 2>(2, 0).copy_from(&(id * -s));
    out.fixed_view_mut::<2, 2>(2, 2).copy_from(&(id * c));
    out
}

fn two_mode_squeezer(s: f64) -> Matrix4<f64> {
    let id = Matrix2::identity() * s.cosh();
    let z = Matrix2::new(1.0, 0.0, 0.0, -1.0) * s.sinh();
    let mut out = Matrix4::zeros();
    out.fixed_view_mut::<2, 2>(0, 0).copy_from(&id);
    out.fixed_view_mut::<2, 2>(0, 2).copy_from(&z);
    out.fixed_view_mut::<2, 2>(2, 0).copy_from(&z);
    out.fixed_view_mut::<2, 2>(2, 2).copy_from(&id);
    out
}

pub fn omega4() -> Matrix4<f64> {
    let j = Matrix2::new(0.0, 1.0, -1.0, 0.0);
    local(j, j)
}

/// Random two-mode symplectic matrix with every squeezing parameter bounded
/// by `max_squeeze`.
pub fn random_symplectic<R: Rng>(rng: &mut R, max_squeeze: f64) -> Matrix4<f64> {
    let l1 = local(
        random_single_mode(rng, max_squeeze),
        random_single_mode(rng, max_squeeze),
    );
    let l2 = local(
        random_single_mode(rng, max_squeeze),
        random_single_mode(rng, max_squeeze),
    );
    let bs = beam_splitter(rng.gen_range(0.0..std::f64::consts::TAU));
    let tms = two_mode_squeezer(rng.gen_range(-max_squeeze..max_squeeze));
    l2 * bs * tms * l1
}

/// Random physical two-mode covariance matrix in the vacuum-equals-identity
/// convention: `V = 2 S diag(nu1, nu1, nu2, nu2) S^T` with `nu >= 1/2`.
pub fn random_two_mode_state<R: Rng>(rng: &mut R, max_squeeze: f64) -> Matrix4<f64> {
    let s = random_symplectic(rng, max_squeeze);
    let nu1 = if rng.gen_bool(0.3) {
        0.5
    } else {
        rng.gen_range(0.5..3.0)
    };
    let nu2 = if rng.gen_bool(0.3) {
        0.5
    } else {
        rng.gen_range(0.5..3.0)
    };
    let d = Matrix4::from_diagonal(&nalgebra::Vector4::new(nu1, nu1, nu2, nu2));
    let v = s * d * s.transpose() * 2.0;
    (v + v.transpose()) * 0.5
}

/// Smallest modulus among the eigenvalues of `Omega sigma~`, where
/// `sigma~ = V~ / 2` is the partial transpose on the second mode.
pub fn ppt_eigen_oracle(v: &Matrix4<f64>) -> f64 {
    let mut pt = v * 0.5;
    for i in 0..4 {
        pt[(3, i)] = -pt[(3, i)];
        pt[(i, 3)] = -pt[(i, 3)];
    }
    let m = omega4() * pt;
    let dm = DMatrix::from_column_slice(4, 4, m.as_slice());
    dm.complex_eigenvalues()
        .iter()
        .map(|z| z.norm())
        .fold(f64::INFINITY, f64::min)
}

/// Two-mode squeezed vacuum with squeezing `s`, vacuum-equals-identity.
pub fn tmsv(s: f64) -> Matrix4<f64> {
    let c = (2.0 * s).cosh();
    let sh = (2.0 * s).sinh();
    Matrix4::new(
        c, 0.0, sh, 0.0, //
        0.0, c, 0.0, -sh, //
        sh, 0.0, c, 0.0, //
        0.0, -sh, 0.0, c,
    )
}
