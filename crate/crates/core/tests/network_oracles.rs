use approx::assert_abs_diff_eq;
use cvroute::network::{build_dynamical_matrix, build_input_matrix, build_noise_matrix};
use cvroute::{Direction, NetworkConfig, SystemMatrices};
use nalgebra::DMatrix;

fn net(m: usize, r: f64, j: f64, dir: Direction) -> cvroute::ValidatedNetwork {
    let mut cfg = NetworkConfig::with_chain_len(m);
    cfg.r = r;
    cfg.j = j;
    cfg.direction = dir;
    cfg.validate().unwrap()
}

/// Drift matrix for M = 2 written out by hand from the quadrature equations
///   dx0 = -(g0/2 + r) x0 + w p0 + j p1
///   dp0 = -w x0 - (g0/2 - r) p0 - j x1
///   dx1 = j p0 - g1/2 x1 + w p1
///   dp1 = -j x0 - w x1 - g1/2 p1
///   dx2 = -g x1 - g2/2 x2 + w p2
///   dp2 = -g p1 - w x2 - g2/2 p2
#[test]
fn m2_forward_drift_matches_hand_written_equations() {
    let (r, j, g, go) = (0.13, 0.41, 0.8, 0.002);
    let g0 = go;
    let g1 = go + g;
    let g2 = go + g;
    #[rustfmt::skip]
    let expected = DMatrix::from_row_slice(6, 6, &[
        -(g0 / 2.0 + r), 1.0,             0.0,       j,         0.0,       0.0,
        -1.0,            -(g0 / 2.0 - r), -j,        0.0,       0.0,       0.0,
        0.0,             j,               -g1 / 2.0, 1.0,       0.0,       0.0,
        -j,              0.0,             -1.0,      -g1 / 2.0, 0.0,       0.0,
        0.0,             0.0,             -g,        0.0,       -g2 / 2.0, 1.0,
        0.0,             0.0,             0.0,       -g,        -1.0,      -g2 / 2.0,
    ]);
    let a = build_dynamical_matrix(&net(2, r, j, Direction::Forward));
    assert!((a - expected).amax() < 1e-15);
}

#[test]
fn m2_drift_by_finite_differences_of_the_vector_field() {
    // Recover A column by column from the linear drift f(v) = A v,
    // with f written component-wise, and compare.
    let (r, j, g, go) = (0.27, 0.33, 0.8, 0.002);
    let field = |v: &[f64; 6]| -> [f64; 6] {
        let [x0, p0, x1, p1, x2, p2] = *v;
        let g0 = go;
        let g1 = go + g;
        [
            -(g0 / 2.0 + r) * x0 + p0 + j * p1,
            -x0 - (g0 / 2.0 - r) * p0 - j * x1,
            j * p0 - g1 / 2.0 * x1 + p1,
            -j * x0 - x1 - g1 / 2.0 * p1,
            -g * x1 - g1 / 2.0 * x2 + p2,
            -g * p1 - x2 - g1 / 2.0 * p2,
        ]
    };
    let h = 1e-6;
    let mut fd = DMatrix::zeros(6, 6);
    for col in 0..6 {
        let mut plus = [0.0; 6];
        let mut minus = [0.0; 6];
        plus[col] = h;
        minus[col] = -h;
        let (fp, fm) = (field(&plus), field(&minus));
        for row in 0..6 {
            fd[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    let a = build_dynamical_matrix(&net(2, r, j, Direction::Forward));
    assert!((a - fd).amax() < 1e-9);
}

#[test]
fn noise_matches_elementwise_sum_over_baths() {
    let mut cfg = NetworkConfig::with_chain_len(5);
    cfg.nbar_local = vec![0.1, 0.0, 0.3, 2.0, 0.05, 0.7];
    cfg.nbar_common = vec![0.2, 0.0, 1.5, 0.4];
    cfg.r = 0.2;
    cfg.j = 0.6;
    let v = cfg.validate().unwrap();
    let b = build_input_matrix(&v);
    let n = build_noise_matrix(&v);

    let occupations: Vec<f64> = cfg
        .nbar_local
        .iter()
        .chain(&cfg.nbar_common)
        .copied()
        .collect();
    let mut oracle = DMatrix::zeros(b.nrows(), b.nrows());
    for i in 0..b.nrows() {
        for k in 0..b.nrows() {
            let mut acc = 0.0;
            for q in 0..b.ncols() {
                acc += b[(i, q)] * b[(k, q)] * (2.0 * occupations[q / 2] + 1.0);
            }
            oracle[(i, k)] = acc;
        }
    }
    assert!((&n - &oracle).amax() <= 1e-14);
    assert_eq!(n, n.transpose());
}

#[test]
fn input_columns_carry_one_decay_rate_each() {
    let m = 6;
    let v = net(m, 0.1, 0.2, Direction::Forward);
    let b = build_input_matrix(&v);
    assert_eq!(b.ncols(), 2 * (2 * m));
    for (q, col) in b.column_iter().enumerate() {
        let power: f64 = col.iter().map(|x| x * x).sum();
        let expected = if q / 2 <= m { 0.002 } else { 2.0 * 0.8 };
        assert_abs_diff_eq!(power, expected, epsilon = 1e-15);
    }
}

#[test]
fn vacuum_baths_balance_the_damping() {
    // With r = 0 and vacuum baths, A + A^T + N = 0, so V = I solves the
    // Lyapunov equation for every hopping strength and direction.
    for m in [1, 2, 5, 10] {
        for dir in [Direction::Forward, Direction::Backward] {
            for j in [0.0, 0.35, 1.0] {
                let s = SystemMatrices::build(&net(m, 0.0, j, dir));
                let sum = &s.a + s.a.transpose() + &s.n;
                assert!(sum.amax() <= 1e-12, "M={m} {dir} j={j}: {}", sum.amax());
            }
        }
    }
}

#[test]
fn noise_is_positive_semidefinite() {
    let mut cfg = NetworkConfig::with_chain_len(8);
    cfg.nbar_local = (0..9).map(|k| 0.1 * k as f64).collect();
    cfg.nbar_common = (0..7).map(|k| 0.3 * k as f64).collect();
    let n = build_noise_matrix(&cfg.validate().unwrap());
    let min = n.symmetric_eigenvalues().min();
    assert!(min >= -1e-14, "{min}");
}

#[test]
fn direction_only_moves_the_source_hop() {
    let m = 7;
    let fwd = build_dynamical_matrix(&net(m, 0.3, 0.45, Direction::Forward));
    let bwd = build_dynamical_matrix(&net(m, 0.3, 0.45, Direction::Backward));
    let diff = fwd - bwd;
    let touched = [(0, 1), (1, 0), (0, m), (m, 0)];
    for bi in 0..=m {
        for bj in 0..=m {
            let block = diff.view((2 * bi, 2 * bj), (2, 2)).amax();
            if touched.contains(&(bi, bj)) {
                assert_abs_diff_eq!(block, 0.45, epsilon = 1e-15);
            } else {
                assert_eq!(block, 0.0, "block ({bi},{bj})");
            }
        }
    }
}

#[test]
fn rates_are_scaled_by_the_common_frequency() {
    let mut cfg = NetworkConfig::with_chain_len(3);
    cfg.omega = vec![2.0; 4];
    cfg.gamma = 1.6;
    cfg.gamma_out = 0.004;
    cfg.r = 0.2;
    cfg.j = 1.0;
    let scaled = SystemMatrices::build(&cfg.validate().unwrap());

    let mut unit = NetworkConfig::with_chain_len(3);
    unit.r = 0.1;
    unit.j = 0.5;
    let reference = SystemMatrices::build(&unit.validate().unwrap());
    assert!((scaled.a - reference.a).amax() < 1e-15);
    assert!((scaled.n - reference.n).amax() < 1e-15);
}
