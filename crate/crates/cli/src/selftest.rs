use cvroute::gaussian::{log_negativity, mean_occupation, reduce_single_mode};
use cvroute::lyapunov::{
    lyapunov_residual, solve_steady_state_vectorized, SpectralDecomposition,
    DEFAULT_STABILITY_MARGIN,
};
use cvroute::preset::Preset;
use cvroute::{NetworkConfig, SystemMatrices, TwoModeCovariance};
use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::CliError;

struct Fixture {
    name: &'static str,
    expected: String,
    got: f64,
    deviation: f64,
    tolerance: f64,
}

impl Fixture {
    fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

fn build(cfg: &NetworkConfig) -> SystemMatrices {
    SystemMatrices::build(&cfg.validate().expect("fixture configs are valid"))
}

fn solved(cfg: &NetworkConfig) -> Result<DMatrix<f64>, String> {
    let s = build(cfg);
    cvroute::lyapunov::solve_steady_state_spectral(&s.a, &s.n)
        .map(|v| v.into_matrix())
        .map_err(|e| e.to_string())
}

fn vacuum() -> Result<Fixture, String> {
    let mut cfg = NetworkConfig::default();
    cfg.j = 0.5;
    let v = solved(&cfg)?;
    let dev = (&v - DMatrix::identity(v.nrows(), v.ncols())).amax();
    Ok(Fixture {
        name: "vacuum fixed point, max |V - I|",
        expected: "0".into(),
        got: dev,
        deviation: dev,
        tolerance: 1e-8,
    })
}

fn thermal() -> Result<Fixture, String> {
    let mut cfg = NetworkConfig::with_chain_len(1);
    cfg.nbar_local = vec![0.7, 0.7];
    let s = build(&cfg);
    let v =
        cvroute::lyapunov::solve_steady_state_spectral(&s.a, &s.n).map_err(|e| e.to_string())?;
    let block_dev =
        (reduce_single_mode(&v, 0).map_err(|e| e.to_string())? - Matrix2::identity() * 2.4).amax();
    let occ = mean_occupation(&v, 0).map_err(|e| e.to_string())?;
    Ok(Fixture {
        name: "thermal mode occupation",
        expected: "0.7".into(),
        got: occ,
        deviation: (occ - 0.7).abs().max(block_dev),
        tolerance: 1e-10,
    })
}

fn tmsv() -> Result<Fixture, String> {
    let s = 0.5f64;
    let (c, sh) = ((2.0 * s).cosh(), (2.0 * s).sinh());
    let v = Matrix4::new(
        c, 0.0, sh, 0.0, //
        0.0, c, 0.0, -sh, //
        sh, 0.0, c, 0.0, //
        0.0, -sh, 0.0, c,
    );
    let tm = TwoModeCovariance::from_matrix(&v).map_err(|e| e.to_string())?;
    let en = log_negativity(&tm)
        .map_err(|e| e.to_string())?
        .log_negativity;
    Ok(Fixture {
        name: "two-mode squeezed vacuum E_N (s = 0.5)",
        expected: "1 (= 2s)".into(),
        got: en,
        deviation: (en - 2.0 * s).abs(),
        tolerance: 1e-10,
    })
}

fn solver_cross_check() -> Result<Fixture, String> {
    // Short chain whose eigenbasis is well conditioned, so both solvers run
    // their own algorithm.
    let mut cfg = NetworkConfig::with_chain_len(2);
    cfg.r = 0.1;
    cfg.j = 0.5;
    let s = build(&cfg);
    let decomp = SpectralDecomposition::new(&s.a).map_err(|e| e.to_string())?;
    let spectral = decomp
        .steady_state(&s.a, &s.n, DEFAULT_STABILITY_MARGIN)
        .map_err(|e| e.to_string())?;
    let direct = solve_steady_state_vectorized(&s.a, &s.n).map_err(|e| e.to_string())?;
    let rel = (spectral.matrix() - direct.matrix()).norm() / direct.matrix().norm();
    let resid = lyapunov_residual(&s.a, spectral.matrix(), &s.n) / s.n.amax();
    Ok(Fixture {
        name: "eigenbasis vs Kronecker solve, relative difference",
        expected: "0".into(),
        got: rel,
        deviation: rel.max(resid),
        tolerance: 1e-8,
    })
}

fn temperature() -> Result<Fixture, String> {
    let t = Preset::Microwave
        .effective_temperature(0.01)
        .map_err(|e| e.to_string())?;
    Ok(Fixture {
        name: "T_eff at nbar = 0.01, 5 GHz (K)",
        expected: "0.052".into(),
        got: t,
        deviation: (t - 0.052).abs(),
        tolerance: 1e-3,
    })
}

pub fn run() -> Result<(), CliError> {
    let fixtures: [(&str, fn() -> Result<Fixture, String>); 5] = [
        ("vacuum", vacuum),
        ("thermal", thermal),
        ("tmsv", tmsv),
        ("solver", solver_cross_check),
        ("temperature", temperature),
    ];
    let mut failed = 0;
    for (label, fixture) in fixtures {
        match fixture() {
            Ok(f) => {
                let status = if f.passed() { "PASS" } else { "FAIL" };
                if !f.passed() {
                    failed += 1;
                }
                println!(
                    "{status}  {:<52} expected {:<10} got {:.12e}  tolerance {:e}",
                    f.name, f.expected, f.got, f.tolerance
                );
            }
            Err(e) => {
                failed += 1;
                println!("FAIL  {label}: {e}");
            }
        }
    }
    if failed == 0 {
        println!("all fixtures passed");
        Ok(())
    } else {
        Err(CliError::SelfTest(failed))
    }
}
