use std::fmt::Write as _;

use cvroute::gaussian::{self, log_negativity, mean_occupation};
use cvroute::lyapunov::solve_steady_state_spectral;
use cvroute::preset::Preset;
use cvroute::sweep::{run_point, ENTANGLEMENT_THRESHOLD};
use cvroute::{NetworkConfig, PointResult, SystemMatrices};

use crate::CliError;

fn optional(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| format!("{x:.6e}"))
}

/// Values at roundoff level print as exact zeros.
fn entanglement(en: f64) -> f64 {
    if en <= ENTANGLEMENT_THRESHOLD {
        0.0
    } else {
        en
    }
}

fn occupation(nbar: f64) -> f64 {
    if nbar.abs() < 1e-12 {
        0.0
    } else {
        nbar
    }
}

fn kelvin(preset: Option<Preset>, nbar: f64) -> String {
    match preset.map(|p| p.effective_temperature(nbar)) {
        Some(Ok(t)) => format!("{:.3} mK", t * 1e3),
        _ => "-".to_string(),
    }
}

/// Summary block followed by a per-node table for stable points.
fn report(
    cfg: &NetworkConfig,
    p: &PointResult,
    preset: Option<Preset>,
) -> Result<String, CliError> {
    let mut s = String::new();
    let m = cfg.chain_len;
    let _ = writeln!(s, "chain length       {m}");
    let _ = writeln!(s, "direction          {}", p.direction);
    let _ = writeln!(s, "r/omega            {}", p.r_over_omega);
    let _ = writeln!(s, "j/omega            {}", p.j_over_omega);
    let _ = writeln!(s, "stable             {}", p.stable);
    let _ = writeln!(s, "spectral abscissa  {:.6e}", p.spectral_abscissa);
    let _ = writeln!(s, "physical           {}", p.physical);
    if m >= 2 {
        let _ = writeln!(
            s,
            "E_N(0,2)           {}",
            optional(p.en_forward_pair.map(entanglement))
        );
        let label = format!("E_N(0,{})", m - 1);
        let _ = writeln!(
            s,
            "{label:<19}{}",
            optional(p.en_backward_pair.map(entanglement))
        );
    }
    let _ = writeln!(
        s,
        "m_max              {}",
        p.m_max.map_or("-".into(), |v| v.to_string())
    );
    let _ = writeln!(s, "nbar at m_max      {}", optional(p.nbar_at_mmax));
    if let Some(preset) = preset {
        let t = p
            .nbar_at_mmax
            .map_or("-".into(), |n| kelvin(Some(preset), n));
        let _ = writeln!(s, "T_eff at m_max     {t} ({preset} preset)");
    }
    if !p.stable || p.failure.is_some() {
        return Ok(s);
    }

    let net = cfg
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mats = SystemMatrices::build(&net);
    let v = solve_steady_state_spectral(&mats.a, &mats.n)
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let _ = writeln!(s);
    let header = if preset.is_some() { "T_eff" } else { "" };
    let line = format!(
        "{:>4}  {:<14}  {:<14}{header}",
        "node", "E_N(0,node)", "nbar"
    );
    let _ = writeln!(s, "{}", line.trim_end());
    for k in 0..=m {
        let en = if k == 0 {
            "-".to_string()
        } else {
            let tm =
                gaussian::reduce_two_mode(&v, 0, k).map_err(|e| CliError::Solver(e.to_string()))?;
            let rec = log_negativity(&tm).map_err(|e| CliError::Solver(e.to_string()))?;
            format!("{:.6e}", entanglement(rec.log_negativity))
        };
        let nbar = occupation(mean_occupation(&v, k).map_err(|e| CliError::Solver(e.to_string()))?);
        let temp = if preset.is_some() {
            kelvin(preset, nbar)
        } else {
            String::new()
        };
        let nbar = format!("{nbar:.6e}");
        let line = format!("{k:>4}  {en:<14}  {nbar:<14}{temp}");
        let _ = writeln!(s, "{}", line.trim_end());
    }
    Ok(s)
}

pub fn run(cfg: &NetworkConfig, preset: Option<Preset>) -> Result<(), CliError> {
    let net = cfg
        .validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let p = run_point(&net);
    print!("{}", report(net.config(), &p, preset)?);
    match &p.failure {
        Some(f) => Err(CliError::Solver(f.clone())),
        None => Ok(()),
    }
}
