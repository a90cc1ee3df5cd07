use std::path::{Path, PathBuf};

use cvroute::sweep::{export_csv, figure_dataset, sweep_grid, SweepError};
use cvroute::{FigureKind, NetworkConfig, SweepGrid};

use crate::grid::GridSpec;
use crate::manifest::{manifest_path, sha256_file, OutputRecord, RunManifest};
use crate::CliError;

fn sweep_error(e: SweepError) -> CliError {
    match e {
        SweepError::Io(e) => CliError::Io(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

/// Runs the sweeps behind `kind`, writes the CSV and its manifest, and
/// returns the manifest.
pub fn run(
    kind: FigureKind,
    cfg: &NetworkConfig,
    spec: &GridSpec,
    out: &Path,
) -> Result<RunManifest, CliError> {
    cfg.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let (r, j) = (spec.r_values(), spec.j_values());
    let grids = kind
        .directions()
        .iter()
        .map(|&dir| sweep_grid(cfg, &r, &j, dir))
        .collect::<Result<Vec<SweepGrid>, _>>()
        .map_err(sweep_error)?;
    let refs: Vec<&SweepGrid> = grids.iter().collect();
    let table = figure_dataset(kind, &refs).map_err(sweep_error)?;
    export_csv(&table, out).map_err(|e| match e {
        SweepError::Io(io) => CliError::Io(format!("cannot write {}: {io}", out.display())),
        other => sweep_error(other),
    })?;

    let manifest = RunManifest {
        tool: "cvroute".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        figure: kind.to_string(),
        config: cfg.clone(),
        grid: spec.clone(),
        timestamp: chrono::Utc::now().to_rfc3339(),
        outputs: vec![OutputRecord {
            path: out.to_path_buf(),
            sha256: sha256_file(out)?,
        }],
    };
    let mpath = manifest_path(out);
    manifest.write(&mpath)?;

    let failures: Vec<String> = grids
        .iter()
        .flat_map(|g| &g.results)
        .filter_map(|p| {
            p.failure.as_ref().map(|f| {
                format!(
                    "r={} j={} {}: {f}",
                    p.r_over_omega, p.j_over_omega, p.direction
                )
            })
        })
        .collect();
    let unstable = grids[0].results.iter().filter(|p| !p.stable).count();
    println!(
        "{kind}: {} points, {unstable} unstable, wrote {} and {}",
        grids[0].len(),
        out.display(),
        mpath.display()
    );
    if !failures.is_empty() {
        for f in &failures {
            eprintln!("solver failure at {f}");
        }
        return Err(CliError::Solver(format!(
            "{} grid points failed to solve",
            failures.len()
        )));
    }
    Ok(manifest)
}

/// Regenerates the dataset recorded in a manifest and reports whether the
/// bytes match.
pub fn rerun(manifest: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let recorded = RunManifest::read(manifest)?;
    let kind: FigureKind = recorded
        .figure
        .parse()
        .map_err(|e: cvroute::sweep::ParseFigureError| CliError::Config(e.to_string()))?;
    let original = recorded
        .outputs
        .first()
        .ok_or_else(|| CliError::Config(format!("{} lists no outputs", manifest.display())))?;
    let target: PathBuf = out.map_or_else(|| original.path.clone(), Path::to_path_buf);
    let fresh = run(kind, &recorded.config, &recorded.grid, &target)?;
    if fresh.outputs[0].sha256 == original.sha256 {
        println!(
            "reproduced {} (sha256 {})",
            target.display(),
            original.sha256
        );
    } else {
        eprintln!(
            "warning: {} differs from the recorded output (sha256 {} vs {})",
            target.display(),
            fresh.outputs[0].sha256,
            original.sha256
        );
    }
    Ok(())
}
