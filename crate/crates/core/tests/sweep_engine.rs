use cvroute::sweep::{
    export_csv, figure_dataset, linspace, run_point, sweep_grid, SweepError, ENTANGLEMENT_THRESHOLD,
};
use cvroute::{Direction, FigureKind, NetworkConfig, Table};

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap()
}

fn csv_bytes(table: &Table) -> Vec<u8> {
    let mut out = Vec::new();
    table.write_csv(&mut out).unwrap();
    out
}

#[test]
fn one_point_grid_is_run_point() {
    let base = NetworkConfig::default();
    let grid = sweep_grid(&base, &[0.15], &[0.35], Direction::Forward).unwrap();
    let mut cfg = base.clone();
    cfg.r = 0.15;
    cfg.j = 0.35;
    assert_eq!(grid.results, vec![run_point(&cfg.validate().unwrap())]);
}

#[test]
fn results_are_row_major_with_r_outer() {
    let r = [0.0, 0.1, 0.2];
    let j = [0.2, 0.4];
    let grid = sweep_grid(
        &NetworkConfig::with_chain_len(3),
        &r,
        &j,
        Direction::Forward,
    )
    .unwrap();
    for (ri, &rv) in r.iter().enumerate() {
        for (ji, &jv) in j.iter().enumerate() {
            let p = grid.get(ri, ji);
            assert_eq!((p.r_over_omega, p.j_over_omega), (rv, jv));
        }
    }
}

#[test]
fn invalid_grids_are_rejected() {
    let base = NetworkConfig::with_chain_len(2);
    assert!(matches!(
        sweep_grid(&base, &[], &[0.1], Direction::Forward),
        Err(SweepError::EmptyGrid)
    ));
    assert!(matches!(
        sweep_grid(&base, &[0.1, -0.2], &[0.1], Direction::Forward),
        Err(SweepError::NegativeValue(_))
    ));
    let mut bad = base.clone();
    bad.gamma = -1.0;
    assert!(matches!(
        sweep_grid(&bad, &[0.1], &[0.1], Direction::Forward),
        Err(SweepError::Validation(_))
    ));
}

#[test]
fn exports_are_identical_across_thread_counts() {
    let base = NetworkConfig::default();
    let r = linspace(0.0, 1.0, 7);
    let j = linspace(0.0, 1.0, 5);
    let run = |threads: usize| {
        pool(threads).install(|| {
            let fwd = sweep_grid(&base, &r, &j, Direction::Forward).unwrap();
            let bwd = sweep_grid(&base, &r, &j, Direction::Backward).unwrap();
            FigureKind::ALL
                .iter()
                .map(|&k| csv_bytes(&figure_dataset(k, &[&fwd, &bwd]).unwrap()))
                .collect::<Vec<_>>()
        })
    };
    let single = run(1);
    assert_eq!(single, run(3));
    assert_eq!(single, run(4));
}

#[test]
fn backward_far_pair_is_never_entangled() {
    let base = NetworkConfig::default();
    let r = linspace(0.05, 0.5, 6);
    let j = linspace(0.05, 1.0, 6);
    let grid = sweep_grid(&base, &r, &j, Direction::Backward).unwrap();
    for p in grid.results.iter().filter(|p| p.stable) {
        let en = p.en_backward_pair.unwrap();
        assert!(
            en <= ENTANGLEMENT_THRESHOLD,
            "r={} j={} en={en}",
            p.r_over_omega,
            p.j_over_omega
        );
        assert!(p.en_forward_pair.is_none());
    }
}

#[test]
fn unstable_points_carry_no_state_data() {
    let base = NetworkConfig::default();
    let grid = sweep_grid(&base, &[0.9, 1.0], &[0.8, 1.0], Direction::Forward).unwrap();
    let unstable: Vec<_> = grid.results.iter().filter(|p| !p.stable).collect();
    assert!(!unstable.is_empty());
    for p in unstable {
        assert!(p.en_forward_pair.is_none());
        assert!(p.m_max.is_none());
        assert!(p.nbar_at_mmax.is_none());
        assert!(!p.physical);
        assert!(p.spectral_abscissa > -1e-9);
    }
}

#[test]
fn decoupled_squeezed_source_is_physical() {
    let mut cfg = NetworkConfig::default();
    cfg.r = 0.74;
    let p = run_point(&cfg.validate().unwrap());
    assert!(p.stable && p.physical, "{p:?}");
    assert_eq!(p.m_max, Some(0));
}

#[test]
fn depth_respects_the_threshold_definition() {
    let base = NetworkConfig::default();
    let grid = sweep_grid(&base, &[0.02, 0.1, 0.3], &[0.3, 1.0], Direction::Forward).unwrap();
    for p in grid.results.iter().filter(|p| p.stable) {
        let mut cfg = base.clone();
        cfg.r = p.r_over_omega;
        cfg.j = p.j_over_omega;
        let s = cvroute::SystemMatrices::build(&cfg.validate().unwrap());
        let v = cvroute::lyapunov::solve_steady_state_spectral(&s.a, &s.n).unwrap();
        let en = |m: usize| {
            let tm = cvroute::gaussian::reduce_two_mode(&v, 0, m).unwrap();
            cvroute::gaussian::log_negativity(&tm)
                .unwrap()
                .log_negativity
        };
        let m_max = p.m_max.unwrap();
        if m_max >= 1 {
            assert!(en(m_max) > ENTANGLEMENT_THRESHOLD);
            assert!(p.nbar_at_mmax.unwrap() >= 0.0);
        } else {
            assert!(p.nbar_at_mmax.is_none());
        }
        for m in m_max + 1..=10 {
            assert!(en(m) <= ENTANGLEMENT_THRESHOLD);
        }
    }
}

#[test]
fn tables_have_the_documented_shapes() {
    let base = NetworkConfig::with_chain_len(4);
    let r = linspace(0.0, 1.0, 4);
    let j = linspace(0.0, 1.0, 3);
    let fwd = sweep_grid(&base, &r, &j, Direction::Forward).unwrap();
    let bwd = sweep_grid(&base, &r, &j, Direction::Backward).unwrap();

    let nr = figure_dataset(FigureKind::Nonreciprocity, &[&fwd, &bwd]).unwrap();
    assert_eq!(
        nr.columns,
        [
            "r_over_omega",
            "j_over_omega",
            "direction",
            "log_negativity"
        ]
    );
    assert_eq!(nr.rows.len(), 2 * fwd.len());

    let depth = figure_dataset(FigureKind::Depth, &[&fwd]).unwrap();
    assert_eq!(depth.columns, ["r_over_omega", "j_over_omega", "m_max"]);
    for (row, p) in depth.rows.iter().zip(&fwd.results) {
        let text = row[2].to_string();
        if p.stable {
            let m: usize = text.parse().unwrap();
            assert!(m <= 4);
        } else {
            assert!(text.is_empty());
        }
    }

    let stab = figure_dataset(FigureKind::Stability, &[&fwd]).unwrap();
    assert_eq!(stab.columns.len(), 5);
    for row in &stab.rows {
        assert!(matches!(row[2].to_string().as_str(), "true" | "false"));
        assert!(matches!(row[3].to_string().as_str(), "true" | "false"));
    }

    assert!(matches!(
        figure_dataset(FigureKind::Nonreciprocity, &[&fwd]),
        Err(SweepError::MissingDirection {
            direction: Direction::Backward,
            ..
        })
    ));
    assert!(matches!(
        figure_dataset(FigureKind::Depth, &[&bwd]),
        Err(SweepError::MissingDirection {
            direction: Direction::Forward,
            ..
        })
    ));
}

#[test]
fn csv_round_trip_is_bit_exact() {
    let base = NetworkConfig::default();
    let r = linspace(0.0, 1.0, 5);
    let j = linspace(0.0, 1.0, 5);
    let fwd = sweep_grid(&base, &r, &j, Direction::Forward).unwrap();
    let table = figure_dataset(FigureKind::Stability, &[&fwd]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("stability.csv");
    export_csv(&table, &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("r_over_omega,j_over_omega,stable,physical,spectral_abscissa")
    );
    for (line, p) in lines.zip(&fwd.results) {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 5);
        assert_eq!(
            fields[0].parse::<f64>().unwrap().to_bits(),
            p.r_over_omega.to_bits()
        );
        assert_eq!(
            fields[1].parse::<f64>().unwrap().to_bits(),
            p.j_over_omega.to_bits()
        );
        assert_eq!(fields[2].parse::<bool>().unwrap(), p.stable);
        assert_eq!(fields[3].parse::<bool>().unwrap(), p.physical);
        assert_eq!(
            fields[4].parse::<f64>().unwrap().to_bits(),
            p.spectral_abscissa.to_bits()
        );
    }
}

#[test]
fn empty_table_exports_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.csv");
    export_csv(&Table::new(&["a", "b"]), &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap(), "a,b\n");
}

#[test]
fn export_to_missing_directory_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("missing").join("x.csv");
    assert!(matches!(
        export_csv(&Table::new(&["a"]), &path),
        Err(SweepError::Io(_))
    ));
}
