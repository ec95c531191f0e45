use flapper_core::config::WorkbenchConfig;
use flapper_core::io::{archive_table, read_archive, CsvTable};
use flapper_core::optimizers::DesignObjective;
use flapper_core::studies::{mo_study, run_pipeline};

#[test]
fn config_text_round_trips_and_drives_the_pipeline() {
    let cfg = WorkbenchConfig::parse(
        "simulation.fidelity = reduced\ndesign.phiAm = 75\ndesign.fWing = 23\ndesign.R = 0.1\nseed = 5\n",
    )
    .unwrap();
    assert_eq!(WorkbenchConfig::parse(&cfg.to_text()).unwrap(), cfg);

    let report = run_pipeline(&cfg, true).unwrap();
    let e = &report.evaluation;
    assert!((e.stealth.d_shape - 102.64).abs() < 0.01);
    assert_eq!(e.objectives.mbsd, e.stealth.d_shape + e.stealth.d_trajectory);
    assert!(e.constraints.is_some(), "margins are reported whether or not the design is feasible");
    let off = report.without_tandem.unwrap();
    assert_eq!(off.objectives.mbsd, e.objectives.mbsd);
    assert_ne!(off.objectives.lhd, e.objectives.lhd);
}

#[test]
fn optimiser_archive_survives_a_csv_round_trip() {
    let mut cfg = WorkbenchConfig::parse("simulation.fidelity = reduced\nseed = 2").unwrap();
    cfg.moea.pop_size = 12;
    cfg.moea.budget = 36;
    let r = mo_study(&cfg, DesignObjective::Miffs).unwrap();
    assert_eq!(r.archive.len(), 36);

    let path = std::env::temp_dir().join(format!("flapper-archive-{}.csv", std::process::id()));
    archive_table(&r.archive).write(&path).unwrap();
    let back = read_archive(&path).unwrap();
    assert_eq!(CsvTable::read(&path).unwrap().schema, "archive/v1");
    std::fs::remove_file(&path).ok();

    assert_eq!(back.len(), r.archive.len());
    for (a, b) in r.archive.iter().zip(&back) {
        assert_eq!(a.x, b.x);
        assert_eq!(a.outcome.feasible, b.outcome.feasible);
        for (u, v) in a.outcome.extras[..4].iter().zip(&b.outcome.extras) {
            assert!(u == v || (u.is_nan() && v.is_nan()));
        }
    }
}
