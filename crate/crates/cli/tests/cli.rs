use std::path::Path;
use std::process::{Command, Output};

fn flapper(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flapper")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

#[test]
fn evaluate_writes_resolved_config_and_reruns_identically() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let o = flapper(&["--set", "simulation.fidelity=reduced", "--seed", "7", "evaluate", "--out", a.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(read(&a.join("seed.txt")).trim(), "7");
    let stdout = String::from_utf8(o.stdout).unwrap();
    let line: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    assert!(line["objectives"]["mbsd"].as_f64().unwrap() > 0.0);

    let b = tmp.path().join("b");
    let cfg = a.join("config.txt");
    let o = flapper(&["--config", cfg.to_str().unwrap(), "evaluate", "--out", b.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(read(&a.join("evaluation.json")), read(&b.join("evaluation.json")));
    assert_eq!(read(&a.join("config.txt")), read(&b.join("config.txt")));
}

#[test]
fn config_errors_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    std::fs::write(&cfg, "seed = 1\n\ndesign.fWing = 60\n").unwrap();
    let o = flapper(&["--config", cfg.to_str().unwrap(), "evaluate", "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    std::fs::write(&cfg, "no.such.key = 1\n").unwrap();
    assert_eq!(code(&flapper(&["--config", cfg.to_str().unwrap(), "mbsd"])), 2);
    assert_eq!(code(&flapper(&["repro", "fig99"])), 2);
}

#[test]
fn numeric_failure_exits_with_code_four() {
    let tmp = tempfile::tempdir().unwrap();
    let o = flapper(&[
        "--set",
        "control.kp=1e6",
        "--set",
        "simulation.steps_per_cycle=20",
        "--set",
        "simulation.auto_refine=false",
        "evaluate",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    assert!(tmp.path().join("evaluation.json").exists());
}

#[test]
fn mbsd_emits_json_line_and_trajectory_pair() {
    let tmp = tempfile::tempdir().unwrap();
    let o = flapper(&["--set", "design.R=0.1", "mbsd", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!((v["d_shape"].as_f64().unwrap() - 102.64).abs() < 0.01);
    let csv = read(&tmp.path().join("trajectory.csv"));
    assert!(csv.starts_with("# schema: trajectory-pair/v1\nt,x,y,z,ref_x,ref_y,ref_z\n"));
}

#[test]
fn repro_aircraft_table_has_five_rows() {
    let tmp = tempfile::tempdir().unwrap();
    let o = flapper(&["repro", "table6", "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = read(&tmp.path().join("table6.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "# schema: table6/v1");
    assert_eq!(lines.len(), 2 + 5);
    assert!(lines[3].starts_with("DragonflEye,0.03,0,0,"));
}

#[test]
fn small_sweep_writes_rows_and_blends() {
    let tmp = tempfile::tempdir().unwrap();
    let o = flapper(&[
        "--set",
        "simulation.fidelity=reduced",
        "sweep",
        "--pair",
        "f-span",
        "--points",
        "3",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert!(matches!(code(&o), 0 | 3));
    let rows = read(&tmp.path().join("sweep_f_span.csv"));
    assert_eq!(rows.lines().count(), 2 + 9);
    let blend = read(&tmp.path().join("blend_f_span.csv"));
    assert!(blend.lines().nth(1).unwrap().contains("lhd_w0.25"));
    assert!(!tmp.path().join("sweep_f_amplitude.csv").exists());
}

#[test]
fn optimisation_archive_round_trips_through_analyze() {
    let tmp = tempfile::tempdir().unwrap();
    let run = |dir: &Path| {
        flapper(&[
            "--set",
            "simulation.fidelity=reduced",
            "--seed",
            "3",
            "--pop",
            "20",
            "--budget",
            "60",
            "--trace",
            "optimize-mo",
            "--out",
            dir.to_str().unwrap(),
        ])
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let oa = run(&a);
    assert!(matches!(code(&oa), 0 | 3), "{}", String::from_utf8_lossy(&oa.stderr));
    run(&b);
    assert_eq!(read(&a.join("archive.csv")), read(&b.join("archive.csv")));
    let archive = read(&a.join("archive.csv"));
    assert!(archive.starts_with("# schema: archive/v1\n"));
    assert_eq!(archive.lines().count(), 2 + 60);
    assert!(read(&a.join("trace.csv")).starts_with("# schema: moea-trace/v1"));

    let out = tmp.path().join("an");
    let o = flapper(&[
        "analyze",
        "--archive",
        a.join("archive.csv").to_str().unwrap(),
        "--include-infeasible",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(read(&out.join("importance.csv")).lines().count() > 2);
    assert!(read(&out.join("correlations.csv")).contains("mbsd"));
}

#[test]
fn analyze_of_infeasible_only_archive_exits_with_code_three() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("archive.csv");
    let mut text = String::from(
        "# schema: archive/v1\ngen,eval_id,phiAm,fWing,R,idMotor,gammaTr,mbsd,lhd,miffs,aht,feasible,violation\n",
    );
    for i in 0..5 {
        text.push_str(&format!("0,{i},40,30,0.08,3,30,80,100,5,NaN,0,0.5\n"));
    }
    std::fs::write(&path, text).unwrap();
    let o = flapper(&["analyze", "--archive", path.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn simulate_with_trace_and_ablation() {
    let tmp = tempfile::tempdir().unwrap();
    let o = flapper(&[
        "--set",
        "simulation.fidelity=reduced",
        "--trace",
        "simulate",
        "--ablate-tandem",
        "--out",
        tmp.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(&tmp.path().join("report.json"))).unwrap();
    assert!(report["without_tandem"].is_object());
    assert_ne!(report["evaluation"]["objectives"]["lhd"], report["without_tandem"]["objectives"]["lhd"]);
    let trace = read(&tmp.path().join("trace.csv"));
    assert!(trace.starts_with("# schema: sim-trace/v1\nt,phi_fore,"));
    assert!(trace.lines().count() > 100);
}
