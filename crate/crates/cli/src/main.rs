mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use flapper_core::bio::TrajectoryParams;
use flapper_core::config::WorkbenchConfig;
use flapper_core::dynamics::{simulate_traced, TraceRow};
use flapper_core::io::{read_archive, write_archive, write_json, CsvTable};
use flapper_core::optimizers::{Axis, DesignObjective, SweepGrid};
use flapper_core::pipeline::EvalStatus;
use flapper_core::studies;

use output::{blend_table, prepare_dir, sweep_table, trajectory_pair_table, write_analysis};

#[derive(Parser)]
#[command(name = "flapper", version, about = "Tandem flapping-wing design workbench")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file (flat `key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; defaults to `flapper-out/<command>`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Also write per-step or per-generation trace CSVs.
    #[arg(long, global = true)]
    trace: bool,
    /// Evaluation budget for the optimisers.
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Population size for the optimisers.
    #[arg(long, global = true)]
    pop: Option<usize>,
    /// Override any configuration key, e.g. `--set design.fWing=30`.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-loop simulation of the configured design.
    Simulate {
        /// Repeat the run with tandem interference switched off.
        #[arg(long)]
        ablate_tandem: bool,
    },
    /// Stealth distance of the configured design.
    Mbsd,
    /// Full evaluation: constraints and all four objectives.
    Evaluate,
    /// Two-parameter traversal of the design space.
    Sweep {
        #[arg(long, value_enum)]
        pair: Vec<Pair>,
        /// Points per axis, replacing the standard resolution.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Bi-objective optimisation of MBSD against a second indicator.
    OptimizeMo {
        #[arg(long, value_enum, default_value = "lhd")]
        second: Second,
    },
    /// Single-objective mission optimisation of additional hover time.
    OptimizeMission,
    /// Correlation, importance and efficiency-ratio analysis of an archive.
    Analyze {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        include_infeasible: bool,
    },
    /// Re-run one of the standard studies.
    Repro {
        #[arg(value_enum)]
        study: Study,
        #[arg(long)]
        include_infeasible: bool,
    },
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Pair {
    FSpan,
    FAmplitude,
    AmplitudeSpan,
}

impl Pair {
    fn key(self) -> &'static str {
        match self {
            Pair::FSpan => "f_span",
            Pair::FAmplitude => "f_amplitude",
            Pair::AmplitudeSpan => "amplitude_span",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Second {
    Lhd,
    Miffs,
}

#[derive(Clone, Copy, ValueEnum)]
enum Study {
    Fig6,
    Fig7,
    Table6,
    Sweeps,
    MoLhd,
    MoMiffs,
    Mission,
}

/// Normal termination states beyond plain success.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Status {
    Ok,
    InfeasibleOnly,
    NumericFailure,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Ok => 0,
            Status::InfeasibleOnly => 3,
            Status::NumericFailure => 4,
        }
    }
}

fn error_code(e: &anyhow::Error) -> u8 {
    use flapper_core::Error;
    match e.downcast_ref::<Error>() {
        Some(Error::Config { .. } | Error::ConfigValue(_)) => 2,
        Some(Error::Numeric(_)) => 4,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(s) => ExitCode::from(s.code()),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(error_code(&e))
        }
    }
}

fn load_config(c: &Common) -> Result<WorkbenchConfig> {
    let mut overrides = Vec::new();
    if let Some(s) = c.seed {
        overrides.push(format!("seed={s}"));
    }
    for (flag, keys) in [(c.budget, ["moea.budget", "isres.budget"]), (c.pop, ["moea.pop_size", "isres.pop_size"])] {
        if let Some(v) = flag {
            overrides.extend(keys.iter().map(|k| format!("{k}={v}")));
        }
    }
    overrides.extend(c.set.iter().cloned());
    let cfg = match &c.config {
        Some(p) => WorkbenchConfig::load_with_overrides(p, &overrides),
        None => WorkbenchConfig::parse_with_overrides("", &overrides),
    };
    Ok(cfg?)
}

fn out_dir(c: &Common, default: &str) -> PathBuf {
    c.out.clone().unwrap_or_else(|| Path::new("flapper-out").join(default))
}

fn run(cli: Cli) -> Result<Status> {
    let c = &cli.common;
    let cfg = load_config(c)?;
    match cli.command {
        Command::Simulate { ablate_tandem } => {
            simulate(&cfg, &prepare_dir(&out_dir(c, "simulate"), &cfg)?, c.trace, ablate_tandem)
        }
        Command::Mbsd => mbsd(&cfg, &prepare_dir(&out_dir(c, "mbsd"), &cfg)?),
        Command::Evaluate => evaluate(&cfg, &prepare_dir(&out_dir(c, "evaluate"), &cfg)?),
        Command::Sweep { pair, points } => {
            let pairs = if pair.is_empty() { vec![Pair::FSpan, Pair::FAmplitude, Pair::AmplitudeSpan] } else { pair };
            sweeps(&cfg, &prepare_dir(&out_dir(c, "sweep"), &cfg)?, &pairs, points)
        }
        Command::OptimizeMo { second } => {
            let dir = prepare_dir(&out_dir(c, "optimize-mo"), &cfg)?;
            optimize_mo(&cfg, &dir, second, c.trace, None)
        }
        Command::OptimizeMission => mission(&cfg, &prepare_dir(&out_dir(c, "optimize-mission"), &cfg)?, c.trace),
        Command::Analyze { archive, include_infeasible } => {
            let dir = prepare_dir(&out_dir(c, "analyze"), &cfg)?;
            analyze(&cfg, &dir, &archive, include_infeasible || cfg.analysis.include_infeasible)
        }
        Command::Repro { study, include_infeasible } => {
            let include = include_infeasible || cfg.analysis.include_infeasible;
            repro(&cfg, c, study, include)
        }
    }
}

fn simulate(cfg: &WorkbenchConfig, dir: &Path, trace: bool, ablate: bool) -> Result<Status> {
    let report = studies::run_pipeline(cfg, ablate)?;
    write_json(&dir.join("report.json"), &report)?;
    if trace {
        let ev = studies::evaluator(cfg)?;
        let sim = ev.sim_config(&cfg.design)?;
        let mut t = CsvTable::new(
            "sim-trace/v1",
            &[
                "t",
                "phi_fore",
                "phi_hind",
                "theta_fore",
                "theta_hind",
                "phi_dot_fore",
                "phi_dot_hind",
                "tandem_fore",
                "tandem_hind",
                "lift",
                "power",
            ],
        );
        let mut rows: Vec<TraceRow> = Vec::new();
        let mut cb = |r: &TraceRow| rows.push(*r);
        // A diverging run still leaves a useful partial trace.
        let _ = simulate_traced(&sim, Some(&mut cb));
        for r in rows {
            t.push_f64(&[
                r.t,
                r.phi[0],
                r.phi[1],
                r.theta[0],
                r.theta[1],
                r.phi_dot[0],
                r.phi_dot[1],
                r.tandem_factor[0],
                r.tandem_factor[1],
                r.lift,
                r.power,
            ]);
        }
        t.write(&dir.join("trace.csv"))?;
    }
    let e = &report.evaluation;
    match &e.sim {
        Some(s) => println!(
            "lift {:.4} N, amplitude {:.2}/{:.2} deg, {} cycles, settled {}",
            s.l_takeoff,
            s.achieved_amplitude[0].to_degrees(),
            s.achieved_amplitude[1].to_degrees(),
            s.cycles_used,
            s.settled
        ),
        None => println!("simulation did not complete"),
    }
    if let Some(off) = &report.without_tandem {
        println!("without tandem interference: lhd {:.3} s, miffs {:.3} m/s", off.objectives.lhd, off.objectives.miffs);
    }
    Ok(status_of(&e.status))
}

fn status_of(s: &EvalStatus) -> Status {
    match s {
        EvalStatus::NumericFailure(m) => {
            eprintln!("{m}");
            Status::NumericFailure
        }
        _ => Status::Ok,
    }
}

fn mbsd(cfg: &WorkbenchConfig, dir: &Path) -> Result<Status> {
    let stealth = cfg.stealth_model()?;
    let traj = TrajectoryParams::from_design(&cfg.design);
    let b = stealth.evaluate(&traj);
    let line = serde_json::to_string(&b)?;
    println!("{line}");
    write_json(&dir.join("mbsd.json"), &b)?;
    trajectory_pair_table(&traj, &stealth.reference).write(&dir.join("trajectory.csv"))?;
    Ok(Status::Ok)
}

fn evaluate(cfg: &WorkbenchConfig, dir: &Path) -> Result<Status> {
    let ev = studies::evaluator(cfg)?;
    let e = ev.evaluate(&cfg.design);
    write_json(&dir.join("evaluation.json"), &e)?;
    let summary = serde_json::json!({
        "feasible": e.feasible,
        "violation": e.violation,
        "objectives": e.objectives,
    });
    println!("{summary}");
    Ok(status_of(&e.status))
}

fn sweeps(cfg: &WorkbenchConfig, dir: &Path, pairs: &[Pair], points: Option<usize>) -> Result<Status> {
    let ev = studies::evaluator(cfg)?;
    let mut any_feasible = false;
    for (name, mut grid) in SweepGrid::standard_pairs(cfg.design) {
        if !pairs.iter().any(|p| p.key() == name) {
            continue;
        }
        if let Some(n) = points {
            grid.axes = grid.axes.iter().map(|a| Axis::new(a.variable, a.lo, a.hi, n)).collect();
        }
        let rows = studies::traversal(&ev, &grid);
        any_feasible |= rows.iter().any(|r| r.feasible);
        sweep_table(&rows).write(&dir.join(format!("sweep_{name}.csv")))?;
        let lhd = studies::blend_columns(&rows, DesignObjective::Lhd, cfg.inverse_cap)?;
        let miffs = studies::blend_columns(&rows, DesignObjective::Miffs, cfg.inverse_cap)?;
        blend_table(&rows, &lhd, &miffs).write(&dir.join(format!("blend_{name}.csv")))?;
        println!("{name}: {} points, {} feasible", rows.len(), rows.iter().filter(|r| r.feasible).count());
    }
    Ok(if any_feasible { Status::Ok } else { Status::InfeasibleOnly })
}

fn optimize_mo(
    cfg: &WorkbenchConfig,
    dir: &Path,
    second: Second,
    trace: bool,
    analysis: Option<(bool, serde_json::Value)>,
) -> Result<Status> {
    let obj = match second {
        Second::Lhd => DesignObjective::Lhd,
        Second::Miffs => DesignObjective::Miffs,
    };
    let problem = studies::design_problem(cfg, &[DesignObjective::Mbsd, obj])?;
    let r = flapper_core::optimizers::moea_optimize(&problem, &cfg.moea)?;
    write_archive(&dir.join("archive.csv"), &r.archive)?;
    let front: Vec<_> = r.front(&problem).into_iter().map(|i| r.archive[i].clone()).collect();
    write_archive(&dir.join("front.csv"), &front)?;
    if trace || analysis.is_some() {
        flapper_core::io::hv_trace_table(&r.trace).write(&dir.join("trace.csv"))?;
    }
    let mut summary = serde_json::json!({
        "objectives": ["mbsd", obj.name()],
        "evaluations": r.evaluations,
        "generations": r.generations,
        "converged": r.converged,
        "cache_hits": r.cache_hits,
        "reference_point": r.reference,
        "final_hypervolume": r.trace.last().map(|p| p.hypervolume),
        "front_size": front.len(),
        "feasible_evaluations": r.archive.iter().filter(|e| e.outcome.feasible).count(),
    });
    if let Some((include, refs)) = analysis {
        summary["published"] = refs;
        let targets = ["mbsd", obj.name()];
        match studies::analyze_archive(&r.archive, include, &targets, &cfg.importance_settings(), cfg.analysis.bins) {
            Ok(a) => {
                write_analysis(dir, &a)?;
                summary["pearson_mbsd_span"] = serde_json::json!(a.correlations.get("mbsd", "R"));
                summary["importance_rank_mbsd"] =
                    serde_json::json!(a.importance.iter().find(|i| i.target == "mbsd").map(|i| i.ranking()));
                summary["analysis_notes"] = serde_json::json!(a.notes);
            }
            Err(e) => summary["analysis_error"] = serde_json::json!(e.to_string()),
        }
    }
    write_json(&dir.join("summary.json"), &summary)?;
    println!("{} evaluations over {} generations, front of {} designs", r.evaluations, r.generations, front.len());
    Ok(if front.is_empty() { Status::InfeasibleOnly } else { Status::Ok })
}

fn mission(cfg: &WorkbenchConfig, dir: &Path, trace: bool) -> Result<Status> {
    let r = studies::mission_study(cfg)?;
    write_archive(&dir.join("archive.csv"), &r.archive)?;
    if trace {
        flapper_core::io::isres_trace_table(&r.trace).write(&dir.join("trace.csv"))?;
    }
    let x = &r.best.x;
    let ex = &r.best.outcome.extras;
    let best = serde_json::json!({
        "design": { "phiAm": x[0], "fWing": x[1], "R": x[2], "idMotor": x[3], "gammaTr": x[4] },
        "feasible": r.best.outcome.feasible,
        "violation": r.best.outcome.violation,
        "mbsd": ex[0], "lhd": ex[1], "miffs": ex[2], "aht": ex[3],
        "evaluations": r.evaluations,
        "generations": r.generations,
        "converged": r.converged,
        "published": studies::MISSION_REFERENCE,
    });
    write_json(&dir.join("best.json"), &best)?;
    println!(
        "best aht {:.3} s (published {:.3} s), feasible {}, {} evaluations",
        ex[3],
        studies::MISSION_REFERENCE.aht,
        r.found_feasible(),
        r.evaluations
    );
    Ok(if r.found_feasible() { Status::Ok } else { Status::InfeasibleOnly })
}

fn analyze(cfg: &WorkbenchConfig, dir: &Path, archive: &Path, include_infeasible: bool) -> Result<Status> {
    let entries = read_archive(archive).with_context(|| format!("reading {}", archive.display()))?;
    if !include_infeasible && !entries.iter().any(|e| e.outcome.feasible) {
        eprintln!("the archive holds no feasible designs; rerun with --include-infeasible to analyse all rows");
        return Ok(Status::InfeasibleOnly);
    }
    let a = studies::analyze_archive(
        &entries,
        include_infeasible,
        &["mbsd", "lhd", "miffs"],
        &cfg.importance_settings(),
        cfg.analysis.bins,
    )?;
    write_analysis(dir, &a)?;
    for n in &a.notes {
        eprintln!("{n}");
    }
    println!("{} rows analysed", a.rows_used);
    Ok(if a.rows_used == 0 { Status::InfeasibleOnly } else { Status::Ok })
}

fn repro(cfg: &WorkbenchConfig, c: &Common, study: Study, include_infeasible: bool) -> Result<Status> {
    let name = match study {
        Study::Fig6 => "fig6",
        Study::Fig7 => "fig7",
        Study::Table6 => "table6",
        Study::Sweeps => "sweeps",
        Study::MoLhd => "mo-lhd",
        Study::MoMiffs => "mo-miffs",
        Study::Mission => "mission",
    };
    let dir = prepare_dir(&out_dir(c, &format!("repro-{name}")), cfg)?;
    let stealth = cfg.stealth_model()?;
    match study {
        Study::Fig6 => {
            let (rows, s) = studies::shape_curve(&stealth);
            let mut t = CsvTable::new("fig6/v1", &["semi_span_mm", "d_shape"]);
            rows.iter().for_each(|r| t.push_f64(&[r.semi_span_mm, r.d_shape]));
            t.write(&dir.join("fig6.csv"))?;
            let summary = serde_json::json!({ "summary": s, "published_breakpoint_mm": 30.0 });
            write_json(&dir.join("summary.json"), &summary)?;
            println!("breakpoint {} mm, slope {:.4} m/mm", s.breakpoint_mm, s.slope_per_mm);
            Ok(Status::Ok)
        }
        Study::Fig7 => {
            let (rows, s) = studies::trajectory_grid(&stealth, cfg.design.r);
            let mut t = CsvTable::new("fig7/v1", &["amplitude_deg", "frequency", "c_dynamic", "d_trajectory", "mbsd"]);
            rows.iter().for_each(|r| t.push_f64(&[r.amplitude_deg, r.frequency, r.c_dynamic, r.d_trajectory, r.mbsd]));
            t.write(&dir.join("fig7.csv"))?;
            write_json(&dir.join("summary.json"), &s)?;
            println!("reference frequency {} Hz at semi-span {} m", s.reference_frequency, s.semi_span);
            Ok(Status::Ok)
        }
        Study::Table6 => {
            let rows = studies::aircraft_comparison(&stealth);
            let mut t = CsvTable::new(
                "table6/v1",
                &[
                    "aircraft",
                    "semi_span",
                    "d_shape",
                    "d_trajectory",
                    "c_dynamic",
                    "mbsd",
                    "published_d_shape",
                    "published_d_trajectory",
                    "published_mbsd",
                ],
            );
            for r in &rows {
                let mut row = vec![r.name.clone()];
                row.extend(
                    [
                        r.semi_span,
                        r.d_shape,
                        r.d_trajectory,
                        r.c_dynamic,
                        r.mbsd,
                        r.published_d_shape,
                        r.published_d_trajectory,
                        r.published_mbsd,
                    ]
                    .iter()
                    .map(|v| flapper_core::io::fmt_f64(*v)),
                );
                t.push(row);
                println!(
                    "{:<20} shape {:>7.1}  trajectory {:>6.1}  mbsd {:>7.1}  (published {:.1})",
                    r.name, r.d_shape, r.d_trajectory, r.mbsd, r.published_mbsd
                );
            }
            t.write(&dir.join("table6.csv"))?;
            write_json(&dir.join("summary.json"), &rows)?;
            Ok(Status::Ok)
        }
        Study::Sweeps => sweeps(cfg, &dir, &[Pair::FSpan, Pair::FAmplitude, Pair::AmplitudeSpan], None),
        Study::MoLhd => {
            let refs = serde_json::json!({ "pearson_mbsd_span": 0.99, "pearson_mbsd_lhd": 0.66, "most_important_for_mbsd": "R" });
            optimize_mo(cfg, &dir, Second::Lhd, true, Some((include_infeasible, refs)))
        }
        Study::MoMiffs => {
            let refs = serde_json::json!({ "most_important_for_mbsd": "R" });
            optimize_mo(cfg, &dir, Second::Miffs, true, Some((include_infeasible, refs)))
        }
        Study::Mission => mission(cfg, &dir, true),
    }
}
