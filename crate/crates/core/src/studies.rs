//! End-to-end runs: single-design pipeline, the stealth-metric studies, the
//! two-parameter traversals and the optimisation studies.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analysis::{
    pearson_matrix, permutation_importance, ratio_study, CorrelationMatrix, ImportanceReport, ImportanceSettings,
    RatioKind, RatioStudy, SampleTable,
};
use crate::bio::{shape_distance, StealthModel, TrajectoryParams};
use crate::config::WorkbenchConfig;
use crate::design::{DesignPoint, NAMES};
use crate::drivetrain::MotorDatabase;
use crate::error::{domain, Result};
use crate::optimizers::{
    combine, inverse_mbsd, isres_optimize, moea_optimize, sweep, ArchiveEntry, DesignObjective, IsresResult,
    MoeaResult, Problem, SweepGrid,
};
use crate::pipeline::{EvalStatus, Evaluation, Evaluator};

pub fn evaluator(cfg: &WorkbenchConfig) -> Result<Evaluator> {
    Evaluator::new(cfg.evaluation_settings()?, MotorDatabase::builtin())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineReport {
    pub evaluation: Evaluation,
    /// The same design with tandem interference switched off.
    pub without_tandem: Option<Evaluation>,
}

/// Design run, full-stroke run, constraints and the four objectives.
pub fn run_pipeline(cfg: &WorkbenchConfig, tandem_ablation: bool) -> Result<PipelineReport> {
    let ev = evaluator(cfg)?;
    let evaluation = ev.evaluate(&cfg.design);
    let without_tandem = if tandem_ablation {
        let mut c = cfg.clone();
        c.physics.tandem_enabled = false;
        Some(evaluator(&c)?.evaluate(&cfg.design))
    } else {
        None
    };
    Ok(PipelineReport { evaluation, without_tandem })
}

// ---------------------------------------------------------------- stealth

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeCurveRow {
    pub semi_span_mm: f64,
    pub d_shape: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShapeCurveSummary {
    /// Largest sampled span with zero shape distance.
    pub breakpoint_mm: f64,
    /// Metres of stealth distance per millimetre of span beyond the breakpoint.
    pub slope_per_mm: f64,
    /// Largest deviation from the two-piece line through the breakpoint.
    pub max_linear_residual: f64,
}

/// Shape distance over semi-spans 0..=500 mm in 1 mm steps.
pub fn shape_curve(stealth: &StealthModel) -> (Vec<ShapeCurveRow>, ShapeCurveSummary) {
    let rows: Vec<ShapeCurveRow> = (0..=500)
        .map(|mm| {
            let s = mm as f64 * 1e-3;
            ShapeCurveRow { semi_span_mm: mm as f64, d_shape: shape_distance(s, stealth.s_animal, &stealth.eye) }
        })
        .collect();
    let breakpoint_mm = rows.iter().filter(|r| r.d_shape == 0.0).map(|r| r.semi_span_mm).fold(0.0, f64::max);
    let last = rows.last().expect("non-empty");
    let slope_per_mm = last.d_shape / (last.semi_span_mm - breakpoint_mm);
    let max_linear_residual = rows
        .iter()
        .map(|r| (r.d_shape - slope_per_mm * (r.semi_span_mm - breakpoint_mm).max(0.0)).abs())
        .fold(0.0, f64::max);
    (rows, ShapeCurveSummary { breakpoint_mm, slope_per_mm, max_linear_residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryGridRow {
    /// Half-amplitude (deg); the stroke is twice this.
    pub amplitude_deg: f64,
    pub frequency: f64,
    pub c_dynamic: f64,
    pub d_trajectory: f64,
    pub mbsd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryGridSummary {
    pub semi_span: f64,
    pub reference_frequency: f64,
    /// Frequency of least MBSD for each amplitude.
    pub best_frequency: Vec<(f64, f64)>,
}

/// Stealth distance over half-amplitudes 20..=100 deg (2 deg steps) and
/// frequencies 5..=65 Hz (1 Hz steps) at a fixed semi-span.
pub fn trajectory_grid(stealth: &StealthModel, semi_span: f64) -> (Vec<TrajectoryGridRow>, TrajectoryGridSummary) {
    use rayon::prelude::*;
    let amps: Vec<f64> = (0..=40).map(|i| 20.0 + 2.0 * i as f64).collect();
    let freqs: Vec<f64> = (5..=65).map(|f| f as f64).collect();
    let rows: Vec<TrajectoryGridRow> = amps
        .par_iter()
        .flat_map_iter(|&a| {
            freqs.iter().map(move |&f| {
                let t = TrajectoryParams { semi_span, frequency: f, plane_angle: 0.0, amplitude: 2.0 * a, median: 0.0 };
                let b = stealth.evaluate(&t);
                TrajectoryGridRow {
                    amplitude_deg: a,
                    frequency: f,
                    c_dynamic: b.c_dynamic,
                    d_trajectory: b.d_trajectory,
                    mbsd: b.mbsd,
                }
            })
        })
        .collect();
    let best_frequency = amps
        .iter()
        .map(|&a| {
            let best = rows
                .iter()
                .filter(|r| r.amplitude_deg == a)
                .min_by(|x, y| x.mbsd.total_cmp(&y.mbsd))
                .expect("non-empty");
            (a, best.frequency)
        })
        .collect();
    (rows, TrajectoryGridSummary { semi_span, reference_frequency: stealth.reference.frequency, best_frequency })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AircraftCase {
    pub name: String,
    pub semi_span: f64,
    /// Wingtip kinematics; `None` means the reference trajectory.
    pub trajectory: Option<TrajectoryParams>,
    pub published: [f64; 3],
}

/// The five comparison aircraft. Spans other than the in-house vehicle are
/// recovered from their published shape distances, and only that vehicle
/// has published kinematics (23 Hz, 150 deg stroke).
pub fn aircraft_cases() -> Vec<AircraftCase> {
    let case = |name: &str, s: f64, traj: Option<TrajectoryParams>, p: [f64; 3]| AircraftCase {
        name: name.into(),
        semi_span: s,
        trajectory: traj,
        published: p,
    };
    vec![
        case("Festo BionicOpter", 0.315, None, [417.9, 0.0, 417.9]),
        case("DragonflEye", 0.030, None, [0.0, 0.0, 0.0]),
        case("DEIFLY Nimble", 0.1650, None, [197.9, 0.0, 197.9]),
        case("QV", 0.0750, None, [66.0, 0.0, 66.0]),
        case(
            "DDD-1",
            0.100,
            Some(TrajectoryParams {
                semi_span: 0.100,
                frequency: 23.0,
                plane_angle: 0.0,
                amplitude: 150.0,
                median: 0.0,
            }),
            [102.6, 10.3, 112.9],
        ),
    ]
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AircraftRow {
    pub name: String,
    pub semi_span: f64,
    pub d_shape: f64,
    pub d_trajectory: f64,
    pub c_dynamic: f64,
    pub mbsd: f64,
    pub published_d_shape: f64,
    pub published_d_trajectory: f64,
    pub published_mbsd: f64,
}

pub fn aircraft_comparison(stealth: &StealthModel) -> Vec<AircraftRow> {
    aircraft_cases()
        .into_iter()
        .map(|c| {
            let t = c.trajectory.unwrap_or(TrajectoryParams { semi_span: c.semi_span, ..stealth.reference });
            let b = stealth.evaluate(&t);
            AircraftRow {
                name: c.name,
                semi_span: c.semi_span,
                d_shape: b.d_shape,
                d_trajectory: b.d_trajectory,
                c_dynamic: b.c_dynamic,
                mbsd: b.mbsd,
                published_d_shape: c.published[0],
                published_d_trajectory: c.published[1],
                published_mbsd: c.published[2],
            }
        })
        .collect()
}

// ---------------------------------------------------------------- sweeps

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub design: DesignPoint,
    pub status: String,
    pub feasible: bool,
    pub violation: f64,
    pub mbsd: f64,
    pub lhd: f64,
    pub miffs: f64,
    pub aht: f64,
}

impl SweepRow {
    pub fn from_evaluation(e: &Evaluation) -> Self {
        SweepRow {
            design: e.design,
            status: match &e.status {
                EvalStatus::Ok => "ok".into(),
                EvalStatus::NumericFailure(_) => "numeric_failure".into(),
                EvalStatus::Invalid(_) => "invalid".into(),
            },
            feasible: e.feasible,
            violation: e.violation,
            mbsd: e.objectives.mbsd,
            lhd: e.objectives.lhd,
            miffs: e.objectives.miffs,
            aht: e.objectives.aht.unwrap_or(f64::NAN),
        }
    }
}

pub fn traversal(ev: &Evaluator, grid: &SweepGrid) -> Vec<SweepRow> {
    sweep(grid, |d| SweepRow::from_evaluation(&ev.evaluate(d))).into_iter().map(|(_, r)| r).collect()
}

/// Blend weights reported for every traversal.
pub const BLEND_WEIGHTS: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Normalised blend of inverse MBSD with a second indicator, one column per
/// weight. Missing or negative indicator values enter the blend as zero.
pub fn blend_columns(rows: &[SweepRow], second: DesignObjective, cap: f64) -> Result<Vec<Vec<f64>>> {
    let inv = inverse_mbsd(&rows.iter().map(|r| r.mbsd).collect::<Vec<_>>(), cap)?;
    let other: Vec<f64> = rows
        .iter()
        .map(|r| {
            let v = match second {
                DesignObjective::Lhd => r.lhd,
                DesignObjective::Miffs => r.miffs,
                DesignObjective::Aht => r.aht,
                DesignObjective::Mbsd => r.mbsd,
            };
            if v.is_finite() && v > 0.0 {
                v
            } else {
                0.0
            }
        })
        .collect();
    BLEND_WEIGHTS.iter().map(|&w| combine(&inv, &other, w)).collect()
}

// ---------------------------------------------------------- optimisation

pub fn design_problem(cfg: &WorkbenchConfig, objectives: &[DesignObjective]) -> Result<Problem> {
    Problem::design(Arc::new(evaluator(cfg)?), objectives)
}

/// Bi-objective study: MBSD against LHD or MIFFS.
pub fn mo_study(cfg: &WorkbenchConfig, second: DesignObjective) -> Result<MoeaResult> {
    if !matches!(second, DesignObjective::Lhd | DesignObjective::Miffs) {
        return domain("the bi-objective study pairs MBSD with LHD or MIFFS");
    }
    let p = design_problem(cfg, &[DesignObjective::Mbsd, second])?;
    moea_optimize(&p, &cfg.moea)
}

pub fn mission_study(cfg: &WorkbenchConfig) -> Result<IsresResult> {
    let p = design_problem(cfg, &[DesignObjective::Aht])?;
    isres_optimize(&p, &cfg.isres)
}

/// Reference values of the published mission optimum, logged for
/// comparison only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MissionReference {
    pub aht: f64,
    pub design: [f64; 5],
    pub mbsd: f64,
    pub lhd: f64,
    pub miffs: f64,
    pub generations: usize,
    pub evaluations: usize,
}

pub const MISSION_REFERENCE: MissionReference = MissionReference {
    aht: 763.499,
    design: [71.705, 29.605, 0.083167, 3.780, 34.175],
    mbsd: 98.203,
    lhd: 1111.461,
    miffs: 7.773,
    generations: 60,
    evaluations: 26_401,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArchiveAnalysis {
    pub rows_used: usize,
    pub include_infeasible: bool,
    pub correlations: CorrelationMatrix,
    /// Importance of the design variables for each objective; objectives
    /// with too few usable rows are skipped with a note.
    pub importance: Vec<ImportanceReport>,
    pub notes: Vec<String>,
    pub ratios: Vec<RatioStudy>,
}

pub const ANALYSIS_COLUMNS: [&str; 9] = ["phiAm", "fWing", "R", "idMotor", "gammaTr", "mbsd", "lhd", "miffs", "aht"];

/// Correlations, importances and efficiency ratios over an archive.
pub fn analyze_archive(
    entries: &[ArchiveEntry],
    include_infeasible: bool,
    targets: &[&str],
    importance: &ImportanceSettings,
    bins: usize,
) -> Result<ArchiveAnalysis> {
    let all = SampleTable::from_design_archive(entries);
    let t = if include_infeasible { all } else { all.feasible_only() };
    let cols: Vec<&str> =
        ANALYSIS_COLUMNS.iter().copied().filter(|c| targets.contains(c) || NAMES.contains(c)).collect();
    let correlations = pearson_matrix(&t, &cols)?;
    let mut reports = Vec::new();
    let mut notes = Vec::new();
    for target in targets {
        match permutation_importance(&t, target, &NAMES, importance) {
            Ok(r) => reports.push(r),
            Err(e) => notes.push(format!("importance for {target} skipped: {e}")),
        }
    }
    let ratios = vec![ratio_study(&t, RatioKind::ELhd, bins)?, ratio_study(&t, RatioKind::EMiffs, bins)?];
    Ok(ArchiveAnalysis { rows_used: t.len(), include_infeasible, correlations, importance: reports, notes, ratios })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Fidelity;

    #[test]
    fn shape_curve_is_zero_then_linear() {
        let (rows, s) = shape_curve(&StealthModel::default());
        assert_eq!(rows.len(), 501);
        assert_eq!(s.breakpoint_mm, 30.0);
        assert!(s.max_linear_residual < 1e-9);
        assert!((s.slope_per_mm - 1e-3 / 6.82e-4).abs() < 1e-9);
    }

    #[test]
    fn comparison_aircraft_shapes_and_zero_rows() {
        let rows = aircraft_comparison(&StealthModel::default());
        assert_eq!(rows.len(), 5);
        for r in &rows {
            let tol = if r.published_d_shape > 0.0 { 0.01 * r.published_d_shape } else { 0.0 };
            assert!((r.d_shape - r.published_d_shape).abs() <= tol, "{r:?}");
        }
        assert_eq!(rows[1].mbsd, 0.0);
        assert!(rows[..4].iter().all(|r| r.d_trajectory == 0.0));
        assert!(rows[4].d_trajectory > 0.0);
    }

    #[test]
    fn trajectory_grid_best_frequencies_cluster_at_reference() {
        let (rows, s) = trajectory_grid(&StealthModel::default(), 0.075);
        assert_eq!(rows.len(), 41 * 61);
        let near = s.best_frequency.iter().filter(|(_, f)| (f - s.reference_frequency).abs() <= 3.0).count();
        assert!(near * 2 > s.best_frequency.len(), "{:?}", s.best_frequency);
    }

    #[test]
    fn pipeline_reports_ablation() {
        let cfg = WorkbenchConfig::with_fidelity(Fidelity::Reduced);
        let r = run_pipeline(&cfg, true).unwrap();
        let off = r.without_tandem.unwrap();
        assert!(r.evaluation.constraints.is_some());
        assert_ne!(r.evaluation.objectives.lhd, off.objectives.lhd);
        assert_eq!(r.evaluation.objectives.mbsd, off.objectives.mbsd);
    }

    #[test]
    fn blend_weights_span_both_indicators() {
        let mk = |m: f64, l: f64| SweepRow {
            design: DesignPoint::default(),
            status: "ok".into(),
            feasible: true,
            violation: 0.0,
            mbsd: m,
            lhd: l,
            miffs: f64::NAN,
            aht: f64::NAN,
        };
        let rows = vec![mk(50.0, 100.0), mk(100.0, 400.0)];
        let cols = blend_columns(&rows, DesignObjective::Lhd, 1.0).unwrap();
        assert_eq!(cols[0], vec![1.0, 0.5]);
        assert_eq!(cols[4], vec![0.25, 1.0]);
        assert!(blend_columns(&rows, DesignObjective::Miffs, 1.0).is_err());
    }
}
