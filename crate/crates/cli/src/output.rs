//! Output directories and the CSV layouts written by the subcommands.

use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use flapper_core::bio::TrajectoryParams;
use flapper_core::config::WorkbenchConfig;
use flapper_core::design::NAMES;
use flapper_core::io::{fmt_f64, write_json, CsvTable};
use flapper_core::studies::{ArchiveAnalysis, SweepRow, BLEND_WEIGHTS};

/// Creates `dir` and records the resolved configuration and seed in it.
pub fn prepare_dir(dir: &Path, cfg: &WorkbenchConfig) -> Result<PathBuf> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    std::fs::write(dir.join("config.txt"), cfg.to_text())?;
    std::fs::write(dir.join("seed.txt"), format!("{}\n", cfg.seed))?;
    Ok(dir.to_path_buf())
}

pub fn sweep_table(rows: &[SweepRow]) -> CsvTable {
    let mut headers: Vec<&str> = NAMES.to_vec();
    headers.extend(["status", "feasible", "violation", "mbsd", "lhd", "miffs", "aht"]);
    let mut t = CsvTable::new("sweep/v1", &headers);
    for r in rows {
        let mut row: Vec<String> = r.design.to_vec().iter().map(|v| fmt_f64(*v)).collect();
        row.push(r.status.clone());
        row.push(if r.feasible { "1" } else { "0" }.into());
        row.extend([r.violation, r.mbsd, r.lhd, r.miffs, r.aht].iter().map(|v| fmt_f64(*v)));
        t.push(row);
    }
    t
}

/// One column per blend weight and indicator, rows aligned with the sweep.
pub fn blend_table(rows: &[SweepRow], lhd: &[Vec<f64>], miffs: &[Vec<f64>]) -> CsvTable {
    let mut headers: Vec<String> = NAMES.iter().map(|s| s.to_string()).collect();
    for ind in ["lhd", "miffs"] {
        headers.extend(BLEND_WEIGHTS.iter().map(|w| format!("{ind}_w{w}")));
    }
    let refs: Vec<&str> = headers.iter().map(String::as_str).collect();
    let mut t = CsvTable::new("blend/v1", &refs);
    for (i, r) in rows.iter().enumerate() {
        let mut row = r.design.to_vec().to_vec();
        row.extend(lhd.iter().map(|c| c[i]));
        row.extend(miffs.iter().map(|c| c[i]));
        t.push_f64(&row);
    }
    t
}

/// Aircraft and reference wingtip positions over two cycles of the slower
/// trajectory, both drawn at the aircraft span.
pub fn trajectory_pair_table(a: &TrajectoryParams, reference: &TrajectoryParams) -> CsvTable {
    let f_lo = a.frequency.min(reference.frequency);
    let f_hi = a.frequency.max(reference.frequency);
    let dt = 1.0 / (f_hi * 200.0);
    let n = (2.0 / f_lo / dt).round() as usize;
    let mut t = CsvTable::new("trajectory-pair/v1", &["t", "x", "y", "z", "ref_x", "ref_y", "ref_z"]);
    for j in 0..=n {
        let time = j as f64 * dt;
        let p = a.tip_at(time, a.semi_span);
        let q = reference.tip_at(time, a.semi_span);
        t.push_f64(&[time, p[0], p[1], p[2], q[0], q[1], q[2]]);
    }
    t
}

pub fn write_analysis(dir: &Path, a: &ArchiveAnalysis) -> Result<()> {
    write_json(&dir.join("analysis.json"), a)?;

    let mut headers = vec!["variable"];
    headers.extend(a.correlations.names.iter().map(String::as_str));
    let mut t = CsvTable::new("correlations/v1", &headers);
    for (name, row) in a.correlations.names.iter().zip(&a.correlations.values) {
        let mut r = vec![name.clone()];
        r.extend(row.iter().map(|v| v.map_or_else(|| "NaN".into(), fmt_f64)));
        t.push(r);
    }
    t.write(&dir.join("correlations.csv"))?;

    let mut t = CsvTable::new("importance/v1", &["target", "feature", "importance", "mse_increase"]);
    for rep in &a.importance {
        for f in &rep.features {
            t.push(vec![rep.target.clone(), f.feature.clone(), fmt_f64(f.importance), fmt_f64(f.mse_increase)]);
        }
    }
    t.write(&dir.join("importance.csv"))?;

    for study in &a.ratios {
        let mut t = CsvTable::new("ratio-bins/v1", &["mbsd_lo", "mbsd_hi", "count", "mean_ratio"]);
        for b in &study.bins {
            t.push_f64(&[b.mbsd_lo, b.mbsd_hi, b.count as f64, b.mean_ratio]);
        }
        t.write(&dir.join(format!("ratio_{}.csv", study.kind.name())))?;
    }
    Ok(())
}
