//! Post-hoc statistics over optimisation archives: correlation matrices,
//! permutation importance from a nearest-neighbour regressor, and the
//! per-sample efficiency ratios.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::NAMES;
use crate::error::{domain, Error, Result};
use crate::optimizers::ArchiveEntry;
use crate::performance::{e_lhd, e_miffs};

/// Column-oriented sample table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleTable {
    pub names: Vec<String>,
    pub columns: Vec<Vec<f64>>,
    pub feasible: Vec<bool>,
}

pub const OBJECTIVE_COLUMNS: [&str; 4] = ["mbsd", "lhd", "miffs", "aht"];

impl SampleTable {
    pub fn new(names: Vec<String>, columns: Vec<Vec<f64>>, feasible: Vec<bool>) -> Result<Self> {
        if names.len() != columns.len() {
            return domain("one name per column is required");
        }
        if columns.iter().any(|c| c.len() != feasible.len()) {
            return domain("sample table must be rectangular");
        }
        Ok(SampleTable { names, columns, feasible })
    }

    /// Design variables followed by the four objectives, from archive
    /// entries of the design problem.
    pub fn from_design_archive(entries: &[ArchiveEntry]) -> Self {
        let mut names: Vec<String> = NAMES.iter().map(|s| s.to_string()).collect();
        names.extend(OBJECTIVE_COLUMNS.iter().map(|s| s.to_string()));
        let mut columns = vec![Vec::with_capacity(entries.len()); names.len()];
        for e in entries {
            for (j, v) in e.x.iter().take(5).enumerate() {
                columns[j].push(*v);
            }
            for k in 0..4 {
                columns[5 + k].push(e.outcome.extras.get(k).copied().unwrap_or(f64::NAN));
            }
        }
        let feasible = entries.iter().map(|e| e.outcome.feasible).collect();
        SampleTable { names, columns, feasible }
    }

    pub fn len(&self) -> usize {
        self.feasible.len()
    }

    pub fn is_empty(&self) -> bool {
        self.feasible.is_empty()
    }

    pub fn column_index(&self, name: &str) -> Result<usize> {
        self.names.iter().position(|n| n == name).ok_or_else(|| Error::Domain(format!("no column named '{name}'")))
    }

    pub fn column(&self, name: &str) -> Result<&[f64]> {
        Ok(&self.columns[self.column_index(name)?])
    }

    pub fn filter_rows(&self, keep: impl Fn(usize) -> bool) -> Self {
        let rows: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        SampleTable {
            names: self.names.clone(),
            columns: self.columns.iter().map(|c| rows.iter().map(|&i| c[i]).collect()).collect(),
            feasible: rows.iter().map(|&i| self.feasible[i]).collect(),
        }
    }

    pub fn feasible_only(&self) -> Self {
        self.filter_rows(|i| self.feasible[i])
    }

    /// Rows where every listed column is finite.
    pub fn finite_in(&self, cols: &[&str]) -> Result<Self> {
        let idx: Vec<usize> = cols.iter().map(|c| self.column_index(c)).collect::<Result<_>>()?;
        Ok(self.filter_rows(|i| idx.iter().all(|&j| self.columns[j][i].is_finite())))
    }
}

/// Pearson coefficient; `None` when either column is constant or the
/// series are too short.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let (mx, my) = (x.iter().sum::<f64>() / n as f64, y.iter().sum::<f64>() / n as f64);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx <= 0.0 || syy <= 0.0 || !(sxx * syy).is_finite() {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationMatrix {
    pub names: Vec<String>,
    /// `None` marks an undefined coefficient (constant column).
    pub values: Vec<Vec<Option<f64>>>,
    pub rows_used: usize,
}

impl CorrelationMatrix {
    pub fn get(&self, a: &str, b: &str) -> Option<f64> {
        let i = self.names.iter().position(|n| n == a)?;
        let j = self.names.iter().position(|n| n == b)?;
        self.values[i][j]
    }
}

/// Pairwise Pearson matrix over the rows where all requested columns are
/// finite.
pub fn pearson_matrix(t: &SampleTable, columns: &[&str]) -> Result<CorrelationMatrix> {
    let t = t.finite_in(columns)?;
    if t.len() < 2 {
        return domain("correlation needs at least two complete rows");
    }
    let cols: Vec<&[f64]> = columns.iter().map(|c| t.column(c)).collect::<Result<_>>()?;
    let k = cols.len();
    let mut values = vec![vec![None; k]; k];
    for i in 0..k {
        for j in i..k {
            let r = pearson(cols[i], cols[j]);
            // A defined column correlates perfectly with itself.
            let r = if i == j { r.map(|_| 1.0) } else { r };
            values[i][j] = r;
            values[j][i] = r;
        }
    }
    Ok(CorrelationMatrix { names: columns.iter().map(|s| s.to_string()).collect(), values, rows_used: t.len() })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceSettings {
    pub k: usize,
    pub shuffles: usize,
    pub seed: u64,
}

impl Default for ImportanceSettings {
    fn default() -> Self {
        ImportanceSettings { k: 10, shuffles: 10, seed: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Importance {
    pub feature: String,
    /// Normalised share, non-negative and summing to one over all features.
    pub importance: f64,
    /// Mean increase of the mean-squared error when the feature is shuffled.
    pub mse_increase: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub target: String,
    pub baseline_mse: f64,
    pub rows_used: usize,
    pub features: Vec<Importance>,
}

impl ImportanceReport {
    /// Feature names from most to least important.
    pub fn ranking(&self) -> Vec<&str> {
        let mut v: Vec<&Importance> = self.features.iter().collect();
        v.sort_by(|a, b| b.importance.total_cmp(&a.importance).then(a.feature.cmp(&b.feature)));
        v.into_iter().map(|i| i.feature.as_str()).collect()
    }
}

struct Knn<'a> {
    /// Standardised training inputs, row-major.
    x: &'a [Vec<f64>],
    y: &'a [f64],
    k: usize,
}

impl Knn<'_> {
    fn predict(&self, q: &[f64], scratch: &mut Vec<(f64, usize)>) -> f64 {
        scratch.clear();
        scratch.extend(self.x.iter().enumerate().map(|(i, row)| {
            let d: f64 = row.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            (d, i)
        }));
        let k = self.k.min(scratch.len());
        scratch.select_nth_unstable_by(k - 1, |a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        scratch[..k].iter().map(|&(_, i)| self.y[i]).sum::<f64>() / k as f64
    }

    fn mse(&self, queries: &[Vec<f64>]) -> f64 {
        let se: f64 = queries
            .par_iter()
            .enumerate()
            .map_init(Vec::new, |scratch, (i, q)| (self.predict(q, scratch) - self.y[i]).powi(2))
            .sum();
        se / queries.len() as f64
    }
}

/// Column seed derived from its name, so results do not depend on column order.
fn name_seed(seed: u64, name: &str) -> u64 {
    name.bytes().fold(seed ^ 0xcbf2_9ce4_8422_2325, |h, b| (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01b3))
}

/// Permutation importance of `features` for predicting `target` with a
/// k-nearest-neighbour regressor on standardised inputs.
pub fn permutation_importance(
    t: &SampleTable,
    target: &str,
    features: &[&str],
    s: &ImportanceSettings,
) -> Result<ImportanceReport> {
    let mut needed: Vec<&str> = features.to_vec();
    needed.push(target);
    let t = t.finite_in(&needed)?;
    if t.len() < 50 {
        return domain(format!("permutation importance needs at least 50 rows, got {}", t.len()));
    }
    if s.k == 0 || s.shuffles == 0 || features.is_empty() {
        return domain("k, shuffles and the feature list must be non-empty");
    }
    let y = t.column(target)?.to_vec();
    let n = y.len();
    let ymean = y.iter().sum::<f64>() / n as f64;
    if y.iter().all(|v| (v - ymean).abs() <= 1e-12 * ymean.abs().max(1.0)) {
        return domain(format!("target '{target}' is constant"));
    }
    let cols: Vec<Vec<f64>> = features
        .iter()
        .map(|f| {
            let c = t.column(f)?;
            let m = c.iter().sum::<f64>() / n as f64;
            let sd = (c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64).sqrt();
            let sd = if sd > 0.0 { sd } else { 1.0 };
            Ok(c.iter().map(|v| (v - m) / sd).collect())
        })
        .collect::<Result<_>>()?;
    let rows: Vec<Vec<f64>> = (0..n).map(|i| cols.iter().map(|c| c[i]).collect()).collect();
    let model = Knn { x: &rows, y: &y, k: s.k };
    let baseline = model.mse(&rows);

    let mut raw = Vec::with_capacity(features.len());
    for (j, name) in features.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(name_seed(s.seed, name));
        let mut total = 0.0;
        for _ in 0..s.shuffles {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            let q: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let mut r = rows[i].clone();
                    r[j] = cols[j][perm[i]];
                    r
                })
                .collect();
            total += model.mse(&q) - baseline;
        }
        raw.push(total / s.shuffles as f64);
    }
    let clipped: Vec<f64> = raw.iter().map(|v| v.max(0.0)).collect();
    let sum: f64 = clipped.iter().sum();
    let features = features
        .iter()
        .zip(raw.iter().zip(&clipped))
        .map(|(f, (r, c))| Importance {
            feature: f.to_string(),
            importance: if sum > 0.0 { c / sum } else { 1.0 / clipped.len() as f64 },
            mse_increase: *r,
        })
        .collect();
    Ok(ImportanceReport { target: target.into(), baseline_mse: baseline, rows_used: n, features })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RatioKind {
    /// Hover seconds per metre of stealth distance.
    ELhd,
    /// Seconds to cross the stealth distance at top speed.
    EMiffs,
}

impl RatioKind {
    pub fn name(self) -> &'static str {
        match self {
            RatioKind::ELhd => "e_lhd",
            RatioKind::EMiffs => "e_miffs",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "e_lhd" | "elhd" | "lhd" => Ok(RatioKind::ELhd),
            "e_miffs" | "emiffs" | "miffs" => Ok(RatioKind::EMiffs),
            _ => Err(Error::ConfigValue(format!("unknown ratio '{s}'"))),
        }
    }

    pub fn compute(self, mbsd: f64, lhd: f64, miffs: f64) -> f64 {
        match self {
            RatioKind::ELhd => e_lhd(lhd, mbsd),
            RatioKind::EMiffs => e_miffs(mbsd, miffs),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioBin {
    pub mbsd_lo: f64,
    pub mbsd_hi: f64,
    pub count: usize,
    pub mean_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Trend {
    Increasing,
    Decreasing,
    NonMonotone,
    Undetermined,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioStudy {
    pub kind: RatioKind,
    /// Ratio per input row; infinite where the denominator vanishes.
    pub ratios: Vec<f64>,
    pub bins: Vec<RatioBin>,
    pub zero_mbsd_rows: usize,
    pub trend: Trend,
}

/// Per-row efficiency ratio plus means over equal-width MBSD bins. Rows with
/// zero MBSD or a non-finite ratio are left out of the bins.
pub fn ratio_study(t: &SampleTable, kind: RatioKind, n_bins: usize) -> Result<RatioStudy> {
    let (m, l, v) = (t.column("mbsd")?, t.column("lhd")?, t.column("miffs")?);
    let ratios: Vec<f64> = (0..t.len()).map(|i| kind.compute(m[i], l[i], v[i])).collect();
    let zero_mbsd_rows = m.iter().filter(|&&x| x == 0.0).count();
    let usable: Vec<usize> = (0..t.len()).filter(|&i| m[i] > 0.0 && ratios[i].is_finite()).collect();
    let mut bins = Vec::new();
    if !usable.is_empty() && n_bins > 0 {
        let lo = usable.iter().map(|&i| m[i]).fold(f64::INFINITY, f64::min);
        let hi = usable.iter().map(|&i| m[i]).fold(f64::NEG_INFINITY, f64::max);
        let nb = if hi > lo { n_bins } else { 1 };
        let width = if hi > lo { (hi - lo) / nb as f64 } else { 1.0 };
        let mut sums = vec![(0usize, 0.0f64); nb];
        for &i in &usable {
            let b = (((m[i] - lo) / width) as usize).min(nb - 1);
            sums[b].0 += 1;
            sums[b].1 += ratios[i];
        }
        for (b, (c, s)) in sums.into_iter().enumerate() {
            bins.push(RatioBin {
                mbsd_lo: lo + width * b as f64,
                mbsd_hi: if b + 1 == nb { hi } else { lo + width * (b + 1) as f64 },
                count: c,
                mean_ratio: if c > 0 { s / c as f64 } else { f64::NAN },
            });
        }
    }
    let means: Vec<f64> = bins.iter().filter(|b| b.count > 0).map(|b| b.mean_ratio).collect();
    let trend = if means.len() < 2 {
        Trend::Undetermined
    } else if means.windows(2).all(|w| w[1] >= w[0]) {
        Trend::Increasing
    } else if means.windows(2).all(|w| w[1] <= w[0]) {
        Trend::Decreasing
    } else {
        Trend::NonMonotone
    };
    Ok(RatioStudy { kind, ratios, bins, zero_mbsd_rows, trend })
}
