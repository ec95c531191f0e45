use crate::error::{domain, Result};

/// Value substituted for 1/MBSD when the stealth distance is exactly zero.
pub const DEFAULT_INVERSE_CAP: f64 = 1.0;

/// Divides every entry by the maximum.
pub fn normalize(values: &[f64]) -> Result<Vec<f64>> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(max > 0.0) || !max.is_finite() {
        return domain("normalisation needs a finite positive maximum");
    }
    Ok(values.iter().map(|v| v / max).collect())
}

/// Weighted blend of two normalised indicators, renormalised.
pub fn combine(t1: &[f64], t2: &[f64], w1: f64) -> Result<Vec<f64>> {
    if t1.len() != t2.len() {
        return domain("combined indicators must have equal length");
    }
    if !(0.0..=1.0).contains(&w1) {
        return domain("weight must lie in [0, 1]");
    }
    let (a, b) = (normalize(t1)?, normalize(t2)?);
    let blend: Vec<f64> = a.iter().zip(&b).map(|(x, y)| (1.0 - w1) * x + w1 * y).collect();
    normalize(&blend)
}

/// Element-wise reciprocal. A zero distance is perfect stealth and maps to `cap`.
pub fn inverse_mbsd(grid: &[f64], cap: f64) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&m| {
            if m > 0.0 {
                Ok(1.0 / m)
            } else if m == 0.0 {
                Ok(cap)
            } else {
                domain(format!("MBSD must be non-negative, got {m}"))
            }
        })
        .collect()
}
