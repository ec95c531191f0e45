use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::design::{DesignPoint, INTEGER_MASK, LOWER, UPPER};
use crate::error::{domain, Result};
use crate::pipeline::{EvalStatus, Evaluation, Evaluator};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Minimize,
    Maximize,
}

impl Sense {
    /// Maps a natural-sense value onto the minimised scale. Undefined values
    /// become the worst possible.
    pub fn to_min(self, v: f64) -> f64 {
        if v.is_nan() {
            return f64::INFINITY;
        }
        match self {
            Sense::Minimize => v,
            Sense::Maximize => -v,
        }
    }

    pub fn from_min(self, v: f64) -> f64 {
        match self {
            Sense::Minimize => v,
            Sense::Maximize => -v,
        }
    }
}

/// Result of one evaluation as seen by the optimisers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    /// Optimised objectives in their natural units and sense.
    pub objectives: Vec<f64>,
    /// Zero exactly when feasible.
    pub violation: f64,
    pub feasible: bool,
    /// Additional per-design quantities carried into the archive.
    pub extras: Vec<f64>,
}

impl Outcome {
    pub fn unconstrained(objectives: Vec<f64>) -> Self {
        Outcome { objectives, violation: 0.0, feasible: true, extras: Vec::new() }
    }

    /// Violation as used for ranking: strictly positive for infeasible points
    /// even when every individual margin happens to sit exactly on its limit.
    pub(crate) fn ranking_violation(&self) -> f64 {
        if self.feasible {
            0.0
        } else if self.violation > 0.0 {
            self.violation
        } else {
            f64::MIN_POSITIVE
        }
    }
}

pub type EvalFn = dyn Fn(&[f64]) -> Outcome + Send + Sync;

/// Bounded box problem with an integer mask and a thread-safe evaluator.
#[derive(Clone)]
pub struct Problem {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub integer: Vec<bool>,
    pub senses: Vec<Sense>,
    pub objective_names: Vec<String>,
    /// When set, evaluated vectors are snapped to this many significant
    /// digits, which is also the resolution of the evaluation cache.
    pub significant_digits: Option<u32>,
    evaluate: Arc<EvalFn>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("integer", &self.integer)
            .field("senses", &self.senses)
            .field("objective_names", &self.objective_names)
            .field("significant_digits", &self.significant_digits)
            .finish_non_exhaustive()
    }
}

impl Problem {
    pub fn new(
        lower: Vec<f64>,
        upper: Vec<f64>,
        senses: Vec<Sense>,
        evaluate: impl Fn(&[f64]) -> Outcome + Send + Sync + 'static,
    ) -> Result<Self> {
        let n = lower.len();
        let objective_names = (0..senses.len()).map(|i| format!("f{i}")).collect();
        let p = Problem {
            lower,
            upper,
            integer: vec![false; n],
            senses,
            objective_names,
            significant_digits: None,
            evaluate: Arc::new(evaluate),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_integer_mask(mut self, mask: Vec<bool>) -> Result<Self> {
        self.integer = mask;
        self.validate()?;
        Ok(self)
    }

    pub fn with_objective_names(mut self, names: Vec<String>) -> Result<Self> {
        self.objective_names = names;
        self.validate()?;
        Ok(self)
    }

    pub fn with_significant_digits(mut self, digits: u32) -> Self {
        self.significant_digits = Some(digits.max(1));
        self
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn n_objectives(&self) -> usize {
        self.senses.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.lower.len();
        if n == 0 || self.upper.len() != n || self.integer.len() != n {
            return domain("bounds and integer mask must share a non-zero length");
        }
        if self.lower.iter().zip(&self.upper).any(|(l, u)| !(l.is_finite() && u.is_finite() && l <= u)) {
            return domain("bounds must be finite and ordered");
        }
        if self.senses.is_empty() {
            return domain("a problem needs at least one objective");
        }
        if self.objective_names.len() != self.senses.len() {
            return domain("one name per objective is required");
        }
        Ok(())
    }

    /// Clips into bounds, rounds integer variables and applies the
    /// significant-digit snapping.
    pub fn repair(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(i, &v)| {
                let mut v = if v.is_nan() { 0.5 * (self.lower[i] + self.upper[i]) } else { v };
                v = v.clamp(self.lower[i], self.upper[i]);
                if self.integer[i] {
                    v = v.round();
                } else if let Some(d) = self.significant_digits {
                    v = round_significant(v, d);
                }
                v.clamp(self.lower[i], self.upper[i])
            })
            .collect()
    }

    /// Evaluates a vector exactly as given.
    pub fn evaluate_raw(&self, x: &[f64]) -> Outcome {
        (self.evaluate)(x)
    }

    /// Objectives mapped so that smaller is better for every entry.
    pub fn minimised(&self, o: &Outcome) -> Vec<f64> {
        self.senses.iter().zip(&o.objectives).map(|(s, &v)| s.to_min(v)).collect()
    }

    pub fn in_bounds(&self, x: &[f64]) -> bool {
        x.iter().enumerate().all(|(i, &v)| v >= self.lower[i] && v <= self.upper[i])
    }
}

pub fn round_significant(v: f64, digits: u32) -> f64 {
    if v == 0.0 || !v.is_finite() {
        return v;
    }
    let e = v.abs().log10().floor() as i32;
    let scale = 10f64.powi(digits as i32 - 1 - e);
    (v * scale).round() / scale
}

/// One evaluated individual as stored in an optimiser archive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub gen: usize,
    pub eval_id: usize,
    pub x: Vec<f64>,
    pub outcome: Outcome,
}

/// Design-level objectives that can be handed to the optimisers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DesignObjective {
    Mbsd,
    Lhd,
    Miffs,
    Aht,
}

impl DesignObjective {
    pub fn name(self) -> &'static str {
        match self {
            DesignObjective::Mbsd => "mbsd",
            DesignObjective::Lhd => "lhd",
            DesignObjective::Miffs => "miffs",
            DesignObjective::Aht => "aht",
        }
    }

    pub fn sense(self) -> Sense {
        match self {
            DesignObjective::Mbsd => Sense::Minimize,
            _ => Sense::Maximize,
        }
    }

    pub fn value(self, e: &Evaluation) -> f64 {
        let o = &e.objectives;
        match self {
            DesignObjective::Mbsd => o.mbsd,
            DesignObjective::Lhd => o.lhd,
            DesignObjective::Miffs => o.miffs,
            DesignObjective::Aht => o.aht.unwrap_or(f64::NAN),
        }
    }
}

impl Problem {
    /// The five-variable design problem backed by the full evaluation
    /// pipeline. Every outcome carries `[mbsd, lhd, miffs, aht, numeric_failure]`
    /// as extras so archives always hold the complete objective vector.
    pub fn design(evaluator: Arc<Evaluator>, objectives: &[DesignObjective]) -> Result<Self> {
        let objs = objectives.to_vec();
        let senses = objs.iter().map(|o| o.sense()).collect();
        let names = objs.iter().map(|o| o.name().to_string()).collect();
        let p = Problem::new(LOWER.to_vec(), UPPER.to_vec(), senses, move |x| {
            let e = evaluator.evaluate(&DesignPoint::from_vec_repaired(x));
            design_outcome(&e, &objs)
        })?;
        Ok(p.with_integer_mask(INTEGER_MASK.to_vec())?.with_objective_names(names)?.with_significant_digits(4))
    }
}

pub fn design_outcome(e: &Evaluation, objectives: &[DesignObjective]) -> Outcome {
    let o = &e.objectives;
    let failed = matches!(e.status, EvalStatus::NumericFailure(_));
    Outcome {
        objectives: objectives.iter().map(|k| k.value(e)).collect(),
        violation: e.violation,
        feasible: e.feasible,
        extras: vec![o.mbsd, o.lhd, o.miffs, o.aht.unwrap_or(f64::NAN), if failed { 1.0 } else { 0.0 }],
    }
}
