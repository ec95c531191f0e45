//! Design evaluation: design run, full-stroke run, constraints, objectives.

use serde::{Deserialize, Serialize};

use crate::bio::{MbsdBreakdown, StealthModel};
use crate::design::DesignPoint;
use crate::drivetrain::{CoolingSpec, MotorDatabase};
use crate::dynamics::{max_amplitude_run, simulate, Physics, SimConfig, SimOptions, SimResult, MAX_AMPLITUDE_DEG};
use crate::error::{Error, Result};
use crate::performance::{
    self, aht, constraints, energy_total, front_area, hover_power, ConstraintLimits, ConstraintReport, EnergyModel,
    ForwardFlightModel, ObjectiveVector, PerformanceDetails,
};

/// Everything that turns a design vector into objectives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSettings {
    pub physics: Physics,
    pub options: SimOptions,
    pub stealth: StealthModel,
    pub energy: EnergyModel,
    pub forward: ForwardFlightModel,
    pub limits: ConstraintLimits,
    /// Half-amplitude of the full-stroke run (deg).
    pub max_amplitude_deg: f64,
}

impl Default for EvaluationSettings {
    fn default() -> Self {
        EvaluationSettings {
            physics: Physics::default(),
            options: SimOptions::default(),
            stealth: StealthModel::default(),
            energy: EnergyModel::default(),
            forward: ForwardFlightModel::default(),
            limits: ConstraintLimits::default(),
            max_amplitude_deg: MAX_AMPLITUDE_DEG,
        }
    }
}

impl EvaluationSettings {
    /// Fewer strips and the coarse step count, for large archives.
    pub fn reduced() -> Self {
        let mut s = Self::default();
        s.physics.n_strips = 16;
        s.options = SimOptions::reduced();
        s
    }

    pub fn validate(&self) -> Result<()> {
        self.physics.membrane.validate()?;
        self.stealth.validate()?;
        self.energy.validate()?;
        self.forward.validate()?;
        self.limits.validate()?;
        if !(self.max_amplitude_deg > 0.0 && self.max_amplitude_deg <= 180.0) {
            return Err(Error::Domain("max_amplitude_deg must lie in (0, 180]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum EvalStatus {
    Ok,
    /// The closed loop ran away or produced non-finite values.
    NumericFailure(String),
    /// The design could not be set up (bad motor id, degenerate inputs).
    Invalid(String),
}

/// Violation charged to designs whose simulation could not be completed,
/// larger than any margin-based violation seen in practice.
pub const FAILURE_VIOLATION: f64 = 1.0e3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub design: DesignPoint,
    pub stealth: MbsdBreakdown,
    /// Unavailable quantities are NaN.
    pub objectives: ObjectiveVector,
    pub constraints: Option<ConstraintReport>,
    pub details: PerformanceDetails,
    pub sim: Option<SimResult>,
    pub sim_max: Option<SimResult>,
    pub status: EvalStatus,
    pub feasible: bool,
    pub violation: f64,
}

pub struct Evaluator {
    pub settings: EvaluationSettings,
    pub motors: MotorDatabase,
}

impl Evaluator {
    pub fn new(settings: EvaluationSettings, motors: MotorDatabase) -> Result<Self> {
        settings.validate()?;
        Ok(Evaluator { settings, motors })
    }

    pub fn sim_config(&self, design: &DesignPoint) -> Result<SimConfig> {
        SimConfig::new(*design, self.settings.physics.clone(), self.settings.options.clone(), &self.motors)
    }

    /// Never fails: problems are reported through the status and violation.
    pub fn evaluate(&self, design: &DesignPoint) -> Evaluation {
        let stealth = self.settings.stealth.evaluate_design(design);
        let mut out = Evaluation {
            design: *design,
            stealth,
            objectives: ObjectiveVector { mbsd: stealth.mbsd, lhd: f64::NAN, miffs: f64::NAN, aht: None },
            constraints: None,
            details: PerformanceDetails::default(),
            sim: None,
            sim_max: None,
            status: EvalStatus::Ok,
            feasible: false,
            violation: FAILURE_VIOLATION,
        };
        let cfg = match self.sim_config(design) {
            Ok(c) => c,
            Err(e) => {
                out.status = EvalStatus::Invalid(e.to_string());
                return out;
            }
        };
        let runs = simulate(&cfg).and_then(|s| Ok((s, max_amplitude_run(&cfg, self.settings.max_amplitude_deg)?)));
        let (sim, sim_max) = match runs {
            Ok(r) => r,
            Err(e) => {
                out.status = match e {
                    Error::Numeric(_) | Error::SingularInertia(_) => EvalStatus::NumericFailure(e.to_string()),
                    other => EvalStatus::Invalid(other.to_string()),
                };
                return out;
            }
        };
        self.score(&mut out, &cfg, sim, sim_max);
        out
    }

    fn score(&self, out: &mut Evaluation, cfg: &SimConfig, sim: SimResult, sim_max: SimResult) {
        let s = &self.settings;
        let cooling = CoolingSpec::for_motor(&cfg.motor, s.limits.delta_t);
        let report = constraints(&sim, &sim_max, &cfg.motor, &cooling, &s.limits);
        let l = sim.l_takeoff;
        let e_total = energy_total(l.max(0.0), &s.energy);
        let p_hover = hover_power(&sim, &s.energy);
        let p_front = hover_power(&sim_max, &s.energy);
        let lhd = if l > 0.0 && p_hover > 0.0 { e_total / p_hover } else { f64::NAN };
        let fwd = performance::miffs(sim_max.l_takeoff, l, &s.forward, s.physics.rho).ok();
        let miffs = fwd.map_or(f64::NAN, |f| f.speed);
        let aht = if lhd.is_finite() && miffs.is_finite() {
            aht(out.stealth.mbsd, miffs, e_total, p_hover, p_front).ok()
        } else {
            None
        };
        let m_tf = l.max(0.0) / s.energy.g;
        out.details = PerformanceDetails {
            l_hover: l,
            l_max: sim_max.l_takeoff,
            t_rest: fwd.map_or(f64::NAN, |f| f.t_rest),
            beta: fwd.map_or(f64::NAN, |f| f.beta),
            a_front: fwd.map_or(f64::NAN, |f| f.a_front),
            s_front_h: front_area(&out.design, &s.forward).map_or(f64::NAN, |a| a.s_front_h),
            e_total,
            p_hover,
            p_front,
            m_tf,
            m_bat: s.energy.eta_bat * m_tf,
            e_bat: s.energy.rho_ebat * s.energy.eta_bat * m_tf,
            p_other: s.energy.k_elc,
        };
        out.objectives = ObjectiveVector { mbsd: out.stealth.mbsd, lhd, miffs, aht };
        let objectives_ok = lhd.is_finite() && miffs.is_finite() && aht.is_some_and(f64::is_finite);
        // A mission that exhausts the battery in transit cannot be flown.
        let mission_ok = aht.is_some_and(|t| t >= 0.0);
        out.feasible = report.feasible && objectives_ok && mission_ok;
        out.violation = report.violation
            + if report.feasible && !objectives_ok { 1.0 } else { 0.0 }
            + aht.map_or(0.0, |t| if t < 0.0 && t.is_finite() { (-t / lhd.max(1.0)).min(1.0) } else { 0.0 });
        out.constraints = Some(report);
        out.sim = Some(sim);
        out.sim_max = Some(sim_max);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_design_reports_everything() {
        let ev = Evaluator::new(EvaluationSettings::reduced(), MotorDatabase::builtin()).unwrap();
        let e = ev.evaluate(&DesignPoint::default());
        assert_eq!(e.status, EvalStatus::Ok);
        let c = e.constraints.unwrap();
        assert_eq!(c.items().len(), 5);
        assert!(e.objectives.mbsd > 0.0);
        assert!(e.objectives.lhd > 0.0);
        assert!(e.details.l_hover > 0.0);
        assert_eq!(e.feasible, e.violation == 0.0);
    }

    #[test]
    fn bad_motor_is_invalid() {
        let ev = Evaluator::new(EvaluationSettings::reduced(), MotorDatabase::builtin()).unwrap();
        let e = ev.evaluate(&DesignPoint { id_motor: 21, ..Default::default() });
        assert!(matches!(e.status, EvalStatus::Invalid(_)));
        assert!(!e.feasible && e.violation == FAILURE_VIOLATION);
        assert!(e.objectives.mbsd > 0.0);
    }
}
