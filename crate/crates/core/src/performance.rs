//! Objectives and constraints computed from a pair of settled simulations:
//! the design run and the full-stroke run.

use serde::{Deserialize, Serialize};

use crate::design::DesignPoint;
use crate::drivetrain::{cooling_capacity, CoolingSpec, MotorParams};
use crate::dynamics::SimResult;
use crate::error::{domain, Error, Result};
use crate::geometry::WingGeometry;

pub const G: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyModel {
    /// Battery mass as a fraction of take-off mass.
    pub eta_bat: f64,
    /// Battery specific energy (J/kg).
    pub rho_ebat: f64,
    pub eta_boost: f64,
    pub eta_used: f64,
    /// Electronics power draw (W).
    pub k_elc: f64,
    /// Gravitational acceleration used to turn lift into mass.
    pub g: f64,
}

impl Default for EnergyModel {
    fn default() -> Self {
        EnergyModel { eta_bat: 0.241, rho_ebat: 6.5e5, eta_boost: 0.90, eta_used: 0.85, k_elc: 0.5, g: G }
    }
}

impl EnergyModel {
    pub fn validate(&self) -> Result<()> {
        for (n, v) in [("eta_bat", self.eta_bat), ("eta_boost", self.eta_boost), ("eta_used", self.eta_used)] {
            if !(v > 0.0 && v <= 1.0) {
                return domain(format!("{n} must lie in (0, 1]"));
            }
        }
        if !(self.rho_ebat > 0.0) || !(self.k_elc >= 0.0) || !(self.g > 0.0) {
            return domain("rho_ebat and g must be positive and k_elc non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardFlightModel {
    pub c_d: f64,
    /// Frontal area set by the electronics (m^2).
    pub a_lt: f64,
    /// Gear module (m).
    pub m_tr: f64,
    /// Teeth on the motor pinion.
    pub t_motor: f64,
}

impl Default for ForwardFlightModel {
    fn default() -> Self {
        ForwardFlightModel { c_d: 1.0, a_lt: 0.004, m_tr: 0.3e-3, t_motor: 9.0 }
    }
}

impl ForwardFlightModel {
    pub fn validate(&self) -> Result<()> {
        if [self.c_d, self.a_lt, self.m_tr, self.t_motor].iter().all(|v| *v > 0.0) {
            Ok(())
        } else {
            domain("forward-flight parameters must be positive")
        }
    }
}

/// Thresholds of the five design constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintLimits {
    /// Largest allowed motor share of take-off weight.
    pub c_mp: f64,
    /// Required ratio of full-stroke lift to hover lift.
    pub c_manv: f64,
    /// Allowed motor temperature rise (K).
    pub delta_t: f64,
    pub g: f64,
}

impl Default for ConstraintLimits {
    fn default() -> Self {
        ConstraintLimits { c_mp: 0.35, c_manv: 1.2, delta_t: 40.0, g: G }
    }
}

impl ConstraintLimits {
    pub fn validate(&self) -> Result<()> {
        if [self.c_mp, self.c_manv, self.delta_t, self.g].iter().all(|v| *v > 0.0) {
            Ok(())
        } else {
            domain("constraint limits must be positive")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub pass: bool,
    /// Positive when satisfied; the relative distance to the limit.
    pub margin: f64,
}

impl Constraint {
    fn from_margin(margin: f64) -> Self {
        Constraint { pass: margin > 0.0, margin }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub motor_speed: Constraint,
    pub motor_current: Constraint,
    pub motor_weight_fraction: Constraint,
    pub lift_margin: Constraint,
    pub cooling: Constraint,
    pub settled: bool,
    pub feasible: bool,
    /// Sum of negative margins, plus one per unsettled run.
    pub violation: f64,
}

impl ConstraintReport {
    pub fn items(&self) -> [(&'static str, Constraint); 5] {
        [
            ("motor_speed", self.motor_speed),
            ("motor_current", self.motor_current),
            ("motor_weight_fraction", self.motor_weight_fraction),
            ("lift_margin", self.lift_margin),
            ("cooling", self.cooling),
        ]
    }
}

/// Margin assigned when there is no positive lift to compare against.
const NO_LIFT_MARGIN: f64 = -10.0;

/// Total cycle-mean lift of the four wings. Unsettled runs and non-positive
/// lift cannot take off.
pub fn takeoff_weight(sim: &SimResult) -> Result<f64> {
    let l: f64 = sim.mean_lift_per_wing.iter().sum();
    if !sim.settled {
        return Err(Error::Domain("simulation did not settle".into()));
    }
    if !(l > 0.0) {
        return Err(Error::Domain(format!("net lift {l:.4e} N cannot lift off")));
    }
    Ok(l)
}

fn max4(v: &[f64; 4]) -> f64 {
    v.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b))
}

pub fn constraints(
    sim: &SimResult,
    sim_max: &SimResult,
    motor: &MotorParams,
    cooling: &CoolingSpec,
    limits: &ConstraintLimits,
) -> ConstraintReport {
    let l = sim.l_takeoff;
    let speed = 1.0 - max4(&sim.max_motor_speed) / motor.max_speed();
    let current = 1.0 - max4(&sim.max_current) / motor.max_current;
    let (weight, lift) = if l > 0.0 {
        let frac = 4.0 * motor.mass * limits.g / l;
        (1.0 - frac / limits.c_mp, sim_max.l_takeoff / (limits.c_manv * l) - 1.0)
    } else {
        (NO_LIFT_MARGIN, NO_LIFT_MARGIN)
    };
    let heat = 1.0 - max4(&sim.mean_heat) / cooling_capacity(cooling);
    let report = [speed, current, weight, lift, heat].map(Constraint::from_margin);
    let settled = sim.settled && sim_max.settled;
    let mut violation: f64 = report.iter().map(|c| (-c.margin).max(0.0)).sum();
    violation += (!sim.settled) as u8 as f64 + (!sim_max.settled) as u8 as f64;
    ConstraintReport {
        motor_speed: report[0],
        motor_current: report[1],
        motor_weight_fraction: report[2],
        lift_margin: report[3],
        cooling: report[4],
        settled,
        feasible: settled && l > 0.0 && report.iter().all(|c| c.pass),
        violation,
    }
}

/// Usable battery energy for a take-off weight `l` (N).
pub fn energy_total(l: f64, e: &EnergyModel) -> f64 {
    e.rho_ebat * (e.eta_bat * l / e.g) * e.eta_boost * e.eta_used
}

pub fn hover_power(sim: &SimResult, e: &EnergyModel) -> f64 {
    sim.mean_electrical_power.iter().sum::<f64>() + e.k_elc
}

/// Longest hover duration (s).
pub fn lhd(sim: &SimResult, e: &EnergyModel) -> Result<f64> {
    let p = hover_power(sim, e);
    if !(p > 0.0) {
        return domain(format!("hover power {p:.4e} W is not positive"));
    }
    Ok(energy_total(sim.l_takeoff, e) / p)
}

/// Drag-limited speed for residual thrust `t_rest` on frontal area `a_front`.
pub fn forward_speed(t_rest: f64, a_front: f64, c_d: f64, rho: f64) -> f64 {
    if t_rest <= 0.0 {
        return 0.0;
    }
    (2.0 * t_rest / (c_d * rho * a_front)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForwardFlight {
    pub t_rest: f64,
    /// Tilt between the full-stroke lift vector and the hover requirement.
    pub beta: f64,
    pub a_front: f64,
    pub speed: f64,
}

/// Maximum instantaneous forward speed from full-stroke and hover lift.
pub fn miffs(l_max: f64, l_hover: f64, ff: &ForwardFlightModel, rho: f64) -> Result<ForwardFlight> {
    if !(l_hover > 0.0) || !(l_max >= l_hover) {
        return domain(format!("full-stroke lift {l_max:.4e} N does not cover hover lift {l_hover:.4e} N"));
    }
    let t_rest = (l_max * l_max - l_hover * l_hover).sqrt();
    let sin_b = t_rest / l_max;
    let a_front = ff.a_lt * sin_b;
    Ok(ForwardFlight { t_rest, beta: sin_b.asin(), a_front, speed: forward_speed(t_rest, a_front, ff.c_d, rho) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrontArea {
    pub s_w: f64,
    pub s_act: f64,
    pub s_front_h: f64,
}

/// Area covered by the four wings and the two drive assemblies.
pub fn front_area(design: &DesignPoint, ff: &ForwardFlightModel) -> Result<FrontArea> {
    let g = WingGeometry::from_semi_span(design.r, 1.0, 1.0)?;
    Ok(front_area_of(&g, design.gamma_tr, ff))
}

pub fn front_area_of(g: &WingGeometry, gamma_tr: f64, ff: &ForwardFlightModel) -> FrontArea {
    let s_w = 0.5 * (g.c_tip + g.c_root) * (g.r_tip - g.delta_r);
    let s_act = g.c_root * (gamma_tr + 1.0) * ff.m_tr * ff.t_motor;
    FrontArea { s_w, s_act, s_front_h: 4.0 * s_w + 2.0 * s_act }
}

/// Hover seconds bought per metre of stealth distance; infinite at zero MBSD.
pub fn e_lhd(lhd: f64, mbsd: f64) -> f64 {
    if mbsd > 0.0 {
        lhd / mbsd
    } else {
        f64::INFINITY
    }
}

/// Time to cross the stealth distance at full forward speed.
pub fn e_miffs(mbsd: f64, miffs: f64) -> f64 {
    if miffs > 0.0 {
        mbsd / miffs
    } else {
        f64::INFINITY
    }
}

/// Hover time left after the transit legs of the standard mission: one full
/// circle at the stealth radius plus the radius out and back. Negative when
/// the transit alone exhausts the battery.
pub fn aht(mbsd: f64, miffs: f64, e_total: f64, p_hover: f64, p_front: f64) -> Result<f64> {
    if !(p_hover > 0.0) {
        return domain("hover power must be positive");
    }
    let transit = if mbsd == 0.0 {
        0.0
    } else if miffs > 0.0 {
        mbsd * (2.0 * std::f64::consts::PI + 2.0) / miffs * p_front
    } else {
        f64::INFINITY
    };
    Ok((e_total - transit) / p_hover)
}

/// Intermediate quantities behind the objectives.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PerformanceDetails {
    pub l_hover: f64,
    pub l_max: f64,
    pub t_rest: f64,
    pub beta: f64,
    pub a_front: f64,
    pub s_front_h: f64,
    pub e_total: f64,
    pub p_hover: f64,
    pub p_front: f64,
    /// Take-off mass (kg).
    pub m_tf: f64,
    pub m_bat: f64,
    pub e_bat: f64,
    pub p_other: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveVector {
    pub mbsd: f64,
    pub lhd: f64,
    pub miffs: f64,
    pub aht: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivetrain::MotorDatabase;
    use proptest::prelude::*;

    fn sim(lift: f64, power: f64) -> SimResult {
        SimResult {
            mean_lift_per_wing: [lift / 4.0; 4],
            l_takeoff: lift,
            achieved_amplitude: [1.0; 4],
            achieved_frequency: 30.0,
            max_motor_speed: [1000.0; 4],
            max_current: [0.2; 4],
            mean_electrical_power: [power / 4.0; 4],
            mean_heat: [0.01; 4],
            settled: true,
            cycles_used: 10,
            steps_per_cycle: 200,
            tandem_clamps: 0,
        }
    }

    fn motor() -> MotorParams {
        MotorDatabase::builtin().lookup(3).unwrap().clone()
    }

    #[test]
    fn takeoff_weight_examples() {
        assert!((takeoff_weight(&sim(0.4, 1.0)).unwrap() - 0.4).abs() < 1e-15);
        assert!(takeoff_weight(&sim(-0.1, 1.0)).is_err());
        let mut s = sim(0.4, 1.0);
        s.settled = false;
        assert!(takeoff_weight(&s).is_err());
    }

    #[test]
    fn constraint_examples() {
        let m = motor();
        let c = CoolingSpec::for_motor(&m, 40.0);
        let l = ConstraintLimits::default();
        let r = constraints(&sim(0.6, 2.0), &sim(0.9, 3.0), &m, &c, &l);
        assert!(r.feasible, "{r:?}");
        assert_eq!(r.violation, 0.0);

        let r = constraints(&sim(0.6, 2.0), &sim(0.6, 3.0), &m, &c, &l);
        assert!(!r.lift_margin.pass && !r.feasible);
        assert!((r.lift_margin.margin - (1.0 / 1.2 - 1.0)).abs() < 1e-12);

        // Four 3 g motors on a design lifting 0.3 N.
        let r = constraints(&sim(0.3, 2.0), &sim(0.5, 3.0), &m, &c, &l);
        let frac = 4.0 * 3e-3 * G / 0.3;
        assert!((frac - 0.392).abs() < 1e-3);
        assert!(!r.motor_weight_fraction.pass);
        assert!((r.motor_weight_fraction.margin - (1.0 - frac / 0.35)).abs() < 1e-12);

        let mut hot = sim(0.6, 2.0);
        hot.settled = false;
        let r = constraints(&hot, &sim(0.9, 3.0), &m, &c, &l);
        assert!(!r.feasible && r.violation >= 1.0);
    }

    #[test]
    fn more_current_headroom_never_hurts() {
        let mut m = motor();
        let c = CoolingSpec::for_motor(&m, 40.0);
        let l = ConstraintLimits::default();
        let before = constraints(&sim(0.6, 2.0), &sim(0.9, 3.0), &m, &c, &l);
        m.max_current *= 3.0;
        let after = constraints(&sim(0.6, 2.0), &sim(0.9, 3.0), &m, &c, &l);
        assert!(before.feasible && after.feasible);
        assert!(after.motor_current.margin > before.motor_current.margin);
    }

    #[test]
    fn lhd_examples() {
        let e = EnergyModel { eta_bat: 1.0, rho_ebat: 1000.0 * G, eta_boost: 1.0, eta_used: 1.0, k_elc: 0.0, g: G };
        // 1 N of take-off weight carries 1000 J here.
        assert!((lhd(&sim(1.0, 1.0), &e).unwrap() - 1000.0).abs() < 1e-9);
        let e2 = EnergyModel { eta_bat: 0.5, ..e };
        let e4 = EnergyModel { eta_bat: 1.0, ..e };
        let a = lhd(&sim(1.0, 1.0), &e2).unwrap();
        let b = lhd(&sim(1.0, 1.0), &e4).unwrap();
        assert!((b - 2.0 * a).abs() < 1e-9);
        assert!(lhd(&sim(1.0, 0.0), &e).is_err());
    }

    #[test]
    fn miffs_examples() {
        let ff = ForwardFlightModel::default();
        assert_eq!(miffs(0.5, 0.5, &ff, 1.225).unwrap().speed, 0.0);
        assert!(miffs(0.4, 0.5, &ff, 1.225).is_err());
        let t_rest = (0.6f64 * 0.6 - 0.48 * 0.48).sqrt();
        assert!((t_rest - 0.36).abs() < 1e-12);
        let v = forward_speed(t_rest, 0.003, 1.0, 1.225);
        assert!((v - 14.0).abs() < 0.05, "{v}");
        let f = miffs(0.6, 0.48, &ff, 1.225).unwrap();
        assert!((f.beta.cos() - 0.8).abs() < 1e-12);
        assert!((f.a_front - 0.004 * 0.6).abs() < 1e-15);
    }

    #[test]
    fn front_area_examples() {
        let ff = ForwardFlightModel::default();
        let d = DesignPoint::default();
        let a = front_area(&d, &ff).unwrap();
        let g = WingGeometry::from_semi_span(d.r, 1.0, 1.0).unwrap();
        let morph = crate::geometry::morphology(&g);
        assert!((a.s_w - morph.area).abs() < 1e-15);
        let edge = front_area_of(&g, 0.0, &ff);
        assert!((edge.s_act - g.c_root * ff.m_tr * ff.t_motor).abs() < 1e-18);
        let big = front_area(&DesignPoint { r: 2.0 * d.r, ..d }, &ff).unwrap();
        assert!((big.s_w - 4.0 * a.s_w).abs() < 1e-15);
        assert!((a.s_front_h - (4.0 * a.s_w + 2.0 * a.s_act)).abs() < 1e-18);
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(e_lhd(1000.0, 100.0), 10.0);
        assert_eq!(e_miffs(100.0, 10.0), 10.0);
        assert!(e_lhd(1000.0, 0.0).is_infinite());
        assert!(e_miffs(100.0, 0.0).is_infinite());
    }

    #[test]
    fn aht_examples() {
        assert_eq!(aht(0.0, 5.0, 1000.0, 2.0, 3.0).unwrap(), 500.0);
        let transit_equal = 1000.0 / ((2.0 * std::f64::consts::PI + 2.0) / 5.0 * 3.0);
        assert!(aht(transit_equal, 5.0, 1000.0, 2.0, 3.0).unwrap().abs() < 1e-9);
        assert!(aht(300.0, 5.0, 1000.0, 2.0, 3.0).unwrap() < 0.0);
        assert!(aht(10.0, 0.0, 1000.0, 2.0, 3.0).unwrap() == f64::NEG_INFINITY);
    }

    proptest! {
        #[test]
        fn miffs_increases_with_full_stroke_lift(
            l_hover in 0.05f64..1.0, a in 1.01f64..3.0, b in 1.01f64..3.0,
        ) {
            let ff = ForwardFlightModel::default();
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            prop_assume!(hi - lo > 1e-6);
            let v1 = miffs(lo * l_hover, l_hover, &ff, 1.225).unwrap().speed;
            let v2 = miffs(hi * l_hover, l_hover, &ff, 1.225).unwrap().speed;
            prop_assert!(v2 > v1);
        }

        #[test]
        fn aht_never_exceeds_lhd(mbsd in 0.0f64..500.0, v in 0.1f64..20.0, e in 1.0f64..5000.0, p in 0.1f64..10.0, pf in 0.0f64..20.0) {
            prop_assert!(aht(mbsd, v, e, p, pf).unwrap() <= e / p + 1e-12);
        }

        #[test]
        fn lhd_linear_in_specific_energy(k in 0.1f64..10.0) {
            let e = EnergyModel::default();
            let a = lhd(&sim(0.5, 2.0), &e).unwrap();
            let b = lhd(&sim(0.5, 2.0), &EnergyModel { rho_ebat: k * e.rho_ebat, ..e }).unwrap();
            prop_assert!((b - k * a).abs() <= 1e-9 * b.abs());
        }
    }
}
