//! Resonant spring sizing, viscoelastic membrane torque, the motor table,
//! a first-order DC motor model and a steady-state cooling bound.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MotorParams {
    pub id: usize,
    pub name: String,
    pub rated_voltage: f64,
    pub max_current: f64,
    /// No-load current (A).
    pub i0: f64,
    pub r0: f64,
    /// Speed constant (rpm/V).
    pub kv: f64,
    pub mass: f64,
    pub rotor_inertia: f64,
}

impl MotorParams {
    pub fn kt(&self) -> f64 {
        30.0 / (PI * self.kv)
    }

    pub fn kv_rad(&self) -> f64 {
        self.kv * 2.0 * PI / 60.0
    }

    /// Speed limit: no-load speed at rated voltage plus 10%.
    pub fn max_speed(&self) -> f64 {
        1.1 * self.rated_voltage * self.kv_rad()
    }
}

/// Thin-shell rotor estimate used when a row carries no rotor inertia.
pub fn default_rotor_inertia(mass: f64) -> f64 {
    0.4 * mass * 2.5e-3 * 2.5e-3
}

// name, V, Imax (A), I0 (mA), R0 (ohm), kv (rpm/V), mass (g)
const MOTOR_ROWS: [(&str, f64, f64, f64, f64, f64, f64); 21] = [
    ("ECX-Prime-235-6V", 6.0, 2.04, 83.8, 2.94, 6310.0, 3.0),
    ("ECX-Prime-235-12V", 12.0, 1.02, 41.9, 11.7, 3150.0, 3.0),
    ("CN-174-3V", 3.0, 3.92, 149.0, 0.766, 25800.0, 3.0),
    ("CN-174-6V", 6.0, 1.72, 58.8, 3.49, 10800.0, 3.0),
    ("CN-174-12V", 12.0, 0.97, 29.8, 12.4, 5460.0, 3.0),
    ("CN-173-6V", 6.0, 0.688, 46.5, 8.72, 7900.0, 3.0),
    ("CN-173-12V", 12.0, 0.188, 16.2, 63.8, 3040.0, 3.0),
    ("CN-176-6V", 6.0, 3.34, 128.0, 1.8, 6160.0, 6.0),
    ("CN-176-9V", 9.0, 1.7, 63.4, 5.3, 3360.0, 6.0),
    ("CN-176-12V", 12.0, 1.43, 50.9, 8.38, 2640.0, 6.0),
    ("CN-175-6", 6.0, 1.98, 105.0, 3.02, 6230.0, 6.0),
    ("CN-175-12", 12.0, 1.54, 69.0, 7.8, 3780.0, 6.0),
    ("CN-175-24", 24.0, 0.755, 33.2, 31.8, 1840.0, 6.0),
    ("CN_0620_B_FMM-6V", 6.0, 0.79788, 56.0, 8.8, 8761.0, 2.5),
    ("CN_0620_B_FMM-12V", 12.0, 1.55382, 18.0, 60.2, 3386.0, 2.5),
    ("CN_0824_B_FMM-6V", 6.0, 5.248, 55.0, 2.91, 5968.0, 5.2),
    ("CN_0824_B_FMM-12V", 12.0, 10.02, 31.0, 10.7, 3183.0, 5.2),
    ("otecs0921w-3", 3.0, 0.925, 45.0, 3.24, 5606.0, 6.5),
    ("otecs0921w-6", 6.0, 1.99, 69.0, 3.02, 6182.0, 6.5),
    ("otecs0921w-12", 12.0, 1.685, 75.0, 7.12, 3663.0, 6.5),
    ("otecs0921w-24", 24.0, 0.759, 22.0, 31.6, 1830.0, 6.5),
];

#[derive(Debug, Clone, PartialEq)]
pub struct MotorDatabase {
    motors: Vec<MotorParams>,
}

impl Default for MotorDatabase {
    fn default() -> Self {
        Self::builtin()
    }
}

impl MotorDatabase {
    pub fn builtin() -> Self {
        let motors = MOTOR_ROWS
            .iter()
            .enumerate()
            .map(|(id, &(name, v, imax, i0_ma, r0, kv, mass_g))| MotorParams {
                id,
                name: name.to_string(),
                rated_voltage: v,
                max_current: imax,
                i0: i0_ma * 1e-3,
                r0,
                kv,
                mass: mass_g * 1e-3,
                rotor_inertia: default_rotor_inertia(mass_g * 1e-3),
            })
            .collect();
        MotorDatabase { motors }
    }

    pub fn len(&self) -> usize {
        self.motors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.motors.is_empty()
    }

    pub fn motors(&self) -> &[MotorParams] {
        &self.motors
    }

    pub fn lookup(&self, id: i64) -> Result<&MotorParams> {
        if id < 0 || id as usize >= self.motors.len() {
            return Err(Error::MotorLookup(id, self.motors.len().saturating_sub(1)));
        }
        Ok(&self.motors[id as usize])
    }

    /// Loads a replacement table. An empty rotor-inertia cell falls back to
    /// the thin-shell estimate.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_csv_str(&text)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        const HEADER: [&str; 9] =
            ["id", "name", "voltage_V", "imax_A", "i0_mA", "r0_ohm", "kv_rpm_per_V", "mass_g", "rotor_inertia_kgm2"];
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
        let headers = rdr.headers()?.clone();
        if headers.iter().collect::<Vec<_>>() != HEADER {
            return Err(Error::ConfigValue(format!("motor CSV header must be {}", HEADER.join(","))));
        }
        let mut motors = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |i: usize| -> Result<f64> {
                rec[i]
                    .parse::<f64>()
                    .map_err(|_| Error::ConfigValue(format!("motor CSV row {}: bad number '{}'", row + 1, &rec[i])))
            };
            let id = num(0)? as usize;
            if id != motors.len() {
                return Err(Error::ConfigValue(format!("motor CSV row {}: ids must be consecutive from 0", row + 1)));
            }
            let mass = num(7)? * 1e-3;
            let rotor_inertia = if rec[8].is_empty() { default_rotor_inertia(mass) } else { num(8)? };
            let m = MotorParams {
                id,
                name: rec[1].to_string(),
                rated_voltage: num(2)?,
                max_current: num(3)?,
                i0: num(4)? * 1e-3,
                r0: num(5)?,
                kv: num(6)?,
                mass,
                rotor_inertia,
            };
            let positive = [m.rated_voltage, m.max_current, m.i0, m.r0, m.kv, m.mass, m.rotor_inertia]
                .iter()
                .all(|v| *v > 0.0 && v.is_finite());
            if !positive || m.max_current <= m.i0 {
                return Err(Error::ConfigValue(format!(
                    "motor CSV row {}: values must be positive with imax > i0",
                    row + 1
                )));
            }
            motors.push(m);
        }
        if motors.is_empty() {
            return Err(Error::ConfigValue("motor CSV has no rows".into()));
        }
        Ok(MotorDatabase { motors })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpringSpec {
    pub k_a: f64,
}

pub fn spring_for_frequency(f: f64, j_gear: f64, j_wing: f64, j_rotor: f64, gamma: f64) -> Result<SpringSpec> {
    if !(f > 0.0) {
        return domain(format!("spring frequency must be positive, got {f}"));
    }
    if j_gear < 0.0 || j_wing < 0.0 || j_rotor < 0.0 {
        return domain("inertias must be non-negative");
    }
    let j_total = j_gear + j_wing + gamma * gamma * j_rotor;
    Ok(SpringSpec { k_a: 4.0 * PI * PI * f * f * j_total })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembraneParams {
    pub c_c1: f64,
    pub c_scale1: f64,
    pub c_move: f64,
    pub k1: f64,
    pub sigma: f64,
    pub mu: f64,
    pub theta_tat: f64,
    /// Damping time scale (s): membrane damping is the tension gate times
    /// this value.
    pub c_wing_ref: f64,
}

impl Default for MembraneParams {
    fn default() -> Self {
        MembraneParams {
            c_c1: 5e-3,
            c_scale1: 1.0,
            c_move: 5.0,
            k1: 1.0,
            sigma: 0.4,
            mu: 0.0,
            theta_tat: PI / 3.0,
            c_wing_ref: 1e-3,
        }
    }
}

impl MembraneParams {
    fn gauss8(&self, x: f64) -> f64 {
        let z = (x - self.mu) / self.sigma;
        (-0.5 * z.powi(8)).exp() / (self.sigma * (2.0 * PI).sqrt())
    }

    /// Un-normalised stiffness shape at pitch angle `theta`.
    pub fn k_ws_raw(&self, theta: f64) -> f64 {
        let a = (self.k1 - self.gauss8(self.k1 * theta)) / self.k1;
        let b = (self.k1 - self.gauss8(0.0)) / self.k1;
        a * a - b * b
    }

    pub fn k_ws_ref(&self) -> f64 {
        self.k_ws_raw(self.theta_tat)
    }

    pub fn stiffness_shape(&self, theta: f64) -> f64 {
        self.k_ws_raw(theta) / self.k_ws_ref()
    }

    pub fn tension(&self, theta_dot: f64, phi_dot: f64) -> f64 {
        let c = self.c_scale1 * (theta_dot * phi_dot) - self.c_move;
        self.c_c1 / (1.0 + (-c * c).exp())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.k1 > 0.0) {
            return domain("membrane sigma and k1 must be positive");
        }
        if self.k_ws_ref() == 0.0 || !self.k_ws_ref().is_finite() {
            return domain("membrane reference stiffness is degenerate");
        }
        Ok(())
    }
}

/// Membrane torque T = K theta + C theta_dot with the tension-gated stiffness
/// and damping. The dynamics apply it as a restoring moment (with a minus).
pub fn membrane_torque(theta: f64, theta_dot: f64, phi_dot: f64, p: &MembraneParams) -> f64 {
    let gate = p.tension(theta_dot, phi_dot);
    gate * p.stiffness_shape(theta) * theta + gate * p.c_wing_ref * theta_dot
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MotorState {
    pub wm: f64,
    pub tm: f64,
    pub um: f64,
    pub im: f64,
    pub pm: f64,
}

pub fn motor_electrical(w_wing: f64, t_wing: f64, gamma: f64, eta_tr: f64, m: &MotorParams) -> MotorState {
    let wm = w_wing * gamma;
    let tm = t_wing / (gamma * eta_tr);
    let im = m.i0 + tm / m.kt();
    let um = m.r0 * im + wm / m.kv_rad();
    MotorState { wm, tm, um, im, pm: um * im }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoolingSpec {
    pub rth_stand: f64,
    pub s_stand: f64,
    pub s_i: f64,
    pub delta_t: f64,
}

pub const RTH_STAND: f64 = 9.88;
pub const MOTOR_DENSITY: f64 = 6000.0;
pub const REFERENCE_MOTOR_MASS: f64 = 3e-3;

/// Surface of a solid cylinder with length twice its diameter and the given
/// mass at `density`.
pub fn cylinder_area_from_mass(mass: f64, density: f64) -> f64 {
    let volume = mass / density;
    // V = pi d^2 / 4 * 2 d
    let d = (2.0 * volume / PI).cbrt();
    2.5 * PI * d * d
}

impl CoolingSpec {
    pub fn for_motor(m: &MotorParams, delta_t: f64) -> Self {
        CoolingSpec {
            rth_stand: RTH_STAND,
            s_stand: cylinder_area_from_mass(REFERENCE_MOTOR_MASS, MOTOR_DENSITY),
            s_i: cylinder_area_from_mass(m.mass, MOTOR_DENSITY),
            delta_t,
        }
    }
}

pub fn cooling_capacity(c: &CoolingSpec) -> f64 {
    c.delta_t / (c.rth_stand * c.s_stand / c.s_i)
}
