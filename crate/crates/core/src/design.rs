use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// The five design variables. Amplitude is the CPG half-amplitude in degrees,
/// so the commanded stroke spans twice this value peak to peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DesignPoint {
    pub phi_am: f64,
    pub f_wing: f64,
    pub r: f64,
    pub id_motor: i64,
    pub gamma_tr: f64,
}

/// Lower and upper bounds in vector order (phiAm, fWing, R, idMotor, gammaTr).
pub const LOWER: [f64; 5] = [10.0, 15.0, 0.05, 0.0, 5.0];
pub const UPPER: [f64; 5] = [85.0, 50.0, 0.12, 20.0, 35.0];
pub const NAMES: [&str; 5] = ["phiAm", "fWing", "R", "idMotor", "gammaTr"];
pub const INTEGER_MASK: [bool; 5] = [false, false, false, true, false];

impl Default for DesignPoint {
    fn default() -> Self {
        DesignPoint { phi_am: 80.0, f_wing: 34.0, r: 0.075, id_motor: 3, gamma_tr: 25.0 }
    }
}

impl DesignPoint {
    pub fn phi_am_rad(&self) -> f64 {
        self.phi_am.to_radians()
    }

    pub fn to_vec(&self) -> [f64; 5] {
        [self.phi_am, self.f_wing, self.r, self.id_motor as f64, self.gamma_tr]
    }

    /// Builds a design from a raw vector, rounding the motor index and
    /// clipping everything into bounds.
    pub fn from_vec_repaired(x: &[f64]) -> DesignPoint {
        let c = |i: usize| x[i].clamp(LOWER[i], UPPER[i]);
        DesignPoint { phi_am: c(0), f_wing: c(1), r: c(2), id_motor: c(3).round() as i64, gamma_tr: c(4) }
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.to_vec();
        for i in 0..5 {
            if !v[i].is_finite() || v[i] < LOWER[i] || v[i] > UPPER[i] {
                return domain(format!("{} = {} outside [{}, {}]", NAMES[i], v[i], LOWER[i], UPPER[i]));
            }
        }
        Ok(())
    }
}
