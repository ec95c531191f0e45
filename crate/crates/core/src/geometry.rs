//! Trapezoidal wing planform, its morphological parameters and a lumped
//! point-mass inertia estimate.
//!
//! Frame: origin where the flapping axis meets the leading edge, span along
//! +Y, chord along +Z (towards the trailing edge), thickness along X.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Aspect ratio enforced on every design-derived wing.
pub const DESIGN_ASPECT_RATIO: f64 = 3.302;
/// Tip-to-root chord ratio enforced on every design-derived wing.
pub const DESIGN_TAPER: f64 = 0.40;
/// Default membrane material (TPU) and thickness.
pub const TPU_DENSITY: f64 = 1100.0;
pub const DEFAULT_THICKNESS: f64 = 0.025e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WingGeometry {
    /// Tip radius from the flapping axis (m).
    pub r_tip: f64,
    /// Root offset from the flapping axis (m).
    pub delta_r: f64,
    pub c_root: f64,
    pub c_tip: f64,
    pub thickness: f64,
    pub density: f64,
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Morphology {
    pub mean_chord: f64,
    pub area: f64,
    pub aspect_ratio: f64,
    /// Dimensionless second moment of area.
    pub r2: f64,
    /// Second-moment radius (m).
    pub big_r2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InertiaTensor {
    pub jxx: f64,
    pub jyy: f64,
    pub jzz: f64,
    pub jyz: f64,
}

impl WingGeometry {
    /// Validating constructor with the default 2x10x10 discretisation.
    pub fn new(r_tip: f64, delta_r: f64, c_root: f64, c_tip: f64, thickness: f64, density: f64) -> Result<Self> {
        let g = WingGeometry { r_tip, delta_r, c_root, c_tip, thickness, density, nx: 2, ny: 10, nz: 10 };
        g.validate()?;
        Ok(g)
    }

    /// The planform implied by a semi-span under the fixed aspect ratio and
    /// taper used throughout the design space.
    pub fn from_semi_span(r_tip: f64, thickness: f64, density: f64) -> Result<Self> {
        if !(r_tip > 0.0) {
            return domain(format!("semi-span must be positive, got {r_tip}"));
        }
        let area = r_tip * r_tip / DESIGN_ASPECT_RATIO;
        let mean_chord = area / r_tip;
        let c_root = 2.0 * mean_chord / (1.0 + DESIGN_TAPER);
        Self::new(r_tip, 0.0, c_root, DESIGN_TAPER * c_root, thickness, density)
    }

    pub fn with_grid(mut self, nx: usize, ny: usize, nz: usize) -> Result<Self> {
        self.nx = nx;
        self.ny = ny;
        self.nz = nz;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.r_tip, self.delta_r, self.c_root, self.c_tip, self.thickness, self.density]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return domain("wing geometry has non-finite fields");
        }
        if !(self.r_tip > self.delta_r && self.delta_r >= 0.0) {
            return domain("wing geometry requires R > deltaR >= 0");
        }
        if !(self.c_root > 0.0 && self.c_tip > 0.0 && self.c_tip <= self.c_root) {
            return domain("wing geometry requires 0 < cT <= cR");
        }
        if !(self.thickness > 0.0) {
            return domain("wing thickness must be positive");
        }
        if self.density < 0.0 {
            return domain("wing density must be non-negative");
        }
        if self.nx < 2 || self.ny < 2 || self.nz < 2 {
            return domain("inertia grid needs at least 2 cells per axis");
        }
        Ok(())
    }

    pub fn span_length(&self) -> f64 {
        self.r_tip - self.delta_r
    }

    /// Chord at radius `r`, no range check (used by the strip integrators).
    #[inline]
    pub(crate) fn chord_unchecked(&self, r: f64) -> f64 {
        let s = (r - self.delta_r) / self.span_length();
        self.c_root + (self.c_tip - self.c_root) * s
    }
}

pub fn chord_at(geom: &WingGeometry, r: f64) -> Result<f64> {
    let tol = 1e-12 * geom.r_tip.abs().max(1.0);
    if !(r >= geom.delta_r - tol && r <= geom.r_tip + tol) {
        return domain(format!("r = {r} outside [{}, {}]", geom.delta_r, geom.r_tip));
    }
    Ok(geom.chord_unchecked(r))
}

pub fn morphology(geom: &WingGeometry) -> Morphology {
    let (a, b) = (geom.delta_r, geom.r_tip);
    let len = b - a;
    let area = 0.5 * (geom.c_root + geom.c_tip) * len;
    let mean_chord = area / len;
    // c(r) = p + q r, so the integral of c r^2 is a polynomial in the limits.
    let q = (geom.c_tip - geom.c_root) / len;
    let p = geom.c_root - q * a;
    let second = p * (b.powi(3) - a.powi(3)) / 3.0 + q * (b.powi(4) - a.powi(4)) / 4.0;
    let big_r2 = (second / area).sqrt();
    Morphology { mean_chord, area, aspect_ratio: b * b / area, r2: big_r2 / b, big_r2 }
}

/// Lumped cuboid estimate: every cell's mass sits at its centroid.
pub fn wing_inertia(geom: &WingGeometry) -> Result<InertiaTensor> {
    geom.validate()?;
    let dx = geom.thickness / geom.nx as f64;
    let dy = geom.span_length() / geom.ny as f64;
    let mut t = InertiaTensor { jxx: 0.0, jyy: 0.0, jzz: 0.0, jyz: 0.0 };
    for j in 0..geom.ny {
        let y = geom.delta_r + (j as f64 + 0.5) * dy;
        let c = geom.chord_unchecked(y);
        let dz = c / geom.nz as f64;
        let m = geom.density * dx * dy * dz;
        for k in 0..geom.nz {
            let z = (k as f64 + 0.5) * dz;
            for i in 0..geom.nx {
                let x = -0.5 * geom.thickness + (i as f64 + 0.5) * dx;
                t.jxx += m * (y * y + z * z);
                t.jyy += m * (x * x + z * z);
                t.jzz += m * (x * x + y * y);
                t.jyz += m * y * z;
            }
        }
    }
    Ok(t)
}

/// Total membrane mass (kg).
pub fn wing_mass(geom: &WingGeometry) -> f64 {
    morphology(geom).area * geom.thickness * geom.density
}
