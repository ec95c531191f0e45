//! Quasi-steady single-wing loads: translational, rotational and added-mass
//! parts, integrated over spanwise strips.
//!
//! The strip reference point sits on the pitch axis (the leading edge), so the
//! local velocity only depends on the flapping rate. Positive `phi_dot` moves
//! the plate towards -X in the wing frame.

use serde::{Deserialize, Serialize};

use crate::geometry::{morphology, Morphology, WingGeometry};

pub const CN_PEAK: f64 = 3.48;
pub const CT_PEAK: f64 = 0.4;
pub const TR_CHORD_ARM: f64 = 0.388;
pub const ROT_SPAN_ARM: f64 = 0.993;
pub const ROT_CHORD_ARM: f64 = 0.398;
pub const ADD_SPAN_ARM: f64 = 1.078;
pub const ADD_CHORD_ARM: f64 = 0.500;
const ROT_DAMPING: f64 = 2.67;

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WingKinematicState {
    pub phi: f64,
    pub theta: f64,
    pub phi_dot: f64,
    pub theta_dot: f64,
    pub phi_ddot: f64,
    pub theta_ddot: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripState {
    pub r: f64,
    pub alpha: f64,
    pub u: f64,
    pub vx: f64,
    pub vz: f64,
}

/// One load contribution in the wing frame. `tx` is kept for completeness;
/// the dynamics only consume `ty` and `tz`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadComponent {
    pub fx: f64,
    pub fz: f64,
    pub tx: f64,
    pub ty: f64,
    pub tz: f64,
}

impl LoadComponent {
    pub fn add(&self, o: &LoadComponent) -> LoadComponent {
        LoadComponent {
            fx: self.fx + o.fx,
            fz: self.fz + o.fz,
            tx: self.tx + o.tx,
            ty: self.ty + o.ty,
            tz: self.tz + o.tz,
        }
    }

    pub fn scaled(&self, k: f64) -> LoadComponent {
        LoadComponent { fx: self.fx * k, fz: self.fz * k, tx: self.tx * k, ty: self.ty * k, tz: self.tz * k }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WingLoads {
    pub fx: f64,
    pub fy: f64,
    pub fz: f64,
    pub ty: f64,
    pub tz: f64,
    pub translational: LoadComponent,
    pub rotational: LoadComponent,
    pub added_mass: LoadComponent,
}

impl WingLoads {
    pub fn from_components(tr: LoadComponent, rot: LoadComponent, add: LoadComponent) -> Self {
        let total = tr.add(&rot).add(&add);
        WingLoads {
            fx: total.fx,
            fy: 0.0,
            fz: total.fz,
            ty: total.ty,
            tz: total.tz,
            translational: tr,
            rotational: rot,
            added_mass: add,
        }
    }

    /// Vertical force for a hovering stroke plane: the wing-frame force rotated
    /// by the pitch angle about the leading edge. Flapping about the vertical
    /// axis leaves the vertical component unchanged.
    pub fn vertical_force(&self, theta: f64) -> f64 {
        -self.fx * theta.sin() + self.fz * theta.cos()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AeroEnvironment {
    pub rho: f64,
    pub re: f64,
    pub n_strips: usize,
    /// Exponent base of the added-mass wake factor; 1 makes the factor unity.
    pub lambda: f64,
}

impl Default for AeroEnvironment {
    fn default() -> Self {
        AeroEnvironment { rho: 1.225, re: 1000.0, n_strips: 32, lambda: 1.0 }
    }
}

pub const KINEMATIC_VISCOSITY: f64 = 1.48e-5;

/// Reynolds number from the reference speed 2 * amplitude * f * R2.
pub fn reynolds(phi_am_rad: f64, f: f64, morph: &Morphology, nu: f64) -> f64 {
    let u_ref = 2.0 * phi_am_rad * f * morph.big_r2;
    u_ref * morph.mean_chord / nu
}

pub fn c_n(alpha: f64) -> f64 {
    CN_PEAK * alpha.sin()
}

pub fn c_t(alpha: f64) -> f64 {
    let c = (2.0 * alpha).cos();
    CT_PEAK * c * c
}

pub fn c_rot1(re: f64) -> f64 {
    0.842 - 0.507 * re.powf(-0.158)
}

/// Piecewise rotational-lift factor over angles wrapped to (-180, 180].
pub fn f_alpha(alpha: f64) -> f64 {
    let a = wrap_angle(alpha).to_degrees();
    if a > -45.0 && a < 45.0 {
        1.0
    } else if a.abs() > 135.0 {
        -1.0
    } else {
        std::f64::consts::SQRT_2 * alpha.cos()
    }
}

pub fn f_lambda(lambda: f64) -> f64 {
    47.7 * lambda.powf(-0.0019) - 46.7
}

pub fn f_aspect_ratio(ar: f64) -> f64 {
    1.294 - 0.590 * ar.powf(-0.662)
}

pub fn f_added_re(re: f64) -> f64 {
    0.776 + 1.911 * re.powf(-0.6876)
}

fn wrap_angle(a: f64) -> f64 {
    use std::f64::consts::PI;
    let mut w = a.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    w
}

pub fn strip_from_velocity(r: f64, vx: f64, vz: f64) -> StripState {
    StripState { r, alpha: vx.atan2(vz), u: vx.hypot(vz), vx, vz }
}

/// Local flow at the leading-edge point of the strip at radius `r`.
pub fn local_flow(kin: &WingKinematicState, r: f64) -> StripState {
    let (s, c) = kin.theta.sin_cos();
    strip_from_velocity(r, -kin.phi_dot * r * c, -kin.phi_dot * r * s)
}

/// Strip centres and widths (midpoint rule).
pub fn strips(geom: &WingGeometry, n: usize) -> Vec<(f64, f64, f64)> {
    let dr = geom.span_length() / n as f64;
    (0..n)
        .map(|j| {
            let r = geom.delta_r + (j as f64 + 0.5) * dr;
            (r, geom.chord_unchecked(r), dr)
        })
        .collect()
}

/// Translational loads for an arbitrary per-strip flow state.
pub fn translational_loads_with<F>(geom: &WingGeometry, env: &AeroEnvironment, flow: F) -> LoadComponent
where
    F: Fn(f64) -> StripState,
{
    let mut out = LoadComponent::default();
    for (r, c, dr) in strips(geom, env.n_strips) {
        let s = flow(r);
        let q = 0.5 * env.rho * s.u * s.u * c * dr;
        let dfx = -c_n(s.alpha) * q;
        let dfz = c_t(s.alpha) * q;
        out.fx += dfx;
        out.fz += dfz;
        out.tx += dfz * r;
        out.ty += -dfx * TR_CHORD_ARM * c;
        out.tz += -dfx * r;
    }
    out
}

pub fn translational_loads(kin: &WingKinematicState, geom: &WingGeometry, env: &AeroEnvironment) -> LoadComponent {
    translational_loads_with(geom, env, |r| local_flow(kin, r))
}

pub fn rotational_loads(kin: &WingKinematicState, geom: &WingGeometry, env: &AeroEnvironment) -> LoadComponent {
    let m = morphology(geom);
    let c1 = c_rot1(env.re);
    let mut fx = 0.0;
    for (r, c, dr) in strips(geom, env.n_strips) {
        let s = local_flow(kin, r);
        // Chordwise integral of r x|x| from the leading edge (the pitch axis)
        // to the trailing edge.
        let chord_int = r * c.powi(3) / 3.0;
        fx += f_alpha(s.alpha) * c1 * env.rho * s.vx * s.vz * c * dr
            + ROT_DAMPING * env.rho * kin.theta_dot * kin.theta_dot.abs() * chord_int * dr;
    }
    LoadComponent { fx, fz: 0.0, tx: 0.0, ty: -fx * ROT_CHORD_ARM * m.mean_chord, tz: -fx * ROT_SPAN_ARM * m.big_r2 }
}

fn added_mass_scale(m: &Morphology, env: &AeroEnvironment) -> f64 {
    f_lambda(env.lambda) * f_aspect_ratio(m.aspect_ratio) * f_added_re(env.re) * env.rho * std::f64::consts::PI / 4.0
}

/// Added-mass loads. The force is signed so that it opposes the strip's
/// acceleration under the same torque convention as the other components.
pub fn added_mass_loads(kin: &WingKinematicState, geom: &WingGeometry, env: &AeroEnvironment) -> LoadComponent {
    let m = morphology(geom);
    let k = added_mass_scale(&m, env);
    let mut fx = 0.0;
    for (r, c, dr) in strips(geom, env.n_strips) {
        // Chord centroid minus pitch-axis position, both measured from the
        // leading edge.
        let centroid_arm = 0.5 * c;
        fx += k * (kin.phi_ddot * kin.theta.abs().sin() * c * c * r + kin.theta_ddot * c * c * centroid_arm) * dr;
    }
    LoadComponent { fx, fz: 0.0, tx: 0.0, ty: -fx * ADD_CHORD_ARM * m.mean_chord, tz: -fx * ADD_SPAN_ARM * m.big_r2 }
}

pub fn total_loads(kin: &WingKinematicState, geom: &WingGeometry, env: &AeroEnvironment) -> WingLoads {
    WingLoads::from_components(
        translational_loads(kin, geom, env),
        rotational_loads(kin, geom, env),
        added_mass_loads(kin, geom, env),
    )
}

/// Precomputed strip moments for repeated evaluation inside the integrator.
///
/// With the strip reference on the pitch axis every strip shares one angle of
/// attack and the local speed is proportional to `r`, so each strip sum
/// factorises into a state-dependent scalar times a fixed geometric moment.
#[derive(Debug, Clone)]
pub struct AeroModel {
    pub geom: WingGeometry,
    pub morph: Morphology,
    pub env: AeroEnvironment,
    m_r2c: f64,
    m_r3c: f64,
    m_r2c2: f64,
    m_rc3: f64,
    m_rc2: f64,
    m_c3: f64,
    c_rot1: f64,
    k_add: f64,
}

impl AeroModel {
    pub fn new(geom: WingGeometry, env: AeroEnvironment) -> Self {
        let morph = morphology(&geom);
        let (mut m_r2c, mut m_r3c, mut m_r2c2, mut m_rc3, mut m_rc2, mut m_c3) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
        for (r, c, dr) in strips(&geom, env.n_strips) {
            m_r2c += r * r * c * dr;
            m_r3c += r * r * r * c * dr;
            m_r2c2 += r * r * c * c * dr;
            m_rc3 += r * c * c * c * dr;
            m_rc2 += r * c * c * dr;
            m_c3 += c * c * c * dr;
        }
        AeroModel {
            geom,
            morph,
            env,
            m_r2c,
            m_r3c,
            m_r2c2,
            m_rc3,
            m_rc2,
            m_c3,
            c_rot1: c_rot1(env.re),
            k_add: added_mass_scale(&morph, &env),
        }
    }

    /// Translational plus rotational loads (no acceleration dependence).
    pub fn rate_loads(&self, theta: f64, phi_dot: f64, theta_dot: f64) -> (LoadComponent, LoadComponent) {
        let (s, c) = theta.sin_cos();
        let (vx1, vz1) = (-phi_dot * c, -phi_dot * s);
        let alpha = vx1.atan2(vz1);
        let w2 = phi_dot * phi_dot;
        let q = 0.5 * self.env.rho * w2;
        let cn = c_n(alpha);
        let ct = c_t(alpha);
        let tr = LoadComponent {
            fx: -cn * q * self.m_r2c,
            fz: ct * q * self.m_r2c,
            tx: ct * q * self.m_r3c,
            ty: cn * q * TR_CHORD_ARM * self.m_r2c2,
            tz: cn * q * self.m_r3c,
        };
        let fx_rot = f_alpha(alpha) * self.c_rot1 * self.env.rho * vx1 * vz1 * self.m_r2c
            + ROT_DAMPING * self.env.rho * theta_dot * theta_dot.abs() * self.m_rc3 / 3.0;
        let rot = LoadComponent {
            fx: fx_rot,
            fz: 0.0,
            tx: 0.0,
            ty: -fx_rot * ROT_CHORD_ARM * self.morph.mean_chord,
            tz: -fx_rot * ROT_SPAN_ARM * self.morph.big_r2,
        };
        (tr, rot)
    }

    pub fn added_mass(&self, theta: f64, phi_ddot: f64, theta_ddot: f64) -> LoadComponent {
        let fx = self.k_add * (phi_ddot * theta.abs().sin() * self.m_rc2 + theta_ddot * 0.5 * self.m_c3);
        LoadComponent {
            fx,
            fz: 0.0,
            tx: 0.0,
            ty: -fx * ADD_CHORD_ARM * self.morph.mean_chord,
            tz: -fx * ADD_SPAN_ARM * self.morph.big_r2,
        }
    }

    pub fn loads(&self, kin: &WingKinematicState) -> WingLoads {
        let (tr, rot) = self.rate_loads(kin.theta, kin.phi_dot, kin.theta_dot);
        WingLoads::from_components(tr, rot, self.added_mass(kin.theta, kin.phi_ddot, kin.theta_ddot))
    }
}
