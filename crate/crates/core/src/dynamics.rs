//! Closed-loop simulation of four directly driven wings.
//!
//! Wing order is (fore-left, fore-right, hind-right, hind-left). The right
//! wings sit at a flapping offset of -pi and move mirror-wise, so their
//! deflection from the offset is `-(phi + pi)`. Fore and hind wings on one
//! side are paired for the interference correction: 1 with 4, 2 with 3.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::aero::{reynolds, AeroEnvironment, AeroModel, LoadComponent, KINEMATIC_VISCOSITY};
use crate::design::DesignPoint;
use crate::drivetrain::{
    membrane_torque, motor_electrical, spring_for_frequency, MembraneParams, MotorDatabase, MotorParams,
};
use crate::error::{Error, Result};
use crate::geometry::{wing_inertia, WingGeometry, DEFAULT_THICKNESS, TPU_DENSITY};
use crate::tandem::{self, TandemNormalizers};

const N: usize = 4;
const DIM: usize = 5 * N;

pub fn cpg_target(t: f64, amp: f64, f: f64, phase: f64) -> f64 {
    amp * (2.0 * PI * f * t + phase).sin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
}

impl Default for PidGains {
    fn default() -> Self {
        PidGains { kp: 0.48, ki: 2.0e-5, kd: 7.0e-4 }
    }
}

pub fn pid_torque(e: f64, e_int: f64, e_dot: f64, g: &PidGains) -> f64 {
    g.kp * e + g.ki * e_int + g.kd * e_dot
}

/// Per-wing inertia block. `j_m` is the drive inertia reflected to the wing
/// shaft (motor rotor times the squared ratio, plus the gear stage).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WingInertia {
    pub j_m: f64,
    pub j_yy: f64,
    pub j_zz: f64,
    pub j_yz: f64,
}

impl WingInertia {
    pub fn c(&self) -> f64 {
        self.j_m * self.j_yy + self.j_yy * self.j_zz - self.j_yz * self.j_yz
    }

    /// Kinetic energy of one wing under the flap/pitch mass matrix.
    pub fn kinetic_energy(&self, phi_dot: f64, theta_dot: f64) -> f64 {
        0.5 * ((self.j_m + self.j_zz) * phi_dot * phi_dot
            + 2.0 * self.j_yz * phi_dot * theta_dot
            + self.j_yy * theta_dot * theta_dot)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub phi: [f64; N],
    pub theta: [f64; N],
    pub phi_dot: [f64; N],
    pub theta_dot: [f64; N],
    pub t: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WingTorques {
    pub t_m: [f64; N],
    pub t_yw: [f64; N],
    pub t_zw: [f64; N],
    pub t_vtm: [f64; N],
}

/// Spring offset of each wing: the right-hand wings rest at -pi.
pub const SPRING_OFFSET: [f64; N] = [0.0, -PI, -PI, 0.0];
const MIRROR: [f64; N] = [1.0, -1.0, -1.0, 1.0];

fn wing_accel(
    j: &WingInertia,
    k_a: f64,
    phi: f64,
    offset: f64,
    t_m: f64,
    t_zw: f64,
    t_yw: f64,
    t_vtm: f64,
) -> (f64, f64) {
    let c = j.c();
    // Written out term by term; the offset wings pick up the extra pi K term.
    let spring = -k_a * phi + k_a * offset;
    let phi_dd = (j.j_yy * spring + j.j_yy * t_m + j.j_yy * t_zw - j.j_yz * t_yw - j.j_yz * t_vtm) / c;
    let theta_dd = (j.j_m * t_vtm + j.j_m * t_yw - j.j_yz * spring - j.j_yz * t_m - j.j_yz * t_zw
        + j.j_zz * t_vtm
        + j.j_zz * t_yw)
        / c;
    (phi_dd, theta_dd)
}

/// Flap and pitch accelerations for all four wings from the applied torques.
pub fn accelerations(
    state: &SystemState,
    torques: &WingTorques,
    inertia: &[WingInertia; N],
    k_a: &[f64; N],
) -> Result<([f64; N], [f64; N])> {
    let mut pdd = [0.0; N];
    let mut tdd = [0.0; N];
    for i in 0..N {
        if inertia[i].c() == 0.0 || !inertia[i].c().is_finite() {
            return Err(Error::SingularInertia(i + 1));
        }
        let (a, b) = wing_accel(
            &inertia[i],
            k_a[i],
            state.phi[i],
            SPRING_OFFSET[i],
            torques.t_m[i],
            torques.t_zw[i],
            torques.t_yw[i],
            torques.t_vtm[i],
        );
        pdd[i] = a;
        tdd[i] = b;
    }
    Ok((pdd, tdd))
}

/// Interference factors (c + 1, clamped) for each wing from the current
/// flapping state, plus the number of wings whose clamp engaged.
pub fn tandem_factors(
    phi: &[f64; N],
    phi_dot: &[f64; N],
    norm: &TandemNormalizers,
    percent_scale: bool,
) -> Result<([f64; N], usize)> {
    let defl = |i: usize| MIRROR[i] * (phi[i] - SPRING_OFFSET[i]);
    let rate = |i: usize| MIRROR[i] * phi_dot[i];
    let mut k = [1.0; N];
    let mut clamps = 0;
    for (fore, hind) in [(0usize, 3usize), (1, 2)] {
        let f = tandem::features(defl(fore), rate(fore), defl(hind), rate(hind), norm)?;
        let c = tandem::coefficients(&f);
        let (kf, cf) = tandem::scale_factor(tandem::as_fraction(c.c_tf, percent_scale));
        let (kh, ch) = tandem::scale_factor(tandem::as_fraction(c.c_th, percent_scale));
        k[fore] = kf;
        k[hind] = kh;
        clamps += cf as usize + ch as usize;
    }
    Ok((k, clamps))
}

/// Physical constants and sub-model switches shared by every simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Physics {
    pub rho: f64,
    pub nu: f64,
    pub n_strips: usize,
    pub lambda: f64,
    pub wing_thickness: f64,
    pub wing_density: f64,
    /// Gear inertia as a fraction of the wing flapping inertia.
    pub gear_fraction: f64,
    pub eta_tr: f64,
    pub membrane: MembraneParams,
    pub pid: PidGains,
    pub tandem_enabled: bool,
    pub tandem_percent_scale: bool,
}

impl Default for Physics {
    fn default() -> Self {
        Physics {
            rho: 1.225,
            nu: KINEMATIC_VISCOSITY,
            n_strips: 32,
            lambda: 1.0,
            wing_thickness: DEFAULT_THICKNESS,
            wing_density: TPU_DENSITY,
            gear_fraction: 0.1,
            eta_tr: 0.8,
            membrane: MembraneParams::default(),
            pid: PidGains::default(),
            tandem_enabled: true,
            tandem_percent_scale: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub steps_per_cycle: usize,
    pub max_cycles: usize,
    pub min_cycles: usize,
    pub settle_tol: f64,
    pub settle_cycles: usize,
    /// Raise the step count when pitch damping or the servo loop would
    /// otherwise make the explicit integrator unstable.
    pub auto_refine: bool,
    pub hind_phase: f64,
    pub aero: bool,
    pub pid: bool,
    pub membrane: bool,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            steps_per_cycle: 1000,
            max_cycles: 60,
            min_cycles: 3,
            settle_tol: 1e-3,
            settle_cycles: 2,
            auto_refine: true,
            hind_phase: PI,
            aero: true,
            pid: true,
            membrane: true,
        }
    }
}

impl SimOptions {
    /// The cheaper setting used for large archives.
    pub fn reduced() -> Self {
        SimOptions { steps_per_cycle: 200, ..Default::default() }
    }
}

/// A fully resolved simulation request.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub design: DesignPoint,
    /// Commanded CPG half-amplitude (rad).
    pub amplitude: f64,
    pub physics: Physics,
    pub options: SimOptions,
    pub motor: MotorParams,
    pub geometry: WingGeometry,
    pub inertia: WingInertia,
    pub k_a: f64,
    pub aero: AeroModel,
    pub initial: Option<SystemState>,
}

impl SimConfig {
    pub fn new(design: DesignPoint, physics: Physics, options: SimOptions, db: &MotorDatabase) -> Result<Self> {
        design.validate()?;
        if !(physics.eta_tr > 0.0 && physics.eta_tr <= 1.0) {
            return Err(Error::Domain("eta_tr must lie in (0, 1]".into()));
        }
        physics.membrane.validate()?;
        let motor = db.lookup(design.id_motor)?.clone();
        let geometry = WingGeometry::from_semi_span(design.r, physics.wing_thickness, physics.wing_density)?;
        let jw = wing_inertia(&geometry)?;
        let j_gear = physics.gear_fraction * jw.jzz;
        let gamma = design.gamma_tr;
        let spring = spring_for_frequency(design.f_wing, j_gear, jw.jzz, motor.rotor_inertia, gamma)?;
        let inertia =
            WingInertia { j_m: gamma * gamma * motor.rotor_inertia + j_gear, j_yy: jw.jyy, j_zz: jw.jzz, j_yz: jw.jyz };
        let morph = crate::geometry::morphology(&geometry);
        let env = AeroEnvironment {
            rho: physics.rho,
            re: reynolds(design.phi_am_rad(), design.f_wing, &morph, physics.nu),
            n_strips: physics.n_strips,
            lambda: physics.lambda,
        };
        if env.n_strips < 8 {
            return Err(Error::Domain("n_strips must be at least 8".into()));
        }
        Ok(SimConfig {
            design,
            amplitude: design.phi_am_rad(),
            physics,
            options,
            motor,
            geometry,
            inertia,
            k_a: spring.k_a,
            aero: AeroModel::new(geometry, env),
            initial: None,
        })
    }

    pub fn with_amplitude(mut self, amp_rad: f64) -> Self {
        self.amplitude = amp_rad;
        self
    }

    /// Step count per flapping cycle after the optional stability refinement.
    pub fn effective_steps_per_cycle(&self) -> usize {
        let base = self.options.steps_per_cycle.max(200);
        if !self.options.auto_refine {
            return base;
        }
        let j = &self.inertia;
        let c = j.c();
        let pitch_inertia = c / (j.j_m + j.j_zz) + self.aero.added_mass(0.0, 0.0, 1.0).ty.abs();
        let flap_inertia = c / j.j_yy;
        let mut rate = 0.0f64;
        if self.options.membrane {
            rate = rate.max(self.physics.membrane.c_c1 * self.physics.membrane.c_wing_ref / pitch_inertia);
            rate = rate.max((self.physics.membrane.c_c1 / pitch_inertia).sqrt());
        }
        if self.options.pid {
            rate = rate.max(self.physics.pid.kd / flap_inertia);
            rate = rate.max(((self.physics.pid.kp + self.k_a) / flap_inertia).sqrt());
        }
        // Keep rate * dt at or below one half.
        let needed = (2.0 * rate / self.design.f_wing).ceil() as usize;
        base.max(needed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub mean_lift_per_wing: [f64; N],
    pub l_takeoff: f64,
    pub achieved_amplitude: [f64; N],
    pub achieved_frequency: f64,
    pub max_motor_speed: [f64; N],
    /// Largest absolute winding current per motor over the final cycle.
    pub max_current: [f64; N],
    pub mean_electrical_power: [f64; N],
    pub mean_heat: [f64; N],
    pub settled: bool,
    pub cycles_used: usize,
    pub steps_per_cycle: usize,
    pub tandem_clamps: usize,
}

/// One sample of the optional per-step trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceRow {
    pub t: f64,
    pub phi: [f64; N],
    pub theta: [f64; N],
    pub phi_dot: [f64; N],
    pub tandem_factor: [f64; N],
    pub lift: f64,
    pub power: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Observables {
    lift: [f64; N],
    t_m: [f64; N],
    k_tan: [f64; N],
    clamps: usize,
}

struct Plant<'a> {
    cfg: &'a SimConfig,
    omega: f64,
    norm: TandemNormalizers,
    phases: [f64; N],
    // Added-mass torques per unit flap / pitch acceleration at theta = pi/2.
    add_flap: LoadComponent,
    add_pitch: LoadComponent,
}

impl<'a> Plant<'a> {
    fn new(cfg: &'a SimConfig) -> Self {
        let hp = cfg.options.hind_phase;
        Plant {
            cfg,
            omega: 2.0 * PI * cfg.design.f_wing,
            norm: TandemNormalizers::for_design(cfg.amplitude, cfg.design.f_wing),
            phases: [0.0, 0.0, hp, hp],
            add_flap: cfg.aero.added_mass(PI / 2.0, 1.0, 0.0),
            add_pitch: cfg.aero.added_mass(0.0, 0.0, 1.0),
        }
    }

    fn deriv(&self, t: f64, y: &[f64; DIM], obs: Option<&mut Observables>) -> Result<[f64; DIM]> {
        let cfg = self.cfg;
        let o = &cfg.options;
        let (phi, rest) = y.split_at(N);
        let (theta, rest) = rest.split_at(N);
        let (phi_dot, rest) = rest.split_at(N);
        let (theta_dot, e_int) = rest.split_at(N);
        let phi: [f64; N] = phi.try_into().unwrap();
        let phi_dot: [f64; N] = phi_dot.try_into().unwrap();

        let mut t_m = [0.0; N];
        let mut err = [0.0; N];
        for i in 0..N {
            let arg = self.omega * t + self.phases[i];
            let target = SPRING_OFFSET[i] + MIRROR[i] * cfg.amplitude * arg.sin();
            let target_dot = MIRROR[i] * cfg.amplitude * self.omega * arg.cos();
            err[i] = target - phi[i];
            if o.pid {
                t_m[i] = pid_torque(err[i], e_int[i], target_dot - phi_dot[i], &cfg.physics.pid);
            }
        }

        let (k_tan, clamps) = if o.aero && cfg.physics.tandem_enabled {
            tandem_factors(&phi, &phi_dot, &self.norm, cfg.physics.tandem_percent_scale)?
        } else {
            ([1.0; N], 0)
        };

        let mut dy = [0.0; DIM];
        let mut lift = [0.0; N];
        for i in 0..N {
            let th = theta[i];
            let t_vtm =
                if o.membrane { -membrane_torque(th, theta_dot[i], phi_dot[i], &cfg.physics.membrane) } else { 0.0 };
            let j = &cfg.inertia;
            let (pdd, tdd, rate) = if o.aero {
                let (tr, rot) = cfg.aero.rate_loads(th, phi_dot[i], theta_dot[i]);
                let rate = tr.add(&rot);
                let k = k_tan[i];
                let (a0, b0) =
                    wing_accel(j, cfg.k_a, phi[i], SPRING_OFFSET[i], t_m[i], k * rate.tz, k * rate.ty, t_vtm);
                // Added-mass torques are linear in the accelerations; solve
                // the resulting 2x2 system exactly.
                let s = th.abs().sin();
                let (m11, m21) =
                    wing_accel(j, 0.0, 0.0, 0.0, 0.0, k * s * self.add_flap.tz, k * s * self.add_flap.ty, 0.0);
                let (m12, m22) = wing_accel(j, 0.0, 0.0, 0.0, 0.0, k * self.add_pitch.tz, k * self.add_pitch.ty, 0.0);
                let (a11, a12, a21, a22) = (1.0 - m11, -m12, -m21, 1.0 - m22);
                let det = a11 * a22 - a12 * a21;
                if det == 0.0 || !det.is_finite() {
                    return Err(Error::Numeric(format!("added-mass block on wing {} is singular", i + 1)));
                }
                let pdd = (a22 * a0 - a12 * b0) / det;
                let tdd = (a11 * b0 - a21 * a0) / det;
                (pdd, tdd, Some((rate, k)))
            } else {
                let (a, b) = wing_accel(j, cfg.k_a, phi[i], SPRING_OFFSET[i], t_m[i], 0.0, 0.0, t_vtm);
                (a, b, None)
            };
            if let Some((rate, k)) = rate {
                if obs.is_some() {
                    let add = cfg.aero.added_mass(th, pdd, tdd);
                    let total = rate.add(&add).scaled(k);
                    lift[i] = -total.fx * th.sin() + total.fz * th.cos();
                }
            }
            dy[i] = phi_dot[i];
            dy[N + i] = theta_dot[i];
            dy[2 * N + i] = pdd;
            dy[3 * N + i] = tdd;
            dy[4 * N + i] = if o.pid { err[i] } else { 0.0 };
        }
        if let Some(obs) = obs {
            obs.lift = lift;
            obs.t_m = t_m;
            obs.clamps = clamps;
            obs.k_tan = k_tan;
        }
        Ok(dy)
    }
}

fn pack(s: &SystemState) -> [f64; DIM] {
    let mut y = [0.0; DIM];
    y[..N].copy_from_slice(&s.phi);
    y[N..2 * N].copy_from_slice(&s.theta);
    y[2 * N..3 * N].copy_from_slice(&s.phi_dot);
    y[3 * N..4 * N].copy_from_slice(&s.theta_dot);
    y
}

fn unpack(y: &[f64; DIM], t: f64) -> SystemState {
    let mut s = SystemState { t, ..Default::default() };
    s.phi.copy_from_slice(&y[..N]);
    s.theta.copy_from_slice(&y[N..2 * N]);
    s.phi_dot.copy_from_slice(&y[2 * N..3 * N]);
    s.theta_dot.copy_from_slice(&y[3 * N..4 * N]);
    s
}

fn axpy(y: &[f64; DIM], h: f64, k: &[f64; DIM]) -> [f64; DIM] {
    let mut out = *y;
    for j in 0..DIM {
        out[j] += h * k[j];
    }
    out
}

/// Flap deflections beyond this many radians from the rest position mean the
/// closed loop has run away; no commanded stroke comes close.
const DIVERGENCE_LIMIT: f64 = 4.0 * PI;

fn diverged(y: &[f64; DIM]) -> bool {
    y.iter().any(|v| !v.is_finite())
        || (0..N).any(|i| (y[i] - SPRING_OFFSET[i]).abs() > DIVERGENCE_LIMIT || y[N + i].abs() > DIVERGENCE_LIMIT)
}

/// Initial state: every wing at its spring rest position, at rest.
pub fn rest_state() -> SystemState {
    SystemState { phi: SPRING_OFFSET, ..Default::default() }
}

#[derive(Debug, Clone, Copy, Default)]
struct CycleStats {
    lift: [f64; N],
    defl_min: [f64; N],
    defl_max: [f64; N],
    speed: [f64; N],
    current: [f64; N],
    power: [f64; N],
    heat: [f64; N],
    samples: usize,
}

impl CycleStats {
    fn new() -> Self {
        CycleStats { defl_min: [f64::INFINITY; N], defl_max: [f64::NEG_INFINITY; N], ..Default::default() }
    }
}

/// Steps the system to a periodic steady state and reports the final cycle.
/// `trace` receives one row per integration step when supplied.
pub fn simulate_traced(cfg: &SimConfig, mut trace: Option<&mut dyn FnMut(&TraceRow)>) -> Result<SimResult> {
    let plant = Plant::new(cfg);
    let f = cfg.design.f_wing;
    let spc = cfg.effective_steps_per_cycle();
    let dt = 1.0 / (f * spc as f64);
    let o = &cfg.options;
    let gamma = cfg.design.gamma_tr;

    let mut y = pack(&cfg.initial.unwrap_or_else(rest_state));
    let mut prev_lift: Option<[f64; N]> = None;
    let mut calm = 0usize;
    let mut settled = false;
    let mut last = CycleStats::new();
    let mut cycles = 0usize;
    let mut clamps = 0usize;
    let mut crossings: Vec<f64> = Vec::new();
    let mut prev_defl = 0.0;

    for cycle in 0..o.max_cycles.max(1) {
        let mut st = CycleStats::new();
        for n in 0..spc {
            let step = cycle * spc + n;
            let t = step as f64 * dt;
            let mut obs = Observables::default();
            let k1 = plant.deriv(t, &y, Some(&mut obs))?;
            clamps += obs.clamps;

            // Observables on the uniform grid, taken from the first stage.
            let mut power = 0.0;
            for i in 0..N {
                let defl = MIRROR[i] * (y[i] - SPRING_OFFSET[i]);
                st.defl_min[i] = st.defl_min[i].min(defl);
                st.defl_max[i] = st.defl_max[i].max(defl);
                st.lift[i] += obs.lift[i];
                let m = motor_electrical(y[2 * N + i], obs.t_m[i], gamma, cfg.physics.eta_tr, &cfg.motor);
                st.speed[i] = st.speed[i].max(m.wm.abs());
                st.current[i] = st.current[i].max(m.im.abs());
                st.power[i] += m.pm;
                st.heat[i] += m.im * m.im * cfg.motor.r0;
                power += m.pm;
            }
            st.samples += 1;
            let d1 = y[0];
            if step > 0 && prev_defl < 0.0 && d1 >= 0.0 {
                let frac = -prev_defl / (d1 - prev_defl);
                crossings.push(t - dt + frac * dt);
            }
            prev_defl = d1;
            if let Some(tr) = trace.as_deref_mut() {
                let s = unpack(&y, t);
                tr(&TraceRow {
                    t,
                    phi: s.phi,
                    theta: s.theta,
                    phi_dot: s.phi_dot,
                    tandem_factor: obs.k_tan,
                    lift: obs.lift.iter().sum(),
                    power,
                });
            }

            let k2 = plant.deriv(t + 0.5 * dt, &axpy(&y, 0.5 * dt, &k1), None)?;
            let k3 = plant.deriv(t + 0.5 * dt, &axpy(&y, 0.5 * dt, &k2), None)?;
            let k4 = plant.deriv(t + dt, &axpy(&y, dt, &k3), None)?;
            for j in 0..DIM {
                y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
            }
            for e in y[4 * N..].iter_mut() {
                *e = e.clamp(-10.0, 10.0);
            }
            if diverged(&y) {
                return Err(Error::Numeric(format!("state diverged at t = {:.6} s (cycle {})", t + dt, cycle + 1)));
            }
        }
        let ns = st.samples as f64;
        for i in 0..N {
            st.lift[i] /= ns;
            st.power[i] /= ns;
            st.heat[i] /= ns;
        }
        cycles = cycle + 1;
        if let Some(p) = prev_lift {
            let scale = st.lift.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
            let change = (0..N).fold(0.0f64, |a, i| a.max((st.lift[i] - p[i]).abs())) / scale;
            if change < o.settle_tol {
                calm += 1;
            } else {
                calm = 0;
            }
        }
        prev_lift = Some(st.lift);
        last = st;
        if calm >= o.settle_cycles && cycles >= o.min_cycles {
            settled = true;
            break;
        }
    }

    let achieved_frequency = match crossings.as_slice() {
        [.., a, b] if b > a => 1.0 / (b - a),
        _ => 0.0,
    };
    let mut amp = [0.0; N];
    for i in 0..N {
        amp[i] = 0.5 * (last.defl_max[i] - last.defl_min[i]);
    }
    Ok(SimResult {
        mean_lift_per_wing: last.lift,
        l_takeoff: last.lift.iter().sum(),
        achieved_amplitude: amp,
        achieved_frequency,
        max_motor_speed: last.speed,
        max_current: last.current,
        mean_electrical_power: last.power,
        mean_heat: last.heat,
        settled,
        cycles_used: cycles,
        steps_per_cycle: spc,
        tandem_clamps: clamps,
    })
}

pub fn simulate(cfg: &SimConfig) -> Result<SimResult> {
    simulate_traced(cfg, None)
}

/// Default half-amplitude of the full-stroke run: 90 degrees, i.e. a
/// 180 degree stroke peak to peak.
pub const MAX_AMPLITUDE_DEG: f64 = 90.0;

pub fn max_amplitude_run(cfg: &SimConfig, max_amplitude_deg: f64) -> Result<SimResult> {
    let c = cfg.clone().with_amplitude(max_amplitude_deg.to_radians());
    simulate(&c)
}

/// Total mechanical energy (kinetic plus spring) of a state.
pub fn mechanical_energy(cfg: &SimConfig, s: &SystemState) -> f64 {
    (0..N)
        .map(|i| {
            let d = s.phi[i] - SPRING_OFFSET[i];
            cfg.inertia.kinetic_energy(s.phi_dot[i], s.theta_dot[i]) + 0.5 * cfg.k_a * d * d
        })
        .sum()
}

/// Integrates without any controller or measurement logic; used by the
/// energy and symmetry checks. Returns the state after every step.
pub fn integrate_free(cfg: &SimConfig, start: SystemState, steps: usize) -> Result<Vec<SystemState>> {
    let plant = Plant::new(cfg);
    let dt = 1.0 / (cfg.design.f_wing * cfg.effective_steps_per_cycle() as f64);
    let mut y = pack(&start);
    let mut out = Vec::with_capacity(steps);
    let mut t = start.t;
    for _ in 0..steps {
        let k1 = plant.deriv(t, &y, None)?;
        let k2 = plant.deriv(t + 0.5 * dt, &axpy(&y, 0.5 * dt, &k1), None)?;
        let k3 = plant.deriv(t + 0.5 * dt, &axpy(&y, 0.5 * dt, &k2), None)?;
        let k4 = plant.deriv(t + dt, &axpy(&y, dt, &k3), None)?;
        for j in 0..DIM {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        t += dt;
        out.push(unpack(&y, t));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn default_cfg() -> SimConfig {
        SimConfig::new(DesignPoint::default(), Physics::default(), SimOptions::default(), &MotorDatabase::builtin())
            .unwrap()
    }

    #[test]
    fn cpg_examples() {
        assert_eq!(cpg_target(0.0, 1.2, 30.0, 0.0), 0.0);
        assert_relative_eq!(cpg_target(1.0 / 120.0, 1.2, 30.0, 0.0), 1.2, max_relative = 1e-14);
        for t in [0.001, 0.013, 0.02] {
            assert_relative_eq!(cpg_target(t, 1.2, 30.0, PI), -cpg_target(t, 1.2, 30.0, 0.0), epsilon = 1e-14);
        }
    }

    #[test]
    fn pid_examples() {
        let g = PidGains::default();
        assert_eq!(pid_torque(0.0, 0.0, 0.0, &g), 0.0);
        assert_relative_eq!(pid_torque(0.1, 0.0, 0.0, &g), 0.048, max_relative = 1e-14);
        assert_relative_eq!(pid_torque(0.0, 0.0, 1.0, &g), 7e-4, max_relative = 1e-14);
    }

    #[test]
    fn accelerations_examples() {
        let cfg = default_cfg();
        let inertia = [cfg.inertia; N];
        let k = [cfg.k_a; N];
        let zero = WingTorques::default();
        let (p, t) = accelerations(&rest_state(), &zero, &inertia, &k).unwrap();
        for i in 0..N {
            assert!(p[i].abs() < 1e-9 && t[i].abs() < 1e-9, "{i}: {} {}", p[i], t[i]);
        }
        let mut s = SystemState::default();
        s.phi[0] = 0.2;
        let (p, _) = accelerations(&s, &zero, &inertia, &k).unwrap();
        let j = cfg.inertia;
        assert_relative_eq!(p[0], -(j.j_yy * cfg.k_a / j.c()) * 0.2, max_relative = 1e-12);
        let bad = [WingInertia { j_m: 0.0, j_yy: 0.0, j_zz: 1.0, j_yz: 0.0 }; N];
        assert!(matches!(accelerations(&s, &zero, &bad, &k), Err(Error::SingularInertia(1))));
    }

    #[test]
    fn tandem_factors_at_rest() {
        let n = TandemNormalizers::for_design(80f64.to_radians(), 34.0);
        let (k, clamps) = tandem_factors(&SPRING_OFFSET, &[0.0; N], &n, true).unwrap();
        assert_eq!(clamps, 0);
        assert_relative_eq!(k[0], 1.0 - 0.06166, max_relative = 1e-12);
        assert_relative_eq!(k[1], 1.0 - 0.06166, max_relative = 1e-12);
        assert_eq!(k[2], 1.0);
        assert_eq!(k[3], 1.0);
    }

    #[test]
    fn default_design_settles_with_positive_lift() {
        let cfg = default_cfg();
        let r = simulate(&cfg).unwrap();
        assert!(r.settled, "{r:?}");
        for l in r.mean_lift_per_wing {
            assert!(l > 0.0, "{r:?}");
        }
        for a in r.achieved_amplitude {
            assert!((a / cfg.amplitude - 1.0).abs() < 0.15, "{r:?}");
        }
        assert!((r.achieved_frequency / 34.0 - 1.0).abs() < 0.01);
    }

    #[test]
    fn deterministic() {
        let cfg = SimConfig { options: SimOptions::reduced(), ..default_cfg() };
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
    }

    #[test]
    fn mirrored_wings_move_mirror_wise() {
        let mut cfg = default_cfg();
        cfg.options.pid = false;
        let mut s = rest_state();
        s.phi[0] = 0.3;
        s.phi_dot[0] = 20.0;
        s.theta[0] = 0.1;
        s.phi[1] = -PI - 0.3;
        s.phi_dot[1] = -20.0;
        s.theta[1] = -0.1;
        let states = integrate_free(&cfg, s, 2000).unwrap();
        for st in states {
            assert!((st.phi[1] + PI + st.phi[0]).abs() < 1e-9);
            assert!((st.theta[1] + st.theta[0]).abs() < 1e-9);
        }
    }

    #[test]
    fn trace_visits_every_step() {
        let cfg = SimConfig { options: SimOptions { max_cycles: 2, ..SimOptions::reduced() }, ..default_cfg() };
        let mut rows = 0usize;
        let mut cb = |_: &TraceRow| rows += 1;
        let r = simulate_traced(&cfg, Some(&mut cb)).unwrap();
        assert_eq!(rows, 2 * r.steps_per_cycle);
    }
}
