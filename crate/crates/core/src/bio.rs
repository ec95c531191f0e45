//! Visual stealth metric: the distance at which an observer can no longer
//! tell the aircraft from its reference species, split into a wingspan term
//! and a wingtip-trajectory term.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::design::DesignPoint;
use crate::error::{domain, Result};

/// Angular-resolution constant of the observer's eye (rad).
pub const DEFAULT_C_EYE: f64 = 6.82e-4;
/// Half of the 60 mm wingspan of the reference dragonfly.
pub const DEFAULT_S_ANIMAL: f64 = 0.030;
/// Published overall individual-variability level.
pub const OVERALL_INDIVIDUAL_VARIABILITY: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EyeModel {
    pub c_eye: f64,
}

impl Default for EyeModel {
    fn default() -> Self {
        EyeModel { c_eye: DEFAULT_C_EYE }
    }
}

impl EyeModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.c_eye > 0.0 && self.c_eye.is_finite()) {
            return domain("c_eye must be positive");
        }
        Ok(())
    }
}

/// Distance at which a feature of size `d` metres becomes unresolvable.
pub fn min_resolution_distance(d: f64, eye: &EyeModel) -> Result<f64> {
    if !(d >= 0.0) {
        return domain("resolvable error must be non-negative");
    }
    eye.validate()?;
    Ok(d / eye.c_eye)
}

/// Wingspan term: zero while the aircraft is no larger than the animal.
pub fn shape_distance(s_aircraft: f64, s_animal: f64, eye: &EyeModel) -> f64 {
    if s_aircraft > s_animal {
        (s_aircraft - s_animal) / eye.c_eye
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range {
    pub lo: f64,
    pub hi: f64,
}

impl Range {
    pub const fn new(lo: f64, hi: f64) -> Self {
        Range { lo, hi }
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Low, midpoint and high, collapsed to one value for a degenerate range.
    fn levels(&self) -> Vec<f64> {
        if self.lo == self.hi {
            vec![self.lo]
        } else {
            vec![self.lo, self.mid(), self.hi]
        }
    }
}

/// Observed kinematic ranges of one flight mode. Angles in degrees, the
/// amplitude peak to peak.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightModeRange {
    pub label: String,
    pub frequency: Range,
    pub plane_angle: Range,
    pub amplitude: Range,
    pub median: Range,
    /// Fore/hind phase difference. A single wingtip trajectory does not
    /// depend on it, so it is carried for reporting only.
    pub phase_difference: Range,
    pub individual_variability: f64,
}

impl FlightModeRange {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("frequency", self.frequency),
            ("plane angle", self.plane_angle),
            ("amplitude", self.amplitude),
            ("median", self.median),
            ("phase difference", self.phase_difference),
        ] {
            if !(r.lo <= r.hi) {
                return domain(format!("{} range of mode {} is inverted", name, self.label));
            }
        }
        if !(self.frequency.lo > 0.0) {
            return domain("mode frequencies must be positive");
        }
        Ok(())
    }

    pub fn hovering() -> Self {
        Self::row("hovering", (38.8, 41.0), (0.0, 0.0), (60.0, 90.0), (0.0, 0.0), (180.0, 180.0), 0.627)
    }

    pub fn climbing() -> Self {
        Self::row("climbing", (27.2, 41.5), (37.0, 66.0), (65.2, 94.0), (-3.0, 22.3), (76.7, 102.3), 0.763)
    }

    pub fn turning() -> Self {
        Self::row("turning", (33.3, 41.7), (19.3, 80.0), (31.0, 90.0), (-9.0, 1.5), (0.0, 74.0), 0.693)
    }

    pub fn forward_flight() -> Self {
        Self::row("forward", (24.0, 46.0), (19.3, 80.0), (50.0, 86.0), (-10.8, 7.3), (60.0, 90.0), 0.642)
    }

    pub fn all() -> Vec<Self> {
        vec![Self::hovering(), Self::climbing(), Self::turning(), Self::forward_flight()]
    }

    pub fn by_name(name: &str) -> Result<Self> {
        Self::all()
            .into_iter()
            .find(|m| m.label.eq_ignore_ascii_case(name))
            .map_or_else(|| domain(format!("unknown flight mode '{name}'")), Ok)
    }

    fn row(
        label: &str,
        f: (f64, f64),
        plane: (f64, f64),
        amp: (f64, f64),
        median: (f64, f64),
        phase: (f64, f64),
        ci: f64,
    ) -> Self {
        FlightModeRange {
            label: label.to_string(),
            frequency: Range::new(f.0, f.1),
            plane_angle: Range::new(plane.0, plane.1),
            amplitude: Range::new(amp.0, amp.1),
            median: Range::new(median.0, median.1),
            phase_difference: Range::new(phase.0, phase.1),
            individual_variability: ci,
        }
    }

    /// Midpoint trajectory of the mode at the given semi-span.
    pub fn midpoint(&self, semi_span: f64) -> TrajectoryParams {
        TrajectoryParams {
            semi_span,
            frequency: self.frequency.mid(),
            plane_angle: self.plane_angle.mid(),
            amplitude: self.amplitude.mid(),
            median: self.median.mid(),
        }
    }
}

/// Wingtip kinematics. Angles in degrees; `amplitude` is peak to peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryParams {
    pub semi_span: f64,
    pub frequency: f64,
    pub plane_angle: f64,
    pub amplitude: f64,
    pub median: f64,
}

impl TrajectoryParams {
    /// Hovering reference: 39.9 Hz, 75 degree stroke, horizontal plane.
    pub fn hovering_reference(semi_span: f64) -> Self {
        FlightModeRange::hovering().midpoint(semi_span)
    }

    /// Aircraft trajectory implied by a design. The design amplitude is a
    /// half-amplitude, so the stroke is twice that.
    pub fn from_design(d: &DesignPoint) -> Self {
        TrajectoryParams {
            semi_span: d.r,
            frequency: d.f_wing,
            plane_angle: 0.0,
            amplitude: 2.0 * d.phi_am,
            median: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.semi_span > 0.0 && self.frequency > 0.0 && self.amplitude >= 0.0) {
            return domain("trajectory needs positive span and frequency and a non-negative amplitude");
        }
        if ![self.plane_angle, self.median].iter().all(|v| v.is_finite()) {
            return domain("trajectory angles must be finite");
        }
        Ok(())
    }

    pub fn flap_angle(&self, t: f64) -> f64 {
        (self.median + 0.5 * self.amplitude * (2.0 * PI * self.frequency * t).cos()).to_radians()
    }

    /// Wingtip position at time `t` for a wing of length `span`.
    pub fn tip_at(&self, t: f64, span: f64) -> [f64; 3] {
        let phi = self.flap_angle(t);
        let (sb, cb) = self.plane_angle.to_radians().sin_cos();
        let x = span * phi.sin();
        let y = span * phi.cos();
        [x * cb, y, -x * sb]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WingtipTrajectory {
    pub points: Vec<[f64; 3]>,
    pub dt: f64,
    pub period: f64,
}

pub fn wingtip_trajectory(
    p: &TrajectoryParams,
    n_cycles: usize,
    samples_per_cycle: usize,
) -> Result<WingtipTrajectory> {
    p.validate()?;
    if n_cycles == 0 || samples_per_cycle == 0 {
        return domain("trajectory needs at least one cycle and one sample");
    }
    let period = 1.0 / p.frequency;
    let dt = period / samples_per_cycle as f64;
    let points = (0..n_cycles * samples_per_cycle).map(|j| p.tip_at(j as f64 * dt, p.semi_span)).collect();
    Ok(WingtipTrajectory { points, dt, period })
}

/// Sampling of the common time grid used for trajectory comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonGrid {
    /// Cycles of the slower trajectory.
    pub cycles: usize,
    /// Samples per cycle of the faster trajectory.
    pub samples_per_cycle: usize,
    /// Common time origin of both trajectories.
    pub t0: f64,
}

impl Default for ComparisonGrid {
    fn default() -> Self {
        ComparisonGrid { cycles: 10, samples_per_cycle: 200, t0: 0.0 }
    }
}

fn dist(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Mean wingtip separation normalised by the aircraft span. The reference
/// is drawn at the aircraft's span so only the kinematics differ; the size
/// difference is charged separately by [`shape_distance`].
pub fn dynamic_dissimilarity_with(a: &TrajectoryParams, reference: &TrajectoryParams, grid: &ComparisonGrid) -> f64 {
    let f_lo = a.frequency.min(reference.frequency);
    let f_hi = a.frequency.max(reference.frequency);
    let duration = grid.cycles as f64 / f_lo;
    let dt = 1.0 / (f_hi * grid.samples_per_cycle as f64);
    let n = (duration / dt).round().max(1.0) as usize;
    let s = a.semi_span;
    let total: f64 = (0..n)
        .map(|j| {
            let t = grid.t0 + j as f64 * dt;
            dist(a.tip_at(t, s), reference.tip_at(t, s))
        })
        .sum();
    total / n as f64 / s
}

pub fn dynamic_dissimilarity(a: &TrajectoryParams, reference: &TrajectoryParams) -> f64 {
    dynamic_dissimilarity_with(a, reference, &ComparisonGrid::default())
}

/// Largest pairwise dissimilarity among trajectories built from the low,
/// middle and high values of each observed range.
pub fn individual_variability(mode: &FlightModeRange, semi_span: f64) -> Result<f64> {
    mode.validate()?;
    if !(semi_span > 0.0) {
        return domain("semi-span must be positive");
    }
    let mut set = Vec::new();
    for &f in &mode.frequency.levels() {
        for &p in &mode.plane_angle.levels() {
            for &a in &mode.amplitude.levels() {
                for &m in &mode.median.levels() {
                    set.push(TrajectoryParams { semi_span, frequency: f, plane_angle: p, amplitude: a, median: m });
                }
            }
        }
    }
    let grid = ComparisonGrid::default();
    let mut worst = 0.0f64;
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            worst = worst.max(dynamic_dissimilarity_with(&set[i], &set[j], &grid));
        }
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MbsdBreakdown {
    pub d_shape: f64,
    pub d_trajectory: f64,
    pub c_dynamic: f64,
    pub c_individual: f64,
    pub mbsd: f64,
}

/// Everything the metric needs besides the aircraft itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StealthModel {
    pub eye: EyeModel,
    pub s_animal: f64,
    pub reference: TrajectoryParams,
    pub c_individual: f64,
    pub grid: ComparisonGrid,
}

impl Default for StealthModel {
    fn default() -> Self {
        let mode = FlightModeRange::hovering();
        StealthModel {
            eye: EyeModel::default(),
            s_animal: DEFAULT_S_ANIMAL,
            reference: mode.midpoint(DEFAULT_S_ANIMAL),
            c_individual: mode.individual_variability,
            grid: ComparisonGrid::default(),
        }
    }
}

impl StealthModel {
    pub fn validate(&self) -> Result<()> {
        self.eye.validate()?;
        self.reference.validate()?;
        if !(self.s_animal > 0.0 && self.c_individual >= 0.0) {
            return domain("s_animal must be positive and c_individual non-negative");
        }
        Ok(())
    }

    pub fn evaluate(&self, aircraft: &TrajectoryParams) -> MbsdBreakdown {
        let c_dynamic = dynamic_dissimilarity_with(aircraft, &self.reference, &self.grid);
        breakdown(aircraft.semi_span, c_dynamic, self.c_individual, self.s_animal, &self.eye)
    }

    pub fn evaluate_design(&self, d: &DesignPoint) -> MbsdBreakdown {
        self.evaluate(&TrajectoryParams::from_design(d))
    }
}

fn breakdown(s_aircraft: f64, c_dynamic: f64, c_individual: f64, s_animal: f64, eye: &EyeModel) -> MbsdBreakdown {
    let d_shape = shape_distance(s_aircraft, s_animal, eye);
    let d_trajectory = s_aircraft * (c_dynamic - c_individual).max(0.0) / eye.c_eye;
    MbsdBreakdown { d_shape, d_trajectory, c_dynamic, c_individual, mbsd: d_shape + d_trajectory }
}

/// Stealth distance of a design against a reference trajectory, using the
/// mode's published individual variability.
pub fn mbsd(
    design: &DesignPoint,
    reference: &TrajectoryParams,
    mode: &FlightModeRange,
    s_animal: f64,
    eye: &EyeModel,
) -> MbsdBreakdown {
    let a = TrajectoryParams::from_design(design);
    let c = dynamic_dissimilarity(&a, reference);
    breakdown(a.semi_span, c, mode.individual_variability, s_animal, eye)
}
