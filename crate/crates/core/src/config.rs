//! Flat `section.key = value` configuration with line-anchored errors.
//!
//! Blank lines and `#` comments are ignored. Every key has a default, so an
//! empty file is a complete configuration. Unknown keys, duplicates,
//! malformed lines and out-of-range values are rejected with the offending
//! line number. [`WorkbenchConfig::to_text`] writes the fully resolved
//! configuration in the same format, and parsing that text reproduces the
//! configuration exactly.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analysis::ImportanceSettings;
use crate::bio::{individual_variability, EyeModel, FlightModeRange, StealthModel, DEFAULT_S_ANIMAL};
use crate::design::{DesignPoint, LOWER, UPPER};
use crate::dynamics::{Physics, SimOptions, MAX_AMPLITUDE_DEG};
use crate::error::{Error, Result};
use crate::optimizers::{IsresSettings, MoeaSettings, SuccessRule, DEFAULT_INVERSE_CAP};
use crate::performance::{ConstraintLimits, EnergyModel, ForwardFlightModel};
use crate::pipeline::EvaluationSettings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fidelity {
    Full,
    /// 16 strips and 200 steps per cycle.
    Reduced,
}

/// Source of the individual-variability allowance in the stealth metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum IndividualSource {
    /// The published value of the selected flight mode.
    Published,
    /// Corner enumeration of the mode's kinematic ranges.
    Enumerate,
    Value(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeciesConfig {
    pub s_animal: f64,
    pub mode: String,
    pub c_eye: f64,
    pub individual: IndividualSource,
}

impl Default for SpeciesConfig {
    fn default() -> Self {
        SpeciesConfig {
            s_animal: DEFAULT_S_ANIMAL,
            mode: "hovering".into(),
            c_eye: EyeModel::default().c_eye,
            individual: IndividualSource::Published,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub k: usize,
    pub shuffles: usize,
    pub bins: usize,
    pub include_infeasible: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig { k: 10, shuffles: 10, bins: 10, include_infeasible: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkbenchConfig {
    pub seed: u64,
    pub design: DesignPoint,
    pub species: SpeciesConfig,
    pub fidelity: Fidelity,
    pub physics: Physics,
    pub options: SimOptions,
    pub energy: EnergyModel,
    pub forward: ForwardFlightModel,
    pub limits: ConstraintLimits,
    /// Half-amplitude of the full-stroke run (rad).
    pub full_stroke_amplitude: f64,
    pub moea: MoeaSettings,
    pub isres: IsresSettings,
    pub analysis: AnalysisConfig,
    /// Substitute for 1/MBSD at zero stealth distance.
    pub inverse_cap: f64,
}

impl Default for WorkbenchConfig {
    fn default() -> Self {
        WorkbenchConfig {
            seed: 1,
            design: DesignPoint::default(),
            species: SpeciesConfig::default(),
            fidelity: Fidelity::Full,
            physics: Physics::default(),
            options: SimOptions::default(),
            energy: EnergyModel::default(),
            forward: ForwardFlightModel::default(),
            limits: ConstraintLimits::default(),
            full_stroke_amplitude: MAX_AMPLITUDE_DEG.to_radians(),
            moea: MoeaSettings::default(),
            isres: IsresSettings::default(),
            analysis: AnalysisConfig::default(),
            inverse_cap: DEFAULT_INVERSE_CAP,
        }
    }
}

#[derive(Clone, Copy)]
enum Check {
    Any,
    Positive,
    NonNegative,
    /// Open at zero, closed at one.
    Fraction,
    Closed(f64, f64),
}

impl Check {
    fn test(self, x: f64) -> std::result::Result<(), String> {
        let ok = match self {
            Check::Any => true,
            Check::Positive => x > 0.0,
            Check::NonNegative => x >= 0.0,
            Check::Fraction => x > 0.0 && x <= 1.0,
            Check::Closed(lo, hi) => x >= lo && x <= hi,
        };
        if ok {
            return Ok(());
        }
        Err(match self {
            Check::Any => unreachable!(),
            Check::Positive => format!("{x} must be positive"),
            Check::NonNegative => format!("{x} must be non-negative"),
            Check::Fraction => format!("{x} must lie in (0, 1]"),
            Check::Closed(lo, hi) => format!("{x} outside [{lo}, {hi}]"),
        })
    }
}

type Getter = fn(&WorkbenchConfig) -> String;
type Setter = fn(&mut WorkbenchConfig, &str) -> std::result::Result<(), String>;

struct Key {
    name: &'static str,
    get: Getter,
    set: Setter,
}

fn parse_real(v: &str, check: Check) -> std::result::Result<f64, String> {
    let x: f64 = v.parse().map_err(|_| format!("'{v}' is not a number"))?;
    if !x.is_finite() {
        return Err(format!("'{v}' is not finite"));
    }
    check.test(x)?;
    Ok(x)
}

fn parse_count(v: &str, lo: u64, hi: u64) -> std::result::Result<u64, String> {
    let x: u64 = v.parse().map_err(|_| format!("'{v}' is not a non-negative integer"))?;
    if x < lo || x > hi {
        return Err(format!("{x} outside [{lo}, {hi}]"));
    }
    Ok(x)
}

fn parse_bool(v: &str) -> std::result::Result<bool, String> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(format!("'{v}' is not a boolean")),
    }
}

macro_rules! real {
    ($name:literal, $($f:ident).+, $check:expr) => {
        Key {
            name: $name,
            get: |c| format!("{}", c.$($f).+),
            set: |c, v| {
                c.$($f).+ = parse_real(v, $check)?;
                Ok(())
            },
        }
    };
}

macro_rules! count {
    ($name:literal, $($f:ident).+, $lo:expr, $hi:expr) => {
        Key {
            name: $name,
            get: |c| format!("{}", c.$($f).+),
            set: |c, v| {
                c.$($f).+ = parse_count(v, $lo, $hi)? as _;
                Ok(())
            },
        }
    };
}

macro_rules! boolean {
    ($name:literal, $($f:ident).+) => {
        Key {
            name: $name,
            get: |c| format!("{}", c.$($f).+),
            set: |c, v| {
                c.$($f).+ = parse_bool(v)?;
                Ok(())
            },
        }
    };
}

fn keys() -> Vec<Key> {
    vec![
        count!("seed", seed, 0, u64::MAX),
        real!("design.phiAm", design.phi_am, Check::Closed(LOWER[0], UPPER[0])),
        real!("design.fWing", design.f_wing, Check::Closed(LOWER[1], UPPER[1])),
        real!("design.R", design.r, Check::Closed(LOWER[2], UPPER[2])),
        count!("design.idMotor", design.id_motor, LOWER[3] as u64, UPPER[3] as u64),
        real!("design.gammaTr", design.gamma_tr, Check::Closed(LOWER[4], UPPER[4])),
        real!("species.s_animal", species.s_animal, Check::Positive),
        Key {
            name: "species.mode",
            get: |c| c.species.mode.clone(),
            set: |c, v| {
                let m = FlightModeRange::by_name(v).map_err(|e| e.to_string())?;
                c.species.mode = m.label;
                Ok(())
            },
        },
        real!("species.c_eye", species.c_eye, Check::Positive),
        Key {
            name: "species.individual",
            get: |c| match c.species.individual {
                IndividualSource::Published => "published".into(),
                IndividualSource::Enumerate => "enumerate".into(),
                IndividualSource::Value(x) => format!("{x}"),
            },
            set: |c, v| {
                c.species.individual = match v {
                    "published" => IndividualSource::Published,
                    "enumerate" => IndividualSource::Enumerate,
                    _ => IndividualSource::Value(
                        parse_real(v, Check::NonNegative)
                            .map_err(|e| format!("expected published, enumerate or a number: {e}"))?,
                    ),
                };
                Ok(())
            },
        },
        real!("physics.rho", physics.rho, Check::Positive),
        real!("physics.g", energy.g, Check::Positive),
        real!("physics.nu", physics.nu, Check::Positive),
        real!("physics.c_d", forward.c_d, Check::Positive),
        real!("physics.a_lt", forward.a_lt, Check::Positive),
        real!("physics.m_tr", forward.m_tr, Check::Positive),
        real!("physics.t_motor", forward.t_motor, Check::Positive),
        count!("physics.n_strips", physics.n_strips, 1, 1000),
        real!("physics.lambda", physics.lambda, Check::Positive),
        real!("physics.wing_thickness", physics.wing_thickness, Check::Positive),
        real!("physics.wing_density", physics.wing_density, Check::Positive),
        real!("physics.gear_fraction", physics.gear_fraction, Check::NonNegative),
        real!("physics.eta_tr", physics.eta_tr, Check::Fraction),
        real!("energy.eta_bat", energy.eta_bat, Check::Fraction),
        real!("energy.rho_ebat", energy.rho_ebat, Check::Positive),
        real!("energy.eta_boost", energy.eta_boost, Check::Fraction),
        real!("energy.eta_used", energy.eta_used, Check::Fraction),
        real!("energy.k_elc", energy.k_elc, Check::NonNegative),
        real!("constraints.c_mp", limits.c_mp, Check::Positive),
        real!("constraints.c_manv", limits.c_manv, Check::Positive),
        real!("constraints.delta_t", limits.delta_t, Check::Positive),
        real!("membrane.c_c1", physics.membrane.c_c1, Check::NonNegative),
        real!("membrane.c_scale1", physics.membrane.c_scale1, Check::Any),
        real!("membrane.c_move", physics.membrane.c_move, Check::Any),
        real!("membrane.k1", physics.membrane.k1, Check::Positive),
        real!("membrane.sigma", physics.membrane.sigma, Check::Positive),
        real!("membrane.mu", physics.membrane.mu, Check::Any),
        real!("membrane.theta_tat", physics.membrane.theta_tat, Check::Closed(1e-6, PI)),
        real!("membrane.c_wing_ref", physics.membrane.c_wing_ref, Check::NonNegative),
        real!("control.kp", physics.pid.kp, Check::NonNegative),
        real!("control.ki", physics.pid.ki, Check::NonNegative),
        real!("control.kd", physics.pid.kd, Check::NonNegative),
        Key {
            name: "simulation.fidelity",
            get: |c| match c.fidelity {
                Fidelity::Full => "full".into(),
                Fidelity::Reduced => "reduced".into(),
            },
            set: |c, v| {
                c.fidelity = match v {
                    "full" => Fidelity::Full,
                    "reduced" => Fidelity::Reduced,
                    _ => return Err(format!("'{v}' is not one of full, reduced")),
                };
                Ok(())
            },
        },
        count!("simulation.steps_per_cycle", options.steps_per_cycle, 20, 1_000_000),
        count!("simulation.max_cycles", options.max_cycles, 1, 10_000),
        count!("simulation.min_cycles", options.min_cycles, 1, 10_000),
        real!("simulation.settle_tol", options.settle_tol, Check::Positive),
        count!("simulation.settle_cycles", options.settle_cycles, 1, 1000),
        boolean!("simulation.auto_refine", options.auto_refine),
        real!("simulation.hind_phase", options.hind_phase, Check::Closed(-2.0 * PI, 2.0 * PI)),
        real!("simulation.full_stroke_amplitude", full_stroke_amplitude, Check::Closed(1e-6, PI)),
        boolean!("simulation.aero", options.aero),
        boolean!("simulation.pid", options.pid),
        boolean!("simulation.membrane", options.membrane),
        boolean!("tandem.enable", physics.tandem_enabled),
        boolean!("tandem.percent_scale", physics.tandem_percent_scale),
        count!("moea.pop_size", moea.pop_size, 2, 100_000),
        count!("moea.budget", moea.budget, 2, 100_000_000),
        count!("moea.batch", moea.batch, 1, 100_000),
        real!("moea.crossover_prob", moea.crossover_prob, Check::Closed(0.0, 1.0)),
        real!("moea.eta_crossover", moea.eta_crossover, Check::NonNegative),
        real!("moea.eta_mutation", moea.eta_mutation, Check::NonNegative),
        count!("moea.stall_generations", moea.stall_generations, 0, 1_000_000),
        real!("moea.stall_tol", moea.stall_tol, Check::NonNegative),
        count!("isres.pop_size", isres.pop_size, 2, 100_000),
        count!("isres.budget", isres.budget, 2, 100_000_000),
        real!("isres.gamma", isres.gamma, Check::Closed(0.0, 1.0)),
        real!("isres.alpha", isres.alpha, Check::Closed(0.0, 1.0)),
        real!("isres.success_target", isres.success_target, Check::Closed(1e-6, 1.0 - 1e-6)),
        Key {
            name: "isres.rule",
            get: |c| match c.isres.rule {
                SuccessRule::SuccessRate => "success_rate".into(),
                SuccessRule::ParentFraction => "parent_fraction".into(),
            },
            set: |c, v| {
                c.isres.rule = match v {
                    "success_rate" => SuccessRule::SuccessRate,
                    "parent_fraction" => SuccessRule::ParentFraction,
                    _ => return Err(format!("'{v}' is not one of success_rate, parent_fraction")),
                };
                Ok(())
            },
        },
        real!("isres.p_f", isres.p_f, Check::Closed(0.0, 1.0)),
        count!("isres.stall_generations", isres.stall_generations, 0, 1_000_000),
        real!("isres.stall_tol", isres.stall_tol, Check::NonNegative),
        count!("analysis.k", analysis.k, 1, 10_000),
        count!("analysis.shuffles", analysis.shuffles, 1, 10_000),
        count!("analysis.bins", analysis.bins, 1, 10_000),
        boolean!("analysis.include_infeasible", analysis.include_infeasible),
        real!("output.inverse_cap", inverse_cap, Check::Positive),
    ]
}

impl WorkbenchConfig {
    pub fn parse(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parses `text`, then applies `key = value` overrides that replace any
    /// file entry of the same key. Override errors are reported at line 0.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let table = keys();
        let mut entries: Vec<(usize, &Key, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split_once('#').map_or(raw, |(b, _)| b).trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or_else(|| Error::Config { line, msg: format!("expected 'key = value', found '{body}'") })?;
            let (k, v) = (k.trim(), v.trim());
            if v.is_empty() {
                return Err(Error::Config { line, msg: format!("missing value for '{k}'") });
            }
            let key = table
                .iter()
                .find(|e| e.name == k)
                .ok_or_else(|| Error::Config { line, msg: format!("unknown key '{k}'") })?;
            if let Some((prev, _, _)) = entries.iter().find(|(_, e, _)| e.name == k) {
                return Err(Error::Config { line, msg: format!("duplicate key '{k}' (first set on line {prev})") });
            }
            entries.push((line, key, v));
        }
        for o in overrides {
            let (k, v) = o
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .filter(|(_, v)| !v.is_empty())
                .ok_or_else(|| Error::Config { line: 0, msg: format!("override '{o}' is not 'key=value'") })?;
            let key = table
                .iter()
                .find(|e| e.name == k)
                .ok_or_else(|| Error::Config { line: 0, msg: format!("unknown key '{k}'") })?;
            entries.retain(|(_, e, _)| e.name != k);
            entries.push((0, key, v));
        }
        let mut cfg = WorkbenchConfig::default();
        // The fidelity preset goes first so explicit keys can refine it.
        if let Some((line, key, v)) = entries.iter().find(|(_, e, _)| e.name == "simulation.fidelity") {
            (key.set)(&mut cfg, v).map_err(|msg| Error::Config { line: *line, msg: format!("{}: {msg}", key.name) })?;
            cfg.apply_fidelity();
        }
        for (line, key, v) in &entries {
            if key.name != "simulation.fidelity" {
                (key.set)(&mut cfg, v)
                    .map_err(|msg| Error::Config { line: *line, msg: format!("{}: {msg}", key.name) })?;
            }
        }
        cfg.moea.seed = cfg.seed;
        cfg.isres.seed = cfg.seed;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::load_with_overrides(path, &[])
    }

    pub fn load_with_overrides(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse_with_overrides(&text, overrides)
    }

    fn apply_fidelity(&mut self) {
        if self.fidelity == Fidelity::Reduced {
            let r = EvaluationSettings::reduced();
            self.physics.n_strips = r.physics.n_strips;
            self.options.steps_per_cycle = r.options.steps_per_cycle;
        }
    }

    /// A default configuration at the given fidelity.
    pub fn with_fidelity(fidelity: Fidelity) -> Self {
        let mut c = WorkbenchConfig { fidelity, ..Default::default() };
        c.apply_fidelity();
        c
    }

    /// Cross-field checks that no single line can carry.
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::ConfigValue(m));
        if self.options.min_cycles > self.options.max_cycles {
            return err("simulation.min_cycles exceeds simulation.max_cycles".into());
        }
        if self.moea.budget < self.moea.pop_size {
            return err("moea.budget must be at least moea.pop_size".into());
        }
        if self.isres.budget < self.isres.pop_size {
            return err("isres.budget must be at least isres.pop_size".into());
        }
        self.design.validate().map_err(|e| Error::ConfigValue(e.to_string()))?;
        self.evaluation_settings().map(|_| ())
    }

    pub fn flight_mode(&self) -> Result<FlightModeRange> {
        FlightModeRange::by_name(&self.species.mode).map_err(|e| Error::ConfigValue(e.to_string()))
    }

    pub fn stealth_model(&self) -> Result<StealthModel> {
        let mode = self.flight_mode()?;
        let c_individual = match self.species.individual {
            IndividualSource::Published => mode.individual_variability,
            IndividualSource::Enumerate => individual_variability(&mode, self.species.s_animal)?,
            IndividualSource::Value(v) => v,
        };
        Ok(StealthModel {
            eye: EyeModel { c_eye: self.species.c_eye },
            s_animal: self.species.s_animal,
            reference: mode.midpoint(self.species.s_animal),
            c_individual,
            ..StealthModel::default()
        })
    }

    pub fn evaluation_settings(&self) -> Result<EvaluationSettings> {
        let mut limits = self.limits;
        limits.g = self.energy.g;
        let s = EvaluationSettings {
            physics: self.physics.clone(),
            options: self.options.clone(),
            stealth: self.stealth_model()?,
            energy: self.energy,
            forward: self.forward,
            limits,
            max_amplitude_deg: self.full_stroke_amplitude.to_degrees(),
        };
        s.validate().map_err(|e| Error::ConfigValue(e.to_string()))?;
        Ok(s)
    }

    pub fn importance_settings(&self) -> ImportanceSettings {
        ImportanceSettings { k: self.analysis.k, shuffles: self.analysis.shuffles, seed: self.seed }
    }

    /// Every key with its resolved value, one per line.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# resolved configuration\n");
        for k in keys() {
            out.push_str(&format!("{} = {}\n", k.name, (k.get)(self)));
        }
        out
    }

    pub fn key_names() -> Vec<&'static str> {
        keys().iter().map(|k| k.name).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drivetrain::MotorDatabase;
    use proptest::prelude::*;

    #[test]
    fn overrides_replace_file_entries() {
        let c = WorkbenchConfig::parse_with_overrides(
            "seed = 4\ndesign.fWing = 30",
            &["seed=9".into(), "moea.budget = 500".into()],
        )
        .unwrap();
        assert_eq!((c.seed, c.moea.seed, c.isres.seed), (9, 9, 9));
        assert_eq!(c.moea.budget, 500);
        assert_eq!(c.design.f_wing, 30.0);
        assert!(matches!(
            WorkbenchConfig::parse_with_overrides("", &["nope=1".into()]),
            Err(Error::Config { line: 0, .. })
        ));
        assert!(WorkbenchConfig::parse_with_overrides("", &["seed".into()]).is_err());
    }

    #[test]
    fn empty_file_gives_defaults() {
        let c = WorkbenchConfig::parse("").unwrap();
        assert_eq!(c, WorkbenchConfig::default());
        assert_eq!(c.design, DesignPoint { phi_am: 80.0, f_wing: 34.0, r: 0.075, id_motor: 3, gamma_tr: 25.0 });
        let c = WorkbenchConfig::parse("# only a comment\n\n   \n").unwrap();
        assert_eq!(c, WorkbenchConfig::default());
    }

    #[test]
    fn frequency_above_table_limit_is_a_line_error() {
        let e = WorkbenchConfig::parse("seed = 3\ndesign.fWing = 60\n").unwrap_err();
        match e {
            Error::Config { line, msg } => {
                assert_eq!(line, 2);
                assert!(msg.contains("design.fWing") && msg.contains("50"), "{msg}");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn motor_three_is_the_cn174() {
        let c = WorkbenchConfig::parse("design.idMotor = 3").unwrap();
        let db = MotorDatabase::builtin();
        assert_eq!(db.lookup(c.design.id_motor).unwrap().name, "CN-174-6V");
    }

    #[test]
    fn unknown_and_malformed_lines() {
        let line_of = |t: &str| match WorkbenchConfig::parse(t).unwrap_err() {
            Error::Config { line, .. } => line,
            e => panic!("{e:?}"),
        };
        assert_eq!(line_of("seed = 1\n\ndesign.wingspan = 3"), 3);
        assert_eq!(line_of("design.R 0.1"), 1);
        assert_eq!(line_of("design.R = abc"), 1);
        assert_eq!(line_of("design.R ="), 1);
        assert_eq!(line_of("design.R = 0.1\ndesign.R = 0.09"), 2);
        assert_eq!(line_of("design.idMotor = 2.5"), 1);
        assert_eq!(line_of("species.mode = gliding"), 1);
        assert_eq!(line_of("tandem.enable = maybe"), 1);
        assert_eq!(line_of("energy.eta_bat = 1.5"), 1);
    }

    #[test]
    fn cross_field_errors() {
        assert!(matches!(
            WorkbenchConfig::parse("simulation.min_cycles = 9\nsimulation.max_cycles = 5"),
            Err(Error::ConfigValue(_))
        ));
        assert!(matches!(WorkbenchConfig::parse("moea.pop_size = 50\nmoea.budget = 10"), Err(Error::ConfigValue(_))));
    }

    #[test]
    fn reduced_fidelity_can_be_refined() {
        let c = WorkbenchConfig::parse("simulation.steps_per_cycle = 400\nsimulation.fidelity = reduced").unwrap();
        assert_eq!(c.physics.n_strips, 16);
        assert_eq!(c.options.steps_per_cycle, 400);
        let back = WorkbenchConfig::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn seed_flows_into_optimisers() {
        let c = WorkbenchConfig::parse("seed = 42").unwrap();
        assert_eq!((c.moea.seed, c.isres.seed), (42, 42));
    }

    #[test]
    fn gravity_reaches_both_models() {
        let c = WorkbenchConfig::parse("physics.g = 9.80665").unwrap();
        let s = c.evaluation_settings().unwrap();
        assert_eq!((s.energy.g, s.limits.g), (9.80665, 9.80665));
    }

    #[test]
    fn species_controls_the_stealth_model() {
        let c = WorkbenchConfig::parse("species.mode = climbing\nspecies.individual = 0.5\nspecies.s_animal = 0.04")
            .unwrap();
        let s = c.stealth_model().unwrap();
        assert_eq!((s.c_individual, s.s_animal), (0.5, 0.04));
        let c = WorkbenchConfig::parse("species.individual = enumerate").unwrap();
        let s = c.stealth_model().unwrap();
        assert!((s.c_individual - 0.627).abs() < 0.25 * 0.627);
    }

    #[test]
    fn every_key_is_echoed_once() {
        let text = WorkbenchConfig::default().to_text();
        for k in WorkbenchConfig::key_names() {
            assert_eq!(text.lines().filter(|l| l.starts_with(&format!("{k} ="))).count(), 1, "{k}");
        }
    }

    proptest! {
        #[test]
        fn resolved_text_round_trips(
            seed in 0u64..u64::MAX, phi in 10.0f64..85.0, f in 15.0f64..50.0, r in 0.05f64..0.12,
            m in 0i64..=20, g in 5.0f64..35.0, rho in 0.5f64..2.0, reduced in any::<bool>(),
            tandem in any::<bool>(), ind in prop_oneof![Just(IndividualSource::Published), Just(IndividualSource::Enumerate), (0.0f64..2.0).prop_map(IndividualSource::Value)],
        ) {
            let mut c = WorkbenchConfig::with_fidelity(if reduced { Fidelity::Reduced } else { Fidelity::Full });
            c.seed = seed;
            c.moea.seed = seed;
            c.isres.seed = seed;
            c.design = DesignPoint { phi_am: phi, f_wing: f, r, id_motor: m, gamma_tr: g };
            c.physics.rho = rho;
            c.physics.tandem_enabled = tandem;
            c.species.individual = ind;
            let back = WorkbenchConfig::parse(&c.to_text()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
