use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::design::{DesignPoint, LOWER, NAMES, UPPER};
use crate::error::{domain, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepVariable {
    PhiAm,
    FWing,
    R,
    IdMotor,
    GammaTr,
}

impl SweepVariable {
    pub const ALL: [SweepVariable; 5] =
        [SweepVariable::PhiAm, SweepVariable::FWing, SweepVariable::R, SweepVariable::IdMotor, SweepVariable::GammaTr];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        NAMES[self.index()]
    }

    /// Accepts the design-vector names plus a few plain-language aliases.
    pub fn parse(s: &str) -> Result<Self> {
        let v = match s.to_ascii_lowercase().as_str() {
            "phiam" | "amplitude" | "phi_am" => SweepVariable::PhiAm,
            "fwing" | "f" | "frequency" | "f_wing" => SweepVariable::FWing,
            "r" | "span" | "semi_span" => SweepVariable::R,
            "idmotor" | "motor" | "id_motor" => SweepVariable::IdMotor,
            "gammatr" | "gamma" | "gamma_tr" => SweepVariable::GammaTr,
            _ => return Err(Error::ConfigValue(format!("unknown sweep variable '{s}'"))),
        };
        Ok(v)
    }

    pub fn get(self, d: &DesignPoint) -> f64 {
        d.to_vec()[self.index()]
    }

    pub fn set(self, d: &mut DesignPoint, v: f64) {
        match self {
            SweepVariable::PhiAm => d.phi_am = v,
            SweepVariable::FWing => d.f_wing = v,
            SweepVariable::R => d.r = v,
            SweepVariable::IdMotor => d.id_motor = v.round() as i64,
            SweepVariable::GammaTr => d.gamma_tr = v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub variable: SweepVariable,
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(variable: SweepVariable, lo: f64, hi: f64, count: usize) -> Self {
        Axis { variable, lo, hi, count }
    }

    /// Evenly spaced values including both ends.
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.lo];
        }
        let step = (self.hi - self.lo) / (self.count - 1) as f64;
        (0..self.count).map(|i| if i + 1 == self.count { self.hi } else { self.lo + step * i as f64 }).collect()
    }

    /// Frequency axis at 0.5 Hz resolution over the full range.
    pub fn table_frequency() -> Self {
        Axis::new(SweepVariable::FWing, 15.0, 50.0, 70)
    }

    /// Semi-span axis at 2.5 mm resolution.
    pub fn table_span() -> Self {
        Axis::new(SweepVariable::R, 0.050, 0.120, 28)
    }

    /// Amplitude axis at 2 degree resolution.
    pub fn table_amplitude() -> Self {
        Axis::new(SweepVariable::PhiAm, 10.0, 85.0, 38)
    }
}

/// Full-factorial grid; variables not on an axis keep the `fixed` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub axes: Vec<Axis>,
    pub fixed: DesignPoint,
}

impl SweepGrid {
    pub fn new(axes: Vec<Axis>, fixed: DesignPoint) -> Result<Self> {
        let g = SweepGrid { axes, fixed };
        g.validate()?;
        Ok(g)
    }

    /// The three two-parameter grids of the traversal study.
    pub fn standard_pairs(fixed: DesignPoint) -> Vec<(&'static str, SweepGrid)> {
        vec![
            ("f_span", SweepGrid { axes: vec![Axis::table_frequency(), Axis::table_span()], fixed }),
            ("f_amplitude", SweepGrid { axes: vec![Axis::table_frequency(), Axis::table_amplitude()], fixed }),
            ("amplitude_span", SweepGrid { axes: vec![Axis::table_amplitude(), Axis::table_span()], fixed }),
        ]
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return domain("a sweep needs at least one axis");
        }
        for (k, a) in self.axes.iter().enumerate() {
            let i = a.variable.index();
            if a.count == 0 || !(a.lo <= a.hi) {
                return domain(format!("axis {} needs count >= 1 and lo <= hi", a.variable.name()));
            }
            if a.lo < LOWER[i] || a.hi > UPPER[i] {
                return domain(format!(
                    "axis {} range [{}, {}] leaves [{}, {}]",
                    a.variable.name(),
                    a.lo,
                    a.hi,
                    LOWER[i],
                    UPPER[i]
                ));
            }
            if self.axes[..k].iter().any(|b| b.variable == a.variable) {
                return domain(format!("axis {} appears twice", a.variable.name()));
            }
        }
        self.fixed.validate()
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid points in row-major order (the last axis varies fastest).
    pub fn points(&self) -> Vec<DesignPoint> {
        let values: Vec<Vec<f64>> = self.axes.iter().map(Axis::values).collect();
        let mut out = Vec::with_capacity(self.len());
        let mut idx = vec![0usize; self.axes.len()];
        loop {
            let mut d = self.fixed;
            for (k, a) in self.axes.iter().enumerate() {
                a.variable.set(&mut d, values[k][idx[k]]);
            }
            out.push(d);
            let mut k = self.axes.len();
            loop {
                if k == 0 {
                    return out;
                }
                k -= 1;
                idx[k] += 1;
                if idx[k] < self.axes[k].count {
                    break;
                }
                idx[k] = 0;
            }
        }
    }
}

/// Evaluates every grid point in parallel, preserving grid order. Failures
/// belong in `T` so one bad point never aborts the sweep.
pub fn sweep<T, F>(grid: &SweepGrid, eval: F) -> Vec<(DesignPoint, T)>
where
    T: Send,
    F: Fn(&DesignPoint) -> T + Sync,
{
    grid.points()
        .into_par_iter()
        .map(|d| {
            let r = eval(&d);
            (d, r)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_by_two() {
        let g = SweepGrid::new(
            vec![Axis::new(SweepVariable::FWing, 20.0, 30.0, 2), Axis::new(SweepVariable::R, 0.06, 0.08, 2)],
            DesignPoint::default(),
        )
        .unwrap();
        let rows = sweep(&g, |d| d.f_wing * d.r);
        assert_eq!(rows.len(), 4);
        assert_eq!((rows[1].0.f_wing, rows[1].0.r), (20.0, 0.08));
        assert_eq!((rows[2].0.f_wing, rows[2].0.r), (30.0, 0.06));
        assert!(rows.iter().all(|(d, _)| d.phi_am == 80.0 && d.id_motor == 3));
    }

    #[test]
    fn table_grids_have_published_counts() {
        let pairs = SweepGrid::standard_pairs(DesignPoint::default());
        let counts: Vec<usize> = pairs.iter().map(|(_, g)| g.len()).collect();
        assert_eq!(counts, vec![70 * 28, 70 * 38, 38 * 28]);
        assert_eq!(pairs[0].1.points().len(), 1960);
        let f = Axis::table_frequency().values();
        assert_eq!((f[0], f[69]), (15.0, 50.0));
        let a = Axis::table_amplitude().values();
        assert!((a[1] - a[0] - 75.0 / 37.0).abs() < 1e-12);
    }

    #[test]
    fn invalid_axes_rejected() {
        let d = DesignPoint::default();
        assert!(SweepGrid::new(vec![Axis::new(SweepVariable::FWing, 10.0, 30.0, 3)], d).is_err());
        assert!(SweepGrid::new(vec![Axis::new(SweepVariable::FWing, 30.0, 20.0, 3)], d).is_err());
        assert!(SweepGrid::new(vec![Axis::new(SweepVariable::FWing, 20.0, 30.0, 0)], d).is_err());
        let a = Axis::new(SweepVariable::R, 0.06, 0.07, 2);
        assert!(SweepGrid::new(vec![a, a], d).is_err());
        assert!(SweepGrid::new(vec![], d).is_err());
    }

    #[test]
    fn variable_names_parse() {
        for v in SweepVariable::ALL {
            assert_eq!(SweepVariable::parse(v.name()).unwrap(), v);
        }
        assert_eq!(SweepVariable::parse("span").unwrap(), SweepVariable::R);
        assert!(SweepVariable::parse("mass").is_err());
    }

    proptest! {
        #[test]
        fn row_count_is_product(c1 in 1usize..6, c2 in 1usize..6, c3 in 1usize..4) {
            let g = SweepGrid::new(vec![
                Axis::new(SweepVariable::PhiAm, 10.0, 80.0, c1),
                Axis::new(SweepVariable::GammaTr, 5.0, 35.0, c2),
                Axis::new(SweepVariable::IdMotor, 0.0, 20.0, c3),
            ], DesignPoint::default()).unwrap();
            let pts = g.points();
            prop_assert_eq!(pts.len(), c1 * c2 * c3);
            prop_assert!(pts.iter().all(|d| d.validate().is_ok()));
        }
    }
}
