//! Fore/hind wing interference: twelve normalised kinematic features feed two
//! fitted closed-form expressions whose outputs scale single-wing loads.

use serde::{Deserialize, Serialize};

use crate::aero::WingLoads;
use crate::error::{domain, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct TandemFeatures {
    pub x: [f64; 12],
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TandemCoefficients {
    pub c_tf: f64,
    pub c_th: f64,
}

/// Rate normalisers and amplitude scale used by [`features`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TandemNormalizers {
    pub amp: f64,
    pub w_max_f: f64,
    pub w_max_h: f64,
    pub w_max_d: f64,
}

impl TandemNormalizers {
    /// `amp` is the commanded half-amplitude in radians and `f` the flapping
    /// frequency. Every rate is normalised by the peak commanded rate
    /// 2 pi f amp, and the amplitude scale is `amp` itself.
    pub fn for_design(amp: f64, f: f64) -> Self {
        let w = 2.0 * std::f64::consts::PI * f * amp;
        TandemNormalizers { amp, w_max_f: w, w_max_h: w, w_max_d: w }
    }
}

pub fn features(
    phi_f: f64,
    phi_dot_f: f64,
    phi_h: f64,
    phi_dot_h: f64,
    n: &TandemNormalizers,
) -> Result<TandemFeatures> {
    if !(n.amp > 0.0 && n.w_max_f > 0.0 && n.w_max_h > 0.0 && n.w_max_d > 0.0) {
        return domain("tandem normalisers must be positive");
    }
    let a = n.amp;
    let k = std::f64::consts::PI / a;
    Ok(TandemFeatures {
        x: [
            phi_dot_f / (n.w_max_f * a),
            phi_dot_h / (n.w_max_h * a),
            (phi_dot_f - phi_dot_h) / (n.w_max_d * a),
            phi_f / a,
            phi_h / a,
            (phi_f - phi_h) / a,
            (2.0 * phi_f * k).sin(),
            (2.0 * phi_h * k).sin(),
            (4.0 * phi_f * k).sin(),
            (4.0 * phi_h * k).sin(),
            (8.0 * phi_f * k).sin(),
            (8.0 * phi_h * k).sin(),
        ],
    })
}

/// The two fitted expressions, evaluated literally. Outputs are percentages.
pub fn coefficients(f: &TandemFeatures) -> TandemCoefficients {
    let [x0, x1, x2, x3, x4, x5, x6, x7, x8, x9, x10, x11] = f.x;
    let a = 11.453;
    let c_tf =
        x0 * x8 * (-a * x0 * (-5.0 * x6 + x7) - 22.906 * x1 + a * x2 - a * x4 + a * x5 - a * x7 - a * x8.sin().sin())
            + x0 * x9 * (a * x10 + a * x11 + a * x2 - 22.906 * x4 - a * x5 * (x1 - x11 - x5) - a * x7)
            + 9.0 * x1
            - 7.892 * x2
            + 7.892 * x4
            + x8
            - 6.166;

    let s1 = (x1 - 124.935).sin();
    let sum3467 = x3 + x4 + x6 + x7;
    let inner = -2.0 * x1 - x10 - x11 + x2
        - x7 * (x1 + x7 - (x10 - x5).sin()) * (x1 + x11 - x9 - 45.822)
        - x8
        - (x2 + x4 - s1) * (2.0 * x0 - 3.0 * x10 - x9 - 34.855) * sum3467
        - 49.314;
    let c_th = 49.314 * x1 - (x2 - x5 - s1) * (x2 + x4 - x8 - 0.994) * sum3467 * inner;
    TandemCoefficients { c_tf, c_th }
}

/// Scale factor actually applied: the coefficient as a fraction, clamped at
/// full cancellation. Returns `(factor, clamped)`.
pub fn scale_factor(c: f64) -> (f64, bool) {
    if c <= -1.0 {
        (0.0, c < -1.0)
    } else {
        (c + 1.0, false)
    }
}

/// Converts a raw expression output into the fraction used by [`apply`].
pub fn as_fraction(raw: f64, percent_scale: bool) -> f64 {
    if percent_scale {
        raw / 100.0
    } else {
        raw
    }
}

/// Scales every load field by (c + 1). Returns the corrected loads and whether
/// the clamp at c = -1 engaged.
pub fn apply(loads: &WingLoads, c: f64) -> (WingLoads, bool) {
    let (k, clamped) = scale_factor(c);
    if k == 1.0 {
        return (*loads, clamped);
    }
    let out = WingLoads {
        fx: loads.fx * k,
        fy: loads.fy * k,
        fz: loads.fz * k,
        ty: loads.ty * k,
        tz: loads.tz * k,
        translational: loads.translational.scaled(k),
        rotational: loads.rotational.scaled(k),
        added_mass: loads.added_mass.scaled(k),
    };
    (out, clamped)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aero::LoadComponent;
    use proptest::prelude::*;

    fn norm() -> TandemNormalizers {
        TandemNormalizers::for_design(80f64.to_radians(), 34.0)
    }

    fn sample_loads() -> WingLoads {
        let c = LoadComponent { fx: 1.0, fz: 0.5, tx: 0.1, ty: 2e-3, tz: -3e-3 };
        WingLoads::from_components(c, c.scaled(0.5), c.scaled(-0.25))
    }

    #[test]
    fn features_at_origin_are_zero() {
        let f = features(0.0, 0.0, 0.0, 0.0, &norm()).unwrap();
        assert!(f.x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn features_at_full_amplitude() {
        let n = norm();
        let f = features(n.amp, 0.0, 0.0, 0.0, &n).unwrap();
        assert_eq!(f.x[3], 1.0);
        assert!(f.x[6].abs() < 1e-12 && f.x[8].abs() < 1e-12);
        let f = features(n.amp / 4.0, 0.0, 0.0, 0.0, &n).unwrap();
        assert!((f.x[6] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn features_reject_zero_normalisers() {
        let mut n = norm();
        n.amp = 0.0;
        assert!(features(0.1, 0.0, 0.0, 0.0, &n).is_err());
        let mut n = norm();
        n.w_max_d = 0.0;
        assert!(features(0.1, 0.0, 0.0, 0.0, &n).is_err());
    }

    #[test]
    fn constants_at_zero_features() {
        let c = coefficients(&TandemFeatures::default());
        assert_eq!(c.c_tf, -6.166);
        assert_eq!(c.c_th, 0.0);
    }

    #[test]
    fn forewing_linear_hind_rate_term() {
        let mut f = TandemFeatures::default();
        f.x[1] = 1.0;
        let c = coefficients(&f);
        // Only 9 X1 survives next to the constant; every product carries X0,
        // X2, X4 or X8.
        assert!((c.c_tf - 2.834).abs() < 1e-12);
    }

    #[test]
    fn apply_identity_and_bounds() {
        let l = sample_loads();
        assert_eq!(apply(&l, 0.0).0, l);
        let (z, clamped) = apply(&l, -1.0);
        assert_eq!((z.ty, z.tz), (0.0, 0.0));
        assert!(!clamped);
        let (z, clamped) = apply(&l, -3.0);
        assert_eq!((z.ty, z.tz), (0.0, 0.0));
        assert!(clamped);
        let mut l2 = l;
        l2.ty = 2e-3;
        let (s, _) = apply(&l2, 0.10);
        assert!((s.ty - 2.2e-3).abs() < 1e-15);
    }

    #[test]
    fn percent_scaling() {
        assert!((as_fraction(-6.166, true) + 0.06166).abs() < 1e-15);
        assert_eq!(as_fraction(-6.166, false), -6.166);
    }

    proptest! {
        #[test]
        fn coefficients_finite(
            pf in -3.0f64..3.0, pdf in -500.0f64..500.0, ph in -3.0f64..3.0, pdh in -500.0f64..500.0,
        ) {
            let f = features(pf, pdf, ph, pdh, &norm()).unwrap();
            for v in &f.x[6..] {
                prop_assert!((-1.0..=1.0).contains(v));
            }
            let c = coefficients(&f);
            prop_assert!(c.c_tf.is_finite() && c.c_th.is_finite());
        }

        #[test]
        fn apply_is_linear(k in -10.0f64..10.0, c in -0.99f64..3.0) {
            let l = sample_loads();
            let mut lk = l;
            lk.fx *= k; lk.fz *= k; lk.ty *= k; lk.tz *= k;
            let a = apply(&lk, c).0;
            let b = apply(&l, c).0;
            prop_assert!((a.ty - k * b.ty).abs() <= 1e-12 * (1.0 + a.ty.abs()));
            prop_assert!((a.fx - k * b.fx).abs() <= 1e-12 * (1.0 + a.fx.abs()));
        }

        #[test]
        fn clamp_never_flips_sign(c in -50.0f64..50.0) {
            let l = sample_loads();
            let (s, _) = apply(&l, c);
            prop_assert!(s.ty * l.ty >= 0.0 && s.tz * l.tz >= 0.0);
        }

        #[test]
        fn antiphase_rate_features_mirror(pd in -500.0f64..500.0, p in -1.0f64..1.0) {
            let n = norm();
            let f = features(p, pd, -p, -pd, &n).unwrap();
            prop_assert!((f.x[0] + f.x[1]).abs() < 1e-12);
            prop_assert!((f.x[2] - 2.0 * pd / (n.w_max_d * n.amp)).abs() < 1e-9);
        }
    }
}
