//! Temperature-tuned phase matching of second-harmonic generation.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use crate::error::{domain, Result};
use crate::numerics::bisect;

/// Above this single-pass conversion the undepleted-pump formula is
/// no longer trustworthy.
pub const LOW_CONVERSION_LIMIT: f64 = 0.05;

/// Linear phase-mismatch model `dk(T) = dk_dt (T - t_pm)` for a crystal of
/// given length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseMatchModel {
    /// Zero-mismatch temperature, degrees C.
    pub t_pm: f64,
    /// Mismatch slope, rad m^-1 K^-1.
    pub dk_dt: f64,
    /// Crystal length, m.
    pub length: f64,
}

impl PhaseMatchModel {
    pub fn new(t_pm: f64, dk_dt: f64, length: f64) -> Result<Self> {
        if !(t_pm.is_finite() && dk_dt.is_finite() && length.is_finite()) {
            return domain("phase-matching parameters must be finite");
        }
        if length <= 0.0 {
            return domain(format!("crystal length must be positive, got {length}"));
        }
        if dk_dt == 0.0 {
            return domain("mismatch slope must be nonzero");
        }
        Ok(Self { t_pm, dk_dt, length })
    }

    /// Phase mismatch in rad/m at temperature `t` (degrees C).
    pub fn delta_k(&self, t: f64) -> f64 {
        self.dk_dt * (t - self.t_pm)
    }

    /// Accumulated mismatch `dk L` over the full crystal.
    pub fn mismatch_phase(&self, t: f64) -> f64 {
        self.delta_k(t) * self.length
    }

    /// Temperature spacing between adjacent conversion zeros.
    pub fn zero_spacing(&self) -> f64 {
        TAU / (self.dk_dt * self.length).abs()
    }

    /// Temperature at which `dk L / 2` equals `x`.
    fn temperature_at_half_phase(&self, x: f64) -> f64 {
        self.t_pm + 2.0 * x / (self.dk_dt * self.length)
    }

    /// `dk L / 2` at temperature `t`.
    pub fn half_phase(&self, t: f64) -> f64 {
        0.5 * self.mismatch_phase(t)
    }
}

/// `sin(x) / x` with the removable singularity filled in.
pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 6.0 + x2 * x2 / 120.0
    } else {
        x.sin() / x
    }
}

/// Peak single-pass conversion `kappa^2 p L^2` reached at perfect phase
/// matching.
pub fn peak_conversion(p_in: f64, kappa: f64, length: f64) -> f64 {
    kappa * kappa * p_in * length * length
}

/// Single-pass SHG efficiency in the undepleted-pump limit:
/// `kappa^2 p L^2 sinc^2(dk L / 2)`, clamped to 1.
///
/// `kappa` is the lumped coupling in W^-1/2 m^-1. Callers should check
/// [`peak_conversion`] against [`LOW_CONVERSION_LIMIT`].
pub fn shg_efficiency(model: &PhaseMatchModel, t: f64, p_in: f64, kappa: f64) -> Result<f64> {
    if !(p_in >= 0.0) {
        return domain(format!("input power must be >= 0, got {p_in}"));
    }
    let s = sinc(model.half_phase(t));
    Ok((peak_conversion(p_in, kappa, model.length) * s * s).min(1.0))
}

/// Builds the model from the measured global maximum and the first
/// conversion minimum on one side of it.
pub fn calibrate_from_extrema(t_max: f64, t_min1: f64, length: f64) -> Result<PhaseMatchModel> {
    let spacing = t_min1 - t_max;
    if !(spacing.is_finite()) || spacing == 0.0 {
        return domain(format!(
            "maximum ({t_max}) and first minimum ({t_min1}) must differ"
        ));
    }
    if !(length > 0.0) {
        return domain(format!("crystal length must be positive, got {length}"));
    }
    PhaseMatchModel::new(t_max, TAU / (length * spacing), length)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtremumKind {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionExtremum {
    /// Degrees C.
    pub temperature: f64,
    pub kind: ExtremumKind,
    /// Signed lobe index: 0 for the global maximum, `m` for the zero at
    /// `dk L = 2 pi m` and for the side lobe just beyond it.
    pub order: i64,
}

/// Positive root of `tan x = x` in `(m pi, m pi + pi/2)`.
pub fn side_lobe_root(m: u32) -> f64 {
    let lo = m as f64 * PI;
    let hi = lo + FRAC_PI_2;
    // sin x - x cos x changes sign on the bracket and shares the root.
    bisect(|x| x.sin() - x * x.cos(), lo + 1e-12, hi, 1e-14).unwrap_or(hi)
}

/// Analytic extrema of the conversion curve inside `[t_lo, t_hi]`, ordered
/// by temperature.
pub fn find_conversion_extrema(
    model: &PhaseMatchModel,
    t_lo: f64,
    t_hi: f64,
) -> Result<Vec<ConversionExtremum>> {
    if !(t_lo.is_finite() && t_hi.is_finite()) || t_hi < t_lo {
        return domain(format!("invalid temperature range [{t_lo}, {t_hi}]"));
    }
    let (xa, xb) = {
        let (a, b) = (model.half_phase(t_lo), model.half_phase(t_hi));
        (a.min(b), a.max(b))
    };
    let inside = |x: f64| x >= xa && x <= xb;
    let mut found = Vec::new();
    let mut push = |x: f64, kind, order| {
        found.push(ConversionExtremum {
            temperature: model.temperature_at_half_phase(x),
            kind,
            order,
        })
    };
    if inside(0.0) {
        push(0.0, ExtremumKind::Max, 0);
    }
    let m_max = (xa.abs().max(xb.abs()) / PI).floor() as u32 + 1;
    for m in 1..=m_max {
        let zero = m as f64 * PI;
        let lobe = side_lobe_root(m);
        for sign in [1.0, -1.0] {
            let order = if sign > 0.0 { m as i64 } else { -(m as i64) };
            if inside(sign * zero) {
                push(sign * zero, ExtremumKind::Min, order);
            }
            if inside(sign * lobe) {
                push(sign * lobe, ExtremumKind::Max, order);
            }
        }
    }
    found.sort_by(|a, b| a.temperature.total_cmp(&b.temperature));
    Ok(found)
}

/// One row of a temperature sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub temperature: f64,
    pub delta_k: f64,
    pub efficiency: f64,
}

/// Evaluates the conversion curve on `points` evenly spaced temperatures.
pub fn temperature_sweep(
    model: &PhaseMatchModel,
    t_lo: f64,
    t_hi: f64,
    points: usize,
    p_in: f64,
    kappa: f64,
) -> Result<Vec<SweepPoint>> {
    if points < 2 || !(t_hi > t_lo) {
        return domain("sweep needs at least two points on a nonempty range");
    }
    (0..points)
        .map(|i| {
            let t = t_lo + (t_hi - t_lo) * i as f64 / (points - 1) as f64;
            Ok(SweepPoint {
                temperature: t,
                delta_k: model.delta_k(t),
                efficiency: shg_efficiency(model, t, p_in, kappa)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn measured_model() -> PhaseMatchModel {
        calibrate_from_extrema(40.5, 61.2, 9.3e-3).unwrap()
    }

    #[test]
    fn calibration_slope_and_second_minimum() {
        let m = measured_model();
        assert_relative_eq!(m.dk_dt, TAU / (9.3e-3 * 20.7), epsilon = 1e-12);
        assert!((m.dk_dt - 32.6).abs() < 0.1);
        assert_eq!(m.delta_k(40.5), 0.0);
        assert_relative_eq!(m.mismatch_phase(61.2), TAU, epsilon = 1e-12);
        assert_relative_eq!(m.mismatch_phase(40.5 - 20.7), -TAU, epsilon = 1e-12);
        assert!((40.5 + 2.0 * 20.7 - 81.8_f64).abs() <= 0.3);
    }

    #[test]
    fn calibration_rejects_degenerate() {
        assert!(calibrate_from_extrema(40.0, 40.0, 0.01).is_err());
        assert!(calibrate_from_extrema(40.0, 60.0, 0.0).is_err());
        assert!(PhaseMatchModel::new(40.0, 0.0, 0.01).is_err());
    }

    #[test]
    fn efficiency_extremes() {
        let m = measured_model();
        let (p, k) = (2.0, 3.7);
        let peak = peak_conversion(p, k, m.length);
        assert_relative_eq!(shg_efficiency(&m, 40.5, p, k).unwrap(), peak, epsilon = 1e-15);
        assert!(shg_efficiency(&m, 61.2, p, k).unwrap() < 1e-30);
        assert!(shg_efficiency(&m, 81.9, p, k).unwrap() < 1e-30);
        assert!(shg_efficiency(&m, 50.0, -1.0, k).is_err());
    }

    #[test]
    fn extrema_in_measured_range() {
        let m = measured_model();
        let ex = find_conversion_extrema(&m, 20.0, 88.0).unwrap();
        let minima: Vec<f64> = ex
            .iter()
            .filter(|e| e.kind == ExtremumKind::Min)
            .map(|e| e.temperature)
            .collect();
        assert_eq!(minima.len(), 2);
        assert_relative_eq!(minima[0], 61.2, epsilon = 1e-9);
        assert_relative_eq!(minima[1], 81.9, epsilon = 1e-9);
        let global = ex.iter().find(|e| e.order == 0).unwrap();
        assert_eq!(global.kind, ExtremumKind::Max);
        assert_relative_eq!(global.temperature, 40.5, epsilon = 1e-12);
        for w in ex.windows(2) {
            assert!(w[0].temperature < w[1].temperature);
        }
    }

    #[test]
    fn first_side_lobe() {
        let x = side_lobe_root(1);
        assert!((x - 4.4934).abs() < 1e-4);
        assert!((x.tan() - x).abs() < 1e-9);
        let m = measured_model();
        let ex = find_conversion_extrema(&m, 62.0, 80.0).unwrap();
        assert_eq!(ex.len(), 1);
        assert_eq!(ex[0].kind, ExtremumKind::Max);
        assert!((ex[0].temperature - (40.5 + 29.6)).abs() < 0.05);
    }

    #[test]
    fn empty_range_has_no_extrema() {
        let m = measured_model();
        assert!(find_conversion_extrema(&m, 62.0, 68.0).unwrap().is_empty());
    }

    #[test]
    fn negative_slope_model_is_handled() {
        let m = calibrate_from_extrema(40.5, 19.8, 9.3e-3).unwrap();
        assert!(m.dk_dt < 0.0);
        let ex = find_conversion_extrema(&m, 0.0, 45.0).unwrap();
        assert!(ex.iter().any(|e| e.kind == ExtremumKind::Min && (e.temperature - 19.8).abs() < 1e-9));
    }

    proptest! {
        #[test]
        fn efficiency_symmetric_and_nonnegative(dt in 0.0f64..60.0, p in 0.0f64..1.0) {
            let m = measured_model();
            let a = shg_efficiency(&m, 40.5 + dt, p, 3.7).unwrap();
            let b = shg_efficiency(&m, 40.5 - dt, p, 3.7).unwrap();
            prop_assert!(a >= 0.0);
            prop_assert!((a - b).abs() <= 1e-15 + 1e-12 * a);
        }

        #[test]
        fn efficiency_linear_in_power(t in 20.0f64..88.0, p in 1e-4f64..0.5) {
            let m = measured_model();
            let a = shg_efficiency(&m, t, p, 3.7).unwrap();
            let b = shg_efficiency(&m, t, 2.0 * p, 3.7).unwrap();
            prop_assert!((b - 2.0 * a).abs() <= 1e-12 * b.max(1e-300));
        }

        #[test]
        fn calibration_is_a_fixed_point(t_max in 0.0f64..80.0, gap in 5.0f64..40.0, len in 1e-3f64..0.05) {
            let m = calibrate_from_extrema(t_max, t_max + gap, len).unwrap();
            prop_assert_eq!(m.delta_k(t_max), 0.0);
            let ex = find_conversion_extrema(&m, t_max - 0.5, t_max + gap + 0.5).unwrap();
            let mins: Vec<_> = ex.iter().filter(|e| e.kind == ExtremumKind::Min).collect();
            prop_assert_eq!(mins.len(), 1);
            prop_assert!((mins[0].temperature - (t_max + gap)).abs() < 1e-9);
            prop_assert!(ex.iter().any(|e| e.order == 0 && (e.temperature - t_max).abs() < 1e-12));
        }
    }
}
