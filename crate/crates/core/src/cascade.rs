//! Cascaded up/down conversion inside the crystal.
//!
//! Field amplitudes are in sqrt(W) so that `|a|^2` is optical power. The
//! coupled-mode equations used throughout are
//!
//! ```text
//! da1/dz = i kappa conj(a1) a2 exp(+i dk z)
//! da2/dz = i kappa a1^2       exp(-i dk z)
//! ```
//!
//! which conserve `|a1|^2 + |a2|^2`. Only classical amplitudes are
//! propagated; the power-dependent phase slope is what the cavity model
//! linearizes around.

use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::phase_matching::sinc;

pub const MIN_STEPS: usize = 100;
pub const DEFAULT_STEPS: usize = 2000;
/// Allowed relative drift of `|a1|^2 + |a2|^2` over one propagation.
pub const DEFAULT_DRIFT_TOL: f64 = 1e-9;

/// Ratio between the probe power and the reference power used to remove
/// the linear propagation phase.
const REFERENCE_POWER_RATIO: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledModeState {
    /// Fundamental amplitude, sqrt(W).
    pub a1: Complex64,
    /// Second-harmonic amplitude, sqrt(W).
    pub a2: Complex64,
    /// Position in the crystal, m.
    pub z: f64,
}

impl CoupledModeState {
    /// Fundamental of power `p_in` with zero phase at the crystal input and
    /// no harmonic.
    pub fn fundamental(p_in: f64) -> Self {
        Self {
            a1: Complex64::new(p_in.sqrt(), 0.0),
            a2: Complex64::new(0.0, 0.0),
            z: 0.0,
        }
    }

    pub fn total_power(&self) -> f64 {
        self.a1.norm_sqr() + self.a2.norm_sqr()
    }
}

fn derivative(z: f64, a1: Complex64, a2: Complex64, delta_k: f64, kappa: f64) -> (Complex64, Complex64) {
    let i_kappa = Complex64::new(0.0, kappa);
    let phase = Complex64::from_polar(1.0, delta_k * z);
    (i_kappa * a1.conj() * a2 * phase, i_kappa * a1 * a1 * phase.conj())
}

/// Fixed-step fourth-order Runge-Kutta propagation over `length` starting at
/// `state0.z`. Fails if the power drift exceeds [`DEFAULT_DRIFT_TOL`].
pub fn propagate(
    state0: &CoupledModeState,
    delta_k: f64,
    kappa: f64,
    length: f64,
    steps: usize,
) -> Result<CoupledModeState> {
    propagate_with_tolerance(state0, delta_k, kappa, length, steps, DEFAULT_DRIFT_TOL)
}

pub fn propagate_with_tolerance(
    state0: &CoupledModeState,
    delta_k: f64,
    kappa: f64,
    length: f64,
    steps: usize,
    drift_tol: f64,
) -> Result<CoupledModeState> {
    if !(length > 0.0 && length.is_finite()) {
        return domain(format!("propagation length must be positive, got {length}"));
    }
    if steps < MIN_STEPS {
        return domain(format!("at least {MIN_STEPS} steps are required, got {steps}"));
    }
    if !(delta_k.is_finite() && kappa.is_finite()) {
        return domain("mismatch and coupling must be finite");
    }
    let h = length / steps as f64;
    let (mut a1, mut a2) = (state0.a1, state0.a2);
    for n in 0..steps {
        let z = state0.z + n as f64 * h;
        let (k1a, k1b) = derivative(z, a1, a2, delta_k, kappa);
        let (k2a, k2b) = derivative(z + 0.5 * h, a1 + 0.5 * h * k1a, a2 + 0.5 * h * k1b, delta_k, kappa);
        let (k3a, k3b) = derivative(z + 0.5 * h, a1 + 0.5 * h * k2a, a2 + 0.5 * h * k2b, delta_k, kappa);
        let (k4a, k4b) = derivative(z + h, a1 + h * k3a, a2 + h * k3b, delta_k, kappa);
        a1 += h / 6.0 * (k1a + 2.0 * k2a + 2.0 * k3a + k4a);
        a2 += h / 6.0 * (k1b + 2.0 * k2b + 2.0 * k3b + k4b);
    }
    let out = CoupledModeState {
        a1,
        a2,
        z: state0.z + length,
    };
    let p0 = state0.total_power();
    if p0 > 0.0 {
        let drift = (out.total_power() - p0).abs() / p0;
        if drift > drift_tol {
            return Err(Error::Accuracy {
                drift,
                tolerance: drift_tol,
                steps,
            });
        }
    }
    Ok(out)
}

/// `(1 - sinc(x)) / x`, regular at the origin.
fn cascade_shape(x: f64) -> f64 {
    if x.abs() < 1e-3 {
        let x2 = x * x;
        x / 6.0 - x * x2 / 120.0
    } else {
        (1.0 - sinc(x)) / x
    }
}

/// Low-conversion cascaded phase per watt, rad/W:
/// `-kappa^2 L^2 (1 - sinc(dk L)) / (dk L)`.
///
/// Defined for every mismatch (it vanishes at `dk = 0`), unlike
/// [`effective_kerr_phase`], which refuses the region where direct
/// conversion dominates.
pub fn kerr_coefficient(delta_k: f64, kappa: f64, length: f64) -> f64 {
    -kappa * kappa * length * length * cascade_shape(delta_k * length)
}

/// Analytic cascaded Kerr phase `-(kappa^2 p L / dk)(1 - sinc(dk L))`.
///
/// Only valid for `|dk L| >= pi` and small conversion.
pub fn effective_kerr_phase(p_in: f64, delta_k: f64, kappa: f64, length: f64) -> Result<f64> {
    if !(p_in >= 0.0) {
        return domain(format!("input power must be >= 0, got {p_in}"));
    }
    let x = delta_k * length;
    if !(x.abs() >= std::f64::consts::PI) {
        return Err(Error::Validity(format!(
            "|dk L| = {:.4} < pi: direct conversion dominates the cascade",
            x.abs()
        )));
    }
    Ok(p_in * kerr_coefficient(delta_k, kappa, length))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeResult {
    /// Phase of the output fundamental relative to a weak reference beam, rad.
    pub nl_phase: f64,
    /// Fraction of the input power leaving at the harmonic.
    pub residual_conversion: f64,
}

fn wrap_phase(x: f64) -> f64 {
    let w = x.rem_euclid(std::f64::consts::TAU);
    if w > std::f64::consts::PI {
        w - std::f64::consts::TAU
    } else {
        w
    }
}

/// Propagates a pure fundamental of power `p_in` through the crystal and
/// extracts the power-dependent phase and the residual harmonic.
pub fn extract_cascade_result(p_in: f64, delta_k: f64, kappa: f64, length: f64) -> Result<CascadeResult> {
    extract_cascade_result_with_steps(p_in, delta_k, kappa, length, DEFAULT_STEPS)
}

pub fn extract_cascade_result_with_steps(
    p_in: f64,
    delta_k: f64,
    kappa: f64,
    length: f64,
    steps: usize,
) -> Result<CascadeResult> {
    if !(p_in > 0.0) {
        return domain(format!("input power must be positive, got {p_in}"));
    }
    let out = propagate(&CoupledModeState::fundamental(p_in), delta_k, kappa, length, steps)?;
    let reference = propagate(
        &CoupledModeState::fundamental(p_in * REFERENCE_POWER_RATIO),
        delta_k,
        kappa,
        length,
        steps,
    )?;
    Ok(CascadeResult {
        nl_phase: wrap_phase(out.a1.arg() - reference.a1.arg()),
        residual_conversion: (out.a2.norm_sqr() / p_in).clamp(0.0, 1.0),
    })
}

/// Mid-crystal picture of the cascade as a power-dependent beam splitter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FictitiousMirror {
    /// Fraction of the input converted to the harmonic at `L/2`.
    pub r1: f64,
    /// Phase lag of the converted field at `L/2` relative to the
    /// phase-matched conversion direction, wrapped to `(-pi, pi]`. In the
    /// low-conversion limit it equals `dk L / 4`, half the mismatch phase
    /// accumulated over the first half of the crystal.
    pub phase_offset: f64,
}

pub fn fictitious_mirror(p_in: f64, delta_k: f64, kappa: f64, length: f64) -> Result<FictitiousMirror> {
    if !(p_in > 0.0) {
        return domain(format!("input power must be positive, got {p_in}"));
    }
    let mid = propagate(
        &CoupledModeState::fundamental(p_in),
        delta_k,
        kappa,
        0.5 * length,
        DEFAULT_STEPS / 2,
    )?;
    let relative = mid.a2 * mid.a1.conj() * mid.a1.conj();
    Ok(FictitiousMirror {
        r1: mid.a2.norm_sqr() / p_in,
        phase_offset: wrap_phase(std::f64::consts::FRAC_PI_2 - relative.arg()),
    })
}
