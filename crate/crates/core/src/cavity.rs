//! Traveling-wave resonator with an intracavity cascaded-Kerr medium.
//!
//! The classical part solves the implicit Airy equation with a
//! power-dependent round-trip phase and loss. The quantum part linearizes
//! the sideband fluctuations around a steady state and evaluates the output
//! quadrature spectrum with the usual input-output relations.
//!
//! Rates are amplitude decay rates in s^-1: a round-trip power loss `x`
//! contributes `x * FSR / 2`. Sideband offsets are angular frequencies.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::cascade::kerr_coefficient;
use crate::error::{domain, Error, Result};
use crate::numerics::{bisect, find_roots};
use crate::phase_matching::{shg_efficiency, PhaseMatchModel};
use crate::SPEED_OF_LIGHT;

/// Uniform samples used when scanning the implicit equation for roots.
const ROOT_SCAN_SAMPLES: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CavityParams {
    /// Round-trip optical path, m.
    pub round_trip_length: f64,
    /// Power transmission of the coupling mirror.
    pub coupler_transmission: f64,
    /// All other linear round-trip power loss.
    pub round_trip_loss: f64,
    /// Linear round-trip phase offset from resonance, rad.
    pub detuning: f64,
}

impl CavityParams {
    pub fn new(round_trip_length: f64, coupler_transmission: f64, round_trip_loss: f64, detuning: f64) -> Result<Self> {
        if !(round_trip_length > 0.0 && round_trip_length.is_finite()) {
            return domain(format!("round-trip length must be positive, got {round_trip_length}"));
        }
        if !(coupler_transmission > 0.0 && coupler_transmission < 1.0) {
            return domain(format!(
                "coupler transmission must lie in (0, 1), got {coupler_transmission}"
            ));
        }
        if !(round_trip_loss >= 0.0 && round_trip_loss < 1.0) {
            return domain(format!("round-trip loss must lie in [0, 1), got {round_trip_loss}"));
        }
        if !detuning.is_finite() {
            return domain("detuning must be finite");
        }
        Ok(Self {
            round_trip_length,
            coupler_transmission,
            round_trip_loss,
            detuning,
        })
    }

    /// Chooses the intracavity loss that yields the given escape efficiency.
    pub fn from_escape_efficiency(
        round_trip_length: f64,
        coupler_transmission: f64,
        escape_efficiency: f64,
        detuning: f64,
    ) -> Result<Self> {
        if !(escape_efficiency > 0.0 && escape_efficiency <= 1.0) {
            return domain(format!(
                "escape efficiency must lie in (0, 1], got {escape_efficiency}"
            ));
        }
        let loss = coupler_transmission * (1.0 / escape_efficiency - 1.0);
        Self::new(round_trip_length, coupler_transmission, loss, detuning)
    }

    /// Free spectral range, Hz.
    pub fn fsr(&self) -> f64 {
        SPEED_OF_LIGHT / self.round_trip_length
    }

    pub fn escape_efficiency(&self) -> f64 {
        self.coupler_transmission / (self.coupler_transmission + self.round_trip_loss)
    }

    /// Round-trip amplitude factor with an extra power loss `extra`.
    pub fn round_trip_amplitude(&self, extra: f64) -> f64 {
        ((1.0 - self.coupler_transmission) * (1.0 - self.round_trip_loss - extra).max(0.0)).sqrt()
    }

    pub fn finesse(&self) -> f64 {
        let r = self.round_trip_amplitude(0.0);
        PI * r.sqrt() / (1.0 - r)
    }

    /// Full width at half maximum of the cold resonance, Hz.
    pub fn linewidth(&self) -> f64 {
        self.fsr() / self.finesse()
    }

    /// On-resonance power buildup of the cold cavity.
    pub fn linear_buildup(&self) -> f64 {
        let r = self.round_trip_amplitude(0.0);
        self.coupler_transmission / ((1.0 - r) * (1.0 - r))
    }

    /// Airy circulating power of the cold cavity at round-trip phase `phase`.
    pub fn airy_circulating(&self, p_in: f64, phase: f64) -> f64 {
        let r = self.round_trip_amplitude(0.0);
        self.coupler_transmission * p_in / (1.0 - Complex64::from_polar(r, phase)).norm_sqr()
    }
}

/// Power-dependent response of the intracavity medium per round trip.
pub trait IntracavityMedium {
    /// Nonlinear round-trip phase at circulating power `p_circ`, rad.
    fn phase(&self, p_circ: f64) -> f64;

    /// Additional round-trip power loss at `p_circ`.
    fn loss(&self, _p_circ: f64) -> f64 {
        0.0
    }

    /// `d phase / d p_circ`, rad/W.
    fn phase_slope(&self, p_circ: f64) -> f64 {
        let h = 1e-6 * p_circ.abs().max(1e-3);
        let lo = (p_circ - h).max(0.0);
        (self.phase(p_circ + h) - self.phase(lo)) / (p_circ + h - lo)
    }
}

impl<F> IntracavityMedium for F
where
    F: Fn(f64) -> f64,
{
    fn phase(&self, p_circ: f64) -> f64 {
        self(p_circ)
    }
}

/// No nonlinearity at all.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearMedium;

impl IntracavityMedium for LinearMedium {
    fn phase(&self, _p_circ: f64) -> f64 {
        0.0
    }

    fn phase_slope(&self, _p_circ: f64) -> f64 {
        0.0
    }
}

/// The crystal at a fixed temperature: low-conversion cascaded Kerr phase
/// plus the residual harmonic leaving the resonator as loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadedMedium {
    pub model: PhaseMatchModel,
    /// Lumped coupling, W^-1/2 m^-1.
    pub kappa: f64,
    /// Crystal temperature, degrees C.
    pub temperature: f64,
}

impl CascadedMedium {
    pub fn new(model: PhaseMatchModel, kappa: f64, temperature: f64) -> Self {
        Self {
            model,
            kappa,
            temperature,
        }
    }

    /// Kerr coefficient `g` in rad/W.
    pub fn kerr_coefficient(&self) -> f64 {
        kerr_coefficient(self.model.delta_k(self.temperature), self.kappa, self.model.length)
    }
}

impl IntracavityMedium for CascadedMedium {
    fn phase(&self, p_circ: f64) -> f64 {
        self.kerr_coefficient() * p_circ
    }

    fn loss(&self, p_circ: f64) -> f64 {
        shg_efficiency(&self.model, self.temperature, p_circ.max(0.0), self.kappa).unwrap_or(0.0)
    }

    fn phase_slope(&self, _p_circ: f64) -> f64 {
        self.kerr_coefficient()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// Circulating power, W.
    pub p_circ: f64,
    pub stable: bool,
}

/// `P |1 - r(P) e^{i(detuning + phi(P))}|^2 - T1 p_in`, whose zeros are the
/// steady states.
fn implicit_residual<M: IntracavityMedium + ?Sized>(
    params: &CavityParams,
    p_in: f64,
    detuning: f64,
    medium: &M,
    p: f64,
) -> f64 {
    let r = params.round_trip_amplitude(medium.loss(p));
    p * (1.0 - Complex64::from_polar(r, detuning + medium.phase(p))).norm_sqr()
        - params.coupler_transmission * p_in
}

/// All steady-state circulating powers for the cavity detuning in `params`,
/// ascending. A root is stable when the implicit residual increases through
/// it (the middle branch of an S-curve has negative slope).
pub fn steady_state_branches<M: IntracavityMedium + ?Sized>(
    params: &CavityParams,
    p_in: f64,
    medium: &M,
) -> Result<Vec<SteadyState>> {
    branches_at(params, p_in, params.detuning, medium)
}

fn branches_at<M: IntracavityMedium + ?Sized>(
    params: &CavityParams,
    p_in: f64,
    detuning: f64,
    medium: &M,
) -> Result<Vec<SteadyState>> {
    if !(p_in >= 0.0 && p_in.is_finite()) {
        return domain(format!("input power must be finite and >= 0, got {p_in}"));
    }
    if p_in == 0.0 {
        return Ok(vec![SteadyState {
            p_circ: 0.0,
            stable: true,
        }]);
    }
    let p_max = params.linear_buildup() * p_in * (1.0 + 1e-9);
    let f = |p: f64| implicit_residual(params, p_in, detuning, medium, p);
    let roots = find_roots(f, 0.0, p_max, ROOT_SCAN_SAMPLES, 1e-15 * p_max)?;
    if roots.is_empty() {
        return Err(Error::Numerical(format!(
            "no steady state bracketed on [0, {p_max:.6e}] W for detuning {detuning:.6e} rad \
             (residual at ends: {:.3e}, {:.3e})",
            f(0.0),
            f(p_max)
        )));
    }
    Ok(roots
        .into_iter()
        .map(|p| {
            let h = 1e-7 * p_max;
            let slope = f((p + h).min(p_max)) - f((p - h).max(0.0));
            SteadyState {
                p_circ: p,
                stable: slope > 0.0,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepDirection {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanSettings {
    pub detuning_start: f64,
    pub detuning_stop: f64,
    pub points: usize,
    pub direction: SweepDirection,
    /// Power transmission of the probe mirror behind which the profile is
    /// recorded.
    pub probe_transmission: f64,
}

impl ScanSettings {
    /// Symmetric scan of `half_span` rad around the linear resonance.
    pub fn symmetric(half_span: f64, points: usize, direction: SweepDirection) -> Self {
        Self {
            detuning_start: -half_span,
            detuning_stop: half_span,
            points,
            direction,
            probe_transmission: 1e-3,
        }
    }
}

/// A cavity-length scan recorded quasi-statically. Arrays are ordered by
/// ascending detuning whatever the sweep direction.
#[derive(Debug, Clone, PartialEq)]
pub struct ResonanceProfile {
    pub detuning: Vec<f64>,
    pub p_circ: Vec<f64>,
    pub p_trans: Vec<f64>,
    pub direction: SweepDirection,
    /// `|w_left - w_right| / (w_left + w_right)` at half maximum, if both
    /// half-maximum crossings lie inside the scan.
    pub asymmetry: Option<f64>,
}

/// Sweeps the detuning, following the stable branch adiabatically and
/// jumping only when it ceases to exist.
pub fn scan_profile<M: IntracavityMedium + ?Sized>(
    params: &CavityParams,
    p_in: f64,
    settings: &ScanSettings,
    medium: &M,
) -> Result<ResonanceProfile> {
    if settings.points < 3 {
        return domain("a scan needs at least three points");
    }
    if !(settings.detuning_stop > settings.detuning_start) {
        return domain("scan range must be increasing");
    }
    let n = settings.points;
    let detuning: Vec<f64> = (0..n)
        .map(|i| settings.detuning_start + (settings.detuning_stop - settings.detuning_start) * i as f64 / (n - 1) as f64)
        .collect();
    let order: Vec<usize> = match settings.direction {
        SweepDirection::Up => (0..n).collect(),
        SweepDirection::Down => (0..n).rev().collect(),
    };
    let mut p_circ = vec![0.0; n];
    let mut previous: Option<f64> = None;
    for &i in &order {
        let branches = branches_at(params, p_in, detuning[i], medium)?;
        let stable: Vec<f64> = branches.iter().filter(|b| b.stable).map(|b| b.p_circ).collect();
        let candidates = if stable.is_empty() {
            branches.iter().map(|b| b.p_circ).collect()
        } else {
            stable
        };
        let chosen = match previous {
            None => candidates[0],
            Some(prev) => candidates
                .iter()
                .copied()
                .min_by(|a, b| (a - prev).abs().total_cmp(&(b - prev).abs()))
                .unwrap_or(candidates[0]),
        };
        p_circ[i] = chosen;
        previous = Some(chosen);
    }
    let p_trans = p_circ.iter().map(|p| p * settings.probe_transmission).collect();
    let asymmetry = asymmetry_metric(&detuning, &p_circ);
    Ok(ResonanceProfile {
        detuning,
        p_circ,
        p_trans,
        direction: settings.direction,
        asymmetry,
    })
}

/// Half-maximum asymmetry of a single peak sampled on an ascending axis.
pub fn asymmetry_metric(x: &[f64], y: &[f64]) -> Option<f64> {
    let (peak, &y_peak) = y.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1))?;
    let half = 0.5 * y_peak;
    let cross = |i: usize, j: usize| x[i] + (half - y[i]) * (x[j] - x[i]) / (y[j] - y[i]);
    let left = (0..peak).rev().find(|&i| y[i] < half).map(|i| cross(i, i + 1))?;
    let right = (peak + 1..y.len()).find(|&i| y[i] < half).map(|i| cross(i - 1, i))?;
    let (wl, wr) = (x[peak] - left, right - x[peak]);
    Some((wl - wr).abs() / (wl + wr))
}

/// How the operating point is chosen among the steady states.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BranchSelection {
    /// Cavity length servoed so that the total round-trip phase vanishes;
    /// the configured detuning is replaced by `-phi(P)`.
    Resonant,
    /// The only stable steady state at the configured detuning.
    UniqueStable,
    /// A specific root (ascending order) at the configured detuning.
    Index(usize),
}

/// Linearization point for the sideband fluctuations.
///
/// The fluctuation equation is
/// `d(da)/dt = -(gamma_total + i delta_eff) da + i epsilon e^{2i arg alpha} da^dagger + inputs`
/// with `epsilon = g P FSR` and
/// `delta_eff = (detuning + phi(P) + g P) FSR`, which reduces to
/// `(detuning + 2 g P) FSR` for a Kerr phase linear in power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub p_circ: f64,
    /// Linear detuning in effect at this point, rad.
    pub detuning: f64,
    /// Nonlinear round-trip phase at `p_circ`, rad.
    pub nl_phase_rt: f64,
    /// `d phi / d P`, rad/W.
    pub kerr_slope: f64,
    /// Power-dependent round-trip loss at `p_circ` (residual conversion).
    pub extra_loss: f64,
    /// Effective parametric pump rate, s^-1 (signed).
    pub epsilon: f64,
    pub delta_eff: f64,
    pub gamma_coupler: f64,
    pub gamma_loss: f64,
    pub gamma_total: f64,
    pub fsr: f64,
}

impl OperatingPoint {
    /// `|epsilon| / sqrt(gamma_total^2 + delta_eff^2)`; the fluctuations
    /// diverge when it reaches 1.
    pub fn threshold_ratio(&self) -> f64 {
        self.epsilon.abs() / self.gamma_total.hypot(self.delta_eff)
    }

    pub fn escape_efficiency(&self) -> f64 {
        self.gamma_coupler / self.gamma_total
    }

    /// Builds an operating point directly from rates; useful for studying
    /// the fluctuation model on its own.
    pub fn from_rates(gamma_coupler: f64, gamma_loss: f64, epsilon: f64, delta_eff: f64) -> Result<Self> {
        if !(gamma_coupler > 0.0 && gamma_loss >= 0.0) {
            return domain("decay rates must satisfy gamma_coupler > 0, gamma_loss >= 0");
        }
        if !(epsilon.is_finite() && delta_eff.is_finite()) {
            return domain("pump rate and detuning must be finite");
        }
        Ok(Self {
            p_circ: 0.0,
            detuning: 0.0,
            nl_phase_rt: 0.0,
            kerr_slope: 0.0,
            extra_loss: 0.0,
            epsilon,
            delta_eff,
            gamma_coupler,
            gamma_loss,
            gamma_total: gamma_coupler + gamma_loss,
            fsr: f64::NAN,
        })
    }
}

/// Finds the steady state and derives the fluctuation rates around it.
pub fn make_operating_point<M: IntracavityMedium + ?Sized>(
    params: &CavityParams,
    p_in: f64,
    medium: &M,
    selection: BranchSelection,
) -> Result<OperatingPoint> {
    if !(p_in >= 0.0 && p_in.is_finite()) {
        return domain(format!("input power must be finite and >= 0, got {p_in}"));
    }
    let (p_circ, detuning) = match selection {
        BranchSelection::Resonant => {
            let p = resonant_power(params, p_in, medium)?;
            (p, -medium.phase(p))
        }
        BranchSelection::UniqueStable => {
            let stable: Vec<f64> = steady_state_branches(params, p_in, medium)?
                .into_iter()
                .filter(|b| b.stable)
                .map(|b| b.p_circ)
                .collect();
            match stable.as_slice() {
                [p] => (*p, params.detuning),
                _ => {
                    return Err(Error::Numerical(format!(
                        "expected one stable steady state, found {}",
                        stable.len()
                    )))
                }
            }
        }
        BranchSelection::Index(k) => {
            let all = steady_state_branches(params, p_in, medium)?;
            let b = all.get(k).ok_or_else(|| {
                Error::Numerical(format!("branch index {k} out of range ({} roots)", all.len()))
            })?;
            (b.p_circ, params.detuning)
        }
    };
    let fsr = params.fsr();
    let extra_loss = medium.loss(p_circ);
    let phi = medium.phase(p_circ);
    let g = medium.phase_slope(p_circ);
    let gamma_coupler = 0.5 * params.coupler_transmission * fsr;
    let gamma_loss = 0.5 * (params.round_trip_loss + extra_loss) * fsr;
    let op = OperatingPoint {
        p_circ,
        detuning,
        nl_phase_rt: phi,
        kerr_slope: g,
        extra_loss,
        epsilon: g * p_circ * fsr,
        delta_eff: (detuning + phi + g * p_circ) * fsr,
        gamma_coupler,
        gamma_loss,
        gamma_total: gamma_coupler + gamma_loss,
        fsr,
    };
    let ratio = op.threshold_ratio();
    if ratio >= 1.0 {
        return Err(Error::ThresholdExceeded { ratio });
    }
    Ok(op)
}

/// Circulating power with the round-trip phase held at zero. The loss may
/// depend on power, so `P (1 - r(P))^2 = T1 p_in` is solved by bisection;
/// the left side increases monotonically in `P`.
fn resonant_power<M: IntracavityMedium + ?Sized>(params: &CavityParams, p_in: f64, medium: &M) -> Result<f64> {
    if p_in == 0.0 {
        return Ok(0.0);
    }
    let p_max = params.linear_buildup() * p_in * (1.0 + 1e-9);
    bisect(
        |p| {
            let r = params.round_trip_amplitude(medium.loss(p));
            p * (1.0 - r) * (1.0 - r) - params.coupler_transmission * p_in
        },
        0.0,
        p_max,
        1e-15 * p_max,
    )
}

/// Output quadrature spectrum at one sideband offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumPoint {
    pub v_min: f64,
    pub v_max: f64,
    /// Quadrature angle of `v_min`, in `[0, pi)`.
    pub theta_min: f64,
}

type Mat2 = [[Complex64; 2]; 2];

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j];
        }
    }
    out
}

fn dagger(a: &Mat2) -> Mat2 {
    [[a[0][0].conj(), a[1][0].conj()], [a[0][1].conj(), a[1][1].conj()]]
}

/// Output spectrum of the quadrature fluctuations, vacuum = 1.
///
/// In the quadrature basis the drift matrix is
/// `A = [[-g, -d + e], [e + d, -g]]` (`g` total decay, `d` = `delta_eff`,
/// `e` = `|epsilon|`). The output is
/// `u_out = -(I + 2 g_c G) u_in - 2 sqrt(g_c g_l) G u_loss` with
/// `G = (A + i omega I)^-1`, and the symmetrized spectrum is the real part
/// of `T_c T_c^+ + T_l T_l^+`.
pub fn squeezing_spectrum(op: &OperatingPoint, omega: f64) -> Result<SpectrumPoint> {
    let ratio = op.threshold_ratio();
    if ratio >= 1.0 {
        return Err(Error::ThresholdExceeded { ratio });
    }
    let c = |x: f64| Complex64::new(x, 0.0);
    let (g, d, e) = (op.gamma_total, op.delta_eff, op.epsilon.abs());
    let m = [
        [Complex64::new(-g, omega), c(-d + e)],
        [c(e + d), Complex64::new(-g, omega)],
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    let kc = 2.0 * op.gamma_coupler;
    let kl = -2.0 * (op.gamma_coupler * op.gamma_loss).sqrt();
    let t_c: Mat2 = [
        [-(c(1.0) + kc * inv[0][0]), -(kc * inv[0][1])],
        [-(kc * inv[1][0]), -(c(1.0) + kc * inv[1][1])],
    ];
    let t_l: Mat2 = [[kl * inv[0][0], kl * inv[0][1]], [kl * inv[1][0], kl * inv[1][1]]];
    let sc = mat_mul(&t_c, &dagger(&t_c));
    let sl = mat_mul(&t_l, &dagger(&t_l));
    let (a, b, dd) = (
        sc[0][0].re + sl[0][0].re,
        0.5 * (sc[0][1].re + sl[0][1].re + sc[1][0].re + sl[1][0].re),
        sc[1][1].re + sl[1][1].re,
    );
    let mean = 0.5 * (a + dd);
    let radius = (0.5 * (a - dd)).hypot(b);
    let theta_max = 0.5 * (2.0 * b).atan2(a - dd);
    Ok(SpectrumPoint {
        v_min: mean - radius,
        v_max: mean + radius,
        theta_min: (theta_max + 0.5 * PI).rem_euclid(PI),
    })
}

/// Position of an absolute sideband frequency on the resonator comb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CombOffset {
    /// Nearest comb index.
    pub index: u64,
    /// Angular offset from that comb line, rad/s.
    pub omega: f64,
}

/// Maps `f` to the nearest comb line; the baseband spectrum at `omega`
/// stands in for the sideband pair at `+/- index * FSR`.
pub fn sideband_comb_map(params: &CavityParams, f: f64) -> Result<CombOffset> {
    if !(f >= 0.0 && f.is_finite()) {
        return domain(format!("sideband frequency must be finite and >= 0, got {f}"));
    }
    let fsr = params.fsr();
    let n = (f / fsr).round();
    Ok(CombOffset {
        index: n as u64,
        omega: TAU * (f - n * fsr),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_matching::calibrate_from_extrema;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn nominal_cavity() -> CavityParams {
        CavityParams::from_escape_efficiency(0.838, 0.01, 0.84, 0.0).unwrap()
    }

    fn first_minimum_medium() -> CascadedMedium {
        CascadedMedium::new(calibrate_from_extrema(40.5, 61.2, 9.3e-3).unwrap(), 3.7, 61.2)
    }

    #[test]
    fn derived_cavity_quantities() {
        let c = CavityParams::new(0.838, 0.01, 0.0019, 0.0).unwrap();
        assert!((c.escape_efficiency() - 0.840).abs() < 0.005);
        assert!((c.fsr() / 1e6 - 357.7).abs() < 0.05);
        assert!((c.fsr() - 358e6).abs() / 358e6 < 0.01);
        assert!((c.linear_buildup() - 282.0).abs() < 1.0);
        assert!(CavityParams::new(0.838, 1.2, 0.0, 0.0).is_err());
        assert!(CavityParams::new(0.838, 0.01, 1.0, 0.0).is_err());
        assert!(CavityParams::new(-1.0, 0.01, 0.0, 0.0).is_err());
    }

    #[test]
    fn linear_cavity_single_root_matches_airy() {
        let c = CavityParams::new(0.838, 0.01, 0.0019, 0.0).unwrap();
        let b = steady_state_branches(&c, 0.07, &LinearMedium).unwrap();
        assert_eq!(b.len(), 1);
        assert!(b[0].stable);
        assert_relative_eq!(b[0].p_circ, c.linear_buildup() * 0.07, max_relative = 1e-12);
        for det in [-0.2, -0.01, 0.003, 0.05, 1.0] {
            let c = CavityParams { detuning: det, ..c };
            let b = steady_state_branches(&c, 0.07, &LinearMedium).unwrap();
            assert_eq!(b.len(), 1);
            assert_relative_eq!(b[0].p_circ, c.airy_circulating(0.07, det), max_relative = 1e-10);
        }
    }

    #[test]
    fn strong_kerr_gives_three_roots() {
        let c = CavityParams { detuning: 0.05, ..nominal_cavity() };
        let g = -2e-3;
        let kerr = move |p: f64| g * p;
        let b = steady_state_branches(&c, 0.2, &kerr).unwrap();
        assert_eq!(b.len(), 3);
        assert_eq!(b.iter().map(|s| s.stable).collect::<Vec<_>>(), [true, false, true]);
        // Graphical oracle: P = T1 p_in / |1 - r e^{i(d + gP)}|^2 intersected
        // on a fine grid.
        let r = c.round_trip_amplitude(0.0);
        let pmax = c.linear_buildup() * 0.2;
        let n = 400_000;
        let mut sign_changes = 0;
        let mut prev = f64::NAN;
        for i in 0..=n {
            let p = pmax * i as f64 / n as f64;
            let rhs = 0.01 * 0.2 / (1.0 - Complex64::from_polar(r, 0.05 + g * p)).norm_sqr();
            let d = p - rhs;
            if prev.is_finite() && d.signum() != prev.signum() {
                sign_changes += 1;
            }
            prev = d;
        }
        assert_eq!(sign_changes, 3);
    }

    #[test]
    fn linear_scan_is_symmetric_airy() {
        let c = nominal_cavity();
        let s = ScanSettings::symmetric(0.05, 801, SweepDirection::Up);
        let prof = scan_profile(&c, 0.0088, &s, &LinearMedium).unwrap();
        assert!(prof.asymmetry.unwrap() < 1e-9);
        let mut area = 0.0;
        let mut area_ref = 0.0;
        for (i, (&d, &p)) in prof.detuning.iter().zip(&prof.p_circ).enumerate() {
            let airy = c.airy_circulating(0.0088, d);
            assert!(((p - airy) / airy).abs() < 1e-6);
            if i > 0 {
                let h = d - prof.detuning[i - 1];
                area += 0.5 * h * (p + prof.p_circ[i - 1]);
                area_ref += 0.5 * h * (airy + c.airy_circulating(0.0088, prof.detuning[i - 1]));
            }
        }
        assert!(((area - area_ref) / area_ref).abs() < 1e-6);
        let peak = prof.p_circ.iter().cloned().fold(0.0, f64::max);
        assert!(((peak - c.airy_circulating(0.0088, 0.0)) / peak).abs() < 1e-6);
    }

    #[test]
    fn kerr_scan_is_skewed_and_hysteretic() {
        let c = nominal_cavity();
        let m = CascadedMedium { kappa: 10.0, ..first_minimum_medium() };
        let up = scan_profile(&c, 0.07, &ScanSettings::symmetric(0.06, 601, SweepDirection::Up), &m).unwrap();
        let down = scan_profile(&c, 0.07, &ScanSettings::symmetric(0.06, 601, SweepDirection::Down), &m).unwrap();
        assert!(up.asymmetry.unwrap() > 0.1);
        let diff = up.p_circ.iter().zip(&down.p_circ).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let bistable = up.detuning.iter().any(|&d| {
            steady_state_branches(&CavityParams { detuning: d, ..c }, 0.07, &m).unwrap().len() == 3
        });
        assert!(bistable);
        assert!(diff > 0.1 * up.p_circ.iter().cloned().fold(0.0, f64::max));
    }

    #[test]
    fn weak_kerr_has_no_hysteresis() {
        let c = nominal_cavity();
        let m = first_minimum_medium();
        let s_up = ScanSettings::symmetric(0.06, 301, SweepDirection::Up);
        let s_dn = ScanSettings { direction: SweepDirection::Down, ..s_up };
        let up = scan_profile(&c, 0.002, &s_up, &m).unwrap();
        let down = scan_profile(&c, 0.002, &s_dn, &m).unwrap();
        let bistable = up.detuning.iter().any(|&d| {
            steady_state_branches(&CavityParams { detuning: d, ..c }, 0.002, &m).unwrap().len() == 3
        });
        assert!(!bistable);
        assert_eq!(up.p_circ, down.p_circ);
        assert!(up.asymmetry.unwrap() > 0.0);
    }

    #[test]
    fn operating_point_rates() {
        let c = nominal_cavity();
        let op = make_operating_point(&c, 0.07, &LinearMedium, BranchSelection::Resonant).unwrap();
        assert_eq!(op.epsilon, 0.0);
        assert_relative_eq!(op.gamma_coupler, 0.005 * c.fsr(), max_relative = 1e-12);
        assert_relative_eq!(op.escape_efficiency(), 0.84, max_relative = 1e-12);
        let m = first_minimum_medium();
        let op = make_operating_point(&c, 0.07, &m, BranchSelection::Resonant).unwrap();
        assert_relative_eq!(op.epsilon, m.kerr_coefficient() * op.p_circ * c.fsr(), max_relative = 1e-12);
        assert_relative_eq!(op.detuning + op.nl_phase_rt, 0.0, epsilon = 1e-15);
        assert_relative_eq!(op.delta_eff, op.epsilon, max_relative = 1e-12);
        assert!(op.extra_loss < 1e-20);
        assert!(op.threshold_ratio() < 1.0);
    }

    #[test]
    fn fold_point_matches_threshold_condition() {
        // Raise the drive at fixed detuning until the S-curve folds; the
        // stable branch reaching the fold must sit at threshold ratio 1.
        let g = -2e-3;
        let kerr = move |p: f64| g * p;
        let c = CavityParams { detuning: 0.05, ..nominal_cavity() };
        let count = |p_in: f64| steady_state_branches(&c, p_in, &kerr).unwrap().len();
        let (mut lo, mut hi) = (1e-4, 0.2);
        assert_eq!(count(lo), 1);
        assert_eq!(count(hi), 3);
        for _ in 0..60 {
            let mid = (lo * hi).sqrt();
            if count(mid) == 3 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let b = steady_state_branches(&c, hi, &kerr).unwrap();
        // The new pair of roots is born at the fold; take the middle root.
        let p_fold = b[1].p_circ;
        let fsr = c.fsr();
        let gamma = 0.5 * (c.coupler_transmission + c.round_trip_loss) * fsr;
        let eps = g * p_fold * fsr;
        let delta_eff = (c.detuning + 2.0 * g * p_fold) * fsr;
        let ratio = eps.abs() / gamma.hypot(delta_eff);
        assert!((ratio - 1.0).abs() < 0.05, "ratio at fold {ratio}");
    }

    #[test]
    fn unstable_branch_is_above_threshold() {
        let c = CavityParams { detuning: 0.05, ..nominal_cavity() };
        let kerr = |p: f64| -2e-3 * p;
        assert!(matches!(
            make_operating_point(&c, 0.2, &kerr, BranchSelection::Index(1)),
            Err(Error::ThresholdExceeded { .. })
        ));
        assert!(make_operating_point(&c, 0.2, &kerr, BranchSelection::Index(0)).is_ok());
        assert!(make_operating_point(&c, 0.2, &kerr, BranchSelection::UniqueStable).is_err());
    }

    #[test]
    fn spectrum_vacuum_without_pump() {
        let op = OperatingPoint::from_rates(1e6, 3e5, 0.0, 2e5).unwrap();
        for w in [0.0, 1e5, 1e7] {
            let s = squeezing_spectrum(&op, w).unwrap();
            assert!((s.v_min - 1.0).abs() < 1e-12 && (s.v_max - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn spectrum_opa_closed_form() {
        let gamma = 2e6;
        let op = OperatingPoint::from_rates(gamma, 0.0, 0.5 * gamma, 0.0).unwrap();
        let s = squeezing_spectrum(&op, 0.0).unwrap();
        assert!((s.v_min - 1.0 / 9.0).abs() < 1e-9);
        assert!((s.v_max - 9.0).abs() < 1e-9);
        let lossy = OperatingPoint::from_rates(0.8 * gamma, 0.2 * gamma, 0.3 * gamma, 0.0).unwrap();
        for w in [0.0, 0.5 * gamma, 3.0 * gamma] {
            let s = squeezing_spectrum(&lossy, w).unwrap();
            let (gc, g, e) = (0.8 * gamma, gamma, 0.3 * gamma);
            let vm = 1.0 - 4.0 * gc * e / ((g + e).powi(2) + w * w);
            let vp = 1.0 + 4.0 * gc * e / ((g - e).powi(2) + w * w);
            assert!((s.v_min - vm).abs() < 1e-12);
            assert!((s.v_max - vp).abs() < 1e-12);
        }
    }

    #[test]
    fn locked_kerr_shear_limit() {
        // delta_eff = epsilon: a pure shear with gain K = 4 eps / gamma at omega = 0.
        let gamma = 1e6;
        let eps = 0.7 * gamma;
        let op = OperatingPoint::from_rates(gamma, 0.0, eps, eps).unwrap();
        let s = squeezing_spectrum(&op, 0.0).unwrap();
        let k: f64 = 4.0 * eps / gamma;
        let expected = 0.5 * ((2.0 + k * k) - k * (k * k + 4.0).sqrt());
        assert!((s.v_min - expected).abs() < 1e-12);
        assert!((s.v_min * s.v_max - 1.0).abs() < 1e-9);
    }

    #[test]
    fn spectrum_rejects_above_threshold() {
        let op = OperatingPoint::from_rates(1e6, 0.0, 1.2e6, 0.0).unwrap();
        assert!(matches!(squeezing_spectrum(&op, 0.0), Err(Error::ThresholdExceeded { .. })));
    }

    #[test]
    fn comb_map_examples() {
        let c = CavityParams::new(crate::SPEED_OF_LIGHT / 358e6, 0.01, 0.0019, 0.0).unwrap();
        let m = sideband_comb_map(&c, 358e6).unwrap();
        assert_eq!(m.index, 1);
        assert!(m.omega.abs() < 1e-3);
        let m = sideband_comb_map(&c, 1074e6).unwrap();
        assert_eq!(m.index, 3);
        assert!(m.omega.abs() < 1e-3);
        let m = sideband_comb_map(&c, 1.5 * c.fsr()).unwrap();
        assert!((m.omega.abs() - PI * c.fsr()).abs() < 1e-3 * c.fsr());
        assert!(sideband_comb_map(&c, -1.0).is_err());
    }

    proptest! {
        #[test]
        fn lossless_detuned_free_output_is_pure(ratio in 0.0f64..0.95, w in 0.0f64..5.0) {
            let gamma = 1e6;
            let op = OperatingPoint::from_rates(gamma, 0.0, ratio * gamma, 0.0).unwrap();
            let s = squeezing_spectrum(&op, w * gamma).unwrap();
            prop_assert!((s.v_min * s.v_max - 1.0).abs() < 1e-9);
        }

        #[test]
        fn lossy_output_is_mixed(ratio in 0.01f64..0.95, loss in 0.01f64..2.0, d in -1.0f64..1.0, w in 0.0f64..5.0) {
            let gamma = 1e6;
            let op = OperatingPoint::from_rates(gamma, loss * gamma, ratio * gamma * (1.0 + loss), d * gamma).unwrap();
            prop_assume!(op.threshold_ratio() < 0.99);
            let s = squeezing_spectrum(&op, w * gamma).unwrap();
            prop_assert!(s.v_min * s.v_max >= 1.0 - 1e-12);
            if d == 0.0 {
                prop_assert!(s.v_min <= 1.0 && s.v_max >= 1.0);
            }
        }

        #[test]
        fn squeezing_best_on_resonance(ratio in 0.05f64..0.95, loss in 0.0f64..1.0, w1 in 0.0f64..4.0, w2 in 0.0f64..4.0) {
            let gamma = 1e6;
            let op = OperatingPoint::from_rates(gamma, loss * gamma, ratio * gamma * (1.0 + loss), 0.0).unwrap();
            let (a, b) = if w1 < w2 { (w1, w2) } else { (w2, w1) };
            let sa = squeezing_spectrum(&op, a * gamma).unwrap();
            let sb = squeezing_spectrum(&op, b * gamma).unwrap();
            prop_assert!(sa.v_min <= sb.v_min + 1e-12);
            prop_assert!(sa.v_min <= 1.0 + 1e-12 && sa.v_max >= 1.0 - 1e-12);
        }
    }
}
