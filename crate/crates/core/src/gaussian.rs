//! Single-mode Gaussian quadrature states relative to vacuum.
//!
//! Variances are normalized so that vacuum has variance 1 in every
//! quadrature. A state is described by the principal variances of its noise
//! ellipse and the quadrature angle of the minor axis; carrier amplitude is
//! not tracked because detection happens on a carrier-free sideband field.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{domain, Error, Result};
use crate::numerics::bisect;

/// Relative slack allowed on the purity bound `v_min * v_max >= 1`.
const PURITY_SLACK: f64 = 1e-12;

/// Default tolerance on variances for the inverse problems.
pub const DEFAULT_VARIANCE_TOL: f64 = 1e-10;

/// Noise ellipse of one quadrature-squeezed mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianQuadratureState {
    v_min: f64,
    v_max: f64,
    theta0: f64,
}

impl GaussianQuadratureState {
    /// Builds a state, checking positivity, ordering and the purity bound.
    /// The orientation is reduced to `[0, pi)`.
    pub fn new(v_min: f64, v_max: f64, theta0: f64) -> Result<Self> {
        if !(v_min.is_finite() && v_max.is_finite() && theta0.is_finite()) {
            return domain("state parameters must be finite");
        }
        if v_min <= 0.0 {
            return domain(format!("v_min must be positive, got {v_min}"));
        }
        if v_max < v_min {
            return domain(format!("v_max ({v_max}) must be >= v_min ({v_min})"));
        }
        if v_min * v_max < 1.0 - PURITY_SLACK {
            return domain(format!(
                "purity bound violated: v_min * v_max = {}",
                v_min * v_max
            ));
        }
        Ok(Self {
            v_min,
            v_max,
            theta0: theta0.rem_euclid(PI),
        })
    }

    pub fn vacuum() -> Self {
        Self {
            v_min: 1.0,
            v_max: 1.0,
            theta0: 0.0,
        }
    }

    /// Pure squeezed vacuum with squeeze parameter `r >= 0`:
    /// variances `e^(-2r)` and `e^(2r)`.
    pub fn pure_squeezed(r: f64, theta0: f64) -> Result<Self> {
        if !(r.is_finite() && r >= 0.0) {
            return domain(format!("squeeze parameter must be finite and >= 0, got {r}"));
        }
        Ok(Self {
            v_min: (-2.0 * r).exp(),
            v_max: (2.0 * r).exp(),
            theta0: theta0.rem_euclid(PI),
        })
    }

    pub fn v_min(&self) -> f64 {
        self.v_min
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// `v_min * v_max`; equals 1 for pure states.
    pub fn uncertainty_product(&self) -> f64 {
        self.v_min * self.v_max
    }

    /// Variance of the quadrature at angle `theta`:
    /// `v_min cos^2(theta - theta0) + v_max sin^2(theta - theta0)`.
    pub fn quadrature_variance(&self, theta: f64) -> f64 {
        let (s, c) = (theta - self.theta0).sin_cos();
        self.v_min * c * c + self.v_max * s * s
    }

    /// Squeeze and anti-squeeze levels in dB relative to vacuum.
    pub fn observation(&self) -> SqueezeObservation {
        SqueezeObservation {
            squeeze_db: -10.0 * self.v_min.log10(),
            antisqueeze_db: 10.0 * self.v_max.log10(),
            uncertainty_db: 0.0,
        }
    }
}

/// Squeeze/anti-squeeze pair as reported by a homodyne measurement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SqueezeObservation {
    /// dB below vacuum; positive means noise reduction.
    pub squeeze_db: f64,
    /// dB above vacuum.
    pub antisqueeze_db: f64,
    /// One-sigma uncertainty in dB.
    pub uncertainty_db: f64,
}

impl SqueezeObservation {
    pub fn new(squeeze_db: f64, antisqueeze_db: f64, uncertainty_db: f64) -> Result<Self> {
        if !(squeeze_db.is_finite() && antisqueeze_db.is_finite() && uncertainty_db.is_finite()) {
            return domain("observation values must be finite");
        }
        if uncertainty_db < 0.0 {
            return domain(format!("uncertainty must be >= 0, got {uncertainty_db}"));
        }
        Ok(Self {
            squeeze_db,
            antisqueeze_db,
            uncertainty_db,
        })
    }

    /// Minimum quadrature variance implied by the squeeze level.
    pub fn v_minus(&self) -> f64 {
        10f64.powf(-self.squeeze_db / 10.0)
    }

    /// Maximum quadrature variance implied by the anti-squeeze level.
    pub fn v_plus(&self) -> f64 {
        10f64.powf(self.antisqueeze_db / 10.0)
    }
}

/// Converts a level in dB relative to vacuum into a normalized variance.
pub fn db_to_variance(level_db: f64) -> Result<f64> {
    if !level_db.is_finite() {
        return domain(format!("dB level must be finite, got {level_db}"));
    }
    Ok(10f64.powf(level_db / 10.0))
}

pub fn variance_to_db(variance: f64) -> Result<f64> {
    if !(variance.is_finite() && variance > 0.0) {
        return domain(format!("variance must be finite and positive, got {variance}"));
    }
    Ok(10.0 * variance.log10())
}

/// Beam-splitter loss: each principal variance becomes `eta V + (1 - eta)`.
pub fn apply_loss(state: &GaussianQuadratureState, eta: f64) -> Result<GaussianQuadratureState> {
    if !(0.0..=1.0).contains(&eta) {
        return domain(format!("efficiency must lie in [0, 1], got {eta}"));
    }
    Ok(GaussianQuadratureState {
        v_min: eta * state.v_min + (1.0 - eta),
        v_max: eta * state.v_max + (1.0 - eta),
        theta0: state.theta0,
    })
}

/// A state observed through Gaussian jitter of the homodyne angle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitteredQuadrature {
    state: GaussianQuadratureState,
    sigma: f64,
}

impl JitteredQuadrature {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// Attenuation `e^(-2 sigma^2)` of the ellipse contrast.
    pub fn contrast(&self) -> f64 {
        (-2.0 * self.sigma * self.sigma).exp()
    }

    /// Jitter-averaged variance at homodyne angle `theta`.
    pub fn variance(&self, theta: f64) -> f64 {
        let k = self.contrast() * (2.0 * (theta - self.state.theta0)).cos();
        0.5 * (self.state.v_min * (1.0 + k) + self.state.v_max * (1.0 - k))
    }

    pub fn min_variance(&self) -> f64 {
        self.variance(self.state.theta0)
    }

    pub fn max_variance(&self) -> f64 {
        self.variance(self.state.theta0 + FRAC_PI_2)
    }

    /// The averaged variance curve is again a rotated ellipse; this returns it.
    pub fn effective_state(&self) -> GaussianQuadratureState {
        GaussianQuadratureState {
            v_min: self.min_variance(),
            v_max: self.max_variance(),
            theta0: self.state.theta0,
        }
    }
}

/// Averages the quadrature variance over a zero-mean Gaussian angle error
/// with RMS `sigma` radians.
pub fn apply_phase_jitter(state: &GaussianQuadratureState, sigma: f64) -> Result<JitteredQuadrature> {
    if !(sigma >= 0.0) {
        return domain(format!("phase jitter must be >= 0, got {sigma}"));
    }
    Ok(JitteredQuadrature {
        state: *state,
        sigma,
    })
}

/// Efficiency and squeeze parameter under a loss-only interpretation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossOnlyFit {
    pub eta: f64,
    pub r: f64,
}

/// Explains an observation as a pure squeezed state behind a single loss.
///
/// Closed form: `e^(-2r) = (1 - V-)/(V+ - 1)` and
/// `eta = (1 - V-)/(1 - e^(-2r))`.
pub fn infer_loss_only(obs: &SqueezeObservation) -> Result<LossOnlyFit> {
    let v_minus = obs.v_minus();
    let v_plus = obs.v_plus();
    if v_minus >= 1.0 || v_plus <= 1.0 {
        return Err(Error::NoSolution(format!(
            "loss-only inversion needs V- < 1 < V+, got V- = {v_minus}, V+ = {v_plus}"
        )));
    }
    let e2r = (1.0 - v_minus) / (v_plus - 1.0);
    let eta = (1.0 - v_minus) / (1.0 - e2r);
    if !(eta.is_finite()) || e2r >= 1.0 || eta > 1.0 + DEFAULT_VARIANCE_TOL {
        return Err(Error::InconsistentObservation {
            reason: format!("required efficiency {eta:.6} exceeds 1"),
            residual: eta - 1.0,
        });
    }
    Ok(LossOnlyFit {
        eta: eta.min(1.0),
        r: -0.5 * e2r.ln(),
    })
}

/// Squeeze parameter and RMS phase jitter for a known efficiency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseNoiseFit {
    pub r: f64,
    pub sigma: f64,
}

/// Forward model: pure state `r`, loss `eta`, then jitter `sigma`.
pub fn forward_observation(r: f64, eta: f64, sigma: f64) -> Result<SqueezeObservation> {
    let lossy = apply_loss(&GaussianQuadratureState::pure_squeezed(r, 0.0)?, eta)?;
    Ok(apply_phase_jitter(&lossy, sigma)?.effective_state().observation())
}

/// Inverts the loss-then-jitter forward model for `(r, sigma)` given an
/// independently known efficiency.
///
/// The jitter leaves the mean of the two principal variances untouched, so
/// the mean fixes `r` through `1 - eta + eta cosh 2r`; the remaining contrast
/// then fixes `sigma`. Each unknown is found by bisection on a bracket.
pub fn infer_phase_noise(obs: &SqueezeObservation, eta_known: f64) -> Result<PhaseNoiseFit> {
    infer_phase_noise_with_tol(obs, eta_known, DEFAULT_VARIANCE_TOL)
}

pub fn infer_phase_noise_with_tol(
    obs: &SqueezeObservation,
    eta_known: f64,
    tol: f64,
) -> Result<PhaseNoiseFit> {
    if !(eta_known > 0.0 && eta_known <= 1.0) {
        return domain(format!("known efficiency must lie in (0, 1], got {eta_known}"));
    }
    let v_minus = obs.v_minus();
    let v_plus = obs.v_plus();
    if v_plus < v_minus {
        return Err(Error::InconsistentObservation {
            reason: "anti-squeezed variance below squeezed variance".into(),
            residual: v_minus - v_plus,
        });
    }
    let mean_obs = 0.5 * (v_minus + v_plus);
    let half_obs = 0.5 * (v_plus - v_minus);
    if mean_obs < 1.0 - tol {
        return Err(Error::InconsistentObservation {
            reason: format!("mean variance {mean_obs:.6} below vacuum"),
            residual: 1.0 - mean_obs,
        });
    }

    let mean_of = |r: f64| 1.0 - eta_known + eta_known * (2.0 * r).cosh();
    let r = if mean_obs <= 1.0 {
        0.0
    } else {
        let mut r_hi = 1.0;
        while mean_of(r_hi) < mean_obs {
            r_hi *= 2.0;
            if r_hi > 64.0 {
                return Err(Error::NoSolution(format!(
                    "no squeeze parameter reproduces mean variance {mean_obs:e}"
                )));
            }
        }
        bisect(|r| mean_of(r) - mean_obs, 0.0, r_hi, 0.0)?
    };

    let half_lossy = eta_known * (2.0 * r).sinh();
    if half_obs > half_lossy * (1.0 + tol) + tol {
        return Err(Error::InconsistentObservation {
            reason: format!(
                "observed ellipse contrast exceeds what efficiency {eta_known} allows"
            ),
            residual: half_obs - half_lossy,
        });
    }
    let sigma = if half_obs >= half_lossy {
        0.0
    } else if half_obs <= 0.0 {
        return Err(Error::NoSolution(
            "fully dephased observation requires unbounded jitter".into(),
        ));
    } else {
        let contrast_gap = |s: f64| (-2.0 * s * s).exp() * half_lossy - half_obs;
        let mut s_hi = 1.0;
        while contrast_gap(s_hi) > 0.0 {
            s_hi *= 2.0;
            if s_hi > 1e3 {
                return Err(Error::NoSolution("jitter bracket expansion failed".into()));
            }
        }
        bisect(contrast_gap, 0.0, s_hi, 0.0)?
    };

    let check = forward_observation(r, eta_known, sigma)?;
    let residual = (check.v_minus() - v_minus)
        .abs()
        .max((check.v_plus() - v_plus).abs());
    if residual > tol * v_plus.max(1.0) {
        return Err(Error::InconsistentObservation {
            reason: "forward model does not reproduce the observation".into(),
            residual,
        });
    }
    Ok(PhaseNoiseFit { r, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn obs(s: f64, a: f64) -> SqueezeObservation {
        SqueezeObservation::new(s, a, 0.0).unwrap()
    }

    #[test]
    fn db_conversion_anchors() {
        assert_eq!(db_to_variance(0.0).unwrap(), 1.0);
        assert_relative_eq!(db_to_variance(-2.4).unwrap(), 0.575_439_937_3, epsilon = 1e-9);
        assert_relative_eq!(db_to_variance(7.5).unwrap(), 5.623_413_251_9, epsilon = 1e-9);
        assert!(db_to_variance(f64::NAN).is_err());
        assert!(db_to_variance(f64::INFINITY).is_err());
        assert!(variance_to_db(0.0).is_err());
    }

    #[test]
    fn state_constructor_checks() {
        assert!(GaussianQuadratureState::new(0.5, 1.5, 0.0).is_err());
        assert!(GaussianQuadratureState::new(2.0, 1.0, 0.0).is_err());
        assert!(GaussianQuadratureState::new(-0.1, 10.0, 0.0).is_err());
        let s = GaussianQuadratureState::new(0.5, 2.0, 4.0).unwrap();
        assert!(s.theta0() >= 0.0 && s.theta0() < PI);
    }

    #[test]
    fn quadrature_variance_special_angles() {
        let s = GaussianQuadratureState::new(0.3, 5.0, 0.4).unwrap();
        assert_relative_eq!(s.quadrature_variance(0.4), 0.3, epsilon = 1e-15);
        assert_relative_eq!(s.quadrature_variance(0.4 + FRAC_PI_2), 5.0, epsilon = 1e-14);
        assert_relative_eq!(s.quadrature_variance(0.4 + PI / 4.0), 2.65, epsilon = 1e-14);
        assert_relative_eq!(s.quadrature_variance(1.3), s.quadrature_variance(1.3 + PI), epsilon = 1e-13);
    }

    #[test]
    fn loss_limits_and_forward_example() {
        let s = GaussianQuadratureState::new(0.091_83, 1.0 / 0.091_83, 0.2).unwrap();
        assert_eq!(apply_loss(&s, 1.0).unwrap(), s);
        let v = apply_loss(&s, 0.0).unwrap();
        assert_eq!((v.v_min(), v.v_max()), (1.0, 1.0));
        let out = apply_loss(&s, 0.4675).unwrap();
        assert_relative_eq!(out.v_min(), 0.5754, epsilon = 2e-4);
        assert_relative_eq!(out.v_max(), 5.623, epsilon = 2e-3);
        assert_eq!(out.theta0(), s.theta0());
        assert!(apply_loss(&s, 1.01).is_err());
        assert!(apply_loss(&s, -0.01).is_err());
    }

    #[test]
    fn jitter_limits() {
        let s = GaussianQuadratureState::new(0.2, 8.0, 1.0).unwrap();
        assert_eq!(apply_phase_jitter(&s, 0.0).unwrap().variance(1.0), 0.2);
        let j = apply_phase_jitter(&s, 50.0).unwrap();
        for th in [0.0, 0.7, 2.0] {
            assert_relative_eq!(j.variance(th), 4.1, epsilon = 1e-12);
        }
        assert!(apply_phase_jitter(&s, -1e-3).is_err());
    }

    #[test]
    fn jitter_closed_form_matches_monte_carlo() {
        let s = GaussianQuadratureState::new(0.25, 9.0, 0.3).unwrap();
        let sigma = 0.05;
        let j = apply_phase_jitter(&s, sigma).unwrap();
        let normal = Normal::new(0.0, sigma).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 1_000_000;
        for theta in [0.3, 0.3 + 0.4, 0.3 + FRAC_PI_2] {
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..n {
                let v = s.quadrature_variance(theta + normal.sample(&mut rng));
                sum += v;
                sum2 += v * v;
            }
            let mean = sum / n as f64;
            let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
            assert!(
                (mean - j.variance(theta)).abs() < 3.0 * se + 1e-15,
                "theta {theta}: mc {mean} vs closed {} (se {se})",
                j.variance(theta)
            );
        }
    }

    #[test]
    fn loss_only_reference_pair() {
        let fit = infer_loss_only(&obs(2.4, 7.5)).unwrap();
        assert!((0.466..=0.470).contains(&fit.eta), "eta {}", fit.eta);
        assert_relative_eq!(fit.r, 1.194, epsilon = 1e-3);
        let fit = infer_loss_only(&obs(2.0, 9.5)).unwrap();
        assert_relative_eq!(fit.eta, 0.387, epsilon = 1e-3);
    }

    #[test]
    fn loss_only_pure_state_is_lossless() {
        let fit = infer_loss_only(&obs(6.0, 6.0)).unwrap();
        assert_relative_eq!(fit.eta, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn loss_only_errors() {
        assert!(matches!(
            infer_loss_only(&obs(3.0, 2.0)),
            Err(Error::InconsistentObservation { .. })
        ));
        assert!(matches!(infer_loss_only(&obs(-0.5, 2.0)), Err(Error::NoSolution(_))));
        assert!(matches!(infer_loss_only(&obs(1.0, -0.5)), Err(Error::NoSolution(_))));
    }

    #[test]
    fn phase_noise_zero_when_loss_explains_everything() {
        let o = forward_observation(0.9, 0.7, 0.0).unwrap();
        let fit = infer_phase_noise(&o, 0.7).unwrap();
        assert_eq!(fit.sigma, 0.0);
        assert_relative_eq!(fit.r, 0.9, epsilon = 1e-9);
    }

    /// Dense grid over (r, sigma) minimizing the dB misfit; refined twice.
    fn grid_oracle(o: &SqueezeObservation, eta: f64) -> (f64, f64, f64) {
        let misfit = |r: f64, s: f64| {
            let f = forward_observation(r, eta, s).unwrap();
            (f.squeeze_db - o.squeeze_db).abs() + (f.antisqueeze_db - o.antisqueeze_db).abs()
        };
        let (mut r_lo, mut r_hi, mut s_lo, mut s_hi) = (0.0, 3.0, 0.0, 1.0);
        let mut best = (0.0, 0.0, f64::INFINITY);
        for _ in 0..4 {
            let n = 200;
            for i in 0..=n {
                for k in 0..=n {
                    let r = r_lo + (r_hi - r_lo) * i as f64 / n as f64;
                    let s = s_lo + (s_hi - s_lo) * k as f64 / n as f64;
                    let m = misfit(r, s);
                    if m < best.2 {
                        best = (r, s, m);
                    }
                }
            }
            let (dr, ds) = ((r_hi - r_lo) / 20.0, (s_hi - s_lo) / 20.0);
            r_lo = (best.0 - dr).max(0.0);
            r_hi = best.0 + dr;
            s_lo = (best.1 - ds).max(0.0);
            s_hi = best.1 + ds;
        }
        best
    }

    #[test]
    fn phase_noise_matches_grid_oracle() {
        for (s, a) in [(2.4, 7.5), (2.0, 9.5)] {
            let o = obs(s, a);
            let fit = infer_phase_noise(&o, 0.66).unwrap();
            assert!(fit.sigma > 0.0);
            let back = forward_observation(fit.r, 0.66, fit.sigma).unwrap();
            assert!((back.squeeze_db - s).abs() < 1e-6);
            assert!((back.antisqueeze_db - a).abs() < 1e-6);
            let (r_g, s_g, m_g) = grid_oracle(&o, 0.66);
            assert!(m_g < 1e-3, "grid misfit {m_g}");
            assert!((r_g - fit.r).abs() < 2e-3, "r {} vs grid {r_g}", fit.r);
            assert!((s_g - fit.sigma).abs() < 2e-3, "sigma {} vs grid {s_g}", fit.sigma);
        }
    }

    #[test]
    fn phase_noise_rejects_too_much_contrast() {
        // Loss-only needs 47 %; a detector at 30 % cannot produce this contrast.
        assert!(matches!(
            infer_phase_noise(&obs(2.4, 7.5), 0.30),
            Err(Error::InconsistentObservation { .. })
        ));
        assert!(infer_phase_noise(&obs(2.4, 7.5), 0.0).is_err());
    }

    proptest! {
        #[test]
        fn db_round_trip(level in -60.0f64..60.0) {
            let back = variance_to_db(db_to_variance(level).unwrap()).unwrap();
            prop_assert!((back - level).abs() <= 1e-12 * level.abs().max(1.0));
        }

        #[test]
        fn loss_composes(r in 0.0f64..3.0, a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let s = GaussianQuadratureState::pure_squeezed(r, 0.0).unwrap();
            let two = apply_loss(&apply_loss(&s, a).unwrap(), b).unwrap();
            let one = apply_loss(&s, a * b).unwrap();
            prop_assert!((two.v_min() - one.v_min()).abs() < 1e-12 * one.v_max());
            prop_assert!((two.v_max() - one.v_max()).abs() < 1e-12 * one.v_max());
            prop_assert!(two.uncertainty_product() >= 1.0 - 1e-12);
        }

        #[test]
        fn loss_is_monotone(r in 0.0f64..3.0, e1 in 0.0f64..=1.0, e2 in 0.0f64..=1.0) {
            let (lo, hi) = if e1 < e2 { (e1, e2) } else { (e2, e1) };
            let s = GaussianQuadratureState::pure_squeezed(r, 0.0).unwrap();
            let a = apply_loss(&s, lo).unwrap();
            let b = apply_loss(&s, hi).unwrap();
            prop_assert!((a.v_min() - 1.0).abs() <= (b.v_min() - 1.0).abs() + 1e-15);
            prop_assert!((a.v_max() - 1.0).abs() <= (b.v_max() - 1.0).abs() + 1e-12);
        }

        #[test]
        fn jitter_contracts_ellipse(r in 0.0f64..3.0, eta in 0.0f64..=1.0, s1 in 0.0f64..2.0, s2 in 0.0f64..2.0) {
            let s = apply_loss(&GaussianQuadratureState::pure_squeezed(r, 0.3).unwrap(), eta).unwrap();
            let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
            let a = apply_phase_jitter(&s, lo).unwrap();
            let b = apply_phase_jitter(&s, hi).unwrap();
            prop_assert!(a.min_variance() >= s.v_min() - 1e-12);
            prop_assert!(a.max_variance() <= s.v_max() + 1e-12);
            prop_assert!(b.min_variance() >= a.min_variance() - 1e-12);
            let e = a.effective_state();
            prop_assert!(e.quadrature_variance(e.theta0()) * e.quadrature_variance(e.theta0() + FRAC_PI_2) >= 1.0 - 1e-12);
        }

        #[test]
        fn loss_only_inverts_forward_model(eta in 0.01f64..=1.0, r in 0.01f64..=3.0) {
            let o = forward_observation(r, eta, 0.0).unwrap();
            let fit = infer_loss_only(&o).unwrap();
            prop_assert!((fit.eta - eta).abs() < 1e-9, "eta {} vs {}", fit.eta, eta);
            prop_assert!((fit.r - r).abs() < 1e-9, "r {} vs {}", fit.r, r);
        }

        #[test]
        fn phase_noise_round_trip(eta in 0.2f64..=1.0, r in 0.05f64..2.5, sigma in 0.0f64..0.4) {
            let o = forward_observation(r, eta, sigma).unwrap();
            let fit = infer_phase_noise(&o, eta).unwrap();
            let back = forward_observation(fit.r, eta, fit.sigma).unwrap();
            prop_assert!((back.squeeze_db - o.squeeze_db).abs() < 1e-6);
            prop_assert!((back.antisqueeze_db - o.antisqueeze_db).abs() < 1e-6);
        }
    }
}
