//! Everything between the resonator output and the recorded noise trace:
//! the output mode-cleaner, the efficiency budget, and zero-span homodyne
//! tomography.

use std::f64::consts::{PI, TAU};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{domain, Result};
use crate::gaussian::{apply_loss, apply_phase_jitter, GaussianQuadratureState, SqueezeObservation};

/// A value with a one-sigma uncertainty.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measured {
    pub value: f64,
    pub sigma: f64,
}

impl Measured {
    pub const fn new(value: f64, sigma: f64) -> Self {
        Self { value, sigma }
    }

    pub const fn exact(value: f64) -> Self {
        Self { value, sigma: 0.0 }
    }
}

/// Power reflected by a lossless, impedance-matched two-mirror filter cavity
/// toward the homodyne detector.
///
/// The filter's FSR is twice `fsr_sqz` and the carrier sits on one of its
/// resonances, so the carrier and even comb lines are transmitted (removed)
/// and odd comb lines are reflected (kept).
pub fn omc_sideband_transfer(fsr_sqz: f64, omc_finesse: f64, f: f64) -> f64 {
    let coefficient = (2.0 * omc_finesse / PI).powi(2);
    let s = (PI * f / (2.0 * fsr_sqz)).sin();
    let x = coefficient * s * s;
    x / (1.0 + x)
}

/// Ordered chain of detection efficiencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossBudget {
    pub escape: Measured,
    pub omc_transmission: Measured,
    pub shg_residual: Measured,
    pub bhd_efficiency: Measured,
    /// Homodyne fringe visibility.
    pub visibility: f64,
    /// Whether `bhd_efficiency` already contains the visibility-squared
    /// mode-matching factor.
    pub visibility_in_bhd: bool,
}

impl LossBudget {
    /// All factors equal to one.
    pub fn lossless() -> Self {
        Self {
            escape: Measured::exact(1.0),
            omc_transmission: Measured::exact(1.0),
            shg_residual: Measured::exact(1.0),
            bhd_efficiency: Measured::exact(1.0),
            visibility: 1.0,
            visibility_in_bhd: true,
        }
    }

    /// Budget without the escape factor, for sources whose spectrum
    /// already includes the intracavity loss.
    pub fn downstream_of_cavity(&self) -> Self {
        Self {
            escape: Measured::exact(1.0),
            ..*self
        }
    }

    /// Named factors in chain order, visibility last.
    pub fn factors(&self) -> Vec<(&'static str, Measured)> {
        let mut out = vec![
            ("escape", self.escape),
            ("omc_transmission", self.omc_transmission),
            ("shg_residual", self.shg_residual),
            ("bhd_efficiency", self.bhd_efficiency),
        ];
        if !self.visibility_in_bhd {
            out.push(("visibility_squared", Measured::exact(self.visibility * self.visibility)));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        for (name, m) in self.factors() {
            if !(m.value > 0.0 && m.value <= 1.0) {
                return domain(format!("{name} must lie in (0, 1], got {}", m.value));
            }
            if !(m.sigma >= 0.0 && m.sigma.is_finite()) {
                return domain(format!("{name} uncertainty must be finite and >= 0"));
            }
        }
        if !(self.visibility > 0.0 && self.visibility <= 1.0) {
            return domain(format!("visibility must lie in (0, 1], got {}", self.visibility));
        }
        Ok(())
    }
}

/// Product of the budget factors; relative uncertainties add in quadrature.
pub fn total_efficiency(budget: &LossBudget) -> Result<Measured> {
    budget.validate()?;
    let factors = budget.factors();
    let value: f64 = factors.iter().map(|(_, m)| m.value).product();
    let rel: f64 = factors.iter().map(|(_, m)| (m.sigma / m.value).powi(2)).sum::<f64>().sqrt();
    Ok(Measured::new(value, value * rel))
}

/// Loss first, then phase jitter; the two commute on variances, but the
/// order is kept fixed for clarity.
pub fn end_to_end_state(
    source: &GaussianQuadratureState,
    budget: &LossBudget,
    sigma_phase: f64,
) -> Result<GaussianQuadratureState> {
    let eta = total_efficiency(budget)?.value;
    let lossy = apply_loss(source, eta)?;
    Ok(apply_phase_jitter(&lossy, sigma_phase)?.effective_state())
}

pub fn end_to_end_observe(
    source: &GaussianQuadratureState,
    budget: &LossBudget,
    sigma_phase: f64,
) -> Result<SqueezeObservation> {
    Ok(end_to_end_state(source, budget, sigma_phase)?.observation())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WaveShape {
    Triangle,
    Sine,
    /// Homodyne angle held at the offset.
    Constant,
}

/// Homodyne angle versus time: `offset + span * w(t / period)` with `w`
/// running 0 -> 1 -> 0 once per period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanWaveform {
    pub shape: WaveShape,
    /// Seconds.
    pub period: f64,
    /// Radians.
    pub span: f64,
    /// Radians.
    pub offset: f64,
}

impl ScanWaveform {
    pub fn angle(&self, t: f64) -> f64 {
        let u = (t / self.period).rem_euclid(1.0);
        let w = match self.shape {
            WaveShape::Triangle => 1.0 - (2.0 * u - 1.0).abs(),
            WaveShape::Sine => 0.5 * (1.0 - (TAU * u).cos()),
            WaveShape::Constant => 0.0,
        };
        self.offset + self.span * w
    }
}

/// Spectrum-analyzer zero-span acquisition settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomographySettings {
    /// Local-oscillator power, W. Recorded for provenance; the trace is
    /// normalized to vacuum so it does not enter the statistics.
    pub lo_power: f64,
    /// Resolution bandwidth, Hz.
    pub rbw: f64,
    /// Video bandwidth, Hz.
    pub vbw: f64,
    /// Electronic dark noise relative to vacuum noise, dB; `None` disables it.
    pub dark_db: Option<f64>,
    pub scan: ScanWaveform,
    /// Sweep time, s.
    pub duration: f64,
    /// Displayed points.
    pub points: usize,
    pub rng_seed: u64,
}

impl TomographySettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.vbw > 0.0 && self.rbw > self.vbw) {
            return domain(format!(
                "bandwidths must satisfy rbw > vbw > 0, got rbw {} vbw {}",
                self.rbw, self.vbw
            ));
        }
        if !(self.duration > 0.0) {
            return domain("duration must be positive");
        }
        if self.points < 2 {
            return domain("a trace needs at least two points");
        }
        if !(self.scan.period > 0.0 && self.scan.span.is_finite() && self.scan.offset.is_finite()) {
            return domain("scan waveform needs a positive period and finite angles");
        }
        if !(self.lo_power >= 0.0) {
            return domain("local-oscillator power must be >= 0");
        }
        if let Some(d) = self.dark_db {
            if !d.is_finite() {
                return domain("dark noise level must be finite");
            }
        }
        Ok(())
    }

    /// Independent variance samples averaged into each displayed point.
    pub fn effective_averages(&self) -> f64 {
        self.rbw / self.vbw
    }

    /// Dark-noise variance relative to vacuum.
    pub fn dark_variance(&self) -> f64 {
        self.dark_db.map_or(0.0, |d| 10f64.powf(d / 10.0))
    }
}

/// Recorded zero-span trace; `measured_db` is relative to pure vacuum noise
/// and includes dark noise when enabled.
#[derive(Debug, Clone, PartialEq)]
pub struct TomographyTrace {
    pub time: Vec<f64>,
    pub theta: Vec<f64>,
    pub measured_db: Vec<f64>,
}

impl TomographyTrace {
    pub fn linear(&self) -> Vec<f64> {
        self.measured_db.iter().map(|db| 10f64.powf(db / 10.0)).collect()
    }
}

/// Synthesizes a zero-span trace of `state` while the homodyne angle is
/// scanned. Each point carries multiplicative estimator noise of relative
/// size `1 / sqrt(rbw / vbw)`.
pub fn simulate_tomography_trace(
    state: &GaussianQuadratureState,
    settings: &TomographySettings,
) -> Result<TomographyTrace> {
    settings.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(settings.rng_seed);
    let rel = 1.0 / settings.effective_averages().sqrt();
    let dark = settings.dark_variance();
    let n = settings.points;
    let mut trace = TomographyTrace {
        time: Vec::with_capacity(n),
        theta: Vec::with_capacity(n),
        measured_db: Vec::with_capacity(n),
    };
    for i in 0..n {
        let t = settings.duration * i as f64 / (n - 1) as f64;
        let theta = settings.scan.angle(t);
        let xi: f64 = StandardNormal.sample(&mut rng);
        let v = (state.quadrature_variance(theta) + dark) * (1.0 + rel * xi);
        trace.time.push(t);
        trace.theta.push(theta);
        trace.measured_db.push(10.0 * v.max(1e-12).log10());
    }
    Ok(trace)
}

/// Trace with the dark-noise floor removed, for the optional subtracted view.
pub fn subtract_dark(trace: &TomographyTrace, settings: &TomographySettings) -> TomographyTrace {
    let dark = settings.dark_variance();
    TomographyTrace {
        measured_db: trace
            .measured_db
            .iter()
            .map(|db| 10.0 * (10f64.powf(db / 10.0) - dark).max(1e-12).log10())
            .collect(),
        ..trace.clone()
    }
}

/// Least-squares fit of `a + b cos 2theta + c sin 2theta` to a trace, in
/// linear variance units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureFit {
    pub mean: f64,
    pub amplitude: f64,
    pub theta_min: f64,
    /// Standard error of `mean` and of `amplitude` (same to first order).
    pub std_error: f64,
}

impl QuadratureFit {
    pub fn v_min(&self) -> f64 {
        self.mean - self.amplitude
    }

    pub fn v_max(&self) -> f64 {
        self.mean + self.amplitude
    }
}

pub fn fit_quadrature_trace(trace: &TomographyTrace) -> Result<QuadratureFit> {
    let y = trace.linear();
    let n = y.len();
    if n < 4 {
        return domain("need at least four points to fit a quadrature scan");
    }
    let rows: Vec<[f64; 3]> = trace
        .theta
        .iter()
        .map(|th| [1.0, (2.0 * th).cos(), (2.0 * th).sin()])
        .collect();
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (row, &yi) in rows.iter().zip(&y) {
        for i in 0..3 {
            aty[i] += row[i] * yi;
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
        }
    }
    let mean_only = |y: &[f64]| {
        let m = y.iter().sum::<f64>() / n as f64;
        let var = y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1) as f64;
        QuadratureFit {
            mean: m,
            amplitude: 0.0,
            theta_min: 0.0,
            std_error: (var / n as f64).sqrt(),
        }
    };
    let Some(coef) = solve3(ata, aty) else {
        return Ok(mean_only(&y));
    };
    let residual: f64 = rows
        .iter()
        .zip(&y)
        .map(|(r, yi)| (yi - (coef[0] * r[0] + coef[1] * r[1] + coef[2] * r[2])).powi(2))
        .sum();
    let s2 = residual / (n - 3) as f64;
    // amplitude sqrt(b^2 + c^2) with b, c equally well determined for a
    // uniformly scanned angle; its error is close to that of `a` times sqrt 2.
    let se = (s2 * 2.0 / n as f64).sqrt();
    let amplitude = coef[1].hypot(coef[2]);
    let theta_max = 0.5 * coef[2].atan2(coef[1]);
    Ok(QuadratureFit {
        mean: coef[0],
        amplitude,
        theta_min: (theta_max - 0.5 * PI).rem_euclid(PI),
        std_error: se,
    })
}

/// Gaussian elimination with partial pivoting; `None` when singular.
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for col in 0..3 {
        let pivot = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() <= 1e-10 * scale {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let tail: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    Some(x)
}

/// Squeeze and anti-squeeze of a scanned trace relative to the mean level of
/// a vacuum reference trace recorded with the same settings, as one reads
/// them off a zero-span measurement.
pub fn observe_against_reference(
    squeezed: &TomographyTrace,
    reference: &TomographyTrace,
) -> Result<SqueezeObservation> {
    let fit = fit_quadrature_trace(squeezed)?;
    let vac = reference.linear();
    if vac.len() < 2 {
        return domain("reference trace is too short");
    }
    let ref_mean = vac.iter().sum::<f64>() / vac.len() as f64;
    let ref_var = vac.iter().map(|v| (v - ref_mean).powi(2)).sum::<f64>() / (vac.len() - 1) as f64;
    let ref_se = (ref_var / vac.len() as f64).sqrt();
    if !(fit.v_min() > 0.0 && ref_mean > 0.0) {
        return domain("fitted minimum variance is not positive");
    }
    let db = 10.0 / std::f64::consts::LN_10;
    let uncertainty = db
        * ((fit.std_error / fit.v_min()).powi(2) + (ref_se / ref_mean).powi(2)).sqrt();
    SqueezeObservation::new(
        10.0 * (ref_mean / fit.v_min()).log10(),
        10.0 * (fit.v_max() / ref_mean).log10(),
        uncertainty,
    )
}
