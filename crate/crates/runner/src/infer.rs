//! Inference reports: loss-only, phase-noise and efficiency budget.

use serde::Serialize;

use updown_core::detection::{total_efficiency, LossBudget, Measured};
use updown_core::gaussian::{infer_loss_only, infer_phase_noise, SqueezeObservation};

use crate::RunError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossOnlyReport {
    pub kind: &'static str,
    pub squeeze_db: f64,
    pub antisqueeze_db: f64,
    pub eta: f64,
    pub r: f64,
    /// Squeezing of the hidden pure source, dB.
    pub source_squeeze_db: f64,
}

pub fn loss_only(squeeze_db: f64, antisqueeze_db: f64) -> Result<LossOnlyReport, RunError> {
    let obs = SqueezeObservation::new(squeeze_db, antisqueeze_db, 0.0)?;
    let fit = infer_loss_only(&obs)?;
    Ok(LossOnlyReport {
        kind: "loss-only",
        squeeze_db,
        antisqueeze_db,
        eta: fit.eta,
        r: fit.r,
        source_squeeze_db: 20.0 * fit.r * std::f64::consts::LOG10_E,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseNoiseReport {
    pub kind: &'static str,
    pub squeeze_db: f64,
    pub antisqueeze_db: f64,
    pub eta: f64,
    pub r: f64,
    pub sigma_rad: f64,
}

pub fn phase_noise(squeeze_db: f64, antisqueeze_db: f64, eta: f64) -> Result<PhaseNoiseReport, RunError> {
    let obs = SqueezeObservation::new(squeeze_db, antisqueeze_db, 0.0)?;
    let fit = infer_phase_noise(&obs, eta)?;
    Ok(PhaseNoiseReport {
        kind: "phase-noise",
        squeeze_db,
        antisqueeze_db,
        eta,
        r: fit.r,
        sigma_rad: fit.sigma,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FactorReport {
    pub name: &'static str,
    pub value: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BudgetReport {
    pub kind: &'static str,
    pub factors: Vec<FactorReport>,
    pub total: f64,
    pub total_sigma: f64,
}

/// Default one-sigma uncertainties of the four chain factors.
pub const DEFAULT_SIGMAS: [f64; 4] = [0.02, 0.01, 0.01, 0.04];

/// `values` and `sigmas` are ordered escape, mode-cleaner, residual SHG,
/// homodyne.
pub fn budget(
    values: [f64; 4],
    sigmas: [f64; 4],
    visibility: f64,
    visibility_in_bhd: bool,
) -> Result<BudgetReport, RunError> {
    let b = LossBudget {
        escape: Measured::new(values[0], sigmas[0]),
        omc_transmission: Measured::new(values[1], sigmas[1]),
        shg_residual: Measured::new(values[2], sigmas[2]),
        bhd_efficiency: Measured::new(values[3], sigmas[3]),
        visibility,
        visibility_in_bhd,
    };
    let total = total_efficiency(&b)?;
    Ok(BudgetReport {
        kind: "budget",
        factors: b
            .factors()
            .into_iter()
            .map(|(name, m)| FactorReport {
                name,
                value: m.value,
                sigma: m.sigma,
            })
            .collect(),
        total: total.value,
        total_sigma: total.sigma,
    })
}

pub fn to_json<T: Serialize>(report: &T) -> Result<String, RunError> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| RunError::Output(e.to_string()))?;
    s.push('\n');
    Ok(s)
}
