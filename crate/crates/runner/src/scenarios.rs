//! Dataset generators for the temperature, tomography and spectrum studies.

use rayon::prelude::*;

use updown_core::cavity::{
    make_operating_point, scan_profile, sideband_comb_map, squeezing_spectrum, BranchSelection, CascadedMedium,
    CavityParams, OperatingPoint, ScanSettings, SweepDirection,
};
use updown_core::detection::{
    end_to_end_observe, end_to_end_state, observe_against_reference, simulate_tomography_trace, total_efficiency,
    LossBudget, TomographySettings, TomographyTrace,
};
use updown_core::gaussian::{
    apply_loss, infer_loss_only, infer_phase_noise, variance_to_db, GaussianQuadratureState, SqueezeObservation,
};
use updown_core::phase_matching::{
    find_conversion_extrema, peak_conversion, sinc, temperature_sweep, ExtremumKind, PhaseMatchModel,
    LOW_CONVERSION_LIMIT,
};
use updown_core::numerics::golden_max;
use updown_core::Error;

use crate::config::{Fig4Calibration, PowerMode, ScenarioConfig, ScenarioId};
use crate::output::{Cell, RunOutput, Table};
use crate::RunError;

pub const CONVERSION_COLUMNS: &[&str] = &["T_celsius", "delta_k", "shg_efficiency"];
pub const PROFILE_COLUMNS: &[&str] = &["detuning_rad", "p_circ_W", "p_trans_W"];
pub const SPECTRUM_COLUMNS: &[&str] = &["f_Hz", "vmin_dB", "vmax_dB", "theta_rad"];
pub const TRACE_COLUMNS: &[&str] = &["t_seconds", "theta_rad", "measured_dB"];
pub const EXTREMA_COLUMNS: &[&str] = &["kind", "order", "T_celsius"];
pub const ASYMMETRY_COLUMNS: &[&str] = &["T_celsius", "p_in_W", "asymmetry"];
pub const SUMMARY_COLUMNS: &[&str] = &["squeeze_dB", "antisqueeze_dB", "uncertainty_dB"];
pub const BUDGET_COLUMNS: &[&str] = &["factor", "value", "sigma"];
pub const FIG5_COLUMNS: &[&str] = &[
    "T_celsius",
    "input_power_W",
    "p_circ_W",
    "nl_phase_rad",
    "threshold_ratio",
    "squeeze_dB",
    "antisqueeze_dB",
    "shg_regime",
];

/// Runs the scenario named in the configuration.
pub fn run(config: &ScenarioConfig) -> Result<RunOutput, RunError> {
    config.validate()?;
    match config.scenario {
        ScenarioId::Fig3 => run_fig3(config),
        ScenarioId::Fig4 => run_fig4(config),
        ScenarioId::Fig5 => run_fig5(config),
        ScenarioId::Custom => run_custom(config),
    }
}

fn extrema_table(model: &PhaseMatchModel, t_lo: f64, t_hi: f64) -> Result<Table, RunError> {
    let mut t = Table::new("extrema", EXTREMA_COLUMNS);
    for e in find_conversion_extrema(model, t_lo, t_hi)? {
        let kind = match e.kind {
            ExtremumKind::Max => "max",
            ExtremumKind::Min => "min",
        };
        t.push(vec![kind.into(), e.order.into(), e.temperature.into()]);
    }
    Ok(t)
}

/// Conversion extrema of the configured crystal over the sweep range.
pub fn extrema(config: &ScenarioConfig) -> Result<Table, RunError> {
    let model = config.phase_match_model()?;
    let (lo, hi) = match &config.sweep {
        Some(s) => (s.start, s.stop),
        None => (model.t_pm - 50.0, model.t_pm + 50.0),
    };
    extrema_table(&model, lo, hi)
}

fn label(t: f64) -> String {
    format!("{t:.1}C")
}

/// Conversion curve, extrema, resonance profiles and the asymmetry table.
pub fn run_fig3(config: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let model = config.phase_match_model()?;
    let params = config.cavity_params()?;
    let kappa = config.crystal.as_ref().map_or(0.0, |c| c.kappa);
    let sweep = config.sweep.as_ref().ok_or_else(|| RunError::Usage("sweep missing".into()))?;
    let f3 = config.fig3.as_ref().ok_or_else(|| RunError::Usage("fig3 missing".into()))?;

    let mut conversion = Table::new("conversion", CONVERSION_COLUMNS);
    for p in temperature_sweep(&model, sweep.start, sweep.stop, sweep.points, f3.input_power_w, kappa)? {
        conversion.push(vec![p.temperature.into(), p.delta_k.into(), p.efficiency.into()]);
    }
    let extrema = extrema_table(&model, sweep.start, sweep.stop)?;

    let temperatures = if f3.profile_temperatures.is_empty() {
        let c = config.crystal.as_ref().expect("validated");
        vec![c.t_max_celsius, c.t_min1_celsius]
    } else {
        f3.profile_temperatures.clone()
    };
    let half_span = f3.scan_half_span_hwhm * std::f64::consts::PI / params.finesse();
    let scan = |direction| ScanSettings {
        probe_transmission: f3.probe_transmission,
        ..ScanSettings::symmetric(half_span, f3.scan_points, direction)
    };

    let jobs: Vec<(f64, SweepDirection)> = temperatures
        .iter()
        .flat_map(|&t| [(t, SweepDirection::Up), (t, SweepDirection::Down)])
        .collect();
    let profiles = jobs
        .par_iter()
        .map(|&(t, dir)| {
            let medium = CascadedMedium::new(model, kappa, t);
            let prof = scan_profile(&params, f3.input_power_w, &scan(dir), &medium)?;
            let tag = if dir == SweepDirection::Up { "up" } else { "down" };
            let mut table = Table::new(format!("profile_{}_{tag}", label(t)), PROFILE_COLUMNS);
            for i in 0..prof.detuning.len() {
                table.push(vec![prof.detuning[i].into(), prof.p_circ[i].into(), prof.p_trans[i].into()]);
            }
            Ok(table)
        })
        .collect::<Result<Vec<_>, Error>>()?;

    let cells: Vec<(f64, f64)> = temperatures
        .iter()
        .flat_map(|&t| f3.asymmetry_powers_w.iter().map(move |&p| (t, p)))
        .collect();
    let asym = cells
        .par_iter()
        .map(|&(t, p)| {
            let medium = CascadedMedium::new(model, kappa, t);
            scan_profile(&params, p, &scan(SweepDirection::Up), &medium).map(|prof| prof.asymmetry)
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut asymmetry = Table::new("asymmetry", ASYMMETRY_COLUMNS);
    for (&(t, p), a) in cells.iter().zip(asym) {
        asymmetry.push(vec![t.into(), p.into(), a.unwrap_or(f64::NAN).into()]);
    }

    let mut tables = vec![conversion, extrema];
    tables.extend(profiles);
    tables.push(asymmetry);
    Ok(RunOutput {
        scenario: ScenarioId::Fig3.to_string(),
        tables,
        solved: vec![
            ("t_pm_celsius".into(), model.t_pm.to_string()),
            ("dk_dt_per_m_per_k".into(), model.dk_dt.to_string()),
            ("fsr_hz".into(), params.fsr().to_string()),
            ("finesse".into(), params.finesse().to_string()),
        ],
    })
}

fn budget_table(budget: &LossBudget) -> Result<Table, RunError> {
    let mut t = Table::new("budget", BUDGET_COLUMNS);
    for (name, m) in budget.factors() {
        t.push(vec![name.into(), m.value.into(), m.sigma.into()]);
    }
    let total = total_efficiency(budget)?;
    t.push(vec!["total".into(), total.value.into(), total.sigma.into()]);
    Ok(t)
}

fn trace_table(name: &str, trace: &TomographyTrace) -> Table {
    let mut t = Table::new(name, TRACE_COLUMNS);
    for i in 0..trace.time.len() {
        t.push(vec![trace.time[i].into(), trace.theta[i].into(), trace.measured_db[i].into()]);
    }
    t
}

fn record_operating_point(solved: &mut Vec<(String, String)>, op: &OperatingPoint) {
    for (k, v) in [
        ("p_circ_w", op.p_circ),
        ("detuning_rad", op.detuning),
        ("nl_phase_rt_rad", op.nl_phase_rt),
        ("kerr_slope_rad_per_w", op.kerr_slope),
        ("extra_loss", op.extra_loss),
        ("epsilon_per_s", op.epsilon),
        ("delta_eff_per_s", op.delta_eff),
        ("gamma_coupler_per_s", op.gamma_coupler),
        ("gamma_loss_per_s", op.gamma_loss),
        ("threshold_ratio", op.threshold_ratio()),
    ] {
        solved.push((k.into(), v.to_string()));
    }
}

/// Vacuum-reference and squeezed tomography traces with their summary.
///
/// The reported levels are relative to the mean of the vacuum-reference
/// trace, which contains the dark noise, so dark noise acts as an extra
/// efficiency factor `1 / (1 + d)`. The calibrations fold this factor in
/// when solving for the hidden source.
pub fn run_fig4(config: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let budget = config.loss_budget()?;
    let settings = config.tomography_settings()?;
    let f4 = config.fig4.as_ref().ok_or_else(|| RunError::Usage("fig4 missing".into()))?;
    let theta0 = config.tomography.as_ref().map_or(0.0, |t| t.theta0_rad);
    let eta_dark = 1.0 / (1.0 + settings.dark_variance());
    let target = SqueezeObservation::new(f4.target_squeeze_db, f4.target_antisqueeze_db, 0.0)?;
    let mut solved = vec![
        ("calibration".to_string(), format!("{:?}", f4.calibration)),
        ("eta_dark".to_string(), eta_dark.to_string()),
    ];

    let state = match f4.calibration {
        Fig4Calibration::PhaseNoise => {
            let eta = total_efficiency(&budget)?.value;
            let fit = infer_phase_noise(&target, eta * eta_dark)?;
            solved.push(("eta_budget".into(), eta.to_string()));
            solved.push(("r".into(), fit.r.to_string()));
            solved.push(("sigma_rad".into(), fit.sigma.to_string()));
            let source = GaussianQuadratureState::pure_squeezed(fit.r, theta0)?;
            end_to_end_state(&source, &budget, fit.sigma)?
        }
        Fig4Calibration::LossOnly => {
            let fit = infer_loss_only(&target)?;
            let eta_optical = fit.eta / eta_dark;
            if eta_optical > 1.0 {
                return Err(Error::InconsistentObservation {
                    reason: format!("loss-only efficiency {} cannot absorb the dark-noise factor", fit.eta),
                    residual: eta_optical - 1.0,
                }
                .into());
            }
            solved.push(("eta_total".into(), fit.eta.to_string()));
            solved.push(("eta_optical".into(), eta_optical.to_string()));
            solved.push(("r".into(), fit.r.to_string()));
            let source = GaussianQuadratureState::pure_squeezed(fit.r, theta0)?;
            apply_loss(&source, eta_optical)?
        }
        Fig4Calibration::Model => {
            let params = config.cavity_params()?;
            let model = config.phase_match_model()?;
            let kappa = config.crystal.as_ref().map_or(0.0, |c| c.kappa);
            let medium = CascadedMedium::new(model, kappa, f4.temperature_celsius);
            let op = make_operating_point(&params, f4.input_power_w, &medium, config.branch_selection())?;
            let comb = sideband_comb_map(&params, config.sideband_frequency(f4.sideband_hz, f4.comb_index)?)?;
            let sp = squeezing_spectrum(&op, comb.omega)?;
            record_operating_point(&mut solved, &op);
            solved.push(("comb_index".into(), comb.index.to_string()));
            let source = GaussianQuadratureState::new(sp.v_min, sp.v_max, theta0)?;
            end_to_end_state(&source, &budget.downstream_of_cavity(), f4.phase_jitter_rad)?
        }
    };
    solved.push(("detected_vmin".into(), state.v_min().to_string()));
    solved.push(("detected_vmax".into(), state.v_max().to_string()));

    let squeezed_settings = TomographySettings {
        rng_seed: settings.rng_seed.wrapping_add(1),
        ..settings
    };
    let (vacuum, squeezed) = rayon::join(
        || simulate_tomography_trace(&GaussianQuadratureState::vacuum(), &settings),
        || simulate_tomography_trace(&state, &squeezed_settings),
    );
    let (vacuum, squeezed) = (vacuum?, squeezed?);
    let obs = observe_against_reference(&squeezed, &vacuum)?;
    let mut summary = Table::new("summary", SUMMARY_COLUMNS);
    summary.push(vec![obs.squeeze_db.into(), obs.antisqueeze_db.into(), obs.uncertainty_db.into()]);

    Ok(RunOutput {
        scenario: ScenarioId::Fig4.to_string(),
        tables: vec![
            trace_table("vacuum_trace", &vacuum),
            trace_table("squeezed_trace", &squeezed),
            summary,
            budget_table(&budget)?,
        ],
        solved,
    })
}

struct Fig5Point {
    temperature: f64,
    input_power: f64,
    op: Option<OperatingPoint>,
    obs: Option<SqueezeObservation>,
    shg_regime: bool,
}

/// Detected squeezing of the cavity output at one temperature and input power.
fn detected(
    params: &CavityParams,
    medium: &CascadedMedium,
    p_in: f64,
    omega: f64,
    selection: BranchSelection,
    budget: &LossBudget,
    sigma: f64,
) -> updown_core::Result<(OperatingPoint, SqueezeObservation)> {
    let op = make_operating_point(params, p_in, medium, selection)?;
    let sp = squeezing_spectrum(&op, omega)?;
    let source = GaussianQuadratureState::new(sp.v_min, sp.v_max, 0.0)?;
    Ok((op, end_to_end_observe(&source, budget, sigma)?))
}

/// Squeezing versus crystal temperature in the cascaded-Kerr model.
///
/// Inside the central conversion lobe the measured squeezing is dominated
/// by a mechanism this model does not include; such rows are flagged in
/// `shg_regime`. Points that fail to produce a below-threshold operating
/// point are reported as NaN.
pub fn run_fig5(config: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let model = config.phase_match_model()?;
    let params = config.cavity_params()?;
    let kappa = config.crystal.as_ref().map_or(0.0, |c| c.kappa);
    let budget = config.loss_budget()?.downstream_of_cavity();
    let sweep = config.sweep.as_ref().ok_or_else(|| RunError::Usage("sweep missing".into()))?;
    let f5 = config.fig5.as_ref().ok_or_else(|| RunError::Usage("fig5 missing".into()))?;
    let comb = sideband_comb_map(&params, config.sideband_frequency(f5.sideband_hz, f5.comb_index)?)?;
    let selection = config.branch_selection();
    let p_max = f5.input_power_w;

    let points: Vec<Fig5Point> = sweep
        .values()
        .par_iter()
        .map(|&t| {
            let medium = CascadedMedium::new(model, kappa, t);
            let eval = |p: f64| detected(&params, &medium, p, comb.omega, selection, &budget, f5.phase_jitter_rad);
            let p_in = match f5.power_mode {
                PowerMode::Fixed => p_max,
                PowerMode::Optimize => {
                    let score = |p: f64| eval(p).map_or(f64::NEG_INFINITY, |(_, o)| o.squeeze_db);
                    golden_max(score, 1e-3 * p_max, p_max, 1e-6 * p_max).0
                }
            };
            let s = sinc(model.half_phase(t));
            let result = eval(p_in).ok();
            Fig5Point {
                temperature: t,
                input_power: p_in,
                op: result.map(|r| r.0),
                obs: result.map(|r| r.1),
                shg_regime: s * s >= LOW_CONVERSION_LIMIT,
            }
        })
        .collect();

    let mut table = Table::new("squeezing_vs_temperature", FIG5_COLUMNS);
    for p in &points {
        let op = p.op.as_ref();
        let row: Vec<Cell> = vec![
            p.temperature.into(),
            p.input_power.into(),
            op.map_or(f64::NAN, |o| o.p_circ).into(),
            op.map_or(f64::NAN, |o| o.nl_phase_rt).into(),
            op.map_or(f64::NAN, |o| o.threshold_ratio()).into(),
            p.obs.map_or(f64::NAN, |o| o.squeeze_db).into(),
            p.obs.map_or(f64::NAN, |o| o.antisqueeze_db).into(),
            p.shg_regime.into(),
        ];
        table.push(row);
    }
    let peak = points
        .iter()
        .filter(|p| p.obs.is_some())
        .max_by(|a, b| {
            let sa = a.obs.map_or(f64::NEG_INFINITY, |o| o.squeeze_db);
            let sb = b.obs.map_or(f64::NEG_INFINITY, |o| o.squeeze_db);
            sa.total_cmp(&sb)
        });
    let mut solved = vec![
        ("comb_index".to_string(), comb.index.to_string()),
        ("comb_offset_rad_per_s".to_string(), comb.omega.to_string()),
        ("downstream_efficiency".to_string(), total_efficiency(&budget)?.value.to_string()),
        ("peak_conversion_per_w".to_string(), peak_conversion(1.0, kappa, model.length).to_string()),
    ];
    if let Some(p) = peak {
        solved.push(("peak_temperature_celsius".into(), p.temperature.to_string()));
        solved.push(("peak_squeeze_db".into(), p.obs.map_or(f64::NAN, |o| o.squeeze_db).to_string()));
    }
    Ok(RunOutput {
        scenario: ScenarioId::Fig5.to_string(),
        tables: vec![table],
        solved,
    })
}

/// Cavity output spectrum versus absolute sideband frequency, before any
/// detection loss.
pub fn run_custom(config: &ScenarioConfig) -> Result<RunOutput, RunError> {
    let model = config.phase_match_model()?;
    let params = config.cavity_params()?;
    let kappa = config.crystal.as_ref().map_or(0.0, |c| c.kappa);
    let sweep = config.sweep.as_ref().ok_or_else(|| RunError::Usage("sweep missing".into()))?;
    let c = config.custom.as_ref().ok_or_else(|| RunError::Usage("custom missing".into()))?;
    let medium = CascadedMedium::new(model, kappa, c.temperature_celsius);
    let op = make_operating_point(&params, c.input_power_w, &medium, config.branch_selection())?;
    let rows = sweep
        .values()
        .par_iter()
        .map(|&f| {
            let comb = sideband_comb_map(&params, f)?;
            let sp = squeezing_spectrum(&op, comb.omega)?;
            Ok(vec![
                f.into(),
                variance_to_db(sp.v_min)?.into(),
                variance_to_db(sp.v_max)?.into(),
                sp.theta_min.into(),
            ])
        })
        .collect::<Result<Vec<Vec<Cell>>, Error>>()?;
    let mut table = Table::new("spectrum", SPECTRUM_COLUMNS);
    rows.into_iter().for_each(|r| table.push(r));
    let mut solved = Vec::new();
    record_operating_point(&mut solved, &op);
    Ok(RunOutput {
        scenario: ScenarioId::Custom.to_string(),
        tables: vec![table],
        solved,
    })
}
