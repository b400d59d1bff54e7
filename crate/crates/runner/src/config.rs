//! Scenario configuration: TOML schema, parsing and validation.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use updown_core::cavity::{BranchSelection, CavityParams};
use updown_core::detection::{LossBudget, Measured, ScanWaveform, TomographySettings, WaveShape};
use updown_core::phase_matching::{calibrate_from_extrema, PhaseMatchModel};

pub const FIG3_DEFAULT: &str = include_str!("../configs/fig3.toml");
pub const FIG4_DEFAULT: &str = include_str!("../configs/fig4.toml");
pub const FIG5_DEFAULT: &str = include_str!("../configs/fig5.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScenarioId {
    Fig3,
    Fig4,
    Fig5,
    Custom,
}

impl ScenarioId {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Fig3 => "fig3",
            Self::Fig4 => "fig4",
            Self::Fig5 => "fig5",
            Self::Custom => "custom",
        }
    }

    /// Shipped default configuration, if any.
    pub fn default_config(&self) -> Option<&'static str> {
        match self {
            Self::Fig3 => Some(FIG3_DEFAULT),
            Self::Fig4 => Some(FIG4_DEFAULT),
            Self::Fig5 => Some(FIG5_DEFAULT),
            Self::Custom => None,
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub scenario: ScenarioId,
    #[serde(default)]
    pub rng_seed: u64,
    pub output_dir: Option<PathBuf>,
    pub crystal: Option<CrystalSection>,
    pub cavity: Option<CavitySection>,
    pub budget: Option<BudgetSection>,
    pub tomography: Option<TomographySection>,
    pub sweep: Option<SweepSection>,
    pub fig3: Option<Fig3Section>,
    pub fig4: Option<Fig4Section>,
    pub fig5: Option<Fig5Section>,
    pub custom: Option<CustomSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalSection {
    pub length_m: f64,
    /// Temperature of the conversion maximum, degC.
    pub t_max_celsius: f64,
    /// Temperature of the first conversion minimum, degC.
    pub t_min1_celsius: f64,
    /// Lumped coupling, W^-1/2 m^-1.
    pub kappa: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LockMode {
    /// Length servo holds the total round-trip phase at zero.
    Resonant,
    /// Free-running at the configured detuning; the stable root must be unique.
    Detuned,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CavitySection {
    pub round_trip_length_m: f64,
    pub coupler_transmission: f64,
    /// Either this or `round_trip_loss` must be given.
    pub escape_efficiency: Option<f64>,
    pub round_trip_loss: Option<f64>,
    #[serde(default)]
    pub detuning_rad: f64,
    #[serde(default = "default_lock")]
    pub lock: LockMode,
    /// Detuned operation only: pick this steady-state root (ascending
    /// circulating power) instead of requiring a unique stable one.
    pub branch_index: Option<usize>,
}

fn default_lock() -> LockMode {
    LockMode::Resonant
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorSpec {
    pub value: f64,
    #[serde(default)]
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetSection {
    pub escape: FactorSpec,
    pub omc_transmission: FactorSpec,
    pub shg_residual: FactorSpec,
    pub bhd_efficiency: FactorSpec,
    #[serde(default = "one")]
    pub visibility: f64,
    #[serde(default = "yes")]
    pub visibility_in_bhd: bool,
    #[serde(default = "default_finesse")]
    pub omc_finesse: f64,
}

fn one() -> f64 {
    1.0
}

fn yes() -> bool {
    true
}

fn default_finesse() -> f64 {
    200.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ShapeSpec {
    Triangle,
    Sine,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TomographySection {
    pub lo_power_w: f64,
    pub rbw_hz: f64,
    pub vbw_hz: f64,
    /// Omit to disable dark noise.
    pub dark_db: Option<f64>,
    #[serde(default = "default_shape")]
    pub scan_shape: ShapeSpec,
    pub scan_period_s: f64,
    #[serde(default = "default_span")]
    pub scan_span_rad: f64,
    #[serde(default)]
    pub scan_offset_rad: f64,
    pub duration_s: f64,
    pub points: usize,
    /// Orientation of the squeezed quadrature, rad.
    #[serde(default)]
    pub theta0_rad: f64,
}

fn default_shape() -> ShapeSpec {
    ShapeSpec::Triangle
}

fn default_span() -> f64 {
    std::f64::consts::PI
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SweepParameter {
    Temperature,
    Frequency,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: SweepParameter,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl SweepSection {
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig3Section {
    /// Input power for the profile scans, W.
    pub input_power_w: f64,
    /// Temperatures at which resonance profiles are exported; defaults to
    /// the conversion maximum and first minimum.
    #[serde(default)]
    pub profile_temperatures: Vec<f64>,
    /// Input powers for the asymmetry-versus-power table, W.
    pub asymmetry_powers_w: Vec<f64>,
    /// Half span of the detuning scan in cavity linewidths (HWHM units).
    pub scan_half_span_hwhm: f64,
    pub scan_points: usize,
    #[serde(default = "default_probe")]
    pub probe_transmission: f64,
}

fn default_probe() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fig4Calibration {
    /// Budget efficiency fixed, squeezing and phase jitter solved from the target.
    PhaseNoise,
    /// No phase jitter, efficiency and squeezing solved from the target.
    LossOnly,
    /// Source spectrum from the cavity model.
    Model,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig4Section {
    pub calibration: Fig4Calibration,
    pub target_squeeze_db: f64,
    pub target_antisqueeze_db: f64,
    /// Sideband frequency for the model calibration; give either this or
    /// `comb_index`.
    pub sideband_hz: Option<f64>,
    pub comb_index: Option<u64>,
    pub input_power_w: f64,
    pub temperature_celsius: f64,
    #[serde(default)]
    pub phase_jitter_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PowerMode {
    /// Best squeezing over input powers up to `input_power_w`.
    Optimize,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Fig5Section {
    /// Give either this or `comb_index`.
    pub sideband_hz: Option<f64>,
    pub comb_index: Option<u64>,
    pub input_power_w: f64,
    pub power_mode: PowerMode,
    #[serde(default)]
    pub phase_jitter_rad: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSection {
    pub temperature_celsius: f64,
    pub input_power_w: f64,
}

/// One validation finding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Dotted path to the offending field, or `<parse>` for syntax errors.
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}", join(.0))]
    Invalid(Vec<Diagnostic>),
}

fn join(d: &[Diagnostic]) -> String {
    d.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n")
}

/// Parses TOML text; syntax and schema errors carry line and column.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    toml::from_str::<ScenarioConfig>(text).map_err(|e| {
        let location = e
            .span()
            .map(|span| {
                let (line, col) = line_col(text, span.start);
                format!("line {line}, column {col}")
            })
            .unwrap_or_else(|| "unknown location".into());
        ConfigError::Invalid(vec![Diagnostic {
            path: "<parse>".into(),
            message: format!("{location}: {}", e.message()),
        }])
    })
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

/// Reads, parses and validates a configuration file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    let config = parse_config(&text)?;
    config.validate()?;
    Ok(config)
}

struct Checker {
    found: Vec<Diagnostic>,
}

impl Checker {
    fn push(&mut self, path: &str, message: impl Into<String>) {
        self.found.push(Diagnostic {
            path: path.into(),
            message: message.into(),
        });
    }

    fn finite(&mut self, path: &str, v: f64) -> bool {
        if v.is_finite() {
            true
        } else {
            self.push(path, format!("must be finite, got {v}"));
            false
        }
    }

    fn positive(&mut self, path: &str, v: f64) {
        if self.finite(path, v) && v <= 0.0 {
            self.push(path, format!("must be > 0, got {v}"));
        }
    }

    fn non_negative(&mut self, path: &str, v: f64) {
        if self.finite(path, v) && v < 0.0 {
            self.push(path, format!("must be >= 0, got {v}"));
        }
    }

    fn open_unit(&mut self, path: &str, v: f64) {
        if self.finite(path, v) && !(v > 0.0 && v < 1.0) {
            self.push(path, format!("must lie in (0, 1), got {v}"));
        }
    }

    fn half_open_unit(&mut self, path: &str, v: f64) {
        if self.finite(path, v) && !(v > 0.0 && v <= 1.0) {
            self.push(path, format!("must lie in (0, 1], got {v}"));
        }
    }

    fn sideband(&mut self, section: &str, hz: Option<f64>, index: Option<u64>) {
        match (hz, index) {
            (Some(f), None) => self.non_negative(&format!("{section}.sideband_hz"), f),
            (None, Some(_)) => {}
            _ => self.push(
                &format!("{section}.sideband_hz"),
                "give exactly one of sideband_hz and comb_index",
            ),
        }
    }

    fn require<T>(&mut self, path: &str, section: &Option<T>, scenario: ScenarioId) {
        if section.is_none() {
            self.push(path, format!("section is required for scenario {scenario}"));
        }
    }
}

impl ScenarioConfig {
    /// Full schema and invariant validation; reports every problem found.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let mut c = Checker { found: Vec::new() };
        let id = self.scenario;
        match id {
            ScenarioId::Fig3 => {
                c.require("crystal", &self.crystal, id);
                c.require("cavity", &self.cavity, id);
                c.require("sweep", &self.sweep, id);
                c.require("fig3", &self.fig3, id);
            }
            ScenarioId::Fig4 => {
                c.require("budget", &self.budget, id);
                c.require("tomography", &self.tomography, id);
                c.require("fig4", &self.fig4, id);
                if let Some(f) = &self.fig4 {
                    if f.calibration == Fig4Calibration::Model {
                        c.require("crystal", &self.crystal, id);
                        c.require("cavity", &self.cavity, id);
                    }
                }
            }
            ScenarioId::Fig5 => {
                c.require("crystal", &self.crystal, id);
                c.require("cavity", &self.cavity, id);
                c.require("budget", &self.budget, id);
                c.require("sweep", &self.sweep, id);
                c.require("fig5", &self.fig5, id);
            }
            ScenarioId::Custom => {
                c.require("crystal", &self.crystal, id);
                c.require("cavity", &self.cavity, id);
                c.require("sweep", &self.sweep, id);
                c.require("custom", &self.custom, id);
            }
        }
        if let Some(s) = &self.crystal {
            c.positive("crystal.length_m", s.length_m);
            c.positive("crystal.kappa", s.kappa);
            c.finite("crystal.t_max_celsius", s.t_max_celsius);
            if c.finite("crystal.t_min1_celsius", s.t_min1_celsius) && s.t_min1_celsius == s.t_max_celsius {
                c.push("crystal.t_min1_celsius", "must differ from crystal.t_max_celsius");
            }
        }
        if let Some(s) = &self.cavity {
            c.positive("cavity.round_trip_length_m", s.round_trip_length_m);
            c.open_unit("cavity.coupler_transmission", s.coupler_transmission);
            c.finite("cavity.detuning_rad", s.detuning_rad);
            if s.branch_index.is_some() && s.lock != LockMode::Detuned {
                c.push("cavity.branch_index", "only meaningful with lock = \"detuned\"");
            }
            match (s.escape_efficiency, s.round_trip_loss) {
                (Some(e), None) => c.half_open_unit("cavity.escape_efficiency", e),
                (None, Some(l)) => {
                    if c.finite("cavity.round_trip_loss", l) && !(0.0..1.0).contains(&l) {
                        c.push("cavity.round_trip_loss", format!("must lie in [0, 1), got {l}"));
                    }
                }
                (Some(_), Some(_)) => c.push(
                    "cavity.escape_efficiency",
                    "give either escape_efficiency or round_trip_loss, not both",
                ),
                (None, None) => c.push("cavity.escape_efficiency", "escape_efficiency or round_trip_loss is required"),
            }
        }
        if let Some(b) = &self.budget {
            for (name, f) in [
                ("escape", b.escape),
                ("omc_transmission", b.omc_transmission),
                ("shg_residual", b.shg_residual),
                ("bhd_efficiency", b.bhd_efficiency),
            ] {
                c.half_open_unit(&format!("budget.{name}.value"), f.value);
                c.non_negative(&format!("budget.{name}.sigma"), f.sigma);
            }
            c.half_open_unit("budget.visibility", b.visibility);
            c.positive("budget.omc_finesse", b.omc_finesse);
        }
        if let Some(t) = &self.tomography {
            c.non_negative("tomography.lo_power_w", t.lo_power_w);
            c.positive("tomography.vbw_hz", t.vbw_hz);
            if c.finite("tomography.rbw_hz", t.rbw_hz) && !(t.rbw_hz > t.vbw_hz) {
                c.push("tomography.rbw_hz", format!("must exceed vbw_hz ({}), got {}", t.vbw_hz, t.rbw_hz));
            }
            if let Some(d) = t.dark_db {
                c.finite("tomography.dark_db", d);
            }
            c.positive("tomography.scan_period_s", t.scan_period_s);
            c.finite("tomography.scan_span_rad", t.scan_span_rad);
            c.finite("tomography.scan_offset_rad", t.scan_offset_rad);
            c.finite("tomography.theta0_rad", t.theta0_rad);
            c.positive("tomography.duration_s", t.duration_s);
            if t.points < 4 {
                c.push("tomography.points", format!("must be >= 4, got {}", t.points));
            }
        }
        if let Some(s) = &self.sweep {
            let ok = c.finite("sweep.start", s.start) & c.finite("sweep.stop", s.stop);
            if ok && !(s.stop > s.start) {
                c.push("sweep.stop", format!("must exceed sweep.start ({}), got {}", s.start, s.stop));
            }
            if s.points < 2 {
                c.push("sweep.points", format!("must be >= 2, got {}", s.points));
            }
            let wanted = match id {
                ScenarioId::Fig3 | ScenarioId::Fig5 => Some(SweepParameter::Temperature),
                ScenarioId::Custom => Some(SweepParameter::Frequency),
                ScenarioId::Fig4 => None,
            };
            if let Some(w) = wanted {
                if s.parameter != w {
                    c.push("sweep.parameter", format!("scenario {id} sweeps {w:?}").to_lowercase());
                }
            }
            if s.parameter == SweepParameter::Frequency && ok && s.start < 0.0 {
                c.push("sweep.start", "frequencies must be >= 0");
            }
        }
        if let Some(f) = &self.fig3 {
            c.positive("fig3.input_power_w", f.input_power_w);
            for (i, p) in f.asymmetry_powers_w.iter().enumerate() {
                c.positive(&format!("fig3.asymmetry_powers_w[{i}]"), *p);
            }
            for (i, t) in f.profile_temperatures.iter().enumerate() {
                c.finite(&format!("fig3.profile_temperatures[{i}]"), *t);
            }
            c.positive("fig3.scan_half_span_hwhm", f.scan_half_span_hwhm);
            if f.scan_points < 16 {
                c.push("fig3.scan_points", format!("must be >= 16, got {}", f.scan_points));
            }
            c.open_unit("fig3.probe_transmission", f.probe_transmission);
        }
        if let Some(f) = &self.fig4 {
            c.non_negative("fig4.target_squeeze_db", f.target_squeeze_db);
            c.finite("fig4.target_antisqueeze_db", f.target_antisqueeze_db);
            c.sideband("fig4", f.sideband_hz, f.comb_index);
            c.non_negative("fig4.input_power_w", f.input_power_w);
            c.finite("fig4.temperature_celsius", f.temperature_celsius);
            c.non_negative("fig4.phase_jitter_rad", f.phase_jitter_rad);
        }
        if let Some(f) = &self.fig5 {
            c.sideband("fig5", f.sideband_hz, f.comb_index);
            c.positive("fig5.input_power_w", f.input_power_w);
            c.non_negative("fig5.phase_jitter_rad", f.phase_jitter_rad);
        }
        if let Some(f) = &self.custom {
            c.finite("custom.temperature_celsius", f.temperature_celsius);
            c.non_negative("custom.input_power_w", f.input_power_w);
        }
        if c.found.is_empty() {
            Ok(())
        } else {
            Err(ConfigError::Invalid(c.found))
        }
    }

    pub fn phase_match_model(&self) -> updown_core::Result<PhaseMatchModel> {
        let s = self.section(&self.crystal, "crystal")?;
        calibrate_from_extrema(s.t_max_celsius, s.t_min1_celsius, s.length_m)
    }

    pub fn cavity_params(&self) -> updown_core::Result<CavityParams> {
        let s = self.section(&self.cavity, "cavity")?;
        match (s.escape_efficiency, s.round_trip_loss) {
            (Some(e), _) => CavityParams::from_escape_efficiency(s.round_trip_length_m, s.coupler_transmission, e, s.detuning_rad),
            (None, l) => CavityParams::new(
                s.round_trip_length_m,
                s.coupler_transmission,
                l.unwrap_or(0.0),
                s.detuning_rad,
            ),
        }
    }

    pub fn branch_selection(&self) -> BranchSelection {
        match self.cavity.as_ref() {
            Some(c) if c.lock == LockMode::Detuned => match c.branch_index {
                Some(i) => BranchSelection::Index(i),
                None => BranchSelection::UniqueStable,
            },
            _ => BranchSelection::Resonant,
        }
    }

    pub fn loss_budget(&self) -> updown_core::Result<LossBudget> {
        let b = self.section(&self.budget, "budget")?;
        let m = |f: FactorSpec| Measured::new(f.value, f.sigma);
        let budget = LossBudget {
            escape: m(b.escape),
            omc_transmission: m(b.omc_transmission),
            shg_residual: m(b.shg_residual),
            bhd_efficiency: m(b.bhd_efficiency),
            visibility: b.visibility,
            visibility_in_bhd: b.visibility_in_bhd,
        };
        budget.validate()?;
        Ok(budget)
    }

    /// Tomography settings with the run seed applied.
    pub fn tomography_settings(&self) -> updown_core::Result<TomographySettings> {
        let t = self.section(&self.tomography, "tomography")?;
        let shape = match t.scan_shape {
            ShapeSpec::Triangle => WaveShape::Triangle,
            ShapeSpec::Sine => WaveShape::Sine,
            ShapeSpec::Constant => WaveShape::Constant,
        };
        let s = TomographySettings {
            lo_power: t.lo_power_w,
            rbw: t.rbw_hz,
            vbw: t.vbw_hz,
            dark_db: t.dark_db,
            scan: ScanWaveform {
                shape,
                period: t.scan_period_s,
                span: t.scan_span_rad,
                offset: t.scan_offset_rad,
            },
            duration: t.duration_s,
            points: t.points,
            rng_seed: self.rng_seed,
        };
        s.validate()?;
        Ok(s)
    }

    /// Absolute sideband frequency, Hz; a comb index maps to `index * FSR`.
    pub fn sideband_frequency(&self, hz: Option<f64>, index: Option<u64>) -> updown_core::Result<f64> {
        match (hz, index) {
            (Some(f), _) => Ok(f),
            (None, Some(n)) => Ok(n as f64 * self.cavity_params()?.fsr()),
            (None, None) => Err(updown_core::Error::Domain("no sideband frequency given".into())),
        }
    }

    fn section<'a, T>(&self, s: &'a Option<T>, name: &str) -> updown_core::Result<&'a T> {
        s.as_ref()
            .ok_or_else(|| updown_core::Error::Domain(format!("{name} section missing")))
    }
}
