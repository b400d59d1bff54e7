use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use updown_runner::config::{parse_config, ScenarioConfig, ScenarioId};
use updown_runner::output::{write_run, Format};
use updown_runner::{infer, scenarios, ConfigError, RunError};

#[derive(Parser)]
#[command(name = "updown", version, about = "Cascaded up-down squeezing simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override the configured random seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Fig3,
    Fig4,
    Fig5,
    Custom,
}

impl From<ScenarioArg> for ScenarioId {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Fig3 => ScenarioId::Fig3,
            ScenarioArg::Fig4 => ScenarioId::Fig4,
            ScenarioArg::Fig5 => ScenarioId::Fig5,
            ScenarioArg::Custom => ScenarioId::Custom,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its tables and manifest.
    Run { scenario: ScenarioArg },
    /// Solve an inverse problem and print a JSON report.
    Infer {
        #[command(subcommand)]
        kind: InferKind,
    },
    /// Check a configuration file without running it.
    Validate { path: Option<PathBuf> },
    /// List conversion extrema of the configured crystal.
    Extrema,
}

#[derive(Subcommand)]
enum InferKind {
    /// Efficiency and squeeze parameter assuming loss is the only impairment.
    LossOnly {
        #[arg(long, allow_negative_numbers = true)]
        sqz: f64,
        #[arg(long, allow_negative_numbers = true)]
        antisqz: f64,
    },
    /// Squeeze parameter and RMS phase jitter at a known efficiency.
    PhaseNoise {
        #[arg(long, allow_negative_numbers = true)]
        sqz: f64,
        #[arg(long, allow_negative_numbers = true)]
        antisqz: f64,
        #[arg(long)]
        eta: f64,
    },
    /// Product of escape, mode-cleaner, residual-SHG and homodyne efficiencies.
    Budget {
        #[arg(num_args = 4, value_names = ["ESCAPE", "OMC", "SHG", "BHD"])]
        values: Vec<f64>,
        /// One-sigma uncertainties in the same order.
        #[arg(long, num_args = 4, value_delimiter = ',')]
        sigma: Option<Vec<f64>>,
        #[arg(long, default_value_t = 1.0)]
        visibility: f64,
        /// Apply visibility squared as a separate factor.
        #[arg(long)]
        visibility_separate: bool,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn read_text(path: &Path) -> Result<String, RunError> {
    std::fs::read_to_string(path).map_err(|source| {
        RunError::Config(ConfigError::Io {
            path: path.to_owned(),
            source,
        })
    })
}

fn load(cli: &Cli, fallback: ScenarioId) -> Result<(ScenarioConfig, String), RunError> {
    let text = match &cli.config {
        Some(path) => read_text(path)?,
        None => fallback
            .default_config()
            .ok_or_else(|| RunError::Usage(format!("scenario {fallback} needs --config")))?
            .to_owned(),
    };
    let mut config = parse_config(&text)?;
    config.validate()?;
    if let Some(seed) = cli.seed {
        config.rng_seed = seed;
    }
    Ok((config, text))
}

fn dispatch(cli: &Cli) -> Result<(), RunError> {
    match &cli.command {
        Command::Run { scenario } => {
            let id = ScenarioId::from(*scenario);
            let (config, text) = load(cli, id)?;
            if config.scenario != id {
                return Err(RunError::Usage(format!(
                    "configuration is for scenario {}, not {id}",
                    config.scenario
                )));
            }
            let output = scenarios::run(&config)?;
            let dir = cli
                .out
                .clone()
                .or_else(|| config.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out").join(id.as_str()));
            for path in write_run(&dir, cli.format, &output, &text, config.rng_seed)? {
                println!("{}", path.display());
            }
            Ok(())
        }
        Command::Infer { kind } => {
            let (name, json) = match kind {
                InferKind::LossOnly { sqz, antisqz } => ("loss-only", infer::to_json(&infer::loss_only(*sqz, *antisqz)?)?),
                InferKind::PhaseNoise { sqz, antisqz, eta } => {
                    ("phase-noise", infer::to_json(&infer::phase_noise(*sqz, *antisqz, *eta)?)?)
                }
                InferKind::Budget {
                    values,
                    sigma,
                    visibility,
                    visibility_separate,
                } => {
                    let v = [values[0], values[1], values[2], values[3]];
                    let s = match sigma {
                        Some(s) => [s[0], s[1], s[2], s[3]],
                        None => infer::DEFAULT_SIGMAS,
                    };
                    ("budget", infer::to_json(&infer::budget(v, s, *visibility, !visibility_separate)?)?)
                }
            };
            print!("{json}");
            if let Some(dir) = &cli.out {
                std::fs::create_dir_all(dir).map_err(|e| RunError::Output(format!("{}: {e}", dir.display())))?;
                let path = dir.join(format!("{name}.json"));
                std::fs::write(&path, &json).map_err(|e| RunError::Output(format!("{}: {e}", path.display())))?;
            }
            Ok(())
        }
        Command::Validate { path } => {
            let path = path
                .as_ref()
                .or(cli.config.as_ref())
                .ok_or_else(|| RunError::Usage("validate needs a configuration path".into()))?;
            let config = parse_config(&read_text(path)?)?;
            config.validate()?;
            println!("{}: ok (scenario {})", path.display(), config.scenario);
            Ok(())
        }
        Command::Extrema => {
            let (config, _) = load(cli, ScenarioId::Fig3)?;
            let table = scenarios::extrema(&config)?;
            match cli.format {
                Format::Csv => print!("{}", table.to_csv()?),
                Format::Json => print!("{}", table.to_json()?),
            }
            Ok(())
        }
    }
}
