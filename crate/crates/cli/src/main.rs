use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gaussentangle_cli::report::{first_cp_failure, sweep_report};
use gaussentangle_cli::sweep::RK4_S_TOLERANCE;
use gaussentangle_cli::{
    load_config, rk4_discrepancy, run_asymptote, run_esd, run_sweep, run_validate, write_csv, CliError, ConfigError,
    OutputFormat, ScenarioConfig,
};

#[derive(Parser)]
#[command(
    name = "gaussentangle",
    version,
    about = "Two-mode Gaussian entanglement in a thermal bath"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trajectory at a single temperature.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        /// Temperature to use instead of the first configured one.
        #[arg(long = "temp")]
        temperature: Option<f64>,
    },
    /// Surface over the time grid and every temperature.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: Grid,
        /// Cross-check S against an RK4 integration.
        #[arg(long)]
        rk4_check: bool,
        /// RK4 step.
        #[arg(long)]
        dt: Option<f64>,
    },
    /// Entanglement-sudden-death time per temperature.
    Esd {
        #[command(flatten)]
        common: Common,
        /// Search horizon.
        #[arg(long)]
        t_max: Option<f64>,
        /// Bisection tolerance.
        #[arg(long)]
        tol: Option<f64>,
        /// List every crossing, not only the first.
        #[arg(long)]
        all_crossings: bool,
    },
    /// Steady state and asymptotic entanglement measures.
    Asymptote {
        #[command(flatten)]
        common: Common,
    },
    /// Complete-positivity check of the diffusion matrix.
    Validate {
        #[command(flatten)]
        common: Common,
        /// Also require the full coefficient matrix to be positive semi-definite.
        #[arg(long)]
        strict: bool,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output file; defaults to the configured path, then stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated temperatures replacing the configured list.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    temps: Option<Vec<f64>>,
    #[arg(long, allow_negative_numbers = true)]
    lambda: Option<f64>,
}

#[derive(Args)]
struct Grid {
    #[arg(long, allow_negative_numbers = true)]
    t_max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig, CliError> {
        let mut cfg = load_config(&self.config)?;
        if let Some(temps) = &self.temps {
            cfg.temperatures = temps.clone();
        }
        if let Some(lambda) = self.lambda {
            cfg.lambda = lambda;
        }
        Ok(cfg)
    }

    fn destination(&self, cfg: &ScenarioConfig) -> Option<PathBuf> {
        self.out
            .clone()
            .or_else(|| cfg.output.as_ref().and_then(|o| o.path.clone()))
    }
}

impl Grid {
    fn apply(&self, cfg: &mut ScenarioConfig) {
        if let Some(t) = self.t_max {
            cfg.t_max = t;
        }
        if let Some(n) = self.steps {
            cfg.steps = n;
        }
    }
}

fn checked(cfg: ScenarioConfig) -> Result<ScenarioConfig, CliError> {
    cfg.validate().map_err(|e| ConfigError { line: None, ..e })?;
    Ok(cfg)
}

fn emit(dest: Option<&Path>, write: impl FnOnce(&mut dyn Write) -> io::Result<()>) -> Result<(), CliError> {
    let io_err = |source| CliError::Io {
        path: dest.map_or("<stdout>".into(), |p| p.display().to_string()),
        source,
    };
    match dest {
        Some(path) => {
            let mut out = BufWriter::new(File::create(path).map_err(io_err)?);
            write(&mut out).and_then(|_| out.flush()).map_err(io_err)
        }
        None => {
            let stdout = io::stdout();
            let mut out = stdout.lock();
            write(&mut out).map_err(io_err)
        }
    }
}

fn emit_records(common: &Common, cfg: &ScenarioConfig) -> Result<(), CliError> {
    let records = run_sweep(cfg)?;
    let format = cfg.output.as_ref().map(|o| o.format).unwrap_or_default();
    let dest = common.destination(cfg);
    match format {
        OutputFormat::Csv => emit(dest.as_deref(), |w| write_csv(&records, w)),
        OutputFormat::Json => {
            let text = sweep_report(cfg, records).to_json();
            emit(dest.as_deref(), |w| w.write_all(text.as_bytes()))
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Evolve {
            common,
            grid,
            temperature,
        } => {
            let mut cfg = common.load()?;
            grid.apply(&mut cfg);
            let temp = temperature.unwrap_or(cfg.temperatures[0]);
            cfg.temperatures = vec![temp];
            let cfg = checked(cfg)?;
            emit_records(&common, &cfg)
        }
        Command::Sweep {
            common,
            grid,
            rk4_check,
            dt,
        } => {
            let mut cfg = common.load()?;
            grid.apply(&mut cfg);
            cfg.rk4_check |= rk4_check;
            if let Some(dt) = dt {
                cfg.rk4_dt = dt;
            }
            let cfg = checked(cfg)?;
            emit_records(&common, &cfg)?;
            if cfg.rk4_check {
                let worst = rk4_discrepancy(&cfg)?;
                eprintln!("rk4 check: max |S_closed - S_rk4| = {worst:.6e} (dt = {})", cfg.rk4_dt);
                if worst > RK4_S_TOLERANCE {
                    return Err(CliError::Rk4Mismatch {
                        max: worst,
                        limit: RK4_S_TOLERANCE,
                    });
                }
            }
            Ok(())
        }
        Command::Esd {
            common,
            t_max,
            tol,
            all_crossings,
        } => {
            let mut cfg = common.load()?;
            if t_max.is_some() {
                cfg.esd.t_max = t_max;
            }
            if let Some(tol) = tol {
                cfg.esd.tolerance = tol;
            }
            cfg.esd.all_crossings |= all_crossings;
            let cfg = checked(cfg)?;
            let text = run_esd(&cfg)?.to_json();
            emit(common.destination(&cfg).as_deref(), |w| w.write_all(text.as_bytes()))
        }
        Command::Asymptote { common } => {
            let cfg = checked(common.load()?)?;
            let text = run_asymptote(&cfg)?.to_json();
            emit(common.destination(&cfg).as_deref(), |w| w.write_all(text.as_bytes()))
        }
        Command::Validate { common, strict } => {
            let cfg = checked(common.load()?)?;
            let report = run_validate(&cfg, strict)?;
            let text = report.to_json();
            emit(common.destination(&cfg).as_deref(), |w| w.write_all(text.as_bytes()))?;
            match first_cp_failure(&report) {
                Some(err) => Err(err),
                None => Ok(()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
