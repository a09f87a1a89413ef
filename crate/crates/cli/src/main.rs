//! `hwlab`: ground states, mass scans, evolution and stability runs from a
//! single configuration file.

mod check;
mod commands;
mod config;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use halfwave::dynamics::Scheme;

use crate::config::{Config, InitialState};
use crate::manifest::RunManifest;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_INVARIANT: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: String) -> Self {
        CliError { code: EXIT_CONFIG, message }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError { code: EXIT_CONFIG, message: format!("{}: {e}", path.display()) }
    }
}

impl From<halfwave::Error> for CliError {
    fn from(e: halfwave::Error) -> Self {
        use halfwave::Error::*;
        let code = match e {
            InvalidParams(_) | InvalidArgument(_) | Bracket(_) | Dimension(_) | Format(_) | Io(_) => EXIT_CONFIG,
            _ => EXIT_NUMERICAL,
        };
        CliError { code, message: e.to_string() }
    }
}

#[derive(Parser)]
#[command(name = "hwlab", version, about = "Half-Wave ground states, critical mass and dynamics")]
struct Cli {
    /// TOML configuration, or a manifest.json of an earlier run.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output root (overrides HWLAB_OUT and output.root).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed of every random perturbation.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long, global = true)]
    p: Option<f64>,
    /// Boost velocity, comma separated per axis.
    #[arg(long, global = true, value_delimiter = ',', allow_hyphen_values = true)]
    v: Option<Vec<f64>>,
    #[arg(long, global = true)]
    dim: Option<usize>,
    /// Points per axis.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Box side length.
    #[arg(long, global = true)]
    len: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Minimise the energy at fixed mass and certify the result.
    Groundstate {
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Scan the ground-state energy curve and bracket the critical mass.
    Scan {
        #[arg(long, value_delimiter = ',')]
        rhos: Option<Vec<f64>>,
        /// Bisection bracket `lo,hi`.
        #[arg(long, value_delimiter = ',')]
        bracket: Option<Vec<f64>>,
        #[arg(long)]
        tol_rho: Option<f64>,
        #[arg(long)]
        no_bisect: bool,
    },
    /// Integrate the 1D flow.
    Evolve {
        /// `groundstate` or `gaussian`.
        #[arg(long)]
        initial: Option<String>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// `strang` or `lie`.
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        no_snapshots: bool,
    },
    /// Perturb a ground state and track the distance to its orbit.
    Stability {
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        deltas: Option<Vec<f64>>,
        #[arg(long)]
        t_final: Option<f64>,
        #[arg(long)]
        dt: Option<f64>,
        /// Known critical-mass bracket `lo,hi`.
        #[arg(long, value_delimiter = ',')]
        rho0_bracket: Option<Vec<f64>>,
    },
    /// Run the invariant battery and print a pass/fail table.
    Check,
    /// Repeat the run recorded in a manifest.
    Replay { manifest: PathBuf },
}

fn parse_enum<T: serde::de::DeserializeOwned>(key: &str, value: &str) -> Result<T, CliError> {
    serde_json::from_value(serde_json::Value::String(value.to_string()))
        .map_err(|_| CliError::config(format!("--{key}: unrecognised value '{value}'")))
}

fn pair(flag: &str, values: &[f64]) -> Result<[f64; 2], CliError> {
    match values {
        [lo, hi] => Ok([*lo, *hi]),
        _ => Err(CliError::config(format!("{flag} takes two values `lo,hi`, got {}", values.len()))),
    }
}

fn apply_overrides(cli: &Cli, config: &mut Config) -> Result<(), CliError> {
    let m = &mut config.model;
    if let Some(x) = cli.q {
        m.q = x;
    }
    if let Some(x) = cli.p {
        m.p = x;
    }
    if let Some(x) = &cli.v {
        m.v = x.clone();
    }
    if let Some(x) = cli.dim {
        m.dim = x;
    }
    if let Some(x) = cli.n {
        m.n = Some(x);
    }
    if let Some(x) = cli.len {
        m.len = Some(x);
    }
    if let Some(s) = cli.seed {
        config.apply_seed(s);
    }
    match &cli.command {
        Command::Groundstate { rho } => {
            if let Some(r) = rho {
                config.groundstate.rho = *r;
            }
        }
        Command::Scan { rhos, bracket, tol_rho, no_bisect } => {
            if let Some(r) = rhos {
                config.scan.rhos = r.clone();
            }
            if let Some(b) = bracket {
                config.scan.bracket = pair("--bracket", &b)?;
            }
            if let Some(t) = tol_rho {
                config.scan.tol_rho = *t;
            }
            if *no_bisect {
                config.scan.bisect = false;
            }
        }
        Command::Evolve { initial, rho, t_final, dt, scheme, no_snapshots } => {
            let ev = &mut config.evolve;
            if let Some(i) = initial {
                ev.initial = parse_enum::<InitialState>("initial", i)?;
            }
            if let Some(r) = rho {
                ev.rho = *r;
            }
            if let Some(t) = t_final {
                ev.integrator.t_final = *t;
            }
            if let Some(d) = dt {
                ev.integrator.dt = *d;
            }
            if let Some(s) = scheme {
                ev.integrator.scheme = parse_enum::<Scheme>("scheme", s)?;
            }
            if *no_snapshots {
                ev.snapshots = false;
            }
        }
        Command::Stability { rho, deltas, t_final, dt, rho0_bracket } => {
            let st = &mut config.stability;
            if let Some(r) = rho {
                st.rho = *r;
            }
            if let Some(d) = deltas {
                st.deltas = d.clone();
            }
            if let Some(t) = t_final {
                st.integrator.t_final = *t;
            }
            if let Some(d) = dt {
                st.integrator.dt = *d;
            }
            if let Some(b) = rho0_bracket {
                st.rho0_bracket = Some(pair("--rho0-bracket", &b)?);
            }
        }
        Command::Check | Command::Replay { .. } => {}
    }
    Ok(())
}

fn output_root(cli: &Cli, config: &Config) -> PathBuf {
    cli.out
        .clone()
        .or_else(|| std::env::var_os("HWLAB_OUT").map(PathBuf::from))
        .or_else(|| config.output.root.clone())
        .unwrap_or_else(|| PathBuf::from("hwlab-out"))
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    if let Some(j) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build_global()
            .map_err(|e| CliError::config(format!("--jobs: {e}")))?;
    }
    let (command, mut config) = match &cli.command {
        Command::Replay { manifest } => {
            let text = std::fs::read_to_string(manifest).map_err(|e| CliError::io(manifest, e))?;
            let m: RunManifest =
                serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", manifest.display())))?;
            (m.command, m.config)
        }
        other => {
            let config = match &cli.config {
                Some(path) => Config::load(path).map_err(CliError::config)?,
                None => Config::default(),
            };
            let name = match other {
                Command::Groundstate { .. } => "groundstate",
                Command::Scan { .. } => "scan",
                Command::Evolve { .. } => "evolve",
                Command::Stability { .. } => "stability",
                Command::Check => "check",
                Command::Replay { .. } => unreachable!(),
            };
            (name.to_string(), config)
        }
    };
    apply_overrides(cli, &mut config)?;
    config.model.params().validate()?;
    config.solver.validate()?;
    let root = output_root(cli, &config);
    let dir = root.join(&command);
    let outputs = match command.as_str() {
        "groundstate" => commands::groundstate(&config, &dir)?,
        "scan" => commands::scan_cmd(&config, &dir)?,
        "evolve" => commands::evolve_cmd(&config, &dir)?,
        "stability" => commands::stability_cmd(&config, &root, &dir)?,
        "check" => {
            let (outputs, passed) = check::run(&config, &dir)?;
            eprintln!("wrote {} files to {}", outputs.len(), dir.display());
            return Ok(passed);
        }
        other => return Err(CliError::config(format!("unknown command '{other}' in manifest"))),
    };
    eprintln!("wrote {} files to {}", outputs.len(), dir.display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("hwlab: invariant check failed");
            ExitCode::from(EXIT_INVARIANT)
        }
        Err(e) => {
            eprintln!("hwlab: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
