//! `quadtherm` command-line tool.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use quadtherm::config::{self, LoadedScenario, ScheduleFile, SweepFile, PLACEHOLDER_NETWORK};
use quadtherm::scenario::{sweep_csv, Controller};
use quadtherm::{
    max_feasible_gamma, run_endurance, sample_episode, simulate, sweep, total_reward,
    ContinuousGenerator, Discretization, RandomizationRanges, RewardConfig, RobotSnapshot,
    ThermalNetwork, ThermalState,
};

use output::{Manifest, Output};

#[derive(Debug, Parser)]
#[command(name = "quadtherm", version, about = "Quadruped motor thermal simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate a thermal network under a piecewise-constant heat schedule.
    Simulate {
        /// Network file, or "placeholder" for the built-in robot.
        #[arg(long)]
        config: String,
        /// Heat input schedule file.
        #[arg(long)]
        inputs: PathBuf,
        /// Thermal step, s.
        #[arg(long, default_value_t = 0.02)]
        h: f64,
        /// Simulated duration, s.
        #[arg(long)]
        horizon: f64,
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
        /// Trace CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the baseline or throttled controller on a scenario.
    Endurance {
        /// Scenario file.
        #[arg(long)]
        config: PathBuf,
        /// Overrides the scenario's controller.
        #[arg(long, value_enum)]
        controller: Option<ControllerArg>,
        /// Episode seed; applied when the scenario has a randomization block.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the scenario's thermal step, s.
        #[arg(long)]
        h: Option<f64>,
        /// Overrides the scenario's horizon, s.
        #[arg(long)]
        horizon: Option<f64>,
        /// Trace CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every (variation, seed) pair of a sweep file.
    Sweep {
        /// Sweep file.
        #[arg(long)]
        config: PathBuf,
        /// Replaces the sweep file's seed list with this single seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Summary CSV path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the largest admissible barrier rate coefficient gamma_T.
    Gamma {
        /// Network file, or "placeholder".
        #[arg(long)]
        config: String,
        /// Reward configuration file; defaults when absent.
        #[arg(long)]
        reward: Option<PathBuf>,
        /// Thermal step, s.
        #[arg(long, default_value_t = 0.02)]
        h: f64,
        /// Environment temperature of the worst-case state, °C.
        #[arg(long, default_value_t = 35.0)]
        ambient: f64,
        /// Matrices the free rate is read from; euler gives the continuous rate.
        #[arg(long, value_enum, default_value_t = Method::Exact)]
        method: Method,
    },
    /// Evaluate the reward suite on a robot snapshot.
    Reward {
        /// Snapshot file.
        #[arg(long)]
        config: PathBuf,
        /// Reward configuration file; defaults when absent.
        #[arg(long)]
        reward: Option<PathBuf>,
        /// Breakdown CSV path.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw randomized episode configurations.
    Randomize {
        /// Ranges file; defaults when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// First seed; record k uses seed + k.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Number of records.
        #[arg(long, default_value_t = 1)]
        count: u64,
        /// JSON output path; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Euler,
}

impl From<Method> for Discretization {
    fn from(m: Method) -> Self {
        match m {
            Method::Exact => Discretization::Exact,
            Method::Euler => Discretization::Euler,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ControllerArg {
    Baseline,
    Throttled,
}

impl From<ControllerArg> for Controller {
    fn from(c: ControllerArg) -> Self {
        match c {
            ControllerArg::Baseline => Controller::Baseline,
            ControllerArg::Throttled => Controller::Throttled,
        }
    }
}

/// Failure with its exit code.
#[derive(Debug)]
enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Config(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Runtime(m) => write!(f, "error: {m}"),
        }
    }
}

fn config_err(what: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{}: {e}", what.display()))
}

fn runtime_err(e: impl std::fmt::Display) -> CliError {
    CliError::Runtime(e.to_string())
}

/// Reads input files and remembers their bytes for the manifest digest.
#[derive(Default)]
struct Inputs {
    bytes: Vec<u8>,
}

impl Inputs {
    fn read(&mut self, path: &Path) -> Result<String, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(path, e))?;
        self.bytes.extend_from_slice(path.to_string_lossy().as_bytes());
        self.bytes.push(0);
        self.bytes.extend_from_slice(text.as_bytes());
        self.bytes.push(0);
        Ok(text)
    }

    fn parse<T: serde::de::DeserializeOwned>(&mut self, path: &Path) -> Result<T, CliError> {
        let text = self.read(path)?;
        config::parse_versioned(&text).map_err(|e| config_err(path, e))
    }

    fn network(&mut self, reference: &str) -> Result<ThermalNetwork, CliError> {
        if reference == PLACEHOLDER_NETWORK {
            self.bytes.extend_from_slice(PLACEHOLDER_NETWORK.as_bytes());
            Ok(ThermalNetwork::placeholder())
        } else {
            self.parse(Path::new(reference))
        }
    }

    fn scenario(&mut self, path: &Path) -> Result<LoadedScenario, CliError> {
        let text = self.read(path)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        let mut resolve = |rel: &str| self.read_relative(&dir, rel);
        config::load_scenario(&text, &mut resolve).map_err(|e| config_err(path, e))
    }

    fn read_relative(&mut self, dir: &Path, rel: &str) -> quadtherm::Result<String> {
        let path = dir.join(rel);
        self.read(&path).map_err(|e| quadtherm::Error::Config {
            location: path.display().to_string(),
            message: match e {
                CliError::Config(m) | CliError::Runtime(m) => m,
            },
        })
    }

    fn reward(&mut self, path: Option<&Path>) -> Result<RewardConfig, CliError> {
        let cfg = match path {
            Some(p) => self.parse::<RewardConfig>(p)?,
            None => RewardConfig::default(),
        };
        cfg.validate()
            .map_err(|e| config_err(path.unwrap_or(Path::new("<default reward>")), e))?;
        Ok(cfg)
    }
}

fn run(cli: Cli, argv: Vec<String>) -> Result<(), CliError> {
    let started = Instant::now();
    let mut inputs = Inputs::default();
    let manifest = |outputs: Vec<PathBuf>, seed: Option<u64>, inputs: &Inputs| Manifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config_digest: output::sha256_hex(&inputs.bytes),
        seed,
        command: argv.clone(),
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };

    match cli.command {
        Command::Simulate {
            config,
            inputs: schedule_path,
            h,
            horizon,
            method,
            out,
        } => {
            let network = inputs.network(&config)?;
            let file: ScheduleFile = inputs.parse(&schedule_path)?;
            let schedule = file.schedule();
            schedule
                .validate(&network)
                .map_err(|e| config_err(&schedule_path, e))?;
            let initial = match file.initial_temperatures {
                Some(t) => ThermalState::new(&network, t, 0.0).map_err(|e| config_err(&schedule_path, e))?,
                None => ThermalState::ambient(&network),
            };
            if !(h > 0.0 && h.is_finite()) || !(horizon >= 0.0 && horizon.is_finite()) {
                return Err(CliError::Config(format!(
                    "--h must be > 0 and --horizon >= 0 (got h = {h}, horizon = {horizon})"
                )));
            }
            let trace = simulate(&network, &schedule, initial, horizon, h, method.into())
                .map_err(runtime_err)?;
            let target = Output::new(out);
            target.write(trace.to_csv_string().as_bytes())?;
            if let Some(path) = target.path() {
                Output::write_manifest(path, &manifest(vec![path.to_path_buf()], None, &inputs))?;
            }
        }

        Command::Endurance {
            config,
            controller,
            seed,
            h,
            horizon,
            out,
        } => {
            let loaded = inputs.scenario(&config)?;
            let mut scenario = loaded.prepared(seed).map_err(|e| config_err(&config, e))?;
            if let Some(h) = h {
                scenario.h = h;
            }
            if let Some(horizon) = horizon {
                scenario.horizon = horizon;
            }
            scenario.validate().map_err(|e| config_err(&config, e))?;
            let controller = controller.map(Controller::from).unwrap_or(loaded.controller);
            let result = run_endurance(&scenario, controller).map_err(runtime_err)?;

            let target = Output::new(out);
            target.write(result.trace.to_csv_string().as_bytes())?;
            let summary = match (result.overheat_time, result.hottest_motor) {
                (Some(t), Some(m)) => format!(
                    "{}: overheat at {t:.3} s on motor {m} ({})",
                    controller.name(),
                    quadtherm::network::default_node_name(m)
                ),
                _ => format!(
                    "{}: no overheat within horizon ({} s, peak motor temperature {:.3} °C)",
                    controller.name(),
                    scenario.horizon,
                    result.peak_motor_temperature
                ),
            };
            match target.path() {
                Some(path) => {
                    println!("{summary}");
                    let seed = seed.or(loaded.seed);
                    Output::write_manifest(path, &manifest(vec![path.to_path_buf()], seed, &inputs))?;
                }
                None => eprintln!("{summary}"),
            }
        }

        Command::Sweep { config, seed, out } => {
            let file: SweepFile = inputs.parse(&config)?;
            let dir = config.parent().map(Path::to_path_buf).unwrap_or_default();
            let loaded = {
                let mut resolve = |rel: &str| inputs.read_relative(&dir, rel);
                file.base_scenario(&mut resolve)
                    .map_err(|e| config_err(&config, e))?
            };
            let seeds = match seed {
                Some(s) => vec![s],
                None => file.seeds.clone(),
            };
            let rows = sweep(&loaded.sweep_base(), &file.variations, &seeds)
                .map_err(|e| config_err(&config, e))?;
            let motors = loaded.scenario.network.motor_indices().len();
            let target = Output::new(out);
            target.write(sweep_csv(&rows, motors).as_bytes())?;
            if let Some(path) = target.path() {
                Output::write_manifest(path, &manifest(vec![path.to_path_buf()], seed, &inputs))?;
            }
        }

        Command::Gamma {
            config,
            reward,
            h,
            ambient,
            method,
        } => {
            let network = inputs.network(&config)?;
            let cfg = inputs.reward(reward.as_deref())?;
            let mat = ContinuousGenerator::new(&network)
                .discretize(h, method.into())
                .map_err(|e| CliError::Config(e.to_string()))?;
            let bound = max_feasible_gamma(&mat, &network, &cfg, ambient)
                .map_err(|e| CliError::Config(e.to_string()))?;
            println!("gamma* = {}", bound.gamma);
            println!(
                "gamma_T = {} {}",
                cfg.gamma_t,
                if bound.admits(cfg.gamma_t) {
                    "is feasible"
                } else {
                    "exceeds the bound"
                }
            );
            let worst = bound
                .margins
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            println!("min margin at gamma* = {worst}");
        }

        Command::Reward { config, reward, out } => {
            let snap: RobotSnapshot = inputs.parse(&config)?;
            snap.validate().map_err(|e| config_err(&config, e))?;
            let cfg = inputs.reward(reward.as_deref())?;
            let breakdown = total_reward(&snap, &cfg);
            println!("total = {}", breakdown.total);
            for (name, v) in &breakdown.terms {
                println!("{name} = {v}");
            }
            if let Some(path) = out {
                let target = Output::new(Some(path.clone()));
                target.write(breakdown.to_csv_string().as_bytes())?;
                Output::write_manifest(&path, &manifest(vec![path.clone()], None, &inputs))?;
            }
        }

        Command::Randomize {
            config,
            seed,
            count,
            out,
        } => {
            let ranges = match &config {
                Some(p) => inputs.parse::<RandomizationRanges>(p)?,
                None => RandomizationRanges::default(),
            };
            ranges
                .validate()
                .map_err(|e| config_err(config.as_deref().unwrap_or(Path::new("<default ranges>")), e))?;
            let records = (0..count)
                .map(|k| sample_episode(&ranges, seed.wrapping_add(k)))
                .collect::<Result<Vec<_>, _>>()
                .map_err(runtime_err)?;
            let mut json = serde_json::to_string_pretty(&records).map_err(runtime_err)?;
            json.push('\n');
            let target = Output::new(out);
            target.write(json.as_bytes())?;
            if let Some(path) = target.path() {
                Output::write_manifest(path, &manifest(vec![path.to_path_buf()], Some(seed), &inputs))?;
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(cli, argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
