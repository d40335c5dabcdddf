//! Argument handling for the `cinedrone` binary.
//!
//! Exit codes: 0 success, 2 invalid input (missing file, schema error,
//! unparsable command, malformed log), 3 failure while running.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use cinedrone::metrics;
use cinedrone::simulator::{bundled, run_scenario_with, RunLog, Scenario, SimConfig, BUNDLED};

use crate::server::{scenario_list, ServerOptions};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_RUNTIME: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "cinedrone", version, about = "Drone cinematography simulator and live director")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// Start the live service (same as `serve`).
    #[arg(long)]
    pub serve: bool,
    /// Port for `--serve`.
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    /// Log command outcomes and state changes to stderr.
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a scenario and write its log and metrics.
    Run {
        /// Bundled scenario name or path to a scenario file.
        scenario: String,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Recompute metrics from a run log.
    Metrics {
        log: PathBuf,
        /// Write the JSON report here instead of printing a table.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a scenario live and serve it over HTTP and WebSocket.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        /// Bundled scenario name or path; its actors populate the scene.
        #[arg(long, default_value = "hover_transition")]
        scenario: String,
        /// Also replay the scenario's scripted commands.
        #[arg(long)]
        keep_script: bool,
        /// Do not serve the browser UI.
        #[arg(long)]
        headless: bool,
        /// Override the scenario's seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Print the bundled scenarios.
    ListScenarios,
}

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Runtime(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { tracing::Level::DEBUG } else { tracing::Level::WARN };
    let _ = tracing_subscriber::fmt().with_writer(std::io::stderr).with_max_level(level).try_init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

pub fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Some(Command::Run { scenario, seed, out }) => run(&scenario, seed, &out),
        Some(Command::Metrics { log, out }) => recompute(&log, out.as_deref()),
        Some(Command::Serve { port, scenario, keep_script, headless, seed }) => {
            serve(port, &scenario, keep_script, seed, ServerOptions { headless })
        }
        Some(Command::ListScenarios) => {
            for s in scenario_list() {
                println!("{:<22} {:>5.1} s  {}", s.name, s.duration, s.description);
            }
            Ok(())
        }
        None if cli.serve => serve(cli.port, "hover_transition", false, None, ServerOptions::default()),
        None => Err(CliError::Validation("no command given; try --help".into())),
    }
}

/// A bundled name, or else a file path.
pub fn load_scenario(name_or_path: &str) -> Result<(Scenario, String), CliError> {
    if let Some(s) = bundled(name_or_path) {
        return Ok((s, name_or_path.to_owned()));
    }
    let path = Path::new(name_or_path);
    if !path.exists() {
        let names: Vec<&str> = BUNDLED.iter().map(|(n, _)| *n).collect();
        return Err(CliError::Validation(format!(
            "{name_or_path}: no such file or bundled scenario (bundled: {})",
            names.join(", ")
        )));
    }
    let scenario = Scenario::load(path).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))?;
    let stem = path.file_stem().map_or("run".into(), |s| s.to_string_lossy().into_owned());
    Ok((scenario, stem))
}

fn run(name: &str, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let (mut scenario, stem) = load_scenario(name)?;
    scenario.check_commands().map_err(|e| CliError::Validation(format!("{name}: {e}")))?;
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let log = run_scenario_with(&scenario, &SimConfig::default());
    let report = metrics::compute(&log.records);
    for e in &log.events {
        tracing::debug!(time = e.time, kind = ?e.kind, "{}", e.detail);
    }

    let write = |file: PathBuf, text: String| {
        fs::write(&file, text).map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", file.display())))
    };
    fs::create_dir_all(out).map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", out.display())))?;
    let csv = out.join(format!("{stem}.csv"));
    write(csv.clone(), log.to_csv())?;
    write(out.join(format!("{stem}.metrics.json")), report.to_json())?;
    println!("{report}");
    println!("log: {} ({} rows)", csv.display(), log.records.len());
    Ok(())
}

fn recompute(log: &Path, out: Option<&Path>) -> Result<(), CliError> {
    let text = fs::read_to_string(log).map_err(|e| CliError::Validation(format!("cannot read {}: {e}", log.display())))?;
    let records = RunLog::from_csv(&text).map_err(|e| CliError::Validation(format!("{}: {e}", log.display())))?;
    let report = metrics::compute(&records);
    match out {
        Some(path) => fs::write(path, report.to_json())
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))?,
        None => println!("{report}"),
    }
    Ok(())
}

fn serve(port: u16, name: &str, keep_script: bool, seed: Option<u64>, options: ServerOptions) -> Result<(), CliError> {
    let (mut scenario, _) = load_scenario(name)?;
    if keep_script {
        scenario.check_commands().map_err(|e| CliError::Validation(format!("{name}: {e}")))?;
    } else {
        scenario.commands.clear();
    }
    if let Some(seed) = seed {
        scenario.seed = seed;
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Runtime(e.to_string()))?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(("0.0.0.0", port))
            .await
            .map_err(|e| CliError::Runtime(format!("cannot listen on port {port}: {e}")))?;
        println!("listening on http://{}", listener.local_addr().map_err(|e| CliError::Runtime(e.to_string()))?);
        let live = crate::live::spawn(scenario, SimConfig::default());
        crate::server::serve(listener, live, options).await.map_err(|e| CliError::Runtime(e.to_string()))
    })
}
