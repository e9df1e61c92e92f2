//! Configuration-driven front end for `otto-ising`: single cycles,
//! partial-thermalization runs, regime maps, observable curves, finite-size
//! scaling and velocity scans, written as CSV and JSON.

pub mod commands;
pub mod config;
pub mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{execute, Command, Failure};
use config::{Overrides, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "otto-ising", version, about = "Quantum Otto cycle on a transverse-field Ising chain")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
    /// TOML config file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; defaults to the available hardware parallelism.
    #[arg(long, global = true, env = "OTTO_ISING_THREADS")]
    pub threads: Option<usize>,
    /// Cross-check against the dense spin-space oracle (N <= 10).
    #[arg(long, global = true)]
    pub oracle: bool,
    #[arg(long, global = true)]
    pub n_sites: Option<usize>,
    #[arg(long, global = true)]
    pub h_i: Option<f64>,
    #[arg(long, global = true)]
    pub h_f: Option<f64>,
    /// Sweep velocity.
    #[arg(long = "v", global = true)]
    pub velocity: Option<f64>,
    #[arg(long, global = true)]
    pub t_c: Option<f64>,
    #[arg(long, global = true)]
    pub t_h: Option<f64>,
    /// Bath contact times 𝒥t, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    pub jt: Option<Vec<f64>>,
    #[arg(long, global = true)]
    pub n_cyc: Option<usize>,
}

#[derive(Debug, Clone, Copy, Subcommand)]
pub enum CliCommand {
    /// One complete-thermalization cycle (cycle.json).
    Cycle,
    /// Repeated partially thermalizing cycles for each 𝒥t (cycles.csv, cycles.json).
    Cycles,
    /// Regime map over (h_i, T_c) with boundary polylines.
    PhaseDiagram,
    /// Observables against h_i for several sizes.
    Curves,
    /// Peak heights against N with power-law fits.
    Scaling,
    /// Observable curves and peaks for several sweep velocities.
    Velocity,
}

impl From<CliCommand> for Command {
    fn from(c: CliCommand) -> Self {
        match c {
            CliCommand::Cycle => Command::Cycle,
            CliCommand::Cycles => Command::Cycles,
            CliCommand::PhaseDiagram => Command::PhaseDiagram,
            CliCommand::Curves => Command::Curves,
            CliCommand::Scaling => Command::Scaling,
            CliCommand::Velocity => Command::Velocity,
        }
    }
}

impl Cli {
    pub fn run_config(&self) -> anyhow::Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        cfg.apply(Overrides {
            n_sites: self.n_sites,
            h_i: self.h_i,
            h_f: self.h_f,
            velocity: self.velocity,
            t_c: self.t_c,
            t_h: self.t_h,
            jt: self.jt.clone(),
            n_cyc: self.n_cyc,
            oracle: self.oracle,
            out: self.out.clone(),
        });
        Ok(cfg)
    }
}

/// Parses arguments and runs; exit 0 on success, 1 on configuration errors,
/// 2 on numerical failures.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("config error: --threads must be >= 1");
            return ExitCode::from(1);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("thread pool already initialized: {e}");
        }
    }
    let result = cli.run_config().map_err(Failure::Config).and_then(|cfg| execute(cli.command.into(), &cfg));
    match result {
        Ok(report) => {
            for f in &report.files {
                println!("{}", f.display());
            }
            for w in &report.warnings {
                log::warn!("{w}");
            }
            if !report.warnings.is_empty() {
                eprintln!("completed with {} warning(s)", report.warnings.len());
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{f}");
            ExitCode::from(f.exit_code())
        }
    }
}
