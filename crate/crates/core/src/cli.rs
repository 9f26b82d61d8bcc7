//! Command-line front end.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use thiserror::Error;

use crate::config::{parse_config, LoadedConfig};
use crate::error::{ConfigError, MetricsError, SolverError};
use crate::materials::{coolant_catalog, consistency_checks, fixtures, maxwell_conductivity_limit, PcmProps, COOLANT_NAMES};
use crate::metrics::{kpi_csv, kpi_report, summarize, sweep, SweepRow};
use crate::presets;
use crate::solver::{time_step_convergence, Simulation};

#[derive(Debug, Parser)]
#[command(name = "hbtms", version, about = "Thermal model of a liquid/PCM cooled battery module")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario. A `[sweep]` section is ignored.
    Run(Source),
    /// Run every case of the `[sweep]` grid.
    Sweep(Source),
    /// Repeat a run at decreasing time steps and compare final T_avg.
    Convergence {
        #[command(flatten)]
        source: Source,
        /// Time steps in s, largest first.
        #[arg(long, value_delimiter = ',', default_values_t = [2.0, 1.0, 0.5])]
        dts: Vec<f64>,
    },
    /// Print the property catalog and check the mixing rules.
    ValidateProps,
}

#[derive(Debug, Args)]
pub struct Source {
    /// Scenario file (TOML).
    #[arg(long, conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Bundled scenario, e.g. paper-3.1-coolants.
    #[arg(long)]
    pub preset: Option<String>,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Worker threads for sweeps.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u16).range(1..))]
    pub jobs: u16,
    /// Replaces the solver time step, s.
    #[arg(long)]
    pub dt_override: Option<f64>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0} case(s) failed")]
    CasesFailed(usize, bool),
    #[error("{0} property check(s) failed")]
    ChecksFailed(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solver(e) if e.is_divergence() => 3,
            CliError::CasesFailed(_, true) => 3,
            _ => 1,
        }
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| CliError::Io { path, source })
}

fn load(source: &Source) -> Result<LoadedConfig, CliError> {
    let mut loaded = match (&source.config, &source.preset) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            parse_config(&text)?
        }
        (None, Some(name)) => presets::load(name)?,
        (None, None) => return Err(ConfigError::field("config", "give --config or --preset").into()),
    };
    if let Some(dt) = source.dt_override {
        loaded.override_dt(dt)?;
    }
    Ok(loaded)
}

fn prepare(source: &Source) -> Result<LoadedConfig, CliError> {
    let loaded = load(source)?;
    fs::create_dir_all(&source.out).map_err(|e| CliError::Io {
        path: source.out.clone(),
        source: e,
    })?;
    let _ = fs::remove_file(source.out.join("FAILED"));
    write(&source.out, "effective_config.toml", &loaded.effective_toml())?;
    Ok(loaded)
}

fn run(source: &Source) -> Result<(), CliError> {
    let loaded = prepare(source)?;
    if loaded.config.sweep.is_some() {
        warn!("`run` ignores the [sweep] section; use `sweep` to run the grid");
    }
    let scenario = loaded.config.scenario()?;
    let sim = Simulation::new(scenario)?;
    write(&source.out, "nodes.csv", &sim.network.nodes_csv())?;
    write(&source.out, "edges.csv", &sim.network.edges_csv())?;
    info!("running {} nodes for {} s", sim.network.len(), sim.scenario.discharge.duration);
    let (result, failure) = sim.run_partial();
    write(&source.out, "series.csv", &result.series_csv())?;
    write(&source.out, "audit.txt", &result.audit.to_key_value())?;
    let row = SweepRow {
        labels: Vec::new(),
        outcome: match &failure {
            None => Ok((summarize(&result, None), result)),
            Some(e) => Err(e.clone()),
        },
    };
    write(&source.out, "kpi.csv", &kpi_csv(std::slice::from_ref(&row)))?;
    if let Some(e) = failure {
        write(&source.out, "FAILED", &format!("{e}\n"))?;
        return Err(e.into());
    }
    print!("{}", kpi_report(&[row]));
    Ok(())
}

fn run_sweep(source: &Source) -> Result<(), CliError> {
    let loaded = prepare(source)?;
    let grid = loaded.config.grid()?;
    let base = loaded.config.scenario()?.build_network()?;
    write(&source.out, "nodes.csv", &base.nodes_csv())?;
    write(&source.out, "edges.csv", &base.edges_csv())?;
    info!("sweeping {} cases on {} threads", grid.cases.len(), source.jobs);
    let rows = sweep(&grid, source.jobs as usize)?;
    let cases = source.out.join("cases");
    fs::create_dir_all(&cases).map_err(|e| CliError::Io {
        path: cases.clone(),
        source: e,
    })?;
    let mut audit = String::new();
    let mut failed = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let labels: Vec<String> = row.labels.iter().map(|(k, v)| format!("{k}={v}")).collect();
        let _ = writeln!(audit, "[case {i}] {}", labels.join(" "));
        match &row.outcome {
            Ok((_, result)) => {
                write(&cases, &format!("{i:02}_series.csv"), &result.series_csv())?;
                audit.push_str(&result.audit.to_key_value());
            }
            Err(e) => {
                let _ = writeln!(audit, "failed: {e}");
                failed.push((i, e.clone()));
            }
        }
        audit.push('\n');
    }
    write(&source.out, "audit.txt", &audit)?;
    write(&source.out, "kpi.csv", &kpi_csv(&rows))?;
    let report = kpi_report(&rows);
    write(&source.out, "report.txt", &report)?;
    print!("{report}");
    if !failed.is_empty() {
        let lines: Vec<String> = failed.iter().map(|(i, e)| format!("case {i}: {e}")).collect();
        write(&source.out, "FAILED", &(lines.join("\n") + "\n"))?;
        let diverged = failed.iter().any(|(_, e)| e.is_divergence());
        return Err(CliError::CasesFailed(failed.len(), diverged));
    }
    Ok(())
}

fn convergence(source: &Source, dts: &[f64]) -> Result<(), CliError> {
    let loaded = prepare(source)?;
    let scenario = loaded.config.scenario()?;
    let report = time_step_convergence(&scenario, dts)?;
    let mut csv = String::from("dt,T_avg_final,delta_from_previous\n");
    for (i, (dt, t)) in report.dts.iter().zip(&report.final_t_avg).enumerate() {
        let delta = if i == 0 { String::new() } else { format!("{:.6e}", report.deltas[i - 1]) };
        let _ = writeln!(csv, "{dt},{t:.6},{delta}");
    }
    write(&source.out, "convergence.csv", &csv)?;
    print!("{csv}");
    println!("deltas shrink monotonically: {}", report.monotone);
    Ok(())
}

fn validate_props() -> Result<(), CliError> {
    println!("{:<10} {:>10} {:>10} {:>8} {:>12}", "coolant", "rho", "c", "k", "mu");
    for name in COOLANT_NAMES {
        let p = coolant_catalog(name).expect("catalog entry");
        println!("{name:<10} {:>10} {:>10} {:>8} {:>12}", p.rho, p.c, p.k, p.mu);
    }
    let pcm = PcmProps::rt35(fixtures::RT35_LATENT_HEAT);
    println!(
        "\nRT35: rho {} c {} k {}/{} melting {}..{} C latent heat {} J/kg",
        pcm.rho, pcm.c, pcm.k_solid, pcm.k_liquid, pcm.solidus, pcm.liquidus, pcm.latent_heat
    );
    let water = coolant_catalog("Water").expect("catalog entry");
    println!(
        "Maxwell upper bound for water at phi={}: k = {:.6}\n",
        fixtures::NANOFLUID_PHI,
        maxwell_conductivity_limit(water.k, fixtures::NANOFLUID_PHI)
    );
    let checks = consistency_checks();
    let mut failures = 0;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        failures += usize::from(!c.passed());
        println!(
            "{status} {}: expected {} got {} (relative error {:.2e}, tolerance {:.0e})",
            c.name,
            c.expected,
            c.actual,
            c.relative_error(),
            c.tolerance
        );
    }
    if failures > 0 {
        return Err(CliError::ChecksFailed(failures));
    }
    Ok(())
}

/// Runs a parsed command line.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run(source) => run(source),
        Command::Sweep(source) => run_sweep(source),
        Command::Convergence { source, dts } => convergence(source, dts),
        Command::ValidateProps => validate_props(),
    }
}
