//! `mpemba`: run circuit ensembles and late-time predictions from the shell.

mod settings;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use mpemba::circuit::{CircuitConfig, Measurement, TranslationMode};
use mpemba::experiment::{
    oracle_csv, run_ensemble, run_latetime_sweep, summaries_csv, summaries_json, sweep_csv, to_json, ExperimentConfig,
    OutputFormat, SweepConfig, DEFAULT_MEMORY_BOUND,
};
use mpemba::gates::GateSymmetry;
use mpemba::initial::{InitialKind, InitialStateSpec};
use mpemba::oracle::{fit_power_law, half_pi_grid, oracle_rows, theta_scan, PowerLawFit, ThetaScan};

use settings::Settings;

#[derive(Parser)]
#[command(name = "mpemba", version, about = "Entanglement asymmetry in symmetric random circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Mean asymmetry after every step, one block of rows per θ
    Dynamics(Settings),
    /// Late-time asymmetry over subsystem sizes and θ, with oracle values
    Latetime(Settings),
    /// Late-time Rényi-2 prediction for U(1) circuits from a tilted ferromagnet
    Oracle(Settings),
    /// Oracle θ scan: position of the late-time maximum and its scaling with N
    ScanTheta(Settings),
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dynamics(s) => dynamics(s.resolve()?),
        Command::Latetime(s) => latetime(s.resolve()?),
        Command::Oracle(s) => oracle(s.resolve()?),
        Command::ScanTheta(s) => scan(s.resolve()?),
    }
}

fn format_of(s: &Settings) -> Result<OutputFormat> {
    if let Some(f) = &s.format {
        return Ok(f.parse()?);
    }
    let json = s.out.as_deref().and_then(Path::extension).is_some_and(|e| e.eq_ignore_ascii_case("json"));
    Ok(if json { OutputFormat::Json } else { OutputFormat::Csv })
}

fn write_output(s: &Settings, text: &str) -> Result<()> {
    match &s.out {
        Some(path) => Ok(mpemba::experiment::write_text(path, text)?),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).context("writing to stdout")?;
            Ok(())
        }
    }
}

fn base_config(s: &Settings, thetas_default: f64) -> Result<(ExperimentConfig, Vec<f64>)> {
    let n = s.single_n()?;
    let symmetry: GateSymmetry = s.symmetry.as_deref().unwrap_or("u1").parse()?;
    let mode: TranslationMode = s.mode.as_deref().unwrap_or("iid").parse()?;
    let depth = s.depth.unwrap_or(4 * n);
    let circuit = CircuitConfig::new(n, depth, symmetry, mode, s.seed.unwrap_or(0))?;
    let kind: InitialKind = s.init.as_deref().unwrap_or("ferro").parse()?;
    let mut initial = InitialStateSpec::new(kind, thetas_default).with_frozen_tilts(s.freeze_tilts.unwrap_or(false));
    if let Some(w) = s.tilt_width {
        initial = initial.with_tilt_width(w);
    }
    if let Some(seed) = s.tilt_seed {
        initial = initial.with_tilt_seed(seed);
    }
    let subsystem = s.subsystem.clone().unwrap_or_else(|| (0..(n / 4).max(1)).collect());
    let mut config = ExperimentConfig::new(circuit, initial, subsystem, s.shots.unwrap_or(100));
    config.measurement = if s.renyi2.unwrap_or(false) { Measurement::Renyi2 } else { Measurement::VonNeumann };
    config.measured_symmetry = s.measured_symmetry.as_deref().map(str::parse).transpose()?;
    config.workers = s.workers.unwrap_or(0);
    config.memory_bound = s.memory_bound.unwrap_or(DEFAULT_MEMORY_BOUND);
    let thetas = s.theta.clone().unwrap_or_else(|| vec![thetas_default]);
    if thetas.is_empty() {
        bail!("no θ values given");
    }
    Ok((config, thetas))
}

fn dynamics(s: Settings) -> Result<()> {
    let (base, thetas) = base_config(&s, 0.2 * PI)?;
    let mut summaries = Vec::with_capacity(thetas.len());
    for theta in thetas {
        let mut config = base.clone();
        config.initial.theta = theta;
        summaries.push(run_ensemble(&config)?);
    }
    let text = match format_of(&s)? {
        OutputFormat::Csv => summaries_csv(&summaries),
        OutputFormat::Json => summaries_json(&summaries)?,
    };
    write_output(&s, &text)
}

fn default_sizes(s: &Settings, n: usize) -> Vec<usize> {
    s.sizes.clone().unwrap_or_else(|| (1..n.max(2)).collect())
}

fn latetime(s: Settings) -> Result<()> {
    let (base, thetas) = base_config(&s, 0.5 * PI)?;
    let subsystem_sizes = default_sizes(&s, base.circuit.num_qubits);
    let sweep = SweepConfig { base, subsystem_sizes, thetas, check_convergence: true };
    let rows = run_latetime_sweep(&sweep)?;
    let unconverged = rows.iter().filter(|r| r.converged == Some(false)).count();
    if unconverged > 0 {
        eprintln!(
            "warning: {unconverged} row(s) changed by more than one standard error between depth and twice depth"
        );
    }
    let text = match format_of(&s)? {
        OutputFormat::Csv => sweep_csv(&rows),
        OutputFormat::Json => to_json(&rows)?,
    };
    write_output(&s, &text)
}

fn oracle(s: Settings) -> Result<()> {
    let n = s.single_n()?;
    let sizes: Vec<usize> = s.sizes.clone().unwrap_or_else(|| (1..=n).collect());
    let thetas = s.theta.clone().unwrap_or_else(|| half_pi_grid(0.05 * PI));
    let rows = oracle_rows(n, &sizes, &thetas)?;
    let text = match format_of(&s)? {
        OutputFormat::Csv => oracle_csv(&rows),
        OutputFormat::Json => to_json(&rows)?,
    };
    write_output(&s, &text)
}

#[derive(Serialize)]
struct ScanReport {
    scans: Vec<ThetaScan>,
    fit: Option<PowerLawFit>,
}

fn scan(s: Settings) -> Result<()> {
    let ns = s.n.clone().unwrap_or_else(|| vec![16, 24, 36, 52, 76, 100]);
    let fraction = s.a_fraction.unwrap_or(0.25);
    let grid = half_pi_grid(s.resolution.unwrap_or(0.001 * PI));
    let scans = ns.iter().map(|&n| theta_scan(n, fraction, &grid)).collect::<mpemba::Result<Vec<_>>>()?;
    let fit = if scans.len() >= 2 {
        let xs: Vec<f64> = scans.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = scans.iter().map(|r| r.theta_c).collect();
        let fit = fit_power_law(&xs, &ys)?;
        eprintln!("theta_c = c N^-gamma: c = {:.4}pi, gamma = {:.4}", fit.prefactor / PI, fit.exponent);
        Some(fit)
    } else {
        None
    };
    let text = match format_of(&s)? {
        OutputFormat::Csv => {
            let mut text = String::from("N,a,theta_max,theta_c,peak,unimodal\n");
            for r in &scans {
                text += &format!(
                    "{},{},{:.16e},{:.16e},{:.16e},{}\n",
                    r.n, r.a, r.theta_max, r.theta_c, r.peak, r.unimodal
                );
            }
            text
        }
        OutputFormat::Json => to_json(&ScanReport { scans, fit })?,
    };
    write_output(&s, &text)
}
