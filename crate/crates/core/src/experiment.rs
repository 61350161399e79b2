//! Seeded ensembles of circuit trajectories, their statistics, and output.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::asymmetry::{asymmetry, u1_renyi2_from_state, AsymmetryKind, AsymmetryResult};
use crate::circuit::{evolve, evolve_with, CircuitConfig, Measurement, Observation, TrajectoryObserver};
use crate::density::partial_trace;
use crate::error::{Error, Result};
use crate::gates::GateSymmetry;
use crate::initial::{charge_weights, InitialKind, InitialStateSpec};
use crate::oracle::binomial::pairwise_sum;
use crate::oracle::{nonsym_late_asymmetry, u1_late_asymmetry_exact, LateTimeQuery};
use crate::sectors::SectorDecomposition;
use crate::state::SubsystemSpec;
use crate::C64;

/// Default refusal threshold for [`ExperimentConfig::memory_estimate`].
pub const DEFAULT_MEMORY_BOUND: u64 = 4 << 30;

/// CSV header of ensemble summaries.
pub const SUMMARY_HEADER: &str = "t,mean_dS,stderr,n_shots,N,a,theta,symmetry,mode,init,seed";

/// Symmetry whose sectors are used to measure asymmetry when none is given:
/// U(1) for unconstrained circuits, the gate symmetry otherwise.
pub fn default_measured_symmetry(gates: GateSymmetry) -> GateSymmetry {
    match gates {
        GateSymmetry::None => GateSymmetry::U1,
        other => other,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub circuit: CircuitConfig,
    pub initial: InitialStateSpec,
    /// Qubits of subsystem A.
    pub subsystem: Vec<usize>,
    pub realizations: usize,
    /// Observation times in steps.
    pub times: Vec<usize>,
    pub measurement: Measurement,
    pub measured_symmetry: Option<GateSymmetry>,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub memory_bound: u64,
}

impl ExperimentConfig {
    /// Von Neumann asymmetry of `subsystem` observed after every step.
    pub fn new(circuit: CircuitConfig, initial: InitialStateSpec, subsystem: Vec<usize>, realizations: usize) -> Self {
        let times = (0..=circuit.depth).collect();
        Self {
            circuit,
            initial,
            subsystem,
            realizations,
            times,
            measurement: Measurement::VonNeumann,
            measured_symmetry: None,
            workers: 0,
            memory_bound: DEFAULT_MEMORY_BOUND,
        }
    }

    pub fn sector_symmetry(&self) -> GateSymmetry {
        self.measured_symmetry.unwrap_or_else(|| default_measured_symmetry(self.circuit.symmetry))
    }

    pub fn subsystem_spec(&self) -> Result<SubsystemSpec> {
        SubsystemSpec::new(self.subsystem.clone(), self.circuit.num_qubits)
    }

    pub fn effective_workers(&self) -> usize {
        if self.workers == 0 {
            rayon::current_num_threads()
        } else {
            self.workers
        }
    }

    /// Bytes needed: the shared initial state, an evolving state plus an
    /// equally large reshaped copy per worker, and stored observations.
    pub fn memory_estimate(&self) -> u128 {
        let state = 16u128 << self.circuit.num_qubits.min(100);
        let workers = self.effective_workers() as u128;
        let per_obs: u128 = match self.measurement {
            Measurement::Density => 16u128 << (2 * self.subsystem.len().min(50)),
            _ => std::mem::size_of::<AsymmetryResult>() as u128,
        };
        state * (1 + 2 * workers) + per_obs * self.realizations as u128 * self.times.len() as u128
    }

    pub fn validate(&self) -> Result<()> {
        self.circuit.validate()?;
        self.initial.validate(self.circuit.num_qubits)?;
        self.subsystem_spec()?;
        if self.realizations == 0 {
            return Err(Error::InvalidConfig("realizations must be >= 1".into()));
        }
        if let Some(&t) = self.times.iter().find(|&&t| t > self.circuit.depth) {
            return Err(Error::InvalidConfig(format!("observation time {t} beyond depth {}", self.circuit.depth)));
        }
        let estimate = self.memory_estimate();
        if estimate > self.memory_bound as u128 {
            return Err(Error::MemoryBound { estimated_bytes: estimate, bound_bytes: self.memory_bound as u128 });
        }
        Ok(())
    }
}

/// Describes a run in output rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetadata {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: usize,
    pub theta: f64,
    pub symmetry: GateSymmetry,
    pub mode: String,
    pub init: InitialKind,
    pub seed: u64,
}

impl RunMetadata {
    pub fn from_config(config: &ExperimentConfig) -> Self {
        Self {
            n: config.circuit.num_qubits,
            a: config.subsystem.len(),
            theta: config.initial.theta,
            symmetry: config.circuit.symmetry,
            mode: config.circuit.mode.to_string(),
            init: config.initial.kind,
            seed: config.circuit.master_seed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryRecord {
    pub t: usize,
    pub mean_ds: f64,
    pub stderr: f64,
    pub n_shots: usize,
    pub mean_purity_a: f64,
    pub mean_purity_aq: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityRecord {
    pub t: usize,
    pub mean: DMatrix<C64>,
    /// Standard error of each entry, `√(Σ|x − mean|² / (n(n−1)))`.
    pub stderr: DMatrix<f64>,
    pub n_shots: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSummary {
    pub meta: RunMetadata,
    pub records: Vec<AsymmetryRecord>,
    pub densities: Vec<DensityRecord>,
}

/// Mean and standard error of the mean; the error is 0 for a single sample.
pub fn mean_and_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(xs) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn with_pool<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(job))
}

/// Runs every realization and reduces the observations in realization
/// order, so the result does not depend on the worker count.
pub fn run_ensemble(config: &ExperimentConfig) -> Result<EnsembleSummary> {
    config.validate()?;
    let subsystem = config.subsystem_spec()?;
    let sectors = Arc::new(SectorDecomposition::new(config.sector_symmetry(), subsystem.len())?);
    let observer = TrajectoryObserver::new(config.times.clone(), subsystem, config.measurement, sectors)?;
    let n = config.circuit.num_qubits;
    let trajectories: Vec<Vec<Observation>> = with_pool(config.workers, || {
        (0..config.realizations as u64)
            .into_par_iter()
            .map(|k| {
                let psi = config.initial.build_realization(n, k)?;
                let obs = evolve(&psi, &config.circuit, &observer, &config.circuit.realization_source(k))?;
                Ok(obs.into_iter().map(|o| o.value).collect())
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let times = observer.times();
    let mut records = Vec::new();
    let mut densities = Vec::new();
    for (slot, &t) in times.iter().enumerate() {
        match config.measurement {
            Measurement::Density => {
                let mats: Vec<&DMatrix<C64>> = trajectories
                    .iter()
                    .map(|tr| match &tr[slot] {
                        Observation::Density(rho) => rho.matrix(),
                        Observation::Asymmetry(_) => unreachable!("density measurement"),
                    })
                    .collect();
                densities.push(density_stats(t, &mats));
            }
            _ => {
                let results: Vec<AsymmetryResult> = trajectories
                    .iter()
                    .map(|tr| match &tr[slot] {
                        Observation::Asymmetry(r) => *r,
                        Observation::Density(_) => unreachable!("asymmetry measurement"),
                    })
                    .collect();
                records.push(asymmetry_record(t, &results));
            }
        }
    }
    Ok(EnsembleSummary { meta: RunMetadata::from_config(config), records, densities })
}

fn asymmetry_record(t: usize, results: &[AsymmetryResult]) -> AsymmetryRecord {
    let ds: Vec<f64> = results.iter().map(|r| r.delta).collect();
    let pa: Vec<f64> = results.iter().map(|r| r.purity_a).collect();
    let paq: Vec<f64> = results.iter().map(|r| r.purity_aq).collect();
    let (mean_ds, stderr) = mean_and_stderr(&ds);
    AsymmetryRecord {
        t,
        mean_ds,
        stderr,
        n_shots: results.len(),
        mean_purity_a: mean_and_stderr(&pa).0,
        mean_purity_aq: mean_and_stderr(&paq).0,
    }
}

fn density_stats(t: usize, mats: &[&DMatrix<C64>]) -> DensityRecord {
    let d = mats[0].nrows();
    let n = mats.len();
    let mut mean = DMatrix::<C64>::zeros(d, d);
    let mut stderr = DMatrix::<f64>::zeros(d, d);
    for c in 0..d {
        for r in 0..d {
            let re: Vec<f64> = mats.iter().map(|m| m[(r, c)].re).collect();
            let im: Vec<f64> = mats.iter().map(|m| m[(r, c)].im).collect();
            let (mr, sr) = mean_and_stderr(&re);
            let (mi, si) = mean_and_stderr(&im);
            mean[(r, c)] = C64::new(mr, mi);
            stderr[(r, c)] = (sr * sr + si * si).sqrt();
        }
    }
    DensityRecord { t, mean, stderr, n_shots: n }
}

fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// CSV text of a summary: [`SUMMARY_HEADER`] then one row per record.
pub fn summary_csv(summary: &EnsembleSummary) -> String {
    summaries_csv(std::slice::from_ref(summary))
}

/// Several summaries under a single header, in order.
pub fn summaries_csv(summaries: &[EnsembleSummary]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for summary in summaries {
        let m = &summary.meta;
        for r in &summary.records {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.t,
                fmt_float(r.mean_ds),
                fmt_float(r.stderr),
                r.n_shots,
                m.n,
                m.a,
                fmt_float(m.theta),
                m.symmetry,
                m.mode,
                m.init,
                m.seed
            );
        }
    }
    out
}

/// One JSON object per CSV row, with identical keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub t: usize,
    #[serde(rename = "mean_dS")]
    pub mean_ds: f64,
    pub stderr: f64,
    pub n_shots: usize,
    #[serde(flatten)]
    pub meta: RunMetadata,
}

pub fn summary_rows(summary: &EnsembleSummary) -> Vec<SummaryRow> {
    summary
        .records
        .iter()
        .map(|r| SummaryRow {
            t: r.t,
            mean_ds: r.mean_ds,
            stderr: r.stderr,
            n_shots: r.n_shots,
            meta: summary.meta.clone(),
        })
        .collect()
}

pub fn summary_json(summary: &EnsembleSummary) -> Result<String> {
    summaries_json(std::slice::from_ref(summary))
}

pub fn summaries_json(summaries: &[EnsembleSummary]) -> Result<String> {
    let rows: Vec<SummaryRow> = summaries.iter().flat_map(summary_rows).collect();
    to_json(&rows)
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::InvalidConfig(format!("unknown format '{other}' (csv|json)"))),
        }
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes a summary in `format`.
pub fn emit(summary: &EnsembleSummary, format: OutputFormat, path: &Path) -> Result<()> {
    emit_all(std::slice::from_ref(summary), format, path)
}

pub fn emit_all(summaries: &[EnsembleSummary], format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => summaries_csv(summaries),
        OutputFormat::Json => summaries_json(summaries)?,
    };
    write_text(path, &text)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    /// Template run; its subsystem and tilt are replaced per row and its
    /// observation times are ignored.
    pub base: ExperimentConfig,
    /// Sizes of prefix subsystems `{0, …, a−1}`.
    pub subsystem_sizes: Vec<usize>,
    pub thetas: Vec<f64>,
    /// Also evolve to twice the depth and compare.
    pub check_convergence: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub a: usize,
    pub theta: f64,
    pub depth: usize,
    #[serde(rename = "mean_dS")]
    pub mean_ds: f64,
    pub stderr: f64,
    pub n_shots: usize,
    #[serde(rename = "mean_dS_2x")]
    pub mean_ds_double: Option<f64>,
    pub stderr_2x: Option<f64>,
    /// Depth and doubled depth agree within one combined standard error.
    pub converged: Option<bool>,
    /// Late-time Rényi-2 prediction, when one exists for this setup.
    #[serde(rename = "oracle_dS2")]
    pub oracle: Option<f64>,
}

pub const SWEEP_HEADER: &str = "N,a,theta,depth,mean_dS,stderr,n_shots,mean_dS_2x,stderr_2x,converged,oracle_dS2";

fn oracle_for(config: &ExperimentConfig, a: usize) -> Result<Option<f64>> {
    if config.measurement.asymmetry_kind() != Some(AsymmetryKind::Renyi2)
        || config.sector_symmetry() != GateSymmetry::U1
    {
        return Ok(None);
    }
    let n = config.circuit.num_qubits;
    match config.circuit.symmetry {
        GateSymmetry::None => Ok(Some(nonsym_late_asymmetry(n, a)?.exact)),
        GateSymmetry::U1 => match config.initial.kind {
            InitialKind::Ferro => Ok(Some(u1_late_asymmetry_exact(&LateTimeQuery::ferro(n, a, config.initial.theta))?)),
            k if k.is_random() => Ok(None),
            _ => {
                let w = charge_weights(&config.initial.build(n)?);
                Ok(Some(u1_late_asymmetry_exact(&LateTimeQuery::with_weights(n, a, w))?))
            }
        },
        _ => Ok(None),
    }
}

/// Late-time asymmetry over subsystem sizes and tilt angles, with oracle
/// values attached for unconstrained and U(1) circuits (Rényi-2 only).
pub fn run_latetime_sweep(sweep: &SweepConfig) -> Result<Vec<SweepRow>> {
    let base = &sweep.base;
    let n = base.circuit.num_qubits;
    let depth = base.circuit.depth;
    if let Some(&a) = sweep.subsystem_sizes.iter().find(|&&a| a == 0 || a > n) {
        return Err(Error::InvalidSubsystem(format!("subsystem size {a} outside 1..={n}")));
    }
    let mut circuit = base.circuit.clone();
    let times = if sweep.check_convergence {
        circuit.depth = 2 * depth;
        vec![depth, 2 * depth]
    } else {
        vec![depth]
    };
    let symmetry = base.sector_symmetry();
    let kind = base.measurement.asymmetry_kind().unwrap_or(AsymmetryKind::Renyi2);
    let fast = kind == AsymmetryKind::Renyi2 && symmetry == GateSymmetry::U1;
    let sectors: Vec<Option<SectorDecomposition>> = sweep
        .subsystem_sizes
        .iter()
        .map(|&a| if fast { Ok(None) } else { SectorDecomposition::new(symmetry, a).map(Some) })
        .collect::<Result<_>>()?;
    let prefixes: Vec<SubsystemSpec> =
        sweep.subsystem_sizes.iter().map(|&a| SubsystemSpec::prefix(a, n)).collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for &theta in &sweep.thetas {
        let mut config = base.clone();
        config.initial.theta = theta;
        config.circuit = circuit.clone();
        config.times = times.clone();
        config.subsystem = (0..*sweep.subsystem_sizes.iter().max().unwrap_or(&1)).collect();
        config.validate()?;
        // per realization: [time][size] → ΔS
        let per_shot: Vec<Vec<Vec<f64>>> = with_pool(config.workers, || {
            (0..config.realizations as u64)
                .into_par_iter()
                .map(|k| {
                    let psi = config.initial.build_realization(n, k)?;
                    let mut out = Vec::with_capacity(times.len());
                    evolve_with(&psi, &config.circuit, &config.circuit.realization_source(k), &times, |_, state| {
                        let mut row = Vec::with_capacity(prefixes.len());
                        for (keep, dec) in prefixes.iter().zip(&sectors) {
                            let r = match dec {
                                None => u1_renyi2_from_state(state, keep)?,
                                Some(dec) => asymmetry(&partial_trace(state, keep)?, dec, kind)?,
                            };
                            row.push(r.delta);
                        }
                        out.push(row);
                        Ok(())
                    })?;
                    Ok(out)
                })
                .collect::<Result<Vec<_>>>()
        })??;
        for (col, &a) in sweep.subsystem_sizes.iter().enumerate() {
            let column = |slot: usize| -> Vec<f64> { per_shot.iter().map(|s| s[slot][col]).collect() };
            let (mean_ds, stderr) = mean_and_stderr(&column(0));
            let (mean_ds_double, stderr_2x, converged) = if sweep.check_convergence {
                let (m2, s2) = mean_and_stderr(&column(1));
                (Some(m2), Some(s2), Some((m2 - mean_ds).abs() <= (stderr * stderr + s2 * s2).sqrt()))
            } else {
                (None, None, None)
            };
            rows.push(SweepRow {
                n,
                a,
                theta,
                depth,
                mean_ds,
                stderr,
                n_shots: config.realizations,
                mean_ds_double,
                stderr_2x,
                converged,
                oracle: oracle_for(&config, a)?,
            });
        }
    }
    Ok(rows)
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_float).unwrap_or_default()
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{}",
            r.n,
            r.a,
            fmt_float(r.theta),
            r.depth,
            fmt_float(r.mean_ds),
            fmt_float(r.stderr),
            r.n_shots,
            fmt_opt(r.mean_ds_double),
            fmt_opt(r.stderr_2x),
            r.converged.map(|c| c.to_string()).unwrap_or_default(),
            fmt_opt(r.oracle)
        );
    }
    out
}

pub const ORACLE_HEADER: &str = "N,a,theta,purity_A,purity_AQ,dS2_exact,dS2_gaussian,gaussian_valid";

pub fn oracle_csv(rows: &[crate::oracle::OracleRow]) -> String {
    let mut out = String::from(ORACLE_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.n,
            r.a,
            fmt_float(r.theta),
            fmt_float(r.purity_a),
            fmt_float(r.purity_aq),
            fmt_float(r.ds2_exact),
            fmt_float(r.ds2_gaussian),
            r.gaussian_valid
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::TranslationMode;
    use std::f64::consts::PI;

    fn small(sym: GateSymmetry, shots: usize) -> ExperimentConfig {
        let circuit = CircuitConfig::new(6, 4, sym, TranslationMode::Iid, 17).unwrap();
        let initial = InitialStateSpec::new(InitialKind::Ferro, 0.3 * PI);
        ExperimentConfig::new(circuit, initial, vec![0, 1], shots)
    }

    #[test]
    fn single_realization() {
        let config = small(GateSymmetry::U1, 1);
        let summary = run_ensemble(&config).unwrap();
        let sectors = Arc::new(SectorDecomposition::new(GateSymmetry::U1, 2).unwrap());
        let observer = TrajectoryObserver::new(
            config.times.clone(),
            config.subsystem_spec().unwrap(),
            Measurement::VonNeumann,
            sectors,
        )
        .unwrap();
        let psi = config.initial.build(6).unwrap();
        let single = evolve(&psi, &config.circuit, &observer, &config.circuit.realization_source(0)).unwrap();
        assert_eq!(summary.records.len(), 5);
        for (r, o) in summary.records.iter().zip(&single) {
            assert_eq!(r.mean_ds, o.value.delta().unwrap());
            assert_eq!(r.stderr, 0.0);
            assert_eq!(r.n_shots, 1);
        }
    }

    #[test]
    fn worker_count_invariance() {
        let mut config = small(GateSymmetry::U1, 24);
        let mut outputs = Vec::new();
        for workers in [1, 2, 8] {
            config.workers = workers;
            outputs.push(run_ensemble(&config).unwrap());
        }
        for other in &outputs[1..] {
            for (a, b) in outputs[0].records.iter().zip(&other.records) {
                assert!((a.mean_ds - b.mean_ds).abs() < 1e-12);
                assert!((a.stderr - b.stderr).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stderr_scaling() {
        let xs: Vec<f64> = (0..400).map(|k| ((k * 7919) % 101) as f64 / 101.0).collect();
        let (_, s1) = mean_and_stderr(&xs[..100]);
        let (_, s4) = mean_and_stderr(&xs);
        assert!((s1 / s4 - 2.0).abs() < 0.4);
        assert_eq!(mean_and_stderr(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn ensemble_stderr_scaling() {
        let mut config = small(GateSymmetry::U1, 100);
        config.times = vec![2];
        let s100 = run_ensemble(&config).unwrap().records[0].stderr;
        config.realizations = 400;
        let s400 = run_ensemble(&config).unwrap().records[0].stderr;
        let ratio = s100 / s400;
        assert!((ratio - 2.0).abs() < 0.4, "{ratio}");
    }

    #[test]
    fn memory_guard_refuses() {
        let circuit = CircuitConfig::new(24, 4, GateSymmetry::U1, TranslationMode::Iid, 0).unwrap();
        let mut config =
            ExperimentConfig::new(circuit, InitialStateSpec::new(InitialKind::Ferro, 0.2), vec![0, 1, 2, 3], 10);
        config.workers = 8;
        assert!(matches!(run_ensemble(&config), Err(Error::MemoryBound { .. })));
        config.workers = 1;
        config.memory_bound = 1 << 20;
        assert!(matches!(config.validate(), Err(Error::MemoryBound { .. })));
    }

    #[test]
    fn csv_and_json() {
        let empty = EnsembleSummary {
            meta: RunMetadata::from_config(&small(GateSymmetry::U1, 1)),
            records: vec![],
            densities: vec![],
        };
        assert_eq!(summary_csv(&empty), format!("{SUMMARY_HEADER}\n"));
        let summary = run_ensemble(&small(GateSymmetry::Z2, 3)).unwrap();
        let csv = summary_csv(&summary);
        let first = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = first.split(',').collect();
        assert_eq!(fields.len(), 11);
        assert_eq!(fields[7], "z2");
        assert_eq!(fields[8], "iid");
        assert_eq!(fields[9], "ferro");
        assert_eq!(fields[1].parse::<f64>().unwrap(), summary.records[0].mean_ds);
        let json = summary_json(&summary).unwrap();
        let rows: Vec<SummaryRow> = serde_json::from_str(&json).unwrap();
        assert_eq!(rows, summary_rows(&summary));
        let value: serde_json::Value = serde_json::from_str(&json).unwrap();
        let keys: Vec<&String> = value[0].as_object().unwrap().keys().collect();
        assert_eq!(keys.len(), 11);
    }

    #[test]
    fn byte_identical_reruns() {
        let dir = tempfile::tempdir().unwrap();
        let config = small(GateSymmetry::SU2, 5);
        for format in [OutputFormat::Csv, OutputFormat::Json] {
            let a = dir.path().join("a");
            let b = dir.path().join("b");
            emit(&run_ensemble(&config).unwrap(), format, &a).unwrap();
            emit(&run_ensemble(&config).unwrap(), format, &b).unwrap();
            assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        }
        let bad = emit(&run_ensemble(&config).unwrap(), OutputFormat::Csv, Path::new("/nonexistent/x.csv"));
        assert!(matches!(bad, Err(Error::Io { .. })));
    }

    #[test]
    fn density_measurement_summary() {
        let mut config = small(GateSymmetry::U1, 4);
        config.measurement = Measurement::Density;
        config.times = vec![0, 4];
        let s = run_ensemble(&config).unwrap();
        assert!(s.records.is_empty());
        assert_eq!(s.densities.len(), 2);
        assert!((s.densities[1].mean.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_rows_and_whole_system() {
        let circuit = CircuitConfig::new(6, 6, GateSymmetry::U1, TranslationMode::Iid, 5).unwrap();
        let mut base = ExperimentConfig::new(circuit, InitialStateSpec::new(InitialKind::Ferro, 0.0), vec![0], 6);
        base.measurement = Measurement::Renyi2;
        let sweep =
            SweepConfig { base, subsystem_sizes: vec![1, 3, 6], thetas: vec![0.5 * PI], check_convergence: true };
        let rows = run_latetime_sweep(&sweep).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.oracle.is_some() && r.converged.is_some()));
        // the global state keeps its charge distribution
        let w = charge_weights(&InitialStateSpec::new(InitialKind::Ferro, 0.5 * PI).build(6).unwrap());
        let initial = -w.iter().map(|x| x * x).sum::<f64>().ln();
        assert!((rows[2].mean_ds - initial).abs() < 1e-10);
        assert!(rows[2].stderr < 1e-10);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with(SWEEP_HEADER));
        assert_eq!(csv.lines().count(), 4);
    }

    #[test]
    fn invalid_configs() {
        let mut c = small(GateSymmetry::U1, 0);
        assert!(run_ensemble(&c).is_err());
        c.realizations = 1;
        c.times = vec![9];
        assert!(run_ensemble(&c).is_err());
        c.times = vec![1];
        c.subsystem = vec![7];
        assert!(run_ensemble(&c).is_err());
    }
}
