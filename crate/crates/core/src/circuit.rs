//! Brick-wall circuits and trajectory evolution.
//!
//! One time step is two layers: bonds `(0,1), (2,3), …` then `(1,2), (3,4), …`
//! with open boundaries. Gate randomness for realization `k` is drawn from
//! the stream `(master_seed, k, GATE_DOMAIN, step, layer, position)`, where
//! the translation mode collapses the step and/or position coordinates.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::asymmetry::{asymmetry, AsymmetryKind, AsymmetryResult};
use crate::density::{partial_trace, DensityMatrix};
use crate::error::{Error, Result};
use crate::gates::{sample_gate, GateSymmetry, TwoQubitGate};
use crate::rng::RandomSource;
use crate::sectors::SectorDecomposition;
use crate::state::{PureState, SubsystemSpec};

/// Random-stream domain tag for circuit gates.
pub const GATE_DOMAIN: u64 = 0x6761_7465;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TranslationMode {
    /// Every gate independent.
    #[serde(rename = "iid")]
    Iid,
    /// One gate per layer, repeated along the chain.
    #[serde(rename = "t")]
    Spatial,
    /// Gates of the first step repeated every step.
    #[serde(rename = "f")]
    Floquet,
    /// One gate per layer, repeated along the chain and in time.
    #[serde(rename = "ft")]
    SpatioTemporal,
}

impl TranslationMode {
    pub const ALL: [TranslationMode; 4] =
        [TranslationMode::Iid, TranslationMode::Spatial, TranslationMode::Floquet, TranslationMode::SpatioTemporal];

    pub fn as_str(self) -> &'static str {
        match self {
            TranslationMode::Iid => "iid",
            TranslationMode::Spatial => "t",
            TranslationMode::Floquet => "f",
            TranslationMode::SpatioTemporal => "ft",
        }
    }

    pub fn is_periodic_in_time(self) -> bool {
        matches!(self, TranslationMode::Floquet | TranslationMode::SpatioTemporal)
    }

    fn address(self, step: usize, layer: usize, position: usize) -> [u64; 4] {
        let (t, p) = match self {
            TranslationMode::Iid => (step, position),
            TranslationMode::Spatial => (step, 0),
            TranslationMode::Floquet => (0, position),
            TranslationMode::SpatioTemporal => (0, 0),
        };
        [GATE_DOMAIN, t as u64, layer as u64, p as u64]
    }
}

impl fmt::Display for TranslationMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TranslationMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "iid" => Ok(TranslationMode::Iid),
            "t" | "spatial" => Ok(TranslationMode::Spatial),
            "f" | "floquet" => Ok(TranslationMode::Floquet),
            "ft" | "tf" | "spatio-temporal" => Ok(TranslationMode::SpatioTemporal),
            other => Err(Error::InvalidConfig(format!("unknown mode '{other}' (iid|t|f|ft)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub num_qubits: usize,
    /// Number of steps `T`; each step is two layers.
    pub depth: usize,
    pub symmetry: GateSymmetry,
    pub mode: TranslationMode,
    pub master_seed: u64,
}

impl CircuitConfig {
    pub fn new(
        num_qubits: usize,
        depth: usize,
        symmetry: GateSymmetry,
        mode: TranslationMode,
        master_seed: u64,
    ) -> Result<Self> {
        let c = Self { num_qubits, depth, symmetry, mode, master_seed };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits < 2 || self.num_qubits % 2 != 0 {
            return Err(Error::InvalidConfig(format!("N must be even and >= 2, got {}", self.num_qubits)));
        }
        Ok(())
    }

    /// Random source of realization `k`.
    pub fn realization_source(&self, k: u64) -> RandomSource {
        RandomSource::new(self.master_seed).split(k)
    }
}

/// Bonds of layer 0 (even) or layer 1 (odd), open boundary.
pub fn layer_pairs(num_qubits: usize, layer: usize) -> Vec<(usize, usize)> {
    let start = layer % 2;
    (start..num_qubits.saturating_sub(1)).step_by(2).map(|i| (i, i + 1)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct GatePlacement {
    pub gate: TwoQubitGate,
    pub layer: usize,
    pub qubits: (usize, usize),
}

/// Gates of step `t` for the realization whose stream is `source`, in
/// application order.
pub fn build_step_gates(config: &CircuitConfig, t: usize, source: &RandomSource) -> Result<Vec<GatePlacement>> {
    config.validate()?;
    if t >= config.depth {
        return Err(Error::InvalidConfig(format!("step {t} outside depth {}", config.depth)));
    }
    let mut out = Vec::with_capacity(config.num_qubits - 1);
    for layer in 0..2 {
        let pairs = layer_pairs(config.num_qubits, layer);
        let shared = matches!(config.mode, TranslationMode::Spatial | TranslationMode::SpatioTemporal)
            .then(|| sample_gate(config.symmetry, &mut source.split_path(&config.mode.address(t, layer, 0)).rng()));
        for (pos, &qubits) in pairs.iter().enumerate() {
            let gate = match &shared {
                Some(g) => g.clone(),
                None => sample_gate(config.symmetry, &mut source.split_path(&config.mode.address(t, layer, pos)).rng()),
            };
            out.push(GatePlacement { gate, layer, qubits });
        }
    }
    Ok(out)
}

/// What is recorded at each observation time.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measurement {
    VonNeumann,
    Renyi2,
    /// Rényi-2 result; callers use the purity pair.
    Purity,
    /// The reduced density matrix itself.
    Density,
}

impl Measurement {
    pub fn asymmetry_kind(self) -> Option<AsymmetryKind> {
        match self {
            Measurement::VonNeumann => Some(AsymmetryKind::VonNeumann),
            Measurement::Renyi2 | Measurement::Purity => Some(AsymmetryKind::Renyi2),
            Measurement::Density => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrajectoryObserver {
    times: Vec<usize>,
    subsystem: SubsystemSpec,
    measurement: Measurement,
    sectors: Arc<SectorDecomposition>,
}

impl TrajectoryObserver {
    /// `times` are sorted and deduplicated; asymmetry is taken with respect
    /// to `sectors`.
    pub fn new(
        mut times: Vec<usize>,
        subsystem: SubsystemSpec,
        measurement: Measurement,
        sectors: Arc<SectorDecomposition>,
    ) -> Result<Self> {
        times.sort_unstable();
        times.dedup();
        if sectors.size() != subsystem.len() {
            return Err(Error::DimensionMismatch { expected: subsystem.len(), found: sectors.size() });
        }
        Ok(Self { times, subsystem, measurement, sectors })
    }

    pub fn times(&self) -> &[usize] {
        &self.times
    }

    pub fn subsystem(&self) -> &SubsystemSpec {
        &self.subsystem
    }

    pub fn measurement(&self) -> Measurement {
        self.measurement
    }

    pub fn sectors(&self) -> &SectorDecomposition {
        &self.sectors
    }

    pub fn observe(&self, state: &PureState) -> Result<Observation> {
        let rho = partial_trace(state, &self.subsystem)?;
        match self.measurement.asymmetry_kind() {
            Some(kind) => Ok(Observation::Asymmetry(asymmetry(&rho, &self.sectors, kind)?)),
            None => Ok(Observation::Density(rho)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Observation {
    Asymmetry(AsymmetryResult),
    Density(DensityMatrix),
}

impl Observation {
    pub fn delta(&self) -> Option<f64> {
        match self {
            Observation::Asymmetry(r) => Some(r.delta),
            Observation::Density(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TimedObservation {
    pub t: usize,
    pub value: Observation,
}

/// Evolves `initial` for `config.depth` steps, calling `visit(t, state)` at
/// every `t` in `times` (after `t` steps). `times` must be sorted.
pub fn evolve_with<F>(
    initial: &PureState,
    config: &CircuitConfig,
    source: &RandomSource,
    times: &[usize],
    mut visit: F,
) -> Result<PureState>
where
    F: FnMut(usize, &PureState) -> Result<()>,
{
    config.validate()?;
    if initial.num_qubits() != config.num_qubits {
        return Err(Error::DimensionMismatch { expected: config.num_qubits, found: initial.num_qubits() });
    }
    if let Some(&t) = times.iter().find(|&&t| t > config.depth) {
        return Err(Error::InvalidConfig(format!("observation time {t} beyond depth {}", config.depth)));
    }
    if times.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidConfig("observation times must be sorted".into()));
    }
    let mut state = initial.clone();
    let mut next = times.iter().peekable();
    let cached = if config.mode.is_periodic_in_time() && config.depth > 0 {
        Some(build_step_gates(config, 0, source)?)
    } else {
        None
    };
    for t in 0..=config.depth {
        while next.peek() == Some(&&t) {
            visit(t, &state)?;
            next.next();
        }
        if t == config.depth {
            break;
        }
        let fresh;
        let gates = match &cached {
            Some(g) => g,
            None => {
                fresh = build_step_gates(config, t, source)?;
                &fresh
            }
        };
        for p in gates {
            state.apply_in_place(p.gate.matrix(), p.qubits.0, p.qubits.1, p.gate.kernel())?;
        }
    }
    Ok(state)
}

/// Evolves and records the observer's measurement at each observation time.
pub fn evolve(
    initial: &PureState,
    config: &CircuitConfig,
    observer: &TrajectoryObserver,
    source: &RandomSource,
) -> Result<Vec<TimedObservation>> {
    if observer.subsystem().num_qubits() != config.num_qubits {
        return Err(Error::DimensionMismatch { expected: config.num_qubits, found: observer.subsystem().num_qubits() });
    }
    let mut out = Vec::with_capacity(observer.times().len());
    evolve_with(initial, config, source, observer.times(), |t, state| {
        out.push(TimedObservation { t, value: observer.observe(state)? });
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::kron2;
    use crate::initial::{charge_weights, InitialKind, InitialStateSpec};
    use crate::C64;

    fn config(n: usize, depth: usize, sym: GateSymmetry, mode: TranslationMode) -> CircuitConfig {
        CircuitConfig::new(n, depth, sym, mode, 11).unwrap()
    }

    #[test]
    fn mode_strings() {
        for m in TranslationMode::ALL {
            assert_eq!(m.as_str().parse::<TranslationMode>().unwrap(), m);
            assert_eq!(serde_json::to_string(&m).unwrap(), format!("\"{}\"", m.as_str()));
        }
    }

    #[test]
    fn layer_counts() {
        assert_eq!(layer_pairs(6, 0), vec![(0, 1), (2, 3), (4, 5)]);
        assert_eq!(layer_pairs(6, 1), vec![(1, 2), (3, 4)]);
        let c = config(6, 4, GateSymmetry::U1, TranslationMode::Iid);
        let gates = build_step_gates(&c, 0, &c.realization_source(0)).unwrap();
        assert_eq!(gates.iter().filter(|g| g.layer == 0).count(), 3);
        assert_eq!(gates.iter().filter(|g| g.layer == 1).count(), 2);
        assert!(build_step_gates(&c, 4, &c.realization_source(0)).is_err());
        assert!(CircuitConfig::new(5, 4, GateSymmetry::U1, TranslationMode::Iid, 0).is_err());
    }

    #[test]
    fn mode_reuse() {
        let src = RandomSource::new(3).split(0);
        let f = config(8, 4, GateSymmetry::None, TranslationMode::Floquet);
        assert_eq!(build_step_gates(&f, 3, &src).unwrap(), build_step_gates(&f, 0, &src).unwrap());
        let t = config(8, 4, GateSymmetry::None, TranslationMode::Spatial);
        let g = build_step_gates(&t, 2, &src).unwrap();
        for layer in 0..2 {
            let in_layer: Vec<_> = g.iter().filter(|p| p.layer == layer).collect();
            assert!(in_layer.iter().all(|p| p.gate == in_layer[0].gate));
        }
        assert_ne!(g[0].gate, g[4].gate);
        assert_ne!(build_step_gates(&t, 1, &src).unwrap()[0].gate, g[0].gate);
        let ft = config(8, 4, GateSymmetry::None, TranslationMode::SpatioTemporal);
        let a = build_step_gates(&ft, 0, &src).unwrap();
        let b = build_step_gates(&ft, 3, &src).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].gate, a[1].gate);
        let iid = config(8, 4, GateSymmetry::None, TranslationMode::Iid);
        let g = build_step_gates(&iid, 0, &src).unwrap();
        assert_ne!(g[0].gate, g[1].gate);
    }

    fn observer(n: usize, a: usize, sym: GateSymmetry, times: Vec<usize>, m: Measurement) -> TrajectoryObserver {
        let sectors = Arc::new(SectorDecomposition::new(sym, a).unwrap());
        TrajectoryObserver::new(times, SubsystemSpec::prefix(a, n).unwrap(), m, sectors).unwrap()
    }

    #[test]
    fn time_zero_is_initial_state() {
        let c = config(6, 3, GateSymmetry::U1, TranslationMode::Iid);
        let psi = InitialStateSpec::new(InitialKind::Ferro, 0.3).build(6).unwrap();
        let obs = observer(6, 2, GateSymmetry::U1, vec![0, 3], Measurement::VonNeumann);
        let out = evolve(&psi, &c, &obs, &c.realization_source(0)).unwrap();
        assert_eq!(out.len(), 2);
        assert_eq!(out[0].value, obs.observe(&psi).unwrap());
        let bad = observer(6, 2, GateSymmetry::U1, vec![4], Measurement::VonNeumann);
        assert!(evolve(&psi, &c, &bad, &c.realization_source(0)).is_err());
    }

    #[test]
    fn strong_symmetry_is_kept() {
        let c = config(8, 10, GateSymmetry::U1, TranslationMode::Iid);
        let psi = PureState::zeros(8).unwrap();
        let obs = observer(8, 3, GateSymmetry::U1, (0..=10).collect(), Measurement::VonNeumann);
        for k in 0..5 {
            for o in evolve(&psi, &c, &obs, &c.realization_source(k)).unwrap() {
                assert!(o.value.delta().unwrap().abs() < 1e-10);
            }
        }
    }

    #[test]
    fn deterministic() {
        for mode in TranslationMode::ALL {
            let c = config(8, 6, GateSymmetry::Z2, mode);
            let psi = InitialStateSpec::new(InitialKind::Ghz, 0.4).build(8).unwrap();
            let a = evolve_with(&psi, &c, &c.realization_source(2), &[], |_, _| Ok(())).unwrap();
            let b = evolve_with(&psi, &c, &c.realization_source(2), &[], |_, _| Ok(())).unwrap();
            assert_eq!(a, b);
            assert!((a.norm_sqr() - 1.0).abs() < 1e-8);
        }
    }

    fn expect_pauli_sum(state: &PureState, pauli: [[C64; 2]; 2]) -> C64 {
        // Σ_k ⟨P_k⟩ via pairwise application of P ⊗ I on (k, k+1) or (k-1, k)
        let n = state.num_qubits();
        let id = [[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(1.0, 0.0)]];
        let op = kron2(&pauli, &id);
        (0..n)
            .map(|k| {
                let other = if k + 1 < n { k + 1 } else { k - 1 };
                let mut s = state.clone();
                s.apply_in_place(&op, k, other, crate::state::GateKernel::Dense).unwrap();
                state.inner(&s)
            })
            .sum()
    }

    fn parity_x(state: &PureState) -> f64 {
        let flip = state.dim() - 1;
        state.amplitudes().iter().enumerate().map(|(x, a)| (a.conj() * state.amplitudes()[x ^ flip]).re).sum()
    }

    #[test]
    fn conservation_laws() {
        let zero = C64::new(0.0, 0.0);
        let one = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        let px = [[zero, one], [one, zero]];
        let py = [[zero, -i], [i, zero]];
        let pz = [[one, zero], [zero, -one]];
        let n = 8;
        let times: Vec<usize> = (0..=8).collect();
        for mode in TranslationMode::ALL {
            let src = RandomSource::new(5).split(mode as u64);
            // U(1): charge distribution and total Z
            let c = config(n, 8, GateSymmetry::U1, mode);
            let psi = InitialStateSpec::new(InitialKind::Ferro, 0.7).build(n).unwrap();
            let w0 = charge_weights(&psi);
            let z0 = expect_pauli_sum(&psi, pz);
            evolve_with(&psi, &c, &src, &times, |_, s| {
                for (a, b) in charge_weights(s).iter().zip(&w0) {
                    assert!((a - b).abs() < 1e-8);
                }
                assert!((expect_pauli_sum(s, pz) - z0).norm() < 1e-8);
                Ok(())
            })
            .unwrap();
            // Z₂: ⟨∏σˣ⟩
            let c = config(n, 8, GateSymmetry::Z2, mode);
            let psi = InitialStateSpec::new(InitialKind::Ghz, 0.4).build(n).unwrap();
            let p0 = parity_x(&psi);
            assert!(p0.abs() > 0.1);
            evolve_with(&psi, &c, &src, &times, |_, s| {
                assert!((parity_x(s) - p0).abs() < 1e-8);
                Ok(())
            })
            .unwrap();
            // SU(2): total spin components
            let c = config(n, 8, GateSymmetry::SU2, mode);
            let psi = InitialStateSpec::new(InitialKind::Ferro, 0.9).build(n).unwrap();
            let e0: Vec<C64> = [px, py, pz].iter().map(|p| expect_pauli_sum(&psi, *p)).collect();
            evolve_with(&psi, &c, &src, &times, |_, s| {
                for (p, e) in [px, py, pz].iter().zip(&e0) {
                    assert!((expect_pauli_sum(s, *p) - e).norm() < 1e-8);
                }
                Ok(())
            })
            .unwrap();
        }
    }

    #[test]
    fn density_measurement() {
        let c = config(6, 2, GateSymmetry::None, TranslationMode::Iid);
        let psi = PureState::zeros(6).unwrap();
        let obs = observer(6, 2, GateSymmetry::U1, vec![2], Measurement::Density);
        let out = evolve(&psi, &c, &obs, &c.realization_source(0)).unwrap();
        match &out[0].value {
            Observation::Density(rho) => rho.validate().unwrap(),
            other => panic!("unexpected {other:?}"),
        }
    }
}
