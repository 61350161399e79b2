//! Tilted product and GHZ initial states.
//!
//! Every site is rotated by `R(φ) = [[cos φ/2, sin φ/2], [−sin φ/2, cos φ/2]]`
//! (columns are images of `|0⟩`, `|1⟩`), so a fully tilted ferromagnet has
//! amplitude `cos^{N−q}(θ/2) (−sin θ/2)^q` on a string with `q` ones.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::oracle::binomial::{pairwise_sum, LogFactorials};
use crate::rng::RandomSource;
use crate::state::PureState;
use crate::C64;

/// Random-stream domain tag for tilt disorder.
pub const TILT_DOMAIN: u64 = 0x7469_6c74;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitialKind {
    Ferro,
    Neel,
    DomainWall,
    RandomFerro,
    RandomNeel,
    Ghz,
    StaggeredFerro,
}

impl InitialKind {
    pub const ALL: [InitialKind; 7] = [
        InitialKind::Ferro,
        InitialKind::Neel,
        InitialKind::DomainWall,
        InitialKind::RandomFerro,
        InitialKind::RandomNeel,
        InitialKind::Ghz,
        InitialKind::StaggeredFerro,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            InitialKind::Ferro => "ferro",
            InitialKind::Neel => "neel",
            InitialKind::DomainWall => "domain-wall",
            InitialKind::RandomFerro => "random-ferro",
            InitialKind::RandomNeel => "random-neel",
            InitialKind::Ghz => "ghz",
            InitialKind::StaggeredFerro => "staggered-ferro",
        }
    }

    pub fn is_random(self) -> bool {
        matches!(self, InitialKind::RandomFerro | InitialKind::RandomNeel)
    }
}

impl fmt::Display for InitialKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for InitialKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.to_ascii_lowercase().replace('_', "-");
        InitialKind::ALL
            .into_iter()
            .find(|k| k.as_str() == norm)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown initial state '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialStateSpec {
    pub kind: InitialKind,
    /// Tilt angle in radians, `0 ≤ θ ≤ π`. Ignored by the random kinds.
    pub theta: f64,
    /// Half-width `W` of the per-site tilt distribution `U[−W, W]`.
    pub tilt_width: f64,
    pub tilt_seed: u64,
    /// Use the same tilt draw for every realization.
    pub freeze_tilts: bool,
}

impl InitialStateSpec {
    pub fn new(kind: InitialKind, theta: f64) -> Self {
        Self { kind, theta, tilt_width: 0.0, tilt_seed: 0, freeze_tilts: false }
    }

    pub fn with_tilt_width(mut self, width: f64) -> Self {
        self.tilt_width = width;
        self
    }

    pub fn with_tilt_seed(mut self, seed: u64) -> Self {
        self.tilt_seed = seed;
        self
    }

    pub fn with_frozen_tilts(mut self, freeze: bool) -> Self {
        self.freeze_tilts = freeze;
        self
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if n < 2 {
            return Err(Error::InvalidState(format!("initial states need N >= 2, got {n}")));
        }
        if !(0.0..=std::f64::consts::PI).contains(&self.theta) {
            return Err(Error::InvalidConfig(format!("theta must lie in [0, pi], got {}", self.theta)));
        }
        if !(self.tilt_width >= 0.0 && self.tilt_width.is_finite()) {
            return Err(Error::InvalidConfig(format!("tilt width must be >= 0, got {}", self.tilt_width)));
        }
        if self.kind == InitialKind::DomainWall && n % 2 != 0 {
            return Err(Error::InvalidState(format!("domain wall needs even N, got {n}")));
        }
        Ok(())
    }

    /// The state for realization 0.
    pub fn build(&self, n: usize) -> Result<PureState> {
        self.build_realization(n, 0)
    }

    /// The state for realization `k`; only random-tilt kinds depend on `k`,
    /// and not at all when tilts are frozen.
    pub fn build_realization(&self, n: usize, k: u64) -> Result<PureState> {
        self.validate(n)?;
        let bits = self.base_bits(n);
        let angles = self.site_angles(n, k);
        if self.kind == InitialKind::Ghz {
            let up = product_state(&vec![0; n], &angles);
            let down = product_state(&vec![1; n], &angles);
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let amps = up.iter().zip(&down).map(|(x, y)| (x + y) * h).collect();
            return PureState::new(amps);
        }
        PureState::new(product_state(&bits, &angles))
    }

    /// Unrotated bit pattern (qubit 0 first).
    pub fn base_bits(&self, n: usize) -> Vec<u8> {
        match self.kind {
            InitialKind::Neel | InitialKind::RandomNeel => (0..n).map(|k| (k % 2) as u8).collect(),
            InitialKind::DomainWall => (0..n).map(|k| u8::from(k >= n / 2)).collect(),
            _ => vec![0; n],
        }
    }

    /// Per-site rotation angles.
    pub fn site_angles(&self, n: usize, k: u64) -> Vec<f64> {
        match self.kind {
            InitialKind::RandomFerro | InitialKind::RandomNeel => {
                let realization = if self.freeze_tilts { 0 } else { k };
                let mut rng = RandomSource::new(self.tilt_seed).split_path(&[TILT_DOMAIN, realization]).rng();
                let w = self.tilt_width;
                (0..n).map(|_| if w > 0.0 { rng.random_range(-w..=w) } else { 0.0 }).collect()
            }
            InitialKind::StaggeredFerro => (0..n).map(|j| if j % 2 == 0 { self.theta } else { -self.theta }).collect(),
            _ => vec![self.theta; n],
        }
    }
}

fn product_state(bits: &[u8], angles: &[f64]) -> Vec<C64> {
    let mut amps = vec![C64::new(1.0, 0.0)];
    for (&bit, &phi) in bits.iter().zip(angles) {
        let (s, c) = (phi / 2.0).sin_cos();
        let site = if bit == 0 { [c, -s] } else { [s, c] };
        let mut next = Vec::with_capacity(amps.len() * 2);
        for &x in &amps {
            next.push(x * site[0]);
            next.push(x * site[1]);
        }
        amps = next;
    }
    amps
}

/// `w_q = Tr(ρ Π_q)` by popcount binning of `|ψ(x)|²`.
pub fn charge_weights(state: &PureState) -> Vec<f64> {
    let n = state.num_qubits();
    let mut bins: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    for (x, amp) in state.amplitudes().iter().enumerate() {
        bins[x.count_ones() as usize].push(amp.norm_sqr());
    }
    bins.iter().map(|b| pairwise_sum(b)).collect()
}

/// `C(N,q) cos^{2(N−q)}(θ/2) sin^{2q}(θ/2)`.
pub fn ferro_charge_weights(n: usize, theta: f64) -> Vec<f64> {
    let lf = LogFactorials::new(n);
    let (s, c) = (theta / 2.0).sin_cos();
    (0..=n)
        .map(|q| {
            let cpow = if q == n { 1.0 } else { c.powi(2 * (n - q) as i32) };
            let spow = if q == 0 { 1.0 } else { s.powi(2 * q as i32) };
            lf.ln_binomial(n, q).exp() * cpow * spow
        })
        .collect()
}
