//! Dense statevectors over qubits and in-place two-qubit gate kernels.

use num_complex::ComplexFloat;

use crate::error::{Error, Result};
use crate::C64;

/// A 4×4 complex matrix acting on `|q_i q_j⟩` ordered `|00⟩, |01⟩, |10⟩, |11⟩`,
/// where the first factor is the first qubit of the pair.
pub type Matrix4 = [[C64; 4]; 4];

const NORM_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn identity4() -> Matrix4 {
    let mut m = [[ZERO; 4]; 4];
    for (k, row) in m.iter_mut().enumerate() {
        row[k] = ONE;
    }
    m
}

pub fn matmul4(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            let mut acc = ZERO;
            for k in 0..4 {
                acc += a[r][k] * b[k][c];
            }
            out[r][c] = acc;
        }
    }
    out
}

pub fn adjoint4(a: &Matrix4) -> Matrix4 {
    let mut out = [[ZERO; 4]; 4];
    for r in 0..4 {
        for c in 0..4 {
            out[r][c] = a[c][r].conj();
        }
    }
    out
}

/// Largest entry modulus of `a - b`.
pub fn max_abs_diff4(a: &Matrix4, b: &Matrix4) -> f64 {
    let mut worst: f64 = 0.0;
    for r in 0..4 {
        for c in 0..4 {
            worst = worst.max((a[r][c] - b[r][c]).abs());
        }
    }
    worst
}

/// max |U†U − I| over entries.
pub fn unitarity_violation4(u: &Matrix4) -> f64 {
    max_abs_diff4(&matmul4(&adjoint4(u), u), &identity4())
}

/// How a 4×4 gate is applied to amplitude quartets.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum GateKernel {
    /// Full 4×4 product.
    Dense,
    /// Gate is block diagonal over `{|00⟩}`, `{|01⟩, |10⟩}`, `{|11⟩}`; all
    /// entries outside those blocks are exactly zero.
    ChargeBlocks,
}

impl GateKernel {
    /// The cheapest kernel that reproduces `m` exactly.
    pub fn detect(m: &Matrix4) -> Self {
        let blocks = [0usize, 1, 1, 2];
        for r in 0..4 {
            for c in 0..4 {
                if blocks[r] != blocks[c] && m[r][c] != ZERO {
                    return GateKernel::Dense;
                }
            }
        }
        GateKernel::ChargeBlocks
    }
}

/// Normalized pure state of `num_qubits` qubits. Basis index bit
/// `num_qubits - 1 - k` holds qubit `k`, so qubit 0 is the most significant.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let len = amplitudes.len();
        if len < 2 || !len.is_power_of_two() {
            return Err(Error::InvalidState(format!("amplitude vector length {len} is not 2^N with N >= 1")));
        }
        let state = Self { num_qubits: len.trailing_zeros() as usize, amplitudes };
        let norm = state.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("squared norm {norm} is not 1")));
        }
        Ok(state)
    }

    /// Computational basis state `|bits⟩`.
    pub fn basis(num_qubits: usize, bits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits >= usize::BITS as usize - 1 {
            return Err(Error::InvalidState(format!("unsupported qubit count {num_qubits}")));
        }
        let dim = 1usize << num_qubits;
        if bits >= dim {
            return Err(Error::InvalidState(format!("basis index {bits} out of range")));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[bits] = ONE;
        Ok(Self { num_qubits, amplitudes })
    }

    pub fn zeros(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        crate::oracle::binomial::pairwise_sum(&self.amplitudes.iter().map(|a| a.norm_sqr()).collect::<Vec<_>>())
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// Mask of qubit `k` in a basis index.
    #[inline]
    pub fn qubit_mask(&self, k: usize) -> usize {
        1usize << (self.num_qubits - 1 - k)
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<()> {
        for q in [i, j] {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange { index: q, num_qubits: self.num_qubits });
            }
        }
        if i == j {
            return Err(Error::RepeatedQubit(i));
        }
        Ok(())
    }

    /// Apply `gate` to qubits `(i, j)` in place, using `kernel`. The kernel
    /// must be valid for `gate` (see [`GateKernel::detect`]).
    pub fn apply_in_place(&mut self, gate: &Matrix4, i: usize, j: usize, kernel: GateKernel) -> Result<()> {
        self.check_pair(i, j)?;
        let mi = self.qubit_mask(i);
        let mj = self.qubit_mask(j);
        let (lo, hi) = {
            let (a, b) = (mi.trailing_zeros(), mj.trailing_zeros());
            (a.min(b), a.max(b))
        };
        let quarter = self.amplitudes.len() >> 2;
        let amps = &mut self.amplitudes;
        let low_mask_lo = (1usize << lo) - 1;
        let low_mask_hi = (1usize << hi) - 1;
        match kernel {
            GateKernel::Dense => {
                for base in 0..quarter {
                    let x = ((base >> lo) << (lo + 1)) | (base & low_mask_lo);
                    let x = ((x >> hi) << (hi + 1)) | (x & low_mask_hi);
                    let idx = [x, x | mj, x | mi, x | mi | mj];
                    let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
                    for (r, &target) in idx.iter().enumerate() {
                        let row = &gate[r];
                        amps[target] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2] + row[3] * v[3];
                    }
                }
            }
            GateKernel::ChargeBlocks => {
                let p0 = gate[0][0];
                let p3 = gate[3][3];
                let (b11, b12, b21, b22) = (gate[1][1], gate[1][2], gate[2][1], gate[2][2]);
                for base in 0..quarter {
                    let x = ((base >> lo) << (lo + 1)) | (base & low_mask_lo);
                    let x = ((x >> hi) << (hi + 1)) | (x & low_mask_hi);
                    let (i01, i10, i11) = (x | mj, x | mi, x | mi | mj);
                    amps[x] *= p0;
                    amps[i11] *= p3;
                    let (a, b) = (amps[i01], amps[i10]);
                    amps[i01] = b11 * a + b12 * b;
                    amps[i10] = b21 * a + b22 * b;
                }
            }
        }
        Ok(())
    }
}

/// Returns `gate` applied to qubits `(i, j)` of `state`. In debug builds the
/// gate is also checked for unitarity.
pub fn apply_two_qubit_gate(state: &PureState, gate: &Matrix4, i: usize, j: usize) -> Result<PureState> {
    apply_two_qubit_gate_checked(state, gate, i, j, cfg!(debug_assertions))
}

pub fn apply_two_qubit_gate_checked(
    state: &PureState,
    gate: &Matrix4,
    i: usize,
    j: usize,
    verify_unitary: bool,
) -> Result<PureState> {
    if verify_unitary {
        let v = unitarity_violation4(gate);
        if v > UNITARY_TOL {
            return Err(Error::NotUnitary(v));
        }
    }
    let mut out = state.clone();
    out.apply_in_place(gate, i, j, GateKernel::Dense)?;
    Ok(out)
}

/// A sorted list of distinct qubit indices within an `num_qubits` register.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SubsystemSpec {
    num_qubits: usize,
    qubits: Vec<usize>,
}

impl SubsystemSpec {
    pub fn new(qubits: Vec<usize>, num_qubits: usize) -> Result<Self> {
        if qubits.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSubsystem(format!("indices {qubits:?} are not strictly increasing")));
        }
        if let Some(&bad) = qubits.iter().find(|&&q| q >= num_qubits) {
            return Err(Error::QubitOutOfRange { index: bad, num_qubits });
        }
        Ok(Self { num_qubits, qubits })
    }

    /// Qubits `0..len`.
    pub fn prefix(len: usize, num_qubits: usize) -> Result<Self> {
        Self::new((0..len).collect(), num_qubits)
    }

    pub fn qubits(&self) -> &[usize] {
        &self.qubits
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn complement(&self) -> SubsystemSpec {
        let qubits = (0..self.num_qubits).filter(|q| !self.qubits.contains(q)).collect();
        SubsystemSpec { num_qubits: self.num_qubits, qubits }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::haar::sample_haar_unitary;
    use crate::rng::RandomSource;
    use rand::Rng;

    fn random_state(n: usize, src: &RandomSource) -> PureState {
        let mut rng = src.rng();
        let amps: Vec<C64> =
            (0..1 << n).map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)).collect();
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        PureState::new(amps.into_iter().map(|a| a / norm).collect()).unwrap()
    }

    fn haar4(src: &RandomSource) -> Matrix4 {
        let u = sample_haar_unitary(4, &mut src.rng()).unwrap();
        let mut m = [[ZERO; 4]; 4];
        for r in 0..4 {
            for c in 0..4 {
                m[r][c] = u[(r, c)];
            }
        }
        m
    }

    #[test]
    fn identity_gate_is_exact() {
        let psi = random_state(4, &RandomSource::new(1));
        let out = apply_two_qubit_gate(&psi, &identity4(), 3, 1).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn swap_permutes_01_to_10() {
        let mut swap = [[ZERO; 4]; 4];
        swap[0][0] = ONE;
        swap[1][2] = ONE;
        swap[2][1] = ONE;
        swap[3][3] = ONE;
        let psi = PureState::basis(2, 0b01).unwrap();
        let out = apply_two_qubit_gate(&psi, &swap, 0, 1).unwrap();
        assert_eq!(out, PureState::basis(2, 0b10).unwrap());
    }

    #[test]
    fn gate_then_adjoint_is_identity() {
        let src = RandomSource::new(2);
        for k in 0..20 {
            let psi = random_state(5, &src.split_path(&[0, k]));
            let u = haar4(&src.split_path(&[1, k]));
            let (i, j) = ((k % 5) as usize, ((k + 2) % 5) as usize);
            let once = apply_two_qubit_gate(&psi, &u, i, j).unwrap();
            let back = apply_two_qubit_gate(&once, &adjoint4(&u), i, j).unwrap();
            for (a, b) in back.amplitudes().iter().zip(psi.amplitudes()) {
                assert!((a - b).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn norm_preserved_over_many_pairs() {
        let src = RandomSource::new(3);
        for k in 0..10_000u64 {
            let n = 2 + (k % 4) as usize;
            let psi = random_state(n, &src.split_path(&[0, k]));
            let u = haar4(&src.split_path(&[1, k]));
            let i = (k as usize) % n;
            let j = (i + 1 + (k as usize / 7) % (n - 1)) % n;
            let out = apply_two_qubit_gate_checked(&psi, &u, i, j, false).unwrap();
            assert!((out.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn only_the_pair_bits_mix() {
        // gate on qubits (0, 2) of 3 must leave the qubit-1 bit alone
        let u = haar4(&RandomSource::new(4));
        let psi = PureState::basis(3, 0b010).unwrap();
        let out = apply_two_qubit_gate(&psi, &u, 0, 2).unwrap();
        for (idx, a) in out.amplitudes().iter().enumerate() {
            if idx & 0b010 == 0 {
                assert_eq!(*a, ZERO);
            }
        }
        // |q0 q2⟩ = |00⟩ column of U lands on |q0 1 q2⟩
        assert!((out.amplitudes()[0b010] - u[0][0]).norm() < 1e-15);
        assert!((out.amplitudes()[0b011] - u[1][0]).norm() < 1e-15);
        assert!((out.amplitudes()[0b110] - u[2][0]).norm() < 1e-15);
        assert!((out.amplitudes()[0b111] - u[3][0]).norm() < 1e-15);
    }

    #[test]
    fn charge_kernel_matches_dense() {
        let src = RandomSource::new(5);
        for k in 0..50 {
            let g = crate::gates::sample_u1_gate(&mut src.split(k).rng());
            assert_eq!(GateKernel::detect(g.matrix()), GateKernel::ChargeBlocks);
            let psi = random_state(6, &src.split_path(&[9, k]));
            let (i, j) = ((k % 6) as usize, ((k + 3) % 6) as usize);
            let mut a = psi.clone();
            let mut b = psi.clone();
            a.apply_in_place(g.matrix(), i, j, GateKernel::Dense).unwrap();
            b.apply_in_place(g.matrix(), i, j, GateKernel::ChargeBlocks).unwrap();
            for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
                assert!((x - y).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn bad_indices_rejected() {
        let psi = PureState::zeros(3).unwrap();
        assert!(matches!(apply_two_qubit_gate(&psi, &identity4(), 0, 3), Err(Error::QubitOutOfRange { index: 3, .. })));
        assert!(matches!(apply_two_qubit_gate(&psi, &identity4(), 1, 1), Err(Error::RepeatedQubit(1))));
        let mut bad = identity4();
        bad[0][0] = C64::new(2.0, 0.0);
        assert!(matches!(apply_two_qubit_gate_checked(&psi, &bad, 0, 1, true), Err(Error::NotUnitary(_))));
    }

    #[test]
    fn state_validation() {
        assert!(PureState::new(vec![ONE; 3]).is_err());
        assert!(PureState::new(vec![ONE, ONE]).is_err());
        assert!(PureState::new(vec![ONE, ZERO]).is_ok());
    }

    #[test]
    fn subsystem_validation_and_complement() {
        assert!(SubsystemSpec::new(vec![2, 1], 4).is_err());
        assert!(SubsystemSpec::new(vec![1, 1], 4).is_err());
        assert!(SubsystemSpec::new(vec![0, 4], 4).is_err());
        let a = SubsystemSpec::new(vec![0, 2], 5).unwrap();
        assert_eq!(a.complement().qubits(), &[1, 3, 4]);
        assert_eq!(a.complement().complement(), a);
    }
}
