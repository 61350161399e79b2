//! Two-qubit gate ensembles: Haar, and Haar within the blocks fixed by a
//! U(1), Z₂, or SU(2) symmetry.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haar::sample_haar_unitary;
use crate::state::{adjoint4, identity4, matmul4, max_abs_diff4, unitarity_violation4, GateKernel, Matrix4, ONE, ZERO};
use crate::C64;

/// Tolerance used by [`verify_symmetry`].
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateSymmetry {
    None,
    U1,
    Z2,
    SU2,
}

impl GateSymmetry {
    pub const ALL: [GateSymmetry; 4] = [GateSymmetry::None, GateSymmetry::U1, GateSymmetry::Z2, GateSymmetry::SU2];

    pub fn as_str(self) -> &'static str {
        match self {
            GateSymmetry::None => "none",
            GateSymmetry::U1 => "u1",
            GateSymmetry::Z2 => "z2",
            GateSymmetry::SU2 => "su2",
        }
    }
}

impl fmt::Display for GateSymmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GateSymmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(GateSymmetry::None),
            "u1" => Ok(GateSymmetry::U1),
            "z2" => Ok(GateSymmetry::Z2),
            "su2" => Ok(GateSymmetry::SU2),
            other => Err(Error::InvalidConfig(format!("unknown symmetry '{other}' (none|u1|z2|su2)"))),
        }
    }
}

/// A 4×4 unitary tagged with the symmetry it is meant to respect.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoQubitGate {
    matrix: Matrix4,
    symmetry: GateSymmetry,
    kernel: GateKernel,
}

impl TwoQubitGate {
    pub fn new(matrix: Matrix4, symmetry: GateSymmetry) -> Self {
        let kernel = GateKernel::detect(&matrix);
        Self { matrix, symmetry, kernel }
    }

    pub fn identity(symmetry: GateSymmetry) -> Self {
        Self::new(identity4(), symmetry)
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.matrix
    }

    pub fn symmetry(&self) -> GateSymmetry {
        self.symmetry
    }

    pub fn kernel(&self) -> GateKernel {
        self.kernel
    }

    pub fn adjoint(&self) -> Self {
        Self::new(adjoint4(&self.matrix), self.symmetry)
    }
}

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn phase<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    sample_haar_unitary(1, rng).expect("dim 1")[(0, 0)]
}

/// Fixed orthogonal map from the computational basis to the X⊗X eigenbasis
/// `(|00⟩+|11⟩, |01⟩+|10⟩, |01⟩−|10⟩, |00⟩−|11⟩)/√2`; the first two rows
/// span the +1 eigenspace.
pub fn z2_transform() -> Matrix4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [[c(h), ZERO, ZERO, c(h)], [ZERO, c(h), c(h), ZERO], [ZERO, c(h), c(-h), ZERO], [c(h), ZERO, ZERO, c(-h)]]
}

/// Two-qubit Haar unitary.
pub fn sample_haar_gate<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitGate {
    let u = sample_haar_unitary(4, rng).expect("dim 4");
    let mut m = [[ZERO; 4]; 4];
    for (r, row) in m.iter_mut().enumerate() {
        for (col, entry) in row.iter_mut().enumerate() {
            *entry = u[(r, col)];
        }
    }
    TwoQubitGate::new(m, GateSymmetry::None)
}

/// Charge-conserving gate: a Haar phase on `|00⟩`, a 2×2 Haar block on
/// `{|01⟩, |10⟩}`, and a Haar phase on `|11⟩`.
pub fn sample_u1_gate<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitGate {
    let p0 = phase(rng);
    let block = sample_haar_unitary(2, rng).expect("dim 2");
    let p2 = phase(rng);
    let mut m = [[ZERO; 4]; 4];
    m[0][0] = p0;
    m[1][1] = block[(0, 0)];
    m[1][2] = block[(0, 1)];
    m[2][1] = block[(1, 0)];
    m[2][2] = block[(1, 1)];
    m[3][3] = p2;
    TwoQubitGate::new(m, GateSymmetry::U1)
}

/// `T† diag(U₊, U₋) T` with [`z2_transform`] as `T`.
pub fn z2_gate_from_blocks(u_plus: &[[C64; 2]; 2], u_minus: &[[C64; 2]; 2]) -> TwoQubitGate {
    let mut d = [[ZERO; 4]; 4];
    for r in 0..2 {
        for col in 0..2 {
            d[r][col] = u_plus[r][col];
            d[r + 2][col + 2] = u_minus[r][col];
        }
    }
    let t = z2_transform();
    TwoQubitGate::new(matmul4(&adjoint4(&t), &matmul4(&d, &t)), GateSymmetry::Z2)
}

/// Parity-conserving gate with independent U(2) Haar blocks on the ±1
/// eigenspaces of X⊗X.
pub fn sample_z2_gate<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitGate {
    let to2 = |u: nalgebra::DMatrix<C64>| [[u[(0, 0)], u[(0, 1)]], [u[(1, 0)], u[(1, 1)]]];
    let plus = to2(sample_haar_unitary(2, rng).expect("dim 2"));
    let minus = to2(sample_haar_unitary(2, rng).expect("dim 2"));
    z2_gate_from_blocks(&plus, &minus)
}

/// Projector onto the two-qubit singlet `(|01⟩ − |10⟩)/√2`.
pub fn singlet_projector() -> Matrix4 {
    let mut m = [[ZERO; 4]; 4];
    m[1][1] = c(0.5);
    m[1][2] = c(-0.5);
    m[2][1] = c(-0.5);
    m[2][2] = c(0.5);
    m
}

/// `e^{iφ_s} Π_singlet + e^{iφ_t} Π_triplet`.
pub fn su2_gate_from_phases(phi_singlet: f64, phi_triplet: f64) -> TwoQubitGate {
    let ps = C64::from_polar(1.0, phi_singlet);
    let pt = C64::from_polar(1.0, phi_triplet);
    let s = singlet_projector();
    let id = identity4();
    let mut m = [[ZERO; 4]; 4];
    for r in 0..4 {
        for col in 0..4 {
            m[r][col] = ps * s[r][col] + pt * (id[r][col] - s[r][col]);
        }
    }
    TwoQubitGate::new(m, GateSymmetry::SU2)
}

/// SU(2)-invariant gate. Both two-qubit irreps (singlet, triplet) occur
/// once, so the commutant is spanned by the two isotypic projectors and
/// the gate is fixed by two uniform phases.
pub fn sample_su2_gate<R: Rng + ?Sized>(rng: &mut R) -> TwoQubitGate {
    let tau = std::f64::consts::TAU;
    let phi_s = rng.random::<f64>() * tau;
    let phi_t = rng.random::<f64>() * tau;
    su2_gate_from_phases(phi_s, phi_t)
}

pub fn sample_gate<R: Rng + ?Sized>(symmetry: GateSymmetry, rng: &mut R) -> TwoQubitGate {
    match symmetry {
        GateSymmetry::None => sample_haar_gate(rng),
        GateSymmetry::U1 => sample_u1_gate(rng),
        GateSymmetry::Z2 => sample_z2_gate(rng),
        GateSymmetry::SU2 => sample_su2_gate(rng),
    }
}

fn pauli_x() -> [[C64; 2]; 2] {
    [[ZERO, ONE], [ONE, ZERO]]
}

fn pauli_y() -> [[C64; 2]; 2] {
    [[ZERO, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), ZERO]]
}

fn pauli_z() -> [[C64; 2]; 2] {
    [[ONE, ZERO], [ZERO, -ONE]]
}

fn eye2() -> [[C64; 2]; 2] {
    [[ONE, ZERO], [ZERO, ONE]]
}

/// Kronecker product `a ⊗ b` (a acts on the first qubit).
pub fn kron2(a: &[[C64; 2]; 2], b: &[[C64; 2]; 2]) -> Matrix4 {
    let mut m = [[ZERO; 4]; 4];
    for (r1, row_a) in a.iter().enumerate() {
        for (c1, &x) in row_a.iter().enumerate() {
            for (r2, row_b) in b.iter().enumerate() {
                for (c2, &y) in row_b.iter().enumerate() {
                    m[2 * r1 + r2][2 * c1 + c2] = x * y;
                }
            }
        }
    }
    m
}

fn add4(a: &Matrix4, b: &Matrix4) -> Matrix4 {
    let mut m = *a;
    for r in 0..4 {
        for col in 0..4 {
            m[r][col] += b[r][col];
        }
    }
    m
}

/// Generators whose commutators with a gate certify `symmetry`.
pub fn symmetry_generators(symmetry: GateSymmetry) -> Vec<Matrix4> {
    let total = |p: [[C64; 2]; 2]| add4(&kron2(&p, &eye2()), &kron2(&eye2(), &p));
    match symmetry {
        GateSymmetry::None => vec![],
        GateSymmetry::U1 => vec![total(pauli_z())],
        GateSymmetry::Z2 => vec![kron2(&pauli_x(), &pauli_x())],
        GateSymmetry::SU2 => vec![total(pauli_x()), total(pauli_y()), total(pauli_z())],
    }
}

/// max entry of |[A, B]|.
pub fn commutator_norm(a: &Matrix4, b: &Matrix4) -> f64 {
    max_abs_diff4(&matmul4(a, b), &matmul4(b, a))
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct SymmetryCheck {
    pub ok: bool,
    /// Largest of the unitarity defect and all generator commutators.
    pub max_violation: f64,
}

/// Checks unitarity and commutation with the generators of the declared
/// symmetry, each within [`SYMMETRY_TOL`].
pub fn verify_symmetry(gate: &TwoQubitGate) -> SymmetryCheck {
    let mut worst = unitarity_violation4(gate.matrix());
    for g in symmetry_generators(gate.symmetry()) {
        worst = worst.max(commutator_norm(gate.matrix(), &g));
    }
    SymmetryCheck { ok: worst < SYMMETRY_TOL, max_violation: worst }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RandomSource;

    fn apply(m: &Matrix4, v: &[C64; 4]) -> [C64; 4] {
        let mut out = [ZERO; 4];
        for r in 0..4 {
            out[r] = (0..4).map(|k| m[r][k] * v[k]).sum();
        }
        out
    }

    #[test]
    fn symmetry_strings() {
        for s in GateSymmetry::ALL {
            assert_eq!(s.as_str().parse::<GateSymmetry>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.as_str()));
        }
        assert!("u2".parse::<GateSymmetry>().is_err());
    }

    #[test]
    fn u1_gate_structure() {
        let src = RandomSource::new(1);
        for k in 0..200 {
            let g = sample_u1_gate(&mut src.split(k).rng());
            assert_eq!(g.matrix()[0][1], ZERO);
            assert!(commutator_norm(g.matrix(), &symmetry_generators(GateSymmetry::U1)[0]) < 1e-12);
            let out = apply(g.matrix(), &[ONE, ZERO, ZERO, ZERO]);
            assert!((out[0].norm() - 1.0).abs() < 1e-12);
            assert!(verify_symmetry(&g).ok);
        }
    }

    #[test]
    fn z2_transform_is_orthogonal() {
        let t = z2_transform();
        assert!(max_abs_diff4(&matmul4(&adjoint4(&t), &t), &identity4()) < 1e-15);
    }

    #[test]
    fn z2_identity_blocks_give_identity() {
        let i2 = [[ONE, ZERO], [ZERO, ONE]];
        let g = z2_gate_from_blocks(&i2, &i2);
        assert!(max_abs_diff4(g.matrix(), &identity4()) < 1e-15);
    }

    #[test]
    fn z2_gate_commutes_with_xx() {
        let src = RandomSource::new(2);
        let xx = kron2(&pauli_x(), &pauli_x());
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus_vecs = [[c(h), ZERO, ZERO, c(h)], [ZERO, c(h), c(h), ZERO]];
        for k in 0..200 {
            let g = sample_z2_gate(&mut src.split(k).rng());
            assert!(commutator_norm(g.matrix(), &xx) < 1e-10);
            assert!(verify_symmetry(&g).ok);
            // +1 eigenvectors stay in the +1 eigenspace
            for v in &plus_vecs {
                let w = apply(g.matrix(), v);
                let xw = apply(&xx, &w);
                let dev = (0..4).map(|i| (xw[i] - w[i]).norm()).fold(0.0, f64::max);
                assert!(dev < 1e-10);
            }
        }
    }

    #[test]
    fn su2_gate_structure() {
        let src = RandomSource::new(3);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let singlet = [ZERO, c(h), c(-h), ZERO];
        for k in 0..200 {
            let g = sample_su2_gate(&mut src.split(k).rng());
            assert!(verify_symmetry(&g).max_violation < 1e-12);
            for gen in symmetry_generators(GateSymmetry::SU2) {
                assert!(commutator_norm(g.matrix(), &gen) < 1e-12);
            }
            let w = apply(g.matrix(), &singlet);
            let lambda = w[1] / singlet[1];
            assert!((lambda.norm() - 1.0).abs() < 1e-12);
            for i in 0..4 {
                assert!((w[i] - lambda * singlet[i]).norm() < 1e-12);
            }
            assert_eq!(g.kernel(), GateKernel::ChargeBlocks);
        }
        let id = su2_gate_from_phases(0.0, 0.0);
        assert!(max_abs_diff4(id.matrix(), &identity4()) < 1e-15);
    }

    #[test]
    fn haar_gate_declared_u1_fails() {
        let src = RandomSource::new(4);
        for k in 0..100 {
            let g = sample_haar_gate(&mut src.split(k).rng());
            let lie = TwoQubitGate::new(*g.matrix(), GateSymmetry::U1);
            let check = verify_symmetry(&lie);
            assert!(!check.ok);
            assert!(check.max_violation > 1e-3);
        }
    }

    #[test]
    fn identity_passes_every_symmetry() {
        for s in GateSymmetry::ALL {
            assert!(verify_symmetry(&TwoQubitGate::identity(s)).ok);
        }
    }

    #[test]
    fn all_samplers_unitary() {
        let src = RandomSource::new(5);
        for s in GateSymmetry::ALL {
            for k in 0..2_500u64 {
                let g = sample_gate(s, &mut src.split_path(&[s as u64, k]).rng());
                assert!(unitarity_violation4(g.matrix()) < 1e-10);
            }
        }
    }

    #[test]
    fn deterministic_given_stream() {
        for s in GateSymmetry::ALL {
            let a = sample_gate(s, &mut RandomSource::new(6).split(1).rng());
            let b = sample_gate(s, &mut RandomSource::new(6).split(1).rng());
            assert_eq!(a, b);
        }
    }

    /// E[U ⊗ U*] on the charge-1 block equals the dim-2 Haar first moment
    /// |Φ⟩⟨Φ| / 2 with |Φ⟩ = Σ_k |kk⟩.
    #[test]
    fn u1_middle_block_first_moment() {
        let src = RandomSource::new(7);
        let shots = 10_000;
        let mut acc = [[ZERO; 4]; 4];
        for k in 0..shots {
            let g = sample_u1_gate(&mut src.split(k).rng());
            let m = g.matrix();
            let b = [[m[1][1], m[1][2]], [m[2][1], m[2][2]]];
            for (r, row) in acc.iter_mut().enumerate() {
                for (col, entry) in row.iter_mut().enumerate() {
                    *entry += b[r / 2][col / 2] * b[r % 2][col % 2].conj();
                }
            }
        }
        for (r, row) in acc.iter().enumerate() {
            for (col, entry) in row.iter().enumerate() {
                let mean = entry / shots as f64;
                let phi_r = r == 0 || r == 3;
                let phi_c = col == 0 || col == 3;
                let expect = if phi_r && phi_c { 0.5 } else { 0.0 };
                assert!((mean - c(expect)).norm() < 0.02, "({r},{col}) {mean}");
            }
        }
    }
}
