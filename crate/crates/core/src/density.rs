//! Reduced density matrices and entropy functionals (natural log).

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::state::{PureState, SubsystemSpec};
use crate::C64;

const HERMITIAN_TOL: f64 = 1e-10;
const TRACE_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-9;
/// Eigenvalues below this are treated as exact zeros.
pub const EIGEN_CLAMP: f64 = 1e-12;
/// Eigenvalues below this mean the matrix is not a state.
pub const EIGEN_CORRUPT: f64 = -1e-6;

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, trace, and (numerical) positivity.
    pub fn new(entries: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(entries)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Only the shape is checked.
    pub fn from_matrix_unchecked(entries: DMatrix<C64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::DimensionMismatch { expected: entries.nrows(), found: entries.ncols() });
        }
        Ok(Self { entries })
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        let d = nalgebra::DVector::from_iterator(diag.len(), diag.iter().map(|&x| C64::new(x, 0.0)));
        Self::new(DMatrix::from_diagonal(&d))
    }

    /// |ψ⟩⟨ψ|
    pub fn from_pure(state: &PureState) -> Self {
        let v = nalgebra::DVector::from_column_slice(state.amplitudes());
        Self { entries: &v * v.adjoint() }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { entries: DMatrix::identity(dim, dim) / C64::new(dim as f64, 0.0) }
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.entries;
        let n = m.nrows();
        let mut herm: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                herm = herm.max((m[(r, c)] - m[(c, r)].conj()).norm());
            }
        }
        if herm > HERMITIAN_TOL {
            return Err(Error::CorruptedDensity(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::CorruptedDensity(format!("trace {tr} != 1")));
        }
        let min = self.eigenvalues().iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -PSD_TOL {
            return Err(Error::CorruptedDensity(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.entries)
    }

    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        (&self.entries - &other.entries).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let mut ev: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().cloned().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

/// ρ_A = Tr_Ā |ψ⟩⟨ψ|. The first listed qubit of `keep` is the most
/// significant bit of the reduced basis.
pub fn partial_trace(state: &PureState, keep: &SubsystemSpec) -> Result<DensityMatrix> {
    Ok(DensityMatrix { entries: reduced_matrix(state, keep)? })
}

pub(crate) fn reduced_matrix(state: &PureState, keep: &SubsystemSpec) -> Result<DMatrix<C64>> {
    let m = amplitude_matrix(state, keep)?;
    Ok(&m * m.adjoint())
}

/// `M[x, e] = ψ(x ⊕ e)` with `x` running over `keep` and `e` over its
/// complement, so that `ρ_A = M M†`.
pub(crate) fn amplitude_matrix(state: &PureState, keep: &SubsystemSpec) -> Result<DMatrix<C64>> {
    if keep.is_empty() {
        return Err(Error::InvalidSubsystem("cannot keep an empty subsystem".into()));
    }
    if keep.num_qubits() != state.num_qubits() {
        return Err(Error::DimensionMismatch { expected: state.num_qubits(), found: keep.num_qubits() });
    }
    let env = keep.complement();
    let kept_offsets = scatter_offsets(state, keep.qubits());
    let env_offsets = scatter_offsets(state, env.qubits());
    let amps = state.amplitudes();
    let (da, de) = (kept_offsets.len(), env_offsets.len());
    // columns of M^T are contiguous in nalgebra's column-major layout
    let mut m = DMatrix::<C64>::zeros(da, de);
    for (e, &eo) in env_offsets.iter().enumerate() {
        for (x, &xo) in kept_offsets.iter().enumerate() {
            m[(x, e)] = amps[xo | eo];
        }
    }
    Ok(m)
}

/// Global basis offsets for every assignment of `qubits` (first qubit most
/// significant).
fn scatter_offsets(state: &PureState, qubits: &[usize]) -> Vec<usize> {
    let k = qubits.len();
    let masks: Vec<usize> = qubits.iter().map(|&q| state.qubit_mask(q)).collect();
    (0..1usize << k)
        .map(|local| {
            masks.iter().enumerate().filter(|(pos, _)| local >> (k - 1 - pos) & 1 == 1).fold(0, |acc, (_, &m)| acc | m)
        })
        .collect()
}

/// S = −Σ λ ln λ with eigenvalues below [`EIGEN_CLAMP`] dropped.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of_matrix(rho.matrix())
}

pub(crate) fn entropy_of_matrix(m: &DMatrix<C64>) -> Result<f64> {
    let ev = hermitian_eigenvalues(m);
    entropy_of_spectrum(&ev)
}

pub(crate) fn entropy_of_spectrum(ev: &[f64]) -> Result<f64> {
    let mut terms = Vec::with_capacity(ev.len());
    for &lambda in ev {
        if lambda < EIGEN_CORRUPT {
            return Err(Error::CorruptedDensity(format!("eigenvalue {lambda:e}")));
        }
        if lambda > EIGEN_CLAMP {
            terms.push(-lambda * lambda.ln());
        }
    }
    Ok(crate::oracle::binomial::pairwise_sum(&terms))
}

/// Tr ρ², computed as the squared Frobenius norm.
pub fn purity(rho: &DensityMatrix) -> f64 {
    frobenius_sqr(rho.matrix())
}

pub(crate) fn frobenius_sqr(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub(crate) fn checked_purity(p: f64) -> Result<f64> {
    if !(p > 0.0 && p <= 1.0 + 1e-9) {
        return Err(Error::CorruptedDensity(format!("purity {p} outside (0, 1]")));
    }
    Ok(p)
}

/// S₂ = −ln Tr ρ².
pub fn renyi2_entropy(rho: &DensityMatrix) -> Result<f64> {
    Ok(-checked_purity(purity(rho))?.ln())
}
