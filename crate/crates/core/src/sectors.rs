//! Symmetry-sector decompositions of a subsystem Hilbert space.
//!
//! A decomposition is an orthonormal "sector basis" (the columns of `U₀`,
//! or the computational basis when `U₀ = I`) together with a partition of
//! its columns into sectors. Pinching keeps only matrix elements whose row
//! and column fall in the same sector.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::cg::coupled_basis;
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::gates::GateSymmetry;
use crate::state::ZERO;
use crate::C64;

/// Largest subsystem for which dense sector bases are built.
pub const MAX_SUBSYSTEM: usize = 12;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SectorLabel {
    /// The whole space (no symmetry).
    All,
    /// Number of `|1⟩` sites.
    Charge(u32),
    /// Eigenvalue of `∏ σˣ`.
    Parity(i8),
    /// Doubled `(J, J_z)`.
    Spin { two_j: u32, two_m: i32 },
}

impl fmt::Display for SectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            SectorLabel::All => write!(f, "all"),
            SectorLabel::Charge(q) => write!(f, "q={q}"),
            SectorLabel::Parity(p) => write!(f, "parity={p:+}"),
            SectorLabel::Spin { two_j, two_m } => write!(f, "J={}/2,Jz={}/2", two_j, two_m),
        }
    }
}

impl SectorLabel {
    /// Two integers identifying the label in binary dumps.
    pub fn encode(&self) -> (i32, i32) {
        match *self {
            SectorLabel::All => (0, 0),
            SectorLabel::Charge(q) => (q as i32, 0),
            SectorLabel::Parity(p) => (p as i32, 0),
            SectorLabel::Spin { two_j, two_m } => (two_j as i32, two_m),
        }
    }

    pub fn decode(symmetry: GateSymmetry, pair: (i32, i32)) -> Result<Self> {
        let bad = || Error::MalformedDump(format!("invalid sector label {pair:?} for {symmetry}"));
        match symmetry {
            GateSymmetry::None => Ok(SectorLabel::All),
            GateSymmetry::U1 => u32::try_from(pair.0).map(SectorLabel::Charge).map_err(|_| bad()),
            GateSymmetry::Z2 => match pair.0 {
                1 => Ok(SectorLabel::Parity(1)),
                -1 => Ok(SectorLabel::Parity(-1)),
                _ => Err(bad()),
            },
            GateSymmetry::SU2 => {
                let two_j = u32::try_from(pair.0).map_err(|_| bad())?;
                Ok(SectorLabel::Spin { two_j, two_m: pair.1 })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sector {
    pub label: SectorLabel,
    /// Columns of the sector basis spanning this sector.
    pub columns: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SectorDecomposition {
    symmetry: GateSymmetry,
    size: usize,
    /// `U₀`; `None` means the computational basis.
    basis: Option<DMatrix<C64>>,
    sectors: Vec<Sector>,
    /// Sector index of every basis column.
    assignment: Vec<usize>,
}

impl SectorDecomposition {
    pub fn new(symmetry: GateSymmetry, size: usize) -> Result<Self> {
        match symmetry {
            GateSymmetry::None => trivial_sectors(size),
            GateSymmetry::U1 => u1_sectors(size),
            GateSymmetry::Z2 => z2_sectors(size),
            GateSymmetry::SU2 => su2_sectors(size),
        }
    }

    fn from_parts(symmetry: GateSymmetry, size: usize, basis: Option<DMatrix<C64>>, sectors: Vec<Sector>) -> Self {
        let mut assignment = vec![usize::MAX; 1 << size];
        for (s, sector) in sectors.iter().enumerate() {
            for &c in &sector.columns {
                assignment[c] = s;
            }
        }
        debug_assert!(assignment.iter().all(|&s| s != usize::MAX));
        Self { symmetry, size, basis, sectors, assignment }
    }

    pub fn symmetry(&self) -> GateSymmetry {
        self.symmetry
    }

    /// Number of sites `|A|`.
    pub fn size(&self) -> usize {
        self.size
    }

    pub fn dim(&self) -> usize {
        1 << self.size
    }

    pub fn sectors(&self) -> &[Sector] {
        &self.sectors
    }

    pub fn labels(&self) -> Vec<SectorLabel> {
        self.sectors.iter().map(|s| s.label).collect()
    }

    pub fn sector_dims(&self) -> Vec<usize> {
        self.sectors.iter().map(|s| s.columns.len()).collect()
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    /// `U₀`, or `None` for the computational basis.
    pub fn basis(&self) -> Option<&DMatrix<C64>> {
        self.basis.as_ref()
    }

    /// `U₀` as a dense matrix.
    pub fn basis_matrix(&self) -> DMatrix<C64> {
        self.basis.clone().unwrap_or_else(|| DMatrix::identity(self.dim(), self.dim()))
    }

    /// Projectors `Π_s` in the computational basis.
    pub fn projectors(&self) -> Vec<DMatrix<C64>> {
        let u = self.basis_matrix();
        self.sectors
            .iter()
            .map(|s| {
                let cols = u.select_columns(&s.columns);
                &cols * cols.adjoint()
            })
            .collect()
    }

    /// `U₀† M U₀`.
    pub fn to_sector_basis(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.basis {
            None => m.clone(),
            Some(u) => u.adjoint() * m * u,
        }
    }

    /// `U₀ M U₀†`.
    pub fn from_sector_basis(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        match &self.basis {
            None => m.clone(),
            Some(u) => u * m * u.adjoint(),
        }
    }

    /// Zero every element of a sector-basis matrix that couples two sectors.
    pub fn mask(&self, m: &DMatrix<C64>) -> DMatrix<C64> {
        let mut out = m.clone();
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if self.assignment[r] != self.assignment[c] {
                    out[(r, c)] = ZERO;
                }
            }
        }
        out
    }

    /// `Σ |M_rc|²` over inter-sector elements of a sector-basis matrix.
    pub fn off_block_weight(&self, m: &DMatrix<C64>) -> f64 {
        let mut acc = 0.0;
        for c in 0..m.ncols() {
            for r in 0..m.nrows() {
                if self.assignment[r] != self.assignment[c] {
                    acc += m[(r, c)].norm_sqr();
                }
            }
        }
        acc
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if dim != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: dim });
        }
        Ok(())
    }
}

fn check_size(size: usize) -> Result<()> {
    if size == 0 || size > MAX_SUBSYSTEM {
        return Err(Error::InvalidSubsystem(format!(
            "sector decomposition needs 1 <= |A| <= {MAX_SUBSYSTEM}, got {size}"
        )));
    }
    Ok(())
}

fn trivial_sectors(size: usize) -> Result<SectorDecomposition> {
    check_size(size)?;
    let sector = Sector { label: SectorLabel::All, columns: (0..1 << size).collect() };
    Ok(SectorDecomposition::from_parts(GateSymmetry::None, size, None, vec![sector]))
}

/// Charge sectors `q = 0..=|A|` by popcount; `U₀ = I`.
pub fn u1_sectors(size: usize) -> Result<SectorDecomposition> {
    check_size(size)?;
    let sectors = (0..=size as u32)
        .map(|q| Sector {
            label: SectorLabel::Charge(q),
            columns: (0..1usize << size).filter(|x| x.count_ones() == q).collect(),
        })
        .collect();
    Ok(SectorDecomposition::from_parts(GateSymmetry::U1, size, None, sectors))
}

/// `±1` eigenspaces of `∏ σˣ`, spanned by `|±⟩` product strings.
pub fn z2_sectors(size: usize) -> Result<SectorDecomposition> {
    check_size(size)?;
    let dim = 1usize << size;
    let norm = (dim as f64).sqrt().recip();
    let basis = DMatrix::from_fn(dim, dim, |x, b| {
        let sign = if (x & b).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
        C64::new(sign * norm, 0.0)
    });
    let even =
        Sector { label: SectorLabel::Parity(1), columns: (0..dim).filter(|b| b.count_ones() % 2 == 0).collect() };
    let odd =
        Sector { label: SectorLabel::Parity(-1), columns: (0..dim).filter(|b| b.count_ones() % 2 == 1).collect() };
    Ok(SectorDecomposition::from_parts(GateSymmetry::Z2, size, Some(basis), vec![even, odd]))
}

/// `(J, J_z)` sectors of the left-to-right coupled basis, ordered by `J`
/// descending then `J_z` ascending; multiplicity copies share a sector.
pub fn su2_sectors(size: usize) -> Result<SectorDecomposition> {
    check_size(size)?;
    let mut states = coupled_basis(size);
    states.sort_by(|u, v| v.two_j.cmp(&u.two_j).then(u.two_m.cmp(&v.two_m)).then(u.path.cmp(&v.path)));
    let dim = 1usize << size;
    let basis = DMatrix::from_fn(dim, dim, |x, c| C64::new(states[c].vector[x], 0.0));
    let mut sectors: Vec<Sector> = Vec::new();
    for (c, s) in states.iter().enumerate() {
        let label = SectorLabel::Spin { two_j: s.two_j, two_m: s.two_m };
        match sectors.last_mut() {
            Some(last) if last.label == label => last.columns.push(c),
            _ => sectors.push(Sector { label, columns: vec![c] }),
        }
    }
    Ok(SectorDecomposition::from_parts(GateSymmetry::SU2, size, Some(basis), sectors))
}

/// `ρ_{A,Q} = Σ_s Π_s ρ Π_s`, returned in the computational basis.
pub fn prune(rho: &DensityMatrix, sectors: &SectorDecomposition) -> Result<DensityMatrix> {
    sectors.check_dim(rho.dim())?;
    let pinched = sectors.mask(&sectors.to_sector_basis(rho.matrix()));
    DensityMatrix::from_matrix_unchecked(sectors.from_sector_basis(&pinched))
}
