//! Binary dumps of subsystem density matrices.
//!
//! Layout (all integers and floats little-endian):
//!
//! ```text
//! magic      8 bytes  b"MPRHODMP"
//! version    u32      1
//! dim        u64
//! symmetry   u8       0 none, 1 u1, 2 z2, 3 su2
//! basis      u8       0 computational, 1 sector basis
//! sectors    u32      number of sector labels
//! labels     sectors × (i32, i32, u64)   encoded label and sector dimension
//! entries    dim² × (f64 re, f64 im)     row-major
//! ```
//!
//! Basis indices follow the library convention: qubit 0 is the most
//! significant bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gates::GateSymmetry;
use crate::sectors::{SectorDecomposition, SectorLabel};
use crate::C64;

pub const MAGIC: &[u8; 8] = b"MPRHODMP";
pub const VERSION: u32 = 1;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum DumpBasis {
    Computational,
    Sector,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityDump {
    pub symmetry: GateSymmetry,
    pub basis: DumpBasis,
    pub sectors: Vec<(SectorLabel, usize)>,
    pub matrix: DMatrix<C64>,
}

impl DensityDump {
    pub fn new(matrix: DMatrix<C64>, sectors: &SectorDecomposition, basis: DumpBasis) -> Result<Self> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), found: matrix.ncols() });
        }
        sectors.check_dim(matrix.nrows())?;
        let symmetry = sectors.symmetry();
        let sectors = sectors.labels().into_iter().zip(sectors.sector_dims()).collect();
        Ok(Self { symmetry, basis, sectors, matrix })
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let dim = self.matrix.nrows();
        let mut out = Vec::with_capacity(32 + self.sectors.len() * 16 + dim * dim * 16);
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(dim as u64).to_le_bytes());
        out.push(symmetry_code(self.symmetry));
        out.push(match self.basis {
            DumpBasis::Computational => 0,
            DumpBasis::Sector => 1,
        });
        out.extend_from_slice(&(self.sectors.len() as u32).to_le_bytes());
        for (label, size) in &self.sectors {
            let (x, y) = label.encode();
            out.extend_from_slice(&x.to_le_bytes());
            out.extend_from_slice(&y.to_le_bytes());
            out.extend_from_slice(&(*size as u64).to_le_bytes());
        }
        for r in 0..dim {
            for c in 0..dim {
                let z = self.matrix[(r, c)];
                out.extend_from_slice(&z.re.to_le_bytes());
                out.extend_from_slice(&z.im.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut cur = Cursor { bytes, pos: 0 };
        if cur.take(8)? != MAGIC {
            return Err(Error::MalformedDump("bad magic".into()));
        }
        let version = u32::from_le_bytes(cur.array()?);
        if version != VERSION {
            return Err(Error::MalformedDump(format!("unsupported version {version}")));
        }
        let dim = u64::from_le_bytes(cur.array()?) as usize;
        let symmetry = match cur.take(1)?[0] {
            0 => GateSymmetry::None,
            1 => GateSymmetry::U1,
            2 => GateSymmetry::Z2,
            3 => GateSymmetry::SU2,
            other => return Err(Error::MalformedDump(format!("unknown symmetry code {other}"))),
        };
        let basis = match cur.take(1)?[0] {
            0 => DumpBasis::Computational,
            1 => DumpBasis::Sector,
            other => return Err(Error::MalformedDump(format!("unknown basis code {other}"))),
        };
        let count = u32::from_le_bytes(cur.array()?) as usize;
        let mut sectors = Vec::with_capacity(count.min(1 << 16));
        for _ in 0..count {
            let x = i32::from_le_bytes(cur.array()?);
            let y = i32::from_le_bytes(cur.array()?);
            let size = u64::from_le_bytes(cur.array()?) as usize;
            sectors.push((SectorLabel::decode(symmetry, (x, y))?, size));
        }
        if sectors.iter().map(|s| s.1).sum::<usize>() != dim {
            return Err(Error::MalformedDump("sector dimensions do not add up".into()));
        }
        let expected = dim.checked_mul(dim).and_then(|d| d.checked_mul(16));
        if expected != Some(bytes.len() - cur.pos) {
            return Err(Error::MalformedDump(format!("expected {dim}x{dim} complex entries")));
        }
        let mut matrix = DMatrix::<C64>::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                let re = f64::from_le_bytes(cur.array()?);
                let im = f64::from_le_bytes(cur.array()?);
                matrix[(r, c)] = C64::new(re, im);
            }
        }
        Ok(Self { symmetry, basis, sectors, matrix })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(&self.to_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut bytes = Vec::new();
        BufReader::new(file).read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

fn symmetry_code(s: GateSymmetry) -> u8 {
    match s {
        GateSymmetry::None => 0,
        GateSymmetry::U1 => 1,
        GateSymmetry::Z2 => 2,
        GateSymmetry::SU2 => 3,
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::MalformedDump("truncated file".into()))?;
        let out = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn array<const K: usize>(&mut self) -> Result<[u8; K]> {
        Ok(self.take(K)?.try_into().expect("length checked"))
    }
}
