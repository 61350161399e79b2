//! Entanglement asymmetry `ΔS = S(ρ_{A,Q}) − S(ρ_A)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use nalgebra::DMatrix;

use crate::density::{amplitude_matrix, checked_purity, entropy_of_matrix, frobenius_sqr, DensityMatrix};
use crate::error::{Error, Result};
use crate::sectors::SectorDecomposition;
use crate::state::{PureState, SubsystemSpec};
use crate::C64;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsymmetryKind {
    VonNeumann,
    Renyi2,
}

impl fmt::Display for AsymmetryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AsymmetryKind::VonNeumann => "von-neumann",
            AsymmetryKind::Renyi2 => "renyi2",
        })
    }
}

impl FromStr for AsymmetryKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "von-neumann" | "vonneumann" | "vn" => Ok(AsymmetryKind::VonNeumann),
            "renyi2" | "renyi-2" => Ok(AsymmetryKind::Renyi2),
            other => Err(Error::InvalidConfig(format!("unknown asymmetry kind '{other}'"))),
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryResult {
    /// `s_pruned − s_original`.
    pub delta: f64,
    pub s_pruned: f64,
    pub s_original: f64,
    /// `Tr ρ_A²`.
    pub purity_a: f64,
    /// `Tr ρ_{A,Q}²`.
    pub purity_aq: f64,
}

/// Asymmetry of `rho` with respect to `sectors`. Both states are handled in
/// the sector basis with the same entropy routine, so a block-diagonal input
/// gives exactly zero.
pub fn asymmetry(rho: &DensityMatrix, sectors: &SectorDecomposition, kind: AsymmetryKind) -> Result<AsymmetryResult> {
    sectors.check_dim(rho.dim())?;
    let original = sectors.to_sector_basis(rho.matrix());
    let pinched = sectors.mask(&original);
    let purity_a = checked_purity(frobenius_sqr(&original))?;
    let purity_aq = checked_purity(frobenius_sqr(&pinched))?;
    let (s_original, s_pruned) = match kind {
        AsymmetryKind::VonNeumann => (entropy_of_matrix(&original)?, entropy_of_matrix(&pinched)?),
        AsymmetryKind::Renyi2 => (-purity_a.ln(), -purity_aq.ln()),
    };
    Ok(AsymmetryResult { delta: s_pruned - s_original, s_pruned, s_original, purity_a, purity_aq })
}

/// `‖M M†‖²_F` through whichever Gram matrix is smaller.
fn gram_purity(m: &DMatrix<C64>) -> f64 {
    if m.nrows() <= m.ncols() {
        frobenius_sqr(&(m * m.adjoint()))
    } else {
        frobenius_sqr(&(m.adjoint() * m))
    }
}

/// Rényi-2 U(1) asymmetry of `Tr_Ā |ψ⟩⟨ψ|` without forming `ρ_A` when the
/// complement is smaller, which keeps `|A|` up to `N` affordable. Entropies
/// in the result are Rényi-2.
pub fn u1_renyi2_from_state(state: &PureState, keep: &SubsystemSpec) -> Result<AsymmetryResult> {
    let m = amplitude_matrix(state, keep)?;
    let a = keep.len();
    let purity_a = checked_purity(gram_purity(&m))?;
    let mut blocks = Vec::with_capacity(a + 1);
    for q in 0..=a as u32 {
        let rows: Vec<usize> = (0..m.nrows()).filter(|x| x.count_ones() == q).collect();
        blocks.push(gram_purity(&m.select_rows(&rows)));
    }
    let purity_aq = checked_purity(crate::oracle::binomial::pairwise_sum(&blocks))?;
    let (s_original, s_pruned) = (-purity_a.ln(), -purity_aq.ln());
    Ok(AsymmetryResult { delta: s_pruned - s_original, s_pruned, s_original, purity_a, purity_aq })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::partial_trace;
    use crate::gates::GateSymmetry;
    use crate::initial::{InitialKind, InitialStateSpec};
    use crate::sectors::{prune, u1_sectors};
    use crate::state::SubsystemSpec;
    use crate::test_support::random_density;
    use proptest::prelude::*;
    use std::f64::consts::{LN_2, PI};

    fn tilted_qubit(theta: f64) -> DensityMatrix {
        let state = InitialStateSpec::new(InitialKind::Ferro, theta).build(2).unwrap();
        partial_trace(&state, &SubsystemSpec::prefix(1, 2).unwrap()).unwrap()
    }

    #[test]
    fn untilted_is_symmetric() {
        let state = InitialStateSpec::new(InitialKind::Ferro, 0.0).build(6).unwrap();
        let rho = partial_trace(&state, &SubsystemSpec::prefix(3, 6).unwrap()).unwrap();
        let r = asymmetry(&rho, &u1_sectors(3).unwrap(), AsymmetryKind::VonNeumann).unwrap();
        assert_eq!(r.delta, 0.0);
    }

    #[test]
    fn maximally_tilted_qubit() {
        let rho = tilted_qubit(PI / 2.0);
        let s = u1_sectors(1).unwrap();
        let vn = asymmetry(&rho, &s, AsymmetryKind::VonNeumann).unwrap();
        assert!((vn.delta - LN_2).abs() < 1e-10);
        let r2 = asymmetry(&rho, &s, AsymmetryKind::Renyi2).unwrap();
        assert!((r2.delta - LN_2).abs() < 1e-12);
        assert!((r2.purity_a - 1.0).abs() < 1e-12 && (r2.purity_aq - 0.5).abs() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let rho = DensityMatrix::maximally_mixed(4);
        assert!(matches!(
            asymmetry(&rho, &u1_sectors(3).unwrap(), AsymmetryKind::Renyi2),
            Err(Error::DimensionMismatch { expected: 8, found: 4 })
        ));
    }

    #[test]
    fn kind_strings() {
        assert_eq!("renyi2".parse::<AsymmetryKind>().unwrap(), AsymmetryKind::Renyi2);
        assert_eq!("von-neumann".parse::<AsymmetryKind>().unwrap(), AsymmetryKind::VonNeumann);
        assert!("tsallis".parse::<AsymmetryKind>().is_err());
    }

    #[test]
    fn zero_iff_block_diagonal() {
        for sym in GateSymmetry::ALL {
            let s = SectorDecomposition::new(sym, 3).unwrap();
            for seed in 0..200 {
                let rho = random_density(8, seed);
                let off = s.off_block_weight(&s.to_sector_basis(rho.matrix()));
                let r = asymmetry(&rho, &s, AsymmetryKind::VonNeumann).unwrap();
                assert!(r.delta >= -1e-9);
                if sym != GateSymmetry::None {
                    assert!(off > 1e-9 && r.delta > 1e-9, "{sym} seed {seed}");
                }
                let pinched = prune(&rho, &s).unwrap();
                for kind in [AsymmetryKind::VonNeumann, AsymmetryKind::Renyi2] {
                    assert!(asymmetry(&pinched, &s, kind).unwrap().delta.abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn block_diagonal_gives_exact_zero() {
        let s = u1_sectors(3).unwrap();
        for seed in 0..50 {
            let pinched = prune(&random_density(8, seed), &s).unwrap();
            for kind in [AsymmetryKind::VonNeumann, AsymmetryKind::Renyi2] {
                assert_eq!(asymmetry(&pinched, &s, kind).unwrap().delta, 0.0);
            }
        }
    }

    #[test]
    fn nonnegative_over_random_states() {
        for sym in GateSymmetry::ALL {
            let s = SectorDecomposition::new(sym, 3).unwrap();
            for seed in 0..1000 {
                let rho = random_density(8, 7 * seed + sym as u64);
                for kind in [AsymmetryKind::VonNeumann, AsymmetryKind::Renyi2] {
                    let r = asymmetry(&rho, &s, kind).unwrap();
                    assert!(r.delta >= -1e-9);
                    assert!(r.purity_aq <= r.purity_a + 1e-12);
                    assert_eq!(r.delta, r.s_pruned - r.s_original);
                }
            }
        }
    }

    #[test]
    fn fast_u1_path_matches_dense() {
        use crate::circuit::{evolve_with, CircuitConfig, TranslationMode};
        let n = 8;
        let c = CircuitConfig::new(n, 6, GateSymmetry::U1, TranslationMode::Iid, 4).unwrap();
        let psi = InitialStateSpec::new(InitialKind::Ferro, 0.8).build(n).unwrap();
        let out = evolve_with(&psi, &c, &c.realization_source(0), &[], |_, _| Ok(())).unwrap();
        for a in 1..=n {
            let keep = SubsystemSpec::prefix(a, n).unwrap();
            let fast = u1_renyi2_from_state(&out, &keep).unwrap();
            let rho = partial_trace(&out, &keep).unwrap();
            let dense = asymmetry(&rho, &u1_sectors(a).unwrap(), AsymmetryKind::Renyi2).unwrap();
            assert!((fast.delta - dense.delta).abs() < 1e-12, "a={a}");
            assert!((fast.purity_a - dense.purity_a).abs() < 1e-12);
        }
        let whole = u1_renyi2_from_state(&psi, &SubsystemSpec::prefix(n, n).unwrap()).unwrap();
        let w = crate::initial::charge_weights(&psi);
        let expect = -w.iter().map(|x| x * x).sum::<f64>().ln();
        assert!((whole.delta - expect).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn tilted_qubit_renyi_matches_closed_form(theta in 0.0f64..PI) {
            let rho = tilted_qubit(theta);
            let r = asymmetry(&rho, &u1_sectors(1).unwrap(), AsymmetryKind::Renyi2).unwrap();
            let (s, c) = (theta / 2.0).sin_cos();
            let expect = -(c.powi(4) + s.powi(4)).ln();
            prop_assert!((r.delta - expect).abs() < 1e-12);
        }
    }
}
