use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::density::DensityMatrix;
use crate::rng::RandomSource;
use crate::C64;

/// Random density matrix `G G† / Tr` with rank cycling through `1..=dim`.
pub fn random_density(dim: usize, seed: u64) -> DensityMatrix {
    let mut rng = RandomSource::new(seed).split(0xde75).rng();
    let rank = 1 + (seed as usize % dim);
    let g = DMatrix::from_fn(dim, rank, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    });
    let m = &g * g.adjoint();
    let tr = m.trace();
    DensityMatrix::new(m / tr).expect("valid by construction")
}
