//! Haar-distributed unitaries via QR of a Ginibre matrix.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::C64;

/// Draws a `dim × dim` unitary from the Haar measure.
///
/// A matrix of i.i.d. complex standard normals is QR-factorized and each
/// column of Q is rescaled by the phase of the matching diagonal entry of R,
/// which removes the phase bias of Householder QR.
pub fn sample_haar_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<DMatrix<C64>> {
    if dim == 0 {
        return Err(Error::InvalidConfig("Haar unitary dimension must be at least 1".into()));
    }
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    let mut ginibre = DMatrix::<C64>::zeros(dim, dim);
    // row-major fill so the draw order does not depend on storage layout
    for r in 0..dim {
        for c in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            ginibre[(r, c)] = C64::new(re * scale, im * scale);
        }
    }
    if dim == 1 {
        let z = ginibre[(0, 0)];
        return Ok(DMatrix::from_element(1, 1, z / z.norm()));
    }
    let qr = ginibre.qr();
    let r = qr.r();
    let mut q = qr.q();
    for c in 0..dim {
        let d = r[(c, c)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { C64::new(1.0, 0.0) };
        for row in 0..dim {
            q[(row, c)] *= phase;
        }
    }
    Ok(q)
}

/// max |U†U − I| over entries.
pub fn unitarity_violation(u: &DMatrix<C64>) -> f64 {
    let n = u.nrows();
    let g = u.adjoint() * u;
    (g - DMatrix::<C64>::identity(n, n)).iter().map(|z| z.norm()).fold(0.0, f64::max)
}
