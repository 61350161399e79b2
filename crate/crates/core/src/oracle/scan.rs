//! Scans of the U(1) late-time asymmetry over the tilt angle.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::moments::U1SecondMoment;
use crate::error::{Error, Result};

/// Coarsest grid spacing accepted by [`theta_scan`].
pub const MAX_SPACING: f64 = 0.002 * PI;

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![lo],
        _ => (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect(),
    }
}

/// Grid on `[0, π/2]` with spacing `resolution` (rounded down to fit).
pub fn half_pi_grid(resolution: f64) -> Vec<f64> {
    let steps = (0.5 * PI / resolution).ceil() as usize;
    uniform_grid(0.0, 0.5 * PI, steps + 1)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ThetaScan {
    pub n: usize,
    pub a: usize,
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub theta_max: f64,
    pub theta_c: f64,
    pub peak: f64,
    /// False when the curve rises again after its maximum (or dips before
    /// it) by more than a relative `1e-9` of the peak.
    pub unimodal: bool,
}

/// Subsystem size `round(fraction · N)`.
pub fn subsystem_from_fraction(n: usize, fraction: f64) -> Result<usize> {
    let a = (fraction * n as f64).round();
    if !(0.0..=n as f64).contains(&a) {
        return Err(Error::InvalidConfig(format!("a_fraction {fraction} out of range")));
    }
    Ok(a as usize)
}

/// Rényi-2 late-time asymmetry of the tilted ferromagnet on `grid`, its
/// argmax `θ_max` (ties to the smaller angle), and `θ_c = 2 θ_max`.
pub fn theta_scan(n: usize, a_fraction: f64, grid: &[f64]) -> Result<ThetaScan> {
    if grid.is_empty() {
        return Err(Error::InvalidConfig("empty theta grid".into()));
    }
    if grid
        .windows(2)
        .any(|w| w[0].is_nan() || w[1].is_nan() || w[1] <= w[0] || w[1] - w[0] > MAX_SPACING * (1.0 + 1e-9))
    {
        return Err(Error::InvalidConfig(format!("theta grid must increase with spacing <= {MAX_SPACING}")));
    }
    let a = subsystem_from_fraction(n, a_fraction)?;
    let moments = U1SecondMoment::new(n, a)?;
    let values: Vec<f64> = grid.par_iter().map(|&t| moments.ferro(t).renyi2_asymmetry).collect();
    let mut best = 0;
    for (k, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = k;
        }
    }
    let peak = values[best];
    let tol = 1e-9 * peak.abs();
    let rising = values[..=best].windows(2).all(|w| w[1] >= w[0] - tol);
    let falling = values[best..].windows(2).all(|w| w[1] <= w[0] + tol);
    Ok(ThetaScan {
        n,
        a,
        thetas: grid.to_vec(),
        values,
        theta_max: grid[best],
        theta_c: 2.0 * grid[best],
        peak,
        unimodal: rising && falling,
    })
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct PowerLawFit {
    /// Prefactor `c` in `y = c · x^{−γ}`.
    pub prefactor: f64,
    pub exponent: f64,
}

/// Least-squares fit of `ln y = ln c − γ ln x`.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<PowerLawFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidConfig("power-law fit needs at least two paired points".into()));
    }
    if xs.iter().chain(ys).any(|&v| v.is_nan() || v <= 0.0) {
        return Err(Error::InvalidConfig("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("power-law fit needs distinct x values".into()));
    }
    let slope = sxy / sxx;
    Ok(PowerLawFit { prefactor: (my - slope * mx).exp(), exponent: -slope })
}
