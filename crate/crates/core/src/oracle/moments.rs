//! Late-time second moments of Haar and U(1)-symmetric global unitaries.

use nalgebra::DMatrix;
use num_bigint::BigUint;

use super::binomial::{binomial_exact, log_sum_exp, LogFactorials};
use crate::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::C64;

const WEIGHT_TOL: f64 = 1e-10;

/// `k · ln x` with `0 · ln 0 = 0`.
fn k_ln(k: usize, ln_x: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * ln_x
    }
}

/// `ln(1 + e^y)` without overflow.
fn ln_1p_exp(y: f64) -> f64 {
    if y > 0.0 {
        y + (-y).exp().ln_1p()
    } else {
        y.exp().ln_1p()
    }
}

/// `(ln cos²(θ/2), ln sin²(θ/2))`.
pub fn ln_tilt_factors(theta: f64) -> (f64, f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    (2.0 * c.abs().ln(), 2.0 * s.abs().ln())
}

fn ln_f_with(lf: &LogFactorials, q: usize, p: usize, a: usize, b: usize) -> f64 {
    let lo = q.saturating_sub(b).max(p.saturating_sub(b));
    let hi = q.min(p).min(a);
    if lo > hi {
        return f64::NEG_INFINITY;
    }
    let terms: Vec<f64> =
        (lo..=hi).map(|k| lf.ln_binomial(b, q - k) + lf.ln_binomial(b, p - k) + lf.ln_binomial(a, k)).collect();
    log_sum_exp(&terms)
}

/// `ln f(q, p, a, b)`, `-inf` for an empty range.
pub fn ln_f_coeff(q: usize, p: usize, a: usize, b: usize) -> f64 {
    let lf = LogFactorials::new(a + b);
    ln_f_with(&lf, q, p, a, b)
}

/// `f(q, p, a, b) = Σ_{q'} C(b, q−q') C(b, p−q') C(a, q')`.
pub fn f_coeff(q: usize, p: usize, a: usize, b: usize) -> f64 {
    ln_f_coeff(q, p, a, b).exp()
}

/// Big-integer `f(q, p, a, b)`.
pub fn f_coeff_exact(q: usize, p: usize, a: usize, b: usize) -> BigUint {
    let lo = q.saturating_sub(b).max(p.saturating_sub(b));
    let hi = q.min(p).min(a);
    let mut acc = BigUint::ZERO;
    if lo > hi {
        return acc;
    }
    for k in lo..=hi {
        acc += binomial_exact(b, q - k) * binomial_exact(b, p - k) * binomial_exact(a, k);
    }
    acc
}

/// Average purities of `ρ_A` and of its charge-pinched version.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PurityPair {
    pub purity_a: f64,
    pub purity_aq: f64,
    /// `ln(purity_a / purity_aq)`, evaluated from the non-negative gap so
    /// that it is never negative.
    pub renyi2_asymmetry: f64,
}

/// Initial-state data entering the U(1) second moment.
#[derive(Clone, Debug, PartialEq)]
pub enum ChargeWeights {
    /// Tilted ferromagnet at angle θ.
    Ferro(f64),
    /// `w_q = Tr(ρ₀ Π_q)` for `q = 0..=N`.
    General(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct LateTimeQuery {
    pub n: usize,
    pub a: usize,
    pub weights: ChargeWeights,
}

impl LateTimeQuery {
    pub fn ferro(n: usize, a: usize, theta: f64) -> Self {
        Self { n, a, weights: ChargeWeights::Ferro(theta) }
    }

    pub fn with_weights(n: usize, a: usize, weights: Vec<f64>) -> Self {
        Self { n, a, weights: ChargeWeights::General(weights) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.a > self.n {
            return Err(Error::InvalidConfig(format!("need 0 <= a <= N and N >= 1, got N={}, a={}", self.n, self.a)));
        }
        match &self.weights {
            ChargeWeights::Ferro(theta) if !theta.is_finite() => {
                Err(Error::InvalidConfig(format!("theta must be finite, got {theta}")))
            }
            ChargeWeights::Ferro(_) => Ok(()),
            ChargeWeights::General(w) => validate_weights(w, self.n),
        }
    }
}

pub fn validate_weights(w: &[f64], n: usize) -> Result<()> {
    if w.len() != n + 1 {
        return Err(Error::InvalidWeights(format!("expected {} weights, found {}", n + 1, w.len())));
    }
    if let Some(bad) = w.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::InvalidWeights(format!("weight {bad} is not a nonnegative number")));
    }
    let total = super::binomial::pairwise_sum(w);
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

/// θ-independent tables for the U(1) late-time purities at fixed `(N, |A|)`.
#[derive(Clone, Debug)]
pub struct U1SecondMoment {
    n: usize,
    a: usize,
    ln_r: Vec<f64>,
    ln_r_plus_1: Vec<f64>,
    /// `ln f(q,p,a,b)`, row-major `(N+1)²`.
    ln_f_ab: Vec<f64>,
    /// `ln f(q,p,b,a)`.
    ln_f_ba: Vec<f64>,
}

impl U1SecondMoment {
    pub fn new(n: usize, a: usize) -> Result<Self> {
        if n == 0 || a > n {
            return Err(Error::InvalidConfig(format!("need 0 <= a <= N and N >= 1, got N={n}, a={a}")));
        }
        let b = n - a;
        let lf = LogFactorials::new(n);
        let ln_r: Vec<f64> = (0..=n).map(|q| lf.ln_binomial(n, q)).collect();
        let ln_r_plus_1 = ln_r.iter().map(|&l| l + (-l).exp().ln_1p()).collect();
        let m = n + 1;
        let mut ln_f_ab = vec![0.0; m * m];
        let mut ln_f_ba = vec![0.0; m * m];
        for q in 0..m {
            for p in 0..m {
                ln_f_ab[q * m + p] = ln_f_with(&lf, q, p, a, b);
                ln_f_ba[q * m + p] = ln_f_with(&lf, q, p, b, a);
            }
        }
        Ok(Self { n, a, ln_r, ln_r_plus_1, ln_f_ab, ln_f_ba })
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn subsystem_size(&self) -> usize {
        self.a
    }

    /// Purities for a tilted ferromagnet, using `w_q / r_q = c^{2(N−q)} s^{2q}`.
    pub fn ferro(&self, theta: f64) -> PurityPair {
        let (lc, ls) = ln_tilt_factors(theta);
        let ln_w_over_r: Vec<f64> = (0..=self.n).map(|q| k_ln(self.n - q, lc) + k_ln(q, ls)).collect();
        self.purities_from_ln_w_over_r(&ln_w_over_r)
    }

    /// Purities for arbitrary charge weights.
    pub fn weights(&self, w: &[f64]) -> Result<PurityPair> {
        validate_weights(w, self.n)?;
        let ln_w_over_r: Vec<f64> = w.iter().zip(&self.ln_r).map(|(&x, &lr)| x.ln() - lr).collect();
        Ok(self.purities_from_ln_w_over_r(&ln_w_over_r))
    }

    fn purities_from_ln_w_over_r(&self, lw: &[f64]) -> PurityPair {
        let m = self.n + 1;
        let mut common = Vec::with_capacity(m * m + m);
        let mut gap = Vec::with_capacity(m * m);
        for q in 0..m {
            if lw[q] == f64::NEG_INFINITY {
                continue;
            }
            for p in 0..m {
                if p == q || lw[p] == f64::NEG_INFINITY {
                    continue;
                }
                let pair = lw[q] + lw[p];
                common.push(pair + self.ln_f_ab[q * m + p]);
                gap.push(pair + self.ln_f_ba[q * m + p]);
            }
            // w_q² / (r_q (r_q + 1)) = (w_q/r_q)² · r_q / (r_q + 1)
            let diag = 2.0 * lw[q] + self.ln_r[q] - self.ln_r_plus_1[q];
            common.push(diag + self.ln_f_ab[q * m + q]);
            common.push(diag + self.ln_f_ba[q * m + q]);
        }
        let ln_aq = log_sum_exp(&common);
        let ln_gap = log_sum_exp(&gap);
        let ln_a = log_sum_exp(&[ln_aq, ln_gap]);
        let renyi2_asymmetry = if ln_gap == f64::NEG_INFINITY { 0.0 } else { ln_1p_exp(ln_gap - ln_aq) };
        PurityPair { purity_a: ln_a.exp(), purity_aq: ln_aq.exp(), renyi2_asymmetry }
    }
}

pub fn u1_late_purities(query: &LateTimeQuery) -> Result<PurityPair> {
    query.validate()?;
    let moments = U1SecondMoment::new(query.n, query.a)?;
    match &query.weights {
        ChargeWeights::Ferro(theta) => Ok(moments.ferro(*theta)),
        ChargeWeights::General(w) => moments.weights(w),
    }
}

/// `ln(𝔼[Tr ρ_A²] / 𝔼[Tr ρ_{A,Q}²])`.
pub fn u1_late_asymmetry_exact(query: &LateTimeQuery) -> Result<f64> {
    Ok(u1_late_purities(query)?.renyi2_asymmetry)
}

/// Exact and large-|A| forms of the Haar late-time Rényi-2 asymmetry.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct NonSymmetricLate {
    pub exact: f64,
    pub stirling: f64,
}

/// `ln(1 + B^{2a−N}) − ln(1 + B^{2a−N}/√(πa))` with `B = e^{ln_base}`; zero at `a = 0`.
fn late_form(ln_base: f64, n: usize, a: usize) -> f64 {
    if a == 0 {
        return 0.0;
    }
    let x = (2.0 * a as f64 - n as f64) * ln_base;
    ln_1p_exp(x) - ln_1p_exp(x - 0.5 * (std::f64::consts::PI * a as f64).ln())
}

/// Haar late-time asymmetry, `−ln[(1 + C(2a,a)/2^N) / (1 + 2^{2a−N})]`,
/// together with its Stirling approximation.
pub fn nonsym_late_asymmetry(n: usize, a: usize) -> Result<NonSymmetricLate> {
    if a > n {
        return Err(Error::InvalidConfig(format!("need a <= N, got N={n}, a={a}")));
    }
    let ln2 = std::f64::consts::LN_2;
    let lf = LogFactorials::new(2 * a);
    let exact = ln_1p_exp((2.0 * a as f64 - n as f64) * ln2) - ln_1p_exp(lf.ln_binomial(2 * a, a) - n as f64 * ln2);
    Ok(NonSymmetricLate { exact: exact.max(0.0), stirling: late_form(ln2, n, a) })
}

/// `ln g(θ) = ln 2 − ½ ln²(tan²(θ/2))`.
pub fn ln_gaussian_base(theta: f64) -> f64 {
    let (lc, ls) = ln_tilt_factors(theta);
    let l = ls - lc;
    std::f64::consts::LN_2 - 0.5 * l * l
}

#[derive(Copy, Clone, Debug, PartialEq)]
pub struct GaussianLate {
    pub value: f64,
    /// `g(θ) ≥ 1`, i.e. `|θ − π/2| ≲ 0.177π`.
    pub valid: bool,
}

/// Gaussian large-N approximation of the U(1) late-time asymmetry.
pub fn u1_late_asymmetry_gaussian(n: usize, a: usize, theta: f64) -> Result<GaussianLate> {
    if a > n {
        return Err(Error::InvalidConfig(format!("need a <= N, got N={n}, a={a}")));
    }
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::InvalidConfig(format!("theta must lie in (0, pi), got {theta}")));
    }
    let ln_g = ln_gaussian_base(theta);
    Ok(GaussianLate { value: late_form(ln_g, n, a), valid: ln_g >= 0.0 })
}

/// Diagonal of `𝔼[ρ_A]` indexed by the popcount `q'` of the subsystem basis
/// state, for arbitrary charge weights: `Σ_q (w_q/r_q) C(N−a, q−q')`.
pub fn first_moment_diagonal_weights(n: usize, a: usize, w: &[f64]) -> Result<Vec<f64>> {
    if n == 0 || a > n {
        return Err(Error::InvalidConfig(format!("need 0 <= a <= N and N >= 1, got N={n}, a={a}")));
    }
    validate_weights(w, n)?;
    let b = n - a;
    let lf = LogFactorials::new(n);
    Ok((0..=a)
        .map(|qp| {
            let terms: Vec<f64> =
                (qp..=qp + b).map(|q| w[q].ln() - lf.ln_binomial(n, q) + lf.ln_binomial(b, q - qp)).collect();
            log_sum_exp(&terms).exp()
        })
        .collect())
}

/// Diagonal of `𝔼[ρ_A]` for the tilted ferromagnet by popcount `q'`:
/// `cos^{2(a−q')}(θ/2) sin^{2q'}(θ/2)`.
pub fn first_moment_diagonal(a: usize, theta: f64) -> Vec<f64> {
    let (lc, ls) = ln_tilt_factors(theta);
    (0..=a).map(|qp| (k_ln(a - qp, lc) + k_ln(qp, ls)).exp()).collect()
}

/// Late-time ensemble-averaged reduced state of the tilted ferromagnet,
/// diagonal in the computational basis.
pub fn averaged_rho_a_first_order(n: usize, a: usize, theta: f64) -> Result<DensityMatrix> {
    if a == 0 || a > n {
        return Err(Error::InvalidSubsystem(format!("need 1 <= a <= N, got N={n}, a={a}")));
    }
    if a > 20 {
        return Err(Error::InvalidSubsystem(format!("dense 2^{a} matrix requested")));
    }
    let per_q = first_moment_diagonal(a, theta);
    let dim = 1usize << a;
    let diag: Vec<C64> = (0..dim).map(|x| C64::new(per_q[x.count_ones() as usize], 0.0)).collect();
    DensityMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag)))
}
