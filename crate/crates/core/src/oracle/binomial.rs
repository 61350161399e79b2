//! Log-domain binomial arithmetic and stable summation.

use num_bigint::BigUint;
use num_traits::One;

/// Pairwise (cascade) summation; error grows as O(log n) instead of O(n).
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const BLOCK: usize = 16;
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `ln Σ exp(xs)` with the maximum factored out and the shifted terms
/// summed pairwise. Returns `-inf` for an empty slice or all `-inf` terms.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let shifted: Vec<f64> = xs.iter().map(|&x| (x - max).exp()).collect();
    max + pairwise_sum(&shifted).ln()
}

/// Table of `ln k!` for `k = 0..=n`, accumulated from `ln k` sums.
#[derive(Clone, Debug)]
pub struct LogFactorials {
    table: Vec<f64>,
}

impl LogFactorials {
    pub fn new(n: usize) -> Self {
        let mut table = Vec::with_capacity(n + 1);
        let mut acc = 0.0f64;
        table.push(0.0);
        for k in 1..=n {
            acc += (k as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    pub fn max_n(&self) -> usize {
        self.table.len() - 1
    }

    pub fn ln_factorial(&self, k: usize) -> f64 {
        self.table[k]
    }

    /// `ln C(n, k)`, `-inf` when `k > n`.
    pub fn ln_binomial(&self, n: usize, k: usize) -> f64 {
        if k > n {
            return f64::NEG_INFINITY;
        }
        self.table[n] - self.table[k] - self.table[n - k]
    }
}

/// `ln C(n, k)` without a precomputed table.
pub fn ln_binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    let terms: Vec<f64> = (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).collect();
    pairwise_sum(&terms)
}

/// Exact `C(n, k)`; zero when `k > n`.
pub fn binomial_exact(n: usize, k: usize) -> BigUint {
    if k > n {
        return BigUint::ZERO;
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= BigUint::from(n - i);
        acc /= BigUint::from(i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_binomials() {
        let lf = LogFactorials::new(10);
        assert_eq!(binomial_exact(4, 2), BigUint::from(6u32));
        assert_eq!(binomial_exact(3, 5), BigUint::ZERO);
        assert!((lf.ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-13);
        assert!((ln_binomial(10, 3) - 120f64.ln()).abs() < 1e-13);
        assert_eq!(lf.ln_binomial(2, 3), f64::NEG_INFINITY);
    }

    #[test]
    fn large_binomial_matches_exact() {
        let exact = binomial_exact(200, 100).to_string();
        // 9.054851465610328e58
        let digits = exact.len() as f64 - 1.0;
        let mantissa: f64 = format!("{}.{}", &exact[..1], &exact[1..16]).parse().unwrap();
        let ln_exact = mantissa.ln() + digits * std::f64::consts::LN_10;
        let lf = LogFactorials::new(200);
        assert!((lf.ln_binomial(200, 100) - ln_exact).abs() / ln_exact < 1e-13);
        assert!((ln_binomial(200, 100) - ln_exact).abs() / ln_exact < 1e-13);
    }

    #[test]
    fn lse_basics() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]), f64::NEG_INFINITY);
        assert!((log_sum_exp(&[0.0, 0.0]) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn pairwise_sum_is_accurate() {
        let xs = vec![0.1; 1_000_000];
        assert!((pairwise_sum(&xs) - 100_000.0).abs() < 1e-8);
    }
}
