//! Clebsch–Gordan coefficients and the sequentially coupled spin-½ basis.
//!
//! Angular momenta are passed doubled (`two_j = 2j`) so that half-integers
//! stay exact. Phases follow the Condon–Shortley convention.

use crate::oracle::binomial::{binomial_exact, LogFactorials};

fn parity_ok(a: i64, b: i64) -> bool {
    (a + b) % 2 == 0
}

/// `⟨j1 m1; j2 m2 | J M⟩` via the Racah formula, all arguments doubled.
pub fn clebsch_gordan(two_j1: i64, two_m1: i64, two_j2: i64, two_m2: i64, two_j: i64, two_m: i64) -> f64 {
    if two_m1 + two_m2 != two_m
        || two_m1.abs() > two_j1
        || two_m2.abs() > two_j2
        || two_m.abs() > two_j
        || two_j > two_j1 + two_j2
        || two_j < (two_j1 - two_j2).abs()
        || !parity_ok(two_j1 + two_j2, two_j)
        || !parity_ok(two_j1, two_m1)
        || !parity_ok(two_j2, two_m2)
        || !parity_ok(two_j, two_m)
    {
        return 0.0;
    }
    let h = |x: i64| -> usize { (x / 2) as usize };
    let lf = LogFactorials::new(h(two_j1 + two_j2 + two_j) + 1);
    let f = |x: i64| lf.ln_factorial(h(x));
    let ln_pref = 0.5
        * (((two_j + 1) as f64).ln()
            + f(two_j + two_j1 - two_j2)
            + f(two_j - two_j1 + two_j2)
            + f(two_j1 + two_j2 - two_j)
            - f(two_j1 + two_j2 + two_j + 2)
            + f(two_j + two_m)
            + f(two_j - two_m)
            + f(two_j1 - two_m1)
            + f(two_j1 + two_m1)
            + f(two_j2 - two_m2)
            + f(two_j2 + two_m2));
    // k runs over integers keeping every factorial argument nonnegative
    let d =
        [two_j1 + two_j2 - two_j, two_j1 - two_m1, two_j2 + two_m2, two_j - two_j2 + two_m1, two_j - two_j1 - two_m2];
    let k_min = 0.max(-d[3] / 2).max(-d[4] / 2);
    let k_max = (d[0] / 2).min(d[1] / 2).min(d[2] / 2);
    let mut sum = 0.0;
    for k in k_min..=k_max {
        let tk = 2 * k;
        let ln_den = f(tk) + f(d[0] - tk) + f(d[1] - tk) + f(d[2] - tk) + f(d[3] + tk) + f(d[4] + tk);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * (ln_pref - ln_den).exp();
    }
    sum
}

/// A vector of the coupled basis of `n` spin-½ sites.
#[derive(Clone, Debug, PartialEq)]
pub struct CoupledState {
    /// Doubled total spin after coupling each successive site.
    pub path: Vec<u32>,
    pub two_j: u32,
    pub two_m: i32,
    /// Real components in the computational basis (site 0 most significant,
    /// `|0⟩` = spin up).
    pub vector: Vec<f64>,
}

/// Basis obtained by coupling sites left to right, `((s₀ ⊗ s₁) ⊗ s₂) ⊗ …`.
pub fn coupled_basis(n: usize) -> Vec<CoupledState> {
    let mut states = vec![CoupledState { path: vec![], two_j: 0, two_m: 0, vector: vec![1.0] }];
    for _ in 0..n {
        let mut next = Vec::with_capacity(states.len() * 2);
        let dim = states[0].vector.len() * 2;
        // group the previous level into multiplets by path
        let mut paths: Vec<Vec<u32>> = states.iter().map(|s| s.path.clone()).collect();
        paths.dedup();
        for path in paths {
            let members: Vec<&CoupledState> = states.iter().filter(|s| s.path == path).collect();
            let tj = members[0].two_j as i64;
            for tj_new in [tj + 1, tj - 1] {
                if tj_new < 0 {
                    continue;
                }
                for tm_new in (-tj_new..=tj_new).step_by(2) {
                    let mut v = vec![0.0; dim];
                    for s in &members {
                        for (bit, tm_site) in [(0usize, 1i64), (1usize, -1i64)] {
                            let coeff = clebsch_gordan(tj, s.two_m as i64, 1, tm_site, tj_new, tm_new);
                            if coeff == 0.0 {
                                continue;
                            }
                            for (x, &amp) in s.vector.iter().enumerate() {
                                v[2 * x + bit] += coeff * amp;
                            }
                        }
                    }
                    let mut p = path.clone();
                    p.push(tj_new as u32);
                    next.push(CoupledState { path: p, two_j: tj_new as u32, two_m: tm_new as i32, vector: v });
                }
            }
        }
        states = next;
    }
    states
}

/// Multiplicity of total spin `J = two_j / 2` among `n` spin-½ sites,
/// `C(n, n/2 − J) − C(n, n/2 − J − 1)`.
pub fn spin_multiplicity(n: usize, two_j: usize) -> u64 {
    if two_j > n || (n - two_j) % 2 != 0 {
        return 0;
    }
    let k = (n - two_j) / 2;
    let hi = binomial_exact(n, k);
    let lo = if k == 0 { 0u32.into() } else { binomial_exact(n, k - 1) };
    u64::try_from(hi - lo).expect("multiplicity fits in u64")
}
