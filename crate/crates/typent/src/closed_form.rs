//! Closed-form reference values for ensemble-averaged purities and entropy
//! bounds, used to cross-validate the exact and Monte Carlo engines.
//!
//! All logarithms are natural; display conversions to other bases belong to
//! the CLI layer.

use crate::error::{Error, Result};

/// Parameters of the analytic models.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct ModelParams {
    /// Local dimension.
    pub d: u32,
    /// Circuit depth (number of iterations).
    pub k: u32,
    /// Boundary fraction q = |dA| / |E|.
    pub q: f64,
}

impl ModelParams {
    pub fn new(d: u32, k: u32, q: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::invalid(format!("local dimension {d} < 2")));
        }
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::invalid(format!("boundary fraction {q} not in [0,1]")));
        }
        Ok(ModelParams { d, k, q })
    }
}

// Local copy of N_d = d/(d^2+1) so the reference formulas share no code
// path with the algebra engine they validate.
fn nd_constant(d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::invalid(format!("local dimension {d} < 2")));
    }
    let d = d as f64;
    Ok(d / (d * d + 1.0))
}

/// Average purity of one qudit after a single Haar gate: 2 N_d = 2d/(d^2+1).
pub fn single_edge_purity(d: u32) -> Result<f64> {
    Ok(2.0 * nd_constant(d)?)
}

/// Dimension of the symmetric subspace of two copies of a d^2-dimensional
/// space: d^2 (d^2 + 1) / 2.
pub fn symmetric_subspace_dim(d: u32) -> Result<u64> {
    if d < 2 {
        return Err(Error::invalid(format!("local dimension {d} < 2")));
    }
    let d2 = (d as u64) * (d as u64);
    Ok(d2 * (d2 + 1) / 2)
}

/// Average entangling power of a Haar two-qudit gate: (d-1)^2 / (d^2 + 1).
pub fn entangling_power(d: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::invalid(format!("local dimension {d} < 2")));
    }
    let d = d as f64;
    Ok((d - 1.0) * (d - 1.0) / (d * d + 1.0))
}

/// Random-edge model purity approximation (1 - q (1 - 2 N_d))^k.
/// Exact at k = 1.
pub fn random_edge_purity(p: ModelParams) -> Result<f64> {
    let nd = nd_constant(p.d)?;
    Ok((1.0 - p.q * (1.0 - 2.0 * nd)).powi(p.k as i32))
}

/// Lower bound on the average 2-Renyi entropy in the random-edge model:
/// k q times the average entangling power.
pub fn random_edge_entropy_bound(p: ModelParams) -> Result<f64> {
    Ok(p.k as f64 * p.q * entangling_power(p.d)?)
}

/// Exact average purity of the least-entangling depth-k chain sweep,
/// sum over m of 2 C(k+m-1, m) N_d^(k+m); valid for k < L_A.
pub fn chain_purity_exact(k: u32, d: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("chain purity needs k >= 1"));
    }
    let nd = nd_constant(d)?;
    if k <= 50 {
        let mut sum = 0.0f64;
        for m in 0..k {
            sum += 2.0 * binomial(k + m - 1, m) * nd.powi((k + m) as i32);
        }
        Ok(sum)
    } else {
        // log-space to dodge binomial overflow at large depth
        let ln_nd = nd.ln();
        let mut sum = 0.0f64;
        for m in 0..k {
            let ln_term =
                std::f64::consts::LN_2 + ln_binomial(k + m - 1, m) + (k + m) as f64 * ln_nd;
            sum += ln_term.exp();
        }
        Ok(sum)
    }
}

/// As [`chain_purity_exact`] with the sum truncated after `terms` summands;
/// `terms >= k` reproduces the full sum.
pub fn chain_purity_truncated(k: u32, d: u32, terms: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("chain purity needs k >= 1"));
    }
    let nd = nd_constant(d)?;
    let ln_nd = nd.ln();
    let mut sum = 0.0f64;
    for m in 0..k.min(terms) {
        let ln_term = std::f64::consts::LN_2 + ln_binomial(k + m - 1, m) + (k + m) as f64 * ln_nd;
        sum += ln_term.exp();
    }
    Ok(sum)
}

/// Large-k asymptotic of the chain purity: 2 [N_d / (1 - N_d)]^k.
pub fn chain_purity_large_k(k: u32, d: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("chain purity needs k >= 1"));
    }
    let nd = nd_constant(d)?;
    Ok(2.0 * (nd / (1.0 - nd)).powi(k as i32))
}

/// Volume-law entropy lower bound k log((1 - N_d)/N_d) - log 2, equal to
/// -log of [`chain_purity_large_k`]. May be negative at small k, d.
pub fn chain_entropy_bound(k: u32, d: u32) -> Result<f64> {
    if k < 1 {
        return Err(Error::invalid("entropy bound needs k >= 1"));
    }
    let nd = nd_constant(d)?;
    Ok(k as f64 * ((1.0 - nd) / nd).ln() - std::f64::consts::LN_2)
}

/// Conjectured infinite-depth chain purity
/// (d^(2L - L_A) + d^(L + L_A)) / (d^L (d^L + 1)).
pub fn chain_asymptotic_purity(d: u32, l: u32, l_a: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::invalid(format!("local dimension {d} < 2")));
    }
    if l_a < 1 || l_a >= l {
        return Err(Error::invalid(format!("need 1 <= L_A < L, got L_A={l_a}, L={l}")));
    }
    let d = d as f64;
    let (l, l_a) = (l as f64, l_a as f64);
    let num = d.powf(2.0 * l - l_a) + d.powf(l + l_a);
    let den = d.powf(l) * (d.powf(l) + 1.0);
    Ok(num / den)
}

/// Large-L approximation of the asymptotic purity: d^(-L_A) + d^(L_A - L).
pub fn chain_asymptotic_purity_large_l(d: u32, l: u32, l_a: u32) -> Result<f64> {
    if d < 2 {
        return Err(Error::invalid(format!("local dimension {d} < 2")));
    }
    if l_a < 1 || l_a >= l {
        return Err(Error::invalid(format!("need 1 <= L_A < L, got L_A={l_a}, L={l}")));
    }
    let d = d as f64;
    Ok(d.powi(-(l_a as i32)) + d.powi(l_a as i32 - l as i32))
}

fn binomial(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    let k = k.min(n - k);
    let mut acc = 1.0f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc
}

fn ln_binomial(n: u32, k: u32) -> f64 {
    debug_assert!(k <= n);
    ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n as u64).map(|i| (i as f64).ln()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn single_edge_values() {
        assert!(close(single_edge_purity(2).unwrap(), 0.8, 1e-15));
        assert!(close(single_edge_purity(3).unwrap(), 0.6, 1e-15));
        // d^3 / d_+ route agrees for d in 2..10
        for d in 2..=10u32 {
            let direct = single_edge_purity(d).unwrap();
            let via_dim = (d as f64).powi(3) / symmetric_subspace_dim(d).unwrap() as f64;
            assert!(close(direct, via_dim, 1e-15), "d = {d}");
        }
    }

    #[test]
    fn symmetric_dim_values() {
        assert_eq!(symmetric_subspace_dim(2).unwrap(), 10);
        assert_eq!(symmetric_subspace_dim(3).unwrap(), 45);
        // m(m+1)/2 with m = d^2
        for d in 2..=8u64 {
            let m = d * d;
            assert_eq!(symmetric_subspace_dim(d as u32).unwrap(), m * (m + 1) / 2);
        }
    }

    #[test]
    fn entangling_power_values() {
        assert!(close(entangling_power(2).unwrap(), 0.2, 1e-15));
        assert!(close(entangling_power(3).unwrap(), 0.4, 1e-15));
        for d in 2..=12 {
            let sum = entangling_power(d).unwrap() + single_edge_purity(d).unwrap();
            assert!(close(sum, 1.0, 1e-14), "d = {d}");
        }
    }

    #[test]
    fn random_edge_values() {
        let p = ModelParams::new(2, 1, 0.1).unwrap();
        assert!(close(random_edge_purity(p).unwrap(), 0.98, 1e-15));

        let p = ModelParams::new(2, 0, 0.3).unwrap();
        assert!(close(random_edge_purity(p).unwrap(), 1.0, 0.0));

        for k in 0..5 {
            let p = ModelParams::new(3, k, 0.0).unwrap();
            assert!(close(random_edge_purity(p).unwrap(), 1.0, 0.0));
        }

        // strictly decreasing in k for q in (0,1]
        let mut prev = 1.0;
        for k in 1..10 {
            let p = ModelParams::new(2, k, 0.25).unwrap();
            let val = random_edge_purity(p).unwrap();
            assert!(val < prev);
            prev = val;
        }
    }

    #[test]
    fn random_edge_bound_values() {
        let p = ModelParams::new(2, 10, 0.1).unwrap();
        assert!(close(random_edge_entropy_bound(p).unwrap(), 0.2, 1e-15));
        let p = ModelParams::new(2, 0, 0.1).unwrap();
        assert!(close(random_edge_entropy_bound(p).unwrap(), 0.0, 0.0));
        // linear in k
        let b1 = random_edge_entropy_bound(ModelParams::new(3, 1, 0.2).unwrap()).unwrap();
        let b7 = random_edge_entropy_bound(ModelParams::new(3, 7, 0.2).unwrap()).unwrap();
        assert!(close(b7, 7.0 * b1, 1e-14));
    }

    #[test]
    fn chain_exact_values() {
        assert!(close(chain_purity_exact(1, 2).unwrap(), 0.8, 1e-15));
        // 2 N_d^2 + 4 N_d^3 at d = 2
        assert!(close(chain_purity_exact(2, 2).unwrap(), 0.576, 1e-15));
        // 2 (0.064 + 3*0.0256 + 6*0.01024)
        assert!(close(chain_purity_exact(3, 2).unwrap(), 0.40448, 1e-15));
    }

    #[test]
    fn chain_exact_log_space_matches_direct() {
        // the two evaluation branches agree where both are exact
        for d in [2u32, 3, 5] {
            for k in [1u32, 5, 20, 45, 50] {
                let direct = chain_purity_exact(k, d).unwrap();
                let trunc = chain_purity_truncated(k, d, k).unwrap();
                assert!(
                    (direct - trunc).abs() <= 1e-12 * direct.max(1e-300),
                    "k={k} d={d}"
                );
            }
        }
        // large-k branch stays finite and positive
        let p = chain_purity_exact(200, 2).unwrap();
        assert!(p > 0.0 && p.is_finite());
    }

    #[test]
    fn chain_large_k_values() {
        assert!(close(chain_purity_large_k(3, 2).unwrap(), 2.0 * (2.0f64 / 3.0).powi(3), 1e-15));
        // ratio exact / asymptotic -> 1 (within 5% at k = 40, d = 2)
        let ratio = chain_purity_exact(40, 2).unwrap() / chain_purity_large_k(40, 2).unwrap();
        assert!((ratio - 1.0).abs() < 0.05, "ratio = {ratio}");
        // d -> infinity, k = 1: 2/d + O(1/d^2)
        let d = 1_000u32;
        let val = chain_purity_large_k(1, d).unwrap();
        assert!(close(val, 2.0 / d as f64, 1e-5));
    }

    #[test]
    fn chain_entropy_bound_values() {
        let b = chain_entropy_bound(1, 2).unwrap();
        assert!(close(b, 1.5f64.ln() - 2.0f64.ln(), 1e-15));
        assert!(b < 0.0); // vacuous at small k, d

        // large-d form k log d - log 2: (1-N_d)/N_d = d - 1 + 1/d, so the
        // agreement tightens as d grows
        let b = chain_entropy_bound(5, 10).unwrap();
        let approx = 5.0 * 10.0f64.ln() - 2.0f64.ln();
        assert!((b - approx).abs() / approx < 0.05);
        let b = chain_entropy_bound(5, 100).unwrap();
        let approx = 5.0 * 100.0f64.ln() - 2.0f64.ln();
        assert!((b - approx).abs() / approx < 0.01);

        // identical to -log of the large-k purity
        for d in [2u32, 3, 7] {
            for k in [1u32, 4, 9] {
                let lhs = chain_entropy_bound(k, d).unwrap();
                let rhs = -chain_purity_large_k(k, d).unwrap().ln();
                assert!(close(lhs, rhs, 1e-12));
            }
        }
    }

    #[test]
    fn asymptotic_purity_values() {
        assert!(close(chain_asymptotic_purity(2, 4, 2).unwrap(), 128.0 / 272.0, 1e-15));
        assert!(close(chain_asymptotic_purity(2, 6, 2).unwrap(), 1280.0 / 4160.0, 1e-15));
        // symmetric under L_A <-> L - L_A
        for (l, la) in [(6u32, 1u32), (6, 2), (8, 3)] {
            let a = chain_asymptotic_purity(2, l, la).unwrap();
            let b = chain_asymptotic_purity(2, l, l - la).unwrap();
            assert!(close(a, b, 1e-15));
        }
        // floor: never below the maximally mixed purity d^-L_A
        for (d, l, la) in [(2u32, 6u32, 3u32), (3, 5, 2), (2, 10, 4)] {
            let v = chain_asymptotic_purity(d, l, la).unwrap();
            assert!(v >= (d as f64).powi(-(la as i32)));
        }
        // large-L companion
        let exact = chain_asymptotic_purity(2, 40, 6).unwrap();
        let approx = chain_asymptotic_purity_large_l(2, 40, 6).unwrap();
        assert!((exact - approx).abs() / exact < 1e-9);
    }
}
