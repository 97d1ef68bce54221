//! Closed-form quantities of a Dirichlet posterior.
//!
//! The sparse variants describe Dir(α·1 + n) over `dim` components where only
//! the components with nonzero counts are listed; every other component sits
//! at the symmetric prior value α.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardUniform};

use crate::special::digamma;

/// Σ_k Var(θ_k) for θ ~ Dir(params): the variance of the one-hot encoded
/// next state under the posterior.
pub fn variance_uncertainty_dense(params: &[f64]) -> f64 {
    let total: f64 = params.iter().sum();
    params.iter().map(|&a| a * (total - a)).sum::<f64>() / (total * total * (total + 1.0))
}

/// Sparse form of [`variance_uncertainty_dense`].
///
/// `counts` yields the nonzero counts and must sum to `visits`.
pub fn variance_uncertainty(
    alpha: f64,
    dim: usize,
    visits: f64,
    counts: impl Iterator<Item = f64>,
) -> f64 {
    let prior_mass = alpha * dim as f64;
    let total = prior_mass + visits;
    let mut seen = 0usize;
    let mut acc = 0.0;
    for n in counts {
        seen += 1;
        // total − (α + n), written to avoid cancellation when one component dominates
        let rest = (prior_mass - alpha) + (visits - n);
        acc += (alpha + n) * rest;
    }
    let unseen = (dim - seen) as f64;
    acc += unseen * alpha * ((prior_mass - alpha) + visits);
    acc / (total * total * (total + 1.0))
}

/// Mutual information between the next state and the Dirichlet parameters,
/// E_w[KL(P(·|w) ‖ P_b)] = Σ_i (α_i/α₀)[ψ(α_i+1) − ψ(α₀+1) − ln(α_i/α₀)].
pub fn mutual_information_dense(params: &[f64]) -> f64 {
    let total: f64 = params.iter().sum();
    let psi_total = digamma(total + 1.0);
    params
        .iter()
        .map(|&a| mi_term(a, total, psi_total))
        .sum::<f64>()
        .max(0.0)
}

/// Sparse form of [`mutual_information_dense`].
pub fn mutual_information(
    alpha: f64,
    dim: usize,
    visits: f64,
    counts: impl Iterator<Item = f64>,
) -> f64 {
    let total = alpha * dim as f64 + visits;
    let psi_total = digamma(total + 1.0);
    let mut seen = 0usize;
    let mut acc = 0.0;
    for n in counts {
        seen += 1;
        acc += mi_term(alpha + n, total, psi_total);
    }
    acc += (dim - seen) as f64 * mi_term(alpha, total, psi_total);
    acc.max(0.0)
}

fn mi_term(a: f64, total: f64, psi_total: f64) -> f64 {
    let p = a / total;
    p * (digamma(a + 1.0) - psi_total - p.ln())
}

/// Draws θ ~ Dir(params) into `out`.
///
/// Gamma variates are generated in log space so that very small
/// concentrations do not underflow to an all-zero vector.
pub fn sample_into<R: Rng + ?Sized>(params: &[f64], rng: &mut R, out: &mut [f64]) {
    debug_assert_eq!(params.len(), out.len());
    let mut max_log = f64::NEG_INFINITY;
    for (o, &a) in out.iter_mut().zip(params) {
        let log_g = if a < 1.0 {
            let g = Gamma::new(a + 1.0, 1.0)
                .expect("positive shape")
                .sample(rng);
            let u: f64 = StandardUniform.sample(rng);
            g.ln() + u.max(f64::MIN_POSITIVE).ln() / a
        } else {
            Gamma::new(a, 1.0).expect("positive shape").sample(rng).ln()
        };
        *o = log_g;
        max_log = max_log.max(log_g);
    }
    let mut sum = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max_log).exp();
        sum += *o;
    }
    for o in out.iter_mut() {
        *o /= sum;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn symmetric_binary_prior() {
        assert!((variance_uncertainty_dense(&[1.0, 1.0]) - 1.0 / 6.0).abs() < 1e-15);
        assert!((variance_uncertainty_dense(&[2.0, 1.0]) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn sparse_matches_dense() {
        let alpha = 0.3;
        let dim = 6;
        let counts = [(1usize, 4.0), (4, 1.0), (5, 7.0)];
        let mut dense = vec![alpha; dim];
        for &(k, n) in &counts {
            dense[k] += n;
        }
        let visits = 12.0;
        let sv = variance_uncertainty(alpha, dim, visits, counts.iter().map(|c| c.1));
        let smi = mutual_information(alpha, dim, visits, counts.iter().map(|c| c.1));
        assert!((sv - variance_uncertainty_dense(&dense)).abs() < 1e-15);
        assert!((smi - mutual_information_dense(&dense)).abs() < 1e-13);
    }

    #[test]
    fn mi_of_uniform_binary() {
        // ψ(2) − ψ(3) + ln 2
        let expected = -0.5 + 2f64.ln();
        assert!((mutual_information_dense(&[1.0, 1.0]) - expected).abs() < 1e-13);
    }

    #[test]
    fn tiny_concentrations_sample_on_simplex() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let params = [1e-3; 4];
        let mut out = [0.0; 4];
        for _ in 0..1000 {
            sample_into(&params, &mut rng, &mut out);
            let s: f64 = out.iter().sum();
            assert!((s - 1.0).abs() < 1e-12);
            assert!(out.iter().all(|p| p.is_finite() && *p >= 0.0));
        }
    }
}
