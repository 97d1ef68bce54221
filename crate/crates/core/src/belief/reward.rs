use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Streaming sufficient statistics for the rewards observed after one
/// `(s, a, s')` triple: count, running mean and the sum of squared
/// deviations from the mean (Welford's update).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RewardStats {
    count: u64,
    mean: f64,
    sum_sq_dev: f64,
}

impl RewardStats {
    pub fn push(&mut self, reward: f64) {
        self.count += 1;
        let delta = reward - self.mean;
        self.mean += delta / self.count as f64;
        self.sum_sq_dev += delta * (reward - self.mean);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    /// Sample mean x̄ (0 when empty).
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn sum(&self) -> f64 {
        self.mean * self.count as f64
    }

    /// Σ (x − x̄)², i.e. n·σ̂².
    pub fn sum_sq_dev(&self) -> f64 {
        self.sum_sq_dev.max(0.0)
    }

    /// Biased sample variance σ̂² = Σ (x − x̄)² / n (0 when empty).
    pub fn variance(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum_sq_dev() / self.count as f64
        }
    }
}

/// Posterior hyperparameters of a Normal-Gamma model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalGammaPosterior {
    pub mu: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Conjugate prior over the mean reward of one `(s, a, s')` triple.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RewardPrior {
    /// Unknown mean and precision: NG(μ₀, λ₀, α₀, β₀).
    NormalGamma {
        mu0: f64,
        lambda0: f64,
        alpha0: f64,
        beta0: f64,
    },
    /// Unknown mean N(μ₀, 1/τ₀) with known data precision τ.
    Normal { mu0: f64, tau0: f64, tau: f64 },
    /// Bernoulli rewards with a Beta(a, b) prior on the success rate.
    BetaBernoulli { a: f64, b: f64 },
}

impl Default for RewardPrior {
    fn default() -> Self {
        RewardPrior::normal_gamma_tied(0.1)
    }
}

impl RewardPrior {
    /// NG(0, β₀, 2, β₀): the single-parameter family whose prior epistemic
    /// uncertainty is exactly 1 for every β₀ > 0.
    pub fn normal_gamma_tied(beta0: f64) -> Self {
        RewardPrior::NormalGamma {
            mu0: 0.0,
            lambda0: beta0,
            alpha0: 2.0,
            beta0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64| v.is_finite();
        match *self {
            RewardPrior::NormalGamma {
                mu0,
                lambda0,
                alpha0,
                beta0,
            } => {
                if !finite(mu0) || !(lambda0 > 0.0) || !(beta0 > 0.0) {
                    return Err(Error::Config(format!(
                        "normal-gamma prior needs finite mu0, lambda0 > 0 and beta0 > 0 (got {mu0}, {lambda0}, {beta0})"
                    )));
                }
                if !(alpha0 > 1.0) {
                    return Err(Error::Config(format!(
                        "normal-gamma prior needs alpha0 > 1 for a finite variance of the mean (got {alpha0})"
                    )));
                }
            }
            RewardPrior::Normal { mu0, tau0, tau } => {
                if !finite(mu0) || !(tau0 > 0.0) || !(tau > 0.0) {
                    return Err(Error::Config(format!(
                        "normal prior needs finite mu0, tau0 > 0 and tau > 0 (got {mu0}, {tau0}, {tau})"
                    )));
                }
            }
            RewardPrior::BetaBernoulli { a, b } => {
                if !(a > 0.0) || !(b > 0.0) {
                    return Err(Error::Config(format!(
                        "beta prior needs a > 0 and b > 0 (got {a}, {b})"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Normal-Gamma posterior hyperparameters, `None` for other families.
    pub fn normal_gamma_posterior(&self, stats: &RewardStats) -> Option<NormalGammaPosterior> {
        match *self {
            RewardPrior::NormalGamma {
                mu0,
                lambda0,
                alpha0,
                beta0,
            } => {
                let n = stats.count() as f64;
                let xbar = stats.mean();
                let shift = xbar - mu0;
                Some(NormalGammaPosterior {
                    mu: (lambda0 * mu0 + n * xbar) / (lambda0 + n),
                    lambda: lambda0 + n,
                    alpha: alpha0 + 0.5 * n,
                    beta: beta0
                        + 0.5 * (stats.sum_sq_dev() + lambda0 * n * shift * shift / (lambda0 + n)),
                })
            }
            _ => None,
        }
    }

    /// Posterior mean of the expected reward.
    pub fn posterior_mean(&self, stats: &RewardStats) -> f64 {
        let n = stats.count() as f64;
        match *self {
            RewardPrior::NormalGamma { .. } => self.normal_gamma_posterior(stats).unwrap().mu,
            RewardPrior::Normal { mu0, tau0, tau } => {
                (tau0 * mu0 + tau * stats.sum()) / (tau0 + n * tau)
            }
            RewardPrior::BetaBernoulli { a, b } => (a + stats.sum()) / (a + b + n),
        }
    }

    /// Variance of the posterior over the expected reward.
    pub fn epistemic(&self, stats: &RewardStats) -> f64 {
        let n = stats.count() as f64;
        match *self {
            RewardPrior::NormalGamma { .. } => {
                let post = self.normal_gamma_posterior(stats).unwrap();
                post.beta / (post.lambda * (post.alpha - 1.0))
            }
            RewardPrior::Normal { tau0, tau, .. } => 1.0 / (tau0 + tau * n),
            RewardPrior::BetaBernoulli { a, b } => {
                let ap = a + stats.sum();
                let bp = b + n - stats.sum();
                let t = ap + bp;
                ap * bp / (t * t * (t + 1.0))
            }
        }
    }

    /// Draws an expected reward from the posterior.
    pub fn sample_mean<R: Rng + ?Sized>(&self, stats: &RewardStats, rng: &mut R) -> f64 {
        let n = stats.count() as f64;
        match *self {
            RewardPrior::NormalGamma { .. } => {
                let post = self.normal_gamma_posterior(stats).unwrap();
                let precision = Gamma::new(post.alpha, 1.0 / post.beta)
                    .expect("validated gamma parameters")
                    .sample(rng)
                    .max(f64::MIN_POSITIVE);
                Normal::new(post.mu, (1.0 / (post.lambda * precision)).sqrt())
                    .expect("finite normal parameters")
                    .sample(rng)
            }
            RewardPrior::Normal { tau0, tau, .. } => {
                let mean = self.posterior_mean(stats);
                Normal::new(mean, (1.0 / (tau0 + tau * n)).sqrt())
                    .expect("finite normal parameters")
                    .sample(rng)
            }
            RewardPrior::BetaBernoulli { a, b } => {
                let ap = a + stats.sum();
                let bp = (b + n - stats.sum()).max(f64::MIN_POSITIVE);
                Beta::new(ap, bp)
                    .expect("positive beta parameters")
                    .sample(rng)
            }
        }
    }
}
