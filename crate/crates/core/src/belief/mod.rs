//! Conjugate beliefs over transitions and rewards, their posterior
//! predictives, and closed-form epistemic uncertainty.
//!
//! Transitions use an independent Dirichlet per `(s, a)` with a symmetric
//! prior α, or, in tied mode, one Dirichlet per action over a canonical
//! next-state encoding shared by every state. Rewards are modelled per
//! `(s, a, s')` and aggregated through the predictive transition.

mod counts;
pub mod dirichlet;
mod reward;

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use counts::{CountTable, NextEntry};
pub use reward::{NormalGammaPosterior, RewardPrior, RewardStats};

use crate::error::{check_index, Error, Result};
use crate::planner::TabularMdp;

/// Dirichlet parameters are clipped at this value before posterior sampling.
pub const SAMPLE_CLIP: f64 = 1e-3;

/// How epistemic uncertainty is measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UncertaintyMode {
    /// Posterior variance of the model means: η(√E_T + √E_R).
    #[default]
    Variance,
    /// Dirichlet mutual information for transitions, variance for rewards.
    MutualInformation,
    /// η/√N(s,a); unvisited pairs sit at the running maximum.
    CountBased,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BeliefConfig {
    /// Symmetric Dirichlet concentration α per component.
    pub dirichlet_alpha: f64,
    pub reward: RewardPrior,
    pub mode: UncertaintyMode,
    /// Scaling factor η of the combined uncertainty.
    pub eta: f64,
}

impl Default for BeliefConfig {
    fn default() -> Self {
        BeliefConfig {
            dirichlet_alpha: 0.1,
            reward: RewardPrior::default(),
            mode: UncertaintyMode::Variance,
            eta: 1.0,
        }
    }
}

impl BeliefConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dirichlet_alpha > 0.0) || !self.dirichlet_alpha.is_finite() {
            return Err(Error::Config(format!(
                "Dirichlet concentration must be positive, got {}",
                self.dirichlet_alpha
            )));
        }
        if !(self.eta >= 0.0) || !self.eta.is_finite() {
            return Err(Error::Config(format!(
                "eta must be nonnegative, got {}",
                self.eta
            )));
        }
        self.reward.validate()
    }
}

/// Maps observed successors onto a shared set of outcome classes.
///
/// Used by the tied prior: each action owns one Dirichlet over classes, and
/// `target` turns a class back into a concrete next state for any state.
pub trait NextStateEncoding: Send + Sync + fmt::Debug {
    fn num_classes(&self) -> usize;
    fn target(&self, state: usize, class: usize) -> usize;
}

/// Identity encoding: classes are absolute next-state indices.
#[derive(Clone, Copy, Debug)]
pub struct AbsoluteEncoding {
    pub num_states: usize,
}

impl NextStateEncoding for AbsoluteEncoding {
    fn num_classes(&self) -> usize {
        self.num_states
    }

    fn target(&self, _state: usize, class: usize) -> usize {
        class
    }
}

#[derive(Clone, Debug)]
struct TiedDirichlet {
    encoding: Arc<dyn NextStateEncoding>,
    counts: Vec<f64>,
    totals: Vec<f64>,
}

impl TiedDirichlet {
    fn counts(&self, a: usize) -> &[f64] {
        let k = self.encoding.num_classes();
        &self.counts[a * k..(a + 1) * k]
    }
}

/// Posterior over MDPs for one run.
#[derive(Clone, Debug)]
pub struct BeliefState {
    num_states: usize,
    num_actions: usize,
    config: BeliefConfig,
    counts: CountTable,
    tied: Option<TiedDirichlet>,
    e_max: f64,
}

impl BeliefState {
    pub fn new(num_states: usize, num_actions: usize, config: BeliefConfig) -> Result<Self> {
        Self::build(num_states, num_actions, config, None)
    }

    /// Tied prior: one Dirichlet per action over the classes of `encoding`.
    pub fn tied(
        num_states: usize,
        num_actions: usize,
        config: BeliefConfig,
        encoding: Arc<dyn NextStateEncoding>,
    ) -> Result<Self> {
        Self::build(num_states, num_actions, config, Some(encoding))
    }

    fn build(
        num_states: usize,
        num_actions: usize,
        config: BeliefConfig,
        encoding: Option<Arc<dyn NextStateEncoding>>,
    ) -> Result<Self> {
        config.validate()?;
        if num_states == 0 || num_actions == 0 {
            return Err(Error::Config(
                "belief needs at least one state and one action".into(),
            ));
        }
        let tied = match encoding {
            Some(encoding) => {
                let k = encoding.num_classes();
                if k == 0 {
                    return Err(Error::Config("tied encoding has no classes".into()));
                }
                Some(TiedDirichlet {
                    encoding,
                    counts: vec![0.0; num_actions * k],
                    totals: vec![0.0; num_actions],
                })
            }
            None => None,
        };
        let mut belief = BeliefState {
            num_states,
            num_actions,
            config,
            counts: CountTable::new(num_states, num_actions),
            tied,
            e_max: 0.0,
        };
        belief.e_max = match config.mode {
            UncertaintyMode::CountBased => config.eta,
            _ => belief.epistemic_total(0, 0)?,
        };
        Ok(belief)
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn config(&self) -> &BeliefConfig {
        &self.config
    }

    pub fn counts(&self) -> &CountTable {
        &self.counts
    }

    pub fn is_tied(&self) -> bool {
        self.tied.is_some()
    }

    /// Running maximum of the combined epistemic uncertainty.
    pub fn e_max(&self) -> f64 {
        self.e_max
    }

    /// Raises the running maximum to at least `value`.
    pub fn track_uncertainty(&mut self, value: f64) {
        if value > self.e_max {
            self.e_max = value;
        }
    }

    /// Number of Dirichlet components per transition model.
    pub fn dirichlet_dim(&self) -> usize {
        match &self.tied {
            Some(t) => t.encoding.num_classes(),
            None => self.num_states,
        }
    }

    /// Prior concentration 1ᵀα of one transition Dirichlet.
    pub fn prior_concentration(&self) -> f64 {
        self.config.dirichlet_alpha * self.dirichlet_dim() as f64
    }

    fn check(&self, s: usize, a: usize) -> Result<()> {
        check_index("state", s, self.num_states)?;
        check_index("action", a, self.num_actions)
    }

    /// Absorbs one observed transition `(s, a) → next` with reward `reward`.
    pub fn update(&mut self, s: usize, a: usize, next: usize, reward: f64) -> Result<()> {
        self.check(s, a)?;
        check_index("next state", next, self.num_states)?;
        if !reward.is_finite() {
            return Err(Error::Precondition(format!(
                "observed reward must be finite, got {reward}"
            )));
        }
        if let Some(tied) = &mut self.tied {
            let k = tied.encoding.num_classes();
            let mut matched = (0..k).filter(|&c| tied.encoding.target(s, c) == next);
            match (matched.next(), matched.next()) {
                (None, _) => {
                    return Err(Error::State(format!(
                        "transition {s} -> {next} has no class in the tied encoding"
                    )))
                }
                (Some(class), None) => {
                    tied.counts[a * k + class] += 1.0;
                    tied.totals[a] += 1.0;
                }
                // several classes lead to the same state: the move says nothing about them
                (Some(_), Some(_)) => {}
            }
        }
        self.counts.record(s, a, next, reward)?;
        let e = self.epistemic_total(s, a)?;
        self.track_uncertainty(e);
        Ok(())
    }

    /// Writes P_b(·|s,a) into `row` (length S).
    pub fn fill_predictive(&self, s: usize, a: usize, row: &mut [f64]) -> Result<()> {
        self.check(s, a)?;
        let alpha = self.config.dirichlet_alpha;
        match &self.tied {
            None => {
                let total = alpha * self.num_states as f64 + self.counts.visits(s, a) as f64;
                row.fill(alpha / total);
                for e in self.counts.entries(s, a) {
                    row[e.state] = (alpha + e.count as f64) / total;
                }
            }
            Some(tied) => {
                let k = tied.encoding.num_classes();
                let total = alpha * k as f64 + tied.totals[a];
                row.fill(0.0);
                for (class, c) in tied.counts(a).iter().enumerate() {
                    row[tied.encoding.target(s, class)] += (alpha + c) / total;
                }
            }
        }
        Ok(())
    }

    /// Posterior predictive transition P_b(·|s,a).
    pub fn predictive_transition(&self, s: usize, a: usize) -> Result<Vec<f64>> {
        let mut row = vec![0.0; self.num_states];
        self.fill_predictive(s, a, &mut row)?;
        Ok(row)
    }

    /// E_{P_b(s'|s,a)}[f(stats(s,a,s'))], with unobserved successors at the prior.
    fn aggregate(&self, s: usize, a: usize, f: impl Fn(&RewardStats) -> f64) -> Result<f64> {
        self.check(s, a)?;
        let prior_value = f(&RewardStats::default());
        let entries = self.counts.entries(s, a);
        match &self.tied {
            None => {
                let alpha = self.config.dirichlet_alpha;
                let total = alpha * self.num_states as f64 + self.counts.visits(s, a) as f64;
                let unseen = (self.num_states - entries.len()) as f64;
                let mut acc = unseen * alpha / total * prior_value;
                for e in entries {
                    acc += (alpha + e.count as f64) / total * f(&e.reward);
                }
                Ok(acc)
            }
            Some(_) => {
                let row = self.predictive_transition(s, a)?;
                let mut seen_mass = 0.0;
                let mut acc = 0.0;
                for e in entries {
                    seen_mass += row[e.state];
                    acc += row[e.state] * f(&e.reward);
                }
                Ok(acc + (1.0 - seen_mass).max(0.0) * prior_value)
            }
        }
    }

    /// r_b(s,a) = Σ_{s'} P_b(s'|s,a) r_b(s,a,s').
    pub fn predictive_reward_mean(&self, s: usize, a: usize) -> Result<f64> {
        let prior = self.config.reward;
        self.aggregate(s, a, |st| prior.posterior_mean(st))
    }

    /// Posterior mean reward of one `(s, a, s')` triple.
    pub fn reward_mean_given_next(&self, s: usize, a: usize, next: usize) -> Result<f64> {
        self.check(s, a)?;
        check_index("next state", next, self.num_states)?;
        let stats = self
            .counts
            .entry(s, a, next)
            .map(|e| e.reward)
            .unwrap_or_default();
        Ok(self.config.reward.posterior_mean(&stats))
    }

    /// Variance-based transition uncertainty Σ_k Var(θ_k).
    pub fn epistemic_transition(&self, s: usize, a: usize) -> Result<f64> {
        self.check(s, a)?;
        let alpha = self.config.dirichlet_alpha;
        Ok(match &self.tied {
            None => dirichlet::variance_uncertainty(
                alpha,
                self.num_states,
                self.counts.visits(s, a) as f64,
                self.counts.entries(s, a).iter().map(|e| e.count as f64),
            ),
            Some(tied) => {
                let params: Vec<f64> = tied.counts(a).iter().map(|c| alpha + c).collect();
                dirichlet::variance_uncertainty_dense(&params)
            }
        })
    }

    /// Mutual information between the next state and the transition parameters.
    pub fn mutual_info_transition(&self, s: usize, a: usize) -> Result<f64> {
        self.check(s, a)?;
        let alpha = self.config.dirichlet_alpha;
        Ok(match &self.tied {
            None => dirichlet::mutual_information(
                alpha,
                self.num_states,
                self.counts.visits(s, a) as f64,
                self.counts.entries(s, a).iter().map(|e| e.count as f64),
            ),
            Some(tied) => {
                let params: Vec<f64> = tied.counts(a).iter().map(|c| alpha + c).collect();
                dirichlet::mutual_information_dense(&params)
            }
        })
    }

    /// Reward uncertainty E_R(s,a) = E_{P_b(s'|s,a)}[E_R(s,a,s')].
    pub fn epistemic_reward(&self, s: usize, a: usize) -> Result<f64> {
        let prior = self.config.reward;
        self.aggregate(s, a, |st| prior.epistemic(st))
    }

    /// Combined uncertainty E_b(s,a) in the configured mode.
    pub fn epistemic_total(&self, s: usize, a: usize) -> Result<f64> {
        self.check(s, a)?;
        let eta = self.config.eta;
        Ok(match self.config.mode {
            UncertaintyMode::CountBased => {
                let n = self.counts.visits(s, a);
                if n == 0 {
                    self.e_max
                } else {
                    eta / (n as f64).sqrt()
                }
            }
            UncertaintyMode::Variance => {
                eta * (self.epistemic_transition(s, a)?.sqrt()
                    + self.epistemic_reward(s, a)?.sqrt())
            }
            UncertaintyMode::MutualInformation => {
                eta * (self.mutual_info_transition(s, a)?.sqrt()
                    + self.epistemic_reward(s, a)?.sqrt())
            }
        })
    }

    /// Probability of uncertainty P_U(s,a) = E_b(s,a)/E_max, clamped to [0, 1].
    ///
    /// With η = 0 every uncertainty vanishes and P_U is 0.
    pub fn p_uncertain(&self, s: usize, a: usize) -> Result<f64> {
        let e = self.epistemic_total(s, a)?;
        self.p_uncertain_of(e)
    }

    /// P_U for a precomputed combined uncertainty.
    pub fn p_uncertain_of(&self, e: f64) -> Result<f64> {
        if self.e_max > 0.0 {
            Ok((e / self.e_max).clamp(0.0, 1.0))
        } else if self.config.eta == 0.0 {
            Ok(0.0)
        } else {
            Err(Error::DegeneratePrior)
        }
    }

    /// Draws one MDP from the posterior: Dirichlet rows (parameters clipped
    /// at [`SAMPLE_CLIP`]) and per-`(s, a, s')` reward means, averaged
    /// through the sampled row.
    pub fn sample_model<R: Rng + ?Sized>(&self, rng: &mut R, discount: f64) -> Result<TabularMdp> {
        let n = self.num_states;
        let na = self.num_actions;
        let alpha = self.config.dirichlet_alpha;
        let mut transitions = vec![0.0; n * na * n];
        let mut rewards = vec![0.0; n * na];

        let tied_rows: Option<Vec<Vec<f64>>> = self.tied.as_ref().map(|tied| {
            let k = tied.encoding.num_classes();
            (0..na)
                .map(|a| {
                    let params: Vec<f64> = tied
                        .counts(a)
                        .iter()
                        .map(|c| (alpha + c).max(SAMPLE_CLIP))
                        .collect();
                    let mut out = vec![0.0; k];
                    dirichlet::sample_into(&params, rng, &mut out);
                    out
                })
                .collect()
        });

        let mut params = vec![0.0; n];
        let mut means = vec![0.0; n];
        for s in 0..n {
            for a in 0..na {
                let start = (s * na + a) * n;
                let row = &mut transitions[start..start + n];
                match (&self.tied, &tied_rows) {
                    (Some(tied), Some(class_rows)) => {
                        for (class, p) in class_rows[a].iter().enumerate() {
                            row[tied.encoding.target(s, class)] += p;
                        }
                    }
                    _ => {
                        params.fill(alpha.max(SAMPLE_CLIP));
                        for e in self.counts.entries(s, a) {
                            params[e.state] = (alpha + e.count as f64).max(SAMPLE_CLIP);
                        }
                        dirichlet::sample_into(&params, rng, row);
                    }
                }
                means.fill(f64::NAN);
                for e in self.counts.entries(s, a) {
                    means[e.state] = self.config.reward.sample_mean(&e.reward, rng);
                }
                let prior = RewardStats::default();
                let mut r = 0.0;
                for (next, p) in row.iter().enumerate() {
                    if means[next].is_nan() {
                        means[next] = self.config.reward.sample_mean(&prior, rng);
                    }
                    r += p * means[next];
                }
                rewards[s * na + a] = r;
            }
        }
        TabularMdp::new(n, na, transitions, rewards, discount)
    }
}
