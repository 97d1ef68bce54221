//! Benchmark environments with exact ground-truth dynamics.
//!
//! Every environment is described by a per-`(s, a)` outcome table. Sampling
//! in [`EnvInstance::step`] and the expected-reward [`TabularMdp`] returned by
//! [`EnvSpec::ground_truth_mdp`] are both read from that table.

mod bandit;
mod chain;
mod deep_sea;
mod lazy_chain;
mod loops;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::belief::{AbsoluteEncoding, NextStateEncoding};
use crate::error::{check_index, Error, Result};
use crate::planner::{self, Policy, SolverOptions, TabularMdp, ValueFunction};

pub use chain::ChainEncoding;
pub use deep_sea::DeepSeaEncoding;
pub use lazy_chain::LazyChainEncoding;

/// Number of states in the Chain task.
pub const CHAIN_STATES: usize = 5;
/// Default slip probability of the Chain task.
pub const CHAIN_SLIP: f64 = 0.2;
/// Default flip probability of the stochastic LazyChain.
pub const LAZY_CHAIN_FLIP: f64 = 0.2;

fn default_slip() -> f64 {
    CHAIN_SLIP
}

fn default_flip() -> f64 {
    LAZY_CHAIN_FLIP
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnvSpec {
    /// Five-state chain; action 0 = left (reset), 1 = right.
    Chain {
        #[serde(default = "default_slip")]
        slip: f64,
        /// Reward paid whenever the effective move resets to the leftmost state.
        #[serde(default)]
        back_reward: f64,
        /// Pay 10 only for staying at the last state rather than on every
        /// arrival there.
        #[serde(default)]
        stay_reward: bool,
    },
    /// `loops` four-state loops joined at a hub; the last loop pays 2.
    Loop { loops: usize },
    /// N×N grid, episodes of exactly N steps.
    DeepSea {
        size: usize,
        #[serde(default)]
        stochastic: bool,
    },
    /// Chain of 2N+1 states starting in the middle; actions left, stay, right.
    LazyChain {
        length: usize,
        #[serde(default)]
        stochastic: bool,
        #[serde(default = "default_flip")]
        flip: f64,
    },
    /// Single-state Bernoulli bandit.
    Bandit { means: Vec<f64> },
}

/// Reward distribution of one outcome.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RewardDist {
    Fixed(f64),
    /// `mean + sd·N(0,1)`.
    Normal {
        mean: f64,
        sd: f64,
    },
    Bernoulli(f64),
}

impl RewardDist {
    pub fn mean(&self) -> f64 {
        match *self {
            RewardDist::Fixed(r) => r,
            RewardDist::Normal { mean, .. } => mean,
            RewardDist::Bernoulli(p) => p,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            RewardDist::Fixed(r) => r,
            RewardDist::Normal { mean, sd } => {
                let z: f64 = rng.sample(StandardNormal);
                mean + sd * z
            }
            RewardDist::Bernoulli(p) => {
                if rng.random::<f64>() < p {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }
}

/// One possible result of taking an action.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Outcome {
    pub prob: f64,
    pub next: usize,
    pub reward: RewardDist,
    /// The environment resets after this outcome.
    pub boundary: bool,
}

fn push(out: &mut Vec<Outcome>, prob: f64, next: usize, reward: RewardDist, boundary: bool) {
    if prob > 0.0 {
        out.push(Outcome {
            prob,
            next,
            reward,
            boundary,
        });
    }
}

/// Result of one environment step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub next_state: usize,
    pub reward: f64,
    /// The episode is over and [`EnvInstance::reset`] must be called.
    pub terminated: bool,
    /// An episode boundary was crossed (terminal step or internal reset).
    pub episode_end: bool,
}

impl EnvSpec {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, p: f64| {
            if (0.0..=1.0).contains(&p) {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must lie in [0, 1], got {p}")))
            }
        };
        match self {
            EnvSpec::Chain {
                slip, back_reward, ..
            } => {
                prob("slip", *slip)?;
                if !back_reward.is_finite() {
                    return Err(Error::Config("back_reward must be finite".into()));
                }
            }
            EnvSpec::Loop { loops } => {
                if *loops < 2 {
                    return Err(Error::Config(format!(
                        "Loop needs at least 2 loops, got {loops}"
                    )));
                }
            }
            EnvSpec::DeepSea { size, .. } => {
                if *size < 2 {
                    return Err(Error::Config(format!(
                        "DeepSea needs size >= 2, got {size}"
                    )));
                }
            }
            EnvSpec::LazyChain { length, flip, .. } => {
                if *length < 2 {
                    return Err(Error::Config(format!(
                        "LazyChain needs length >= 2, got {length}"
                    )));
                }
                prob("flip", *flip)?;
            }
            EnvSpec::Bandit { means } => {
                if means.is_empty() {
                    return Err(Error::Config("bandit needs at least one arm".into()));
                }
                for &m in means {
                    prob("arm mean", m)?;
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvSpec::Chain { .. } => "chain",
            EnvSpec::Loop { .. } => "loop",
            EnvSpec::DeepSea { .. } => "deep_sea",
            EnvSpec::LazyChain { .. } => "lazy_chain",
            EnvSpec::Bandit { .. } => "bandit",
        }
    }

    /// Size parameter used for scaling curves.
    pub fn size(&self) -> usize {
        match self {
            EnvSpec::Chain { .. } => CHAIN_STATES,
            EnvSpec::Loop { loops } => *loops,
            EnvSpec::DeepSea { size, .. } => *size,
            EnvSpec::LazyChain { length, .. } => *length,
            EnvSpec::Bandit { means } => means.len(),
        }
    }

    pub fn num_states(&self) -> usize {
        match self {
            EnvSpec::Chain { .. } => CHAIN_STATES,
            EnvSpec::Loop { loops } => 4 * loops + 1,
            EnvSpec::DeepSea { size, .. } => size * size,
            EnvSpec::LazyChain { length, .. } => 2 * length + 1,
            EnvSpec::Bandit { .. } => 1,
        }
    }

    pub fn num_actions(&self) -> usize {
        match self {
            EnvSpec::Chain { .. } | EnvSpec::DeepSea { .. } => 2,
            EnvSpec::Loop { loops } => *loops,
            EnvSpec::LazyChain { .. } => 3,
            EnvSpec::Bandit { means } => means.len(),
        }
    }

    pub fn start_state(&self) -> usize {
        match self {
            EnvSpec::LazyChain { length, .. } => *length,
            _ => 0,
        }
    }

    /// Largest expected one-step reward.
    pub fn r_max(&self) -> f64 {
        match self {
            EnvSpec::Chain { back_reward, .. } => 10f64.max(*back_reward),
            EnvSpec::Loop { .. } => 2.0,
            EnvSpec::DeepSea { .. } => 1.0,
            EnvSpec::LazyChain { length, .. } => (2 * length - 1) as f64,
            EnvSpec::Bandit { .. } => 1.0,
        }
    }

    pub fn default_discount(&self) -> f64 {
        match self {
            EnvSpec::Chain { .. } | EnvSpec::Loop { .. } | EnvSpec::Bandit { .. } => 0.95,
            EnvSpec::DeepSea { .. } => 0.99,
            EnvSpec::LazyChain { .. } => 0.999,
        }
    }

    /// Step budget T_max.
    pub fn default_budget(&self) -> u64 {
        match self {
            EnvSpec::Chain { .. } | EnvSpec::Loop { .. } => 1000,
            EnvSpec::DeepSea { size, .. } => 50 * (size * size) as u64,
            EnvSpec::LazyChain { length, .. } => 1000 * *length as u64,
            EnvSpec::Bandit { .. } => 10_000,
        }
    }

    /// Episodes end with a terminal step that requires a reset.
    pub fn is_episodic(&self) -> bool {
        matches!(self, EnvSpec::DeepSea { .. })
    }

    /// Runs halt once the optimal policy is matched; otherwise the metric is return.
    pub fn is_solve_task(&self) -> bool {
        matches!(self, EnvSpec::DeepSea { .. } | EnvSpec::LazyChain { .. })
    }

    /// Relative next-state encoding for the tied prior, or the absolute one.
    pub fn encoding(&self) -> Arc<dyn NextStateEncoding> {
        match self {
            EnvSpec::Chain { .. } => Arc::new(ChainEncoding),
            EnvSpec::DeepSea { size, .. } => Arc::new(DeepSeaEncoding { size: *size }),
            EnvSpec::LazyChain { length, .. } => Arc::new(LazyChainEncoding { length: *length }),
            _ => Arc::new(AbsoluteEncoding {
                num_states: self.num_states(),
            }),
        }
    }

    /// Whether `reward` can be produced by this environment.
    ///
    /// Stochastic DeepSea rewards are Normal draws and always pass.
    pub fn reward_in_support(&self, reward: f64) -> bool {
        let one_of = |xs: &[f64]| xs.iter().any(|&x| (x - reward).abs() <= 1e-12);
        match self {
            EnvSpec::Chain { back_reward, .. } => one_of(&[0.0, 10.0, *back_reward]),
            EnvSpec::Loop { .. } => one_of(&[0.0, 1.0, 2.0]),
            EnvSpec::DeepSea { size, stochastic } => {
                let cost = deep_sea::move_cost(*size);
                *stochastic || one_of(&[0.0, -cost, 1.0, 1.0 - cost])
            }
            EnvSpec::LazyChain { length, .. } => {
                let n = *length as f64;
                one_of(&[-1.0, 0.0, n - 1.0, 2.0 * n - 1.0])
            }
            EnvSpec::Bandit { .. } => one_of(&[0.0, 1.0]),
        }
    }

    /// Outcomes of taking `action` in `state`; probabilities sum to one.
    pub fn outcomes(&self, state: usize, action: usize, out: &mut Vec<Outcome>) -> Result<()> {
        check_index("state", state, self.num_states())?;
        check_index("action", action, self.num_actions())?;
        out.clear();
        match self {
            EnvSpec::Chain {
                slip,
                back_reward,
                stay_reward,
            } => chain::outcomes(*slip, *back_reward, *stay_reward, state, action, out),
            EnvSpec::Loop { loops } => loops::outcomes(*loops, state, action, out),
            EnvSpec::DeepSea { size, stochastic } => {
                deep_sea::outcomes(*size, *stochastic, state, action, out)
            }
            EnvSpec::LazyChain {
                length,
                stochastic,
                flip,
            } => {
                let flip = if *stochastic { *flip } else { 0.0 };
                lazy_chain::outcomes(*length, flip, state, action, out)
            }
            EnvSpec::Bandit { means } => bandit::outcomes(means, action, out),
        }
        Ok(())
    }

    /// Exact expected-reward MDP of the environment.
    ///
    /// Episodic tasks are folded into a continuing MDP whose terminal step
    /// moves back to the start state.
    pub fn ground_truth_mdp(&self, discount: f64) -> Result<TabularMdp> {
        self.validate()?;
        let (ns, na) = (self.num_states(), self.num_actions());
        let mut transitions = vec![0.0; ns * na * ns];
        let mut rewards = vec![0.0; ns * na];
        let mut buf = Vec::new();
        for s in 0..ns {
            for a in 0..na {
                self.outcomes(s, a, &mut buf)?;
                for o in &buf {
                    transitions[(s * na + a) * ns + o.next] += o.prob;
                    rewards[s * na + a] += o.prob * o.reward.mean();
                }
            }
        }
        TabularMdp::new(ns, na, transitions, rewards, discount)
    }

    /// Optimal policy and values of the ground-truth MDP, solved to 1e-9.
    pub fn optimal_policy_and_value(&self, discount: f64) -> Result<(Policy, ValueFunction)> {
        let mdp = self.ground_truth_mdp(discount)?;
        let options = SolverOptions {
            tol: 1e-9,
            ..SolverOptions::default()
        };
        let (values, policy) = planner::solve(&mdp, &options, None)?;
        Ok((policy, values))
    }
}

/// A running environment that owns its random stream.
#[derive(Clone, Debug)]
pub struct EnvInstance {
    spec: EnvSpec,
    state: usize,
    done: bool,
    rng: ChaCha8Rng,
    buf: Vec<Outcome>,
}

impl EnvInstance {
    pub fn new(spec: EnvSpec, seed: u64) -> Result<Self> {
        Self::with_rng(spec, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn with_rng(spec: EnvSpec, rng: ChaCha8Rng) -> Result<Self> {
        spec.validate()?;
        Ok(EnvInstance {
            state: spec.start_state(),
            spec,
            done: false,
            rng,
            buf: Vec::new(),
        })
    }

    pub fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn is_terminated(&self) -> bool {
        self.done
    }

    pub fn reset(&mut self) -> usize {
        self.state = self.spec.start_state();
        self.done = false;
        self.state
    }

    pub fn step(&mut self, action: usize) -> Result<Transition> {
        if self.done {
            return Err(Error::State(
                "step called on a terminated episode; call reset first".into(),
            ));
        }
        self.spec.outcomes(self.state, action, &mut self.buf)?;
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        let mut chosen = self.buf[self.buf.len() - 1];
        for o in &self.buf {
            acc += o.prob;
            if u < acc {
                chosen = *o;
                break;
            }
        }
        let reward = chosen.reward.sample(&mut self.rng);
        let terminated = chosen.boundary && self.spec.is_episodic();
        self.state = chosen.next;
        self.done = terminated;
        Ok(Transition {
            next_state: chosen.next,
            reward,
            terminated,
            episode_end: chosen.boundary,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_specs() -> Vec<EnvSpec> {
        vec![
            EnvSpec::Chain {
                slip: 0.2,
                back_reward: 2.0,
                stay_reward: false,
            },
            EnvSpec::Loop { loops: 3 },
            EnvSpec::DeepSea {
                size: 4,
                stochastic: true,
            },
            EnvSpec::DeepSea {
                size: 5,
                stochastic: false,
            },
            EnvSpec::LazyChain {
                length: 4,
                stochastic: true,
                flip: 0.2,
            },
            EnvSpec::Bandit {
                means: vec![0.9, 0.4],
            },
        ]
    }

    #[test]
    fn sizes_follow_task_table() {
        let chain = EnvSpec::Chain {
            slip: 0.2,
            back_reward: 0.0,
            stay_reward: false,
        };
        assert_eq!((chain.num_states(), chain.num_actions()), (5, 2));
        let lp = EnvSpec::Loop { loops: 2 };
        assert_eq!((lp.num_states(), lp.num_actions()), (9, 2));
        let ds = EnvSpec::DeepSea {
            size: 10,
            stochastic: false,
        };
        assert_eq!((ds.num_states(), ds.num_actions()), (100, 2));
        let lc = EnvSpec::LazyChain {
            length: 7,
            stochastic: false,
            flip: 0.2,
        };
        assert_eq!(
            (lc.num_states(), lc.num_actions(), lc.start_state()),
            (15, 3, 7)
        );
    }

    #[test]
    fn rejects_small_sizes() {
        assert!(EnvSpec::Loop { loops: 1 }.validate().is_err());
        assert!(EnvSpec::DeepSea {
            size: 1,
            stochastic: false
        }
        .validate()
        .is_err());
        assert!(EnvInstance::new(
            EnvSpec::LazyChain {
                length: 1,
                stochastic: false,
                flip: 0.2
            },
            0
        )
        .is_err());
    }

    #[test]
    fn outcome_tables_are_distributions() {
        let mut buf = Vec::new();
        for spec in all_specs() {
            for s in 0..spec.num_states() {
                for a in 0..spec.num_actions() {
                    spec.outcomes(s, a, &mut buf).unwrap();
                    let total: f64 = buf.iter().map(|o| o.prob).sum();
                    assert!((total - 1.0).abs() < 1e-12, "{spec:?} {s} {a}");
                    assert!(buf
                        .iter()
                        .all(|o| o.next < spec.num_states() && o.prob >= 0.0));
                }
            }
        }
    }

    #[test]
    fn same_seed_same_trajectory() {
        for spec in all_specs() {
            let mut e1 = EnvInstance::new(spec.clone(), 9).unwrap();
            let mut e2 = EnvInstance::new(spec.clone(), 9).unwrap();
            for t in 0..300 {
                let a = t % spec.num_actions();
                let x = e1.step(a).unwrap();
                assert_eq!(x, e2.step(a).unwrap());
                if x.terminated {
                    e1.reset();
                    e2.reset();
                }
            }
        }
    }

    #[test]
    fn spec_json_rejects_unknown_keys() {
        let ok: EnvSpec = serde_json::from_str(r#"{"kind":"deep_sea","size":6}"#).unwrap();
        assert_eq!(
            ok,
            EnvSpec::DeepSea {
                size: 6,
                stochastic: false
            }
        );
        assert!(
            serde_json::from_str::<EnvSpec>(r#"{"kind":"deep_sea","size":6,"depth":2}"#).is_err()
        );
    }
}
