//! EUBRL and the baseline agents.
//!
//! Each agent keeps a [`BeliefState`] (frequentist agents only read its
//! counts), turns it into a planning MDP, and acts greedily on the solution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::belief::{BeliefConfig, BeliefState};
use crate::envs::EnvSpec;
use crate::error::{check_index, Error, Result};
use crate::planner::{self, Policy, SolverOptions, TabularMdp, ValueFunction};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgentKind {
    Eubrl,
    MeanMdp,
    Beb,
    Vbrb,
    MbieEb,
    Rmax,
    Psrl,
}

impl AgentKind {
    pub const ALL: [AgentKind; 7] = [
        AgentKind::Eubrl,
        AgentKind::MeanMdp,
        AgentKind::Beb,
        AgentKind::Vbrb,
        AgentKind::MbieEb,
        AgentKind::Rmax,
        AgentKind::Psrl,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            AgentKind::Eubrl => "eubrl",
            AgentKind::MeanMdp => "mean_mdp",
            AgentKind::Beb => "beb",
            AgentKind::Vbrb => "vbrb",
            AgentKind::MbieEb => "mbie_eb",
            AgentKind::Rmax => "rmax",
            AgentKind::Psrl => "psrl",
        }
    }
}

/// Multiplier applied to the configured η.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EtaScale {
    #[default]
    None,
    /// η × |S|.
    States,
    /// η × R_max.
    MaxReward,
}

fn default_bonus() -> f64 {
    1.0
}

fn default_knowness() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    pub kind: AgentKind,
    #[serde(default)]
    pub belief: BeliefConfig,
    /// Share one transition Dirichlet per action across states.
    #[serde(default)]
    pub tied: bool,
    #[serde(default)]
    pub eta_scale: EtaScale,
    /// Bonus scale β of BEB and MBIE-EB.
    #[serde(default = "default_bonus")]
    pub bonus: f64,
    /// RMAX visit threshold m.
    #[serde(default = "default_knowness")]
    pub knowness: u64,
    /// PSRL resampling period in steps for continuing tasks
    /// (default ⌈1/(1−γ)⌉); episodic tasks resample every episode.
    #[serde(default)]
    pub resample_period: Option<u64>,
    /// Replan every this many steps on continuing tasks (default 1).
    #[serde(default)]
    pub replan_period: Option<u64>,
    #[serde(default)]
    pub solver: Option<SolverOptions>,
}

impl AgentConfig {
    pub fn new(kind: AgentKind) -> Self {
        AgentConfig {
            kind,
            belief: BeliefConfig::default(),
            tied: false,
            eta_scale: EtaScale::None,
            bonus: default_bonus(),
            knowness: default_knowness(),
            resample_period: None,
            replan_period: None,
            solver: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.belief.validate()?;
        if !(self.bonus >= 0.0) || !self.bonus.is_finite() {
            return Err(Error::Config(format!(
                "bonus must be nonnegative, got {}",
                self.bonus
            )));
        }
        if self.knowness == 0 {
            return Err(Error::Config("knowness must be at least 1".into()));
        }
        if self.resample_period == Some(0) || self.replan_period == Some(0) {
            return Err(Error::Config("periods must be at least 1".into()));
        }
        Ok(())
    }

    /// η after applying [`EtaScale`] for `env`.
    pub fn effective_eta(&self, env: &EnvSpec) -> f64 {
        self.belief.eta
            * match self.eta_scale {
                EtaScale::None => 1.0,
                EtaScale::States => env.num_states() as f64,
                EtaScale::MaxReward => env.r_max(),
            }
    }
}

/// r^EUBRL = (1 − P_U)·r_b + P_U·E_b.
pub fn eubrl_reward(r_b: f64, e_total: f64, p_u: f64) -> f64 {
    (1.0 - p_u) * r_b + p_u * e_total
}

#[derive(Clone, Debug)]
pub struct Agent {
    config: AgentConfig,
    belief: BeliefState,
    discount: f64,
    r_max: f64,
    episodic: bool,
    solver: SolverOptions,
    values: ValueFunction,
    policy: Policy,
    rng: ChaCha8Rng,
    steps: u64,
    plans: u64,
}

impl Agent {
    /// Builds the agent for `env` and solves its initial planning MDP.
    pub fn new(config: AgentConfig, env: &EnvSpec, discount: f64, rng: ChaCha8Rng) -> Result<Self> {
        config.validate()?;
        env.validate()?;
        let mut belief_config = config.belief;
        belief_config.eta = config.effective_eta(env);
        let (ns, na) = (env.num_states(), env.num_actions());
        let belief = if config.tied {
            BeliefState::tied(ns, na, belief_config, env.encoding())?
        } else {
            BeliefState::new(ns, na, belief_config)?
        };
        let mut agent = Agent {
            solver: config.solver.unwrap_or_default(),
            config,
            belief,
            discount,
            r_max: env.r_max(),
            episodic: env.is_episodic(),
            values: ValueFunction::zeros(ns),
            policy: Policy(vec![0; ns]),
            rng,
            steps: 0,
            plans: 0,
        };
        agent.replan()?;
        Ok(agent)
    }

    pub fn with_seed(config: AgentConfig, env: &EnvSpec, discount: f64, seed: u64) -> Result<Self> {
        Self::new(config, env, discount, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn kind(&self) -> AgentKind {
        self.config.kind
    }

    pub fn belief(&self) -> &BeliefState {
        &self.belief
    }

    pub fn policy(&self) -> &Policy {
        &self.policy
    }

    pub fn values(&self) -> &ValueFunction {
        &self.values
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    /// Number of planning MDPs solved so far.
    pub fn plans(&self) -> u64 {
        self.plans
    }

    pub fn act(&self, s: usize) -> Result<usize> {
        check_index("state", s, self.policy.0.len())?;
        Ok(self.policy.0[s])
    }

    /// Absorbs one transition and replans when the schedule says so.
    pub fn observe(
        &mut self,
        s: usize,
        a: usize,
        next: usize,
        r: f64,
        episode_end: bool,
    ) -> Result<()> {
        self.belief.update(s, a, next, r)?;
        self.steps += 1;
        if self.replan_due(episode_end) {
            self.replan()?;
        }
        Ok(())
    }

    fn replan_due(&self, episode_end: bool) -> bool {
        if self.config.kind == AgentKind::Psrl {
            return if self.episodic {
                episode_end
            } else {
                self.steps.is_multiple_of(self.resample_period())
            };
        }
        if self.episodic {
            episode_end
        } else {
            self.steps
                .is_multiple_of(self.config.replan_period.unwrap_or(1))
        }
    }

    fn resample_period(&self) -> u64 {
        self.config
            .resample_period
            .unwrap_or_else(|| (1.0 / (1.0 - self.discount)).ceil() as u64)
            .max(1)
    }

    fn replan(&mut self) -> Result<()> {
        let mdp = self.build_planning_mdp()?;
        let warm = (self.plans > 0).then_some(&self.values);
        let (values, policy) = planner::solve(&mdp, &self.solver, warm)?;
        self.values = values;
        self.policy = policy;
        self.plans += 1;
        Ok(())
    }

    /// Planning MDP for the current belief. PSRL draws a fresh posterior sample.
    pub fn build_planning_mdp(&mut self) -> Result<TabularMdp> {
        if self.config.kind == AgentKind::Psrl {
            return self.belief.sample_model(&mut self.rng, self.discount);
        }
        let b = &self.belief;
        let (ns, na) = (b.num_states(), b.num_actions());
        let mut transitions = vec![0.0; ns * na * ns];
        let mut rewards = vec![0.0; ns * na];

        let mut uncertainty = Vec::new();
        if self.config.kind == AgentKind::Eubrl {
            uncertainty.reserve(ns * na);
            for s in 0..ns {
                for a in 0..na {
                    uncertainty.push(b.epistemic_total(s, a)?);
                }
            }
            let peak = uncertainty.iter().copied().fold(0.0, f64::max);
            self.belief.track_uncertainty(peak);
        }
        let b = &self.belief;
        let counts = b.counts();
        let alpha_total = b.prior_concentration();

        for s in 0..ns {
            for a in 0..na {
                let i = s * na + a;
                let row = &mut transitions[i * ns..(i + 1) * ns];
                let n = counts.visits(s, a);
                rewards[i] = match self.config.kind {
                    AgentKind::Eubrl => {
                        b.fill_predictive(s, a, row)?;
                        let e = uncertainty[i];
                        eubrl_reward(b.predictive_reward_mean(s, a)?, e, b.p_uncertain_of(e)?)
                    }
                    AgentKind::MeanMdp => {
                        b.fill_predictive(s, a, row)?;
                        b.predictive_reward_mean(s, a)?
                    }
                    AgentKind::Vbrb => {
                        b.fill_predictive(s, a, row)?;
                        b.predictive_reward_mean(s, a)? + b.epistemic_total(s, a)?
                    }
                    AgentKind::Beb => {
                        b.fill_predictive(s, a, row)?;
                        let r = match counts.empirical_reward(s, a) {
                            Some(r) => r,
                            None => b.predictive_reward_mean(s, a)?,
                        };
                        r + self.config.bonus / (1.0 + n as f64 + alpha_total)
                    }
                    AgentKind::MbieEb => {
                        if n == 0 {
                            row[s] = 1.0;
                            self.r_max
                        } else {
                            fill_empirical(counts.entries(s, a), n, row);
                            counts.empirical_reward(s, a).unwrap_or(0.0)
                                + self.config.bonus / (n as f64).sqrt()
                        }
                    }
                    AgentKind::Rmax => {
                        if n < self.config.knowness {
                            row[s] = 1.0;
                            self.r_max
                        } else {
                            fill_empirical(counts.entries(s, a), n, row);
                            counts.empirical_reward(s, a).unwrap_or(0.0)
                        }
                    }
                    AgentKind::Psrl => unreachable!("handled above"),
                };
            }
        }
        TabularMdp::new(ns, na, transitions, rewards, self.discount)
    }
}

fn fill_empirical(entries: &[crate::belief::NextEntry], n: u64, row: &mut [f64]) {
    for e in entries {
        row[e.state] = e.count as f64 / n as f64;
    }
}
