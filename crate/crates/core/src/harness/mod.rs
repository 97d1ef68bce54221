//! Seeded experiment runs, metrics, sweeps and result files.

mod io;
mod metrics;
mod sweep;

use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::agents::{Agent, AgentConfig};
use crate::envs::{EnvInstance, EnvSpec};
use crate::error::{Error, Result};
use crate::planner::{self, Policy, TabularMdp, ValueFunction};

pub use io::{
    read_config, read_records, write_csv_rows, write_json_line, write_results, write_summaries,
    write_timing, CsvFloat, JsonlWriter, ResultPaths,
};
pub use metrics::{size_curves, CurvePoint, MetricsSummary};
pub use sweep::{apply_grid, expand_grid, sweep, Grid, SweepOutcome, SweepRow};

/// Environment variable that shifts every seed.
pub const SEED_OFFSET_VAR: &str = "EUBRL_SEED_OFFSET";
/// Default number of consecutive optimal episodes that count as solved.
pub const DEFAULT_SUCCESS_WINDOW: usize = 5;
/// An action is optimal when its Q* is within this of the best.
pub const OPTIMALITY_TOLERANCE: f64 = 1e-8;

/// Seed list, written either as an array or as a half-open range `"a..b"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Seeds(pub Vec<u64>);

impl Seeds {
    pub fn range(start: u64, end: u64) -> Self {
        Seeds((start..end).collect())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let (a, b) = text.split_once("..").ok_or_else(|| {
            Error::Config(format!("seed range must look like a..b, got {text:?}"))
        })?;
        let parse = |x: &str| {
            x.trim()
                .parse::<u64>()
                .map_err(|_| Error::Config(format!("bad seed bound {x:?} in {text:?}")))
        };
        let (a, b) = (parse(a)?, parse(b)?);
        if b <= a {
            return Err(Error::Config(format!("empty seed range {text:?}")));
        }
        Ok(Seeds::range(a, b))
    }

    pub fn shifted(&self, offset: u64) -> Self {
        Seeds(self.0.iter().map(|s| s.wrapping_add(offset)).collect())
    }
}

impl Default for Seeds {
    fn default() -> Self {
        Seeds::range(0, 10)
    }
}

impl<'de> Deserialize<'de> for Seeds {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            List(Vec<u64>),
            Range(String),
        }
        match Raw::deserialize(d)? {
            Raw::List(v) => Ok(Seeds(v)),
            Raw::Range(s) => Seeds::parse(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Reads [`SEED_OFFSET_VAR`]; unset means 0.
pub fn seed_offset_from_env() -> Result<u64> {
    match std::env::var(SEED_OFFSET_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::Config(format!(
                "{SEED_OFFSET_VAR} must be a nonnegative integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(0),
    }
}

fn default_window() -> usize {
    DEFAULT_SUCCESS_WINDOW
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub label: Option<String>,
    pub env: EnvSpec,
    pub agent: AgentConfig,
    /// Defaults to the environment's discount.
    #[serde(default)]
    pub discount: Option<f64>,
    /// Step budget T_max; defaults to the environment's.
    #[serde(default)]
    pub steps: Option<u64>,
    #[serde(default)]
    pub seeds: Seeds,
    /// Consecutive optimal episodes required to count as solved.
    #[serde(default = "default_window")]
    pub success_window: usize,
    /// Halt once solved; defaults to true on solve-style tasks.
    #[serde(default)]
    pub stop_on_solve: Option<bool>,
    /// Log per-step regret every this many steps.
    #[serde(default)]
    pub regret_stride: Option<u64>,
    /// Keep every (s, a, r) in the run record.
    #[serde(default)]
    pub log_trajectory: bool,
    #[serde(default)]
    pub out: Option<String>,
}

impl ExperimentConfig {
    pub fn new(env: EnvSpec, agent: AgentConfig) -> Self {
        ExperimentConfig {
            label: None,
            env,
            agent,
            discount: None,
            steps: None,
            seeds: Seeds::default(),
            success_window: DEFAULT_SUCCESS_WINDOW,
            stop_on_solve: None,
            regret_stride: None,
            log_trajectory: false,
            out: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.env.validate()?;
        self.agent.validate()?;
        let g = self.discount();
        if !(0.0..1.0).contains(&g) {
            return Err(Error::Config(format!(
                "discount must lie in [0, 1), got {g}"
            )));
        }
        if self.budget() == 0 {
            return Err(Error::Config("step budget must be positive".into()));
        }
        if self.success_window == 0 {
            return Err(Error::Config("success_window must be at least 1".into()));
        }
        if self.regret_stride == Some(0) {
            return Err(Error::Config("regret_stride must be at least 1".into()));
        }
        Ok(())
    }

    pub fn discount(&self) -> f64 {
        self.discount.unwrap_or_else(|| self.env.default_discount())
    }

    pub fn budget(&self) -> u64 {
        self.steps.unwrap_or_else(|| self.env.default_budget())
    }

    pub fn stops_on_solve(&self) -> bool {
        self.stop_on_solve
            .unwrap_or_else(|| self.env.is_solve_task())
    }

    /// Label used in summaries: explicit label or `agent/env-size`.
    pub fn display_label(&self) -> String {
        self.label.clone().unwrap_or_else(|| {
            format!(
                "{}/{}-{}",
                self.agent.kind.name(),
                self.env.name(),
                self.env.size()
            )
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Halt {
    Solved,
    Budget,
    Error,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepLog {
    pub s: usize,
    pub a: usize,
    pub r: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegretPoint {
    pub step: u64,
    /// V*(s_t) − V^{π_t}(s_t), clamped at 0.
    pub gap: f64,
    /// Running sum of gaps, each weighted by the stride.
    pub cumulative: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub steps: u64,
    pub episodes: u64,
    pub total_return: f64,
    pub halt: Halt,
    pub solve_step: Option<u64>,
    pub solve_episode: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub regret: Vec<RegretPoint>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trajectory: Vec<StepLog>,
}

impl RunRecord {
    pub fn solved(&self) -> bool {
        self.solve_step.is_some()
    }

    fn failed(seed: u64, err: &Error) -> Self {
        RunRecord {
            seed,
            steps: 0,
            episodes: 0,
            total_return: 0.0,
            halt: Halt::Error,
            solve_step: None,
            solve_episode: None,
            error: Some(err.to_string()),
            regret: Vec::new(),
            trajectory: Vec::new(),
        }
    }
}

/// Ground-truth quantities used only for metrics.
#[derive(Clone, Debug)]
pub struct Oracle {
    pub mdp: TabularMdp,
    pub policy: Policy,
    pub values: ValueFunction,
}

impl Oracle {
    pub fn new(env: &EnvSpec, discount: f64) -> Result<Self> {
        let mdp = env.ground_truth_mdp(discount)?;
        let (policy, values) = env.optimal_policy_and_value(discount)?;
        Ok(Oracle {
            mdp,
            policy,
            values,
        })
    }

    /// `a` attains max_a' Q*(s, a') within [`OPTIMALITY_TOLERANCE`].
    pub fn is_optimal(&self, s: usize, a: usize) -> bool {
        let v = &self.values.0;
        let best = (0..self.mdp.num_actions())
            .map(|b| self.mdp.q_value(s, b, v))
            .fold(f64::NEG_INFINITY, f64::max);
        self.mdp.q_value(s, a, v) >= best - OPTIMALITY_TOLERANCE
    }

    /// V*(s) − V^π(s), clamped at 0.
    pub fn gap(&self, policy: &Policy, s: usize) -> Result<f64> {
        let v_pi = planner::evaluate_policy_exact(&self.mdp, policy)?;
        Ok((self.values.0[s] - v_pi.0[s]).max(0.0))
    }
}

/// First episode (1-based) that completes a run of `window` consecutive
/// optimal episodes, given one flag per finished episode.
pub fn detect_solve(episode_optimal: &[bool], window: usize) -> Option<usize> {
    let mut streak = 0;
    for (i, &ok) in episode_optimal.iter().enumerate() {
        streak = if ok { streak + 1 } else { 0 };
        if streak >= window.max(1) {
            return Some(i + 1);
        }
    }
    None
}

fn rngs(seed: u64) -> (ChaCha8Rng, ChaCha8Rng) {
    let env_rng = ChaCha8Rng::seed_from_u64(seed);
    let mut agent_rng = ChaCha8Rng::seed_from_u64(seed);
    agent_rng.set_stream(1);
    (env_rng, agent_rng)
}

/// Runs one seed to its budget, or until solved when configured to stop.
pub fn run_single(config: &ExperimentConfig, seed: u64) -> Result<RunRecord> {
    config.validate()?;
    let oracle = Oracle::new(&config.env, config.discount())?;
    run_with_oracle(config, &oracle, seed).map_err(|e| Error::Run {
        seed,
        source: Box::new(e),
    })
}

fn run_with_oracle(config: &ExperimentConfig, oracle: &Oracle, seed: u64) -> Result<RunRecord> {
    let (env_rng, agent_rng) = rngs(seed);
    let mut env = EnvInstance::with_rng(config.env.clone(), env_rng)?;
    let mut agent = Agent::new(
        config.agent.clone(),
        &config.env,
        config.discount(),
        agent_rng,
    )?;
    let budget = config.budget();
    let stop = config.stops_on_solve();

    let mut record = RunRecord {
        seed,
        steps: 0,
        episodes: 0,
        total_return: 0.0,
        halt: Halt::Budget,
        solve_step: None,
        solve_episode: None,
        error: None,
        regret: Vec::new(),
        trajectory: Vec::new(),
    };
    let mut episode_optimal = true;
    let mut streak = 0usize;
    let mut cumulative_regret = 0.0;

    for t in 0..budget {
        let s = env.state();
        if let Some(stride) = config.regret_stride {
            if t % stride == 0 {
                let gap = oracle.gap(agent.policy(), s)?;
                cumulative_regret += gap * stride as f64;
                record.regret.push(RegretPoint {
                    step: t,
                    gap,
                    cumulative: cumulative_regret,
                });
            }
        }
        let a = agent.act(s)?;
        episode_optimal &= oracle.is_optimal(s, a);
        let tr = env.step(a)?;
        agent.observe(s, a, tr.next_state, tr.reward, tr.episode_end)?;
        record.total_return += tr.reward;
        record.steps = t + 1;
        if config.log_trajectory {
            record.trajectory.push(StepLog { s, a, r: tr.reward });
        }
        if tr.episode_end {
            record.episodes += 1;
            streak = if episode_optimal { streak + 1 } else { 0 };
            episode_optimal = true;
            if streak >= config.success_window && record.solve_step.is_none() {
                record.solve_step = Some(t + 1);
                record.solve_episode = Some(record.episodes);
                if stop {
                    record.halt = Halt::Solved;
                    break;
                }
            }
        }
        if tr.terminated {
            env.reset();
        }
    }
    if record.solve_step.is_some() {
        record.halt = Halt::Solved;
    }
    if let Some(stride) = config.regret_stride {
        let gap = oracle.gap(agent.policy(), env.state())?;
        record.regret.push(RegretPoint {
            step: record.steps,
            gap,
            cumulative: cumulative_regret + gap * (record.steps % stride) as f64,
        });
    }
    Ok(record)
}

/// All run records of one configuration plus their summary.
#[derive(Clone, Debug)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
    /// Wall time per run in seconds, aligned with `records`.
    pub wall_seconds: Vec<f64>,
    pub summary: MetricsSummary,
}

/// Runs every seed of `config` on `workers` threads (all cores when `None`).
/// Records come back in seed-list order whatever the worker count.
pub fn run_experiment(config: &ExperimentConfig, workers: Option<usize>) -> Result<Experiment> {
    config.validate()?;
    if config.seeds.0.is_empty() {
        return Err(Error::Config("seed list is empty".into()));
    }
    let oracle = Oracle::new(&config.env, config.discount())?;
    let run_all = || -> Vec<(RunRecord, f64)> {
        config
            .seeds
            .0
            .par_iter()
            .map(|&seed| {
                let started = Instant::now();
                let record = run_with_oracle(config, &oracle, seed)
                    .unwrap_or_else(|e| RunRecord::failed(seed, &e));
                (record, started.elapsed().as_secs_f64())
            })
            .collect()
    };
    let runs = match workers {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k.max(1))
            .build()
            .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?
            .install(run_all),
        None => run_all(),
    };
    let (records, wall_seconds): (Vec<_>, Vec<_>) = runs.into_iter().unzip();
    let summary = MetricsSummary::from_records(config, &records);
    Ok(Experiment {
        config: config.clone(),
        records,
        wall_seconds,
        summary,
    })
}
