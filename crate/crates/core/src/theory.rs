//! Executable checks of the closed-form identities, uncertainty rates and
//! worst-case constructions behind the method.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::agents::{Agent, AgentConfig, AgentKind};
use crate::belief::{
    dirichlet, BeliefConfig, BeliefState, RewardPrior, RewardStats, UncertaintyMode,
};
use crate::envs::{EnvInstance, EnvSpec};
use crate::error::{Error, Result};
use crate::special::lambert_w_m1;

/// Outcome of one diagnostic.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub measured: BTreeMap<String, f64>,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
}

impl CheckReport {
    fn new(name: &str) -> Self {
        CheckReport {
            name: name.to_string(),
            passed: true,
            measured: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            counterexample: None,
        }
    }

    fn measure(&mut self, key: &str, value: f64) {
        self.measured.insert(key.to_string(), value);
    }

    fn tolerance(&mut self, key: &str, value: f64) {
        self.tolerances.insert(key.to_string(), value);
    }

    /// Records the first failure only.
    fn fail(&mut self, payload: Value) {
        if self.passed {
            self.counterexample = Some(payload);
        }
        self.passed = false;
    }
}

/// Names accepted by [`run_check`].
pub const CHECKS: [&str; 6] = [
    "transition_decomposition",
    "reward_decomposition",
    "uncertainty_rates",
    "resistance",
    "mi_closed_form",
    "misspecification",
];

/// Runs a check by name with its default parameters.
pub fn run_check(name: &str, seed: u64) -> Result<CheckReport> {
    match name {
        "transition_decomposition" => Ok(check_transition_decomposition(1000, seed)),
        "reward_decomposition" => Ok(check_reward_decomposition(1000, seed)),
        "uncertainty_rates" => Ok(check_uncertainty_rates()),
        "resistance" => check_resistance_suite(100, 300, seed),
        "mi_closed_form" => Ok(check_mi_closed_form(100, 1_000_000, seed)),
        "misspecification" => {
            let a = misspecification_threshold(0.4, 0.1)?.floor() + 1.0;
            run_misspecification_bandit(&BanditCheck {
                prior: a,
                seeds: 200,
                seed_base: seed,
                ..BanditCheck::default()
            })
        }
        other => Err(Error::Config(format!(
            "unknown check {other:?}; expected one of {}",
            CHECKS.join(", ")
        ))),
    }
}

const IDENTITY_TOL: f64 = 1e-12;

fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn random_simplex<R: Rng>(rng: &mut R, k: usize) -> Vec<f64> {
    let mut p: Vec<f64> = (0..k)
        .map(|_| -rng.random::<f64>().max(1e-300).ln())
        .collect();
    let s: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= s);
    p
}

/// P_b − P = (n/(n+α₀))(P̂ − P) + (α₀/(n+α₀))(P_{b₀} − P) for the predictive
/// of a belief fed random counts.
pub fn check_transition_decomposition(trials: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new("transition_decomposition");
    report.tolerance("max_abs_error", IDENTITY_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let k = rng.random_range(2..=8);
        let alpha = match trial {
            1 => 1e-8,
            _ => log_uniform(&mut rng, 1e-3, 10.0),
        };
        let truth = random_simplex(&mut rng, k);
        let config = BeliefConfig {
            dirichlet_alpha: alpha,
            ..BeliefConfig::default()
        };
        let mut belief = BeliefState::new(k, 1, config).expect("valid belief");
        let visits = if trial == 0 {
            0
        } else {
            rng.random_range(1..=50)
        };
        let mut counts = vec![0u64; k];
        for _ in 0..visits {
            let next = rng.random_range(0..k);
            counts[next] += 1;
            belief.update(0, 0, next, 0.0).expect("in range");
        }
        let pb = belief.predictive_transition(0, 0).expect("in range");
        let a0 = alpha * k as f64;
        let n = visits as f64;
        let prior = 1.0 / k as f64;
        for i in 0..k {
            let p_hat = if visits == 0 {
                truth[i]
            } else {
                counts[i] as f64 / n
            };
            let rhs =
                truth[i] + n / (n + a0) * (p_hat - truth[i]) + a0 / (n + a0) * (prior - truth[i]);
            let err = (pb[i] - rhs).abs();
            worst = worst.max(err);
            if err > IDENTITY_TOL {
                report.fail(json!({"trial": trial, "alpha": alpha, "counts": counts, "component": i, "error": err}));
            }
        }
        if trial == 1 {
            let gap = (0..k)
                .map(|i| (pb[i] - counts[i] as f64 / n).abs())
                .fold(0.0, f64::max);
            report.measure("weak_prior_gap_to_empirical", gap);
            if gap > 1e-7 {
                report.fail(json!({"trial": trial, "weak_prior_gap": gap}));
            }
        }
    }
    report.measure("trials", trials as f64);
    report.measure("max_abs_error", worst);
    report
}

/// r_b − r = w₀(μ₀ − r) + w_n(r̂ − r) for Normal-Normal and Normal-Gamma
/// posteriors, with the prior and data weights of each model.
pub fn check_reward_decomposition(trials: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new("reward_decomposition");
    report.tolerance("max_abs_error", IDENTITY_TOL);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for trial in 0..trials {
        let mu0 = rng.random_range(-5.0..5.0);
        let r_true = rng.random_range(-5.0..5.0);
        let n = if trial < 2 {
            trial
        } else {
            rng.random_range(0..=40)
        };
        let mut stats = RewardStats::default();
        let mut sum = 0.0;
        for _ in 0..n {
            let x = r_true + rng.random_range(-3.0..3.0);
            sum += x;
            stats.push(x);
        }
        let nf = n as f64;
        let r_hat = if n == 0 { r_true } else { sum / nf };

        let tau0 = log_uniform(&mut rng, 1e-2, 1e2);
        let tau = if trial == 1 {
            tau0
        } else {
            log_uniform(&mut rng, 1e-2, 1e2)
        };
        let normal = RewardPrior::Normal { mu0, tau0, tau };
        let w0 = tau0 / (tau0 + nf * tau);
        let rhs = r_true + w0 * (mu0 - r_true) + (1.0 - w0) * (r_hat - r_true);
        let err_n = (normal.posterior_mean(&stats) - rhs).abs();

        let lambda0 = log_uniform(&mut rng, 1e-2, 1e2);
        let ng = RewardPrior::NormalGamma {
            mu0,
            lambda0,
            alpha0: 2.0,
            beta0: 1.0,
        };
        let rhs = r_true
            + lambda0 / (lambda0 + nf) * (mu0 - r_true)
            + nf / (lambda0 + nf) * (r_hat - r_true);
        let err_g = (ng.posterior_mean(&stats) - rhs).abs();

        for (model, err) in [("normal", err_n), ("normal_gamma", err_g)] {
            worst = worst.max(err);
            if err > IDENTITY_TOL {
                report.fail(json!({"trial": trial, "model": model, "n": n, "error": err}));
            }
        }
    }
    report.measure("trials", trials as f64);
    report.measure("max_abs_error", worst);
    report
}

/// Largest n used by [`check_uncertainty_rates`].
pub const RATE_HORIZON: u64 = 10_000;

/// Upper O(1/n) and lower Ω(1/n²) (or Θ(1/n)) bounds on the epistemic
/// uncertainty of each conjugate model along its worst-case stream, for
/// n = 1..=10⁴.
///
/// Dirichlet: C₂ = 1, C₁ = 2(α₀ − α_j)/((1+α₀)²(2+α₀)).
/// Normal-Normal: n·E ∈ [1/(τ₀+τ), 1/τ].
/// Normal-Gamma with constant rewards x: n·E ≤ β̄/(α₀ − ½) and
/// n²·E ≥ β₀/((λ₀+1)(α₀ − ½)), where β̄ = β₀ + ½λ₀(x − μ₀)².
pub fn check_uncertainty_rates() -> CheckReport {
    let mut report = CheckReport::new("uncertainty_rates");

    for &(dim, alpha) in &[(2usize, 1.0), (5, 0.1), (10, 1.0), (3, 1e-3)] {
        let a0 = alpha * dim as f64;
        let c1 = 2.0 * (a0 - alpha) / ((1.0 + a0).powi(2) * (2.0 + a0));
        let mut min_lower = f64::INFINITY;
        let mut max_upper: f64 = 0.0;
        for n in 1..=RATE_HORIZON {
            let nf = n as f64;
            let e = dirichlet::variance_uncertainty(alpha, dim, nf, std::iter::once(nf));
            min_lower = min_lower.min(nf * nf * e);
            max_upper = max_upper.max(nf * e);
        }
        let tag = format!("dirichlet_s{dim}_a{alpha}");
        report.measure(&format!("{tag}_min_n2E"), min_lower);
        report.measure(&format!("{tag}_max_nE"), max_upper);
        report.tolerance(&format!("{tag}_C1"), c1);
        report.tolerance(&format!("{tag}_C2"), 1.0);
        if min_lower < c1 || max_upper > 1.0 {
            report.fail(json!({"model": tag, "min_n2E": min_lower, "max_nE": max_upper, "C1": c1}));
        }
    }

    for &(tau0, tau) in &[(1.0, 1.0), (0.1, 2.0), (5.0, 0.5)] {
        let prior = RewardPrior::Normal {
            mu0: 0.0,
            tau0,
            tau,
        };
        let (lo, hi) = (1.0 / (tau0 + tau), 1.0 / tau);
        let mut stats = RewardStats::default();
        let mut min_ne = f64::INFINITY;
        let mut max_ne: f64 = 0.0;
        for n in 1..=RATE_HORIZON {
            stats.push(0.5);
            let ne = n as f64 * prior.epistemic(&stats);
            min_ne = min_ne.min(ne);
            max_ne = max_ne.max(ne);
        }
        let tag = format!("normal_t0{tau0}_t{tau}");
        report.measure(&format!("{tag}_min_nE"), min_ne);
        report.measure(&format!("{tag}_max_nE"), max_ne);
        report.tolerance(&format!("{tag}_C1"), lo);
        report.tolerance(&format!("{tag}_C2"), hi);
        if min_ne < lo * (1.0 - 1e-12) || max_ne > hi * (1.0 + 1e-12) {
            report.fail(json!({"model": tag, "min_nE": min_ne, "max_nE": max_ne}));
        }
    }

    for &(lambda0, beta0, x) in &[(0.1, 0.1, 1.0), (1.0, 0.5, -2.0), (1e-4, 1e-4, 0.0)] {
        let (mu0, alpha0) = (0.0, 2.0);
        let prior = RewardPrior::NormalGamma {
            mu0,
            lambda0,
            alpha0,
            beta0,
        };
        let beta_bar = beta0 + 0.5 * lambda0 * (x - mu0) * (x - mu0);
        let c2 = beta_bar / (alpha0 - 0.5);
        let c1 = beta0 / ((lambda0 + 1.0) * (alpha0 - 0.5));
        let mut stats = RewardStats::default();
        let mut min_n2e = f64::INFINITY;
        let mut max_ne: f64 = 0.0;
        for n in 1..=RATE_HORIZON {
            stats.push(x);
            let nf = n as f64;
            let e = prior.epistemic(&stats);
            min_n2e = min_n2e.min(nf * nf * e);
            max_ne = max_ne.max(nf * e);
        }
        let tag = format!("normal_gamma_l{lambda0}_x{x}");
        report.measure(&format!("{tag}_min_n2E"), min_n2e);
        report.measure(&format!("{tag}_max_nE"), max_ne);
        report.tolerance(&format!("{tag}_C1"), c1);
        report.tolerance(&format!("{tag}_C2"), c2);
        if min_n2e < c1 * (1.0 - 1e-12) || max_ne > c2 * (1.0 + 1e-12) {
            report.fail(
                json!({"model": tag, "min_n2E": min_n2e, "max_nE": max_ne, "C1": c1, "C2": c2}),
            );
        }
    }
    report
}

/// Σ_{t≤T} P_U(s_t, a_t) ≥ 1 + (2/E_max)(√T − 1) at every prefix T.
///
/// `p_u` holds P_U of each visited pair, evaluated before its update.
pub fn check_resistance_lower_bound(p_u: &[f64], e_max: f64) -> CheckReport {
    let mut report = CheckReport::new("resistance");
    let mut sum = 0.0;
    let mut min_slack = f64::INFINITY;
    for (t, &p) in p_u.iter().enumerate() {
        sum += p;
        let steps = (t + 1) as f64;
        let bound = 1.0 + 2.0 / e_max * (steps.sqrt() - 1.0);
        let slack = sum - bound;
        min_slack = min_slack.min(slack);
        if slack < -1e-12 {
            report.fail(json!({"prefix": t + 1, "sum": sum, "bound": bound}));
        }
    }
    report.measure("steps", p_u.len() as f64);
    report.measure("sum", sum);
    report.measure("min_slack", min_slack);
    report.tolerance("slack", -1e-12);
    report
}

/// Drives a count-based EUBRL agent with η = 1 and records P_U(s_t, a_t)
/// before each update. Returns the sequence and E_max.
pub fn count_based_trajectory(env: &EnvSpec, steps: u64, seed: u64) -> Result<(Vec<f64>, f64)> {
    let mut config = AgentConfig::new(AgentKind::Eubrl);
    config.belief.mode = UncertaintyMode::CountBased;
    config.belief.eta = 1.0;
    let mut agent_rng = ChaCha8Rng::seed_from_u64(seed);
    agent_rng.set_stream(1);
    let mut agent = Agent::new(config, env, env.default_discount(), agent_rng)?;
    let mut inst = EnvInstance::new(env.clone(), seed)?;
    let mut trace = Vec::with_capacity(steps as usize);
    for _ in 0..steps {
        let s = inst.state();
        let a = agent.act(s)?;
        trace.push(agent.belief().p_uncertain(s, a)?);
        let tr = inst.step(a)?;
        agent.observe(s, a, tr.next_state, tr.reward, tr.episode_end)?;
        if tr.terminated {
            inst.reset();
        }
    }
    Ok((trace, agent.belief().e_max()))
}

/// The resistance bound over `trajectories` runs spread across every environment.
pub fn check_resistance_suite(trajectories: usize, steps: u64, seed: u64) -> Result<CheckReport> {
    let envs = [
        EnvSpec::Chain {
            slip: 0.2,
            back_reward: 2.0,
            stay_reward: false,
        },
        EnvSpec::Loop { loops: 2 },
        EnvSpec::DeepSea {
            size: 6,
            stochastic: true,
        },
        EnvSpec::LazyChain {
            length: 5,
            stochastic: true,
            flip: 0.2,
        },
        EnvSpec::Bandit {
            means: vec![0.9, 0.4],
        },
    ];
    let mut report = CheckReport::new("resistance");
    report.tolerance("slack", -1e-12);
    let mut min_slack = f64::INFINITY;
    for i in 0..trajectories {
        let env = &envs[i % envs.len()];
        let (trace, e_max) = count_based_trajectory(env, steps, seed.wrapping_add(i as u64))?;
        let r = check_resistance_lower_bound(&trace, e_max);
        min_slack = min_slack.min(r.measured["min_slack"]);
        if !r.passed {
            report.fail(json!({"env": env.name(), "trajectory": i, "detail": r.counterexample}));
        }
    }
    report.measure("trajectories", trajectories as f64);
    report.measure("steps", steps as f64);
    report.measure("min_slack", min_slack);
    Ok(report)
}

/// Monte-Carlo estimate of E_w[KL(Cat(w) ‖ Cat(ᾱ))] for w ~ Dir(params):
/// mean and standard error.
pub fn mutual_information_monte_carlo<R: Rng>(
    params: &[f64],
    samples: usize,
    rng: &mut R,
) -> (f64, f64) {
    let total: f64 = params.iter().sum();
    let log_mean: Vec<f64> = params.iter().map(|a| (a / total).ln()).collect();
    let mut w = vec![0.0; params.len()];
    let (mut m, mut m2) = (0.0, 0.0);
    for i in 0..samples {
        dirichlet::sample_into(params, rng, &mut w);
        let kl: f64 = w
            .iter()
            .zip(&log_mean)
            .filter(|(x, _)| **x > 0.0)
            .map(|(x, lm)| x * (x.ln() - lm))
            .sum();
        let delta = kl - m;
        m += delta / (i + 1) as f64;
        m2 += delta * (kl - m);
    }
    let var = m2 / (samples.max(2) - 1) as f64;
    (m, (var / samples as f64).sqrt())
}

/// Closed-form Dirichlet mutual information against Monte-Carlo KL.
pub fn check_mi_closed_form(trials: usize, samples: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new("mi_closed_form");
    report.tolerance("z_score", 3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cases: Vec<(usize, Vec<f64>)> = (0..trials)
        .map(|t| {
            let k = rng.random_range(2..=6);
            (
                t,
                (0..k).map(|_| log_uniform(&mut rng, 0.05, 20.0)).collect(),
            )
        })
        .collect();
    let results: Vec<(usize, Vec<f64>, f64, f64, f64)> = cases
        .into_par_iter()
        .map(|(t, params)| {
            let mut local = ChaCha8Rng::seed_from_u64(seed);
            local.set_stream(t as u64 + 1);
            let closed = dirichlet::mutual_information_dense(&params);
            let (mc, se) = mutual_information_monte_carlo(&params, samples, &mut local);
            (t, params, closed, mc, se)
        })
        .collect();
    let mut max_z: f64 = 0.0;
    let mut min_mi = f64::INFINITY;
    for (t, params, closed, mc, se) in results {
        let z = (closed - mc).abs() / se.max(f64::MIN_POSITIVE);
        max_z = max_z.max(z);
        min_mi = min_mi.min(closed);
        if z > 3.0 || closed < 0.0 {
            report.fail(json!({"trial": t, "params": params, "closed_form": closed, "monte_carlo": mc, "se": se}));
        }
    }
    let uniform = dirichlet::mutual_information_dense(&[1.0, 1.0]);
    let concentrated = dirichlet::mutual_information_dense(&[1e4; 4]);
    report.measure("trials", trials as f64);
    report.measure("max_z", max_z);
    report.measure("min_mi", min_mi);
    report.measure("dir_1_1", uniform);
    report.measure("dir_concentrated", concentrated);
    report.tolerance("dir_1_1_reference", 0.19315);
    if (uniform - 0.19315).abs() > 1e-3 || concentrated >= 1e-3 {
        report.fail(json!({"dir_1_1": uniform, "dir_concentrated": concentrated}));
    }
    report
}

/// a₁ = (1/2C)·ln(2/(η(1 − e^{−2C}))) − 1 with C = (μ₂ − 5/16)².
pub fn misspecification_a1(mu2: f64, eta: f64) -> f64 {
    let c = (mu2 - 5.0 / 16.0).powi(2);
    (2.0 / (eta * (1.0 - (-2.0 * c).exp()))).ln() / (2.0 * c) - 1.0
}

/// a₂ = −(32/9)·W₋₁(−9η/64).
pub fn misspecification_a2(eta: f64) -> Result<f64> {
    lambert_w_m1(-9.0 * eta / 64.0)
        .map(|w| -32.0 / 9.0 * w)
        .ok_or_else(|| {
            Error::Precondition(format!("confidence {eta} outside the Lambert W domain"))
        })
}

/// max{a₁, a₂}: ⌊a⌋ must exceed this for the sticky construction.
pub fn misspecification_threshold(mu2: f64, eta: f64) -> Result<f64> {
    if mu2 <= 5.0 / 16.0 {
        return Err(Error::Precondition(format!(
            "construction needs mu2 > 5/16, got {mu2}"
        )));
    }
    if !(eta > 0.0 && eta < 1.0) {
        return Err(Error::Precondition(format!(
            "confidence level must lie in (0, 1), got {eta}"
        )));
    }
    Ok(misspecification_a1(mu2, eta).max(misspecification_a2(eta)?))
}

/// Parameters of the two-armed misspecification bandit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BanditCheck {
    pub mu1: f64,
    pub mu2: f64,
    /// Confidence level η of the construction.
    pub confidence: f64,
    /// Symmetric Beta(a, a) prior on both arms.
    pub prior: f64,
    pub seeds: u64,
    pub seed_base: u64,
    pub horizon: u64,
}

impl Default for BanditCheck {
    fn default() -> Self {
        BanditCheck {
            mu1: 0.9,
            mu2: 0.4,
            confidence: 0.1,
            prior: 1.0,
            seeds: 200,
            seed_base: 0,
            horizon: 10_000,
        }
    }
}

/// Whether EUBRL (η = 1) pulls the worse arm at every step. The arm order is
/// drawn per seed so that the tie at the first pull is a fair coin.
pub fn bandit_sticks(check: &BanditCheck, seed: u64) -> Result<bool> {
    let mut layout = ChaCha8Rng::seed_from_u64(seed);
    layout.set_stream(2);
    let swap = layout.random::<bool>();
    let (means, worse) = if swap {
        (vec![check.mu2, check.mu1], 0)
    } else {
        (vec![check.mu1, check.mu2], 1)
    };
    let env = EnvSpec::Bandit { means };
    let mut config = AgentConfig::new(AgentKind::Eubrl);
    config.belief = BeliefConfig {
        dirichlet_alpha: 1.0,
        reward: RewardPrior::BetaBernoulli {
            a: check.prior,
            b: check.prior,
        },
        mode: UncertaintyMode::Variance,
        eta: 1.0,
    };
    let mut agent_rng = ChaCha8Rng::seed_from_u64(seed);
    agent_rng.set_stream(1);
    let mut agent = Agent::new(config, &env, env.default_discount(), agent_rng)?;
    let mut inst = EnvInstance::new(env, seed)?;
    for _ in 0..check.horizon {
        let a = agent.act(0)?;
        if a != worse {
            return Ok(false);
        }
        let tr = inst.step(a)?;
        agent.observe(0, a, tr.next_state, tr.reward, tr.episode_end)?;
    }
    Ok(true)
}

/// Fraction of seeds that never leave the worse arm, against
/// ½(1 − η) minus a three-sigma binomial margin.
pub fn run_misspecification_bandit(check: &BanditCheck) -> Result<CheckReport> {
    let threshold = misspecification_threshold(check.mu2, check.confidence)?;
    if !(check.mu1 > check.mu2) {
        return Err(Error::Precondition(
            "the first arm must be the better one".into(),
        ));
    }
    let outcomes: Result<Vec<bool>> = (0..check.seeds)
        .into_par_iter()
        .map(|i| bandit_sticks(check, check.seed_base.wrapping_add(i)))
        .collect();
    let stuck = outcomes?.iter().filter(|&&x| x).count();
    let fraction = stuck as f64 / check.seeds.max(1) as f64;
    let target = 0.5 * (1.0 - check.confidence);
    let margin = 3.0 * (target * (1.0 - target) / check.seeds.max(1) as f64).sqrt();

    let mut report = CheckReport::new("misspecification");
    report.measure("c", (check.mu2 - 5.0 / 16.0).powi(2));
    report.measure("a1", misspecification_a1(check.mu2, check.confidence));
    report.measure("a2", misspecification_a2(check.confidence)?);
    report.measure("threshold", threshold);
    report.measure("prior", check.prior);
    report.measure("sticky_fraction", fraction);
    report.measure("sticky_runs", stuck as f64);
    report.tolerance("min_sticky_fraction", target - margin);
    let above = check.prior.floor() > threshold;
    report.measure("prior_above_threshold", if above { 1.0 } else { 0.0 });
    if above && fraction < target - margin {
        report.fail(json!({"sticky_fraction": fraction, "required": target - margin}));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constants_of_the_construction() {
        let c = (0.4f64 - 0.3125).powi(2);
        assert!((c - 0.00765625).abs() < 1e-15);
        let a1 = misspecification_a1(0.4, 0.1);
        assert!(a1 > 467.0 && a1 < 469.0, "{a1}");
        let a2 = misspecification_a2(0.1).unwrap();
        // w·e^w = −9/640 on the lower branch
        let w = -9.0 * a2 / 32.0;
        assert!((w * w.exp() + 9.0 * 0.1 / 64.0).abs() < 1e-12);
        assert!(matches!(
            misspecification_threshold(0.3, 0.1),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn resistance_hand_example() {
        let p = [1.0, 1.0, 1.0 / 2f64.sqrt(), 1.0 / 3f64.sqrt()];
        let r = check_resistance_lower_bound(&p, 1.0);
        assert!(r.passed);
        assert!((r.measured["sum"] - 3.284_457_050_376_173).abs() < 1e-12);
        let one = check_resistance_lower_bound(&[1.0], 1.0);
        assert_eq!(one.measured["min_slack"], 0.0);
    }

    #[test]
    fn small_identity_suites_pass() {
        assert!(check_transition_decomposition(50, 1).passed);
        assert!(check_reward_decomposition(50, 1).passed);
    }

    #[test]
    fn unknown_check_is_rejected() {
        assert!(run_check("nope", 0).is_err());
    }
}
