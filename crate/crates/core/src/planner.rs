//! Dense tabular MDPs and their exact discounted solvers.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_index, Error, Result};

/// Default planner tolerance, in value units.
pub const DEFAULT_TOLERANCE: f64 = 1e-6;

/// Row-sum tolerance accepted by [`TabularMdp::new`].
pub const SIMPLEX_TOLERANCE: f64 = 1e-9;

/// Relative gap under which two action values count as tied.
const TIE_EPS: f64 = 1e-12;

/// A finite discounted MDP with dense `S × A × S` transitions.
#[derive(Clone, Debug, PartialEq)]
pub struct TabularMdp {
    num_states: usize,
    num_actions: usize,
    transitions: Vec<f64>,
    rewards: Vec<f64>,
    discount: f64,
}

impl TabularMdp {
    /// Validates and builds an MDP. `transitions` is laid out `[s][a][s']`,
    /// `rewards` as `[s][a]`.
    pub fn new(
        num_states: usize,
        num_actions: usize,
        transitions: Vec<f64>,
        rewards: Vec<f64>,
        discount: f64,
    ) -> Result<Self> {
        if num_states == 0 || num_actions == 0 {
            return Err(Error::Config(
                "MDP needs at least one state and one action".into(),
            ));
        }
        if transitions.len() != num_states * num_actions * num_states {
            return Err(Error::Config(format!(
                "transition tensor has {} entries, expected {}",
                transitions.len(),
                num_states * num_actions * num_states
            )));
        }
        if rewards.len() != num_states * num_actions {
            return Err(Error::Config(format!(
                "reward table has {} entries, expected {}",
                rewards.len(),
                num_states * num_actions
            )));
        }
        if !(0.0..1.0).contains(&discount) {
            return Err(Error::Config(format!(
                "discount must lie in [0, 1), got {discount}"
            )));
        }
        if let Some(r) = rewards.iter().find(|r| !r.is_finite()) {
            return Err(Error::Config(format!("non-finite reward {r}")));
        }
        for (i, row) in transitions.chunks(num_states).enumerate() {
            if row.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return Err(Error::Config(format!(
                    "transition row for (s={}, a={}) has a negative or non-finite entry",
                    i / num_actions,
                    i % num_actions
                )));
            }
            let sum: f64 = row.iter().sum();
            if (sum - 1.0).abs() > SIMPLEX_TOLERANCE {
                return Err(Error::Config(format!(
                    "transition row for (s={}, a={}) sums to {sum}",
                    i / num_actions,
                    i % num_actions
                )));
            }
        }
        Ok(TabularMdp {
            num_states,
            num_actions,
            transitions,
            rewards,
            discount,
        })
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn discount(&self) -> f64 {
        self.discount
    }

    pub fn row(&self, s: usize, a: usize) -> &[f64] {
        let start = (s * self.num_actions + a) * self.num_states;
        &self.transitions[start..start + self.num_states]
    }

    pub fn reward(&self, s: usize, a: usize) -> f64 {
        self.rewards[s * self.num_actions + a]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    /// Same dynamics with a different discount factor.
    pub fn with_discount(&self, discount: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&discount) {
            return Err(Error::Config(format!(
                "discount must lie in [0, 1), got {discount}"
            )));
        }
        Ok(TabularMdp {
            discount,
            ..self.clone()
        })
    }

    /// Same dynamics with every reward shifted by `c`.
    pub fn shift_rewards(&self, c: f64) -> Self {
        TabularMdp {
            rewards: self.rewards.iter().map(|r| r + c).collect(),
            ..self.clone()
        }
    }

    /// Q(s,a) = R(s,a) + γ Σ_{s'} P(s'|s,a) V(s').
    pub fn q_value(&self, s: usize, a: usize, values: &[f64]) -> f64 {
        let expected: f64 = self.row(s, a).iter().zip(values).map(|(p, v)| p * v).sum();
        self.reward(s, a) + self.discount * expected
    }

    fn backup(&self, values: &[f64], next: &mut [f64], policy: &mut [usize]) {
        for s in 0..self.num_states {
            let (best_a, best_q) = self.best_action(s, values);
            next[s] = best_q;
            policy[s] = best_a;
        }
    }

    /// Greedy action with lowest-index tie-breaking, and its value.
    fn best_action(&self, s: usize, values: &[f64]) -> (usize, f64) {
        let mut best_a = 0;
        let mut best_q = self.q_value(s, 0, values);
        for a in 1..self.num_actions {
            let q = self.q_value(s, a, values);
            if q > best_q + TIE_EPS * best_q.abs().max(1.0) {
                best_a = a;
                best_q = q;
            }
        }
        (best_a, best_q)
    }
}

/// State values V(s).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValueFunction(pub Vec<f64>);

/// Deterministic policy: one action index per state.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Policy(pub Vec<usize>);

impl ValueFunction {
    pub fn zeros(n: usize) -> Self {
        ValueFunction(vec![0.0; n])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

impl Policy {
    pub fn action(&self, s: usize) -> usize {
        self.0[s]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// ‖max_a(R + γPV) − V‖∞.
pub fn bellman_residual(mdp: &TabularMdp, values: &ValueFunction) -> f64 {
    (0..mdp.num_states)
        .map(|s| (mdp.best_action(s, &values.0).1 - values.0[s]).abs())
        .fold(0.0, f64::max)
}

/// Greedy policy with respect to `values`, ties to the lowest action index.
pub fn greedy_policy(mdp: &TabularMdp, values: &ValueFunction) -> Policy {
    Policy(
        (0..mdp.num_states)
            .map(|s| mdp.best_action(s, &values.0).0)
            .collect(),
    )
}

/// Value iteration from V ≡ 0.
///
/// Returns a value function whose Bellman residual is at most `tol`, and the
/// greedy policy for it.
pub fn value_iteration(
    mdp: &TabularMdp,
    tol: f64,
    max_iters: usize,
) -> Result<(ValueFunction, Policy)> {
    value_iteration_from(mdp, &ValueFunction::zeros(mdp.num_states), tol, max_iters)
}

/// Value iteration warm-started from `init`.
pub fn value_iteration_from(
    mdp: &TabularMdp,
    init: &ValueFunction,
    tol: f64,
    max_iters: usize,
) -> Result<(ValueFunction, Policy)> {
    let trace = value_iteration_trace(mdp, init, tol, max_iters, |_| {})?;
    Ok(trace)
}

/// Value iteration that reports each sweep's sup-norm change to `observe`.
pub fn value_iteration_trace(
    mdp: &TabularMdp,
    init: &ValueFunction,
    tol: f64,
    max_iters: usize,
    mut observe: impl FnMut(f64),
) -> Result<(ValueFunction, Policy)> {
    check_tolerance(tol)?;
    check_len(mdp, init)?;
    let n = mdp.num_states;
    let mut values = init.0.clone();
    let mut next = vec![0.0; n];
    let mut policy = vec![0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..=max_iters {
        mdp.backup(&values, &mut next, &mut policy);
        residual = sup_distance(&next, &values);
        observe(residual);
        if residual <= tol {
            return Ok((ValueFunction(values), Policy(policy)));
        }
        std::mem::swap(&mut values, &mut next);
    }
    Err(Error::Convergence {
        iterations: max_iters,
        residual,
    })
}

/// Iterative evaluation of a fixed policy until ‖V − (R_π + γP_πV)‖∞ ≤ tol.
pub fn policy_evaluation(mdp: &TabularMdp, policy: &Policy, tol: f64) -> Result<ValueFunction> {
    check_tolerance(tol)?;
    check_policy(mdp, policy)?;
    let max_iters = iteration_budget(
        mdp.discount,
        tol,
        mdp.rewards.iter().fold(0.0, |m, r| m.max(r.abs())),
    );
    let n = mdp.num_states;
    let mut values = vec![0.0; n];
    let mut next = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for _ in 0..=max_iters {
        for (s, v) in next.iter_mut().enumerate() {
            *v = mdp.q_value(s, policy.0[s], &values);
        }
        residual = sup_distance(&next, &values);
        if residual <= tol {
            return Ok(ValueFunction(values));
        }
        std::mem::swap(&mut values, &mut next);
    }
    Err(Error::Convergence {
        iterations: max_iters,
        residual,
    })
}

/// Exact evaluation V^π = (I − γP_π)⁻¹ R_π by LU decomposition.
pub fn evaluate_policy_exact(mdp: &TabularMdp, policy: &Policy) -> Result<ValueFunction> {
    check_policy(mdp, policy)?;
    let n = mdp.num_states;
    let gamma = mdp.discount;
    let mut system = DMatrix::<f64>::identity(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for s in 0..n {
        let a = policy.0[s];
        rhs[s] = mdp.reward(s, a);
        for (t, p) in mdp.row(s, a).iter().enumerate() {
            if *p != 0.0 {
                system[(s, t)] -= gamma * p;
            }
        }
    }
    let solution = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Precondition("singular policy-evaluation system".into()))?;
    Ok(ValueFunction(solution.iter().copied().collect()))
}

/// Solver used by agents at every replan.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    /// Plain value iteration sweeps.
    ValueIteration,
    /// Value iteration whose iterate is replaced by the exact value of the
    /// current greedy policy after every sweep (Howard's policy iteration).
    /// Reaches the same fixed point in a handful of sweeps at γ close to 1.
    #[default]
    PolicyIteration,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOptions {
    pub method: SolveMethod,
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            method: SolveMethod::default(),
            tol: DEFAULT_TOLERANCE,
            max_iters: 1_000_000,
        }
    }
}

/// Solves `mdp` to Bellman residual `opts.tol`, optionally warm-started.
pub fn solve(
    mdp: &TabularMdp,
    opts: &SolverOptions,
    warm: Option<&ValueFunction>,
) -> Result<(ValueFunction, Policy)> {
    let init = match warm {
        Some(v) if v.0.len() == mdp.num_states => v.clone(),
        _ => ValueFunction::zeros(mdp.num_states),
    };
    match opts.method {
        SolveMethod::ValueIteration => value_iteration_from(mdp, &init, opts.tol, opts.max_iters),
        SolveMethod::PolicyIteration => policy_iteration(mdp, &init, opts.tol, opts.max_iters),
    }
}

fn policy_iteration(
    mdp: &TabularMdp,
    init: &ValueFunction,
    tol: f64,
    max_iters: usize,
) -> Result<(ValueFunction, Policy)> {
    check_tolerance(tol)?;
    let n = mdp.num_states;
    let mut values = init.clone();
    let mut next = vec![0.0; n];
    let mut policy = vec![0; n];
    let mut residual = f64::INFINITY;
    let mut previous: Option<Vec<usize>> = None;
    for _ in 0..=max_iters {
        mdp.backup(&values.0, &mut next, &mut policy);
        residual = sup_distance(&next, &values.0);
        if residual <= tol {
            return Ok((values, Policy(policy)));
        }
        if previous.as_deref() == Some(&policy[..]) {
            // Policy is stable but the evaluation carries round-off: finish with
            // plain sweeps, which contract at rate γ from here.
            std::mem::swap(&mut values.0, &mut next);
            continue;
        }
        values = evaluate_policy_exact(mdp, &Policy(policy.clone()))?;
        previous = Some(policy.clone());
    }
    Err(Error::Convergence {
        iterations: max_iters,
        residual,
    })
}

/// Sweeps needed for a contraction started at ‖V‖ ≤ r_max/(1−γ) to reach `tol`.
fn iteration_budget(discount: f64, tol: f64, r_max: f64) -> usize {
    if discount == 0.0 {
        return 2;
    }
    let scale = (r_max / (1.0 - discount)).max(1.0);
    let sweeps = ((tol * (1.0 - discount) / scale).ln() / discount.ln()).ceil();
    (sweeps.max(0.0) as usize)
        .saturating_mul(2)
        .saturating_add(100)
}

fn check_tolerance(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "planner tolerance must be positive, got {tol}"
        )))
    }
}

fn check_len(mdp: &TabularMdp, values: &ValueFunction) -> Result<()> {
    if values.0.len() == mdp.num_states {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "value function has {} entries for {} states",
            values.0.len(),
            mdp.num_states
        )))
    }
}

fn check_policy(mdp: &TabularMdp, policy: &Policy) -> Result<()> {
    if policy.0.len() != mdp.num_states {
        return Err(Error::Config(format!(
            "policy has {} entries for {} states",
            policy.0.len(),
            mdp.num_states
        )));
    }
    for &a in &policy.0 {
        check_index("action", a, mdp.num_actions)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_state(r: f64, gamma: f64) -> TabularMdp {
        TabularMdp::new(1, 1, vec![1.0], vec![r], gamma).unwrap()
    }

    fn two_state_chain() -> TabularMdp {
        // s0 → s1 with reward 0, s1 → s1 with reward 1
        TabularMdp::new(2, 1, vec![0.0, 1.0, 0.0, 1.0], vec![0.0, 1.0], 0.9).unwrap()
    }

    #[test]
    fn geometric_series() {
        let (v, pi) = value_iteration(&single_state(1.0, 0.5), 1e-10, 1000).unwrap();
        assert!((v.0[0] - 2.0).abs() < 1e-9);
        assert_eq!(pi.0, vec![0]);
    }

    #[test]
    fn zero_reward_gives_zero_values() {
        let mdp = TabularMdp::new(2, 2, vec![0.5; 8], vec![0.0; 4], 0.9).unwrap();
        let (v, _) = value_iteration(&mdp, 1e-9, 10).unwrap();
        assert_eq!(v.0, vec![0.0, 0.0]);
    }

    #[test]
    fn deterministic_chain_fixed_point() {
        // V(s1) = 1/(1−0.9) = 10, V(s0) = 0.9·10 = 9.
        let (v, _) = value_iteration(&two_state_chain(), 1e-10, 10_000).unwrap();
        assert!((v.0[1] - 10.0).abs() < 1e-8);
        assert!((v.0[0] - 9.0).abs() < 1e-8);
    }

    #[test]
    fn one_backup_residual() {
        let mdp = single_state(1.0, 0.5);
        assert_eq!(bellman_residual(&mdp, &ValueFunction(vec![0.0])), 1.0);
    }

    #[test]
    fn exhausted_budget_reports_residual() {
        let err = value_iteration(&two_state_chain(), 1e-12, 3).unwrap_err();
        match err {
            Error::Convergence {
                iterations,
                residual,
            } => {
                assert_eq!(iterations, 3);
                assert!(residual > 1e-12);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_invalid_models() {
        assert!(TabularMdp::new(1, 1, vec![0.9], vec![0.0], 0.5).is_err());
        assert!(TabularMdp::new(1, 1, vec![1.0], vec![0.0], 1.0).is_err());
        assert!(TabularMdp::new(2, 1, vec![1.5, -0.5, 0.0, 1.0], vec![0.0, 0.0], 0.5).is_err());
    }

    #[test]
    fn constant_reward_evaluation() {
        let mdp = TabularMdp::new(3, 2, vec![1.0 / 3.0; 18], vec![2.0; 6], 0.8).unwrap();
        let v = policy_evaluation(&mdp, &Policy(vec![0, 1, 0]), 1e-10).unwrap();
        for x in v.0 {
            assert!((x - 10.0).abs() < 1e-8);
        }
    }

    #[test]
    fn policy_iteration_reaches_value_iteration_fixed_point() {
        let mdp = TabularMdp::new(
            3,
            2,
            vec![
                0.1, 0.6, 0.3, 1.0, 0.0, 0.0, //
                0.0, 0.5, 0.5, 0.2, 0.2, 0.6, //
                0.3, 0.3, 0.4, 0.0, 0.0, 1.0,
            ],
            vec![0.0, 0.2, 1.0, -0.5, 0.3, 0.6],
            0.99,
        )
        .unwrap();
        let opts = SolverOptions::default();
        let (v_pi, p_pi) = solve(&mdp, &opts, None).unwrap();
        let (v_vi, p_vi) = value_iteration(&mdp, 1e-9, 100_000).unwrap();
        assert_eq!(p_pi, p_vi);
        assert!(sup_distance(&v_pi.0, &v_vi.0) < 1e-4);
        assert!(bellman_residual(&mdp, &v_pi) <= opts.tol);
    }
}
