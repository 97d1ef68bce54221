//! Shared fixtures for the criterion benches.

use eubrl_core::agents::{AgentConfig, AgentKind};
use eubrl_core::belief::{BeliefConfig, RewardPrior, UncertaintyMode};
use eubrl_core::planner::TabularMdp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense random MDP with strictly positive transition rows.
pub fn random_mdp(seed: u64, states: usize, actions: usize, discount: f64) -> TabularMdp {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = Vec::with_capacity(states * actions * states);
    for _ in 0..states * actions {
        let row: Vec<f64> = (0..states).map(|_| rng.random::<f64>() + 1e-3).collect();
        let total: f64 = row.iter().sum();
        p.extend(row.iter().map(|x| x / total));
    }
    let r = (0..states * actions)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    TabularMdp::new(states, actions, p, r, discount).expect("valid random mdp")
}

pub fn eubrl_agent(mode: UncertaintyMode) -> AgentConfig {
    let mut a = AgentConfig::new(AgentKind::Eubrl);
    a.belief = BeliefConfig {
        dirichlet_alpha: 0.001,
        reward: RewardPrior::NormalGamma {
            mu0: 0.0,
            lambda0: 0.01,
            alpha0: 2.0,
            beta0: 0.01,
        },
        mode,
        eta: 1.0,
    };
    a
}
