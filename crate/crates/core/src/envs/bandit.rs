use super::{push, Outcome, RewardDist};

pub(super) fn outcomes(means: &[f64], a: usize, out: &mut Vec<Outcome>) {
    push(out, 1.0, 0, RewardDist::Bernoulli(means[a]), false);
}
