use super::{push, Outcome, RewardDist, CHAIN_STATES};
use crate::belief::NextStateEncoding;

const LAST: usize = CHAIN_STATES - 1;

fn forward(s: usize) -> usize {
    (s + 1).min(LAST)
}

fn landing_reward(stay_reward: bool, s: usize, next: usize) -> f64 {
    if next == LAST && (!stay_reward || s == LAST) {
        10.0
    } else {
        0.0
    }
}

pub(super) fn outcomes(
    slip: f64,
    back_reward: f64,
    stay_reward: bool,
    s: usize,
    a: usize,
    out: &mut Vec<Outcome>,
) {
    let p_forward = if a == 1 { 1.0 - slip } else { slip };
    let fwd = forward(s);
    push(
        out,
        p_forward,
        fwd,
        RewardDist::Fixed(landing_reward(stay_reward, s, fwd)),
        false,
    );
    push(
        out,
        1.0 - p_forward,
        0,
        RewardDist::Fixed(back_reward + landing_reward(stay_reward, s, 0)),
        false,
    );
}

/// Classes: 0 = forward, 1 = reset to the leftmost state.
#[derive(Clone, Copy, Debug)]
pub struct ChainEncoding;

impl NextStateEncoding for ChainEncoding {
    fn num_classes(&self) -> usize {
        2
    }

    fn target(&self, state: usize, class: usize) -> usize {
        if class == 0 {
            forward(state)
        } else {
            0
        }
    }
}
