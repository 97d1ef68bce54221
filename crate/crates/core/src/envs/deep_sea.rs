use super::{push, Outcome, RewardDist};
use crate::belief::NextStateEncoding;

pub(super) fn move_cost(size: usize) -> f64 {
    0.01 / size as f64
}

/// State `row·N + col`; action 1 moves down-right, 0 down-left. The step
/// out of the last row ends the episode and lands on the start state.
pub(super) fn outcomes(n: usize, stochastic: bool, s: usize, a: usize, out: &mut Vec<Outcome>) {
    let (row, col) = (s / n, s % n);
    let right = a == 1;
    let last = row == n - 1;

    let mut mean = 0.0;
    if right {
        mean -= move_cost(n);
    }
    if last && col == n - 1 && right {
        mean += 1.0;
    }
    let noisy = stochastic && last && (col == 0 || col == n - 1);
    let reward = if noisy {
        RewardDist::Normal { mean, sd: 1.0 }
    } else {
        RewardDist::Fixed(mean)
    };

    let next = |c: usize| if last { 0 } else { (row + 1) * n + c };
    let left_col = col.saturating_sub(1);
    let right_col = (col + 1).min(n - 1);
    if right {
        let bad = if stochastic { 1.0 / n as f64 } else { 0.0 };
        push(out, 1.0 - bad, next(right_col), reward, last);
        push(out, bad, next(left_col), reward, last);
    } else {
        push(out, 1.0, next(left_col), reward, last);
    }
}

/// Classes: 0 = down-left, 1 = down-right (clipped at the walls).
#[derive(Clone, Copy, Debug)]
pub struct DeepSeaEncoding {
    pub size: usize,
}

impl NextStateEncoding for DeepSeaEncoding {
    fn num_classes(&self) -> usize {
        2
    }

    fn target(&self, state: usize, class: usize) -> usize {
        let n = self.size;
        let (row, col) = (state / n, state % n);
        if row + 1 >= n {
            return 0;
        }
        let c = if class == 0 {
            col.saturating_sub(1)
        } else {
            (col + 1).min(n - 1)
        };
        (row + 1) * n + c
    }
}
