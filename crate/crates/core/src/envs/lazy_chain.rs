use super::{push, Outcome, RewardDist};
use crate::belief::NextStateEncoding;

/// Where a move from `s` in direction `dir` lands, its reward, and whether
/// it reached an end (which teleports back to the middle).
fn shift(n: usize, s: usize, dir: isize) -> (usize, f64, bool) {
    let t = (s as isize + dir).clamp(0, 2 * n as isize) as usize;
    if t == 0 {
        (n, (n - 1) as f64, true)
    } else if t == 2 * n {
        (n, (2 * n - 1) as f64, true)
    } else {
        (t, -1.0, false)
    }
}

/// Actions: 0 = left, 1 = do nothing, 2 = right. Moves are flipped with
/// probability `flip`.
pub(super) fn outcomes(n: usize, flip: f64, s: usize, a: usize, out: &mut Vec<Outcome>) {
    if a == 1 {
        push(out, 1.0, s, RewardDist::Fixed(0.0), false);
        return;
    }
    let dir = if a == 0 { -1 } else { 1 };
    for (p, d) in [(1.0 - flip, dir), (flip, -dir)] {
        let (next, r, end) = shift(n, s, d);
        push(out, p, next, RewardDist::Fixed(r), end);
    }
}

/// Classes: 0 = left, 1 = stay, 2 = right.
#[derive(Clone, Copy, Debug)]
pub struct LazyChainEncoding {
    pub length: usize,
}

impl NextStateEncoding for LazyChainEncoding {
    fn num_classes(&self) -> usize {
        3
    }

    fn target(&self, state: usize, class: usize) -> usize {
        match class {
            1 => state,
            0 => shift(self.length, state, -1).0,
            _ => shift(self.length, state, 1).0,
        }
    }
}
