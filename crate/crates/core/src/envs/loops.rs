use super::{push, Outcome, RewardDist};

/// Hub is state 0; loop k occupies states 4k+1 ..= 4k+4 and action k enters
/// it. The last loop pays 2 on returning to the hub and is left early by any
/// other action; the remaining loops pay 1 and ignore the action.
pub(super) fn outcomes(loops: usize, s: usize, a: usize, out: &mut Vec<Outcome>) {
    let best = loops - 1;
    let zero = RewardDist::Fixed(0.0);
    if s == 0 {
        push(out, 1.0, 4 * a + 1, zero, false);
        return;
    }
    let k = (s - 1) / 4;
    let pos = (s - 1) % 4;
    if k == best && a != best {
        push(out, 1.0, 0, zero, false);
    } else if pos == 3 {
        let r = if k == best { 2.0 } else { 1.0 };
        push(out, 1.0, 0, RewardDist::Fixed(r), false);
    } else {
        push(out, 1.0, s + 1, zero, false);
    }
}
