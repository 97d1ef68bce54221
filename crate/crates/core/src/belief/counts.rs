use super::reward::RewardStats;
use crate::error::{check_index, Result};

/// Observations that followed one `(s, a)` pair and landed in `state`.
#[derive(Clone, Debug, PartialEq)]
pub struct NextEntry {
    pub state: usize,
    pub count: u64,
    pub reward: RewardStats,
}

#[derive(Clone, Debug, Default, PartialEq)]
struct PairCounts {
    visits: u64,
    next: Vec<NextEntry>,
}

/// Visit counts N(s,a), transition counts N(s,a,s') and the reward
/// statistics conditioned on each observed `(s, a, s')`.
///
/// Storage is sparse in the next state: only observed successors are kept.
#[derive(Clone, Debug, PartialEq)]
pub struct CountTable {
    num_states: usize,
    num_actions: usize,
    pairs: Vec<PairCounts>,
    total: u64,
}

impl CountTable {
    pub fn new(num_states: usize, num_actions: usize) -> Self {
        CountTable {
            num_states,
            num_actions,
            pairs: vec![PairCounts::default(); num_states * num_actions],
            total: 0,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    fn idx(&self, s: usize, a: usize) -> usize {
        s * self.num_actions + a
    }

    pub(crate) fn check(&self, s: usize, a: usize) -> Result<()> {
        check_index("state", s, self.num_states)?;
        check_index("action", a, self.num_actions)
    }

    pub fn record(&mut self, s: usize, a: usize, next: usize, reward: f64) -> Result<()> {
        self.check(s, a)?;
        check_index("next state", next, self.num_states)?;
        let i = self.idx(s, a);
        let pair = &mut self.pairs[i];
        pair.visits += 1;
        match pair.next.iter_mut().find(|e| e.state == next) {
            Some(entry) => {
                entry.count += 1;
                entry.reward.push(reward);
            }
            None => {
                let mut stats = RewardStats::default();
                stats.push(reward);
                pair.next.push(NextEntry {
                    state: next,
                    count: 1,
                    reward: stats,
                });
            }
        }
        self.total += 1;
        Ok(())
    }

    /// N(s,a). Panics on out-of-range indices.
    pub fn visits(&self, s: usize, a: usize) -> u64 {
        self.pairs[self.idx(s, a)].visits
    }

    pub fn transition_count(&self, s: usize, a: usize, next: usize) -> u64 {
        self.entry(s, a, next).map_or(0, |e| e.count)
    }

    pub fn entry(&self, s: usize, a: usize, next: usize) -> Option<&NextEntry> {
        self.pairs[self.idx(s, a)]
            .next
            .iter()
            .find(|e| e.state == next)
    }

    /// Observed successors of `(s, a)` in first-seen order.
    pub fn entries(&self, s: usize, a: usize) -> &[NextEntry] {
        &self.pairs[self.idx(s, a)].next
    }

    /// Total number of recorded transitions.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Empirical transition frequencies P̂(·|s,a), `None` when unvisited.
    pub fn empirical_transition(&self, s: usize, a: usize) -> Option<Vec<f64>> {
        let n = self.visits(s, a);
        if n == 0 {
            return None;
        }
        let mut row = vec![0.0; self.num_states];
        for e in self.entries(s, a) {
            row[e.state] = e.count as f64 / n as f64;
        }
        Some(row)
    }

    /// Empirical mean reward r̂(s,a), `None` when unvisited.
    pub fn empirical_reward(&self, s: usize, a: usize) -> Option<f64> {
        let n = self.visits(s, a);
        if n == 0 {
            return None;
        }
        let sum: f64 = self.entries(s, a).iter().map(|e| e.reward.sum()).sum();
        Some(sum / n as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn visits_equal_sum_of_transition_counts() {
        let mut t = CountTable::new(3, 2);
        let stream = [
            (0, 1, 2, 1.0),
            (0, 1, 2, 0.0),
            (0, 1, 0, 3.0),
            (2, 0, 1, -1.0),
        ];
        for &(s, a, n, r) in &stream {
            t.record(s, a, n, r).unwrap();
        }
        for s in 0..3 {
            for a in 0..2 {
                let sum: u64 = (0..3).map(|n| t.transition_count(s, a, n)).sum();
                assert_eq!(sum, t.visits(s, a));
            }
        }
        assert_eq!(t.total(), 4);
        assert_eq!(
            t.empirical_transition(0, 1).unwrap(),
            vec![1.0 / 3.0, 0.0, 2.0 / 3.0]
        );
        assert!((t.empirical_reward(0, 1).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(t.empirical_reward(1, 1), None);
    }

    #[test]
    fn out_of_range_is_an_index_error() {
        let mut t = CountTable::new(2, 2);
        assert!(t.record(2, 0, 0, 0.0).is_err());
        assert!(t.record(0, 2, 0, 0.0).is_err());
        assert!(t.record(0, 0, 5, 0.0).is_err());
        assert_eq!(t.total(), 0);
    }
}
