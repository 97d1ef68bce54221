use serde::{Deserialize, Serialize};

use super::{ExperimentConfig, Halt, RunRecord};

/// Aggregate over the seeds of one configuration.
///
/// Steps and episodes to solve count failed runs at their halting point,
/// i.e. at the budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub label: String,
    pub env: String,
    pub agent: String,
    pub size: usize,
    pub runs: usize,
    pub errors: usize,
    pub incomplete: bool,
    pub mean_return: f64,
    pub se_return: f64,
    pub success_rate: f64,
    pub mean_steps_to_solve: f64,
    pub se_steps_to_solve: f64,
    pub mean_episodes_to_solve: f64,
    pub mean_final_regret: Option<f64>,
}

/// Sample mean and standard error sd/√n (0 for fewer than two values).
pub(crate) fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

impl MetricsSummary {
    pub fn from_records(config: &ExperimentConfig, records: &[RunRecord]) -> Self {
        let ok: Vec<&RunRecord> = records.iter().filter(|r| r.halt != Halt::Error).collect();
        let budget = config.budget() as f64;
        let returns: Vec<f64> = ok.iter().map(|r| r.total_return).collect();
        let steps: Vec<f64> = ok
            .iter()
            .map(|r| r.solve_step.map_or(budget, |s| s as f64))
            .collect();
        let episodes: Vec<f64> = ok
            .iter()
            .map(|r| r.solve_episode.unwrap_or(r.episodes) as f64)
            .collect();
        let regrets: Vec<f64> = ok
            .iter()
            .filter_map(|r| r.regret.last().map(|p| p.cumulative))
            .collect();
        let (mean_return, se_return) = mean_se(&returns);
        let (mean_steps, se_steps) = mean_se(&steps);
        let solved = ok.iter().filter(|r| r.solved()).count();
        let errors = records.len() - ok.len();
        MetricsSummary {
            label: config.display_label(),
            env: config.env.name().to_string(),
            agent: config.agent.kind.name().to_string(),
            size: config.env.size(),
            runs: records.len(),
            errors,
            incomplete: errors > 0,
            mean_return,
            se_return,
            success_rate: if ok.is_empty() {
                0.0
            } else {
                solved as f64 / ok.len() as f64
            },
            mean_steps_to_solve: mean_steps,
            se_steps_to_solve: se_steps,
            mean_episodes_to_solve: mean_se(&episodes).0,
            mean_final_regret: (!regrets.is_empty()).then(|| mean_se(&regrets).0),
        }
    }
}

/// One point of a metric-versus-size curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub label: String,
    pub size: usize,
    pub metric: String,
    pub mean: f64,
    pub se: f64,
}

/// Success-rate and steps-to-solve curves against problem size, grouped by
/// `agent/env` and sorted by size.
pub fn size_curves(summaries: &[MetricsSummary]) -> Vec<CurvePoint> {
    let mut points = Vec::new();
    for s in summaries {
        let label = format!("{}/{}", s.agent, s.env);
        let n = (s.runs - s.errors) as f64;
        let p = s.success_rate;
        let se_rate = if n > 1.0 {
            (p * (1.0 - p) / n).sqrt()
        } else {
            0.0
        };
        points.push(CurvePoint {
            label: label.clone(),
            size: s.size,
            metric: "success_rate".into(),
            mean: p,
            se: se_rate,
        });
        points.push(CurvePoint {
            label: label.clone(),
            size: s.size,
            metric: "steps_to_solve".into(),
            mean: s.mean_steps_to_solve,
            se: s.se_steps_to_solve,
        });
        points.push(CurvePoint {
            label,
            size: s.size,
            metric: "return".into(),
            mean: s.mean_return,
            se: s.se_return,
        });
    }
    points.sort_by(|a, b| (&a.label, &a.metric, a.size).cmp(&(&b.label, &b.metric, b.size)));
    points
}
