use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::io::{summary_row, write_csv_rows, SUMMARY_HEADER};
use super::{run_experiment, ExperimentConfig, MetricsSummary, Seeds};
use crate::error::{Error, Result};

/// Hyperparameter grid: dotted config paths mapped to candidate values.
///
/// ```json
/// {"params": {"agent.belief.eta": [0.5, 1, 2]}, "seeds": "0..20"}
/// ```
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub params: BTreeMap<String, Vec<Value>>,
    /// Reduced seed list used for every grid point.
    #[serde(default)]
    pub seeds: Option<Seeds>,
}

/// Cartesian product of the grid, keys in sorted order, last key fastest.
pub fn expand_grid(grid: &Grid) -> Result<Vec<BTreeMap<String, Value>>> {
    let mut points = vec![BTreeMap::new()];
    for (key, values) in &grid.params {
        if values.is_empty() {
            return Err(Error::Config(format!("grid entry {key} has no values")));
        }
        let mut next = Vec::with_capacity(points.len() * values.len());
        for p in &points {
            for v in values {
                let mut q = p.clone();
                q.insert(key.clone(), v.clone());
                next.push(q);
            }
        }
        points = next;
    }
    Ok(points)
}

/// Overrides dotted paths of `base`; the result is re-validated, so a
/// misspelt path is a configuration error.
pub fn apply_grid(
    base: &ExperimentConfig,
    point: &BTreeMap<String, Value>,
) -> Result<ExperimentConfig> {
    let mut doc = serde_json::to_value(base)?;
    for (path, value) in point {
        let mut cursor = &mut doc;
        let parts: Vec<&str> = path.split('.').collect();
        for (i, part) in parts.iter().enumerate() {
            let obj = cursor.as_object_mut().ok_or_else(|| {
                Error::Config(format!("grid path {path}: {part} is not inside an object"))
            })?;
            if i + 1 == parts.len() {
                obj.insert(part.to_string(), value.clone());
                break;
            }
            let slot = obj.entry(part.to_string()).or_insert(Value::Null);
            if slot.is_null() {
                *slot = Value::Object(Default::default());
            }
            cursor = slot;
        }
    }
    let config: ExperimentConfig = serde_json::from_value(doc)
        .map_err(|e| Error::Config(format!("grid point {point:?}: {e}")))?;
    config.validate()?;
    Ok(config)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub point: BTreeMap<String, Value>,
    pub config: ExperimentConfig,
    pub summary: MetricsSummary,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub best: usize,
}

impl SweepOutcome {
    pub fn best_row(&self) -> &SweepRow {
        &self.rows[self.best]
    }

    /// Comparison table: grid point as JSON, then the summary columns.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut header = vec!["point", "best"];
        header.extend_from_slice(&SUMMARY_HEADER);
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let mut row = vec![
                    serde_json::to_string(&r.point).unwrap_or_default(),
                    (i == self.best).to_string(),
                ];
                row.extend(summary_row(&r.summary));
                row
            })
            .collect();
        write_csv_rows(path, &header, &rows)
    }
}

/// `a` is strictly better than `b`: success rate, then fewer steps to solve
/// on solve-style tasks; mean return otherwise.
fn better(a: &MetricsSummary, b: &MetricsSummary, solve_task: bool) -> bool {
    if solve_task {
        a.success_rate > b.success_rate
            || (a.success_rate == b.success_rate && a.mean_steps_to_solve < b.mean_steps_to_solve)
    } else {
        a.mean_return > b.mean_return
    }
}

/// Runs every grid point and selects the best; ties keep the earliest point.
pub fn sweep(base: &ExperimentConfig, grid: &Grid, workers: Option<usize>) -> Result<SweepOutcome> {
    let mut rows = Vec::new();
    for point in expand_grid(grid)? {
        let mut config = apply_grid(base, &point)?;
        if let Some(seeds) = &grid.seeds {
            config.seeds = seeds.clone();
        }
        let summary = run_experiment(&config, workers)?.summary;
        rows.push(SweepRow {
            point,
            config,
            summary,
        });
    }
    let solve_task = base.env.is_solve_task();
    let mut best = 0;
    for i in 1..rows.len() {
        if better(&rows[i].summary, &rows[best].summary, solve_task) {
            best = i;
        }
    }
    Ok(SweepOutcome { rows, best })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agents::{AgentConfig, AgentKind};
    use crate::envs::EnvSpec;
    use serde_json::json;

    fn base() -> ExperimentConfig {
        let mut c = ExperimentConfig::new(
            EnvSpec::Loop { loops: 2 },
            AgentConfig::new(AgentKind::Eubrl),
        );
        c.steps = Some(200);
        c.seeds = Seeds::range(0, 3);
        c
    }

    #[test]
    fn grid_expansion_is_cartesian() {
        let grid: Grid = serde_json::from_value(json!({
            "params": {"agent.belief.eta": [0.5, 1.0], "agent.belief.dirichlet_alpha": [1.0, 0.1, 0.01]}
        }))
        .unwrap();
        let points = expand_grid(&grid).unwrap();
        assert_eq!(points.len(), 6);
        let c = apply_grid(&base(), &points[5]).unwrap();
        assert_eq!(c.agent.belief.eta, 1.0);
        assert_eq!(c.agent.belief.dirichlet_alpha, 0.01);
    }

    #[test]
    fn misspelt_path_is_rejected() {
        let mut p = BTreeMap::new();
        p.insert("agent.belief.etta".to_string(), json!(1.0));
        assert!(apply_grid(&base(), &p).is_err());
    }

    #[test]
    fn singleton_grid_matches_plain_run() {
        let mut grid = Grid::default();
        grid.params
            .insert("agent.belief.eta".into(), vec![json!(1.0)]);
        let out = sweep(&base(), &grid, Some(2)).unwrap();
        let direct = run_experiment(&base(), Some(2)).unwrap();
        assert_eq!(out.rows.len(), 1);
        assert_eq!(out.best_row().summary, direct.summary);
    }
}
