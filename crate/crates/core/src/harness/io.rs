use std::fs::{self, File};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Experiment, ExperimentConfig, MetricsSummary, RunRecord};
use crate::error::{Error, Result};

/// Formats a float with 17 significant digits, enough to re-read it bit-exactly.
#[derive(Clone, Copy, Debug)]
pub struct CsvFloat(pub f64);

impl std::fmt::Display for CsvFloat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.0.is_finite() {
            write!(f, "{:.16e}", self.0)
        } else if self.0.is_nan() {
            f.write_str("NaN")
        } else if self.0 > 0.0 {
            f.write_str("inf")
        } else {
            f.write_str("-inf")
        }
    }
}

/// Compact JSON whose floats carry 17 significant digits.
struct PreciseFormatter;

impl serde_json::ser::Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{}", CsvFloat(value))
    }
}

/// Serializes `value` as one JSON line.
pub fn write_json_line<W: Write, T: Serialize>(out: &mut W, value: &T) -> Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(&mut *out, PreciseFormatter);
    value.serialize(&mut ser)?;
    out.write_all(b"\n")?;
    Ok(())
}

/// Buffered JSON-lines sink.
pub struct JsonlWriter {
    inner: BufWriter<File>,
}

impl JsonlWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(JsonlWriter {
            inner: BufWriter::new(File::create(path)?),
        })
    }

    pub fn write<T: Serialize>(&mut self, value: &T) -> Result<()> {
        write_json_line(&mut self.inner, value)
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Writes an RFC-4180 CSV file.
pub fn write_csv_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| CsvFloat(v).to_string()).unwrap_or_default()
}

pub(crate) const SUMMARY_HEADER: [&str; 14] = [
    "label",
    "env",
    "agent",
    "size",
    "runs",
    "errors",
    "incomplete",
    "mean_return",
    "se_return",
    "success_rate",
    "mean_steps_to_solve",
    "se_steps_to_solve",
    "mean_episodes_to_solve",
    "mean_final_regret",
];

pub(crate) fn summary_row(s: &MetricsSummary) -> Vec<String> {
    vec![
        s.label.clone(),
        s.env.clone(),
        s.agent.clone(),
        s.size.to_string(),
        s.runs.to_string(),
        s.errors.to_string(),
        s.incomplete.to_string(),
        CsvFloat(s.mean_return).to_string(),
        CsvFloat(s.se_return).to_string(),
        CsvFloat(s.success_rate).to_string(),
        CsvFloat(s.mean_steps_to_solve).to_string(),
        CsvFloat(s.se_steps_to_solve).to_string(),
        CsvFloat(s.mean_episodes_to_solve).to_string(),
        opt(s.mean_final_regret),
    ]
}

pub fn write_summaries(path: &Path, summaries: &[MetricsSummary]) -> Result<()> {
    let rows: Vec<Vec<String>> = summaries.iter().map(summary_row).collect();
    write_csv_rows(path, &SUMMARY_HEADER, &rows)
}

/// Files produced for one experiment.
#[derive(Clone, Debug)]
pub struct ResultPaths {
    pub config: PathBuf,
    pub runs: PathBuf,
    pub summary: PathBuf,
}

impl ResultPaths {
    pub fn in_dir(dir: &Path) -> Self {
        ResultPaths {
            config: dir.join("config.json"),
            runs: dir.join("runs.jsonl"),
            summary: dir.join("summary.csv"),
        }
    }
}

/// Writes the resolved config, one JSON line per run and the summary CSV.
///
/// These files depend only on the config and seeds. Wall times go to
/// [`write_timing`] instead.
pub fn write_results(dir: &Path, experiment: &Experiment) -> Result<ResultPaths> {
    fs::create_dir_all(dir)?;
    let paths = ResultPaths::in_dir(dir);
    let mut config = File::create(&paths.config)?;
    write_json_line(&mut config, &experiment.config)?;
    let mut runs = JsonlWriter::create(&paths.runs)?;
    for r in &experiment.records {
        runs.write(r)?;
    }
    runs.finish()?;
    write_summaries(&paths.summary, std::slice::from_ref(&experiment.summary))?;
    Ok(paths)
}

/// Per-seed wall time in seconds.
pub fn write_timing(path: &Path, experiment: &Experiment) -> Result<()> {
    let rows: Vec<Vec<String>> = experiment
        .records
        .iter()
        .zip(&experiment.wall_seconds)
        .map(|(r, t)| vec![r.seed.to_string(), CsvFloat(*t).to_string()])
        .collect();
    write_csv_rows(path, &["seed", "wall_seconds"], &rows)
}

pub fn read_records(path: &Path) -> Result<Vec<RunRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut out = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

/// Parses an experiment config; unknown keys are rejected.
pub fn read_config(path: &Path) -> Result<ExperimentConfig> {
    let text = fs::read_to_string(path)?;
    let config: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    config.validate()?;
    Ok(config)
}
