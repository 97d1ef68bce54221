use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use eubrl_core::harness::{
    self, read_config, read_records, run_experiment, seed_offset_from_env, size_curves,
    write_csv_rows, write_json_line, write_results, write_summaries, write_timing, CsvFloat, Grid,
    MetricsSummary, Seeds,
};
use eubrl_core::theory;

#[derive(Parser)]
#[command(
    name = "eubrl",
    version,
    about = "Run EUBRL experiments, sweeps, diagnostics and reports"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one configuration over its seeds.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Half-open seed range, e.g. 0..200.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run every point of a hyperparameter grid and pick the best.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run a diagnostic check, or `all`.
    Theory {
        #[arg(long)]
        check: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write the reports as JSON lines here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rebuild summary and curve CSVs from result directories under `--in`.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::Run {
            config,
            seeds,
            out,
            workers,
        } => run(&config, seeds.as_deref(), out, workers),
        Command::Sweep {
            config,
            grid,
            out,
            workers,
        } => sweep(&config, &grid, out, workers),
        Command::Theory { check, seed, out } => theory_cmd(&check, seed, out.as_deref()),
        Command::Report { input, out } => report(&input, out.as_deref()),
    }
}

fn default_out(label: &str) -> PathBuf {
    Path::new("results").join(label)
}

fn print_summary(s: &MetricsSummary) {
    println!(
        "{}: return {:.3} ± {:.3}, success {:.3}, steps to solve {:.1}, runs {} (errors {})",
        s.label,
        s.mean_return,
        s.se_return,
        s.success_rate,
        s.mean_steps_to_solve,
        s.runs,
        s.errors
    );
}

fn run(
    path: &Path,
    seeds: Option<&str>,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> anyhow::Result<ExitCode> {
    let mut config = read_config(path)?;
    if let Some(text) = seeds {
        config.seeds = Seeds::parse(text)?;
    }
    config.seeds = config.seeds.shifted(seed_offset_from_env()?);
    let dir = out
        .or_else(|| config.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| default_out(&config.display_label()));
    let experiment = run_experiment(&config, workers)?;
    write_results(&dir, &experiment)?;
    write_timing(&dir.join("timing.csv"), &experiment)?;
    print_summary(&experiment.summary);
    println!("results in {}", dir.display());
    Ok(if experiment.summary.incomplete {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn sweep(
    path: &Path,
    grid_path: &Path,
    out: Option<PathBuf>,
    workers: Option<usize>,
) -> anyhow::Result<ExitCode> {
    let mut base = read_config(path)?;
    let text = fs::read_to_string(grid_path)
        .with_context(|| format!("reading {}", grid_path.display()))?;
    let mut grid: Grid =
        serde_json::from_str(&text).with_context(|| format!("parsing {}", grid_path.display()))?;
    let offset = seed_offset_from_env()?;
    base.seeds = base.seeds.shifted(offset);
    grid.seeds = grid.seeds.map(|s| s.shifted(offset));
    let dir = out.unwrap_or_else(|| default_out(&format!("{}-sweep", base.display_label())));
    fs::create_dir_all(&dir)?;
    let outcome = harness::sweep(&base, &grid, workers)?;
    outcome.write_csv(&dir.join("sweep.csv"))?;
    let best = outcome.best_row();
    let mut f = fs::File::create(dir.join("best_config.json"))?;
    write_json_line(&mut f, &best.config)?;
    for row in &outcome.rows {
        print_summary(&row.summary);
    }
    println!("best point {}", serde_json::to_string(&best.point)?);
    println!("results in {}", dir.display());
    Ok(ExitCode::SUCCESS)
}

fn theory_cmd(name: &str, seed: u64, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let seed = seed.wrapping_add(seed_offset_from_env()?);
    let names: Vec<&str> = if name == "all" {
        theory::CHECKS.to_vec()
    } else {
        vec![name]
    };
    let mut reports = Vec::new();
    for n in names {
        reports.push(theory::run_check(n, seed)?);
    }
    let mut sink = match out {
        Some(p) => Some(fs::File::create(p).with_context(|| format!("creating {}", p.display()))?),
        None => None,
    };
    let mut stdout = std::io::stdout().lock();
    for r in &reports {
        write_json_line(&mut stdout, r)?;
        if let Some(f) = sink.as_mut() {
            write_json_line(f, r)?;
        }
    }
    Ok(if reports.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// Directories under `root` (itself included) holding a config and run records.
fn result_dirs(root: &Path, found: &mut Vec<PathBuf>) -> anyhow::Result<()> {
    if root.join("config.json").is_file() && root.join("runs.jsonl").is_file() {
        found.push(root.to_path_buf());
    }
    let mut children: Vec<PathBuf> = fs::read_dir(root)
        .with_context(|| format!("reading {}", root.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    children.sort();
    for c in children {
        result_dirs(&c, found)?;
    }
    Ok(())
}

fn report(input: &Path, out: Option<&Path>) -> anyhow::Result<ExitCode> {
    let mut dirs = Vec::new();
    result_dirs(input, &mut dirs)?;
    if dirs.is_empty() {
        bail!(
            "no result directories (config.json + runs.jsonl) under {}",
            input.display()
        );
    }
    let mut summaries = Vec::new();
    for d in &dirs {
        let config = read_config(&d.join("config.json"))?;
        let records = read_records(&d.join("runs.jsonl"))?;
        summaries.push(MetricsSummary::from_records(&config, &records));
    }
    let out = out.unwrap_or(input);
    fs::create_dir_all(out)?;
    write_summaries(&out.join("summary_all.csv"), &summaries)?;
    let curves = size_curves(&summaries);
    let mut metrics: Vec<&str> = curves.iter().map(|c| c.metric.as_str()).collect();
    metrics.dedup();
    metrics.sort();
    metrics.dedup();
    for metric in metrics {
        let rows: Vec<Vec<String>> = curves
            .iter()
            .filter(|c| c.metric == metric)
            .map(|c| {
                vec![
                    c.label.clone(),
                    c.size.to_string(),
                    c.metric.clone(),
                    CsvFloat(c.mean).to_string(),
                    CsvFloat(c.se).to_string(),
                ]
            })
            .collect();
        write_csv_rows(
            &out.join(format!("curve_{metric}.csv")),
            &["label", "size", "metric", "mean", "se"],
            &rows,
        )?;
    }
    for s in &summaries {
        print_summary(s);
    }
    println!(
        "{} result directories summarised into {}",
        dirs.len(),
        out.display()
    );
    Ok(ExitCode::SUCCESS)
}
