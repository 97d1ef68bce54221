use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const LOOP: &str = r#"{
  "label": "loop-small",
  "env": {"kind": "loop", "loops": 2},
  "agent": {"kind": "eubrl", "belief": {"dirichlet_alpha": 0.001, "eta": 1.0}},
  "steps": 200,
  "seeds": "0..4"
}"#;

fn eubrl(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_eubrl"));
    cmd.args(args).env_remove("EUBRL_SEED_OFFSET");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn seeds_in(runs: &Path) -> Vec<u64> {
    fs::read_to_string(runs)
        .unwrap()
        .lines()
        .map(|l| {
            serde_json::from_str::<Value>(l).unwrap()["seed"]
                .as_u64()
                .unwrap()
        })
        .collect()
}

#[test]
fn run_writes_results() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", LOOP);
    let out = tmp.path().join("out");
    let o = eubrl(
        &["run", "--config", &cfg, "--out", out.to_str().unwrap()],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.json", "runs.jsonl", "summary.csv", "timing.csv"] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    assert_eq!(seeds_in(&out.join("runs.jsonl")), vec![0, 1, 2, 3]);
    let summary = fs::read_to_string(out.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 2);
}

#[test]
fn unknown_config_key_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "c.json",
        &LOOP.replace("\"steps\"", "\"stepz\""),
    );
    let o = eubrl(
        &[
            "run",
            "--config",
            &cfg,
            "--out",
            tmp.path().to_str().unwrap(),
        ],
        &[],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("stepz"));
}

#[test]
fn seed_offset_shifts_every_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", LOOP);
    let out = tmp.path().join("out");
    let o = eubrl(
        &[
            "run",
            "--config",
            &cfg,
            "--seeds",
            "10..12",
            "--out",
            out.to_str().unwrap(),
        ],
        &[("EUBRL_SEED_OFFSET", "100")],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(seeds_in(&out.join("runs.jsonl")), vec![110, 111]);

    let bad = eubrl(&["run", "--config", &cfg], &[("EUBRL_SEED_OFFSET", "x")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", LOOP);
    let mut outputs = Vec::new();
    for w in ["1", "3"] {
        let out = tmp.path().join(format!("w{w}"));
        let o = eubrl(
            &[
                "run",
                "--config",
                &cfg,
                "--workers",
                w,
                "--out",
                out.to_str().unwrap(),
            ],
            &[],
        );
        assert!(o.status.success());
        outputs.push((
            fs::read(out.join("runs.jsonl")).unwrap(),
            fs::read(out.join("summary.csv")).unwrap(),
        ));
    }
    assert!(outputs[0] == outputs[1]);
}

#[test]
fn sweep_picks_a_best_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", LOOP);
    let grid = write(
        tmp.path(),
        "g.json",
        r#"{"params": {"agent.belief.eta": [0.1, 1.0]}, "seeds": "0..2"}"#,
    );
    let out = tmp.path().join("sweep");
    let o = eubrl(
        &[
            "sweep",
            "--config",
            &cfg,
            "--grid",
            &grid,
            "--out",
            out.to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(out.join("sweep.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
    let best: Value =
        serde_json::from_str(&fs::read_to_string(out.join("best_config.json")).unwrap()).unwrap();
    assert_eq!(best["env"]["kind"], "loop");
}

#[test]
fn theory_check_reports_json() {
    let o = eubrl(&["theory", "--check", "transition_decomposition"], &[]);
    assert!(o.status.success());
    let line = String::from_utf8(o.stdout).unwrap();
    let v: Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    assert_eq!(v["name"], "transition_decomposition");
    assert_eq!(v["passed"], true);

    let unknown = eubrl(&["theory", "--check", "no_such_check"], &[]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn report_aggregates_result_dirs() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "c.json", LOOP);
    let root = tmp.path().join("results");
    for (name, seeds) in [("a", "0..3"), ("b", "3..6")] {
        let out = root.join(name);
        let o = eubrl(
            &[
                "run",
                "--config",
                &cfg,
                "--seeds",
                seeds,
                "--out",
                out.to_str().unwrap(),
            ],
            &[],
        );
        assert!(o.status.success());
    }
    let rep = tmp.path().join("report");
    let o = eubrl(
        &[
            "report",
            "--in",
            root.to_str().unwrap(),
            "--out",
            rep.to_str().unwrap(),
        ],
        &[],
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let all = fs::read_to_string(rep.join("summary_all.csv")).unwrap();
    assert_eq!(all.lines().count(), 3);

    let empty = TempDir::new().unwrap();
    let o = eubrl(&["report", "--in", empty.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
}
