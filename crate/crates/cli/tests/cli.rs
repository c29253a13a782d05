use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const EXAMPLE: &str = "0\n0.5\n0.4\n-0.5\n";

fn fpseg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpseg"))
        .args(args)
        .env_remove("FPSEG_CLASSICAL_CAP")
        .output()
        .expect("spawn fpseg")
}

fn segment_json(input: &Path, extra: &[&str]) -> Value {
    let mut args = vec!["segment", "--input", input.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = fpseg(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn change_points(seg: &Value) -> Vec<u64> {
    seg["change_points"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_u64().unwrap())
        .collect()
}

fn simulated(dir: &Path, extra: &[&str]) -> std::path::PathBuf {
    let path = dir.join("signal.txt");
    let mut args = vec!["simulate", "--output", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    let out = fpseg(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

#[test]
fn worked_example() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ex.txt", EXAMPLE);
    let doc = segment_json(&input, &["--k-max", "2", "--algorithm", "pruned"]);
    assert_eq!(doc["n"], 4);
    assert_eq!(doc["loss"], "quadratic");
    let two = &doc["segmentations"][1];
    assert_eq!(change_points(two), vec![3]);
    assert!((two["cost"].as_f64().unwrap() - 0.14).abs() < 1e-12);
}

#[test]
fn single_segment() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ex.txt", EXAMPLE);
    let doc = segment_json(&input, &["--k-max", "1"]);
    let segs = doc["segmentations"].as_array().unwrap();
    assert_eq!(segs.len(), 1);
    assert!(change_points(&segs[0]).is_empty());
    // sum of squared deviations from the mean 0.1
    assert!((segs[0]["cost"].as_f64().unwrap() - 0.62).abs() < 1e-12);
}

#[test]
fn pruned_and_classical_agree() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated(
        dir.path(),
        &[
            "--shape",
            "rectangular",
            "-n",
            "800",
            "--amplitude",
            "1.5",
            "--frequency",
            "4",
            "--noise",
            "uniform",
            "--seed",
            "12",
        ],
    );
    let pruned = segment_json(&input, &["--k-max", "8", "--algorithm", "pruned"]);
    let classical = segment_json(&input, &["--k-max", "8", "--algorithm", "classical"]);
    for (p, c) in pruned["segmentations"]
        .as_array()
        .unwrap()
        .iter()
        .zip(classical["segmentations"].as_array().unwrap())
    {
        assert_eq!(
            p["change_points"].to_string(),
            c["change_points"].to_string()
        );
        let (a, b) = (p["cost"].as_f64().unwrap(), c["cost"].as_f64().unwrap());
        assert!((a - b).abs() <= 1e-8 * a.abs().max(b.abs()), "{a} vs {b}");
    }
}

#[test]
fn reported_costs_match_resummed_segments() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated(
        dir.path(),
        &[
            "--shape",
            "sine",
            "-n",
            "600",
            "--amplitude",
            "2",
            "--frequency",
            "2",
            "--noise",
            "gaussian",
            "--seed",
            "4",
        ],
    );
    let signal: Vec<f64> = std::fs::read_to_string(&input)
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect();
    let out = dir.path().join("out.json");
    let run = fpseg(&[
        "segment",
        "-i",
        input.to_str().unwrap(),
        "--k-max",
        "6",
        "--output",
        out.to_str().unwrap(),
    ]);
    assert!(run.status.success() && run.stdout.is_empty());
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    for seg in doc["segmentations"].as_array().unwrap() {
        let mut bounds = vec![0];
        bounds.extend(change_points(seg).into_iter().map(|c| c as usize));
        bounds.push(signal.len());
        let mut total = 0.0;
        for (w, mean) in bounds
            .windows(2)
            .zip(seg["segment_means"].as_array().unwrap())
        {
            let part = &signal[w[0]..w[1]];
            let m = part.iter().sum::<f64>() / part.len() as f64;
            assert!((m - mean.as_f64().unwrap()).abs() < 1e-12);
            total += part.iter().map(|y| (y - m) * (y - m)).sum::<f64>();
        }
        let reported = seg["cost"].as_f64().unwrap();
        assert!(
            (reported - total).abs() <= 1e-9 * total,
            "{reported} vs {total}"
        );
    }
}

#[test]
fn output_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = simulated(
        dir.path(),
        &["-n", "300", "--noise", "chisq", "--seed", "9"],
    );
    let strip = |mut v: Value| {
        v.as_object_mut().unwrap().remove("runtime_ms");
        v
    };
    let a = strip(segment_json(
        &input,
        &["--k-max", "5", "--algorithm", "grid", "--grid-size", "32"],
    ));
    let b = strip(segment_json(
        &input,
        &["--k-max", "5", "--algorithm", "grid", "--grid-size", "32"],
    ));
    assert_eq!(a, b);
    assert!(a["segmentations"][2]["refit_cost"].is_f64());
}

#[test]
fn errors_are_json() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ex.txt", EXAMPLE);
    let path = input.to_str().unwrap();
    let cases: [(&[&str], &str); 4] = [
        (
            &["segment", "-i", path, "-k", "2", "--grid-size", "8"],
            "config",
        ),
        (
            &["segment", "-i", path, "-k", "2", "--loss", "poisson"],
            "input",
        ),
        (&["segment", "-i", path, "-k", "9"], "range"),
        (&["segment", "-k", "2"], "usage"),
    ];
    for (args, kind) in cases {
        let out = fpseg(args);
        assert!(!out.status.success());
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["error"]["kind"], kind, "{args:?}");
        assert!(err["error"]["message"].is_string());
    }

    let bad = write(dir.path(), "bad.txt", "1\n2\nabc\n");
    let out = fpseg(&["segment", "-i", bad.to_str().unwrap(), "-k", "1"]);
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "parse");
    assert!(err["error"]["message"].as_str().unwrap().contains("line 3"));

    let out = Command::new(env!("CARGO_BIN_EXE_fpseg"))
        .args(["segment", "-i", path, "-k", "2", "--algorithm", "classical"])
        .env("FPSEG_CLASSICAL_CAP", "3")
        .output()
        .unwrap();
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "classical_cap");
}

#[test]
fn csv_column_input() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "ex.csv",
        "pos,value\n1,0\n2,0.5\n3,0.4\n4,-0.5\n",
    );
    let doc = segment_json(&input, &["--format", "csv", "--column", "value", "-k", "2"]);
    assert_eq!(change_points(&doc["segmentations"][1]), vec![3]);
}

#[test]
fn trace_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "ex.txt", EXAMPLE);
    let trace = dir.path().join("trace.csv");
    segment_json(&input, &["-k", "2", "--trace", trace.to_str().unwrap()]);
    let text = std::fs::read_to_string(&trace).unwrap();
    assert_eq!(
        text,
        "k,t,candidates,intervals,pruned\n2,2,1,1,0\n2,3,2,2,0\n2,4,2,2,1\n"
    );
    let out = fpseg(&[
        "trace-summary",
        trace.to_str().unwrap(),
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let summary = String::from_utf8(out.stdout).unwrap();
    assert!(summary.starts_with("k,t,runs,max_candidates,max_intervals\n2,2,2,1,1\n"));
}

#[test]
fn simulate_sidecar_replays() {
    let dir = tempfile::tempdir().unwrap();
    let first = simulated(
        dir.path(),
        &["-n", "50", "--noise", "cauchy", "--seed", "2"],
    );
    let sidecar = dir.path().join("signal.spec.json");
    let spec: Value = serde_json::from_str(&std::fs::read_to_string(&sidecar).unwrap()).unwrap();
    assert_eq!(spec["noise"], "cauchy");
    assert_eq!(spec["n"], 50);
    let again = dir.path().join("again.txt");
    let out = fpseg(&[
        "simulate",
        "--spec",
        sidecar.to_str().unwrap(),
        "-o",
        again.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(std::fs::read(first).unwrap(), std::fs::read(again).unwrap());
}

#[test]
fn bench_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "bench.cfg",
        "algorithms = pruned, classical\nk_max = 3\nrepetitions = 2\nreport = out/report.csv\n\n[scenario]\nid = flat\nn = 200\nnoise = gaussian\nseed = 1\n",
    );
    let out = fpseg(&["bench", "--config", config.to_str().unwrap()]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let report = std::fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    let mut lines = report.lines();
    assert_eq!(
        lines.next().unwrap(),
        "scenario,algorithm,n,k_max,rep,wall_ms,final_cost,max_candidates,max_intervals"
    );
    assert_eq!(lines.count(), 4);
    assert!(dir.path().join("out/report.summary.csv").exists());

    let empty = write(
        dir.path(),
        "empty.cfg",
        "k_max = 2\n[scenario]\nid = none\nn = 0\n",
    );
    let out = fpseg(&["bench", "--config", empty.to_str().unwrap()]);
    assert!(!out.status.success());
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "config");
}
