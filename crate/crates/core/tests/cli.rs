use std::path::Path;
use std::process::Command;

use coopd2d::cli::{parse_config_str, run_experiment, ExperimentName};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coopd2d"))
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("config.json");
    std::fs::write(&p, body).unwrap();
    p
}

#[test]
fn single_run_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"m_count": 1, "n_count": 1, "subframes_per_frame": 200}"#,
    );
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let run_out = bin()
            .args(["--config", cfg.to_str().unwrap(), "--seed", "42", "--out"])
            .arg(&out)
            .output()
            .unwrap();
        assert_eq!(run_out.status.code(), Some(0));
        assert!(String::from_utf8_lossy(&run_out.stdout).contains("single-run.csv: 1 rows"));
        let (header, rows) = read_csv(&out.join("single-run.csv"));
        assert_eq!(header[..2], ["m".to_string(), "n".to_string()]);
        assert_eq!(rows.len(), 1);
        outputs.push(std::fs::read(out.join("single-run.csv")).unwrap());
        outputs.push(std::fs::read(out.join("single-run-trace.csv")).unwrap());
        outputs.push(std::fs::read(out.join("scenario.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[3]);
    assert_eq!(outputs[1], outputs[4]);
    assert_eq!(outputs[2], outputs[5]);
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for body in [
        r#"{"eps": 0}"#,
        r#"{"unknown_key": 1}"#,
        "{ not json",
        r#"{"m_count": -1}"#,
    ] {
        let cfg = write_config(dir.path(), body);
        let out = bin()
            .args(["--config", cfg.to_str().unwrap(), "--out"])
            .arg(dir.path().join("o"))
            .output()
            .unwrap();
        assert_eq!(out.status.code(), Some(1), "{body}");
        assert!(!out.stderr.is_empty());
    }
    let out = bin()
        .args(["--config", "/nonexistent/config.json"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    let out = bin().args(["--experiment", "fig-42"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unwritable_output_is_a_runtime_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "x").unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"m_count": 1, "n_count": 1, "subframes_per_frame": 20}"#,
    );
    let out = bin()
        .args(["--config", cfg.to_str().unwrap(), "--out"])
        .arg(blocker.join("sub"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sumrate_rows_and_schema() {
    let dir = tempfile::tempdir().unwrap();
    let (cfg, mut spec) = parse_config_str(
        r#"{"experiment": "sumrate-vs-n", "n_values": [5, 10], "replications": 2, "subframes_per_frame": 100}"#,
    )
    .unwrap();
    spec.output_dir = dir.path().to_path_buf();
    let report = run_experiment(&spec, &cfg).unwrap();
    let (header, rows) = read_csv(&dir.path().join("sumrate-vs-n.csv"));
    assert_eq!(header, ["n", "algo", "mean_wsr", "stderr"]);
    // Aggregated rows: one per (n, algo).
    assert_eq!(rows.len(), 2 * 4);
    for row in &rows {
        assert!(["5", "10"].contains(&row[0].as_str()));
        assert!(["dma", "optimal", "no_transfer", "random"].contains(&row[1].as_str()));
        let wsr: f64 = row[2].parse().unwrap();
        let se: f64 = row[3].parse().unwrap();
        assert!(wsr.is_finite() && wsr >= 0.0 && se.is_finite() && se >= 0.0);
    }
    // The summary echoes every row.
    let total_csv: f64 = rows.iter().map(|r| r[2].parse::<f64>().unwrap()).sum();
    let total_summary: f64 = report
        .summary
        .lines()
        .filter_map(|l| {
            l.split_whitespace()
                .find_map(|f| f.strip_prefix("mean_wsr="))
        })
        .map(|v| v.parse::<f64>().unwrap())
        .sum();
    assert_eq!(total_csv, total_summary);
}

#[test]
fn every_experiment_emits_its_schema() {
    let schemas: [(ExperimentName, &[&str]); 9] = [
        (
            ExperimentName::GapStats,
            &["n", "max_gap_over_eps", "mean_gap_over_eps"],
        ),
        (ExperimentName::AvgUtility, &["n", "side", "eau"]),
        (
            ExperimentName::SumrateVsN,
            &["n", "algo", "mean_wsr", "stderr"],
        ),
        (
            ExperimentName::OutageVsN,
            &["n", "algo", "outage_pct", "stderr"],
        ),
        (
            ExperimentName::OneTimescaleCompare,
            &[
                "n",
                "scheme",
                "mean_wsr",
                "outage_pct",
                "csi_count",
                "switch_count",
            ],
        ),
        (ExperimentName::EpsilonSweep, &["eps", "algo", "mean_wsr"]),
        (
            ExperimentName::IterationsVsEpsilon,
            &["eps", "m", "n", "mean_iterations"],
        ),
        (
            ExperimentName::Mobility,
            &["t_bucket", "speed", "mean_wsr", "outage_pct"],
        ),
        (
            ExperimentName::SingleRun,
            &[
                "m",
                "n",
                "eps",
                "weighted_sum_rate",
                "outage_pct",
                "eau_cu",
                "eau_d2d",
                "matched",
                "iterations",
                "csi_per_subframe",
            ],
        ),
    ];
    for (name, header) in schemas {
        let dir = tempfile::tempdir().unwrap();
        let (cfg, mut spec) = parse_config_str(
            r#"{"m_count": 3, "n_count": 4, "n_values": [2, 4], "eps_values": [0.5, 2],
                "speeds": [0, 20], "duration": 0.1, "bucket_len": 0.05,
                "subframes_per_frame": 50, "replications": 2}"#,
        )
        .unwrap();
        spec.name = name;
        spec.output_dir = dir.path().to_path_buf();
        run_experiment(&spec, &cfg).unwrap();
        let (got, rows) = read_csv(&dir.path().join(format!("{name}.csv")));
        assert_eq!(got, header, "{name}");
        assert!(!rows.is_empty(), "{name}");
        for row in rows {
            assert_eq!(row.len(), header.len());
            for cell in row {
                assert!(
                    !cell.eq_ignore_ascii_case("nan") && !cell.contains("inf"),
                    "{name}: {cell}"
                );
            }
        }
    }
}

#[test]
fn same_seed_same_files() {
    let run = |dir: &Path| {
        let (cfg, mut spec) = parse_config_str(
            r#"{"experiment": "outage-vs-n", "m_count": 4, "n_values": [3, 6], "replications": 3,
                "subframes_per_frame": 60, "seed": 9}"#,
        )
        .unwrap();
        spec.output_dir = dir.to_path_buf();
        run_experiment(&spec, &cfg).unwrap();
        std::fs::read(dir.join("outage-vs-n.csv")).unwrap()
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(run(a.path()), run(b.path()));
}
