//! Config-driven experiment runner: JSON in, CSV tables and a plain-text
//! summary out.

mod config;
pub mod experiments;
mod table;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::Parser;

pub use config::{
    parse_config, parse_config_str, validate, ExperimentName, ExperimentSpec, Sweep,
    DEFAULT_EPS_VALUES, DEFAULT_N_VALUES, DEFAULT_REPLICATIONS, DEFAULT_SPEEDS,
};
pub use table::{Cell, Table};

use crate::error::{Error, Result};
use crate::matching::{run_dma, Selector};
use crate::sim::{build_pair_table, generate_scenario, realize, ScenarioConfig, Streams};
use experiments::*;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Process exit code for an error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } => EXIT_CONFIG,
        _ => EXIT_RUNTIME,
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "coopd2d",
    version,
    about = "Cooperative D2D relaying experiments"
)]
pub struct Args {
    /// JSON config; defaults apply to absent keys (and to everything if omitted).
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "NAME")]
    pub experiment: Option<String>,
    #[arg(long, value_name = "U64")]
    pub seed: Option<u64>,
    #[arg(long, value_name = "K")]
    pub replications: Option<usize>,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads for replications (default: all cores).
    #[arg(long, value_name = "COUNT")]
    pub threads: Option<usize>,
}

/// Config file plus command-line overrides.
pub fn resolve(args: &Args) -> Result<(ScenarioConfig, ExperimentSpec)> {
    let (mut cfg, mut spec) = match &args.config {
        Some(path) => parse_config(path)?,
        None => parse_config_str("{}")?,
    };
    if let Some(name) = &args.experiment {
        spec.name = name.parse()?;
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
        cfg.seed = seed;
    }
    if let Some(k) = args.replications {
        spec.replications = k;
    }
    if let Some(dir) = &args.out {
        spec.output_dir = dir.clone();
    }
    if args.threads == Some(0) {
        return Err(Error::Config {
            location: "--threads".into(),
            message: "must be >= 1".into(),
        });
    }
    validate(&cfg, &spec)?;
    Ok((cfg, spec))
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
    pub summary: String,
}

/// Runs one experiment and writes its outputs under `spec.output_dir`.
pub fn run_experiment(spec: &ExperimentSpec, cfg: &ScenarioConfig) -> Result<RunReport> {
    validate(cfg, spec)?;
    let sw = &spec.sweep;
    let (k, seed) = (spec.replications, spec.seed);
    let mut extra: Vec<(String, String)> = Vec::new();
    let tables = match spec.name {
        ExperimentName::GapStats => vec![gap_table(&study_vs_n(cfg, &sw.n_values, k, seed)?)],
        ExperimentName::AvgUtility => {
            vec![utility_table(&study_vs_n(cfg, &sw.n_values, k, seed)?)]
        }
        ExperimentName::SumrateVsN => {
            vec![sumrate_table(&study_vs_n(cfg, &sw.n_values, k, seed)?)]
        }
        ExperimentName::OutageVsN => {
            vec![outage_table(&study_vs_n(cfg, &sw.n_values, k, seed)?)]
        }
        ExperimentName::OneTimescaleCompare => {
            vec![timescale_table(&study_timescales(
                cfg,
                &sw.n_values,
                k,
                seed,
            )?)]
        }
        ExperimentName::EpsilonSweep => {
            vec![eps_table(&study_vs_eps(cfg, &sw.eps_values, k, seed)?)]
        }
        ExperimentName::IterationsVsEpsilon => vec![iterations_table(&study_iterations(
            cfg,
            &sw.m_values,
            &sw.n_values,
            &sw.eps_values,
            k,
            seed,
        )?)],
        ExperimentName::Mobility => vec![mobility_table(&study_mobility(
            cfg,
            &sw.mobility,
            &sw.speeds,
            k,
            seed,
        )?)],
        ExperimentName::SingleRun => {
            let streams = Streams::new(seed, 0);
            let scn = generate_scenario(cfg, &mut streams.geometry())?;
            let pairs = build_pair_table(&scn, cfg, &streams)?;
            let mut selector = Selector::seeded(streams.selector_seed());
            let (matching, trace) = run_dma(&pairs.payoffs, cfg.eps, &mut selector)?;
            let frame = realize(&scn, cfg, &streams, &pairs, &matching, trace.iterations)?;
            let mut t = Table::new("single-run", &SINGLE_RUN_HEADER);
            t.push(single_run_row(cfg, &frame));

            let mut buf = Vec::new();
            trace.write_csv(&mut buf)?;
            extra.push((
                "single-run-trace.csv".into(),
                String::from_utf8_lossy(&buf).into(),
            ));
            extra.push(("scenario.json".into(), scn.to_json()?));
            vec![t]
        }
    };
    write_outputs(spec, &tables, &extra)
}

fn write_outputs(
    spec: &ExperimentSpec,
    tables: &[Table],
    extra: &[(String, String)],
) -> Result<RunReport> {
    let dir: &Path = &spec.output_dir;
    std::fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let mut summary = String::new();
    let _ = writeln!(summary, "experiment: {}", spec.name);
    let _ = writeln!(summary, "seed: {}", spec.seed);
    let _ = writeln!(summary, "replications: {}", spec.replications);
    for t in tables {
        files.push(t.write(dir)?);
        t.summarize(&mut summary);
    }
    for (name, body) in extra {
        let path = dir.join(name);
        std::fs::write(&path, body)?;
        files.push(path);
    }
    let path = dir.join("summary.txt");
    std::fs::write(&path, &summary)?;
    files.push(path);
    Ok(RunReport { files, summary })
}

/// Entry point shared by the binary: returns the process exit code.
pub fn main_with(args: Args) -> i32 {
    let (cfg, spec) = match resolve(&args) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("coopd2d: {e}");
            return exit_code(&e);
        }
    };
    if let Some(t) = args.threads {
        crate::par::set_threads(t);
    }
    match run_experiment(&spec, &cfg) {
        Ok(report) => {
            print!("{}", report.summary);
            EXIT_OK
        }
        Err(e) => {
            eprintln!("coopd2d: {e}");
            exit_code(&e)
        }
    }
}
