//! JSON configuration: one flat document holding scenario, sweep and run
//! settings. Absent keys take the default (cell-edge CUs, 20 mW radios,
//! −100 dBm noise, 1.8 bps/Hz requirement, ...).

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Deserialize;

use crate::chanmodel::{dbm_to_watts, RadioParams};
use crate::error::{Error, Result};
use crate::sim::{Evaluation, MobilityConfig, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ExperimentName {
    GapStats,
    AvgUtility,
    SumrateVsN,
    OutageVsN,
    OneTimescaleCompare,
    EpsilonSweep,
    IterationsVsEpsilon,
    Mobility,
    SingleRun,
}

impl ExperimentName {
    pub const ALL: [ExperimentName; 9] = [
        ExperimentName::GapStats,
        ExperimentName::AvgUtility,
        ExperimentName::SumrateVsN,
        ExperimentName::OutageVsN,
        ExperimentName::OneTimescaleCompare,
        ExperimentName::EpsilonSweep,
        ExperimentName::IterationsVsEpsilon,
        ExperimentName::Mobility,
        ExperimentName::SingleRun,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ExperimentName::GapStats => "gap-stats",
            ExperimentName::AvgUtility => "avg-utility",
            ExperimentName::SumrateVsN => "sumrate-vs-n",
            ExperimentName::OutageVsN => "outage-vs-n",
            ExperimentName::OneTimescaleCompare => "one-timescale-compare",
            ExperimentName::EpsilonSweep => "epsilon-sweep",
            ExperimentName::IterationsVsEpsilon => "iterations-vs-epsilon",
            ExperimentName::Mobility => "mobility",
            ExperimentName::SingleRun => "single-run",
        }
    }

    /// Whether the experiment sweeps the number of D2D pairs.
    fn sweeps_n(self) -> bool {
        !matches!(self, ExperimentName::Mobility | ExperimentName::SingleRun)
    }
}

impl fmt::Display for ExperimentName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentName::ALL
            .into_iter()
            .find(|e| e.as_str() == s)
            .ok_or_else(|| {
                let known: Vec<&str> = ExperimentName::ALL.iter().map(|e| e.as_str()).collect();
                Error::config(
                    "experiment",
                    format!(
                        "unknown experiment {s:?}; expected one of {}",
                        known.join(", ")
                    ),
                )
            })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub eps_values: Vec<f64>,
    pub speeds: Vec<f64>,
    pub mobility: MobilityConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: ExperimentName,
    pub sweep: Sweep,
    pub replications: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

/// Every accepted key. Units are in the key name where they differ from SI.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    m_count: Option<usize>,
    n_count: Option<usize>,
    cell_radius: Option<f64>,
    d2d_ring: Option<(f64, f64)>,
    d2d_link_range: Option<(f64, f64)>,
    noise_dbm: Option<f64>,
    p_c_mw: Option<f64>,
    p_d_mw: Option<f64>,
    gamma: Option<f64>,
    /// bits/s/Hz
    r_th_bps: Option<f64>,
    weights: Option<Vec<f64>>,
    subframes_per_frame: Option<usize>,
    training_samples: Option<usize>,
    eps: Option<f64>,
    evaluation: Option<Evaluation>,

    experiment: Option<String>,
    replications: Option<usize>,
    seed: Option<u64>,
    output_dir: Option<PathBuf>,

    n_values: Option<Vec<usize>>,
    m_values: Option<Vec<usize>>,
    eps_values: Option<Vec<f64>>,
    speeds: Option<Vec<f64>>,
    duration: Option<f64>,
    bucket_len: Option<f64>,
    subframe_len: Option<f64>,
}

pub const DEFAULT_REPLICATIONS: usize = 1000;
pub const DEFAULT_N_VALUES: [usize; 8] = [5, 10, 15, 20, 25, 30, 35, 40];
pub const DEFAULT_EPS_VALUES: [f64; 7] = [0.125, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0];
pub const DEFAULT_SPEEDS: [f64; 4] = [0.0, 5.0, 10.0, 20.0];

/// Reads and validates a config file.
pub fn parse_config(path: &Path) -> Result<(ScenarioConfig, ExperimentSpec)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    parse_config_str(&text)
}

pub fn parse_config_str(text: &str) -> Result<(ScenarioConfig, ExperimentSpec)> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(
            if path == "." { "document".into() } else { path },
            e.inner().to_string(),
        )
    })?;
    build(raw)
}

fn build(raw: RawConfig) -> Result<(ScenarioConfig, ExperimentSpec)> {
    let base = ScenarioConfig::default();
    let radio_default = RadioParams::default();
    let mw = |x: f64| x * 1e-3;
    let radio = RadioParams {
        p_c: raw.p_c_mw.map_or(radio_default.p_c, mw),
        p_d: raw.p_d_mw.map_or(radio_default.p_d, mw),
        n0: raw.noise_dbm.map_or(radio_default.n0, dbm_to_watts),
        gamma: raw.gamma.unwrap_or(radio_default.gamma),
    };
    let cfg = ScenarioConfig {
        m_count: raw.m_count.unwrap_or(base.m_count),
        n_count: raw.n_count.unwrap_or(base.n_count),
        cell_radius: raw.cell_radius.unwrap_or(base.cell_radius),
        d2d_ring: raw.d2d_ring.unwrap_or(base.d2d_ring),
        d2d_link_range: raw.d2d_link_range.unwrap_or(base.d2d_link_range),
        radio,
        r_th: raw
            .r_th_bps
            .map_or(base.r_th, |b| b * std::f64::consts::LN_2),
        weights: raw.weights.unwrap_or_default(),
        subframes_per_frame: raw.subframes_per_frame.unwrap_or(base.subframes_per_frame),
        training_samples: raw.training_samples.unwrap_or(base.training_samples),
        eps: raw.eps.unwrap_or(base.eps),
        seed: raw.seed.unwrap_or(base.seed),
        evaluation: raw.evaluation.unwrap_or(base.evaluation),
    };

    let mobility_default = MobilityConfig::default();
    let spec = ExperimentSpec {
        name: raw
            .experiment
            .as_deref()
            .unwrap_or(ExperimentName::SingleRun.as_str())
            .parse()?,
        sweep: Sweep {
            n_values: raw.n_values.unwrap_or_else(|| DEFAULT_N_VALUES.to_vec()),
            m_values: raw.m_values.unwrap_or_else(|| vec![cfg.m_count]),
            eps_values: raw
                .eps_values
                .unwrap_or_else(|| DEFAULT_EPS_VALUES.to_vec()),
            speeds: raw.speeds.unwrap_or_else(|| DEFAULT_SPEEDS.to_vec()),
            mobility: MobilityConfig {
                speed: mobility_default.speed,
                duration: raw.duration.unwrap_or(mobility_default.duration),
                bucket_len: raw.bucket_len.unwrap_or(mobility_default.bucket_len),
                subframe_len: raw.subframe_len.unwrap_or(mobility_default.subframe_len),
            },
        },
        replications: raw.replications.unwrap_or(DEFAULT_REPLICATIONS),
        seed: cfg.seed,
        output_dir: raw.output_dir.unwrap_or_else(|| PathBuf::from("out")),
    };
    validate(&cfg, &spec)?;
    Ok((cfg, spec))
}

/// Checks the scenario and every sweep point.
pub fn validate(cfg: &ScenarioConfig, spec: &ExperimentSpec) -> Result<()> {
    cfg.validate()?;
    if spec.replications == 0 {
        return Err(Error::config("replications", "must be >= 1"));
    }
    let sw = &spec.sweep;
    if spec.name.sweeps_n() {
        if !cfg.weights.is_empty() {
            return Err(Error::config(
                "weights",
                format!(
                    "{} sweeps n_count; per-pair weights need a fixed n_count",
                    spec.name
                ),
            ));
        }
        if sw.n_values.is_empty() {
            return Err(Error::config("n_values", "must not be empty"));
        }
        if sw.m_values.is_empty() {
            return Err(Error::config("m_values", "must not be empty"));
        }
        for (i, &n) in sw.n_values.iter().enumerate() {
            cfg.with_sizes(cfg.m_count, n)
                .validate()
                .map_err(|e| Error::config(format!("n_values[{i}]"), e.to_string()))?;
        }
        for (i, &m) in sw.m_values.iter().enumerate() {
            cfg.with_sizes(m, cfg.n_count)
                .validate()
                .map_err(|e| Error::config(format!("m_values[{i}]"), e.to_string()))?;
        }
    }
    if sw.eps_values.is_empty() {
        return Err(Error::config("eps_values", "must not be empty"));
    }
    for (i, &e) in sw.eps_values.iter().enumerate() {
        if !(e.is_finite() && e > 0.0) {
            return Err(Error::config(
                format!("eps_values[{i}]"),
                format!("must be > 0, got {e}"),
            ));
        }
    }
    if sw.speeds.is_empty() {
        return Err(Error::config("speeds", "must not be empty"));
    }
    for (i, &s) in sw.speeds.iter().enumerate() {
        MobilityConfig {
            speed: s,
            ..sw.mobility
        }
        .validate()
        .map_err(|e| Error::config(format!("speeds[{i}]"), e.to_string()))?;
    }
    Ok(())
}
