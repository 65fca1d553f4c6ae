//! Monte-Carlo frames: scenario generation, two-timescale frames, the
//! one-timescale benchmark and the mobility study.

mod frame;
mod metrics;
mod mobility;
pub mod one_timescale;
mod scenario;

pub use frame::{
    build_pair_table, pair, realize, run_frame_two_timescale, solo_rate, training_states,
    PairTable, Pairing,
};
pub use metrics::{aggregate_metrics, is_outage, FrameMetrics, Stat, Summary, OUTAGE_TOL};
pub use mobility::{run_mobility, MobilityConfig};
pub use one_timescale::run_one_timescale_restricted;
pub use scenario::{
    default_r_th, generate_scenario, Evaluation, Scenario, ScenarioConfig, Streams,
};
