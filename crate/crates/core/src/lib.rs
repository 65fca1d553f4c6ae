//! Two-timescale resource allocation for cooperative D2D relaying.
//!
//! A D2D transmitter relays the uplink of a cellular user (CU) in exchange
//! for a share of that CU's channel. Two decisions are made at different
//! timescales:
//!
//! * per subframe, a threshold cooperation policy ([`policy`]) splits the
//!   subframe between the CU's (relayed) uplink and the D2D link;
//! * per frame, CUs and D2D pairs are paired by an ascending-price auction
//!   ([`matching::run_dma`]) that converges to an ε-stable matching.
//!
//! [`chanmodel`] produces the rate samples both layers consume, [`sim`] runs
//! frames, baselines and the mobility study, and [`cli`] wraps the experiment
//! suite behind a JSON config and CSV output.

pub mod chanmodel;
pub mod cli;
pub mod error;
pub mod matching;
pub mod par;
pub mod policy;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
