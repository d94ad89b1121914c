//! Joint BS and RIS beamforming for downlink multigroup multicast and
//! multi-user unicast.
//!
//! * [`bs_qos`]: BS power minimization under SINR targets for a fixed RIS.
//! * [`ris_psa`]: projected subgradient solver for the RIS phases.
//! * [`ambf`]: alternating QoS solver combining the two.
//! * [`mmf_psa`]: joint projected subgradient max-min fair solver.
//! * [`experiment`]: Monte Carlo harness, baselines and result files.

// `!(x > 0.0)` is used on purpose so NaN fails the check
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod ambf;
pub mod bs_qos;
pub mod config;
pub mod error;
pub mod experiment;
pub mod linalg;
pub mod mmf_psa;
pub mod model;
pub mod ris_psa;
pub mod scenario_gen;
pub mod selfcheck;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
pub use model::{BeamformerSet, EffectiveChannels, GroupLayout, Scenario, UserIndex};
pub use scenario_gen::{ChannelParams, ChannelSet, GeometryConfig};
pub use config::RunConfig;
pub use experiment::{ExperimentSpec, Method, Problem, ResultRecord, SweepVariable};
