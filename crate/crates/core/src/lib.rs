//! Discrete-time simulator and policy library for constrained position-aided
//! mmWave beamforming.
//!
//! A base station with a uniform linear array serves a mobile single-antenna
//! user. Each slot it may *sense* (acquire the UE position, hence the fresh
//! LoS channel) or beamform on the stale LoS channel from the last sense,
//! under a long-run average sensing budget and a transmit power budget. The
//! crate provides:
//!
//! - [`trace`]: position-trace ingestion (cartesian/geodetic CSV), local ENU
//!   conversion, synthetic mobility generators, slot normalization;
//! - [`channel`]: per-slot sparse multipath channel built from the UE
//!   position via ULA steering vectors (unit LoS gain, small random NLoS);
//! - [`estimator`]: the BS-side available channel: fresh LoS when sensing,
//!   cached stale LoS otherwise;
//! - [`policy`]: the drift-plus-penalty sensing/beamforming rule with its
//!   virtual queue and matched-filter beams, greedy/randomized baselines, a
//!   perfect-CSI upper bound, and a small-horizon offline brute-force oracle;
//! - [`sim`]: the per-slot episode loop, metrics, and seeded multi-episode
//!   parameter sweeps.

pub mod channel;
pub mod cvec;
pub mod estimator;
pub mod policy;
pub mod seeding;
pub mod sim;
pub mod trace;

pub use channel::{ChannelGenerator, ChannelRealization, NlosMode};
pub use cvec::Cvec;
pub use estimator::EstimatorState;
pub use policy::{ObjectiveMode, MagnitudeMode, PolicyConfig, QueueState};
pub use sim::{EpisodeMetrics, PolicyKind, Seeds, SimConfig, SlotRecord, SweepAxis, SweepRow};
pub use trace::{BsGeometry, PositionSample, SynthKind, TraceFormat};
