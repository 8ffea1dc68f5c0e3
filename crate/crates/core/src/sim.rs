//! Per-slot episode loop and multi-episode parameter sweeps.
//!
//! Slot order is fixed: generate the channel, decide (x, w), record the SNR
//! against the true channel, commit the estimator, update the virtual queue.
//! Everything is a pure function of the config seeds, so runs replay
//! bit-identically.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{wrap_angle, ChannelError, ChannelGenerator, NlosMode};
use crate::cvec;
use crate::estimator::EstimatorState;
use crate::policy::{
    greedy_decide, lyapunov_decide, mrt, perfect_csi_beam, queue_update, random_decide,
    PolicyConfig, PolicyError, QueueState,
};
use crate::seeding::episode_seed;
use crate::trace::{BsGeometry, PositionSample};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("trace has {0} sample(s); at least 2 required")]
    TraceTooShort(usize),
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Policy(#[from] PolicyError),
}

/// Sensing policy driving the episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Lyapunov,
    Greedy,
    Random,
    Always,
    Never,
    PerfectCsi,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Lyapunov,
        PolicyKind::Greedy,
        PolicyKind::Random,
        PolicyKind::Always,
        PolicyKind::Never,
        PolicyKind::PerfectCsi,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Lyapunov => "lyapunov",
            PolicyKind::Greedy => "greedy",
            PolicyKind::Random => "random",
            PolicyKind::Always => "always",
            PolicyKind::Never => "never",
            PolicyKind::PerfectCsi => "perfect_csi",
        }
    }
}

impl std::fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Independent seeds for channel randomness and policy randomness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub channel: u64,
    pub policy: u64,
}

/// Full configuration of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_antennas: usize,
    pub l_nlos: usize,
    /// Noise power σ², linear units.
    pub noise_power: f64,
    pub policy: PolicyConfig,
    pub policy_kind: PolicyKind,
    pub nlos_mode: NlosMode,
    pub geometry: BsGeometry,
    pub seeds: Seeds,
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.n_antennas == 0 {
            return Err(SimError::InvalidConfig("n_antennas must be at least 1".into()));
        }
        if !(self.noise_power > 0.0 && self.noise_power.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "noise_power must be positive, got {}",
                self.noise_power
            )));
        }
        self.policy.validate().map_err(SimError::InvalidConfig)
    }
}

/// Per-slot log entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlotRecord {
    pub slot: u64,
    pub x: bool,
    /// Received SNR against the true channel, `|h^H w|²/σ²`.
    pub snr: f64,
    pub q_after: f64,
    /// |θ₀(t) − θ₀(t′)| between the current LoS AoD and the one the beam was
    /// built from; diagnostic only.
    pub aod_error: f64,
}

/// Aggregates plus the per-slot log for one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub avg_snr: f64,
    pub avg_snr_db: f64,
    pub sensing_rate: f64,
    pub final_queue: f64,
    pub per_slot: Vec<SlotRecord>,
}

/// Run one episode of the per-slot loop over a normalized trace.
///
/// Slot 0 forces a sense for every sensing policy except `Never` (which
/// seeds its cache from the slot-0 position as deployment knowledge and
/// records x = 0) and `PerfectCsi` (which never touches the estimator).
pub fn run_episode(cfg: &SimConfig, trace: &[PositionSample]) -> Result<EpisodeMetrics, SimError> {
    cfg.validate()?;
    if trace.len() < 2 {
        return Err(SimError::TraceTooShort(trace.len()));
    }

    let mut gen = ChannelGenerator::new(
        cfg.geometry,
        cfg.n_antennas,
        cfg.l_nlos,
        cfg.nlos_mode,
        cfg.seeds.channel,
    );
    let mut est = EstimatorState::new();
    let mut q = QueueState::new();
    let mut per_slot = Vec::with_capacity(trace.len());
    let mut sense_count = 0usize;
    let mut last_sensed_aod: Option<f64> = None;
    let pcfg = &cfg.policy;

    for (t, p) in trace.iter().enumerate() {
        let slot = t as u64;
        let ch = gen.channel_at(p)?;
        let theta_now = ch.paths.aod[0];

        let (x, w) = match cfg.policy_kind {
            PolicyKind::PerfectCsi => (false, perfect_csi_beam(&ch.h, pcfg.p_max)?),
            PolicyKind::Always => (true, mrt(&ch.h_los, pcfg.p_max)?),
            PolicyKind::Never => {
                let avail = if t == 0 {
                    ch.h_los.clone()
                } else {
                    est.available_channel(false, &ch.h_los).map_err(PolicyError::from)?
                };
                (false, mrt(&avail, pcfg.p_max)?)
            }
            PolicyKind::Lyapunov => {
                if t == 0 {
                    (true, mrt(&ch.h_los, pcfg.p_max)?)
                } else {
                    let d = lyapunov_decide(&ch.h, &ch.h_los, &est, q, pcfg)?;
                    (d.x, d.w)
                }
            }
            PolicyKind::Greedy => {
                let x = t == 0 || greedy_decide(sense_count as f64 / t as f64, pcfg.alpha);
                let avail = est.available_channel(x, &ch.h_los).map_err(PolicyError::from)?;
                (x, mrt(&avail, pcfg.p_max)?)
            }
            PolicyKind::Random => {
                let x = t == 0 || random_decide(pcfg.alpha, cfg.seeds.policy, slot);
                let avail = est.available_channel(x, &ch.h_los).map_err(PolicyError::from)?;
                (x, mrt(&avail, pcfg.p_max)?)
            }
        };

        let snr = cvec::inner(&ch.h, &w).norm_sqr() / cfg.noise_power;

        let beam_is_fresh = x || (t == 0 && cfg.policy_kind == PolicyKind::Never);
        let aod_error = match cfg.policy_kind {
            PolicyKind::PerfectCsi | PolicyKind::Always => 0.0,
            _ if beam_is_fresh => 0.0,
            _ => wrap_angle(theta_now - last_sensed_aod.unwrap_or(theta_now)).abs(),
        };

        match cfg.policy_kind {
            PolicyKind::PerfectCsi => {}
            PolicyKind::Never => est.commit(t == 0, &ch.h_los, slot),
            _ => est.commit(x, &ch.h_los, slot),
        }
        if beam_is_fresh {
            last_sensed_aod = Some(theta_now);
        }

        q = queue_update(q, x, pcfg.alpha);
        if x {
            sense_count += 1;
        }
        per_slot.push(SlotRecord { slot, x, snr, q_after: q.value(), aod_error });
    }

    let slots = trace.len() as f64;
    let avg_snr = per_slot.iter().map(|r| r.snr).sum::<f64>() / slots;
    Ok(EpisodeMetrics {
        avg_snr,
        avg_snr_db: 10.0 * avg_snr.log10(),
        sensing_rate: sense_count as f64 / slots,
        final_queue: q.value(),
        per_slot,
    })
}

/// Swept parameter of [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Alpha,
    /// Power budget axis; values are interpreted in dB.
    PMax,
    V,
}

/// One (axis value, policy) cell averaged over episodes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub policy: PolicyKind,
    pub avg_snr_linear: f64,
    pub avg_snr_db: f64,
    /// `None` for the perfect-CSI bound, which takes no sensing decisions.
    pub sensing_rate: Option<f64>,
    pub final_queue: f64,
}

/// Per-episode metrics behind one sweep cell; exposed for tests and for
/// standard-error computations.
pub fn run_cell(
    base: &SimConfig,
    trace: &[PositionSample],
    policy: PolicyKind,
    axis: SweepAxis,
    value: f64,
    episodes: usize,
) -> Result<Vec<EpisodeMetrics>, SimError> {
    let mut cfg = base.clone();
    cfg.policy_kind = policy;
    match axis {
        SweepAxis::Alpha => cfg.policy.alpha = value,
        SweepAxis::PMax => cfg.policy.p_max = 10f64.powf(value / 10.0),
        SweepAxis::V => cfg.policy.v = value,
    }
    (0..episodes)
        .into_par_iter()
        .map(|k| {
            let mut ecfg = cfg.clone();
            ecfg.seeds = Seeds {
                channel: episode_seed(base.seeds.channel, k),
                policy: episode_seed(base.seeds.policy, k),
            };
            run_episode(&ecfg, trace)
        })
        .collect()
}

/// Sweep one axis over the given values for each policy, averaging every
/// cell over `episodes` runs with derived seeds. Rows come out sorted by
/// axis value, policies in [`PolicyKind::ALL`] order.
pub fn sweep(
    base: &SimConfig,
    trace: &[PositionSample],
    axis: SweepAxis,
    values: &[f64],
    policies: &[PolicyKind],
    episodes: usize,
) -> Result<Vec<SweepRow>, SimError> {
    if values.is_empty() {
        return Err(SimError::InvalidConfig("sweep values must be nonempty".into()));
    }
    if episodes == 0 {
        return Err(SimError::InvalidConfig("episodes must be at least 1".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);

    let mut rows = Vec::with_capacity(sorted.len() * policies.len());
    for &value in &sorted {
        for &policy in policies {
            let metrics = run_cell(base, trace, policy, axis, value, episodes)?;
            let n = metrics.len() as f64;
            let avg_snr_linear = metrics.iter().map(|m| m.avg_snr).sum::<f64>() / n;
            let sensing_rate = metrics.iter().map(|m| m.sensing_rate).sum::<f64>() / n;
            let final_queue = metrics.iter().map(|m| m.final_queue).sum::<f64>() / n;
            rows.push(SweepRow {
                axis_value: value,
                policy,
                avg_snr_linear,
                avg_snr_db: 10.0 * avg_snr_linear.log10(),
                sensing_rate: (policy != PolicyKind::PerfectCsi).then_some(sensing_rate),
                final_queue,
            });
        }
    }
    Ok(rows)
}
