//! Sensing/beamforming policies: the drift-plus-penalty rule (virtual queue +
//! two-candidate exhaustive search + matched-filter beam), the greedy and
//! randomized baselines, the perfect-CSI upper bound, and a small-horizon
//! offline brute-force oracle.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::ChannelRealization;
use crate::cvec::{self, Cvec};
use crate::estimator::{EstimatorError, EstimatorState};
use crate::seeding::splitmix64;

/// Cap on the offline oracle horizon (2^T sequence enumeration).
pub const MAX_ORACLE_HORIZON: usize = 16;

#[derive(Debug, Error)]
pub enum PolicyError {
    #[error("degenerate channel: zero norm")]
    DegenerateChannel,
    #[error("oracle horizon {0} exceeds the maximum of {MAX_ORACLE_HORIZON}")]
    HorizonTooLarge(usize),
    #[error("oracle horizon must be at least 1")]
    EmptyHorizon,
    #[error(transparent)]
    Estimator(#[from] EstimatorError),
}

/// Which channel the per-slot objectives are evaluated against.
///
/// `Genie` scores both candidates against the true channel, as the dynamic
/// algorithm is written; `Estimate` scores each candidate against its own
/// available channel. With unit-norm LoS channels the estimate-mode
/// comparison degenerates to `obj1 − obj0 = −Q(t)`: the decision carries no
/// channel information and never senses while Q > 0. When the queue drains
/// to zero the candidates tie exactly in real arithmetic (resolved to a
/// sense, up to float rounding of the steering-vector norms), so at best the
/// policy duty-cycles at rate ≈ α.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectiveMode {
    Genie,
    Estimate,
}

/// Payoff magnitude in the per-slot objective: `|h^H w|²` (matching the
/// dynamic algorithm and the SNR objective) or `|h^H w|`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MagnitudeMode {
    Squared,
    Absolute,
}

/// Parameters of the drift-plus-penalty policy and its baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolicyConfig {
    /// Tradeoff parameter V ≥ 0 weighting payoff against queue drift.
    pub v: f64,
    /// Average sensing budget α ∈ (0, 1].
    pub alpha: f64,
    /// Transmit power budget, linear units.
    pub p_max: f64,
    pub objective_mode: ObjectiveMode,
    pub magnitude_mode: MagnitudeMode,
}

impl PolicyConfig {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(format!("alpha must lie in (0, 1], got {}", self.alpha));
        }
        if !(self.p_max > 0.0 && self.p_max.is_finite()) {
            return Err(format!("p_max must be positive, got {}", self.p_max));
        }
        if !(self.v >= 0.0 && self.v.is_finite()) {
            return Err(format!("v must be non-negative, got {}", self.v));
        }
        Ok(())
    }
}

impl Default for PolicyConfig {
    fn default() -> Self {
        Self {
            v: 1.0,
            alpha: 0.5,
            // 5 dB power budget in linear units.
            p_max: 10f64.powf(0.5),
            objective_mode: ObjectiveMode::Genie,
            magnitude_mode: MagnitudeMode::Squared,
        }
    }
}

/// Virtual queue enforcing the average sensing constraint. Non-negative by
/// construction.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QueueState(f64);

impl QueueState {
    pub fn new() -> Self {
        Self(0.0)
    }

    /// Queue at an explicit backlog; must be non-negative.
    pub fn from_value(q: f64) -> Self {
        assert!(q >= 0.0, "queue backlog must be non-negative, got {q}");
        Self(q)
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// One slot of queue evolution: `Q⁺ = max(Q + x − α, 0)`.
pub fn queue_update(q: QueueState, x: bool, alpha: f64) -> QueueState {
    debug_assert!(alpha > 0.0 && alpha <= 1.0);
    QueueState((q.0 + (x as u8 as f64) - alpha).max(0.0))
}

/// Joint sensing/beamforming output for one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotDecision {
    pub x: bool,
    pub w: Cvec,
    pub obj_sense: f64,
    pub obj_skip: f64,
}

/// Matched-filter beam at full power: `w = √p_max · h/‖h‖`.
pub fn mrt(h_avail: &[Complex64], p_max: f64) -> Result<Cvec, PolicyError> {
    let norm = cvec::norm(h_avail);
    if norm <= 0.0 || !norm.is_finite() {
        return Err(PolicyError::DegenerateChannel);
    }
    let w = cvec::scale(p_max.sqrt() / norm, h_avail);
    debug_assert!(cvec::norm_sqr(&w) <= p_max * (1.0 + 1e-12));
    Ok(w)
}

/// Per-slot objective `V·|h_eval^H w|^m − Q·x` with m fixed by the magnitude
/// mode.
pub fn slot_objective(
    h_eval: &[Complex64],
    w: &[Complex64],
    x: bool,
    q: QueueState,
    cfg: &PolicyConfig,
) -> f64 {
    let corr = cvec::inner(h_eval, w).norm();
    let payoff = match cfg.magnitude_mode {
        MagnitudeMode::Squared => corr * corr,
        MagnitudeMode::Absolute => corr,
    };
    cfg.v * payoff - q.value() * (x as u8 as f64)
}

/// Drift-plus-penalty decision: evaluate both sensing candidates with their
/// matched-filter beams and keep the better objective, ties to sensing.
pub fn lyapunov_decide(
    h_true: &[Complex64],
    h_los_now: &[Complex64],
    est: &EstimatorState,
    q: QueueState,
    cfg: &PolicyConfig,
) -> Result<SlotDecision, PolicyError> {
    let avail_sense = est.available_channel(true, h_los_now)?;
    let w_sense = mrt(&avail_sense, cfg.p_max)?;
    let avail_skip = est.available_channel(false, h_los_now)?;
    let w_skip = mrt(&avail_skip, cfg.p_max)?;

    let (eval_sense, eval_skip): (&[Complex64], &[Complex64]) = match cfg.objective_mode {
        ObjectiveMode::Genie => (h_true, h_true),
        ObjectiveMode::Estimate => (&avail_sense, &avail_skip),
    };
    let obj_sense = slot_objective(eval_sense, &w_sense, true, q, cfg);
    let obj_skip = slot_objective(eval_skip, &w_skip, false, q, cfg);

    Ok(if obj_sense >= obj_skip {
        SlotDecision { x: true, w: w_sense, obj_sense, obj_skip }
    } else {
        SlotDecision { x: false, w: w_skip, obj_sense, obj_skip }
    })
}

/// Greedy baseline: sense while the running average of past decisions stays
/// within the budget.
pub fn greedy_decide(history_avg: f64, alpha: f64) -> bool {
    debug_assert!((0.0..=1.0).contains(&history_avg));
    history_avg <= alpha
}

/// Randomized baseline: i.i.d. Bernoulli(α), deterministic per (seed, slot).
pub fn random_decide(alpha: f64, rng_seed: u64, slot: u64) -> bool {
    debug_assert!(alpha > 0.0 && alpha <= 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(rng_seed.wrapping_add(slot)));
    rng.random::<f64>() < alpha
}

/// Upper-bound beam: matched filter on the full true channel.
pub fn perfect_csi_beam(h_true: &[Complex64], p_max: f64) -> Result<Cvec, PolicyError> {
    mrt(h_true, p_max)
}

/// Result of the offline exhaustive search.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    pub best_sequence: Vec<bool>,
    pub best_avg_snr: f64,
}

/// Enumerate every sensing sequence with `x(0) = 1` and mean ≤ α over the
/// horizon, replay the stale-channel dynamics with matched-filter beams, and
/// return the sequence maximizing average SNR against the true channels.
///
/// Ties keep the earliest sequence in mask order, so an unconstrained static
/// channel resolves to sense-once `(1, 0, 0, …)`.
pub fn brute_force_offline(
    channels: &[ChannelRealization],
    cfg: &PolicyConfig,
    noise_power: f64,
) -> Result<OracleResult, PolicyError> {
    let horizon = channels.len();
    if horizon == 0 {
        return Err(PolicyError::EmptyHorizon);
    }
    if horizon > MAX_ORACLE_HORIZON {
        return Err(PolicyError::HorizonTooLarge(horizon));
    }
    let max_senses = (cfg.alpha * horizon as f64 + 1e-9).floor() as u32;

    let mut best_avg = f64::NEG_INFINITY;
    let mut best_mask = 1u32;
    for mask in 0..(1u32 << horizon) {
        if mask & 1 == 0 || mask.count_ones() > max_senses {
            continue;
        }
        let mut snr_sum = 0.0;
        let mut cached = 0usize;
        for (t, ch) in channels.iter().enumerate() {
            if mask >> t & 1 == 1 {
                cached = t;
            }
            let w = mrt(&channels[cached].h_los, cfg.p_max)?;
            snr_sum += cvec::inner(&ch.h, &w).norm_sqr() / noise_power;
        }
        let avg = snr_sum / horizon as f64;
        if avg > best_avg {
            best_avg = avg;
            best_mask = mask;
        }
    }
    if best_avg == f64::NEG_INFINITY {
        // alpha·T < 1 admits no sequence with x(0) = 1; fall back to the
        // mandatory bootstrap sense alone.
        best_mask = 1;
        let mut snr_sum = 0.0;
        let w = mrt(&channels[0].h_los, cfg.p_max)?;
        for ch in channels {
            snr_sum += cvec::inner(&ch.h, &w).norm_sqr() / noise_power;
        }
        best_avg = snr_sum / horizon as f64;
    }

    let best_sequence = (0..horizon).map(|t| best_mask >> t & 1 == 1).collect();
    Ok(OracleResult { best_sequence, best_avg_snr: best_avg })
}
