//! BS-side available channel: the current LoS channel when sensing, the
//! cached stale LoS channel otherwise. The full channel (LoS + NLoS) is never
//! exposed here; the BS cannot observe it.

use num_complex::Complex64;
use thiserror::Error;

use crate::cvec::{self, Cvec};

#[derive(Debug, Error)]
pub enum EstimatorError {
    #[error("no cached channel: skip decided before any sense")]
    NoCachedChannel,
}

#[derive(Debug, Clone, PartialEq)]
struct CacheEntry {
    h_old: Cvec,
    last_sense_slot: u64,
    age: u64,
}

/// Cache of the last sensed LoS channel.
///
/// Starts in the "never sensed" state; `commit` with a sense installs the
/// cache and resets the age, a skip only ages it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EstimatorState {
    cache: Option<CacheEntry>,
}

impl EstimatorState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_bootstrapped(&self) -> bool {
        self.cache.is_some()
    }

    /// Last sensed LoS channel, if any sense happened.
    pub fn h_old(&self) -> Option<&Cvec> {
        self.cache.as_ref().map(|c| &c.h_old)
    }

    pub fn last_sense_slot(&self) -> Option<u64> {
        self.cache.as_ref().map(|c| c.last_sense_slot)
    }

    /// Slots since the last sense; `None` before the first sense.
    pub fn age(&self) -> Option<u64> {
        self.cache.as_ref().map(|c| c.age)
    }

    /// The channel the BS would beamform on for sensing decision `x`:
    /// the fresh LoS channel when `x` is set, the cached stale one otherwise.
    pub fn available_channel(&self, x: bool, h_los_now: &[Complex64]) -> Result<Cvec, EstimatorError> {
        if x {
            Ok(h_los_now.to_vec())
        } else {
            self.cache
                .as_ref()
                .map(|c| c.h_old.clone())
                .ok_or(EstimatorError::NoCachedChannel)
        }
    }

    /// Advance the cache after the slot's decision: a sense replaces the
    /// cached channel and zeroes the age, a skip increments the age. A skip
    /// in the never-sensed state leaves the state unchanged (the decision
    /// layer must not beamform from it).
    pub fn commit(&mut self, x: bool, h_los_now: &[Complex64], slot: u64) {
        if x {
            debug_assert!((cvec::norm(h_los_now) - 1.0).abs() < 1e-9, "LoS channel must be unit norm");
            self.cache = Some(CacheEntry {
                h_old: h_los_now.to_vec(),
                last_sense_slot: slot,
                age: 0,
            });
        } else if let Some(cache) = &mut self.cache {
            cache.age += 1;
        }
    }
}
