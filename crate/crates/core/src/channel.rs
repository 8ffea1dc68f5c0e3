//! Per-slot channel construction: a dominant LoS path whose departure angle
//! follows the UE position, plus sparse random NLoS multipath, each expressed
//! through the half-wavelength ULA steering vector.
//!
//! The LoS gain is normalized to 1, so `‖h_los‖ = 1` for every slot and the
//! NLoS magnitudes are small relative to it.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cvec::{self, Cvec};
use crate::seeding::splitmix64;
use crate::trace::{BsGeometry, PositionSample};

/// NLoS gain magnitudes, each drawn uniformly.
pub const GAIN_MAGNITUDES: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];

/// UE closer than this to the BS (horizontally) has no defined azimuth.
const MIN_HORIZONTAL_RANGE_M: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("undefined azimuth: UE coincident with BS horizontally at slot {0}")]
    UndefinedAzimuth(u64),
}

/// Departure angles and complex gains of all paths; index 0 is LoS.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    /// AoD per path, radians in (−π, π].
    pub aod: Vec<f64>,
    /// Complex gain per path; `gain[0] == 1` exactly.
    pub gain: Vec<Complex64>,
}

impl PathSet {
    /// Sum of NLoS gain magnitudes; bounds `‖h − h_los‖` by the triangle
    /// inequality.
    pub fn nlos_magnitude_sum(&self) -> f64 {
        self.gain.iter().skip(1).map(|g| g.norm()).sum()
    }
}

/// The NLoS fragment of a [`PathSet`] (no LoS entry).
#[derive(Debug, Clone, PartialEq)]
pub struct NlosPaths {
    pub aod: Vec<f64>,
    pub gain: Vec<Complex64>,
}

/// True channel for one slot, split into its LoS and NLoS parts.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_los: Cvec,
    pub h_nlos: Cvec,
    pub h: Cvec,
    pub paths: PathSet,
}

/// Whether NLoS paths persist for a whole episode or are redrawn per slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NlosMode {
    PerEpisode,
    PerSlot,
}

/// ULA steering vector with half-wavelength spacing: entry k is
/// `(1/√N)·exp(j·k·π·sin θ)`. Unit norm by construction.
pub fn steering_vector(theta: f64, n_antennas: usize) -> Cvec {
    assert!(n_antennas >= 1, "steering vector needs at least one antenna");
    let amp = 1.0 / (n_antennas as f64).sqrt();
    (0..n_antennas)
        .map(|k| Complex64::from_polar(amp, k as f64 * PI * theta.sin()))
        .collect()
}

/// Wrap an angle to (−π, π].
pub fn wrap_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(2.0 * PI);
    if a > PI {
        a - 2.0 * PI
    } else {
        a
    }
}

/// LoS departure azimuth of the BS→UE horizontal displacement, measured from
/// the array broadside (positive counter-clockwise), wrapped to (−π, π].
pub fn azimuth_from_position(p: &PositionSample, geom: &BsGeometry) -> Result<f64, ChannelError> {
    let dx = p.position[0] - geom.bs_position[0];
    let dy = p.position[1] - geom.bs_position[1];
    if dx.hypot(dy) < MIN_HORIZONTAL_RANGE_M {
        return Err(ChannelError::UndefinedAzimuth(p.slot_index));
    }
    Ok(wrap_angle(dy.atan2(dx) - geom.array_boresight_azimuth))
}

/// Draw `count` NLoS paths: AoD uniform on (−π, π], gain magnitude uniform
/// over [`GAIN_MAGNITUDES`], gain phase uniform on [0, 2π). Deterministic for
/// a fixed seed.
pub fn gen_nlos_paths(count: usize, seed: u64) -> NlosPaths {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut aod = Vec::with_capacity(count);
    let mut gain = Vec::with_capacity(count);
    for _ in 0..count {
        // u in [0, 1) maps to (−π, π].
        aod.push(PI - 2.0 * PI * rng.random::<f64>());
        let magnitude = GAIN_MAGNITUDES[rng.random_range(0..GAIN_MAGNITUDES.len())];
        let phase = 2.0 * PI * rng.random::<f64>();
        gain.push(Complex64::from_polar(magnitude, phase));
    }
    NlosPaths { aod, gain }
}

/// Assemble the channel at one position from an explicit NLoS fragment:
/// `h = a(θ₀) + Σ β_l·a(θ_l)` with the LoS gain fixed at 1.
pub fn gen_channel(
    p: &PositionSample,
    geom: &BsGeometry,
    n_antennas: usize,
    nlos: &NlosPaths,
) -> Result<ChannelRealization, ChannelError> {
    let theta0 = azimuth_from_position(p, geom)?;
    let h_los = steering_vector(theta0, n_antennas);

    let mut h_nlos = vec![Complex64::ZERO; n_antennas];
    for (&theta, &beta) in nlos.aod.iter().zip(&nlos.gain) {
        for (acc, a_k) in h_nlos.iter_mut().zip(steering_vector(theta, n_antennas)) {
            *acc += beta * a_k;
        }
    }
    let h = cvec::add(&h_los, &h_nlos);

    let mut aod = Vec::with_capacity(nlos.aod.len() + 1);
    let mut gain = Vec::with_capacity(nlos.gain.len() + 1);
    aod.push(theta0);
    gain.push(Complex64::ONE);
    aod.extend_from_slice(&nlos.aod);
    gain.extend_from_slice(&nlos.gain);
    let paths = PathSet { aod, gain };

    // Triangle-inequality envelope on the total channel norm, per slot.
    let s = paths.nlos_magnitude_sum();
    let nsq = cvec::norm_sqr(&h);
    assert!(
        nsq >= (1.0 - s).powi(2) - 1e-9 && nsq <= (1.0 + s).powi(2) + 1e-9,
        "channel norm {nsq} outside triangle-inequality envelope for gain sum {s}"
    );

    Ok(ChannelRealization { h_los, h_nlos, h, paths })
}

/// Stateful per-slot channel source implementing the NLoS redraw cadence.
#[derive(Debug, Clone)]
pub struct ChannelGenerator {
    geom: BsGeometry,
    n_antennas: usize,
    l_nlos: usize,
    mode: NlosMode,
    seed: u64,
    episode_paths: Option<NlosPaths>,
}

impl ChannelGenerator {
    pub fn new(geom: BsGeometry, n_antennas: usize, l_nlos: usize, mode: NlosMode, seed: u64) -> Self {
        Self { geom, n_antennas, l_nlos, mode, seed, episode_paths: None }
    }

    /// Channel realization for one position sample. In `PerEpisode` mode the
    /// NLoS fragment is drawn on first use and held; in `PerSlot` mode it is
    /// redrawn from a slot-derived seed.
    pub fn channel_at(&mut self, p: &PositionSample) -> Result<ChannelRealization, ChannelError> {
        let nlos = match self.mode {
            NlosMode::PerEpisode => {
                if self.episode_paths.is_none() {
                    self.episode_paths = Some(gen_nlos_paths(self.l_nlos, self.seed));
                }
                self.episode_paths.clone().expect("just inserted")
            }
            NlosMode::PerSlot => {
                gen_nlos_paths(self.l_nlos, splitmix64(self.seed.wrapping_add(p.slot_index)))
            }
        };
        gen_channel(p, &self.geom, self.n_antennas, &nlos)
    }
}

/// Write the golden-file channel dump: one row per slot with columns
/// `slot,re_h0..re_h{N-1},im_h0..im_h{N-1}`.
pub fn write_channel_dump<W: Write>(
    out: W,
    realizations: &[ChannelRealization],
) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    let n = realizations.first().map(|r| r.h.len()).unwrap_or(0);
    let mut header = vec!["slot".to_string()];
    header.extend((0..n).map(|k| format!("re_h{k}")));
    header.extend((0..n).map(|k| format!("im_h{k}")));
    w.write_record(&header)?;
    for (slot, r) in realizations.iter().enumerate() {
        let mut row = vec![slot.to_string()];
        row.extend(r.h.iter().map(|z| z.re.to_string()));
        row.extend(r.h.iter().map(|z| z.im.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
