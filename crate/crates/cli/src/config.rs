//! JSON run configuration and its resolution into core types.
//!
//! Power enters in dB (`p_max_db`) and is converted to linear units
//! internally. Unknown keys are rejected so a typo cannot silently fall back
//! to a default.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sensebeam_core::channel::{wrap_angle, NlosMode};
use sensebeam_core::policy::{MagnitudeMode, ObjectiveMode, PolicyConfig};
use sensebeam_core::seeding::splitmix64;
use sensebeam_core::sim::{PolicyKind, Seeds, SimConfig};
use sensebeam_core::trace::{
    self, BsGeometry, PositionSample, SynthKind, TraceFormat,
};

use crate::CliError;

fn default_episodes() -> usize {
    20
}

fn default_objective_mode() -> ObjectiveMode {
    ObjectiveMode::Genie
}

fn default_magnitude_mode() -> MagnitudeMode {
    MagnitudeMode::Squared
}

fn default_nlos_mode() -> NlosMode {
    NlosMode::PerEpisode
}

/// Where the position trace comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    CartesianCsv,
    GeodeticCsv,
    /// Generated in-process from `kind`/`slots`/`speed`; no --trace needed.
    Synthetic,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    pub format: TraceSource,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_lat: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_lon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_alt: Option<f64>,
    #[serde(default)]
    pub boresight_deg: f64,
    /// Nearest-neighbor fill for traces with slot gaps (off by default;
    /// gapped traces are rejected otherwise).
    #[serde(default)]
    pub resample: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<SynthKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slots: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
}

/// Top-level run configuration (one JSON document).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub n_antennas: usize,
    pub l_nlos: usize,
    /// Noise power σ², linear units.
    pub noise_power: f64,
    /// Transmit power budget in dB; 5 means 10^0.5 in linear units.
    pub p_max_db: f64,
    pub v: f64,
    pub alpha: f64,
    pub policy_kind: PolicyKind,
    #[serde(default = "default_objective_mode")]
    pub objective_mode: ObjectiveMode,
    #[serde(default = "default_magnitude_mode")]
    pub magnitude_mode: MagnitudeMode,
    #[serde(default = "default_nlos_mode")]
    pub nlos_mode: NlosMode,
    #[serde(default = "default_episodes")]
    pub episodes: usize,
    /// Base seed; channel/policy/trace seeds derive from it. Overridden by
    /// --seed.
    #[serde(default)]
    pub seed: u64,
    /// Sweep policy filter; all six kinds when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policies: Option<Vec<PolicyKind>>,
    pub trace: TraceConfig,
}

impl Config {
    pub fn load(path: &Path) -> Result<Config, CliError> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: Config = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.episodes == 0 {
            return Err(CliError::Config("episodes must be at least 1".into()));
        }
        if self.trace.format == TraceSource::Synthetic
            && (self.trace.kind.is_none() || self.trace.slots.is_none() || self.trace.speed.is_none())
        {
            return Err(CliError::Config(
                "synthetic trace needs trace.kind, trace.slots, and trace.speed".into(),
            ));
        }
        if self.trace.format == TraceSource::GeodeticCsv
            && (self.trace.bs_lat.is_none() || self.trace.bs_lon.is_none())
        {
            return Err(CliError::Config(
                "geodetic traces need trace.bs_lat and trace.bs_lon".into(),
            ));
        }
        if let Some(policies) = &self.policies {
            if policies.is_empty() {
                return Err(CliError::Config("policies filter must not be empty".into()));
            }
        }
        self.to_sim_config()
            .validate()
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Linear power budget.
    pub fn p_max_linear(&self) -> f64 {
        10f64.powf(self.p_max_db / 10.0)
    }

    pub fn seeds(&self) -> Seeds {
        Seeds {
            channel: splitmix64(self.seed),
            policy: splitmix64(self.seed.wrapping_add(1)),
        }
    }

    fn synth_seed(&self) -> u64 {
        splitmix64(self.seed.wrapping_add(2))
    }

    pub fn geometry(&self) -> BsGeometry {
        BsGeometry {
            bs_position: [0.0; 3],
            array_boresight_azimuth: wrap_angle(self.trace.boresight_deg.to_radians()),
        }
    }

    pub fn to_sim_config(&self) -> SimConfig {
        SimConfig {
            n_antennas: self.n_antennas,
            l_nlos: self.l_nlos,
            noise_power: self.noise_power,
            policy: PolicyConfig {
                v: self.v,
                alpha: self.alpha,
                p_max: self.p_max_linear(),
                objective_mode: self.objective_mode,
                magnitude_mode: self.magnitude_mode,
            },
            policy_kind: self.policy_kind,
            nlos_mode: self.nlos_mode,
            geometry: self.geometry(),
            seeds: self.seeds(),
        }
    }

    pub fn sweep_policies(&self) -> Vec<PolicyKind> {
        self.policies.clone().unwrap_or_else(|| PolicyKind::ALL.to_vec())
    }

    /// Load (or synthesize) and normalize the position trace.
    pub fn resolve_trace(&self, trace_path: Option<&Path>) -> Result<Vec<PositionSample>, CliError> {
        let samples = match self.trace.format {
            TraceSource::Synthetic => trace::synth_trace(
                self.trace.kind.expect("validated"),
                self.trace.slots.expect("validated"),
                self.trace.speed.expect("validated"),
                self.synth_seed(),
            )
            .map_err(|e| CliError::Config(e.to_string()))?,
            TraceSource::CartesianCsv | TraceSource::GeodeticCsv => {
                let path = trace_path.ok_or_else(|| {
                    CliError::Trace("this config reads a trace file; pass --trace PATH".into())
                })?;
                let format = match self.trace.format {
                    TraceSource::CartesianCsv => TraceFormat::CartesianCsv,
                    _ => TraceFormat::GeodeticCsv,
                };
                let records = trace::load_trace(path, format)
                    .map_err(|e| CliError::Trace(e.to_string()))?;
                match self.trace.format {
                    TraceSource::CartesianCsv => trace::cartesian_to_local(&records, [0.0; 3]),
                    _ => trace::geodetic_to_local(
                        &records,
                        self.trace.bs_lat.expect("validated"),
                        self.trace.bs_lon.expect("validated"),
                        self.trace.bs_alt.unwrap_or(0.0),
                    ),
                }
                .map_err(|e| CliError::Trace(e.to_string()))?
            }
        };
        let normalized = trace::normalize(&samples, self.trace.resample)
            .map_err(|e| CliError::Trace(e.to_string()))?;
        Ok(normalized)
    }
}
