//! UE position traces: CSV ingestion, geodetic→local conversion, synthetic
//! mobility generators, and normalization to one sample per slot.
//!
//! All positions end up in a BS-centered local Cartesian frame (x = east,
//! y = north, z = up for geodetic input). The channel model only consumes the
//! horizontal components.

use std::f64::consts::PI;
use std::fs::File;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Mean Earth radius used by the equirectangular projection, meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Start range of the linear and random-walk generators, meters.
const SYNTH_START_RANGE_M: f64 = 20.0;
/// Circle radius of the arc generator, meters.
const SYNTH_ARC_RADIUS_M: f64 = 10.0;
/// Heading perturbation of the random walk, radians per slot.
const SYNTH_WALK_HEADING_STD: f64 = 0.25;
/// Random walk keeps at least this horizontal range from the BS, meters.
const SYNTH_WALK_MIN_RANGE_M: f64 = 1.0;

/// Errors from trace loading, conversion, and synthesis.
#[derive(Debug, Error)]
pub enum TraceError {
    #[error("failed to read trace file: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("empty trace file")]
    Empty,
    #[error("trace has {0} sample(s); at least 2 required")]
    TooShort(usize),
    #[error("malformed row at line {line}: {msg}")]
    MalformedRow { line: u64, msg: String },
    #[error("non-monotone slot index at line {line}")]
    NonMonotoneSlot { line: u64 },
    #[error("unexpected header \"{found}\"; expected \"{expected}\"")]
    BadHeader { found: String, expected: String },
    #[error("latitude/longitude out of range at slot {slot}: ({lat}, {lon})")]
    LatLonOutOfRange { slot: u64, lat: f64, lon: f64 },
    #[error("record at slot {0} is not geodetic")]
    NotGeodetic(u64),
    #[error("record at slot {0} is not cartesian")]
    NotCartesian(u64),
    #[error("missing slot {0} in trace; slots must be contiguous (enable resample to fill)")]
    MissingSlot(u64),
    #[error("non-finite position at slot {0}")]
    NonFinite(u64),
    #[error("invalid synthetic trace parameters: {0}")]
    InvalidSynth(String),
}

/// Input schema of a trace file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceFormat {
    /// Header `slot,x,y,z` (z optional), meters in the local frame.
    CartesianCsv,
    /// Header `slot,lat,lon,alt` (alt optional), decimal degrees / meters.
    GeodeticCsv,
}

/// Raw coordinates as they appear in the input file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RawCoords {
    Cartesian { x: f64, y: f64, z: Option<f64> },
    Geodetic { lat: f64, lon: f64, alt: Option<f64> },
}

/// One parsed trace row, prior to frame conversion and normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct RawPositionRecord {
    pub slot_index: u64,
    pub coords: RawCoords,
}

/// UE position for one slot, meters, in a frame whose origin is the BS
/// antenna reference point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionSample {
    pub slot_index: u64,
    pub position: [f64; 3],
}

/// BS placement and array orientation in the local frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BsGeometry {
    /// BS antenna reference point; the origin after conversion.
    pub bs_position: [f64; 3],
    /// Direction of the ULA broadside, radians in (−π, π].
    pub array_boresight_azimuth: f64,
}

impl BsGeometry {
    pub fn new(bs_position: [f64; 3], array_boresight_azimuth: f64) -> Self {
        assert!(
            array_boresight_azimuth > -PI && array_boresight_azimuth <= PI,
            "boresight azimuth must lie in (-pi, pi]"
        );
        Self {
            bs_position,
            array_boresight_azimuth,
        }
    }
}

impl Default for BsGeometry {
    fn default() -> Self {
        Self {
            bs_position: [0.0; 3],
            array_boresight_azimuth: 0.0,
        }
    }
}

fn expected_header(format: TraceFormat) -> &'static str {
    match format {
        TraceFormat::CartesianCsv => "slot,x,y,z",
        TraceFormat::GeodeticCsv => "slot,lat,lon,alt",
    }
}

fn parse_f64(field: &str, name: &str, line: u64) -> Result<f64, TraceError> {
    field.trim().parse::<f64>().map_err(|_| TraceError::MalformedRow {
        line,
        msg: format!("cannot parse {name} from {field:?}"),
    })
}

/// Load and parse a trace file under the declared schema.
///
/// Rows must carry strictly increasing slot indices; `#`-prefixed lines are
/// comments. Optional trailing columns (z / alt) may be omitted per row.
pub fn load_trace(path: &Path, format: TraceFormat) -> Result<Vec<RawPositionRecord>, TraceError> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);

    let headers = reader.headers()?.clone();
    let found: Vec<String> = headers.iter().map(|h| h.trim().to_ascii_lowercase()).collect();
    let expected: Vec<&str> = expected_header(format).split(',').collect();
    let prefix_ok = found.len() >= 3
        && found.len() <= 4
        && found.iter().zip(&expected).all(|(f, e)| f == e);
    if !prefix_ok {
        return Err(TraceError::BadHeader {
            found: found.join(","),
            expected: expected_header(format).to_string(),
        });
    }

    let mut records = Vec::new();
    let mut last_slot: Option<u64> = None;
    for row in reader.records() {
        let row = row?;
        let line = row.position().map(|p| p.line()).unwrap_or(0);
        if row.len() < 3 || row.len() > 4 || row.iter().take(3).any(|f| f.is_empty()) {
            return Err(TraceError::MalformedRow {
                line,
                msg: format!("expected 3 or 4 fields, got {}", row.len()),
            });
        }
        let slot: u64 = row[0].trim().parse().map_err(|_| TraceError::MalformedRow {
            line,
            msg: format!("cannot parse slot index from {:?}", &row[0]),
        })?;
        if let Some(prev) = last_slot {
            if slot <= prev {
                return Err(TraceError::NonMonotoneSlot { line });
            }
        }
        last_slot = Some(slot);

        let fourth = match row.get(3) {
            Some(f) if !f.trim().is_empty() => Some(parse_f64(f, expected[3], line)?),
            _ => None,
        };
        let coords = match format {
            TraceFormat::CartesianCsv => RawCoords::Cartesian {
                x: parse_f64(&row[1], "x", line)?,
                y: parse_f64(&row[2], "y", line)?,
                z: fourth,
            },
            TraceFormat::GeodeticCsv => RawCoords::Geodetic {
                lat: parse_f64(&row[1], "lat", line)?,
                lon: parse_f64(&row[2], "lon", line)?,
                alt: fourth,
            },
        };
        records.push(RawPositionRecord { slot_index: slot, coords });
    }

    if records.is_empty() {
        return Err(TraceError::Empty);
    }
    Ok(records)
}

/// Convert geodetic records to the BS-centered local frame with an
/// equirectangular ENU projection about (`bs_lat`, `bs_lon`, `bs_alt`).
///
/// east = R·Δlon·cos(bs_lat)·π/180, north = R·Δlat·π/180, up = Δalt
/// (0 when the row has no altitude), with R the mean Earth radius.
pub fn geodetic_to_local(
    records: &[RawPositionRecord],
    bs_lat: f64,
    bs_lon: f64,
    bs_alt: f64,
) -> Result<Vec<PositionSample>, TraceError> {
    check_lat_lon(bs_lat, bs_lon, u64::MAX)?;
    let deg = PI / 180.0;
    let cos_lat = (bs_lat * deg).cos();
    records
        .iter()
        .map(|rec| {
            let (lat, lon, alt) = match rec.coords {
                RawCoords::Geodetic { lat, lon, alt } => (lat, lon, alt),
                RawCoords::Cartesian { .. } => return Err(TraceError::NotGeodetic(rec.slot_index)),
            };
            check_lat_lon(lat, lon, rec.slot_index)?;
            let east = EARTH_RADIUS_M * (lon - bs_lon) * cos_lat * deg;
            let north = EARTH_RADIUS_M * (lat - bs_lat) * deg;
            let up = alt.map(|a| a - bs_alt).unwrap_or(0.0);
            Ok(PositionSample {
                slot_index: rec.slot_index,
                position: [east, north, up],
            })
        })
        .collect()
}

fn check_lat_lon(lat: f64, lon: f64, slot: u64) -> Result<(), TraceError> {
    if !(-90.0..=90.0).contains(&lat) || !(-180.0..=180.0).contains(&lon) {
        return Err(TraceError::LatLonOutOfRange { slot, lat, lon });
    }
    Ok(())
}

/// Inverse of [`geodetic_to_local`] for one position: local ENU meters back
/// to (lat, lon, alt) degrees/meters about the same BS reference.
pub fn local_to_geodetic(position: [f64; 3], bs_lat: f64, bs_lon: f64, bs_alt: f64) -> (f64, f64, f64) {
    let deg = PI / 180.0;
    let cos_lat = (bs_lat * deg).cos();
    let lat = bs_lat + position[1] / (EARTH_RADIUS_M * deg);
    let lon = bs_lon + position[0] / (EARTH_RADIUS_M * cos_lat * deg);
    let alt = bs_alt + position[2];
    (lat, lon, alt)
}

/// Convert cartesian records to samples in the BS-centered frame by
/// subtracting `bs_position`. Missing z defaults to 0.
pub fn cartesian_to_local(
    records: &[RawPositionRecord],
    bs_position: [f64; 3],
) -> Result<Vec<PositionSample>, TraceError> {
    records
        .iter()
        .map(|rec| {
            let (x, y, z) = match rec.coords {
                RawCoords::Cartesian { x, y, z } => (x, y, z.unwrap_or(0.0)),
                RawCoords::Geodetic { .. } => return Err(TraceError::NotCartesian(rec.slot_index)),
            };
            Ok(PositionSample {
                slot_index: rec.slot_index,
                position: [
                    x - bs_position[0],
                    y - bs_position[1],
                    z - bs_position[2],
                ],
            })
        })
        .collect()
}

/// Normalize samples to exactly one per slot index in `[0, T-1]`.
///
/// Gaps are rejected unless `resample` is set, in which case each missing
/// slot takes the sample nearest in slot time (earlier sample wins ties).
/// Slot indices are re-based to start at 0.
pub fn normalize(samples: &[PositionSample], resample: bool) -> Result<Vec<PositionSample>, TraceError> {
    if samples.len() < 2 {
        return Err(TraceError::TooShort(samples.len()));
    }
    for s in samples {
        if !s.position.iter().all(|c| c.is_finite()) {
            return Err(TraceError::NonFinite(s.slot_index));
        }
    }
    let first = samples[0].slot_index;
    let last = samples[samples.len() - 1].slot_index;
    if !resample {
        for (k, s) in samples.iter().enumerate() {
            let want = first + k as u64;
            if s.slot_index != want {
                return Err(TraceError::MissingSlot(want));
            }
        }
        return Ok(samples
            .iter()
            .map(|s| PositionSample {
                slot_index: s.slot_index - first,
                position: s.position,
            })
            .collect());
    }

    // Nearest-neighbor fill over the full [first, last] span.
    let mut out = Vec::with_capacity((last - first + 1) as usize);
    let mut idx = 0usize;
    for slot in first..=last {
        while idx + 1 < samples.len() && samples[idx + 1].slot_index <= slot {
            idx += 1;
        }
        let cur = &samples[idx];
        let chosen = if idx + 1 < samples.len() {
            let next = &samples[idx + 1];
            let d_cur = slot - cur.slot_index;
            let d_next = next.slot_index - slot;
            if d_next < d_cur {
                next
            } else {
                cur
            }
        } else {
            cur
        };
        out.push(PositionSample {
            slot_index: slot - first,
            position: chosen.position,
        });
    }
    Ok(out)
}

/// Synthetic mobility patterns for desk-scale experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    /// Straight line through the cell at constant speed.
    Linear,
    /// Seeded random walk with Gaussian heading perturbations.
    RandomWalk,
    /// Constant angular rate on a circle around the BS.
    Arc,
}

/// Generate a synthetic trace. Pure function of its arguments; the seed only
/// affects `RandomWalk`.
pub fn synth_trace(
    kind: SynthKind,
    slots: usize,
    speed: f64,
    seed: u64,
) -> Result<Vec<PositionSample>, TraceError> {
    if slots < 2 {
        return Err(TraceError::InvalidSynth(format!("slots must be >= 2, got {slots}")));
    }
    if !(speed >= 0.0 && speed.is_finite()) {
        return Err(TraceError::InvalidSynth(format!("speed must be >= 0, got {speed}")));
    }
    let samples = match kind {
        SynthKind::Linear => (0..slots)
            .map(|k| PositionSample {
                slot_index: k as u64,
                position: [SYNTH_START_RANGE_M, k as f64 * speed, 0.0],
            })
            .collect(),
        SynthKind::Arc => {
            let step = speed / SYNTH_ARC_RADIUS_M;
            (0..slots)
                .map(|k| {
                    let phi = k as f64 * step;
                    PositionSample {
                        slot_index: k as u64,
                        position: [
                            SYNTH_ARC_RADIUS_M * phi.cos(),
                            SYNTH_ARC_RADIUS_M * phi.sin(),
                            0.0,
                        ],
                    }
                })
                .collect()
        }
        SynthKind::RandomWalk => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let turn = Normal::new(0.0, SYNTH_WALK_HEADING_STD)
                .expect("valid normal parameters");
            let mut pos = [SYNTH_START_RANGE_M, 0.0, 0.0];
            let mut heading = PI / 2.0;
            let mut samples = Vec::with_capacity(slots);
            samples.push(PositionSample { slot_index: 0, position: pos });
            for k in 1..slots {
                heading += turn.sample(&mut rng);
                let mut next = [
                    pos[0] + speed * heading.cos(),
                    pos[1] + speed * heading.sin(),
                    0.0,
                ];
                if next[0].hypot(next[1]) < SYNTH_WALK_MIN_RANGE_M {
                    // Step away from the BS instead of into it.
                    heading += PI;
                    next = [
                        pos[0] + speed * heading.cos(),
                        pos[1] + speed * heading.sin(),
                        0.0,
                    ];
                }
                pos = next;
                samples.push(PositionSample {
                    slot_index: k as u64,
                    position: pos,
                });
            }
            samples
        }
    };
    Ok(samples)
}
