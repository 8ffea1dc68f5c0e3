//! The `sensebeam` binary, a config-driven front end for the constrained sensing-aided
//! beamforming simulator.
//!
//! Subcommands: `run` (single episode → per_slot.csv + summary.json),
//! `sweep` (axis × policies → sweep.csv), `oracle` (online policy vs the
//! offline brute-force optimum on a short horizon). Every invocation also
//! writes a manifest that pins config, seeds, and input checksums.

mod config;
mod manifest;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sensebeam_core::channel::ChannelGenerator;
use sensebeam_core::policy::{brute_force_offline, MAX_ORACLE_HORIZON};
use sensebeam_core::sim::{run_episode, sweep, EpisodeMetrics, PolicyKind, SweepAxis, SweepRow};
use sensebeam_core::trace::PositionSample;

use config::Config;
use manifest::RunManifest;

/// CLI failure with its process exit code: 1 config, 2 trace, 3 horizon.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Trace(String),
    Horizon(String),
    Output(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) | CliError::Output(_) => 1,
            CliError::Trace(_) => 2,
            CliError::Horizon(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Trace(m) | CliError::Horizon(m) | CliError::Output(m) => m,
        }
    }
}

#[derive(Parser)]
#[command(name = "sensebeam", version, about = "Constrained sensing-aided beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    /// Position trace CSV (not needed for synthetic traces)
    #[arg(long, value_name = "PATH")]
    trace: Option<PathBuf>,
    /// Base RNG seed, overriding the config's `seed`
    #[arg(long, value_name = "N")]
    seed: Option<u64>,
    /// Worker threads for episode parallelism (default: all cores)
    #[arg(long, value_name = "N")]
    jobs: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    Alpha,
    #[value(name = "p_max")]
    PMax,
    V,
}

impl AxisArg {
    fn to_core(self) -> SweepAxis {
        match self {
            AxisArg::Alpha => SweepAxis::Alpha,
            AxisArg::PMax => SweepAxis::PMax,
            AxisArg::V => SweepAxis::V,
        }
    }

    fn name(self) -> &'static str {
        match self {
            AxisArg::Alpha => "alpha",
            AxisArg::PMax => "p_max",
            AxisArg::V => "v",
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one episode and write per_slot.csv, summary.json, manifest.json
    Run {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory (created if missing)
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
    },
    /// Sweep one axis across policies and write sweep.csv, manifest.json
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Output directory (created if missing)
        #[arg(long, value_name = "DIR")]
        out: PathBuf,
        /// Swept parameter; p_max values are in dB
        #[arg(long, value_enum)]
        axis: AxisArg,
        /// Comma-separated axis values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Compare the online policy with the offline brute-force optimum
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        /// Horizon in slots (max 16; 2^horizon sequences are enumerated)
        #[arg(long, value_name = "N", default_value_t = 12)]
        horizon: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { common, out } => cmd_run(&common, &out),
        Command::Sweep { common, out, axis, values } => cmd_sweep(&common, &out, axis, &values),
        Command::Oracle { common, horizon } => cmd_oracle(&common, horizon),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.exit_code())
        }
    }
}

fn setup(common: &CommonArgs) -> Result<(Config, Vec<PositionSample>), CliError> {
    if let Some(jobs) = common.jobs {
        // Ignore the error if a pool already exists (tests call setup twice).
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let mut cfg = Config::load(&common.config)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    let trace = cfg.resolve_trace(common.trace.as_deref())?;
    Ok((cfg, trace))
}

fn ensure_out_dir(out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out)
        .map_err(|e| CliError::Output(format!("cannot create {}: {e}", out.display())))
}

fn cmd_run(common: &CommonArgs, out: &Path) -> Result<(), CliError> {
    let (cfg, trace) = setup(common)?;
    ensure_out_dir(out)?;

    let metrics = run_episode(&cfg.to_sim_config(), &trace)
        .map_err(|e| CliError::Config(e.to_string()))?;

    write_per_slot_csv(&out.join("per_slot.csv"), &metrics)?;
    write_summary_json(&out.join("summary.json"), &metrics)?;

    let mut manifest = RunManifest::new("run", &cfg, common.trace.as_deref())?;
    manifest.outputs = vec!["per_slot.csv".into(), "summary.json".into()];
    manifest.write(&out.join("manifest.json"))?;
    Ok(())
}

fn cmd_sweep(common: &CommonArgs, out: &Path, axis: AxisArg, values: &[f64]) -> Result<(), CliError> {
    let (cfg, trace) = setup(common)?;
    ensure_out_dir(out)?;

    let rows = sweep(
        &cfg.to_sim_config(),
        &trace,
        axis.to_core(),
        values,
        &cfg.sweep_policies(),
        cfg.episodes,
    )
    .map_err(|e| CliError::Config(e.to_string()))?;

    write_sweep_csv(&out.join("sweep.csv"), &rows)?;

    let mut manifest = RunManifest::new("sweep", &cfg, common.trace.as_deref())?;
    manifest.axis = Some(axis.name().to_string());
    manifest.values = Some(values.to_vec());
    manifest.outputs = vec!["sweep.csv".into()];
    manifest.write(&out.join("manifest.json"))?;
    Ok(())
}

fn cmd_oracle(common: &CommonArgs, horizon: usize) -> Result<(), CliError> {
    if horizon > MAX_ORACLE_HORIZON {
        return Err(CliError::Horizon(format!(
            "horizon {horizon} exceeds the maximum of {MAX_ORACLE_HORIZON}"
        )));
    }
    if horizon < 2 {
        return Err(CliError::Config("oracle horizon must be at least 2".into()));
    }
    let (cfg, trace) = setup(common)?;
    if trace.len() < horizon {
        return Err(CliError::Trace(format!(
            "trace has {} slot(s) but the oracle horizon is {horizon}",
            trace.len()
        )));
    }
    let window = &trace[..horizon];

    let mut sim_cfg = cfg.to_sim_config();
    sim_cfg.policy_kind = PolicyKind::Lyapunov;
    let online = run_episode(&sim_cfg, window).map_err(|e| CliError::Config(e.to_string()))?;

    // The generator is seeded identically, so these are the very channels the
    // episode saw.
    let mut gen = ChannelGenerator::new(
        sim_cfg.geometry,
        sim_cfg.n_antennas,
        sim_cfg.l_nlos,
        sim_cfg.nlos_mode,
        sim_cfg.seeds.channel,
    );
    let channels = window
        .iter()
        .map(|p| gen.channel_at(p))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let oracle = brute_force_offline(&channels, &sim_cfg.policy, sim_cfg.noise_power)
        .map_err(|e| CliError::Config(e.to_string()))?;

    let gap = (oracle.best_avg_snr - online.avg_snr) / oracle.best_avg_snr * 100.0;
    let sequence = oracle
        .best_sequence
        .iter()
        .map(|&x| if x { '1' } else { '0' })
        .collect::<String>();

    println!("horizon: {horizon} slots, alpha = {}, V = {}", cfg.alpha, cfg.v);
    println!("{:<18}{:>16}{:>14}", "policy", "avg_snr_linear", "avg_snr_db");
    println!("{:<18}{:>16.6}{:>14.4}", "lyapunov", online.avg_snr, online.avg_snr_db);
    println!(
        "{:<18}{:>16.6}{:>14.4}",
        "offline_optimal",
        oracle.best_avg_snr,
        10.0 * oracle.best_avg_snr.log10()
    );
    println!("gap: {gap:.3}%  (offline sequence: {sequence})");
    Ok(())
}

fn write_per_slot_csv(path: &Path, metrics: &EpisodeMetrics) -> Result<(), CliError> {
    let mut text = String::from("slot,x,snr,q_after,aod_error\n");
    for r in &metrics.per_slot {
        writeln!(
            text,
            "{},{},{},{},{}",
            r.slot, r.x as u8, r.snr, r.q_after, r.aod_error
        )
        .expect("write to string cannot fail");
    }
    fs::write(path, text).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

fn write_summary_json(path: &Path, metrics: &EpisodeMetrics) -> Result<(), CliError> {
    let summary = serde_json::json!({
        "slots": metrics.per_slot.len(),
        "avg_snr_linear": metrics.avg_snr,
        "avg_snr_db": metrics.avg_snr_db,
        "sensing_rate": metrics.sensing_rate,
        "final_queue": metrics.final_queue,
    });
    let mut text = serde_json::to_string_pretty(&summary)
        .map_err(|e| CliError::Output(format!("cannot serialize summary: {e}")))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}

fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<(), CliError> {
    let mut text = String::from("axis_value,policy,avg_snr_linear,avg_snr_db,sensing_rate,final_queue\n");
    for r in rows {
        let sensing = r.sensing_rate.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            text,
            "{},{},{},{},{},{}",
            r.axis_value, r.policy, r.avg_snr_linear, r.avg_snr_db, sensing, r.final_queue
        )
        .expect("write to string cannot fail");
    }
    fs::write(path, text).map_err(|e| CliError::Output(format!("cannot write {}: {e}", path.display())))
}
