//! Subcommand execution. Every command renders its full output in memory so
//! `--verify` can compare a fresh run byte for byte.

use hqs_core::bounds::{
    csl_bound, h0_bound_with, kappa_bound, project, strain_sensitivity, DeviceScenario,
    Projection,
};
use hqs_core::constants::hertz;
use hqs_core::io::{
    read_block_series, read_population_records, read_thermometry, write_sem_curve,
    write_strain_points, write_sweep,
};
use hqs_core::protocol::{simulate_protocol, sweep, InversionCurves, ProtocolOutcome, SweepRow};
use hqs_core::stats::{
    block_statistics, effective_temperature, fit_bose, synthetic_blocks, weighted_mean, BoseFit,
    PopulationRecord,
};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{config_hash, read_data, LoadedConfig, RunConfig, StatsMode};
use crate::{Channel, CliError, Command, GlobalArgs};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything besides the config that shapes the output.
#[derive(Clone, Debug, Serialize)]
pub struct Options {
    command: &'static str,
    format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    population: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    channel: Option<Channel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    e33: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scenario: Option<DeviceScenario>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats_mode: Option<StatsMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    input_sha256: Option<String>,
    seed: u64,
}

pub struct Request {
    pub options: Options,
    pub hash: String,
    input_data: Option<String>,
}

fn format_for(out: &Option<std::path::PathBuf>, default: Format) -> Format {
    match out.as_ref().and_then(|p| p.extension()).and_then(|e| e.to_str()) {
        Some("csv") => Format::Csv,
        Some("json") => Format::Json,
        _ => default,
    }
}

impl Request {
    pub fn new(command: &Command, global: &GlobalArgs, loaded: &LoadedConfig) -> Result<Self, CliError> {
        let cfg = &loaded.config;
        let mut o = Options {
            command: "",
            format: Format::Json,
            population: None,
            channel: None,
            e33: None,
            scenario: None,
            stats_mode: None,
            input: None,
            input_sha256: None,
            seed: global.seed,
        };
        let mut input_data = None;
        match command {
            Command::Simulate { population } => {
                o.command = "simulate";
                o.population = population.or(cfg.simulate.as_ref().map(|s| s.true_population));
                if o.population.is_none() {
                    return Err(CliError::User(
                        "simulate needs --population or a `simulate` block".into(),
                    ));
                }
            }
            Command::Sweep => {
                o.command = "sweep";
                o.format = format_for(&global.out, Format::Csv);
                if cfg.sweep.is_none() {
                    return Err(CliError::User("sweep needs a `sweep` block in the config".into()));
                }
            }
            Command::Bound {
                channel,
                population,
                e33,
            } => {
                o.command = "bound";
                o.channel = Some(*channel);
                let block = cfg.bound.clone().unwrap_or_default();
                o.population = population.or(block.population);
                if o.population.is_none() {
                    return Err(CliError::User(
                        "bound needs --population or `bound.population`".into(),
                    ));
                }
                if *channel == Channel::Dp {
                    o.e33 = Some(e33.unwrap_or(block.e33));
                }
            }
            Command::Project {
                scenario,
                channel,
                population,
            } => {
                o.command = "project";
                o.format = format_for(&global.out, Format::Json);
                o.channel = *channel;
                let mut s = match (scenario, &cfg.scenario) {
                    (Some(label), _) => DeviceScenario::from_label(*label),
                    (None, Some(s)) => s.clone(),
                    (None, None) => {
                        return Err(CliError::User(
                            "project needs --scenario or a `scenario` block".into(),
                        ))
                    }
                };
                if let Some(p) = population {
                    s.population = *p;
                }
                o.scenario = Some(s);
            }
            Command::Stats { mode, input } => {
                o.command = "stats";
                o.format = format_for(&global.out, Format::Json);
                let block = cfg.stats.clone();
                let mode = mode
                    .or(block.as_ref().map(|b| b.mode))
                    .ok_or_else(|| CliError::User("stats needs --mode or a `stats` block".into()))?;
                o.stats_mode = Some(mode);
                let synthetic = block.as_ref().and_then(|b| b.synthetic.clone());
                let reference = input.clone().or(block.as_ref().and_then(|b| b.input.clone()));
                match (&reference, synthetic) {
                    (Some(r), _) => {
                        let data = read_data(r, &loaded.origin)?;
                        o.input_sha256 = Some(hex::encode(Sha256::digest(data.as_bytes())));
                        o.input = Some(r.clone());
                        input_data = Some(data);
                    }
                    (None, Some(_)) if mode == StatsMode::Blocks => {}
                    _ => {
                        return Err(CliError::User(
                            "stats needs --input, `stats.input`, or `stats.synthetic` (blocks mode)".into(),
                        ))
                    }
                }
            }
        }
        let hash = config_hash(cfg, &o);
        Ok(Self {
            options: o,
            hash,
            input_data,
        })
    }
}

#[derive(Serialize)]
struct Envelope<'a, R: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'static str,
    config_hash: &'a str,
    options: &'a Options,
    config: &'a RunConfig,
    result: R,
}

fn json_output<R: Serialize>(req: &Request, cfg: &RunConfig, result: R) -> Vec<u8> {
    let env = Envelope {
        tool: "hqs",
        version: env!("CARGO_PKG_VERSION"),
        command: req.options.command,
        config_hash: &req.hash,
        options: &req.options,
        config: cfg,
        result,
    };
    let mut out = serde_json::to_vec_pretty(&env).expect("output serializes");
    out.push(b'\n');
    out
}

fn csv_output(req: &Request, extra: &[String], body: impl FnOnce(&mut Vec<u8>) -> hqs_core::Result<()>) -> Result<Vec<u8>, CliError> {
    let mut out = format!("# config_hash: {}\n# command: {}\n", req.hash, req.options.command).into_bytes();
    for line in extra {
        out.extend_from_slice(format!("# {line}\n").as_bytes());
    }
    body(&mut out)?;
    Ok(out)
}

#[derive(Serialize)]
struct Inference {
    measured: f64,
    bath_range: [f64; 2],
    inferred: f64,
    cold_floor: f64,
    hot_floor: f64,
}

#[derive(Serialize)]
struct SimulateResult {
    outcome: ProtocolOutcome,
    #[serde(skip_serializing_if = "Option::is_none")]
    inference: Option<Inference>,
}

#[derive(Serialize)]
struct SweepResult<'a> {
    parameter: &'static str,
    rows: &'a [SweepRow],
}

#[derive(Serialize)]
#[serde(untagged)]
enum BoundResult {
    Gw(hqs_core::bounds::GWResult),
    Dp(hqs_core::bounds::DPResult),
    Csl(hqs_core::bounds::CSLResult),
}

#[derive(Serialize)]
struct ProjectResult {
    projection: Projection,
    skipped_channels: Vec<String>,
    /// (frequency in Hz, h0) for neighbouring modes.
    strain_points: Vec<(f64, f64)>,
}

#[derive(Serialize)]
struct BlocksResult {
    n_blocks: usize,
    mean: f64,
    sigma_total: f64,
    final_sem: f64,
    sem_slope: f64,
    sem_curve: Vec<(usize, f64)>,
    reference_curve: Vec<(usize, f64)>,
}

#[derive(Serialize)]
struct FitResult {
    freq_hz: f64,
    fit: BoseFit,
    /// Temperature whose thermal population equals the fitted offset.
    #[serde(skip_serializing_if = "Option::is_none")]
    offset_effective_temperature: Option<f64>,
}

#[derive(Serialize)]
#[serde(untagged)]
enum StatsResult {
    WeightedMean(PopulationRecord),
    Blocks(BlocksResult),
    Fit(FitResult),
}

const STRAIN_OFFSETS: std::ops::RangeInclusive<i32> = -20..=20;

pub fn execute(req: &Request, loaded: &LoadedConfig) -> Result<Vec<u8>, CliError> {
    let cfg = &loaded.config;
    let o = &req.options;
    match o.command {
        "simulate" => {
            let p = o.population.expect("resolved");
            let outcome = simulate_protocol(&cfg.device, p, &cfg.protocol, &cfg.numerics())?;
            let inference = match cfg.simulate.as_ref().and_then(|s| s.infer_measured.map(|m| (m, s.bath_range))) {
                Some((measured, bath_range)) => {
                    let curves = InversionCurves::build(&cfg.device, bath_range, &cfg.protocol, &cfg.numerics())?;
                    Some(Inference {
                        measured,
                        bath_range,
                        inferred: curves.infer(measured)?,
                        cold_floor: curves.cold.floor(),
                        hot_floor: curves.hot.floor(),
                    })
                }
                None => None,
            };
            Ok(json_output(req, cfg, SimulateResult { outcome, inference }))
        }
        "sweep" => {
            let spec = cfg.sweep.as_ref().expect("resolved");
            let rows = sweep(&cfg.device, spec, &cfg.protocol, &cfg.numerics())?;
            match o.format {
                Format::Csv => csv_output(req, &[format!("parameter: {}", spec.parameter.name())], |out| {
                    write_sweep(out, &rows)
                }),
                Format::Json => Ok(json_output(
                    req,
                    cfg,
                    SweepResult {
                        parameter: spec.parameter.name(),
                        rows: &rows,
                    },
                )),
            }
        }
        "bound" => {
            let p = o.population.expect("resolved");
            let block = cfg.bound.clone().unwrap_or_default();
            let result = match o.channel.expect("resolved") {
                Channel::Gw => BoundResult::Gw(h0_bound_with(p, &cfg.device, &block.assumptions)?),
                Channel::Dp => BoundResult::Dp(kappa_bound(p, &cfg.device, o.e33.expect("resolved"))?),
                Channel::Csl => BoundResult::Csl(csl_bound(p, cfg.device.t1_phonon)?),
            };
            if let BoundResult::Dp(r) = &result {
                for w in &r.warnings {
                    eprintln!("warning: {w}");
                }
            }
            Ok(json_output(req, cfg, result))
        }
        "project" => {
            let scenario = o.scenario.as_ref().expect("resolved");
            let mut projection = project(scenario)?;
            let mut skipped = Vec::new();
            if projection.dp.is_none() {
                skipped.push(format!(
                    "dp: not computed for scenario {}; kinetic mixing is suppressed by shielding",
                    scenario.label.name()
                ));
            }
            if let Some(ch) = o.channel {
                if ch == Channel::Dp && projection.dp.is_none() {
                    eprintln!("notice: {}", skipped[0]);
                }
                if ch != Channel::Dp {
                    projection.dp = None;
                }
            }
            let n = scenario.device.mode_number as i32;
            let offsets: Vec<i32> = STRAIN_OFFSETS.filter(|k| n + k > 0).collect();
            let strain_points = strain_sensitivity(scenario.population, &scenario.device, &offsets)?;
            match o.format {
                Format::Csv => csv_output(req, &[format!("scenario: {}", scenario.label.name())], |out| {
                    write_strain_points(out, &strain_points)
                }),
                Format::Json => Ok(json_output(
                    req,
                    cfg,
                    ProjectResult {
                        projection,
                        skipped_channels: skipped,
                        strain_points,
                    },
                )),
            }
        }
        "stats" => stats(req, cfg),
        other => unreachable!("unknown command {other}"),
    }
}

fn stats(req: &Request, cfg: &RunConfig) -> Result<Vec<u8>, CliError> {
    let o = &req.options;
    let data = req.input_data.as_deref();
    match o.stats_mode.expect("resolved") {
        StatsMode::WeightedMean => {
            let records = read_population_records(data.expect("resolved").as_bytes())?;
            Ok(json_output(req, cfg, StatsResult::WeightedMean(weighted_mean(&records)?)))
        }
        StatsMode::Blocks => {
            let series = match data {
                Some(d) => read_block_series(d.as_bytes())?,
                None => {
                    let s = cfg.stats.as_ref().and_then(|b| b.synthetic.clone()).expect("resolved");
                    synthetic_blocks(s.n_blocks, s.mean, s.sigma, o.seed)?
                }
            };
            let b = block_statistics(&series)?;
            if o.format == Format::Csv {
                return csv_output(req, &[], |out| write_sem_curve(out, &b.sem_curve, &b.reference_curve));
            }
            let result = BlocksResult {
                n_blocks: series.len(),
                mean: b.mean,
                sigma_total: b.sigma_total,
                final_sem: b.sem_curve.last().map_or(0.0, |s| s.1),
                sem_slope: b.sem_slope()?,
                sem_curve: b.sem_curve,
                reference_curve: b.reference_curve,
            };
            Ok(json_output(req, cfg, StatsResult::Blocks(result)))
        }
        StatsMode::FitBose => {
            let points = read_thermometry(data.expect("resolved").as_bytes())?;
            let freq_hz = cfg
                .stats
                .as_ref()
                .and_then(|b| b.freq_hz)
                .unwrap_or_else(|| hertz(cfg.device.phonon_freq));
            let fit = fit_bose(&points, freq_hz)?;
            let offset_effective_temperature = if fit.offset > 0.0 && fit.offset < 0.25 {
                Some(effective_temperature(fit.offset, freq_hz)?)
            } else {
                None
            };
            Ok(json_output(
                req,
                cfg,
                StatsResult::Fit(FitResult {
                    freq_hz,
                    fit,
                    offset_effective_temperature,
                }),
            ))
        }
    }
}

/// Checks the hash embedded in `written` against the config and re-runs the
/// command to compare bytes.
pub fn verify(req: &Request, loaded: &LoadedConfig, written: &[u8]) -> Result<(), CliError> {
    let text = std::str::from_utf8(written)
        .map_err(|_| CliError::Numerical("output is not UTF-8".into()))?;
    let embedded = match req.options.format {
        Format::Csv => text
            .lines()
            .next()
            .and_then(|l| l.strip_prefix("# config_hash: "))
            .map(str::to_string),
        Format::Json => serde_json::from_str::<serde_json::Value>(text)
            .ok()
            .and_then(|v| v.get("config_hash").and_then(|h| h.as_str()).map(str::to_string)),
    }
    .ok_or_else(|| CliError::Numerical("output carries no config hash".into()))?;
    let expected = config_hash(&loaded.config, &req.options);
    if embedded != expected {
        return Err(CliError::Numerical(format!(
            "config hash mismatch: output has {embedded}, config gives {expected}"
        )));
    }
    let rerun = execute(req, loaded)?;
    if rerun != written {
        return Err(CliError::Numerical("re-run output differs from the written output".into()));
    }
    Ok(())
}
