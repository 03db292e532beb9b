//! Experiment harness: generate market batches, run mechanisms on them,
//! audit every outcome and aggregate blocking counts into tables.
//!
//! All outputs except `timings.json` are a pure function of the experiment
//! config and its master seed.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::blocking::{audit, AuditError, BlockingCounts, StabilityFlags, Witnesses};
use crate::fixtures;
use crate::gen::{derive_seed, generate_market, Alignment, GenConfig, GenError};
use crate::market::{Market, MarketError};
use crate::mechanisms::{MechanismKind, Schedule};
use crate::oracle::{census, OracleError};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const RESULTS_FILE: &str = "results.json";
pub const TIMINGS_FILE: &str = "timings.json";
pub const TABLE_CSV_FILE: &str = "table.csv";
pub const TABLE_TEXT_FILE: &str = "table.txt";

#[derive(Debug, Error)]
pub enum SimError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("config: {0}")]
    Config(#[from] toml::de::Error),
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Market(#[from] MarketError),
    #[error(transparent)]
    Gen(#[from] GenError),
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("no results to aggregate")]
    EmptyResults,
    #[error("`{0}` is neither a fixture name nor a readable market file")]
    UnknownTarget(String),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

fn read(path: &Path) -> Result<String, SimError> {
    fs::read_to_string(path).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), SimError> {
    fs::write(path, contents).map_err(|source| SimError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, SimError> {
    serde_json::from_str(&read(path)?).map_err(|source| SimError::Json {
        path: path.to_path_buf(),
        source,
    })
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("harness types serialize");
    text.push('\n');
    text
}

fn default_seeds() -> u32 {
    1
}

fn default_mechanisms() -> Vec<MechanismKind> {
    MechanismKind::ALL.to_vec()
}

/// One experiment: a market shape, the regimes to draw it under, and the
/// mechanisms to run on every replica.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub replicas: u32,
    /// Mechanism runs per market, each with its own derived seed.
    #[serde(default = "default_seeds")]
    pub seeds_per_market: u32,
    #[serde(default = "default_mechanisms")]
    pub mechanisms: Vec<MechanismKind>,
    pub alignments: Vec<Alignment>,
    /// Shape shared by all regimes; its own `alignment` is ignored.
    pub market: GenConfig,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, SimError> {
        Self::from_toml(&read(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical JSON form.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(canonical.as_bytes()))
    }

    pub fn regime(&self, alignment: Alignment) -> GenConfig {
        GenConfig {
            alignment,
            ..self.market.clone()
        }
    }
}

/// Seed of replica `replica` under the regime at `regime_index`.
pub fn market_seed(master: u64, regime_index: usize, replica: u32) -> u64 {
    derive_seed(derive_seed(master, regime_index as u64), u64::from(replica))
}

/// Seed of the `run`-th run of `mechanism` on the market seeded `market_seed`.
pub fn mechanism_seed(market_seed: u64, mechanism: MechanismKind, run: u32) -> u64 {
    let lane = MechanismKind::ALL.iter().position(|&k| k == mechanism).expect("listed") as u64;
    derive_seed(market_seed ^ 0xA5A5_A5A5_A5A5_A5A5, (lane << 32) | u64::from(run))
}

#[derive(Clone, Debug)]
pub struct MarketCase {
    pub alignment: Alignment,
    pub replica: u32,
    pub seed: u64,
    pub market: Market,
}

impl MarketCase {
    pub fn file_name(&self) -> String {
        format!("market_{}_{:03}_{:016x}.json", self.alignment, self.replica, self.seed)
    }
}

/// All replica markets of an experiment, regime by regime.
pub fn generate_cases(config: &ExperimentConfig, jobs: usize) -> Result<Vec<MarketCase>, SimError> {
    let specs: Vec<(usize, Alignment, u32)> = config
        .alignments
        .iter()
        .enumerate()
        .flat_map(|(i, &a)| (0..config.replicas).map(move |r| (i, a, r)))
        .collect();
    pool(jobs)?.install(|| {
        specs
            .into_par_iter()
            .map(|(i, alignment, replica)| {
                let seed = market_seed(config.seed, i, replica);
                let market = generate_market(&config.regime(alignment), seed)?;
                Ok(MarketCase {
                    alignment,
                    replica,
                    seed,
                    market,
                })
            })
            .collect()
    })
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, SimError> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub alignment: Alignment,
    pub replica: u32,
    pub seed: u64,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub name: String,
    pub config_digest: String,
    pub master_seed: u64,
    pub config: ExperimentConfig,
    pub markets: Vec<ManifestEntry>,
}

/// Writes every replica market plus `manifest.json` into `out_dir`.
/// `seed` overrides the config's master seed.
pub fn cmd_generate(config_path: &Path, out_dir: &Path, seed: Option<u64>, jobs: usize) -> Result<Manifest, SimError> {
    let mut config = ExperimentConfig::load(config_path)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    generate_into(&config, out_dir, jobs)
}

pub fn generate_into(config: &ExperimentConfig, out_dir: &Path, jobs: usize) -> Result<Manifest, SimError> {
    fs::create_dir_all(out_dir).map_err(|source| SimError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let cases = generate_cases(config, jobs)?;
    let mut markets = Vec::with_capacity(cases.len());
    for case in &cases {
        let file = case.file_name();
        write(&out_dir.join(&file), &case.market.to_json())?;
        markets.push(ManifestEntry {
            alignment: case.alignment,
            replica: case.replica,
            seed: case.seed,
            file,
        });
    }
    let manifest = Manifest {
        name: config.name.clone(),
        config_digest: config.digest(),
        master_seed: config.seed,
        config: config.clone(),
        markets,
    };
    write(&out_dir.join(MANIFEST_FILE), &to_json(&manifest))?;
    Ok(manifest)
}

/// Audit of one mechanism run on one replica.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunResult {
    pub config_digest: String,
    pub alignment: Alignment,
    pub replica: u32,
    pub market_seed: u64,
    pub mechanism: MechanismKind,
    pub seed: u64,
    pub counts: BlockingCounts,
    pub flags: StabilityFlags,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witnesses: Option<Witnesses>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub alignment: Alignment,
    pub replica: u32,
    pub mechanism: MechanismKind,
    pub seed: u64,
    pub runtime_ms: f64,
}

/// Runs and audits every (market, mechanism, seed) triple. Output order is
/// case order, then `mechanisms` order, then run index.
pub fn run_cases(
    cases: &[MarketCase],
    mechanisms: &[MechanismKind],
    seeds_per_market: u32,
    config_digest: &str,
    jobs: usize,
    verbose_witnesses: bool,
) -> Result<Vec<(RunResult, Duration)>, SimError> {
    let tasks: Vec<(&MarketCase, MechanismKind, u32)> = cases
        .iter()
        .flat_map(|case| {
            mechanisms
                .iter()
                .flat_map(move |&k| (0..seeds_per_market).map(move |run| (case, k, run)))
        })
        .collect();
    pool(jobs)?.install(|| {
        tasks
            .into_par_iter()
            .map(|(case, mechanism, run)| {
                let seed = mechanism_seed(case.seed, mechanism, run);
                let started = Instant::now();
                let outcome = mechanism.run(&case.market, &Schedule::Seeded(seed));
                let elapsed = started.elapsed();
                let report = audit(&case.market, &outcome.matching)?;
                Ok((
                    RunResult {
                        config_digest: config_digest.to_string(),
                        alignment: case.alignment,
                        replica: case.replica,
                        market_seed: case.seed,
                        mechanism,
                        seed,
                        counts: report.counts,
                        flags: report.flags,
                        witnesses: if verbose_witnesses { report.witnesses } else { None },
                    },
                    elapsed,
                ))
            })
            .collect()
    })
}

/// Runs the manifest's markets and writes `results.json` and `timings.json`.
/// `mechanisms` overrides the configured list.
pub fn cmd_run(
    dir: &Path,
    mechanisms: Option<&[MechanismKind]>,
    jobs: usize,
    verbose_witnesses: bool,
) -> Result<Vec<RunResult>, SimError> {
    let manifest: Manifest = parse_json(&dir.join(MANIFEST_FILE))?;
    let cases = manifest
        .markets
        .iter()
        .map(|entry| {
            Ok(MarketCase {
                alignment: entry.alignment,
                replica: entry.replica,
                seed: entry.seed,
                market: Market::from_json(&read(&dir.join(&entry.file))?)?,
            })
        })
        .collect::<Result<Vec<_>, SimError>>()?;
    let mechanisms = mechanisms.unwrap_or(&manifest.config.mechanisms);
    let runs = run_cases(
        &cases,
        mechanisms,
        manifest.config.seeds_per_market,
        &manifest.config_digest,
        jobs,
        verbose_witnesses,
    )?;
    let timings: Vec<Timing> = runs
        .iter()
        .map(|(r, elapsed)| Timing {
            alignment: r.alignment,
            replica: r.replica,
            mechanism: r.mechanism,
            seed: r.seed,
            runtime_ms: elapsed.as_secs_f64() * 1e3,
        })
        .collect();
    let results: Vec<RunResult> = runs.into_iter().map(|(r, _)| r).collect();
    write(&dir.join(RESULTS_FILE), &to_json(&results))?;
    write(&dir.join(TIMINGS_FILE), &to_json(&timings))?;
    Ok(results)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    /// Sample standard deviation (n - 1 denominator), zero for one sample.
    pub std: f64,
}

impl Stat {
    pub fn of(values: &[f64]) -> Stat {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() < 2 {
            0.0
        } else {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        };
        Stat { mean, std }
    }

    /// `mean±std`, mean to two decimals and std to three.
    pub fn cell(&self) -> String {
        format!("{}±{}", round_str(self.mean, 2), round_str(self.std, 3))
    }
}

/// Rounds to `digits` decimals and prints the shortest form, keeping `.0`
/// on whole numbers.
pub fn round_str(x: f64, digits: i32) -> String {
    let scale = 10f64.powi(digits);
    let rounded = (x * scale).round() / scale;
    let rounded = if rounded == 0.0 { 0.0 } else { rounded };
    let text = rounded.to_string();
    if text.contains('.') {
        text
    } else {
        format!("{text}.0")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub alignment: Alignment,
    pub mechanism: MechanismKind,
    pub runs: usize,
    pub resource: Stat,
    pub seat: Stat,
    pub direct_envy: Stat,
    pub indirect_envy: Stat,
    pub total: Stat,
}

/// One row per (regime, mechanism), in order of first appearance.
pub fn aggregate(results: &[RunResult]) -> Result<Vec<AggregateRow>, SimError> {
    if results.is_empty() {
        return Err(SimError::EmptyResults);
    }
    let mut keys: Vec<(Alignment, MechanismKind)> = Vec::new();
    for r in results {
        if !keys.contains(&(r.alignment, r.mechanism)) {
            keys.push((r.alignment, r.mechanism));
        }
    }
    Ok(keys
        .into_iter()
        .map(|(alignment, mechanism)| {
            let group: Vec<&BlockingCounts> = results
                .iter()
                .filter(|r| r.alignment == alignment && r.mechanism == mechanism)
                .map(|r| &r.counts)
                .collect();
            let stat = |f: fn(&BlockingCounts) -> usize| {
                Stat::of(&group.iter().map(|c| f(c) as f64).collect::<Vec<_>>())
            };
            AggregateRow {
                alignment,
                mechanism,
                runs: group.len(),
                resource: stat(|c| c.resource),
                seat: stat(|c| c.seat),
                direct_envy: stat(|c| c.direct_envy),
                indirect_envy: stat(|c| c.indirect_envy),
                total: stat(|c| c.total),
            }
        })
        .collect())
}

pub const CSV_HEADER: &str = "alignment,mechanism,resource,seat,direct_envy,indirect_envy,total_mean,total_std";

pub fn table_csv(rows: &[AggregateRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            row.alignment,
            row.mechanism,
            row.resource.cell(),
            row.seat.cell(),
            row.direct_envy.cell(),
            row.indirect_envy.cell(),
            round_str(row.total.mean, 2),
            round_str(row.total.std, 3),
        );
    }
    out
}

pub fn table_text(rows: &[AggregateRow]) -> String {
    let header = ["Alignment", "Mechanism", "Resource", "Seat", "Direct-Envy", "Indirect-Envy", "Total"];
    let body: Vec<[String; 7]> = rows
        .iter()
        .map(|row| {
            [
                row.alignment.to_string(),
                row.mechanism.to_string(),
                row.resource.cell(),
                row.seat.cell(),
                row.direct_envy.cell(),
                row.indirect_envy.cell(),
                row.total.cell(),
            ]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for line in &body {
        for (w, cell) in widths.iter_mut().zip(line) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    let mut emit = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        let _ = writeln!(out, "{}", padded.join(" | ").trim_end());
    };
    emit(header.to_vec());
    for line in &body {
        emit(line.iter().map(String::as_str).collect());
    }
    out
}

/// Aggregates `results.json` in `dir` and writes `table.csv` and `table.txt`.
pub fn cmd_table(dir: &Path) -> Result<Vec<AggregateRow>, SimError> {
    let results: Vec<RunResult> = parse_json(&dir.join(RESULTS_FILE))?;
    let rows = aggregate(&results)?;
    write(&dir.join(TABLE_CSV_FILE), &table_csv(&rows))?;
    write(&dir.join(TABLE_TEXT_FILE), &table_text(&rows))?;
    Ok(rows)
}

/// Census report for a fixture name or a market file, followed by the
/// fixture's documented checks when `target` names one.
pub fn cmd_oracle(target: &str) -> Result<String, SimError> {
    let (market, fixture) = match fixtures::get(target) {
        Some(f) => (f.market.clone(), Some(f)),
        None => {
            let path = Path::new(target);
            if !path.is_file() {
                return Err(SimError::UnknownTarget(target.to_string()));
            }
            (Market::from_json(&read(path)?)?, None)
        }
    };
    let mut out = census(&market)?.to_text();
    if let Some(f) = fixture {
        let _ = writeln!(out, "\nfixture {}: {}", f.name, f.summary);
        for check in f.verify()? {
            let _ = writeln!(out, "{check}");
        }
    }
    Ok(out)
}

/// Lists bundled fixtures and, with `out_dir`, writes their market files.
pub fn cmd_fixtures(out_dir: Option<&Path>) -> Result<String, SimError> {
    let mut out = String::new();
    for f in fixtures::all() {
        let _ = writeln!(out, "{:<14} {}", f.name, f.summary);
        if let Some(dir) = out_dir {
            fs::create_dir_all(dir).map_err(|source| SimError::Io {
                path: dir.to_path_buf(),
                source,
            })?;
            write(&dir.join(format!("{}.json", f.name)), f.json())?;
        }
    }
    Ok(out)
}
