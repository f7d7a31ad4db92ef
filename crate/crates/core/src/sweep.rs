//! Monte Carlo feasibility sweeps over the user count.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{bound_report, BoundReport};
use crate::channel::{build_blocks, sample_instance, BuildingBlocks, ChannelFamily};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::solver::{solve, SolverConfig, Verdict};

pub const TRIALS_FILE: &str = "trials.jsonl";
pub const SUMMARY_JSON: &str = "summary.json";
pub const SUMMARY_CSV: &str = "summary.csv";
pub const SUMMARY_SVG: &str = "summary.svg";
pub const CSV_HEADER: &str = "family,Mt,Mr,T,L,K,trials,feasible_fraction";

const FAMILY_KEYS: &[&str] = &["mt", "mr", "t", "n", "l", "delays", "blocks"];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub family: ChannelFamily,
    pub k_min: usize,
    pub k_max: usize,
    pub trials: usize,
    pub solver: SolverConfig,
    pub out_dir: PathBuf,
    pub resume: bool,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
    /// Store per-trial wall time. Off by default so reruns produce
    /// byte-identical trial files.
    pub record_timing: bool,
}

impl SweepConfig {
    /// Parses the flat `key = value` format. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sweep = BTreeMap::new();
        let mut family_params = BTreeMap::new();
        for (no, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", no + 1)))?;
            let (key, value) = (key.trim().to_string(), value.trim().to_string());
            let lower = key.to_ascii_lowercase();
            let target = if FAMILY_KEYS.contains(&lower.as_str()) { &mut family_params } else { &mut sweep };
            if target.insert(lower, value).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key {key}", no + 1)));
            }
        }
        let take = |map: &mut BTreeMap<String, String>, key: &str| map.remove(key);
        let name = take(&mut sweep, "family").ok_or_else(|| Error::Config("missing key family".into()))?;
        let family = ChannelFamily::from_name_params(&name, &family_params)
            .map_err(|e| Error::Config(e.to_string()))?;

        fn num<T: std::str::FromStr>(map: &mut BTreeMap<String, String>, key: &str, default: Option<T>) -> Result<T> {
            match map.remove(key) {
                Some(raw) => raw.parse().map_err(|_| Error::Config(format!("{key}={raw} is not a valid number"))),
                None => default.ok_or_else(|| Error::Config(format!("missing key {key}"))),
            }
        }
        let defaults = SolverConfig::default();
        let k_min = num(&mut sweep, "k_min", None)?;
        let k_max = num(&mut sweep, "k_max", None)?;
        let trials = num(&mut sweep, "trials", None)?;
        let solver = SolverConfig {
            restarts: num(&mut sweep, "restarts", Some(defaults.restarts))?,
            max_iters: num(&mut sweep, "max_iters", Some(defaults.max_iters))?,
            tol_leakage: num(&mut sweep, "tol_leakage", Some(defaults.tol_leakage))?,
            tol_margin: num(&mut sweep, "tol_margin", Some(defaults.tol_margin))?,
            seed: num(&mut sweep, "seed", Some(0))?,
        };
        let out_dir = PathBuf::from(take(&mut sweep, "out_dir").ok_or_else(|| Error::Config("missing key out_dir".into()))?);
        let resume = num(&mut sweep, "resume", Some(false))?;
        let jobs = match take(&mut sweep, "jobs") {
            Some(raw) => Some(raw.parse().map_err(|_| Error::Config(format!("jobs={raw} is not a valid number")))?),
            None => None,
        };
        let record_timing = num(&mut sweep, "record_timing", Some(false))?;
        if let Some(key) = sweep.keys().next() {
            return Err(Error::Config(format!("unknown key {key}")));
        }
        let cfg = Self { family, k_min, k_max, trials, solver, out_dir, resume, jobs, record_timing };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.k_min == 0 || self.k_min > self.k_max {
            return Err(Error::Config(format!("need 1 <= K_min <= K_max, got {}..{}", self.k_min, self.k_max)));
        }
        if self.trials == 0 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be >= 1".into()));
        }
        self.family.validate().map_err(|e| Error::Config(e.to_string()))?;
        self.solver.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub family: String,
    #[serde(rename = "Mt")]
    pub mt: usize,
    #[serde(rename = "Mr")]
    pub mr: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "L")]
    pub l: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub trial_index: usize,
    pub seed: u64,
    pub verdict: Verdict,
    pub leakage: f64,
    pub margin: f64,
    pub iters: usize,
    pub restarts_used: usize,
    pub wall_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KSummary {
    #[serde(rename = "K")]
    pub k: usize,
    pub trials: usize,
    pub feasible: usize,
    pub feasible_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub family: String,
    pub family_spec: ChannelFamily,
    #[serde(rename = "Mt")]
    pub mt: usize,
    #[serde(rename = "Mr")]
    pub mr: usize,
    #[serde(rename = "T")]
    pub t: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub per_k: Vec<KSummary>,
    /// Largest K whose feasible fraction is at least one half.
    pub empirical_k_star: Option<usize>,
    pub bound_overlay: BoundReport,
    /// Bounds the empirical threshold exceeds. Reported, never clamped.
    pub bound_violations: Vec<String>,
}

/// Seed of trial `trial` at user count `k`.
pub fn trial_seed(master: u64, k: usize, trial: usize) -> u64 {
    derive_seed(master, &[k as u64, trial as u64])
}

/// One (instance, solve) pair. The instance and solver seeds are split from
/// the trial seed.
pub fn run_trial(blocks: &Arc<BuildingBlocks>, cfg: &SweepConfig, k: usize, trial: usize) -> Result<TrialRecord> {
    let seed = trial_seed(cfg.solver.seed, k, trial);
    let ch = sample_instance(blocks, k, derive_seed(seed, &[0]))?;
    let sol = solve(&ch, &cfg.solver.with_seed(derive_seed(seed, &[1])))?;
    let f = &cfg.family;
    Ok(TrialRecord {
        family: f.name().to_string(),
        mt: f.mt(),
        mr: f.mr(),
        t: f.t(),
        l: f.diversity(),
        k,
        trial_index: trial,
        seed,
        verdict: sol.report.verdict,
        leakage: sol.report.best_leakage,
        margin: sol.report.direct_margin,
        iters: sol.report.iters_used,
        restarts_used: sol.report.restart_index + 1,
        wall_ms: cfg.record_timing.then_some(sol.report.wall_ms),
    })
}

/// Reads the complete records of an existing trial file, dropping a
/// trailing partial line left by an interrupted run.
fn read_existing(path: &Path) -> Result<(Vec<TrialRecord>, u64)> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok((Vec::new(), 0)),
        Err(e) => return Err(e.into()),
    };
    let mut records = Vec::new();
    let mut valid_len = 0u64;
    let mut reader = BufReader::new(file);
    let mut line = String::new();
    loop {
        line.clear();
        let read = reader.read_line(&mut line)?;
        if read == 0 || !line.ends_with('\n') {
            break;
        }
        match serde_json::from_str::<TrialRecord>(line.trim_end()) {
            Ok(r) => records.push(r),
            Err(_) => break,
        }
        valid_len += read as u64;
    }
    Ok((records, valid_len))
}

fn summarize(cfg: &SweepConfig, records: &[TrialRecord]) -> Result<SweepSummary> {
    let f = &cfg.family;
    let per_k: Vec<KSummary> = (cfg.k_min..=cfg.k_max)
        .map(|k| {
            let of_k: Vec<&TrialRecord> = records.iter().filter(|r| r.k == k).collect();
            let feasible = of_k.iter().filter(|r| r.verdict == Verdict::Feasible).count();
            KSummary {
                k,
                trials: of_k.len(),
                feasible,
                feasible_fraction: if of_k.is_empty() { 0.0 } else { feasible as f64 / of_k.len() as f64 },
            }
        })
        .collect();
    let empirical_k_star = per_k.iter().filter(|s| s.feasible_fraction >= 0.5).map(|s| s.k).max();
    let bound_overlay = bound_report(f, None)?;
    let mut bound_violations = Vec::new();
    if let Some(ks) = empirical_k_star {
        for tag in bound_overlay.formula_tags.iter().filter(|e| e.tag.starts_with("upper")) {
            if ks as f64 > tag.value {
                bound_violations.push(format!("empirical K* = {ks} exceeds {} = {}", tag.tag, tag.value));
            }
        }
    }
    Ok(SweepSummary {
        family: f.name().to_string(),
        family_spec: f.clone(),
        mt: f.mt(),
        mr: f.mr(),
        t: f.t(),
        l: f.diversity(),
        per_k,
        empirical_k_star,
        bound_overlay,
        bound_violations,
    })
}

pub fn summary_csv(summary: &SweepSummary) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in &summary.per_k {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            summary.family, summary.mt, summary.mr, summary.t, summary.l, s.k, s.trials, s.feasible_fraction
        ));
    }
    out
}

/// Runs every missing `(K, trial)` pair, appends the records in
/// `(K, trial)` order, and writes the summary files.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepSummary> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let trials_path = cfg.out_dir.join(TRIALS_FILE);
    let blocks = Arc::new(build_blocks(&cfg.family).map_err(|e| Error::Config(e.to_string()))?);

    let mut records = Vec::new();
    let mut file = if cfg.resume {
        let (existing, valid_len) = read_existing(&trials_path)?;
        if let Some(r) = existing.iter().find(|r| r.family != cfg.family.name() || r.l != cfg.family.diversity()) {
            return Err(Error::Config(format!(
                "{} holds trials for {} with L = {}, not this configuration",
                trials_path.display(),
                r.family,
                r.l
            )));
        }
        records = existing;
        let file = OpenOptions::new().create(true).write(true).truncate(false).open(&trials_path)?;
        file.set_len(valid_len)?;
        let mut file = file;
        std::io::Seek::seek(&mut file, std::io::SeekFrom::End(0))?;
        file
    } else {
        File::create(&trials_path)?
    };
    let done: BTreeSet<(usize, usize)> = records.iter().map(|r| (r.k, r.trial_index)).collect();

    let pool = match cfg.jobs {
        Some(n) => Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?,
        ),
        None => None,
    };
    for k in cfg.k_min..=cfg.k_max {
        let todo: Vec<usize> = (0..cfg.trials).filter(|&t| !done.contains(&(k, t))).collect();
        if todo.is_empty() {
            continue;
        }
        let work = || todo.par_iter().map(|&t| run_trial(&blocks, cfg, k, t)).collect::<Result<Vec<_>>>();
        let batch = match &pool {
            Some(p) => p.install(work)?,
            None => work()?,
        };
        for r in &batch {
            writeln!(file, "{}", serde_json::to_string(r)?)?;
        }
        file.flush()?;
        records.extend(batch);
    }
    file.sync_all()?;

    records.sort_by_key(|r| (r.k, r.trial_index));
    let summary = summarize(cfg, &records)?;
    fs::write(cfg.out_dir.join(SUMMARY_JSON), serde_json::to_string_pretty(&summary)? + "\n")?;
    fs::write(cfg.out_dir.join(SUMMARY_CSV), summary_csv(&summary))?;
    crate::plot::plot_summary(&summary, &cfg.out_dir.join(SUMMARY_SVG))?;
    Ok(summary)
}
