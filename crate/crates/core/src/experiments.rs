//! Seeded Monte Carlo harness and the counterexample families.
//!
//! Each trial is keyed by `(master seed, n, trial index)` alone, so the
//! summary does not depend on how trials are scheduled across threads.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error;

use crate::allocators::{theorem1_allocate, theorem2_allocate, AllocatorConfig, AllocatorError};
use crate::distributions::{DistributionError, DistributionSpec, UtilityModel, DEFAULT_BETA_FLOOR};
use crate::exact::{
    exists_proportional, exists_proportional_matching_case, MatchingCaseVerdict, SearchLimits,
    Verdict,
};
use crate::model::Instance;

/// Confidence level of every interval in an [`ExperimentSummary`].
pub const CONFIDENCE: f64 = 0.95;

pub const CSV_HEADER: &str =
    "n,m,trials,alloc_success,alloc_ci_lo,alloc_ci_hi,exists,exists_ci_lo,exists_ci_hi,oracle_skipped,seed";

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("invalid regime `{0}`: expected multiple:<k> | superlinear:square | superlinear:nlogn | superlinear:pow:<e> | custom:<m>")]
    Regime(String),
    #[error("trials must be at least 1")]
    NoTrials,
    #[error("n_values must be a nonempty list of positive agent counts")]
    AgentCounts,
    #[error("{family} needs {requirement}, got n={n}")]
    Family {
        family: &'static str,
        requirement: &'static str,
        n: usize,
    },
    #[error(transparent)]
    Distribution(#[from] DistributionError),
    #[error(transparent)]
    Allocator(#[from] AllocatorError),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// How the goods count `m` grows with the agent count `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Regime {
    /// `m = k * n`; runs the block-matching allocator.
    Multiple { k: usize },
    /// `m` from a superlinear rule; runs the superlinear allocator.
    Superlinear(Growth),
    /// Fixed `m` for every `n`.
    Custom { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Growth {
    /// `n^2`
    Square,
    /// `n * ceil(log2 n)`, at least `n`
    NLogN,
    /// `ceil(n^e)`, at least `n`
    Power(f64),
}

impl Regime {
    pub fn goods_for(&self, n: usize) -> usize {
        match *self {
            Regime::Multiple { k } => k * n,
            Regime::Superlinear(Growth::Square) => n * n,
            Regime::Superlinear(Growth::NLogN) => {
                let log = (n as f64).log2().ceil() as usize;
                n * log.max(1)
            }
            Regime::Superlinear(Growth::Power(e)) => ((n as f64).powf(e).ceil() as usize).max(n),
            Regime::Custom { m } => m,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Regime::Multiple { k } => write!(f, "multiple:{k}"),
            Regime::Superlinear(Growth::Square) => write!(f, "superlinear:square"),
            Regime::Superlinear(Growth::NLogN) => write!(f, "superlinear:nlogn"),
            Regime::Superlinear(Growth::Power(e)) => write!(f, "superlinear:pow:{e}"),
            Regime::Custom { m } => write!(f, "custom:{m}"),
        }
    }
}

impl FromStr for Regime {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ExperimentError::Regime(s.to_string());
        let (kind, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        match kind {
            "multiple" => match rest.parse::<usize>() {
                Ok(k) if k >= 1 => Ok(Regime::Multiple { k }),
                _ => Err(bad()),
            },
            "superlinear" => match rest {
                "square" => Ok(Regime::Superlinear(Growth::Square)),
                "nlogn" => Ok(Regime::Superlinear(Growth::NLogN)),
                _ => {
                    let e = rest
                        .strip_prefix("pow:")
                        .and_then(|e| e.parse::<f64>().ok())
                        .filter(|e| *e > 1.0 && e.is_finite())
                        .ok_or_else(bad)?;
                    Ok(Regime::Superlinear(Growth::Power(e)))
                }
            },
            "custom" => rest.parse().map(|m| Regime::Custom { m }).map_err(|_| bad()),
            _ => Err(bad()),
        }
    }
}

impl Serialize for Regime {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Regime {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        String::deserialize(d)?
            .parse()
            .map_err(serde::de::Error::custom)
    }
}

fn default_beta_floor() -> f64 {
    DEFAULT_BETA_FLOOR
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub regime: Regime,
    /// `dist` in JSON config files, matching the CLI flag.
    #[serde(rename = "dist")]
    pub source: UtilityModel,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub oracle_check: bool,
    #[serde(default = "default_beta_floor")]
    pub beta_floor: f64,
    /// Overrides the margin search when present.
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub limits: SearchLimits,
    /// Worker threads; `None` uses the available parallelism.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(regime: Regime, source: impl Into<UtilityModel>, n_values: Vec<usize>, trials: usize, seed: u64) -> Self {
        ExperimentConfig {
            regime,
            source: source.into(),
            n_values,
            trials,
            seed,
            oracle_check: false,
            beta_floor: DEFAULT_BETA_FLOOR,
            delta: None,
            limits: SearchLimits::default(),
            threads: None,
        }
    }

    pub fn validate(&self) -> Result<(), ExperimentError> {
        if self.trials == 0 {
            return Err(ExperimentError::NoTrials);
        }
        if self.n_values.is_empty() || self.n_values.contains(&0) {
            return Err(ExperimentError::AgentCounts);
        }
        Ok(())
    }

    pub fn allocator_config(&self) -> Result<AllocatorConfig, ExperimentError> {
        let margin = match self.delta {
            Some(delta) => self.source.margin_with_delta(delta)?,
            None => self.source.margin_for(self.beta_floor)?,
        };
        Ok(AllocatorConfig::new(margin)?)
    }
}

/// Outcome of one seeded trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialReport {
    pub n: usize,
    pub m: usize,
    pub trial: usize,
    pub seed: u64,
    pub alloc_success: bool,
    /// Oracle verdict; `None` when not requested or not decidable within limits.
    pub exists: Option<bool>,
    pub runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub n: usize,
    pub m: usize,
    pub trials: usize,
    pub alloc_successes: usize,
    pub alloc_success: f64,
    pub alloc_ci_lo: f64,
    pub alloc_ci_hi: f64,
    /// Trials that produced an oracle verdict.
    pub oracle_trials: usize,
    pub exists_count: usize,
    pub exists: Option<f64>,
    pub exists_ci_lo: Option<f64>,
    pub exists_ci_hi: Option<f64>,
    pub oracle_skipped: bool,
    pub seed: u64,
    pub mean_runtime_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub regime: Regime,
    pub dist: UtilityModel,
    pub seed: u64,
    pub rows: Vec<SummaryRow>,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

impl ExperimentSummary {
    /// Plot-ready CSV with the fixed column set in [`CSV_HEADER`].
    pub fn to_csv(&self) -> String {
        let mut out = String::from(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{:.6},{:.6},{:.6},{},{},{},{},{}",
                r.n,
                r.m,
                r.trials,
                r.alloc_success,
                r.alloc_ci_lo,
                r.alloc_ci_hi,
                fmt_opt(r.exists),
                fmt_opt(r.exists_ci_lo),
                fmt_opt(r.exists_ci_hi),
                r.oracle_skipped,
                r.seed
            )
            .expect("writing to a String");
        }
        out
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stable per-trial seed from `(master, n, trial)`.
pub fn trial_seed(master: u64, n: usize, trial: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ n as u64) ^ trial as u64)
}

/// Wilson score interval for `successes` out of `trials` at `confidence`.
///
/// Panics unless `1 <= trials`, `successes <= trials` and `confidence` is in `(0, 1)`.
pub fn wilson_interval(successes: usize, trials: usize, confidence: f64) -> (f64, f64) {
    assert!(trials >= 1 && successes <= trials, "need successes <= trials, trials >= 1");
    assert!(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
    let z = Normal::standard().inverse_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0) };
    (lo.min(p), hi.max(p))
}

/// `n x (2n - 1)` instance with i.i.d. uniform(0.4, 0.6) utilities.
///
/// Every share then exceeds 0.6 for `n >= 3`, so each agent needs two goods
/// and no proportional allocation exists.
pub fn remark1_instance(n: usize, seed: u64) -> Result<Instance, ExperimentError> {
    if n < 3 {
        return Err(ExperimentError::Family {
            family: "remark1",
            requirement: "n >= 3",
            n,
        });
    }
    let spec = DistributionSpec::uniform(0.4, 0.6)?;
    Ok(UtilityModel::Iid(spec).sample(n, 2 * n - 1, seed))
}

/// The split-support source: low goods from uniform(0, 0.1), high goods
/// from uniform(0.9, 1).
pub fn remark2_source() -> UtilityModel {
    UtilityModel::Split {
        first: DistributionSpec::Uniform { lo: 0.0, hi: 0.1 },
        second: DistributionSpec::Uniform { lo: 0.9, hi: 1.0 },
    }
}

/// `n x n` instance whose first `n/2` goods are low-valued and the rest high-valued.
pub fn remark2_instance(n: usize, seed: u64) -> Result<Instance, ExperimentError> {
    if n < 2 || !n.is_multiple_of(2) {
        return Err(ExperimentError::Family {
            family: "remark2",
            requirement: "an even n >= 2",
            n,
        });
    }
    Ok(remark2_source().sample(n, n, seed))
}

fn oracle_verdict(inst: &Instance, limits: &SearchLimits) -> Option<bool> {
    match exists_proportional_matching_case(inst) {
        MatchingCaseVerdict::Yes { .. } => return Some(true),
        MatchingCaseVerdict::No => return Some(false),
        MatchingCaseVerdict::NotApplicable => {}
    }
    if !limits.admits(inst.agents(), inst.goods()) {
        return None;
    }
    match exists_proportional(inst, limits) {
        Ok(Verdict::Yes { .. }) => Some(true),
        Ok(Verdict::No) => Some(false),
        Ok(Verdict::BudgetExceeded) | Err(_) => None,
    }
}

fn allocate(regime: &Regime, inst: &Instance, cfg: &AllocatorConfig) -> bool {
    let (n, m) = (inst.agents(), inst.goods());
    let outcome = match regime {
        Regime::Multiple { .. } => theorem1_allocate(inst, cfg),
        Regime::Superlinear(_) => theorem2_allocate(inst, cfg),
        Regime::Custom { .. } if n == 1 || (m > 0 && m % n == 0) => theorem1_allocate(inst, cfg),
        Regime::Custom { .. } => theorem2_allocate(inst, cfg),
    };
    match outcome {
        Ok(out) => {
            debug_assert!(
                !out.is_success()
                    || out
                        .allocation
                        .as_ref()
                        .is_some_and(|a| inst.is_proportional(a) == Ok(true))
            );
            out.is_success()
        }
        Err(_) => false,
    }
}

/// Runs a single trial.
pub fn run_trial(
    cfg: &ExperimentConfig,
    alloc_cfg: &AllocatorConfig,
    n: usize,
    trial: usize,
) -> TrialReport {
    let m = cfg.regime.goods_for(n);
    let seed = trial_seed(cfg.seed, n, trial);
    let start = Instant::now();
    let inst = cfg.source.sample(n, m, seed);
    let alloc_success = allocate(&cfg.regime, &inst, alloc_cfg);
    let exists = if cfg.oracle_check {
        oracle_verdict(&inst, &cfg.limits)
    } else {
        None
    };
    TrialReport {
        n,
        m,
        trial,
        seed,
        alloc_success,
        exists,
        runtime_secs: start.elapsed().as_secs_f64(),
    }
}

/// Runs every `(n, trial)` pair and aggregates one row per `n`, sorted by `(n, m)`.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentSummary, ExperimentError> {
    cfg.validate()?;
    let alloc_cfg = cfg.allocator_config()?;
    let mut ns = cfg.n_values.clone();
    ns.sort_unstable();
    ns.dedup();
    let work: Vec<(usize, usize)> = ns
        .iter()
        .flat_map(|&n| (0..cfg.trials).map(move |t| (n, t)))
        .collect();

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(threads) = cfg.threads {
        builder = builder.num_threads(threads.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| ExperimentError::ThreadPool(e.to_string()))?;
    let reports: Vec<TrialReport> = pool.install(|| {
        work.par_iter()
            .map(|&(n, t)| run_trial(cfg, &alloc_cfg, n, t))
            .collect()
    });

    let mut rows: Vec<SummaryRow> = ns
        .iter()
        .map(|&n| summarize(cfg, n, reports.iter().filter(|r| r.n == n)))
        .collect();
    rows.sort_by_key(|r| (r.n, r.m));
    Ok(ExperimentSummary {
        regime: cfg.regime,
        dist: cfg.source.clone(),
        seed: cfg.seed,
        rows,
    })
}

fn summarize<'a>(
    cfg: &ExperimentConfig,
    n: usize,
    reports: impl Iterator<Item = &'a TrialReport>,
) -> SummaryRow {
    let (mut trials, mut successes, mut oracle_trials, mut exists_count) = (0, 0, 0, 0);
    let mut runtime = 0.0;
    for r in reports {
        trials += 1;
        successes += usize::from(r.alloc_success);
        runtime += r.runtime_secs;
        if let Some(e) = r.exists {
            oracle_trials += 1;
            exists_count += usize::from(e);
        }
    }
    let (alloc_ci_lo, alloc_ci_hi) = wilson_interval(successes, trials, CONFIDENCE);
    let exists_ci = (oracle_trials > 0).then(|| wilson_interval(exists_count, oracle_trials, CONFIDENCE));
    SummaryRow {
        n,
        m: cfg.regime.goods_for(n),
        trials,
        alloc_successes: successes,
        alloc_success: successes as f64 / trials as f64,
        alloc_ci_lo,
        alloc_ci_hi,
        oracle_trials,
        exists_count,
        exists: (oracle_trials > 0).then(|| exists_count as f64 / oracle_trials as f64),
        exists_ci_lo: exists_ci.map(|c| c.0),
        exists_ci_hi: exists_ci.map(|c| c.1),
        oracle_skipped: cfg.oracle_check && oracle_trials < trials,
        seed: cfg.seed,
        mean_runtime_secs: runtime / trials as f64,
    }
}
