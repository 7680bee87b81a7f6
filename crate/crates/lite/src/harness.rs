//! Seeded repeats of every treatment over every dataset.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use lite_core::{lite_run, random_n, sway_best, sway_run, CachedOracle, Config, Dataset, Oracle, Policy, Row};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::io::{self, LoadError};

/// Budget grid used when none is given.
pub const DEFAULT_BUDGETS: [usize; 8] = [10, 20, 30, 40, 50, 60, 70, 80];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Algorithm {
    Lite(Policy),
    Sway,
    Random,
    /// Every row, labeled. Measures the spread of the raw data.
    Baseline,
}

impl Algorithm {
    pub const ALL: [Algorithm; 5] = [
        Algorithm::Lite(Policy::Certain),
        Algorithm::Lite(Policy::Uncertain),
        Algorithm::Sway,
        Algorithm::Random,
        Algorithm::Baseline,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Lite(Policy::Certain) => "lite-certain",
            Algorithm::Lite(Policy::Uncertain) => "lite-uncertain",
            Algorithm::Sway => "sway",
            Algorithm::Random => "random",
            Algorithm::Baseline => "baseline",
        }
    }

    /// The `algorithm` column of a results file.
    pub fn family(self) -> &'static str {
        match self {
            Algorithm::Lite(_) => "lite",
            other => other.name(),
        }
    }

    /// The `policy` column of a results file; empty for non-lite runs.
    pub fn policy(self) -> Option<Policy> {
        match self {
            Algorithm::Lite(p) => Some(p),
            _ => None,
        }
    }

    /// Short name used in report rows such as `certain&30`.
    pub fn short(self) -> &'static str {
        match self {
            Algorithm::Lite(p) => p.name(),
            other => other.name(),
        }
    }

    /// Whether the algorithm takes a label budget.
    pub fn budgeted(self) -> bool {
        matches!(self, Algorithm::Lite(_) | Algorithm::Random)
    }

    pub fn from_columns(family: &str, policy: &str) -> Option<Self> {
        match (family, policy) {
            ("lite", p) => p.parse().ok().map(Algorithm::Lite),
            ("sway", "") => Some(Algorithm::Sway),
            ("random", "") => Some(Algorithm::Random),
            ("baseline", "") => Some(Algorithm::Baseline),
            _ => None,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown algorithm `{0}` (expected lite-certain, lite-uncertain, sway, random or baseline)")]
pub struct UnknownAlgorithm(String);

impl FromStr for Algorithm {
    type Err = UnknownAlgorithm;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| UnknownAlgorithm(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Status {
    Ok,
    Failed(String),
}

/// One row of a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub dataset: String,
    pub algorithm: Algorithm,
    /// `None` for algorithms that choose their own label count.
    pub budget: Option<usize>,
    /// Repeat index; for the baseline, the row index.
    pub repeat: usize,
    pub seed: u64,
    pub labels_used: usize,
    /// Distance to heaven of the returned row, normalized over the whole
    /// dataset. `None` when the run failed.
    pub best_d2h: Option<f64>,
    pub status: Status,
}

/// A record plus how long it took. Timings are kept out of the record so
/// results files compare byte for byte across reruns.
#[derive(Debug, Clone)]
pub struct Run {
    pub record: RunRecord,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct Plan {
    pub algorithms: Vec<Algorithm>,
    pub budgets: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    pub config: Config,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PlanError {
    #[error("repeats must be at least 1")]
    NoRepeats,
    #[error("budgeted algorithms need at least one budget")]
    NoBudgets,
    #[error("no algorithms selected")]
    NoAlgorithms,
    #[error(transparent)]
    Config(#[from] lite_core::Error),
}

impl Plan {
    pub fn validate(&self) -> Result<(), PlanError> {
        if self.algorithms.is_empty() {
            return Err(PlanError::NoAlgorithms);
        }
        if self.repeats == 0 {
            return Err(PlanError::NoRepeats);
        }
        if self.budgets.is_empty() && self.algorithms.iter().any(|a| a.budgeted()) {
            return Err(PlanError::NoBudgets);
        }
        self.config.validate()?;
        Ok(())
    }
}

/// Stable per-run seed: the first 8 bytes of a SHA-256 over the run's
/// coordinates.
pub fn run_seed(master: u64, dataset: &str, algorithm: Algorithm, budget: Option<usize>, repeat: usize) -> u64 {
    let budget = budget.map_or_else(String::new, |b| b.to_string());
    let key = format!("{master}\u{1f}{dataset}\u{1f}{algorithm}\u{1f}{budget}\u{1f}{repeat}");
    let digest = Sha256::digest(key.as_bytes());
    let mut head = [0u8; 8];
    head.copy_from_slice(&digest[..8]);
    u64::from_le_bytes(head)
}

/// Datasets that loaded, by name, and files that did not.
pub type Loaded = (Vec<(String, Dataset)>, Vec<(PathBuf, LoadError)>);

/// Loads every dataset. Files that fail to load are returned separately so
/// the caller can report and skip them.
pub fn load_datasets(paths: &[PathBuf]) -> Loaded {
    let mut good = Vec::new();
    let mut bad = Vec::new();
    for path in paths {
        match io::load(path) {
            Ok(d) => good.push((io::dataset_name(path), d)),
            Err(e) => bad.push((path.clone(), e)),
        }
    }
    (good, bad)
}

struct Job<'d> {
    name: &'d str,
    data: &'d Dataset,
    algorithm: Algorithm,
    budget: Option<usize>,
    repeat: usize,
}

/// Runs the plan. Output order is fixed by (dataset, algorithm, budget,
/// repeat) no matter how the runs are scheduled.
pub fn run_plan(plan: &Plan, datasets: &[(String, Dataset)]) -> Result<Vec<Run>, PlanError> {
    plan.validate()?;
    let mut jobs = Vec::new();
    for (name, data) in datasets {
        for &algorithm in &plan.algorithms {
            if algorithm == Algorithm::Baseline {
                jobs.push(Job {
                    name,
                    data,
                    algorithm,
                    budget: None,
                    repeat: 0,
                });
                continue;
            }
            let budgets: Vec<Option<usize>> = if algorithm.budgeted() {
                plan.budgets.iter().copied().map(Some).collect()
            } else {
                vec![None]
            };
            for budget in budgets {
                for repeat in 0..plan.repeats {
                    jobs.push(Job {
                        name,
                        data,
                        algorithm,
                        budget,
                        repeat,
                    });
                }
            }
        }
    }
    let runs = jobs
        .par_iter()
        .map(|job| run_job(plan, job))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    Ok(runs)
}

fn run_job(plan: &Plan, job: &Job<'_>) -> Vec<Run> {
    let seed = run_seed(plan.seed, job.name, job.algorithm, job.budget, job.repeat);
    if job.algorithm == Algorithm::Baseline {
        return baseline(job.name, job.data, seed);
    }
    let start = Instant::now();
    let (labels_used, outcome) = run_once(job.data, job.algorithm, job.budget, seed, plan.config);
    let (best_d2h, status) = match outcome {
        Ok(d) => (Some(d), Status::Ok),
        Err(e) => {
            log::warn!(
                "{} {} budget {:?} repeat {}: {e}",
                job.name,
                job.algorithm,
                job.budget,
                job.repeat
            );
            (None, Status::Failed(e))
        }
    };
    vec![Run {
        record: RunRecord {
            dataset: job.name.to_string(),
            algorithm: job.algorithm,
            budget: job.budget,
            repeat: job.repeat,
            seed,
            labels_used,
            best_d2h,
            status,
        },
        wall: start.elapsed(),
    }]
}

/// One seeded run against a fresh cached oracle. Returns the labels spent
/// and the global distance to heaven of the answer.
pub fn run_once(
    full: &Dataset,
    algorithm: Algorithm,
    budget: Option<usize>,
    seed: u64,
    config: Config,
) -> (usize, Result<f64, String>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut oracle = CachedOracle::new(full);
    let masked = full.masked();
    let mut rows = masked.rows().to_vec();
    rows.shuffle(&mut rng);
    let answer = masked.clone_with(rows, false).and_then(|pool| {
        let budget = budget.unwrap_or(0);
        let best: Row = match algorithm {
            Algorithm::Lite(policy) => lite_run(&pool, &mut oracle, budget, policy, config, &mut rng)?.best,
            Algorithm::Sway => {
                let result = sway_run(&pool, &mut oracle, &config, &mut rng)?;
                sway_best(&result, &mut oracle, &mut rng)?
            }
            Algorithm::Random => random_n(&pool, &mut oracle, budget, &mut rng)?.rows()[0].clone(),
            Algorithm::Baseline => unreachable!("baseline has no single answer"),
        };
        full.d2h(&best)
    });
    (oracle.label_count(), answer.map_err(|e| e.to_string()))
}

/// The baseline: every row's distance to heaven, each as its own record.
pub fn baseline(name: &str, full: &Dataset, seed: u64) -> Vec<Run> {
    full.rows()
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let start = Instant::now();
            let (best_d2h, status) = match full.d2h(row) {
                Ok(d) => (Some(d), Status::Ok),
                Err(e) => (None, Status::Failed(e.to_string())),
            };
            Run {
                record: RunRecord {
                    dataset: name.to_string(),
                    algorithm: Algorithm::Baseline,
                    budget: None,
                    repeat: i,
                    seed,
                    labels_used: full.len(),
                    best_d2h,
                    status,
                },
                wall: start.elapsed(),
            }
        })
        .collect()
}

/// Every `.csv` under each of `paths`.
pub fn expand_paths(paths: &[PathBuf]) -> std::io::Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        out.extend(io::csv_files(Path::new(p))?);
    }
    Ok(out)
}
