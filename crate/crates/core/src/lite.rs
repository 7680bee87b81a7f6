//! Sequential acquisition with a two-class naive Bayes model.
//!
//! A few shuffled rows are labeled first. After that, each step sorts the
//! labeled rows by distance to heaven, splits them into `best` (the top
//! `n^best`) and `rest`, scores every unlabeled row by how its likelihood
//! under `best` compares to its likelihood under `rest`, drops the weakest
//! part of the pool, and labels the top candidate. The model is rebuilt from
//! scratch after every label.
//!
//! [`Lite`] is the loop as a state machine: it exposes the next row it wants
//! labeled and waits for [`Lite::submit`]. [`lite_run`] drives it with an
//! [`Oracle`]; the review service drives it with answers from a person.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::column::NumSummary;
use crate::config::Config;
use crate::data::{d2h_in_frame, Dataset};
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::value::Row;

/// Guards the uncertain score where the two likelihoods coincide.
const TIE_GUARD: f64 = 1e-32;

/// How an unlabeled row's best/rest log likelihoods become a desirability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Policy {
    /// Most likely best and least likely rest: `b / r`, as `B - R` in logs.
    Certain,
    /// Most controversial: `(b + r) / |b - r|`.
    Uncertain,
}

impl Policy {
    pub fn score(self, best: f64, rest: f64) -> f64 {
        match self {
            Policy::Certain => best - rest,
            Policy::Uncertain => {
                // Rescale so the larger likelihood is 1 before leaving log space.
                let top = best.max(rest);
                let b = libm::exp(best - top);
                let r = libm::exp(rest - top);
                (b + r) / (libm::fabs(b - r) + TIE_GUARD)
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Policy::Certain => "certain",
            Policy::Uncertain => "uncertain",
        }
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "certain" => Ok(Policy::Certain),
            "uncertain" => Ok(Policy::Uncertain),
            _ => Err(Error::Config("policy must be `certain` or `uncertain`")),
        }
    }
}

/// Model scores for one unlabeled row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Score {
    /// Log likelihood under the best class.
    pub best: f64,
    /// Log likelihood under the rest class.
    pub rest: f64,
    /// Policy desirability; larger is labeled sooner.
    pub value: f64,
}

/// Splits d2h-sorted labeled rows into the top `round(n^best)` and the rest.
/// Both halves are non-empty.
pub fn split_best_rest(labeled: &Dataset, config: &Config) -> Result<(Dataset, Dataset)> {
    let n = labeled.len();
    if n < 2 {
        return Err(Error::TooFewRows { needed: 2, found: n });
    }
    let cut = (libm::pow(n as f64, config.best) + 0.5) as usize;
    let cut = cut.clamp(1, n - 1);
    let rows = labeled.rows();
    Ok((
        labeled.clone_with(rows[..cut].iter().cloned(), false)?,
        labeled.clone_with(rows[cut..].iter().cloned(), false)?,
    ))
}

/// Scores one row against the two-class model built over `nall` labels.
pub fn score_row(best: &Dataset, rest: &Dataset, row: &Row, policy: Policy, nall: usize, config: &Config) -> Score {
    let b = best.loglike(row, nall, 2, config);
    let r = rest.loglike(row, nall, 2, config);
    Score {
        best: b,
        rest: r,
        value: policy.score(b, r),
    }
}

/// Sorts `pool` by descending policy score. Ties keep pool order.
pub fn rank_pool(
    best: &Dataset,
    rest: &Dataset,
    pool: Vec<Row>,
    policy: Policy,
    nall: usize,
    config: &Config,
) -> Vec<(Row, Score)> {
    let mut scored: Vec<(Row, Score)> = pool
        .into_iter()
        .map(|row| {
            let s = score_row(best, rest, &row, policy, nall, config);
            (row, s)
        })
        .collect();
    scored.sort_by(|a, b| b.1.value.total_cmp(&a.1.value));
    scored
}

/// Ranks the pool and keeps the top `floor(len * upper)` rows (at least one).
/// The first element is the next row to label.
pub fn acquire(
    best: &Dataset,
    rest: &Dataset,
    pool: Vec<Row>,
    policy: Policy,
    nall: usize,
    config: &Config,
) -> Vec<(Row, Score)> {
    let mut ranked = rank_pool(best, rest, pool, policy, nall, config);
    let keep = ((ranked.len() as f64 * config.upper) as usize).max(1);
    ranked.truncate(keep);
    ranked
}

/// The row the loop wants labeled next.
#[derive(Debug, Clone, PartialEq)]
pub struct Candidate {
    pub row: Row,
    /// `None` while the seed batch is being labeled.
    pub score: Option<Score>,
}

impl Candidate {
    pub fn is_seed(&self) -> bool {
        self.score.is_none()
    }
}

/// Outcome of a finished acquisition run.
#[derive(Debug, Clone)]
pub struct LiteResult {
    /// The labeled row closest to heaven.
    pub best: Row,
    /// Its distance to heaven, normalized over the labeled rows.
    pub best_d2h: f64,
    pub labels_used: usize,
    /// Final two-class model, reusable to score rows without labels.
    pub best_model: Dataset,
    pub rest_model: Dataset,
    /// Every labeled row, sorted by distance to heaven.
    pub labeled: Dataset,
    /// `(labels used, best d2h so far)` on the reporting scale.
    pub trajectory: Vec<(usize, f64)>,
}

/// The acquisition loop as a resumable state machine.
#[derive(Debug, Clone)]
pub struct Lite {
    config: Config,
    policy: Policy,
    budget: usize,
    template: Dataset,
    seeds: VecDeque<Row>,
    todo: Vec<Row>,
    labeled: Vec<Row>,
    done: Dataset,
    frame: Option<Vec<NumSummary>>,
    pending: Option<Candidate>,
    acquisitions: usize,
    trajectory: Vec<(usize, f64)>,
}

impl Lite {
    /// Shuffles the rows of `data` and queues the seed batch.
    ///
    /// `budget` is the total label count: `config.start` seed labels plus
    /// `budget - config.start` acquisitions. `frame` fixes the goal ranges
    /// used for the trajectory; without one, the ranges of the seed batch
    /// are used.
    pub fn new<R: Rng + ?Sized>(
        data: &Dataset,
        budget: usize,
        policy: Policy,
        config: Config,
        frame: Option<&[NumSummary]>,
        rng: &mut R,
    ) -> Result<Self> {
        config.validate()?;
        if budget < config.start + 1 {
            return Err(Error::Budget {
                budget,
                reason: "must exceed the seed batch size",
            });
        }
        if data.len() < config.start + 3 {
            return Err(Error::TooFewRows {
                needed: config.start + 3,
                found: data.len(),
            });
        }
        if data.header().y().is_empty() {
            return Err(Error::NoGoals);
        }
        let mut rows = data.rows().to_vec();
        rows.shuffle(rng);
        let todo = rows.split_off(config.start);
        let mut seeds: VecDeque<Row> = rows.into();
        let template = data.clone_with([], false)?;
        let first = seeds.pop_front().map(|row| Candidate { row, score: None });
        Ok(Lite {
            config: config.with_budget(budget),
            policy,
            budget,
            done: template.clone(),
            template,
            seeds,
            todo,
            labeled: Vec::new(),
            frame: frame.map(<[NumSummary]>::to_vec),
            pending: first,
            acquisitions: 0,
            trajectory: Vec::new(),
        })
    }

    pub fn candidate(&self) -> Option<&Candidate> {
        self.pending.as_ref()
    }

    pub fn is_finished(&self) -> bool {
        self.pending.is_none()
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn budget(&self) -> usize {
        self.budget
    }

    pub fn labels_used(&self) -> usize {
        self.labeled.len()
    }

    /// Labeled rows in the order they were labeled.
    pub fn history(&self) -> &[Row] {
        &self.labeled
    }

    /// Labeled rows sorted by distance to heaven.
    pub fn labeled(&self) -> &Dataset {
        &self.done
    }

    pub fn unlabeled(&self) -> usize {
        self.todo.len() + self.seeds.len()
    }

    pub fn trajectory(&self) -> &[(usize, f64)] {
        &self.trajectory
    }

    /// The current incumbent: the labeled row closest to heaven.
    pub fn incumbent(&self) -> Option<(&Row, f64)> {
        let row = self.done.rows().first()?;
        Some((row, self.done.d2h(row).ok()?))
    }

    /// Current best/rest model, once two rows are labeled.
    pub fn model(&self) -> Option<(Dataset, Dataset)> {
        split_best_rest(&self.done, &self.config).ok()
    }

    /// Stops the run; the pending candidate is dropped.
    pub fn close(&mut self) {
        self.pending = None;
    }

    /// Accepts the label for the pending candidate and moves on to the next
    /// one. `row` must carry the candidate's id and every goal value.
    pub fn submit(&mut self, row: Row) -> Result<()> {
        let expected = self.pending.as_ref().map(|c| c.row.id);
        if expected != Some(row.id) {
            return Err(Error::NotPending {
                expected,
                found: row.id,
            });
        }
        // Validates arity and goal presence before anything changes.
        self.template.clone_with([row.clone()], true)?;

        self.labeled.push(row);
        self.done = self.template.clone_with(self.labeled.iter().cloned(), true)?;
        if self.seeds.is_empty() && self.frame.is_none() {
            self.frame = Some(self.done.y().to_vec());
        }
        if let Some(frame) = &self.frame {
            let best = self
                .labeled
                .iter()
                .map(|r| d2h_in_frame(frame, r))
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .fold(f64::INFINITY, f64::min);
            self.trajectory.push((self.labeled.len(), best));
        }
        self.advance()
    }

    fn advance(&mut self) -> Result<()> {
        if let Some(row) = self.seeds.pop_front() {
            self.pending = Some(Candidate { row, score: None });
            return Ok(());
        }
        if self.acquisitions >= self.config.halt || self.todo.len() < 3 {
            self.pending = None;
            return Ok(());
        }
        let (best, rest) = split_best_rest(&self.done, &self.config)?;
        let pool = core::mem::take(&mut self.todo);
        let mut ranked = rank_pool(&best, &rest, pool, self.policy, self.done.len(), &self.config);
        // Prune the weakest rows, but never below what the remaining
        // acquisitions still need (the loop halts when fewer than 3 remain).
        let remaining = self.config.halt - self.acquisitions;
        let pruned = (ranked.len() as f64 * self.config.upper) as usize;
        let keep = pruned.max((remaining + 2).min(ranked.len()));
        ranked.truncate(keep);
        let mut ranked = ranked.into_iter();
        let (row, score) = ranked.next().expect("pool holds at least 3 rows");
        self.todo = ranked.map(|(r, _)| r).collect();
        self.acquisitions += 1;
        self.pending = Some(Candidate {
            row,
            score: Some(score),
        });
        Ok(())
    }

    /// Scores a row under the current model.
    pub fn score(&self, row: &Row) -> Option<Score> {
        let (best, rest) = self.model()?;
        Some(score_row(&best, &rest, row, self.policy, self.done.len(), &self.config))
    }

    pub fn result(&self) -> Result<LiteResult> {
        let (best_model, rest_model) = split_best_rest(&self.done, &self.config)?;
        let best = self.done.rows()[0].clone();
        Ok(LiteResult {
            best_d2h: self.done.d2h(&best)?,
            best,
            labels_used: self.labeled.len(),
            best_model,
            rest_model,
            labeled: self.done.clone(),
            trajectory: self.trajectory.clone(),
        })
    }
}

/// Runs the acquisition loop to completion against `oracle`.
///
/// An oracle failure aborts the run with [`Error::Aborted`], which carries
/// the labels used and the trajectory so far.
pub fn lite_run<O, R>(
    data: &Dataset,
    oracle: &mut O,
    budget: usize,
    policy: Policy,
    config: Config,
    rng: &mut R,
) -> Result<LiteResult>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    let frame = oracle.frame().map(<[NumSummary]>::to_vec);
    let mut lite = Lite::new(data, budget, policy, config, frame.as_deref(), rng)?;
    while let Some(candidate) = lite.candidate() {
        let row = match oracle.label(&candidate.row) {
            Ok(row) => row,
            Err(source) => {
                return Err(Error::Aborted {
                    source,
                    labels_used: lite.labels_used(),
                    trajectory: lite.trajectory.clone(),
                })
            }
        };
        lite.submit(row)?;
    }
    lite.result()
}
