//! Recursive bi-clustering over independent attributes.
//!
//! Each level finds two distant rows with the FastMap heuristic, labels just
//! those two, projects every row onto the line between them, and keeps the
//! half nearer the better endpoint. The better endpoint is reused at the next
//! level, so deeper levels cost at most one new label.

use alloc::vec::Vec;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::config::Config;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::value::Row;

/// Endpoints closer than this are treated as the same point.
const TINY_SPAN: f64 = 1e-12;

/// Outcome of [`sway_run`].
#[derive(Debug, Clone)]
pub struct SwayResult {
    /// Rows of the surviving leaf.
    pub best_leaf: Vec<Row>,
    /// Rows pruned along the way.
    pub rest: Vec<Row>,
    pub labels_used: usize,
    /// The better endpoint of the last split, labeled.
    pub last_best: Option<Row>,
    /// Number of halvings performed.
    pub depth: usize,
}

/// Oracle wrapper that remembers labeled rows so endpoint comparisons share
/// one normalization.
struct Judge<'o, O: ?Sized> {
    oracle: &'o mut O,
    labeled: Dataset,
}

impl<'o, O: Oracle + ?Sized> Judge<'o, O> {
    fn new(data: &Dataset, oracle: &'o mut O) -> Result<Self> {
        Ok(Judge {
            oracle,
            labeled: data.clone_with([], false)?,
        })
    }

    fn label(&mut self, row: &Row) -> Result<Row> {
        if let Some(done) = self.labeled.rows().iter().find(|r| r.id == row.id) {
            return Ok(done.clone());
        }
        let out = self.oracle.label(row)?;
        self.labeled.add(out.clone())?;
        Ok(out)
    }

    fn d2h(&self, row: &Row) -> Result<f64> {
        self.labeled.d2h(row)
    }
}

/// `rows` sorted by ascending distance to `row`. Stable.
pub fn near(data: &Dataset, row: &Row, rows: &[Row]) -> Result<Vec<Row>> {
    let mut keyed = rows
        .iter()
        .map(|r| Ok((data.dist(row, r)?, r)))
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(keyed.into_iter().map(|(_, r)| r.clone()).collect())
}

fn far_index(len: usize, config: &Config) -> usize {
    ((len as f64 * config.far) as usize).min(len - 1)
}

fn faraway_in<O, R>(
    data: &Dataset,
    rows: &[Row],
    sortp: bool,
    last: Option<&Row>,
    judge: &mut Judge<'_, O>,
    config: &Config,
    rng: &mut R,
) -> Result<(Row, Row)>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    if rows.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: rows.len(),
        });
    }
    let n = far_index(rows.len(), config);
    let mut left = match last {
        Some(l) => l.clone(),
        None => {
            let anchor = rows.choose(rng).expect("rows is non-empty");
            near(data, anchor, rows)?.swap_remove(n)
        }
    };
    let mut right = near(data, &left, rows)?.swap_remove(n);
    if sortp {
        left = judge.label(&left)?;
        right = judge.label(&right)?;
        if judge.d2h(&right)? < judge.d2h(&left)? {
            core::mem::swap(&mut left, &mut right);
        }
    }
    Ok((left, right))
}

/// Picks two distant rows: `left` is `last` when given, otherwise the row at
/// the `far` percentile of distances from a random anchor; `right` is the row
/// at that percentile of distances from `left`. With `sortp`, both are
/// labeled and ordered so `left` is the one closer to heaven.
pub fn faraway<O, R>(
    data: &Dataset,
    rows: &[Row],
    sortp: bool,
    last: Option<&Row>,
    oracle: &mut O,
    config: &Config,
    rng: &mut R,
) -> Result<(Row, Row)>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    let mut judge = Judge::new(data, oracle)?;
    faraway_in(data, rows, sortp, last, &mut judge, config, rng)
}

fn sample<R: Rng + ?Sized>(rows: &[Row], k: usize, rng: &mut R) -> Vec<Row> {
    if rows.len() <= k {
        let mut out = rows.to_vec();
        out.shuffle(rng);
        out
    } else {
        (0..k).map(|_| rows.choose(rng).expect("non-empty").clone()).collect()
    }
}

fn half_in<O, R>(
    data: &Dataset,
    rows: &[Row],
    sortp: bool,
    last: Option<&Row>,
    judge: &mut Judge<'_, O>,
    config: &Config,
    rng: &mut R,
) -> Result<(Vec<Row>, Vec<Row>, Row)>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    let some = sample(rows, config.half.min(rows.len()), rng);
    let (left, right) = faraway_in(data, &some, sortp, last, judge, config, rng)?;
    let c = data.dist(&left, &right)?;
    let mid = rows.len().div_ceil(2);
    let ordered: Vec<Row> = if c < TINY_SPAN {
        rows.to_vec()
    } else {
        let mut keyed = rows
            .iter()
            .map(|r| {
                let a = data.dist(r, &left)?;
                let b = data.dist(r, &right)?;
                Ok(((a * a + c * c - b * b) / (2.0 * c), r))
            })
            .collect::<Result<Vec<_>>>()?;
        keyed.sort_by(|x, y| x.0.total_cmp(&y.0));
        keyed.into_iter().map(|(_, r)| r.clone()).collect()
    };
    let mut lefts = ordered;
    let rights = lefts.split_off(mid);
    Ok((lefts, rights, left))
}

/// Splits `rows` at the median of their projection onto the line between
/// two distant endpoints. Returns the near half, the far half, and the
/// `left` endpoint.
pub fn half<O, R>(
    data: &Dataset,
    rows: &[Row],
    sortp: bool,
    last: Option<&Row>,
    oracle: &mut O,
    config: &Config,
    rng: &mut R,
) -> Result<(Vec<Row>, Vec<Row>, Row)>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    if rows.len() < 2 {
        return Err(Error::TooFewRows {
            needed: 2,
            found: rows.len(),
        });
    }
    let mut judge = Judge::new(data, oracle)?;
    half_in(data, rows, sortp, last, &mut judge, config, rng)
}

/// Halves the rows of `data` toward the better endpoint until at most
/// `2 * N^stop` rows remain.
pub fn sway_run<O, R>(data: &Dataset, oracle: &mut O, config: &Config, rng: &mut R) -> Result<SwayResult>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    config.validate()?;
    if data.len() < 4 {
        return Err(Error::TooFewRows {
            needed: 4,
            found: data.len(),
        });
    }
    let before = oracle.label_count();
    let stop = 2.0 * libm::pow(data.len() as f64, config.stop);
    let mut judge = Judge::new(data, oracle)?;
    let mut rows = data.rows().to_vec();
    let mut rest = Vec::new();
    let mut last: Option<Row> = None;
    let mut depth = 0;
    while rows.len() as f64 > stop && rows.len() >= 2 {
        let (lefts, rights, left) = half_in(data, &rows, true, last.as_ref(), &mut judge, config, rng)?;
        rest.extend(rights);
        rows = lefts;
        last = Some(left);
        depth += 1;
    }
    Ok(SwayResult {
        best_leaf: rows,
        rest,
        labels_used: judge.oracle.label_count() - before,
        last_best: last,
        depth,
    })
}

/// The row a sway run recommends. A run that never split labels one random
/// leaf row so the answer is always labeled.
pub fn sway_best<O, R>(result: &SwayResult, oracle: &mut O, rng: &mut R) -> Result<Row>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    match &result.last_best {
        Some(row) => Ok(row.clone()),
        None => {
            let row = result
                .best_leaf
                .choose(rng)
                .ok_or(Error::TooFewRows { needed: 1, found: 0 })?;
            Ok(oracle.label(row)?)
        }
    }
}
