//! The labeling boundary.
//!
//! Every goal value an algorithm sees passes through an [`Oracle`]. Labels
//! are keyed on row id, so asking twice about the same row costs one label.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::column::NumSummary;
use crate::data::Dataset;
use crate::error::OracleError;
use crate::value::{Cell, Row};

pub trait Oracle {
    /// Returns `row` with its goal cells filled in.
    fn label(&mut self, row: &Row) -> Result<Row, OracleError>;

    /// Distinct rows labeled so far.
    fn label_count(&self) -> usize;

    /// Goal summaries over the full example space, when the oracle knows
    /// them. Used only to report progress on a fixed scale.
    fn frame(&self) -> Option<&[NumSummary]> {
        None
    }
}

impl<O: Oracle + ?Sized> Oracle for &mut O {
    fn label(&mut self, row: &Row) -> Result<Row, OracleError> {
        (**self).label(row)
    }

    fn label_count(&self) -> usize {
        (**self).label_count()
    }

    fn frame(&self) -> Option<&[NumSummary]> {
        (**self).frame()
    }
}

/// Simulated oracle that reads goals from a fully labeled dataset.
#[derive(Debug, Clone)]
pub struct CachedOracle {
    goal_pos: Vec<usize>,
    goals: BTreeMap<usize, Vec<Cell>>,
    frame: Vec<NumSummary>,
    labeled: BTreeSet<usize>,
}

impl CachedOracle {
    pub fn new(full: &Dataset) -> Self {
        let goal_pos = full.header().y().to_vec();
        let goals = full
            .rows()
            .iter()
            .map(|r| (r.id, goal_pos.iter().map(|&p| r.cells[p].clone()).collect()))
            .collect();
        CachedOracle {
            goal_pos,
            goals,
            frame: full.y().to_vec(),
            labeled: BTreeSet::new(),
        }
    }

    pub fn is_labeled(&self, id: usize) -> bool {
        self.labeled.contains(&id)
    }
}

impl Oracle for CachedOracle {
    fn label(&mut self, row: &Row) -> Result<Row, OracleError> {
        let goals = self.goals.get(&row.id).ok_or(OracleError::UnknownRow(row.id))?;
        let mut out = row.clone();
        for (&p, v) in self.goal_pos.iter().zip(goals) {
            out.cells[p] = v.clone();
        }
        self.labeled.insert(row.id);
        Ok(out)
    }

    fn label_count(&self) -> usize {
        self.labeled.len()
    }

    fn frame(&self) -> Option<&[NumSummary]> {
        Some(&self.frame)
    }
}
