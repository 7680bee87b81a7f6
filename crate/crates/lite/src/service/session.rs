//! One labeling session: a [`Lite`] stepper, the dataset it reads from, and
//! the events that rebuild it.

use std::sync::Arc;

use lite_core::lite::{score_row, split_best_rest, Score};
use lite_core::{Cell, Column, Config, Dataset, Header, Lite, NumSummary, Policy, Row};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

/// A journal line. Replaying a session's events in order rebuilds it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", rename_all = "snake_case")]
pub enum Event {
    Created {
        session_id: String,
        dataset: String,
        policy: String,
        budget: usize,
        seed: u64,
    },
    Labeled {
        row_id: usize,
        goals: Vec<f64>,
    },
    Closed,
}

#[derive(Debug, thiserror::Error)]
pub enum SessionError {
    #[error("no candidate is pending; the session is finished")]
    Finished,
    #[error("row {found} is not the pending candidate (pending: {pending})")]
    Stale { pending: usize, found: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Goal summaries over the whole dataset when every goal is known. Used to
/// report progress on a fixed scale.
fn full_frame(data: &Dataset) -> Option<&[NumSummary]> {
    data.y().iter().all(|y| y.n == data.len()).then_some(data.y())
}

pub struct Session {
    pub id: String,
    pub dataset: String,
    pub policy: Policy,
    pub budget: usize,
    pub seed: u64,
    data: Arc<Dataset>,
    lite: Lite,
    closed: bool,
}

impl Session {
    /// Starts a session. Goal cells are hidden from the stepper, so answers
    /// can only arrive through [`Session::label`].
    pub fn start(
        id: String,
        dataset: String,
        data: Arc<Dataset>,
        policy: Policy,
        budget: usize,
        seed: u64,
    ) -> lite_core::Result<Self> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let lite = Lite::new(
            &data.masked(),
            budget,
            policy,
            Config::default(),
            full_frame(&data),
            &mut rng,
        )?;
        Ok(Session {
            id,
            dataset,
            policy,
            budget,
            seed,
            data,
            lite,
            closed: false,
        })
    }

    pub fn created_event(&self) -> Event {
        Event::Created {
            session_id: self.id.clone(),
            dataset: self.dataset.clone(),
            policy: self.policy.name().to_string(),
            budget: self.budget,
            seed: self.seed,
        }
    }

    pub fn is_finished(&self) -> bool {
        self.closed || self.lite.is_finished()
    }

    pub fn state(&self) -> &'static str {
        if self.is_finished() {
            "finished"
        } else {
            "awaiting-label"
        }
    }

    pub fn data(&self) -> &Dataset {
        &self.data
    }

    pub fn labels_used(&self) -> usize {
        self.lite.labels_used()
    }

    /// Records goal values for the pending candidate.
    pub fn label(&mut self, row_id: usize, goals: &[f64]) -> Result<(), SessionError> {
        let pending = match self.lite.candidate() {
            Some(c) if !self.closed => c.row.clone(),
            _ => return Err(SessionError::Finished),
        };
        if pending.id != row_id {
            return Err(SessionError::Stale {
                pending: pending.id,
                found: row_id,
            });
        }
        let goal_pos = self.data.header().y();
        if goals.len() != goal_pos.len() {
            return Err(SessionError::Invalid(format!(
                "expected {} goal values, got {}",
                goal_pos.len(),
                goals.len()
            )));
        }
        if let Some(bad) = goals.iter().find(|g| !g.is_finite()) {
            return Err(SessionError::Invalid(format!("goal value {bad} is not finite")));
        }
        let mut row = pending;
        for (&p, &v) in goal_pos.iter().zip(goals) {
            row.cells[p] = Cell::Num(v);
        }
        self.lite.submit(row).map_err(|e| SessionError::Invalid(e.to_string()))
    }

    /// The dataset's own goal values for the pending candidate, for
    /// simulated sessions.
    pub fn true_goals(&self) -> Option<(usize, Vec<f64>)> {
        let id = self.lite.candidate()?.row.id;
        let row = self.data.rows().iter().find(|r| r.id == id)?;
        let goals = self
            .data
            .header()
            .y()
            .iter()
            .map(|&p| row.cells[p].as_num())
            .collect::<Option<Vec<f64>>>()?;
        Some((id, goals))
    }

    pub fn close(&mut self) {
        self.closed = true;
        self.lite.close();
    }

    pub fn apply(&mut self, event: &Event) -> Result<(), SessionError> {
        match event {
            Event::Created { .. } => Ok(()),
            Event::Labeled { row_id, goals } => self.label(*row_id, goals),
            Event::Closed => {
                self.close();
                Ok(())
            }
        }
    }

    fn columns(&self) -> Value {
        columns_json(self.data.header())
    }

    pub fn candidate(&self) -> Option<Value> {
        if self.closed {
            return None;
        }
        let c = self.lite.candidate()?;
        let header = self.data.header();
        let x: Vec<Value> = header
            .x()
            .iter()
            .map(|&p| json!({ "name": header.column(p).name, "value": cell_json(&c.row.cells[p]) }))
            .collect();
        Some(json!({
            "row_id": c.row.id,
            "seed": c.is_seed(),
            "x": x,
            "scores": c.score.map(score_json),
            "labels_used": self.lite.labels_used(),
            "budget": self.budget,
            "remaining": self.budget.saturating_sub(self.lite.labels_used()),
        }))
    }

    fn incumbent(&self) -> Value {
        self.lite.incumbent().map_or(
            Value::Null,
            |(row, d2h)| json!({ "row_id": row.id, "cells": cells_json(row), "d2h": d2h }),
        )
    }

    fn trajectory(&self) -> Value {
        let points: Vec<Value> = self
            .lite
            .trajectory()
            .iter()
            .map(|&(labels, d2h)| json!({ "labels": labels, "d2h": d2h }))
            .collect();
        Value::Array(points)
    }

    /// State for create, label and status responses.
    pub fn summary(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "session_id": self.id,
            "dataset": self.dataset,
            "algorithm": "lite",
            "policy": self.policy.name(),
            "budget": self.budget,
            "seed": self.seed,
            "state": self.state(),
            "labels_used": self.lite.labels_used(),
            "columns": self.columns(),
            "candidate": self.candidate(),
            "incumbent": self.incumbent(),
            "trajectory": self.trajectory(),
        })
    }

    /// Model, labeled history, incumbent and trajectory.
    pub fn report(&self) -> Value {
        let done = self.lite.labeled();
        let history: Vec<Value> = self
            .lite
            .history()
            .iter()
            .map(|r| json!({ "row_id": r.id, "cells": cells_json(r), "d2h": done.d2h(r).ok() }))
            .collect();
        let model = self.lite.model().map_or(
            Value::Null,
            |(best, rest)| json!({ "best": model_json(&best), "rest": model_json(&rest) }),
        );
        json!({
            "schema_version": SCHEMA_VERSION,
            "session_id": self.id,
            "dataset": self.dataset,
            "policy": self.policy.name(),
            "state": self.state(),
            "budget": self.budget,
            "labels_used": self.lite.labels_used(),
            "columns": self.columns(),
            "model": model,
            "history": history,
            "incumbent": self.incumbent(),
            "trajectory": self.trajectory(),
        })
    }

    /// The frozen model of a finished session, once it has one.
    pub fn snapshot(&self) -> Option<Snapshot> {
        if !self.is_finished() || self.lite.labels_used() < 2 {
            return None;
        }
        Some(Snapshot {
            schema_version: SCHEMA_VERSION,
            session_id: self.id.clone(),
            dataset: self.dataset.clone(),
            policy: self.policy.name().to_string(),
            columns: self.data.header().names().map(str::to_string).collect(),
            rows: self
                .lite
                .history()
                .iter()
                .map(|r| SnapshotRow {
                    id: r.id,
                    cells: r.cells.iter().map(cell_json).collect(),
                })
                .collect(),
        })
    }
}

/// Labeled rows of a finished session, in labeling order. Enough to rebuild
/// the two-class model and score rows that have no labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub schema_version: u32,
    pub session_id: String,
    pub dataset: String,
    pub policy: String,
    pub columns: Vec<String>,
    pub rows: Vec<SnapshotRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub id: usize,
    pub cells: Vec<Value>,
}

impl Snapshot {
    pub fn header(&self) -> Result<Header, String> {
        Header::parse(&self.columns).map_err(|e| e.to_string())
    }

    /// Rebuilds the labeled set and scores `row` under its best/rest split.
    pub fn score(&self, row: &Row) -> Result<Score, String> {
        let header = self.header()?;
        let rows = self
            .rows
            .iter()
            .map(|r| {
                Ok(Row::new(
                    r.id,
                    r.cells.iter().map(cell_from_json).collect::<Result<_, _>>()?,
                ))
            })
            .collect::<Result<Vec<Row>, String>>()?;
        let template = Dataset::new(header);
        let done = template.clone_with(rows, true).map_err(|e| e.to_string())?;
        let policy: Policy = self.policy.parse().map_err(|e: lite_core::Error| e.to_string())?;
        let config = Config::default();
        let (best, rest) = split_best_rest(&done, &config).map_err(|e| e.to_string())?;
        if row.cells.len() != done.header().len() {
            return Err(format!(
                "row has {} cells but the header has {}",
                row.cells.len(),
                done.header().len()
            ));
        }
        Ok(score_row(&best, &rest, row, policy, done.len(), &config))
    }
}

pub fn score_json(s: Score) -> Value {
    json!({ "best": s.best, "rest": s.rest, "score": s.value })
}

/// Name, kind and goal direction of every column.
pub fn columns_json(header: &Header) -> Value {
    let cols: Vec<Value> = header
        .columns()
        .iter()
        .map(|c| {
            json!({
                "name": c.name,
                "kind": if c.numeric { "numeric" } else { "symbolic" },
                "goal": c.goal.map(|g| match g {
                    lite_core::Goal::Minimize => "minimize",
                    lite_core::Goal::Maximize => "maximize",
                }),
            })
        })
        .collect();
    Value::Array(cols)
}

/// Missing is `null`.
pub fn cell_json(cell: &Cell) -> Value {
    match cell {
        Cell::Missing => Value::Null,
        Cell::Num(v) => json!(v),
        Cell::Sym(s) => Value::String(s.clone()),
    }
}

pub fn cell_from_json(v: &Value) -> Result<Cell, String> {
    match v {
        Value::Null => Ok(Cell::Missing),
        Value::Number(n) => n.as_f64().map(Cell::Num).ok_or_else(|| format!("bad number {n}")),
        Value::String(s) => Ok(Cell::Sym(s.clone())),
        other => Err(format!("cell must be a number, string or null, not {other}")),
    }
}

fn cells_json(row: &Row) -> Vec<Value> {
    row.cells.iter().map(cell_json).collect()
}

fn model_json(d: &Dataset) -> Value {
    let header = d.header();
    let num = |c: &NumSummary| {
        json!({
            "name": header.column(c.pos).name,
            "kind": "numeric",
            "n": c.n,
            "mu": c.mu,
            "sd": c.sd(),
        })
    };
    let mut cols: Vec<Value> = d
        .x()
        .iter()
        .map(|c| match c {
            Column::Num(c) => num(c),
            Column::Sym(c) => {
                let top: Vec<Value> = c
                    .ranked()
                    .into_iter()
                    .take(5)
                    .map(|(value, count)| json!({ "value": value, "count": count }))
                    .collect();
                json!({ "name": header.column(c.pos).name, "kind": "symbolic", "n": c.n, "top": top })
            }
        })
        .collect();
    cols.extend(d.y().iter().map(num));
    json!({ "rows": d.len(), "columns": cols })
}
