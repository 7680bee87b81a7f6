//! An oracle backed by a person on the other end of a channel.

use std::collections::BTreeMap;
use std::sync::mpsc::{self, Receiver, Sender, SyncSender};

use lite_core::{Cell, Header, Oracle, OracleError, Row};

/// One outstanding question: the row to label and where to send the goals.
#[derive(Debug)]
pub struct LabelRequest {
    pub row: Row,
    reply: SyncSender<Vec<f64>>,
}

impl LabelRequest {
    /// Answers with goal values in header goal order. Returns false if the
    /// oracle has gone away.
    pub fn answer(self, goals: Vec<f64>) -> bool {
        self.reply.send(goals).is_ok()
    }
}

/// Blocks in [`Oracle::label`] until the paired [`Receiver`] answers.
///
/// Dropping the receiver, or a request without answering it, ends the
/// session: the waiting call returns [`OracleError::SessionTerminated`].
/// There is no timeout.
#[derive(Debug)]
pub struct InteractiveOracle {
    goal_pos: Vec<usize>,
    requests: Sender<LabelRequest>,
    labeled: BTreeMap<usize, Row>,
}

impl InteractiveOracle {
    pub fn new(header: &Header) -> (Self, Receiver<LabelRequest>) {
        let (tx, rx) = mpsc::channel();
        let oracle = InteractiveOracle {
            goal_pos: header.y().to_vec(),
            requests: tx,
            labeled: BTreeMap::new(),
        };
        (oracle, rx)
    }
}

impl Oracle for InteractiveOracle {
    fn label(&mut self, row: &Row) -> Result<Row, OracleError> {
        if let Some(done) = self.labeled.get(&row.id) {
            return Ok(done.clone());
        }
        let (reply, answer) = mpsc::sync_channel(1);
        self.requests
            .send(LabelRequest {
                row: row.clone(),
                reply,
            })
            .map_err(|_| OracleError::SessionTerminated)?;
        let goals = answer.recv().map_err(|_| OracleError::SessionTerminated)?;
        if goals.len() != self.goal_pos.len() {
            return Err(OracleError::GoalArity {
                expected: self.goal_pos.len(),
                found: goals.len(),
            });
        }
        let mut out = row.clone();
        for (&p, v) in self.goal_pos.iter().zip(goals) {
            out.cells[p] = Cell::Num(v);
        }
        self.labeled.insert(row.id, out.clone());
        Ok(out)
    }

    fn label_count(&self) -> usize {
        self.labeled.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::thread;

    fn header() -> Header {
        Header::parse(&["X", "Y-", "Z+"]).unwrap()
    }

    #[test]
    fn waits_for_answer_and_caches() {
        let (mut oracle, rx) = InteractiveOracle::new(&header());
        let person = thread::spawn(move || {
            let req = rx.recv().unwrap();
            assert_eq!(req.row.id, 7);
            assert!(req.answer(vec![1.0, 2.0]));
            // A second request never comes for the same row.
            assert!(rx.recv().is_err());
        });
        let row = Row::new(7, vec![3.0.into(), Cell::Missing, Cell::Missing]);
        let got = oracle.label(&row).unwrap();
        assert_eq!(got.cells, [3.0.into(), 1.0.into(), 2.0.into()]);
        assert_eq!(oracle.label(&row).unwrap(), got);
        assert_eq!(oracle.label_count(), 1);
        drop(oracle);
        person.join().unwrap();
    }

    #[test]
    fn hang_up_terminates() {
        let (mut oracle, rx) = InteractiveOracle::new(&header());
        drop(rx);
        let row = Row::new(0, vec![Cell::Missing; 3]);
        assert_eq!(oracle.label(&row), Err(OracleError::SessionTerminated));

        let (mut oracle, rx) = InteractiveOracle::new(&header());
        let person = thread::spawn(move || drop(rx.recv().unwrap()));
        assert_eq!(oracle.label(&row), Err(OracleError::SessionTerminated));
        assert_eq!(oracle.label_count(), 0);
        person.join().unwrap();
    }

    #[test]
    fn wrong_goal_count_is_rejected() {
        let (mut oracle, rx) = InteractiveOracle::new(&header());
        let person = thread::spawn(move || rx.recv().unwrap().answer(vec![1.0]));
        let row = Row::new(0, vec![Cell::Missing; 3]);
        assert_eq!(
            oracle.label(&row),
            Err(OracleError::GoalArity { expected: 2, found: 1 })
        );
        person.join().unwrap();
    }
}
