use crate::error::{Error, Result};

/// Tunables shared by the acquisition loop and the bi-clustering search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Config {
    /// Rows labeled before the model is first built.
    pub start: usize,
    /// Acquisition iterations after the seed batch.
    pub halt: usize,
    /// Labeled rows split into `n^best` best and the remainder rest.
    pub best: f64,
    /// Fraction of the ranked unlabeled pool kept after each acquisition.
    pub upper: f64,
    /// Naive Bayes low-frequency offsets.
    pub m: f64,
    pub k: f64,
    /// Percentile of the distance ranking treated as "far".
    pub far: f64,
    /// Rows sampled when searching for far endpoints.
    pub half: usize,
    /// Recursion stops on leaves of size `2 * n^stop`.
    pub stop: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            start: 4,
            halt: 16,
            best: 0.5,
            upper: 0.8,
            m: 2.0,
            k: 1.0,
            far: 0.95,
            half: 256,
            stop: 0.5,
        }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if !(self.best > 0.0 && self.best <= 1.0) {
            return Err(Error::Config("best must be in (0, 1]"));
        }
        if !(self.upper > 0.0 && self.upper <= 1.0) {
            return Err(Error::Config("upper must be in (0, 1]"));
        }
        if !(self.far > 0.0 && self.far <= 1.0) {
            return Err(Error::Config("far must be in (0, 1]"));
        }
        if self.half < 2 {
            return Err(Error::Config("half must be at least 2"));
        }
        if self.start < 2 {
            return Err(Error::Config("start must be at least 2"));
        }
        if !(self.m >= 0.0 && self.k >= 0.0) {
            return Err(Error::Config("m and k must be non-negative"));
        }
        if !(self.stop > 0.0 && self.stop < 1.0) {
            return Err(Error::Config("stop must be in (0, 1)"));
        }
        Ok(())
    }

    /// Config for a run advertised as using `budget` labels in total.
    pub fn with_budget(self, budget: usize) -> Self {
        Config {
            halt: budget.saturating_sub(self.start),
            ..self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        Config::default().validate().unwrap();
    }

    #[test]
    fn rejects_bad_fields() {
        let bad = [
            Config {
                best: 0.0,
                ..Config::default()
            },
            Config {
                upper: 1.5,
                ..Config::default()
            },
            Config {
                far: 0.0,
                ..Config::default()
            },
            Config {
                half: 1,
                ..Config::default()
            },
            Config {
                start: 1,
                ..Config::default()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn budget_maps_to_halt() {
        assert_eq!(Config::default().with_budget(30).halt, 26);
        assert_eq!(Config::default().with_budget(5).halt, 1);
    }
}
