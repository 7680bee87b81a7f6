//! The random(N) baseline.

use rand::seq::index;
use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::oracle::Oracle;
use crate::value::Row;

/// Labels `budget` distinct rows chosen uniformly at random and returns them
/// sorted by distance to heaven; the first row is the answer.
pub fn random_n<O, R>(data: &Dataset, oracle: &mut O, budget: usize, rng: &mut R) -> Result<Dataset>
where
    O: Oracle + ?Sized,
    R: Rng + ?Sized,
{
    if budget == 0 {
        return Err(Error::Budget {
            budget,
            reason: "must be at least 1",
        });
    }
    if budget > data.len() {
        return Err(Error::Budget {
            budget,
            reason: "exceeds the number of rows",
        });
    }
    let picks = index::sample(rng, data.len(), budget);
    let labeled = picks
        .iter()
        .map(|i| oracle.label(&data.rows()[i]).map_err(Error::from))
        .collect::<Result<alloc::vec::Vec<Row>>>()?;
    data.clone_with(labeled, true)
}

/// Random trials needed to see, at confidence `confidence`, an event of
/// probability `p`: `log(1 - C) / log(1 - p)`, rounded to the nearest count.
pub fn hamlet_n(confidence: f64, p: f64) -> usize {
    assert!(confidence > 0.0 && confidence < 1.0, "confidence must be in (0, 1)");
    assert!(p > 0.0 && p < 1.0, "p must be in (0, 1)");
    let n = libm::log(1.0 - confidence) / libm::log(1.0 - p);
    libm::round(n).max(1.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::column::Header;
    use crate::oracle::CachedOracle;
    use alloc::vec;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn data(n: usize) -> Dataset {
        let h = Header::parse(&["X", "Y-", "Z+"]).unwrap();
        let rows = (0..n).map(|i| {
            let v = ((i * 37) % n) as f64;
            Row::new(i, vec![(i as f64).into(), v.into(), (v * 0.5 + (i % 5) as f64).into()])
        });
        Dataset::from_rows(h, rows).unwrap()
    }

    #[test]
    fn hamlet_values() {
        assert_eq!(hamlet_n(0.95, 1.0 / 17.0), 49);
        assert_eq!(hamlet_n(0.5, 0.5), 1);
        assert_eq!(hamlet_n(0.99, 0.1), 44);
    }

    #[test]
    fn exhaustive_budget_finds_global_best() {
        let full = data(30);
        let mut oracle = CachedOracle::new(&full);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let got = random_n(&full.masked(), &mut oracle, 30, &mut rng).unwrap();
        let global = full.clone_with(full.rows().iter().cloned(), true).unwrap();
        assert_eq!(got.rows()[0].id, global.rows()[0].id);
        assert_eq!(oracle.label_count(), 30);
    }

    #[test]
    fn budget_one_returns_that_row() {
        let full = data(10);
        let mut oracle = CachedOracle::new(&full);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let got = random_n(&full.masked(), &mut oracle, 1, &mut rng).unwrap();
        assert_eq!(got.len(), 1);
        assert!(oracle.is_labeled(got.rows()[0].id));
        assert_eq!(oracle.label_count(), 1);
    }

    #[test]
    fn rejects_oversized_budget() {
        let full = data(10);
        let mut oracle = CachedOracle::new(&full);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        assert!(matches!(
            random_n(&full.masked(), &mut oracle, 11, &mut rng),
            Err(Error::Budget { budget: 11, .. })
        ));
        assert!(random_n(&full.masked(), &mut oracle, 0, &mut rng).is_err());
    }
}
