//! Ranking treatments by Scott-Knott partitioning with a Cliff's delta gate.
//!
//! Treatments are sorted by mean. The sorted list is cut where the weighted
//! deviation of the two sides' means from the overall mean is largest; the
//! cut stands only if Cliff's delta between the pooled sides is at least a
//! small effect. Accepted cuts recurse on both sides.

use alloc::string::String;
use alloc::vec::Vec;

/// Cliff's delta below this magnitude is a negligible difference.
pub const SMALL_EFFECT: f64 = 0.147;

/// `(#(x > y) - #(x < y)) / (|a| * |b|)` over all pairs.
pub fn cliffs_delta(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut gt = 0i64;
    let mut lt = 0i64;
    for x in a {
        for y in b {
            if x > y {
                gt += 1;
            } else if x < y {
                lt += 1;
            }
        }
    }
    (gt - lt) as f64 / (a.len() * b.len()) as f64
}

/// True when the two samples differ by more than a small effect.
pub fn different(a: &[f64], b: &[f64]) -> bool {
    libm::fabs(cliffs_delta(a, b)) >= SMALL_EFFECT
}

/// Nearest-rank percentile (`p` in 0..=100) of already-sorted values.
pub fn percentile_sorted(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = libm::ceil(p / 100.0 * sorted.len() as f64) as usize;
    sorted[rank.clamp(1, sorted.len()) - 1]
}

/// Nearest-rank 25th, 50th and 75th percentiles. NaN for an empty input.
pub fn percentiles(values: &[f64]) -> (f64, f64, f64) {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    (
        percentile_sorted(&sorted, 25.0),
        percentile_sorted(&sorted, 50.0),
        percentile_sorted(&sorted, 75.0),
    )
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// One treatment's results, e.g. best d2h per repeat.
#[derive(Debug, Clone, PartialEq)]
pub struct Treatment {
    pub name: String,
    /// Labels the treatment used.
    pub budget: usize,
    pub results: Vec<f64>,
}

impl Treatment {
    pub fn new(name: impl Into<String>, budget: usize, results: Vec<f64>) -> Self {
        Treatment {
            name: name.into(),
            budget,
            results,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankedTreatment {
    pub treatment: Treatment,
    /// 0 is best.
    pub rank: usize,
    pub mean: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
}

impl RankedTreatment {
    /// Inter-quartile range, 75th minus 25th percentile.
    pub fn spread(&self) -> f64 {
        self.p75 - self.p25
    }
}

/// A cut considered while partitioning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Split {
    /// Index into the mean-sorted treatment list where the right side starts.
    pub at: usize,
    /// Expected deviation of the two sides' means from the whole.
    pub gain: f64,
    pub delta: f64,
    pub accepted: bool,
}

/// Index (1..len) of the cut maximizing
/// `(n1 * |mean1 - mean| + n2 * |mean2 - mean|) / n` over pooled values,
/// with the gain. The first maximum wins. `None` for fewer than two groups.
pub fn best_split<G: AsRef<[f64]>>(groups: &[G]) -> Option<(usize, f64)> {
    if groups.len() < 2 {
        return None;
    }
    // Sums run over the pooled values in order, with no running totals, so
    // equal cuts produce bit-identical gains and the first one wins.
    let pooled = |gs: &[G]| -> (usize, f64) {
        let n = gs.iter().map(|g| g.as_ref().len()).sum();
        let s = gs.iter().flat_map(|g| g.as_ref()).sum();
        (n, s)
    };
    let (n, total) = pooled(groups);
    let mu = total / n as f64;
    let mut best: Option<(usize, f64)> = None;
    for cut in 1..groups.len() {
        let (n1, s1) = pooled(&groups[..cut]);
        let (n2, s2) = pooled(&groups[cut..]);
        if n1 == 0 || n2 == 0 {
            continue;
        }
        let mu1 = s1 / n1 as f64;
        let mu2 = s2 / n2 as f64;
        let gain = (n1 as f64 * libm::fabs(mu1 - mu) + n2 as f64 * libm::fabs(mu2 - mu)) / n as f64;
        if best.is_none_or(|(_, g)| gain > g) {
            best = Some((cut, gain));
        }
    }
    best
}

struct Summary {
    index: usize,
    mean: f64,
    p25: f64,
    median: f64,
    p75: f64,
}

/// Ranks treatments; output is in mean-sorted order with contiguous ranks
/// from 0.
pub fn scott_knott(treatments: &[Treatment]) -> Vec<RankedTreatment> {
    scott_knott_trace(treatments).0
}

/// Like [`scott_knott`], also returning every cut that was considered.
pub fn scott_knott_trace(treatments: &[Treatment]) -> (Vec<RankedTreatment>, Vec<Split>) {
    let mut order: Vec<Summary> = treatments
        .iter()
        .enumerate()
        .map(|(index, t)| {
            let (p25, median, p75) = percentiles(&t.results);
            Summary {
                index,
                mean: mean(&t.results),
                p25,
                median,
                p75,
            }
        })
        .collect();
    order.sort_by(|a, b| {
        a.mean
            .total_cmp(&b.mean)
            .then(a.median.total_cmp(&b.median))
            .then(a.index.cmp(&b.index))
    });
    let groups: Vec<&[f64]> = order.iter().map(|s| treatments[s.index].results.as_slice()).collect();
    let mut ranks = alloc::vec![0; order.len()];
    let mut splits = Vec::new();
    let mut next_rank = 0;
    divide(&groups, 0, groups.len(), &mut ranks, &mut next_rank, &mut splits);

    let ranked = order
        .into_iter()
        .zip(ranks)
        .map(|(s, rank)| RankedTreatment {
            treatment: treatments[s.index].clone(),
            rank,
            mean: s.mean,
            p25: s.p25,
            median: s.median,
            p75: s.p75,
        })
        .collect();
    (ranked, splits)
}

fn divide(
    groups: &[&[f64]],
    lo: usize,
    hi: usize,
    ranks: &mut [usize],
    next_rank: &mut usize,
    splits: &mut Vec<Split>,
) {
    if let Some((cut, gain)) = best_split(&groups[lo..hi]) {
        let at = lo + cut;
        let left: Vec<f64> = groups[lo..at].iter().flat_map(|g| g.iter().copied()).collect();
        let right: Vec<f64> = groups[at..hi].iter().flat_map(|g| g.iter().copied()).collect();
        let delta = cliffs_delta(&left, &right);
        let accepted = libm::fabs(delta) >= SMALL_EFFECT;
        splits.push(Split {
            at,
            gain,
            delta,
            accepted,
        });
        if accepted {
            divide(groups, lo, at, ranks, next_rank, splits);
            divide(groups, at, hi, ranks, next_rank, splits);
            return;
        }
    }
    for r in &mut ranks[lo..hi] {
        *r = *next_rank;
    }
    *next_rank += 1;
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn cliffs_examples() {
        assert_eq!(cliffs_delta(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]), 0.0);
        assert_eq!(cliffs_delta(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]), -1.0);
        assert!(different(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]));
        // Pairs of [1,1,2] vs [1,2,2]: 1 greater, 4 less, 4 ties.
        let d = cliffs_delta(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]);
        assert!((d - (-3.0 / 9.0)).abs() < 1e-15);
        assert!(different(&[1.0, 1.0, 2.0], &[1.0, 2.0, 2.0]));
    }

    #[test]
    fn percentile_examples() {
        let xs: Vec<f64> = (1..=20).map(f64::from).collect();
        assert_eq!(percentiles(&xs), (5.0, 10.0, 15.0));
        assert_eq!(percentiles(&[0.3]), (0.3, 0.3, 0.3));
        assert!(percentiles(&[]).1.is_nan());
    }

    #[test]
    fn two_far_apart_treatments_split() {
        let ts = [
            Treatment::new("b", 1, vec![0.9; 20]),
            Treatment::new("a", 1, vec![0.1; 20]),
        ];
        let ranked = scott_knott(&ts);
        assert_eq!(ranked[0].treatment.name, "a");
        assert_eq!((ranked[0].rank, ranked[1].rank), (0, 1));
    }

    #[test]
    fn identical_treatments_share_rank() {
        let vals = vec![0.2, 0.3, 0.5, 0.1];
        let ts = [Treatment::new("a", 1, vals.clone()), Treatment::new("b", 1, vals)];
        assert!(scott_knott(&ts).iter().all(|r| r.rank == 0));
    }

    #[test]
    fn single_treatment() {
        let ranked = scott_knott(&[Treatment::new("only", 3, vec![0.4, 0.5])]);
        assert_eq!(ranked.len(), 1);
        assert_eq!(ranked[0].rank, 0);
        assert!((ranked[0].spread() - 0.1).abs() < 1e-12);
    }

    #[test]
    fn three_tiers() {
        let ts = [
            Treatment::new("hi", 1, vec![0.8, 0.82, 0.85, 0.9]),
            Treatment::new("lo", 1, vec![0.1, 0.12, 0.11, 0.13]),
            Treatment::new("mid", 1, vec![0.5, 0.52, 0.48, 0.51]),
            Treatment::new("lo2", 1, vec![0.1, 0.12, 0.115, 0.13]),
        ];
        let ranked = scott_knott(&ts);
        let got: Vec<(&str, usize)> = ranked.iter().map(|r| (r.treatment.name.as_str(), r.rank)).collect();
        assert_eq!(got, [("lo", 0), ("lo2", 0), ("mid", 1), ("hi", 2)]);
    }
}
