//! Rank tables over a results file.
//!
//! Per dataset, runs are grouped into treatments (algorithm and budget) and
//! ranked with Scott-Knott on their best-d2h values. Rank 0 is best.

use std::collections::BTreeMap;
use std::fmt::Write;

use lite_core::stats::{scott_knott, Treatment};

use crate::harness::{Algorithm, RunRecord, Status};

/// Width of the box-plot gutter in characters.
pub const BOX_WIDTH: usize = 50;

#[derive(Debug, Clone, PartialEq)]
pub struct TreatmentRow {
    pub algorithm: Algorithm,
    pub budget: Option<usize>,
    pub rank: usize,
    /// Mean labels used over the treatment's runs.
    pub labels: f64,
    pub p25: f64,
    pub median: f64,
    pub p75: f64,
    pub runs: usize,
}

impl TreatmentRow {
    /// `certain&30`; treatments without a budget show their label count.
    pub fn name(&self) -> String {
        let n = self.budget.unwrap_or(self.labels.round() as usize);
        format!("{}&{}", self.algorithm.short(), n)
    }

    pub fn spread(&self) -> f64 {
        self.p75 - self.p25
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetReport {
    pub dataset: String,
    /// Sorted by rank, then median.
    pub rows: Vec<TreatmentRow>,
}

impl DatasetReport {
    /// Rows re-sorted by rank, then labels used.
    pub fn by_labels(&self) -> Vec<TreatmentRow> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| {
            a.rank
                .cmp(&b.rank)
                .then(a.labels.total_cmp(&b.labels))
                .then(a.median.total_cmp(&b.median))
        });
        rows
    }

    /// The fewest labels that separate a treatment from the baseline: the
    /// smallest label count in the rank just above the baseline's.
    pub fn labels_to_beat_baseline(&self) -> Option<f64> {
        let base = self.rows.iter().find(|r| r.algorithm == Algorithm::Baseline)?.rank;
        let above = base.checked_sub(1)?;
        self.rows
            .iter()
            .filter(|r| r.rank == above)
            .map(|r| r.labels)
            .min_by(f64::total_cmp)
    }
}

/// Ranks the successful runs of every dataset, in order of first
/// appearance.
pub fn rank_records(records: &[RunRecord]) -> Vec<DatasetReport> {
    let mut datasets: Vec<&str> = Vec::new();
    for r in records {
        if !datasets.contains(&r.dataset.as_str()) {
            datasets.push(&r.dataset);
        }
    }
    datasets
        .into_iter()
        .filter_map(|name| rank_dataset(name, records.iter().filter(|r| r.dataset == name)))
        .collect()
}

fn rank_dataset<'r>(dataset: &str, records: impl Iterator<Item = &'r RunRecord>) -> Option<DatasetReport> {
    type Key = (Algorithm, Option<usize>);
    let mut keys: Vec<Key> = Vec::new();
    let mut groups: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for r in records {
        let (Status::Ok, Some(d)) = (&r.status, r.best_d2h) else {
            continue;
        };
        let key = (r.algorithm, r.budget);
        let i = keys.iter().position(|k| *k == key).unwrap_or_else(|| {
            keys.push(key);
            groups.push((Vec::new(), Vec::new()));
            keys.len() - 1
        });
        groups[i].0.push(d);
        groups[i].1.push(r.labels_used);
    }
    if keys.is_empty() {
        return None;
    }
    let labels: Vec<f64> = groups
        .iter()
        .map(|(_, l)| l.iter().sum::<usize>() as f64 / l.len() as f64)
        .collect();
    let treatments: Vec<Treatment> = groups
        .iter()
        .zip(&labels)
        .enumerate()
        .map(|(i, ((d2h, _), &l))| Treatment::new(i.to_string(), l.round() as usize, d2h.clone()))
        .collect();
    let mut rows: Vec<TreatmentRow> = scott_knott(&treatments)
        .into_iter()
        .map(|t| {
            let i: usize = t.treatment.name.parse().expect("index names");
            TreatmentRow {
                algorithm: keys[i].0,
                budget: keys[i].1,
                rank: t.rank,
                labels: labels[i],
                p25: t.p25,
                median: t.median,
                p75: t.p75,
                runs: t.treatment.results.len(),
            }
        })
        .collect();
    rows.sort_by(|a, b| a.rank.cmp(&b.rank).then(a.median.total_cmp(&b.median)));
    Some(DatasetReport {
        dataset: dataset.to_string(),
        rows,
    })
}

fn column(v: f64) -> usize {
    ((v.clamp(0.0, 1.0) * (BOX_WIDTH - 1) as f64).round()) as usize
}

/// A 50-column box plot of values in 0..1: dashes span the 25th to 75th
/// percentile, `o` marks the median.
pub fn box_plot(p25: f64, median: f64, p75: f64) -> String {
    let mut cells = [' '; BOX_WIDTH];
    for c in &mut cells[column(p25)..=column(p75).max(column(p25))] {
        *c = '-';
    }
    cells[column(median)] = 'o';
    cells.iter().collect()
}

fn render(title: &str, rows: &[TreatmentRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{title}");
    let _ = writeln!(
        out,
        "rank  {:<18} {:>6}  {:>5}  {:>9}  box",
        "treatment", "labels", "50th", "(75-25)th"
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:>4}  {:<18} {:>6.0}  {:>5.2}  {:>9.2}  |{}|",
            r.rank,
            r.name(),
            r.labels,
            r.median,
            r.spread(),
            box_plot(r.p25, r.median, r.p75)
        );
    }
    out
}

/// Rows sorted by rank then median.
pub fn render_by_rank(report: &DatasetReport) -> String {
    render(&report.dataset, &report.rows)
}

/// Rows sorted by rank then labels used.
pub fn render_by_labels(report: &DatasetReport) -> String {
    render(&format!("{} (by labels)", report.dataset), &report.by_labels())
}

/// Mean and sample standard deviation. `None` when empty.
pub fn mean_sd(values: &[f64]) -> Option<(f64, f64)> {
    if values.is_empty() {
        return None;
    }
    let n = values.len() as f64;
    let mu = values.iter().sum::<f64>() / n;
    let sd = if values.len() < 2 {
        0.0
    } else {
        (values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    Some((mu, sd))
}

/// Where each algorithm's best treatment landed, across datasets.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BestSummary {
    pub datasets: usize,
    /// Short algorithm names in column order.
    pub algorithms: Vec<&'static str>,
    /// `(algorithm, rank)` to the label counts of the best treatment, one
    /// per dataset where it reached that rank.
    pub cells: BTreeMap<(&'static str, usize), Vec<f64>>,
    /// Per dataset, the fewest labels that beat the baseline.
    pub to_beat_baseline: Vec<f64>,
}

impl BestSummary {
    /// Share of datasets in which `algorithm`'s best treatment had `rank`.
    pub fn frequency(&self, algorithm: &str, rank: usize) -> f64 {
        let hits = self.cells.get(&(algorithm, rank)).map_or(0, Vec::len);
        hits as f64 / self.datasets.max(1) as f64
    }

    pub fn labels(&self, algorithm: &str, rank: usize) -> Option<(f64, f64)> {
        self.cells.get(&(algorithm, rank)).and_then(|v| mean_sd(v))
    }

    pub fn max_rank(&self) -> usize {
        self.cells.keys().map(|k| k.1).max().unwrap_or(0)
    }
}

/// For every dataset and algorithm, picks the algorithm's best treatment
/// (lowest rank, then fewest labels) and tallies its rank and labels.
pub fn summarize_best(reports: &[DatasetReport]) -> BestSummary {
    let mut summary = BestSummary {
        datasets: reports.len(),
        ..BestSummary::default()
    };
    for report in reports {
        let mut best: Vec<&TreatmentRow> = Vec::new();
        for row in &report.rows {
            match best.iter_mut().find(|b| b.algorithm.short() == row.algorithm.short()) {
                Some(b) => {
                    if row.rank < b.rank || (row.rank == b.rank && row.labels < b.labels) {
                        *b = row;
                    }
                }
                None => best.push(row),
            }
        }
        for b in best {
            let name = b.algorithm.short();
            if !summary.algorithms.contains(&name) {
                summary.algorithms.push(name);
            }
            summary.cells.entry((name, b.rank)).or_default().push(b.labels);
        }
        if let Some(l) = report.labels_to_beat_baseline() {
            summary.to_beat_baseline.push(l);
        }
    }
    let order = |a: &str| Algorithm::ALL.iter().position(|x| x.short() == a);
    summary.algorithms.sort_by_key(|a| order(a));
    summary
}

/// Rank by algorithm grid; each cell is the share of datasets and the mean
/// (sd) of labels.
pub fn render_summary(summary: &BestSummary) -> String {
    let mut out = String::new();
    let _ = write!(out, "rank");
    for a in &summary.algorithms {
        let _ = write!(out, "  {a:>16}");
    }
    let _ = writeln!(out);
    for rank in 0..=summary.max_rank() {
        let _ = write!(out, "{rank:>4}");
        for a in &summary.algorithms {
            let cell = summary.labels(a, rank).map_or_else(String::new, |(mu, sd)| {
                format!("{:>3.0}% {:.0} ({:.0})", 100.0 * summary.frequency(a, rank), mu, sd)
            });
            let _ = write!(out, "  {cell:>16}");
        }
        let _ = writeln!(out);
    }
    let _ = writeln!(out, "datasets: {}", summary.datasets);
    if let Some((mu, sd)) = mean_sd(&summary.to_beat_baseline) {
        let _ = writeln!(out, "fewest labels to beat baseline: {mu:.1} ({sd:.1})");
    }
    out
}
