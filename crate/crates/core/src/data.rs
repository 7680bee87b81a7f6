use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::column::{Column, Header, NumSummary};
use crate::config::Config;
use crate::error::{Error, Result};
use crate::value::{Cell, Row};

/// Rows plus summaries of their independent and goal columns.
///
/// Summaries always reflect exactly the rows added. Clones share the header.
#[derive(Debug, Clone)]
pub struct Dataset {
    header: Arc<Header>,
    rows: Vec<Row>,
    x: Vec<Column>,
    y: Vec<NumSummary>,
}

impl Dataset {
    pub fn new(header: Header) -> Self {
        Self::empty(Arc::new(header))
    }

    fn empty(header: Arc<Header>) -> Self {
        let x = header.x().iter().map(|&p| Column::for_spec(header.column(p))).collect();
        let y = header
            .y()
            .iter()
            .map(|&p| NumSummary::new(p, header.column(p).goal))
            .collect();
        Dataset {
            header,
            rows: Vec::new(),
            x,
            y,
        }
    }

    pub fn from_rows(header: Header, rows: impl IntoIterator<Item = Row>) -> Result<Self> {
        let mut data = Self::new(header);
        for row in rows {
            data.add(row)?;
        }
        Ok(data)
    }

    pub fn header(&self) -> &Header {
        &self.header
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Row> {
        self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn x(&self) -> &[Column] {
        &self.x
    }

    pub fn y(&self) -> &[NumSummary] {
        &self.y
    }

    /// Appends a row and folds its present cells into the summaries.
    pub fn add(&mut self, row: Row) -> Result<()> {
        if row.cells.len() != self.header.len() {
            return Err(Error::Arity {
                expected: self.header.len(),
                found: row.cells.len(),
            });
        }
        for col in &mut self.x {
            col.add(&row.cells[col.pos()]);
        }
        for col in &mut self.y {
            if let Cell::Num(v) = row.cells[col.pos] {
                col.add(v);
            }
        }
        self.rows.push(row);
        Ok(())
    }

    /// A new dataset with the same header and fresh summaries built from
    /// `rows` only. With `order`, rows are sorted ascending by distance to
    /// heaven (ties keep their input order).
    pub fn clone_with(&self, rows: impl IntoIterator<Item = Row>, order: bool) -> Result<Self> {
        let mut data = Self::empty(self.header.clone());
        for row in rows {
            data.add(row)?;
        }
        if order {
            data.sort_by_d2h()?;
        }
        Ok(data)
    }

    /// Sorts rows ascending by distance to heaven under this dataset's own
    /// goal summaries. Stable.
    pub fn sort_by_d2h(&mut self) -> Result<()> {
        let mut keyed = Vec::with_capacity(self.rows.len());
        for row in self.rows.drain(..) {
            let d = d2h_in_frame(&self.y, &row)?;
            keyed.push((d, row));
        }
        keyed.sort_by(|a, b| a.0.total_cmp(&b.0));
        self.rows = keyed.into_iter().map(|(_, r)| r).collect();
        Ok(())
    }

    /// Copy of this dataset with every goal cell set to missing. The
    /// independent-column summaries are unchanged.
    pub fn masked(&self) -> Self {
        let mut out = Self::empty(self.header.clone());
        out.x = self.x.clone();
        out.rows = self
            .rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                for &p in self.header.y() {
                    r.cells[p] = Cell::Missing;
                }
                r
            })
            .collect();
        out
    }

    /// Normalized Euclidean distance from the row's goals to heaven, in 0..1.
    pub fn d2h(&self, row: &Row) -> Result<f64> {
        d2h_in_frame(&self.y, row)
    }

    /// Distance between two rows over independent columns, in 0..1.
    pub fn dist(&self, a: &Row, b: &Row) -> Result<f64> {
        if self.x.is_empty() {
            return Err(Error::NoIndependentColumns);
        }
        let sum: f64 = self
            .x
            .iter()
            .map(|c| {
                let d = c.dist(&a.cells[c.pos()], &b.cells[c.pos()]);
                d * d
            })
            .sum();
        Ok(libm::sqrt(sum / self.x.len() as f64))
    }

    /// Log likelihood that `row` belongs to this dataset, as one class out of
    /// `nh` classes over `nall` rows in total.
    pub fn loglike(&self, row: &Row, nall: usize, nh: usize, config: &Config) -> f64 {
        let prior = (self.rows.len() as f64 + config.k) / (nall as f64 + config.k * nh as f64);
        let cells: f64 = self
            .x
            .iter()
            .filter_map(|c| c.log_like(&row.cells[c.pos()], config.m, prior))
            .sum();
        libm::log(prior) + cells
    }
}

/// Distance to heaven of `row` using `goals` for normalization. Every goal
/// cell of the row must be present.
pub fn d2h_in_frame(goals: &[NumSummary], row: &Row) -> Result<f64> {
    if goals.is_empty() {
        return Err(Error::NoGoals);
    }
    let mut sum = 0.0;
    for col in goals {
        let v = row.cells[col.pos].as_num().ok_or(Error::Unlabeled(row.id))?;
        let gap = col.heaven - col.norm(v);
        sum += gap * gap;
    }
    Ok(libm::sqrt(sum / goals.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn car_header() -> Header {
        Header::parse(&["Clndrs", "Volume", "Model", "origin", "Lbs-", "Acc+", "Mpg+"]).unwrap()
    }

    fn car(id: usize, v: [f64; 7]) -> Row {
        let mut cells: Vec<Cell> = v.iter().map(|&x| Cell::Num(x)).collect();
        cells[3] = Cell::Sym(alloc::format!("{}", v[3]));
        Row::new(id, cells)
    }

    #[test]
    fn first_row_sets_range() {
        let mut d = Dataset::new(car_header());
        d.add(car(0, [4.0, 97.0, 82.0, 2.0, 2130.0, 24.6, 40.0])).unwrap();
        let lbs = &d.y()[0];
        assert_eq!((lbs.lo, lbs.hi, lbs.n), (2130.0, 2130.0, 1));
    }

    #[test]
    fn missing_row_only_counts_rows() {
        let mut d = Dataset::new(car_header());
        d.add(Row::new(0, vec![Cell::Missing; 7])).unwrap();
        assert_eq!(d.len(), 1);
        assert!(d.x().iter().all(|c| c.n() == 0));
        assert!(d.y().iter().all(|c| c.n == 0));
    }

    #[test]
    fn arity_is_checked() {
        let mut d = Dataset::new(car_header());
        assert_eq!(
            d.add(Row::new(0, vec![Cell::Missing; 3])),
            Err(Error::Arity { expected: 7, found: 3 })
        );
    }

    #[test]
    fn acc_range_over_best_rows() {
        let mut d = Dataset::new(car_header());
        for (i, acc) in [24.6, 18.0, 17.0].into_iter().enumerate() {
            d.add(car(i, [4.0, 97.0, 82.0, 2.0, 2130.0, acc, 40.0])).unwrap();
        }
        assert_eq!((d.y()[1].lo, d.y()[1].hi), (17.0, 24.6));
    }

    #[test]
    fn d2h_two_goal_example() {
        let h = Header::parse(&["Bugs-", "Features+"]).unwrap();
        let d = Dataset::from_rows(
            h,
            [
                Row::new(0, vec![0.0.into(), 0.0.into()]),
                Row::new(1, vec![100.0.into(), 100.0.into()]),
            ],
        )
        .unwrap();
        let r = Row::new(2, vec![30.0.into(), 80.0.into()]);
        let got = d.d2h(&r).unwrap();
        assert!((got - 0.065f64.sqrt()).abs() < 1e-12);
        assert_eq!(d.d2h(&Row::new(3, vec![0.0.into(), 100.0.into()])).unwrap(), 0.0);
        assert_eq!(
            d.d2h(&Row::new(4, vec![Cell::Missing, 1.0.into()])),
            Err(Error::Unlabeled(4))
        );
    }

    #[test]
    fn d2h_single_goal_worst() {
        let h = Header::parse(&["Effort-"]).unwrap();
        let d = Dataset::from_rows(h, [Row::new(0, vec![1.0.into()]), Row::new(1, vec![9.0.into()])]).unwrap();
        assert_eq!(d.d2h(&d.rows()[1]).unwrap(), 1.0);
    }

    #[test]
    fn dist_requires_x_columns() {
        let d = Dataset::new(Header::parse(&["Effort-"]).unwrap());
        let r = Row::new(0, vec![1.0.into()]);
        assert_eq!(d.dist(&r, &r), Err(Error::NoIndependentColumns));
    }

    #[test]
    fn dist_extremes() {
        let h = Header::parse(&["A", "b", "C-"]).unwrap();
        let lo = Row::new(0, vec![0.0.into(), "p".into(), 1.0.into()]);
        let hi = Row::new(1, vec![10.0.into(), "q".into(), 1.0.into()]);
        let d = Dataset::from_rows(h, [lo.clone(), hi.clone()]).unwrap();
        assert_eq!(d.dist(&lo, &lo).unwrap(), 0.0);
        assert_eq!(d.dist(&lo, &hi).unwrap(), 1.0);
    }

    #[test]
    fn clone_keeps_header_and_order_flag() {
        let mut d = Dataset::new(car_header());
        d.add(car(0, [4.0, 97.0, 82.0, 2.0, 2130.0, 24.6, 40.0])).unwrap();
        let empty = d.clone_with([], false).unwrap();
        assert!(empty.is_empty());
        assert_eq!(empty.header(), d.header());

        let rows = [
            car(7, [8.0, 351.0, 71.0, 1.0, 4154.0, 13.5, 10.0]),
            car(3, [4.0, 97.0, 82.0, 2.0, 2130.0, 24.6, 40.0]),
        ];
        let kept = d.clone_with(rows.clone(), false).unwrap();
        assert_eq!(kept.rows().iter().map(|r| r.id).collect::<Vec<_>>(), [7, 3]);
        let sorted = d.clone_with(rows, true).unwrap();
        assert_eq!(sorted.rows().iter().map(|r| r.id).collect::<Vec<_>>(), [3, 7]);

        let unlabeled = Row::new(9, vec![Cell::Missing; 7]);
        assert_eq!(d.clone_with([unlabeled], true).unwrap_err(), Error::Unlabeled(9));
    }

    #[test]
    fn masked_hides_goals_only() {
        let mut d = Dataset::new(car_header());
        d.add(car(0, [4.0, 97.0, 82.0, 2.0, 2130.0, 24.6, 40.0])).unwrap();
        let m = d.masked();
        assert!(m.rows()[0].cells[4..].iter().all(Cell::is_missing));
        assert_eq!(m.rows()[0].cells[..4], d.rows()[0].cells[..4]);
        assert_eq!(m.x(), d.x());
        assert!(m.y().iter().all(|c| c.n == 0));
    }

    #[test]
    fn loglike_closed_forms() {
        let config = Config::default();
        let h = Header::parse(&["a", "b", "C-"]).unwrap();
        let row = Row::new(0, vec!["x".into(), "y".into(), 1.0.into()]);
        let d = Dataset::from_rows(h, [row.clone()]).unwrap();

        // One row scored against itself: every symbol seen once out of one.
        let (nall, nh) = (5, 2);
        let prior = (1.0 + config.k) / (nall as f64 + config.k * nh as f64);
        let cell = ((1.0 + config.m * prior) / (1.0 + config.m)).ln();
        let want = prior.ln() + 2.0 * cell;
        assert!((d.loglike(&row, nall, nh, &config) - want).abs() < 1e-12);

        let blank = Row::new(1, vec![Cell::Missing, Cell::Missing, Cell::Missing]);
        assert_eq!(d.loglike(&blank, nall, nh, &config), prior.ln());
    }

    #[test]
    fn prior_formula() {
        let config = Config::default();
        let h = Header::parse(&["a", "C-"]).unwrap();
        let rows = (0..3).map(|i| Row::new(i, vec![Cell::Missing, Cell::Missing]));
        let d = Dataset::from_rows(h, rows).unwrap();
        let blank = Row::new(9, vec![Cell::Missing, Cell::Missing]);
        assert!((d.loglike(&blank, 9, 2, &config) - (4.0f64 / 11.0).ln()).abs() < 1e-12);
    }
}
