use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::value::Cell;

/// Guards the Gaussian likelihood against zero spread.
pub const EPSILON: f64 = 1e-64;

/// Numeric columns whose observed range is narrower than this normalize to 0.
const TINY_RANGE: f64 = 1e-32;

/// Direction of a goal column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Goal {
    Minimize,
    Maximize,
}

impl Goal {
    /// The ideal normalized value: 0 when minimizing, 1 when maximizing.
    pub fn heaven(self) -> f64 {
        match self {
            Goal::Minimize => 0.0,
            Goal::Maximize => 1.0,
        }
    }
}

/// Name-derived role of one column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSpec {
    pub name: String,
    pub pos: usize,
    pub numeric: bool,
    pub goal: Option<Goal>,
}

impl ColumnSpec {
    /// Numeric iff the name starts uppercase; a goal iff it ends in `+` or `-`.
    pub fn parse(pos: usize, name: &str) -> Result<Self> {
        let name = name.trim();
        let first = name.chars().next().ok_or(Error::EmptyName(pos))?;
        let numeric = first.is_uppercase();
        let goal = match name.chars().last() {
            Some('+') => Some(Goal::Maximize),
            Some('-') => Some(Goal::Minimize),
            _ => None,
        };
        if goal.is_some() && !numeric {
            return Err(Error::SymbolicGoal(name.to_string()));
        }
        Ok(ColumnSpec {
            name: name.to_string(),
            pos,
            numeric,
            goal,
        })
    }

    pub fn is_goal(&self) -> bool {
        self.goal.is_some()
    }

    /// Converts one field of text into a cell. `?` is missing. A numeric
    /// column that fails to parse reports the bad text so callers can warn.
    pub fn cell(&self, text: &str) -> core::result::Result<Cell, String> {
        let text = text.trim();
        if text == "?" || text.is_empty() {
            return Ok(Cell::Missing);
        }
        if self.numeric {
            text.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Cell::Num)
                .ok_or_else(|| text.to_string())
        } else {
            Ok(Cell::Sym(text.to_string()))
        }
    }
}

/// Column roles for a whole table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Header {
    cols: Vec<ColumnSpec>,
    x: Vec<usize>,
    y: Vec<usize>,
}

impl Header {
    pub fn parse<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::EmptyHeader);
        }
        let mut seen = BTreeSet::new();
        let mut cols = Vec::with_capacity(names.len());
        for (pos, name) in names.iter().enumerate() {
            let spec = ColumnSpec::parse(pos, name.as_ref())?;
            if !seen.insert(spec.name.clone()) {
                return Err(Error::DuplicateColumn(spec.name));
            }
            cols.push(spec);
        }
        let x = cols.iter().filter(|c| !c.is_goal()).map(|c| c.pos).collect();
        let y = cols.iter().filter(|c| c.is_goal()).map(|c| c.pos).collect();
        Ok(Header { cols, x, y })
    }

    pub fn len(&self) -> usize {
        self.cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn columns(&self) -> &[ColumnSpec] {
        &self.cols
    }

    pub fn column(&self, pos: usize) -> &ColumnSpec {
        &self.cols[pos]
    }

    /// Positions of independent columns.
    pub fn x(&self) -> &[usize] {
        &self.x
    }

    /// Positions of goal columns.
    pub fn y(&self) -> &[usize] {
        &self.y
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.cols.iter().map(|c| c.name.as_str())
    }
}

/// Incremental summary of a numeric column.
#[derive(Debug, Clone, PartialEq)]
pub struct NumSummary {
    pub pos: usize,
    pub n: usize,
    pub mu: f64,
    m2: f64,
    pub lo: f64,
    pub hi: f64,
    pub heaven: f64,
}

impl NumSummary {
    pub fn new(pos: usize, goal: Option<Goal>) -> Self {
        NumSummary {
            pos,
            n: 0,
            mu: 0.0,
            m2: 0.0,
            lo: f64::INFINITY,
            hi: f64::NEG_INFINITY,
            heaven: goal.map_or(0.0, Goal::heaven),
        }
    }

    pub fn add(&mut self, v: f64) {
        self.n += 1;
        let d = v - self.mu;
        self.mu += d / self.n as f64;
        self.m2 += d * (v - self.mu);
        self.lo = self.lo.min(v);
        self.hi = self.hi.max(v);
    }

    /// Sample standard deviation; zero until two values have been seen.
    pub fn sd(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            libm::sqrt(self.m2.max(0.0) / (self.n - 1) as f64)
        }
    }

    /// Maps `v` onto 0..1 over the observed `lo..hi`, clamped.
    pub fn norm(&self, v: f64) -> f64 {
        let range = self.hi - self.lo;
        if range.is_nan() || range < TINY_RANGE {
            return 0.0;
        }
        ((v - self.lo) / range).clamp(0.0, 1.0)
    }

    /// Gaussian density of `v`.
    pub fn like(&self, v: f64) -> f64 {
        let sd = self.sd();
        let z = (v - self.mu) * (v - self.mu) / (2.0 * sd * sd + EPSILON);
        libm::exp(-z) / ((sd + EPSILON) * libm::sqrt(2.0 * PI))
    }

    /// Natural log of [`like`](Self::like), evaluated in log space so a
    /// zero-spread column yields a large negative number instead of `-inf`.
    pub fn log_like(&self, v: f64) -> f64 {
        let sd = self.sd();
        let z = (v - self.mu) * (v - self.mu) / (2.0 * sd * sd + EPSILON);
        -z - libm::log(sd + EPSILON) - 0.5 * libm::log(2.0 * PI)
    }

    fn dist(&self, a: &Cell, b: &Cell) -> f64 {
        match (a.as_num(), b.as_num()) {
            (None, None) => 1.0,
            (Some(a), Some(b)) => libm::fabs(self.norm(a) - self.norm(b)),
            (Some(v), None) | (None, Some(v)) => {
                let v = self.norm(v);
                v.max(1.0 - v)
            }
        }
    }
}

/// Frequency summary of a symbolic column.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct SymSummary {
    pub pos: usize,
    pub n: usize,
    pub counts: BTreeMap<String, usize>,
}

impl SymSummary {
    pub fn new(pos: usize) -> Self {
        SymSummary {
            pos,
            ..Default::default()
        }
    }

    pub fn add(&mut self, s: &str) {
        self.n += 1;
        *self.counts.entry(s.to_string()).or_insert(0) += 1;
    }

    pub fn count(&self, s: &str) -> usize {
        self.counts.get(s).copied().unwrap_or(0)
    }

    /// m-estimate of the frequency of `s`.
    pub fn like(&self, s: &str, m: f64, prior: f64) -> f64 {
        (self.count(s) as f64 + m * prior) / (self.n as f64 + m)
    }

    /// Symbols ordered by descending count, ties by symbol.
    pub fn ranked(&self) -> Vec<(&str, usize)> {
        let mut out: Vec<_> = self.counts.iter().map(|(s, c)| (s.as_str(), *c)).collect();
        out.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        out
    }

    fn dist(&self, a: &Cell, b: &Cell) -> f64 {
        match (a, b) {
            (Cell::Sym(a), Cell::Sym(b)) if a == b => 0.0,
            _ => 1.0,
        }
    }
}

/// Summary of one independent column.
#[derive(Debug, Clone, PartialEq)]
pub enum Column {
    Num(NumSummary),
    Sym(SymSummary),
}

impl Column {
    pub fn for_spec(spec: &ColumnSpec) -> Self {
        if spec.numeric {
            Column::Num(NumSummary::new(spec.pos, spec.goal))
        } else {
            Column::Sym(SymSummary::new(spec.pos))
        }
    }

    pub fn pos(&self) -> usize {
        match self {
            Column::Num(c) => c.pos,
            Column::Sym(c) => c.pos,
        }
    }

    pub fn n(&self) -> usize {
        match self {
            Column::Num(c) => c.n,
            Column::Sym(c) => c.n,
        }
    }

    pub fn add(&mut self, cell: &Cell) {
        match (self, cell) {
            (Column::Num(c), Cell::Num(v)) => c.add(*v),
            (Column::Sym(c), Cell::Sym(s)) => c.add(s),
            (Column::Sym(c), Cell::Num(v)) => c.add(&v.to_string()),
            _ => {}
        }
    }

    /// Per-column distance in 0..1. Missing values take whichever value
    /// maximizes the result; two missing values are maximally distant.
    pub fn dist(&self, a: &Cell, b: &Cell) -> f64 {
        match self {
            Column::Num(c) => c.dist(a, b),
            Column::Sym(c) => c.dist(a, b),
        }
    }

    /// Log likelihood of a present cell; `None` for missing cells.
    pub fn log_like(&self, cell: &Cell, m: f64, prior: f64) -> Option<f64> {
        match (self, cell) {
            (_, Cell::Missing) => None,
            (Column::Num(c), Cell::Num(v)) => Some(c.log_like(*v)),
            (Column::Sym(c), Cell::Sym(s)) => Some(libm::log(c.like(s, m, prior))),
            (Column::Sym(c), Cell::Num(v)) => Some(libm::log(c.like(&v.to_string(), m, prior))),
            (Column::Num(_), Cell::Sym(_)) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn num(values: &[f64]) -> NumSummary {
        let mut c = NumSummary::new(0, None);
        for v in values {
            c.add(*v);
        }
        c
    }

    #[test]
    fn header_roles_for_car_table() {
        let h = Header::parse(&["Clndrs", "Volume", "Model", "origin", "Lbs-", "Acc+", "Mpg+"]).unwrap();
        assert_eq!(h.x(), &[0, 1, 2, 3]);
        assert_eq!(h.y(), &[4, 5, 6]);
        let numeric: Vec<bool> = h.x().iter().map(|&p| h.column(p).numeric).collect();
        assert_eq!(numeric, [true, true, true, false]);
        assert_eq!(h.column(4).goal, Some(Goal::Minimize));
        assert_eq!(h.column(5).goal, Some(Goal::Maximize));
        assert_eq!(h.column(6).goal, Some(Goal::Maximize));
    }

    #[test]
    fn header_edge_cases() {
        let h = Header::parse(&["name"]).unwrap();
        assert_eq!((h.x().len(), h.y().len()), (1, 0));
        assert!(!h.column(0).numeric);

        let h = Header::parse(&["Effort-"]).unwrap();
        assert_eq!((h.x().len(), h.y().len()), (0, 1));
        assert_eq!(h.column(0).goal, Some(Goal::Minimize));

        assert_eq!(Header::parse(&["bugs-"]), Err(Error::SymbolicGoal("bugs-".into())));
        assert_eq!(Header::parse::<&str>(&[]), Err(Error::EmptyHeader));
        assert_eq!(Header::parse(&["A", "A"]), Err(Error::DuplicateColumn("A".into())));
        assert_eq!(Header::parse(&["A", " "]), Err(Error::EmptyName(1)));
    }

    #[test]
    fn cell_parsing() {
        let n = ColumnSpec::parse(0, "Lbs-").unwrap();
        let s = ColumnSpec::parse(1, "origin").unwrap();
        assert_eq!(n.cell(" 2130 "), Ok(Cell::Num(2130.0)));
        assert_eq!(n.cell("?"), Ok(Cell::Missing));
        assert_eq!(n.cell("heavy"), Err("heavy".into()));
        assert_eq!(s.cell("2"), Ok(Cell::Sym("2".into())));
        assert_eq!(s.cell("?"), Ok(Cell::Missing));
    }

    #[test]
    fn norm_endpoints_and_clamp() {
        let acc = num(&[13.5, 24.6, 17.0]);
        assert_eq!(acc.norm(13.5), 0.0);
        assert_eq!(acc.norm(24.6), 1.0);
        assert!((acc.norm(17.0) - 0.315).abs() < 5e-4);
        assert_eq!(acc.norm(100.0), 1.0);
        assert_eq!(acc.norm(-3.0), 0.0);
        assert_eq!(num(&[5.0, 5.0]).norm(5.0), 0.0);
    }

    #[test]
    fn welford_matches_two_pass() {
        let xs = [24.6, 18.0, 17.0, 14.7, 22.2];
        let c = num(&xs);
        let mean = xs.iter().sum::<f64>() / 5.0;
        let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / 4.0;
        assert!((c.mu - mean).abs() < 1e-12);
        assert!((c.sd() - var.sqrt()).abs() < 1e-12);
        assert_eq!((c.lo, c.hi), (14.7, 24.6));
        assert_eq!(num(&[3.0]).sd(), 0.0);
    }

    #[test]
    fn gaussian_likelihood() {
        // Standard normal: mean 0, sample sd 1.
        let c = num(&[-1.0, 1.0]);
        let c = NumSummary { m2: 1.0, ..c };
        assert!((c.sd() - 1.0).abs() < 1e-15);
        assert!((c.like(0.0) - 0.398_942_280_401_432_7).abs() < 1e-12);
        assert!((c.like(1.0) - 0.241_970_724_519_143_37).abs() < 1e-12);
        assert!((c.log_like(1.0) - c.like(1.0).ln()).abs() < 1e-12);

        let flat = num(&[2.0]);
        let peak = flat.like(2.0);
        assert!(peak.is_finite());
        assert!((peak - 1.0 / (EPSILON * (2.0 * PI).sqrt())).abs() / peak < 1e-12);
        assert!(flat.log_like(3.0).is_finite());
    }

    #[test]
    fn symbolic_likelihood() {
        let mut s = SymSummary::new(0);
        for v in ["a", "a", "a", "b", "b", "b", "c", "c", "c"] {
            s.add(v);
        }
        assert!((s.like("a", 2.0, 0.4) - 3.8 / 11.0).abs() < 1e-12);
        assert!((s.like("zzz", 2.0, 0.5) - 1.0 / 11.0).abs() < 1e-12);
        assert!((s.like("a", 0.0, 0.3) - 3.0 / 9.0).abs() < 1e-12);
    }

    #[test]
    fn cell_distances() {
        let sym = Column::Sym(SymSummary::new(0));
        assert_eq!(sym.dist(&"1".into(), &"1".into()), 0.0);
        assert_eq!(sym.dist(&"1".into(), &"3".into()), 1.0);
        assert_eq!(sym.dist(&Cell::Missing, &"3".into()), 1.0);

        let col = Column::Num(num(&[0.0, 10.0]));
        assert!((col.dist(&Cell::Missing, &Cell::Num(2.0)) - 0.8).abs() < 1e-12);
        assert!((col.dist(&Cell::Num(9.0), &Cell::Missing) - 0.9).abs() < 1e-12);
        assert_eq!(col.dist(&Cell::Missing, &Cell::Missing), 1.0);
        assert!((col.dist(&Cell::Num(2.0), &Cell::Num(7.0)) - 0.5).abs() < 1e-12);
    }
}
