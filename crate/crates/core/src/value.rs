use alloc::string::String;
use alloc::vec::Vec;

/// One cell of a row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Missing,
    Num(f64),
    Sym(String),
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Sym(s.into())
    }
}

/// A row plus its identity. The id is the row's position in the dataset it
/// was loaded from and is what oracles key their labels on.
#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub id: usize,
    pub cells: Vec<Cell>,
}

impl Row {
    pub fn new(id: usize, cells: Vec<Cell>) -> Self {
        Row { id, cells }
    }
}
