use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Text written for cells whose run exceeded its resource budget.
pub const KC: &str = "KC";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Cell {
    Score(f64),
    /// The run hit a resource limit (rendered `KC`).
    ResourceExhausted,
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Score(v) => format!("{v:.4}"),
            Cell::ResourceExhausted => KC.into(),
        }
    }

    pub fn score(&self) -> Option<f64> {
        match self {
            Cell::Score(v) => Some(*v),
            Cell::ResourceExhausted => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableFormat {
    Csv,
    Text,
}

impl FromStr for TableFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(TableFormat::Csv),
            "text" | "txt" => Ok(TableFormat::Text),
            _ => Err(format!("unknown table format {s:?} (expected csv or text)")),
        }
    }
}

/// Macro-F1 cells keyed by (row setting, column setting).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub name: String,
    pub corner: String,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    /// `cells[r][c]`; `None` where no run was configured.
    pub cells: Vec<Vec<Option<Cell>>>,
}

impl ResultTable {
    pub fn new(name: impl Into<String>, rows: Vec<String>, cols: Vec<String>) -> Self {
        let cells = vec![vec![None; cols.len()]; rows.len()];
        ResultTable {
            name: name.into(),
            corner: "F1-Score".into(),
            rows,
            cols,
            cells,
        }
    }

    pub fn set(&mut self, row: usize, col: usize, cell: Cell) {
        self.cells[row][col] = Some(cell);
    }

    pub fn get(&self, row: &str, col: &str) -> Option<Cell> {
        let r = self.rows.iter().position(|x| x == row)?;
        let c = self.cols.iter().position(|x| x == col)?;
        self.cells[r][c]
    }

    pub fn filled(&self) -> impl Iterator<Item = (usize, usize, Cell)> + '_ {
        self.cells
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().filter_map(move |(c, v)| v.map(|v| (r, c, v))))
    }

    pub fn len(&self) -> usize {
        self.filled().count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Best scoring cell as (row, column, score).
    pub fn best(&self) -> Option<(&str, &str, f64)> {
        let mut best: Option<(usize, usize, f64)> = None;
        for (r, c, cell) in self.filled() {
            if let Some(s) = cell.score() {
                if best.is_none_or(|b| s > b.2) {
                    best = Some((r, c, s));
                }
            }
        }
        best.map(|(r, c, s)| (self.rows[r].as_str(), self.cols[c].as_str(), s))
    }

    fn grid_text(&self) -> Vec<Vec<String>> {
        let mut out = vec![std::iter::once(self.corner.clone()).chain(self.cols.iter().cloned()).collect()];
        for (r, label) in self.rows.iter().enumerate() {
            let mut line = vec![label.clone()];
            line.extend(self.cells[r].iter().map(|c| c.map(|c| c.render()).unwrap_or_default()));
            out.push(line);
        }
        out
    }

    pub fn render(&self, format: TableFormat) -> String {
        match format {
            TableFormat::Csv => self.to_csv(),
            TableFormat::Text => self.to_text(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for line in self.grid_text() {
            let fields: Vec<String> = line.iter().map(|f| csv_field(f)).collect();
            out.push_str(&fields.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_text(&self) -> String {
        let grid = self.grid_text();
        let ncols = grid[0].len();
        let widths: Vec<usize> = (0..ncols)
            .map(|c| grid.iter().map(|l| l[c].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        for line in &grid {
            let mut s = String::new();
            for (c, f) in line.iter().enumerate() {
                if c > 0 {
                    s.push_str("  ");
                }
                if c == 0 {
                    let _ = write!(s, "{f:<w$}", w = widths[c]);
                } else {
                    let _ = write!(s, "{f:>w$}", w = widths[c]);
                }
            }
            out.push_str(s.trim_end());
            out.push('\n');
        }
        out
    }
}

fn csv_field(f: &str) -> String {
    if f.contains([',', '"', '\n']) {
        format!("\"{}\"", f.replace('"', "\"\""))
    } else {
        f.to_string()
    }
}
