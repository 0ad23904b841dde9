//! Plot-data tables: a CSV file and a gnuplot `.dat` twin with the same
//! cell strings.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rsbq_core::optrec::fmt_sig;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for r in &self.rows {
            out.push_str(&r.join(","));
            out.push('\n');
        }
        out
    }

    /// Whitespace-separated columns with a `#` header; empty cells become `-`.
    pub fn to_dat(&self) -> String {
        let mut out = format!("# {}\n", self.columns.join(" "));
        for r in &self.rows {
            let cells: Vec<&str> = r.iter().map(|c| if c.is_empty() { "-" } else { c.as_str() }).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse_csv(text: &str) -> Option<Self> {
        let mut lines = text.lines();
        let columns: Vec<String> = lines.next()?.split(',').map(str::to_string).collect();
        let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
        rows.iter().all(|r| r.len() == columns.len()).then_some(Self { columns, rows })
    }

    pub fn parse_dat(text: &str) -> Option<Self> {
        let mut lines = text.lines();
        let columns: Vec<String> =
            lines.next()?.strip_prefix("# ")?.split_whitespace().map(str::to_string).collect();
        let rows: Vec<Vec<String>> = lines
            .map(|l| l.split_whitespace().map(|c| if c == "-" { String::new() } else { c.to_string() }).collect())
            .collect();
        rows.iter().all(|r| r.len() == columns.len()).then_some(Self { columns, rows })
    }

    /// Column `name` parsed as numbers.
    pub fn numeric_column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        self.rows.iter().map(|r| r[i].parse().ok()).collect()
    }
}

/// A number cell with 12 significant digits.
pub fn num(x: f64) -> String {
    fmt_sig(x)
}

/// Write `<stem>.csv` and `<stem>.dat` under `dir`.
pub fn emit_plotdata(table: &Table, dir: &Path, stem: &str) -> io::Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let csv = dir.join(format!("{stem}.csv"));
    let dat = dir.join(format!("{stem}.dat"));
    fs::write(&csv, table.to_csv())?;
    fs::write(&dat, table.to_dat())?;
    Ok(vec![csv, dat])
}
