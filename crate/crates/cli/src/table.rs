//! CSV result tables with a provenance header and a units row.

use std::path::Path;

use crate::config::RunConfig;
use crate::error::{CliError, Result};

/// One table cell. Missing values are written as empty fields.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Missing,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:e}"),
            Cell::Num(_) | Cell::Missing => String::new(),
            Cell::Int(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(x) => Some(*x),
            Cell::Int(n) => Some(*n as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Missing, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// Provenance carried in `#` comment lines above the header.
#[derive(Debug, Clone, PartialEq)]
pub struct Provenance {
    pub command: String,
    pub config_sha256: String,
    pub version: String,
    pub run_id: Option<String>,
}

impl Provenance {
    pub fn new(command: &str, config: &RunConfig) -> Self {
        Provenance {
            command: command.to_string(),
            config_sha256: config.digest(),
            version: format!("nhberry {}", env!("CARGO_PKG_VERSION")),
            run_id: config.run_id.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResultTable {
    pub provenance: Provenance,
    pub columns: Vec<String>,
    pub units: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    /// `columns` pairs each name with its unit (empty for dimensionless).
    pub fn new(provenance: Provenance, columns: &[(&str, &str)]) -> Self {
        ResultTable {
            provenance,
            columns: columns.iter().map(|(c, _)| c.to_string()).collect(),
            units: columns.iter().map(|(_, u)| u.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn with_columns(provenance: Provenance, columns: Vec<(String, String)>) -> Self {
        let (columns, units) = columns.into_iter().unzip();
        ResultTable {
            provenance,
            columns,
            units,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(
            row.len(),
            self.columns.len(),
            "row width does not match the header"
        );
        self.rows.push(row);
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of a column, `None` for missing cells.
    pub fn column(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64()).collect())
    }

    pub fn to_csv(&self) -> String {
        let p = &self.provenance;
        let mut out = format!(
            "# command: {}\n# config_sha256: {}\n# version: {}\n",
            p.command, p.config_sha256, p.version
        );
        if let Some(id) = &p.run_id {
            out.push_str(&format!("# run_id: {id}\n"));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        let write = |w: &mut csv::Writer<Vec<u8>>, rec: Vec<String>| {
            w.write_record(rec).expect("in-memory write")
        };
        write(&mut w, self.columns.clone());
        write(&mut w, self.units.clone());
        for row in &self.rows {
            write(&mut w, row.iter().map(Cell::render).collect());
        }
        let body = w.into_inner().expect("in-memory flush");
        out.push_str(std::str::from_utf8(&body).expect("utf-8 fields"));
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv()).map_err(|source| CliError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prov() -> Provenance {
        Provenance {
            command: "test".into(),
            config_sha256: "00".into(),
            version: "nhberry 0".into(),
            run_id: None,
        }
    }

    #[test]
    fn layout() {
        let mut t = ResultTable::new(prov(), &[("j", "rad/us"), ("theta", "rad"), ("label", "")]);
        t.push(vec![0.5.into(), Cell::Missing, "+-".into()]);
        t.push(vec![1.0.into(), 1e-20.into(), "a,b".into()]);
        let csv = t.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "# command: test");
        assert_eq!(lines[3], "j,theta,label");
        assert_eq!(lines[4], "rad/us,rad,");
        assert_eq!(lines[5], "5e-1,,+-");
        assert_eq!(lines[6], "1e0,1e-20,\"a,b\"");
        assert_eq!(t.column("theta").unwrap(), vec![None, Some(1e-20)]);
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, std::f64::consts::PI, -1.234e-300, 6.02e23] {
            assert_eq!(Cell::Num(x).render().parse::<f64>().unwrap(), x);
        }
        assert_eq!(Cell::Num(f64::NAN).render(), "");
    }
}
