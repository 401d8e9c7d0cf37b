//! Comma-separated tables with a `#`-prefixed provenance block.

use std::fmt::{self, Write as _};

/// One CSV field.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            Cell::Text(_) => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // shortest round-trip form, so the text reproduces the value exactly
            Cell::Num(v) => write!(f, "{v:e}"),
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Text(s) if s.contains([',', '"', '\n']) => write!(f, "\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

/// Rectangular table with unit-suffixed column names.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    /// Comment lines written before the header, without the `# ` prefix.
    pub comments: Vec<String>,
}

impl CsvTable {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self { name: name.into(), header: header.iter().map(|h| h.to_string()).collect(), ..Self::default() }
    }

    /// Appends a row; panics if the width differs from the header, since
    /// that is a programming error in the command that builds the table.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width must match header of {}", self.name);
        self.rows.push(row);
    }

    pub fn note(&mut self, line: impl Into<String>) {
        self.comments.push(line.into());
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Numeric values of one column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.column_index(name)?;
        self.rows.iter().map(|r| r[i].as_f64()).collect()
    }

    /// Table text after the shared provenance block.
    pub fn render_body(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# table: {}", self.name);
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let _ = writeln!(s, "{}", self.header.join(","));
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|c| c.to_string()).collect();
            let _ = writeln!(s, "{}", line.join(","));
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for v in [38.65299987691765, 1e-300, -0.0451593, 0.0] {
            let text = Cell::Num(v).to_string();
            assert_eq!(text.parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn text_is_quoted_when_needed() {
        assert_eq!(Cell::from("ok").to_string(), "ok");
        assert_eq!(Cell::from("a,b").to_string(), "\"a,b\"");
        assert_eq!(Cell::from("say \"x\", y").to_string(), "\"say \"\"x\"\", y\"");
    }

    #[test]
    fn body_layout() {
        let mut t = CsvTable::new("demo", &["x_cm", "status"]);
        t.note("hello");
        t.push(vec![1.5.into(), "ok".into()]);
        assert_eq!(t.render_body(), "# table: demo\n# hello\nx_cm,status\n1.5e0,ok\n");
        assert_eq!(t.column("x_cm"), Some(vec![1.5]));
        assert_eq!(t.column("status"), None);
    }

    #[test]
    #[should_panic]
    fn ragged_rows_are_rejected() {
        let mut t = CsvTable::new("demo", &["a", "b"]);
        t.push(vec![1.0.into()]);
    }
}
