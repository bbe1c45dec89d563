//! Result tables and their CSV form.
//!
//! Floats are written with `{:.16e}` (17 significant digits), so a value read
//! back parses to the same `f64`. Lines end in LF.

use std::fmt;
use std::io::Write;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Float(f64),
    Text(String),
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Int(i) => write!(f, "{i}"),
            Cell::Float(x) if x.is_nan() => f.write_str("NaN"),
            Cell::Float(x) if x.is_infinite() => f.write_str(if *x > 0.0 { "inf" } else { "-inf" }),
            Cell::Float(x) => write!(f, "{x:.16e}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(i: i64) -> Self {
        Cell::Int(i)
    }
}

impl From<u64> for Cell {
    fn from(i: u64) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Int(i64::from(b))
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

/// A header and rows of equal width.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    /// Rows whose `row` column equals `kind`.
    pub fn rows_of<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a [Cell]> + 'a {
        let col = self.column("row");
        self.rows
            .iter()
            .filter(move |r| col.is_some_and(|c| matches!(&r[c], Cell::Text(t) if t == kind)))
            .map(Vec::as_slice)
    }

    pub fn float(&self, row: &[Cell], name: &str) -> Option<f64> {
        match row.get(self.column(name)?)? {
            Cell::Float(x) => Some(*x),
            Cell::Int(i) => Some(*i as f64),
            Cell::Text(_) => None,
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(ToString::to_string))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_bytes(&self) -> Vec<u8> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        buf
    }
}

/// Appends the replicate rows of one parameter group followed by its `mean`
/// and `stderr` rows. Aggregate rows carry the replicate count in the
/// `replicate` column; an empty group adds nothing.
///
/// Columns: experiment, row, replicate, `fixed`…, `stats`….
pub fn push_replicate_group(table: &mut Table, experiment: &str, fixed: &[Cell], stats: &[Vec<f64>]) {
    let n = stats.len();
    for (r, s) in stats.iter().enumerate() {
        let mut row = vec![Cell::from(experiment), Cell::from("replicate"), Cell::from(r)];
        row.extend_from_slice(fixed);
        row.extend(s.iter().map(|&x| Cell::Float(x)));
        table.push(row);
    }
    if n == 0 {
        return;
    }
    let width = stats[0].len();
    let (means, ses): (Vec<f64>, Vec<f64>) = (0..width)
        .map(|j| {
            let col: Vec<f64> = stats.iter().map(|s| s[j]).collect();
            rwalks_core::stats::mean_se(&col)
        })
        .unzip();
    for (label, vals) in [("mean", means), ("stderr", ses)] {
        let mut row = vec![Cell::from(experiment), Cell::from(label), Cell::from(n)];
        row.extend_from_slice(fixed);
        row.extend(vals.into_iter().map(Cell::Float));
        table.push(row);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_through_text() {
        for x in [0.1, 1.0 / 3.0, 0.07321, -2.5e-300, 1e300, f64::MIN_POSITIVE] {
            let s = Cell::Float(x).to_string();
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(Cell::Float(0.5).to_string(), "5.0000000000000000e-1");
        assert_eq!(Cell::Float(f64::INFINITY).to_string(), "inf");
        assert_eq!(Cell::Float(f64::NAN).to_string(), "NaN");
        assert_eq!(Cell::from(true).to_string(), "1");
    }

    #[test]
    fn csv_uses_lf_and_quotes_when_needed() {
        let mut t = Table::new(["a", "b"]);
        t.push(vec![Cell::from("x,y"), Cell::from(2i64)]);
        let s = String::from_utf8(t.to_csv_bytes()).unwrap();
        assert_eq!(s, "a,b\n\"x,y\",2\n");
    }

    #[test]
    fn replicate_group_rows() {
        let mut t = Table::new(["experiment", "row", "replicate", "lambda", "speed"]);
        push_replicate_group(&mut t, "e", &[Cell::from(2.0)], &[vec![1.0], vec![3.0]]);
        assert_eq!(t.rows.len(), 4);
        let mean = t.rows_of("mean").next().unwrap();
        assert_eq!(t.float(mean, "speed"), Some(2.0));
        assert_eq!(t.float(mean, "replicate"), Some(2.0));
        let se = t.rows_of("stderr").next().unwrap();
        assert_eq!(t.float(se, "speed"), Some(1.0));
        let mut empty = Table::new(["experiment", "row", "replicate", "speed"]);
        push_replicate_group(&mut empty, "e", &[], &[]);
        assert!(empty.rows.is_empty());
    }

    #[test]
    #[should_panic(expected = "row width")]
    fn ragged_rows_are_rejected() {
        Table::new(["a"]).push(vec![]);
    }
}
