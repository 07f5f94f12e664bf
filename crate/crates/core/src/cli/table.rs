//! CSV tables with fixed headers and 12-significant-digit reals.

use std::io::Write;

use crate::error::{Error, Result};

pub const ANALYZE_COLUMNS: [&str; 9] =
    ["design", "codes", "serve_counts", "per_file", "total", "mc_mean", "mc_ci", "trials", "seed"];
pub const OPTIMIZE_COLUMNS: [&str; 8] =
    ["design", "method", "guarantee", "certified_optimal", "codes", "serve_counts", "objective", "asymptotic_value"];
pub const SIMULATE_COLUMNS: [&str; 6] = ["design", "scope", "mc_mean", "mc_ci", "trials", "seed"];
pub const SWEEP_COLUMNS: [&str; 8] = ["variable", "value", "design", "objective", "mc_mean", "mc_ci", "trials", "seed"];

/// Twelve significant digits in scientific notation.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn parse_real(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse { line: 0, message: format!("not a number: `{s}`") })
}

pub fn join_codes(xs: &[u32]) -> String {
    xs.iter().map(u32::to_string).collect::<Vec<_>>().join(";")
}

pub fn join_reals(xs: &[f64]) -> String {
    xs.iter().map(|&x| fmt_real(x)).collect::<Vec<_>>().join(";")
}

pub fn split_codes(s: &str) -> Result<Vec<u32>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';')
        .map(|t| t.parse().map_err(|_| Error::Parse { line: 0, message: format!("not a code: `{t}`") }))
        .collect()
}

pub fn split_reals(s: &str) -> Result<Vec<f64>> {
    if s.is_empty() {
        return Ok(Vec::new());
    }
    s.split(';').map(parse_real).collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    Error::Parse { line, message: e.to_string() }
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table { headers: headers.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(row.len(), self.headers.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn get(&self, row: usize, name: &str) -> Option<&str> {
        Some(self.rows.get(row)?.get(self.column(name)?)?.as_str())
    }

    pub fn write<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(&self.headers).map_err(csv_err)?;
        for r in &self.rows {
            w.write_record(r).map_err(csv_err)?;
        }
        w.flush().map_err(|e| Error::Parse { line: 0, message: e.to_string() })
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("fields are UTF-8")
    }

    pub fn parse(text: &str) -> Result<Table> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let headers = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let rows = r
            .records()
            .map(|rec| rec.map(|rec| rec.iter().map(str::to_string).collect()).map_err(csv_err))
            .collect::<Result<Vec<Vec<String>>>>()?;
        Ok(Table { headers, rows })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reals_keep_twelve_digits() {
        assert_eq!(fmt_real(0.373_399_435_674_371_6), "3.73399435674e-1");
        assert_eq!(fmt_real(0.0), "0.00000000000e0");
        assert_eq!(fmt_real(1.0), "1.00000000000e0");
        let x = parse_real(&fmt_real(PI_ISH)).unwrap();
        assert_eq!(fmt_real(x), fmt_real(PI_ISH));
    }

    const PI_ISH: f64 = std::f64::consts::PI;

    #[test]
    fn lists_round_trip() {
        assert_eq!(split_codes(&join_codes(&[1, 0, 3])).unwrap(), vec![1, 0, 3]);
        assert_eq!(split_codes("").unwrap(), Vec::<u32>::new());
        let xs = [0.1, 0.25, 1e-9];
        let back = split_reals(&join_reals(&xs)).unwrap();
        assert_eq!(join_reals(&back), join_reals(&xs));
        assert!(split_codes("1;x").is_err());
    }

    #[test]
    fn table_round_trip() {
        let mut t = Table::new(&SWEEP_COLUMNS);
        t.push(vec!["file_size".into(), fmt_real(2e3), "rlnc-greedy".into(), fmt_real(0.78), String::new(), String::new(), "0".into(), String::new()]);
        t.push(vec!["warning".into(), "no seed given, using 0".into(), "baseline1".into(), String::new(), String::new(), String::new(), String::new(), "0".into()]);
        let text = t.to_csv();
        let back = Table::parse(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_csv(), text);
        assert_eq!(back.get(0, "design"), Some("rlnc-greedy"));
        assert_eq!(parse_real(back.get(0, "objective").unwrap()).unwrap(), 0.78);
    }
}
