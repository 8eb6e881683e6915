//! Writes reports as CSV, JSON and gnuplot data.

use std::fmt::Write as _;
use std::io;
use std::path::{Path, PathBuf};

use crate::config::Format;
use crate::report::{Branches, Record, RunReport};

pub const CSV_HEADER: &str = "check_name,paper_anchor,lhs,rhs,pass,residual,seconds";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn csv(records: &[Record]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let fields = [
            csv_field(&r.check_name),
            csv_field(r.paper_anchor),
            csv_field(&r.lhs.to_string()),
            csv_field(&r.rhs.to_string()),
            r.pass.name().to_string(),
            opt(r.residual),
            opt(r.seconds),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn json(records: &[Record]) -> String {
    let mut s = serde_json::to_string_pretty(records).expect("records serialize");
    s.push('\n');
    s
}

/// `t` followed by one column per eigenvalue branch, `#` header line.
pub fn gnuplot(branches: Option<&Branches>) -> String {
    let k = branches.and_then(|b| b.values.first()).map_or(0, Vec::len);
    let mut out = String::from("# t");
    for i in 1..=k {
        let _ = write!(out, " lambda_{i}");
    }
    out.push('\n');
    if let Some(b) = branches {
        for (t, row) in b.times.iter().zip(&b.values) {
            let _ = write!(out, "{t:e}");
            for v in row {
                let _ = write!(out, " {v:e}");
            }
            out.push('\n');
        }
    }
    out
}

pub fn file_name(format: Format) -> &'static str {
    match format {
        Format::Csv => "report.csv",
        Format::Json => "report.json",
        Format::Gnuplot => "branches.dat",
    }
}

/// Writes the requested formats into `dir`, creating it if needed. Branch
/// data is written only when the report carries branches.
pub fn emit(report: &RunReport, formats: &[Format], dir: &Path) -> io::Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for &f in formats {
        let body = match f {
            Format::Csv => csv(&report.records),
            Format::Json => json(&report.records),
            Format::Gnuplot if report.branches.is_some() => gnuplot(report.branches.as_ref()),
            Format::Gnuplot => continue,
        };
        let path = dir.join(file_name(f));
        std::fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::Quantity;

    #[test]
    fn empty_report_has_headers_only() {
        assert_eq!(csv(&[]), format!("{CSV_HEADER}\n"));
        assert_eq!(json(&[]), "[]\n");
        assert_eq!(gnuplot(None), "# t\n");
    }

    #[test]
    fn csv_quotes_commas() {
        let r = Record::new("a", "x, y", Quantity::Ints(vec![1, 2]), 3i64, true).with_residual(0.5);
        assert_eq!(csv(&[r]).lines().nth(1).unwrap(), "a,\"x, y\",1;2,3,pass,5e-1,");
    }

    #[test]
    fn gnuplot_columns() {
        let b = Branches { times: vec![0.0, 1.0], values: vec![vec![-1.0, 2.0], vec![1.0, 2.0]] };
        let s = gnuplot(Some(&b));
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "# t lambda_1 lambda_2");
        assert_eq!(lines[2], "1e0 1e0 2e0");
    }
}
