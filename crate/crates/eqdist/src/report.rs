//! Shared reporting plumbing: bound-audit records, experiment reports, and
//! deterministic CSV / JSON serialization.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_complex::Complex64;

/// Outcome of comparing a computed sum against an explicit bound formula.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub actual: Complex64,
    pub actual_abs: f64,
    pub bound: f64,
    /// `actual_abs / bound` when the bound is positive, NaN otherwise.
    pub ratio: f64,
    /// Identifier of the bound formula used for the comparison.
    pub bound_formula: &'static str,
}

impl BoundReport {
    pub fn new(actual: Complex64, bound: f64, bound_formula: &'static str) -> Self {
        let actual_abs = actual.norm();
        let ratio = if bound > 0.0 { actual_abs / bound } else { f64::NAN };
        BoundReport { actual, actual_abs, bound, ratio, bound_formula }
    }
}

/// A deterministic, serializable experiment result.
#[derive(Debug, Clone, Default)]
pub struct ExperimentReport {
    /// Config echo and versions; kept in insertion order.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: BTreeMap<String, String>,
}

impl ExperimentReport {
    pub fn new(kind: &str) -> Self {
        let mut r = ExperimentReport::default();
        r.meta.push(("kind".into(), kind.into()));
        r.meta.push(("version".into(), env!("CARGO_PKG_VERSION").into()));
        r
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn summary(&mut self, key: &str, value: impl ToString) {
        self.summary.insert(key.into(), value.to_string());
    }

    /// CSV: header row, data rows, then `# summary` comment lines.
    /// Deterministic given the report contents (no timestamps).
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&csv_line(&self.columns));
        for row in &self.rows {
            out.push_str(&csv_line(row));
        }
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out
    }

    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n  \"meta\": {");
        for (i, (k, v)) in self.meta.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "\n    {}: {}", json_string(k), json_string(v));
        }
        out.push_str("\n  },\n  \"rows\": [");
        for (i, row) in self.rows.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str("\n    {");
            for (j, (col, val)) in self.columns.iter().zip(row.iter()).enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}: {}", json_string(col), json_value(val));
            }
            out.push('}');
        }
        out.push_str("\n  ],\n  \"summary\": {");
        for (i, (k, v)) in self.summary.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            let _ = write!(out, "\n    {}: {}", json_string(k), json_value(v));
        }
        out.push_str("\n  }\n}\n");
        out
    }
}

fn csv_line(fields: &[impl AsRef<str>]) -> String {
    let mut out = String::new();
    for (i, f) in fields.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        out.push_str(&csv_field(f.as_ref()));
    }
    out.push('\n');
    out
}

/// RFC 4180 quoting: quote when the field holds a comma, quote or newline.
fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub(crate) fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\r' => out.push_str("\\r"),
            '\t' => out.push_str("\\t"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

/// Emit bare finite numbers as JSON numbers, everything else as strings.
pub(crate) fn json_value(s: &str) -> String {
    let numeric = !s.is_empty()
        && s.parse::<f64>().map(|v| v.is_finite()).unwrap_or(false)
        && !s.eq_ignore_ascii_case("nan");
    if numeric {
        s.to_string()
    } else {
        json_string(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_quotes_only_when_needed() {
        let mut r = ExperimentReport::new("t");
        r.columns = vec!["a".into(), "b".into()];
        r.rows.push(vec!["1".into(), "x,y".into()]);
        r.summary.insert("max".into(), "2".into());
        let csv = r.to_csv();
        assert_eq!(csv, "a,b\n1,\"x,y\"\n# max = 2\n");
    }

    #[test]
    fn json_escapes_strings() {
        assert_eq!(json_string("a\"b"), "\"a\\\"b\"");
        assert_eq!(json_value("1.5"), "1.5");
        assert_eq!(json_value("nan"), "\"nan\"");
    }

    #[test]
    fn bound_report_ratio() {
        let r = BoundReport::new(Complex64::new(3.0, 4.0), 10.0, "test");
        assert!((r.actual_abs - 5.0).abs() < 1e-15);
        assert!((r.ratio - 0.5).abs() < 1e-15);
        let nan = BoundReport::new(Complex64::new(1.0, 0.0), 0.0, "test");
        assert!(nan.ratio.is_nan());
    }
}
