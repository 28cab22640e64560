//! Tabular output shared by the CLI and the Python bindings: CSV with six
//! significant digits, JSON with twelve and a versioned envelope.

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gap_lab::{GapReport, JointTables, GAP_COLUMNS};

pub const SCHEMA_VERSION: u32 = 1;
pub const CSV_DIGITS: usize = 6;
pub const JSON_DIGITS: usize = 12;

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().unwrap_or(x)
}

/// CSV field: `digits` significant digits, `nan`/`inf`/`-inf` for non-finite values.
pub fn csv_number(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        let r = round_sig(x, CSV_DIGITS);
        if r != 0.0 && (r.abs() < 1e-4 || r.abs() >= 1e15) {
            format!("{r:e}")
        } else {
            format!("{r}")
        }
    }
}

/// JSON number with twelve significant digits; non-finite values become `null`.
pub fn json_number(x: f64) -> Value {
    if x.is_finite() {
        json!(round_sig(x, JSON_DIGITS))
    } else {
        Value::Null
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Bool(bool),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => csv_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
            Cell::Text(t) => t.clone(),
            Cell::Bool(b) => b.to_string(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => json_number(*x),
            Cell::Int(i) => json!(i),
            Cell::Text(t) => json!(t),
            Cell::Bool(b) => json!(b),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(x: u64) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<i32> for Cell {
    fn from(x: i32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

/// A named-column table of one result kind.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub kind: String,
    pub params: Value,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(kind: &str, params: impl Serialize, columns: &[&str]) -> Result<Self> {
        let params = serde_json::to_value(params).map_err(|e| Error::Numerical(format!("params: {e}")))?;
        Ok(Self { kind: kind.into(), params, columns: columns.iter().map(|c| c.to_string()).collect(), rows: vec![] })
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match the header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.columns.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.iter().map(Cell::csv).collect::<Vec<_>>().join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "schema_version": SCHEMA_VERSION,
            "kind": self.kind,
            "params": self.params,
            "columns": self.columns,
            "rows": self.rows.iter().map(|r| r.iter().map(Cell::json).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("json values always serialise")
    }
}

/// Gap sweep as a table with the columns of [`GAP_COLUMNS`].
pub fn gap_table(report: &GapReport) -> Result<Table> {
    let params = json!({
        "a": report.params.econ.a,
        "b": report.params.econ.b,
        "d": report.params.econ.d,
        "eta": report.params.eta,
        "gamma_eval": report.params.gamma_eval,
        "gamma_lo": report.params.interval.lo,
        "gamma_hi": report.params.interval.hi,
        "gamma_0": json_number(report.gamma_0),
    });
    let mut t = Table::new("gap_sweep", params, &GAP_COLUMNS)?;
    for r in &report.rows {
        let mut row = vec![Cell::from(r.s)];
        row.extend(r.values()[1..].iter().map(|&v| Cell::Num(v)));
        t.push(row);
    }
    Ok(t)
}

/// One row per ratio pair of the joint tables.
pub fn joint_table(tables: &JointTables) -> Result<Table> {
    let cols = [
        "r1", "r2", "gamma_opt", "eta_opt", "value", "gamma_inf", "value_inf", "gamma_ratio", "pct_improvement",
        "at_boundary",
    ];
    let mut t = Table::new("joint_table", json!({}), &cols)?;
    for cell in tables.cells.iter().flatten() {
        let r = &cell.result;
        t.push(vec![
            cell.r1.into(),
            cell.r2.into(),
            r.joint.gamma.into(),
            r.joint.eta.into(),
            r.joint.value.into(),
            r.gamma_inf.into(),
            r.value_inf.into(),
            r.gamma_ratio.into(),
            r.pct_improvement.into(),
            r.joint.at_boundary.into(),
        ]);
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(round_sig(0.000123456789, 6), 0.000123457);
        assert_eq!(round_sig(-123456789.0, 6), -123457000.0);
        assert_eq!(csv_number(1.0 / 3.0), "0.333333");
        assert_eq!(csv_number(f64::NAN), "nan");
        assert_eq!(csv_number(7.692934e-9), "7.69293e-9");
        assert_eq!(csv_number(f64::NEG_INFINITY), "-inf");
        assert_eq!(json_number(f64::INFINITY), Value::Null);
        assert_eq!(json_number(0.1234567890123456), json!(0.123456789012));
    }

    #[test]
    fn csv_and_json_layout() {
        let mut t = Table::new("demo", json!({"s": 10}), &["s", "x", "label"]).unwrap();
        t.push(vec![10u64.into(), 0.5.into(), "a,b".into()]);
        t.push(vec![11u64.into(), f64::NAN.into(), "c".into()]);
        assert_eq!(t.to_csv(), "s,x,label\n10,0.5,\"a,b\"\n11,nan,c\n");
        let v = t.to_json_value();
        assert_eq!(v["schema_version"], json!(SCHEMA_VERSION));
        assert_eq!(v["kind"], json!("demo"));
        assert_eq!(v["rows"][1][1], Value::Null);
        assert_eq!(v["params"]["s"], json!(10));
    }
}
