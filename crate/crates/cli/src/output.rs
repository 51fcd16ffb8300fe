use std::io;

use num::complex::Complex64;
use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};
use serde_json::Value;

use crate::CliError;

/// Result of one subcommand: a JSON document and its flat table for CSV.
#[derive(Debug, Clone)]
pub struct Artifact {
    pub json: Value,
    pub table: Table,
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Table {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

impl Artifact {
    pub fn new<T: Serialize>(doc: &T, table: Table) -> Result<Self, CliError> {
        let json = serde_json::to_value(doc).map_err(|e| CliError::Io(e.to_string()))?;
        Ok(Artifact { json, table })
    }
}

/// 17 significant digits.
pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComplexOut {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexOut {
    fn from(z: Complex64) -> Self {
        ComplexOut { re: z.re, im: z.im }
    }
}

/// Compact JSON with every float written to 17 significant digits.
struct FixedDigits(CompactFormatter);

impl Formatter for FixedDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(num(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }
}

pub fn to_json(value: &Value) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedDigits(CompactFormatter));
    value.serialize(&mut ser).expect("serializing a JSON value into memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn to_csv(table: &Table) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(&table.headers).map_err(io_err)?;
    for row in &table.rows {
        w.write_record(row).map_err(io_err)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("CSV of UTF-8 fields is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(num(1.0), "1.0000000000000000e0");
        assert_eq!(num(std::f64::consts::E), "2.7182818284590451e0");
        let doc = json!({"b": 0.1, "a": [1, -2.5]});
        assert_eq!(to_json(&doc), "{\"b\":1.0000000000000001e-1,\"a\":[1,-2.5000000000000000e0]}\n");
    }

    #[test]
    fn json_floats_round_trip() {
        for x in [std::f64::consts::PI, -1e-300, 6.02e23, 5e-324] {
            let back: f64 = serde_json::from_str(to_json(&json!(x)).trim()).unwrap();
            assert_eq!(back, x);
        }
    }

    #[test]
    fn csv_quotes_fields() {
        let mut t = Table::new(&["j", "g"]);
        t.push(vec!["2".into(), "a, b".into()]);
        assert_eq!(to_csv(&t).unwrap(), "j,g\n2,\"a, b\"\n");
    }
}
