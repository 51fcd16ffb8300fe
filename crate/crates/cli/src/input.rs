use std::path::Path;

use maglab_core::formal::parse_rational;
use maglab_core::space::{FiniteMetricSpace, RadialProfile, Selector};
use maglab_core::Error;
use nalgebra::DMatrix;
use num::complex::Complex64;
use num::BigRational;
use serde::Deserialize;

use crate::CliError;

pub fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| CliError::Parse(format!("{what}: `{s}` is not a finite number")))
}

fn split(s: &str, what: &str) -> Result<Vec<String>, CliError> {
    let items: Vec<String> = s.split(',').map(|t| t.trim().to_string()).collect();
    if items.iter().any(String::is_empty) {
        return Err(CliError::Parse(format!("{what}: empty entry in `{s}`")));
    }
    Ok(items)
}

/// `r1,r2,...` or `start:stop:count` (inclusive, evenly spaced).
pub fn parse_grid(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, count] => {
            let (a, b) = (parse_f64(start, what)?, parse_f64(stop, what)?);
            let n: usize = count
                .trim()
                .parse()
                .ok()
                .filter(|&n| n >= 1)
                .ok_or_else(|| CliError::Parse(format!("{what}: count `{count}` must be a positive integer")))?;
            if n == 1 {
                return Ok(vec![a]);
            }
            Ok((0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect())
        }
        [_] => split(s, what)?.iter().map(|t| parse_f64(t, what)).collect(),
        _ => Err(CliError::Parse(format!("{what}: `{s}` is neither a list nor start:stop:count"))),
    }
}

/// `a`, `bi`, `a+bi`, `a-bi` (also with `j` for the imaginary unit).
pub fn parse_complex(s: &str, what: &str) -> Result<Complex64, CliError> {
    let t = s.trim().replace(' ', "");
    let bad = || CliError::Parse(format!("{what}: `{s}` is not a complex number"));
    let Some(body) = t.strip_suffix(['i', 'j']) else {
        return Ok(Complex64::new(parse_f64(&t, what)?, 0.0));
    };
    let imag = |x: &str| -> Result<f64, CliError> {
        match x {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => parse_f64(x, what),
        }
    };
    // Split at the last sign that is not the leading one or part of an exponent.
    let bytes = body.as_bytes();
    let cut = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match cut {
        Some(k) => Ok(Complex64::new(parse_f64(&body[..k], what)?, imag(&body[k..])?)),
        None => Ok(Complex64::new(0.0, imag(body).map_err(|_| bad())?)),
    }
}

pub fn parse_complex_list(s: &str, what: &str) -> Result<Vec<Complex64>, CliError> {
    split(s, what)?.iter().map(|t| parse_complex(t, what)).collect()
}

pub fn parse_real_list(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    split(s, what)?.iter().map(|t| parse_f64(t, what)).collect()
}

pub fn parse_rational_list(s: &str, what: &str) -> Result<Vec<BigRational>, CliError> {
    split(s, what)?.iter().map(|t| parse_rat(t, what)).collect()
}

pub fn parse_rat(s: &str, what: &str) -> Result<BigRational, CliError> {
    parse_rational(s).map_err(|e| CliError::Parse(format!("{what}: {e}")))
}

pub type Interval = (f64, f64);

/// `a,b,c,d` as the rectangle `[a, b] x [c, d]`.
pub fn parse_rect(s: &str) -> Result<(Interval, Interval), CliError> {
    match parse_real_list(s, "--rect")?.as_slice() {
        &[a, b, c, d] => Ok(((a, b), (c, d))),
        _ => Err(CliError::Parse(format!("--rect: `{s}` needs four numbers re_lo,re_hi,im_lo,im_hi"))),
    }
}

/// `M,N` as two non-negative integers.
pub fn parse_depth(s: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    let parse = |t: &str| {
        t.trim()
            .parse::<usize>()
            .map_err(|_| CliError::Parse(format!("--depth: `{s}` needs two non-negative integers M,N")))
    };
    match parts.as_slice() {
        [m, n] => Ok((parse(m)?, parse(n)?)),
        _ => Err(CliError::Parse(format!("--depth: `{s}` needs two non-negative integers M,N"))),
    }
}

pub fn parse_selector(s: &str) -> Result<(Selector, RadialProfile), CliError> {
    let sel: Selector = s.parse().map_err(|e: Error| CliError::Parse(e.to_string()))?;
    Ok((sel, sel.profile()?))
}

#[derive(Debug, Deserialize)]
struct FiniteFile {
    labels: Option<Vec<String>>,
    dist: Option<Vec<Vec<f64>>>,
    measure: Option<Vec<f64>>,
}

/// Reads a JSON finite space file. Metric violations are returned as
/// warnings, or as a `MetricViolation` error when `strict`.
pub fn parse_finite_file(path: &Path, strict: bool) -> Result<(FiniteMetricSpace, Vec<String>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_finite_text(&text, strict)
}

pub fn parse_finite_text(text: &str, strict: bool) -> Result<(FiniteMetricSpace, Vec<String>), CliError> {
    let schema = |msg: String| CliError::Domain(Error::SchemaError(msg));
    let file: FiniteFile = serde_json::from_str(text).map_err(|e| schema(e.to_string()))?;
    let dist = file.dist.ok_or_else(|| schema("missing field `dist`".into()))?;
    let labels = file.labels.ok_or_else(|| schema("missing field `labels`".into()))?;
    let n = dist.len();
    if let Some((i, row)) = dist.iter().enumerate().find(|(_, row)| row.len() != n) {
        return Err(schema(format!("`dist` row {i} has {} entries, expected {n}", row.len())));
    }
    let matrix = DMatrix::from_row_iterator(n, n, dist.into_iter().flatten());
    let space = FiniteMetricSpace::new(labels, matrix, file.measure)?;
    let report = space.validate_metric();
    let warnings: Vec<String> = report.defects.iter().map(ToString::to_string).collect();
    if strict && !warnings.is_empty() {
        return Err(CliError::Domain(Error::MetricViolation(warnings.join("; "))));
    }
    Ok((space, warnings))
}

/// Default link tolerance: `MAGLAB_TOL` when set, else `1e-6`.
pub fn default_tol(env: Option<&str>) -> Result<f64, CliError> {
    match env {
        None => Ok(1e-6),
        Some(v) => parse_f64(v, "MAGLAB_TOL")
            .ok()
            .filter(|t| *t > 0.0)
            .ok_or_else(|| CliError::Parse(format!("MAGLAB_TOL: `{v}` is not a positive number"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_literals() {
        let c = |s| parse_complex(s, "z").unwrap();
        assert_eq!(c("-1"), Complex64::new(-1.0, 0.0));
        assert_eq!(c("2i"), Complex64::new(0.0, 2.0));
        assert_eq!(c("-i"), Complex64::new(0.0, -1.0));
        assert_eq!(c("0.5+2i"), Complex64::new(0.5, 2.0));
        assert_eq!(c("-1e-3-4.5i"), Complex64::new(-1e-3, -4.5));
        assert_eq!(c("1e+2+1e-1j"), Complex64::new(100.0, 0.1));
        assert!(parse_complex("1+", "z").is_err());
        assert!(parse_complex("abc", "z").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1,2.5", "R").unwrap(), vec![1.0, 2.5]);
        assert_eq!(parse_grid("0:1:3", "R").unwrap(), vec![0.0, 0.5, 1.0]);
        assert!(parse_grid("1,,2", "R").is_err());
        assert!(parse_grid("0:1:0", "R").is_err());
    }

    #[test]
    fn finite_files() {
        let (space, warnings) = parse_finite_text(r#"{"labels": ["a", "b"], "dist": [[0, 1], [1, 0]]}"#, true).unwrap();
        assert_eq!(space.dist()[(0, 1)], 1.0);
        assert!(warnings.is_empty());

        let missing = parse_finite_text(r#"{"labels": ["a"]}"#, false).unwrap_err();
        assert!(matches!(missing, CliError::Domain(Error::SchemaError(_))));

        let asym = r#"{"labels": ["a", "b"], "dist": [[0, 1], [2, 0]]}"#;
        let (_, warnings) = parse_finite_text(asym, false).unwrap();
        assert!(!warnings.is_empty());
        let strict = parse_finite_text(asym, true).unwrap_err();
        assert!(matches!(strict, CliError::Domain(Error::MetricViolation(_))));
    }

    #[test]
    fn tolerance_from_env() {
        assert_eq!(default_tol(None).unwrap(), 1e-6);
        assert_eq!(default_tol(Some("1e-4")).unwrap(), 1e-4);
        assert!(default_tol(Some("-1")).is_err());
    }
}
