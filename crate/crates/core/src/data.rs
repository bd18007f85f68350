//! Sampled experiment records and their CSV form.
//!
//! ```text
//! # schema=curvedata-v1
//! power_uw,signal,signal_err
//! 0,0.025,
//! ...
//! ```
//!
//! Units live in the column names. An empty `*_err` field means the curve
//! carries no per-point uncertainty; `NaN` in `y` marks a missing point.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_SCHEMA_LINE: &str = "# schema=curvedata-v1";

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurveMeta {
    pub experiment: String,
    pub seed: Option<u64>,
    pub shots: Option<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveData {
    /// Abscissa column name including its unit, e.g. `tau_ns`.
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub y_err: Option<Vec<f64>>,
    pub meta: CurveMeta,
}

impl CurveData {
    pub fn new(x_label: impl Into<String>, y_label: impl Into<String>, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self {
            x_label: x_label.into(),
            y_label: y_label.into(),
            x,
            y,
            y_err: None,
            meta: CurveMeta::default(),
        }
    }

    pub fn with_errors(mut self, y_err: Vec<f64>) -> Self {
        self.y_err = Some(y_err);
        self
    }

    pub fn with_meta(mut self, meta: CurveMeta) -> Self {
        self.meta = meta;
        self
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::Data(format!(
                "x has {} points but y has {}",
                self.x.len(),
                self.y.len()
            )));
        }
        if let Some(e) = &self.y_err {
            if e.len() != self.x.len() {
                return Err(Error::Data("y_err length differs from x".into()));
            }
            if e.iter().any(|v| !(*v >= 0.0)) {
                return Err(Error::Data("y_err must be >= 0".into()));
            }
        }
        Ok(())
    }

    /// Copy without points whose x or y is not finite.
    pub fn finite_points(&self) -> CurveData {
        let keep: Vec<usize> = (0..self.len())
            .filter(|&i| self.x[i].is_finite() && self.y[i].is_finite())
            .collect();
        CurveData {
            x_label: self.x_label.clone(),
            y_label: self.y_label.clone(),
            x: keep.iter().map(|&i| self.x[i]).collect(),
            y: keep.iter().map(|&i| self.y[i]).collect(),
            y_err: self
                .y_err
                .as_ref()
                .map(|e| keep.iter().map(|&i| e[i]).collect()),
            meta: self.meta.clone(),
        }
    }

    pub fn err_label(&self) -> String {
        format!("{}_err", self.y_label)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        self.validate()?;
        writeln!(out, "{CSV_SCHEMA_LINE}")?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record([self.x_label.as_str(), self.y_label.as_str(), self.err_label().as_str()])?;
        for i in 0..self.len() {
            let err = self
                .y_err
                .as_ref()
                .map(|e| fmt_f64(e[i]))
                .unwrap_or_default();
            w.write_record([fmt_f64(self.x[i]), fmt_f64(self.y[i]), err])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Data(e.to_string()))
    }

    pub fn read_csv<R: Read>(mut input: R) -> Result<Self> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let mut lines = text.splitn(2, '\n');
        let first = lines.next().unwrap_or("").trim_end_matches('\r');
        if first.trim() != CSV_SCHEMA_LINE {
            return Err(Error::Data(format!(
                "expected `{CSV_SCHEMA_LINE}` on the first line, found `{first}`"
            )));
        }
        let body = lines.next().unwrap_or("");
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(body.as_bytes());
        let headers = r.headers()?.clone();
        if headers.len() != 3 {
            return Err(Error::Data(format!("expected 3 columns, found {}", headers.len())));
        }
        let (mut x, mut y, mut e) = (Vec::new(), Vec::new(), Vec::new());
        let mut any_err = false;
        let mut all_err = true;
        for (row, rec) in r.records().enumerate() {
            let rec = rec?;
            let parse = |s: &str, col: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| Error::Data(format!("row {}: bad {col} value `{s}`", row + 1)))
            };
            x.push(parse(&rec[0], "x")?);
            y.push(parse(&rec[1], "y")?);
            if rec[2].is_empty() {
                all_err = false;
                e.push(0.0);
            } else {
                any_err = true;
                e.push(parse(&rec[2], "y_err")?);
            }
        }
        if any_err && !all_err {
            return Err(Error::Data("y_err must be given for every row or none".into()));
        }
        let data = CurveData {
            x_label: headers[0].to_string(),
            y_label: headers[1].to_string(),
            x,
            y,
            y_err: any_err.then_some(e),
            meta: CurveMeta::default(),
        };
        data.validate()?;
        Ok(data)
    }
}

/// Shortest round-trip decimal form; identical inputs give identical bytes.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else {
        format!("{v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn writes_schema_line_and_unit_headers() {
        let d = CurveData::new("tau_ns", "visibility", vec![0.0, 0.5], vec![1.0, f64::NAN])
            .with_errors(vec![0.01, 0.02]);
        let s = d.to_csv_string().unwrap();
        assert!(s.starts_with("# schema=curvedata-v1\ntau_ns,visibility,visibility_err\n"));
        assert!(s.contains("0.5,NaN,0.02"));
    }

    #[test]
    fn rejects_missing_schema_line() {
        assert!(CurveData::read_csv("x,y,y_err\n1,2,3\n".as_bytes()).is_err());
    }

    #[test]
    fn rejects_partial_errors_and_bad_lengths() {
        let text = "# schema=curvedata-v1\nx,y,y_err\n1,2,0.1\n2,3,\n";
        assert!(CurveData::read_csv(text.as_bytes()).is_err());
        let d = CurveData::new("x", "y", vec![1.0], vec![]);
        assert!(d.validate().is_err());
        let d = CurveData::new("x", "y", vec![1.0], vec![1.0]).with_errors(vec![-1.0]);
        assert!(d.validate().is_err());
    }

    proptest! {
        #[test]
        fn csv_round_trip(
            pts in proptest::collection::vec((-1e6f64..1e6, -1e6f64..1e6, 0f64..1e3), 1..50),
            with_err in any::<bool>(),
        ) {
            let mut d = CurveData::new(
                "power_uw",
                "signal",
                pts.iter().map(|p| p.0).collect(),
                pts.iter().map(|p| p.1).collect(),
            );
            if with_err {
                d = d.with_errors(pts.iter().map(|p| p.2).collect());
            }
            let back = CurveData::read_csv(d.to_csv_string().unwrap().as_bytes()).unwrap();
            prop_assert_eq!(back, d);
        }
    }
}
