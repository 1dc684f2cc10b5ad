//! CSV and JSON writers for spectra and time series.
//!
//! Floats are written with 17 significant digits so output round-trips.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dynamics::TimeSeries;
use crate::error::Result;

/// Format a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumRow {
    pub p: u8,
    #[serde(rename = "M")]
    pub m: usize,
    /// Position in the ascending energy list of the block.
    pub l: usize,
    pub energy: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub energy_numeric: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumBlock {
    pub p: u8,
    #[serde(rename = "M")]
    pub m: usize,
    pub energies: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub energies_numeric: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub max_deviation: Option<f64>,
}

impl SpectrumBlock {
    pub fn rows(&self) -> impl Iterator<Item = SpectrumRow> + '_ {
        self.energies.iter().enumerate().map(move |(l, &energy)| SpectrumRow {
            p: self.p,
            m: self.m,
            l,
            energy,
            energy_numeric: self.energies_numeric.as_ref().map(|v| v[l]),
            max_deviation: self.max_deviation,
        })
    }
}

pub fn write_spectrum_csv<W: Write>(out: W, blocks: &[SpectrumBlock]) -> Result<()> {
    let both = blocks.iter().any(|b| b.energies_numeric.is_some());
    let mut w = csv::Writer::from_writer(out);
    if both {
        w.write_record(["p", "M", "l", "energy", "energy_numeric", "max_deviation"])?;
    } else {
        w.write_record(["p", "M", "l", "energy"])?;
    }
    for b in blocks {
        for r in b.rows() {
            let mut rec = vec![r.p.to_string(), r.m.to_string(), r.l.to_string(), fmt_f64(r.energy)];
            if both {
                rec.push(r.energy_numeric.map(fmt_f64).unwrap_or_default());
                rec.push(r.max_deviation.map(fmt_f64).unwrap_or_default());
            }
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_json<W: Write, M: Serialize>(mut out: W, meta: &M, blocks: &[SpectrumBlock]) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, M> {
        metadata: &'a M,
        blocks: &'a [SpectrumBlock],
    }
    serde_json::to_writer_pretty(&mut out, &Doc { metadata: meta, blocks })?;
    writeln!(out)?;
    Ok(())
}

pub fn write_time_series_csv<W: Write>(out: W, ts: &TimeSeries<f64>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "value_re", "value_im"])?;
    for (t, v) in ts.times.iter().zip(&ts.values) {
        w.write_record([fmt_f64(*t), fmt_f64(v.re), fmt_f64(v.im)])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_time_series_json<W: Write, M: Serialize>(mut out: W, meta: &M, ts: &TimeSeries<f64>) -> Result<()> {
    #[derive(Serialize)]
    struct Doc<'a, M> {
        metadata: &'a M,
        t: &'a [f64],
        value_re: Vec<f64>,
        value_im: Vec<f64>,
    }
    let doc = Doc {
        metadata: meta,
        t: &ts.times,
        value_re: ts.values.iter().map(|v| v.re).collect(),
        value_im: ts.values.iter().map(|v| v.im).collect(),
    };
    serde_json::to_writer_pretty(&mut out, &doc)?;
    writeln!(out)?;
    Ok(())
}

/// Parse a time-series CSV written by [`write_time_series_csv`].
pub fn read_time_series_csv<R: std::io::Read>(input: R) -> Result<TimeSeries<f64>> {
    let mut r = csv::Reader::from_reader(input);
    let mut times = Vec::new();
    let mut values = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .ok_or_else(|| crate::Error::Parse(format!("missing column {i}")))?
                .parse()
                .map_err(|e| crate::Error::Parse(format!("{e}")))
        };
        times.push(field(0)?);
        values.push(num_complex::Complex::new(field(1)?, field(2)?));
    }
    Ok(TimeSeries { times, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn floats_round_trip() {
        for x in [0.0, -2.0, 1.0 / 3.0, 1e-300, 6.02214076e23, -f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn spectrum_csv_layout() {
        let blocks = vec![SpectrumBlock { p: 0, m: 1, energies: vec![-1.0, 2.0], energies_numeric: None, max_deviation: None }];
        let mut buf = Vec::new();
        write_spectrum_csv(&mut buf, &blocks).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "p,M,l,energy");
        assert_eq!(lines.len(), 3);
        assert!(lines[2].starts_with("0,1,1,2.0"));
    }

    #[test]
    fn time_series_round_trip() {
        let ts = TimeSeries { times: vec![0.0, 0.5], values: vec![Complex::new(1.0, 0.0), Complex::new(0.25, -1e-17)] };
        let mut buf = Vec::new();
        write_time_series_csv(&mut buf, &ts).unwrap();
        assert!(buf.starts_with(b"t,value_re,value_im\n"));
        assert_eq!(read_time_series_csv(buf.as_slice()).unwrap(), ts);
    }

    #[test]
    fn json_has_metadata() {
        let ts = TimeSeries { times: vec![1.0], values: vec![Complex::new(2.0, 0.0)] };
        let mut buf = Vec::new();
        write_time_series_json(&mut buf, &serde_json::json!({"observable": "n1"}), &ts).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["metadata"]["observable"], "n1");
        assert_eq!(v["value_re"][0], 2.0);
    }
}
