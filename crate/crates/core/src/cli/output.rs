//! CSV and JSON writers, and the trace CSV reader.
//!
//! Every CSV has the header `probe_index,n,lambda_n,series_kind,value`.
//! Floats are written as `{:.16e}` (17 significant digits), which parses back
//! to the same `f64`. A trace is stored with three row kinds:
//!
//! | series_kind | probe_index | n                | value                  |
//! |-------------|-------------|------------------|------------------------|
//! | `probe`     | p           | coordinate index | coordinate             |
//! | `target`    | p           | 0                | `d(x_p, A)`            |
//! | `trace`     | p           | k                | `d(x_p, A_k)`          |
//!
//! Rows of any other kind are ignored when a trace is read back.

use std::collections::BTreeMap;
use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::metric_sets::{DistanceTrace, MetricPoint};
use crate::statistical::DensitySeries;
use crate::transforms::MeanSeries;

pub const CSV_HEADER: [&str; 5] = ["probe_index", "n", "lambda_n", "series_kind", "value"];

pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// One CSV record; empty cells are written as empty strings.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub probe: Option<usize>,
    pub n: Option<u64>,
    pub lambda_n: Option<u64>,
    pub kind: String,
    pub value: f64,
}

impl CsvRow {
    fn fields(&self) -> [String; 5] {
        let opt = |v: Option<u64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            opt(self.probe.map(|p| p as u64)),
            opt(self.n),
            opt(self.lambda_n),
            self.kind.clone(),
            fmt_f64(self.value),
        ]
    }
}

pub fn trace_rows(trace: &DistanceTrace) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for (p, x) in trace.probes().iter().enumerate() {
        for (i, c) in x.coords().iter().enumerate() {
            rows.push(CsvRow {
                probe: Some(p),
                n: Some(i as u64 + 1),
                lambda_n: None,
                kind: "probe".into(),
                value: *c,
            });
        }
    }
    if let Some(target) = trace.target_row() {
        for (p, &v) in target.iter().enumerate() {
            rows.push(CsvRow {
                probe: Some(p),
                n: Some(0),
                lambda_n: None,
                kind: "target".into(),
                value: v,
            });
        }
    }
    for (p, row) in trace.rows().iter().enumerate() {
        for (k, &v) in row.iter().enumerate() {
            rows.push(CsvRow {
                probe: Some(p),
                n: Some(k as u64 + 1),
                lambda_n: None,
                kind: "trace".into(),
                value: v,
            });
        }
    }
    rows
}

/// Rows of a mean series; `kind` overrides the series' own kind name.
pub fn series_rows(series: &MeanSeries, kind: Option<&str>) -> Vec<CsvRow> {
    let name = kind.map(str::to_string).unwrap_or_else(|| series.kind.name());
    let mut rows = Vec::new();
    for (p, vals) in series.values.iter().enumerate() {
        for (i, &v) in vals.iter().enumerate() {
            rows.push(CsvRow {
                probe: Some(p),
                n: Some(i as u64 + 1),
                lambda_n: Some(series.window_end[i]),
                kind: name.clone(),
                value: v,
            });
        }
    }
    rows
}

pub fn density_rows(density: &DensitySeries, kind: &str) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for (p, vals) in density.values.iter().enumerate() {
        for (i, &v) in vals.iter().enumerate() {
            rows.push(CsvRow {
                probe: Some(p),
                n: Some(i as u64 + 1),
                lambda_n: Some(density.window_end[i]),
                kind: kind.to_string(),
                value: v,
            });
        }
    }
    rows
}

pub fn write_csv(rows: &[CsvRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(CSV_HEADER).map_err(io_err)?;
    for r in rows {
        w.write_record(r.fields()).map_err(io_err)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Pretty JSON with every float written to 17 significant digits and
/// non-finite floats as `null`.
struct ExactFloats(PrettyFormatter<'static>);

impl Formatter for ExactFloats {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        w.write_all(fmt_f64(v).as_bytes())
    }
    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        self.write_f64(w, v as f64)
    }
    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + io::Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn write_json(value: &impl Serialize) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, ExactFloats(PrettyFormatter::new()));
    value
        .serialize(&mut ser)
        .map_err(|e| Error::Io(e.to_string()))?;
    buf.push(b'\n');
    Ok(buf)
}

/// Reads the `probe`, `target` and `trace` rows of a CSV back into a trace.
pub fn read_trace_csv(path: &Path) -> Result<DistanceTrace> {
    let text = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_trace_csv(&text)
}

pub fn parse_trace_csv(bytes: &[u8]) -> Result<DistanceTrace> {
    let mut rdr = csv::Reader::from_reader(bytes);
    let headers = rdr.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if headers.iter().collect::<Vec<_>>() != CSV_HEADER {
        return Err(Error::Parse(format!("unexpected CSV header {headers:?}")));
    }
    let mut coords: BTreeMap<usize, BTreeMap<u64, f64>> = BTreeMap::new();
    let mut target: BTreeMap<usize, f64> = BTreeMap::new();
    let mut values: BTreeMap<usize, BTreeMap<u64, f64>> = BTreeMap::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
        let bad = |what: &str| Error::Parse(format!("CSV record {}: bad {what}", line + 2));
        let kind = rec.get(3).ok_or_else(|| bad("series_kind"))?;
        if !matches!(kind, "probe" | "target" | "trace") {
            continue;
        }
        let probe: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| bad("probe_index"))?;
        let n: u64 = rec.get(1).and_then(|s| s.parse().ok()).ok_or_else(|| bad("n"))?;
        let value: f64 = rec.get(4).and_then(|s| s.parse().ok()).ok_or_else(|| bad("value"))?;
        let dup = match kind {
            "probe" => coords.entry(probe).or_default().insert(n, value).is_some(),
            "target" => target.insert(probe, value).is_some(),
            _ => values.entry(probe).or_default().insert(n, value).is_some(),
        };
        if dup {
            return Err(Error::Parse(format!("CSV record {}: duplicate {kind} entry", line + 2)));
        }
    }
    let dense = |m: &BTreeMap<u64, f64>, first: u64, what: &str| -> Result<Vec<f64>> {
        for (i, &k) in m.keys().enumerate() {
            if k != first + i as u64 {
                return Err(Error::InvalidTrace(format!("{what} indices are not contiguous")));
            }
        }
        Ok(m.values().copied().collect())
    };
    let np = values.len();
    if np == 0 || values.keys().copied().ne(0..np) || coords.keys().copied().ne(0..np) {
        return Err(Error::InvalidTrace("probe indices must be 0..P for probe and trace rows".into()));
    }
    let probes = coords
        .values()
        .map(|m| MetricPoint::new(dense(m, 1, "coordinate")?))
        .collect::<Result<Vec<_>>>()?;
    let rows = values
        .values()
        .map(|m| dense(m, 1, "trace"))
        .collect::<Result<Vec<_>>>()?;
    let target_row = if target.is_empty() {
        None
    } else if target.keys().copied().eq(0..np) {
        Some(target.values().copied().collect())
    } else {
        return Err(Error::InvalidTrace("target row must cover every probe".into()));
    };
    DistanceTrace::from_rows(probes, rows, target_row)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for v in [0.1, 1.0 / 3.0, 1e-300, 123456.789, 0.0, f64::MIN_POSITIVE] {
            assert_eq!(fmt_f64(v).parse::<f64>().unwrap(), v);
        }
    }

    #[test]
    fn json_floats() {
        let out = String::from_utf8(write_json(&serde_json::json!({"a": 0.5, "b": [1, f64::NAN]})).unwrap()).unwrap();
        assert!(out.contains("5.0000000000000000e-1"), "{out}");
        assert!(out.contains("null"));
        let back: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(back["a"], 0.5);
    }

    #[test]
    fn trace_round_trip() {
        let probes = vec![MetricPoint::new(vec![0.1, -2.0]).unwrap(), MetricPoint::new(vec![3.0, 1.0 / 7.0]).unwrap()];
        let rows = vec![vec![0.3, 1.0 / 3.0, 2.0], vec![5.0, 0.0, 1e-9]];
        let t = DistanceTrace::from_rows(probes, rows, Some(vec![0.25, 4.0])).unwrap();
        let bytes = write_csv(&trace_rows(&t)).unwrap();
        assert_eq!(parse_trace_csv(&bytes).unwrap(), t);
    }

    #[test]
    fn rejects_gaps() {
        let csv = "probe_index,n,lambda_n,series_kind,value\n0,1,,probe,0\n0,1,,trace,1\n0,3,,trace,1\n";
        assert!(parse_trace_csv(csv.as_bytes()).is_err());
        let csv = "a,b\n";
        assert!(parse_trace_csv(csv.as_bytes()).is_err());
    }
}
