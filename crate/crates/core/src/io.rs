//! File formats.
//!
//! Binary: `QHSF`, a little-endian `u32` header length, a JSON header, then
//! the values as little-endian `f64` in row-major order (axis 0 slowest).
//! CSV: a `# {json header}` line, a column header line, one row per sample.

use crate::calculus::{GridField, GridSpec, RadialProfile};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

const MAGIC: &[u8; 4] = b"QHSF";

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Metadata stored ahead of the samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub kind: String,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub valid_margin: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ds: Option<f64>,
    pub ordering: String,
    pub version: String,
    #[serde(default)]
    pub meta: Map<String, Value>,
}

impl Header {
    pub fn grid(kind: &str, field: &GridField) -> Self {
        Self {
            kind: kind.into(),
            n: field.spec().n,
            grid: Some(field.spec().clone()),
            valid_margin: field.valid_margin(),
            ds: None,
            ordering: "row-major, axis 0 slowest".into(),
            version: VERSION.into(),
            meta: Map::new(),
        }
    }

    pub fn radial(p: &RadialProfile) -> Self {
        Self {
            kind: "radial".into(),
            n: p.n,
            grid: None,
            valid_margin: 0,
            ds: Some(p.ds),
            ordering: "increasing radius".into(),
            version: VERSION.into(),
            meta: Map::new(),
        }
    }

    /// Header for a table of derived values.
    pub fn table(kind: &str, n: usize) -> Self {
        Self {
            kind: kind.into(),
            n,
            grid: None,
            valid_margin: 0,
            ds: None,
            ordering: "row per case".into(),
            version: VERSION.into(),
            meta: Map::new(),
        }
    }

    pub fn with_meta(mut self, meta: Map<String, Value>) -> Self {
        self.meta.extend(meta);
        self
    }
}

pub fn write_binary<W: Write>(mut w: W, header: &Header, values: &[f64]) -> Result<()> {
    let json = serde_json::to_vec(header).map_err(|e| Error::Format(e.to_string()))?;
    w.write_all(MAGIC)?;
    w.write_all(&(json.len() as u32).to_le_bytes())?;
    w.write_all(&json)?;
    let mut buf = Vec::with_capacity(values.len() * 8);
    for v in values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<(Header, Vec<f64>)> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("not a field file (bad magic)".into()));
    }
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    r.read_exact(&mut json)?;
    let header: Header = serde_json::from_slice(&json).map_err(|e| Error::Format(format!("header: {e}")))?;
    let mut raw = Vec::new();
    r.read_to_end(&mut raw)?;
    if raw.len() % 8 != 0 {
        return Err(Error::Format("payload is not a whole number of f64 values".into()));
    }
    let values = raw.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes"))).collect();
    Ok((header, values))
}

/// CSV with a JSON comment line; values are written in shortest round-trip form.
pub fn write_csv<W: Write>(w: W, header: &Header, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = std::io::BufWriter::new(w);
    let json = serde_json::to_string(header).map_err(|e| Error::Format(e.to_string()))?;
    writeln!(w, "# {json}")?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(columns).map_err(csv_err)?;
    for row in rows {
        csv.write_record(row.iter().map(|v| format!("{v:?}"))).map_err(csv_err)?;
    }
    csv.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn read_csv<R: Read>(r: R) -> Result<(Header, Vec<String>, Vec<Vec<f64>>)> {
    let mut r = BufReader::new(r);
    let mut first = String::new();
    r.read_line(&mut first)?;
    let json = first.strip_prefix("# ").ok_or_else(|| Error::Format("missing JSON header line".into()))?;
    let header: Header = serde_json::from_str(json.trim_end()).map_err(|e| Error::Format(format!("header: {e}")))?;
    let mut csv = csv::Reader::from_reader(r);
    let columns = csv.headers().map_err(csv_err)?.iter().map(String::from).collect();
    let mut rows = Vec::new();
    for (i, rec) in csv.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let row = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|e| Error::Format(format!("row {}: {e}", i + 2))))
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    Ok((header, columns, rows))
}

fn grid_from(header: &Header, values: Vec<f64>) -> Result<GridField> {
    let spec = header.grid.clone().ok_or_else(|| Error::Format("header has no grid".into()))?;
    let spec = GridSpec::new(spec.n, spec.half_width, spec.points)?;
    GridField::with_margin(spec, values, header.valid_margin)
}

pub fn save_grid(path: &Path, field: &GridField, header: &Header) -> Result<()> {
    let file = std::fs::File::create(path)?;
    if is_csv(path) {
        let rows: Vec<Vec<f64>> = field.values().iter().map(|&v| vec![v]).collect();
        write_csv(file, header, &["value"], &rows)
    } else {
        write_binary(std::io::BufWriter::new(file), header, field.values())
    }
}

pub fn load_grid(path: &Path) -> Result<(GridField, Header)> {
    let file = std::fs::File::open(path)?;
    let (header, values) = if is_csv(path) {
        let (h, _, rows) = read_csv(file)?;
        let values = rows.into_iter().map(|r| r.first().copied().ok_or_else(|| Error::Format("empty row".into()))).collect::<Result<_>>()?;
        (h, values)
    } else {
        read_binary(BufReader::new(file))?
    };
    Ok((grid_from(&header, values)?, header))
}

pub fn save_profile(path: &Path, p: &RadialProfile, header: &Header, extra: &[(&str, Vec<f64>)]) -> Result<()> {
    let mut columns = vec!["s", "u"];
    columns.extend(extra.iter().map(|(c, _)| *c));
    let rows: Vec<Vec<f64>> = (0..p.values.len())
        .map(|k| {
            let mut row = vec![p.radius(k), p.values[k]];
            row.extend(extra.iter().map(|(_, v)| v.get(k).copied().unwrap_or(f64::NAN)));
            row
        })
        .collect();
    write_csv(std::fs::File::create(path)?, header, &columns, &rows)
}

pub fn load_profile(path: &Path) -> Result<RadialProfile> {
    let (h, columns, rows) = read_csv(std::fs::File::open(path)?)?;
    let col = columns.iter().position(|c| c == "u").ok_or_else(|| Error::Format("no `u` column".into()))?;
    let ds = h.ds.ok_or_else(|| Error::Format("header has no radial step".into()))?;
    RadialProfile::new(h.n, ds, rows.iter().map(|r| r[col]).collect())
}

fn is_csv(path: &Path) -> bool {
    path.extension().map(|e| e.eq_ignore_ascii_case("csv")).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let spec = GridSpec::new(1, 1.0, 5).unwrap();
        let f = GridField::sample(&spec, |x| x[0].sin() * 1e-300 + x[3] / 3.0).unwrap();
        let mut buf = Vec::new();
        write_binary(&mut buf, &Header::grid("field", &f), f.values()).unwrap();
        let (h, v) = read_binary(buf.as_slice()).unwrap();
        assert_eq!(grid_from(&h, v).unwrap(), f);
        assert!(read_binary(&b"nope"[..]).is_err());
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let p = RadialProfile::sample(2, 1.0, 7, |s| (s * 1.7).exp() / 3.0).unwrap();
        let mut buf = Vec::new();
        let rows: Vec<Vec<f64>> = p.values.iter().map(|&v| vec![v]).collect();
        write_csv(&mut buf, &Header::radial(&p), &["u"], &rows).unwrap();
        let (h, cols, back) = read_csv(buf.as_slice()).unwrap();
        assert_eq!(cols, vec!["u"]);
        assert_eq!(h.ds, Some(p.ds));
        assert_eq!(back.iter().map(|r| r[0]).collect::<Vec<_>>(), p.values);
    }
}
