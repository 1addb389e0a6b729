//! File formats: partition specs as JSON, point sets, boxes and tables as
//! CSV. Floats are written with 17 significant digits so every file parses
//! back to the same bits.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use thiserror::Error;

use crate::geometry::{AxisBox, GeometryError, PartitionSpec};
use crate::sampling::{PointSet, SamplingError};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File { path: String, source: std::io::Error },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("row {row}: cannot parse `{text}` as a number")]
    Number { row: usize, text: String },
    #[error("row {row}: expected {expected} fields, got {got}")]
    Width { row: usize, expected: usize, got: usize },
    #[error("box file header must have an even number of columns (lo1..lod, hi1..hid)")]
    BoxHeader,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Sampling(#[from] SamplingError),
}

/// Lossless text form of a float.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

pub fn open(path: &Path) -> Result<File, IoError> {
    File::open(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn create(path: &Path) -> Result<File, IoError> {
    File::create(path).map_err(|source| IoError::File {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_partition_spec<R: Read>(reader: R) -> Result<PartitionSpec, IoError> {
    Ok(serde_json::from_reader(reader)?)
}

pub fn write_partition_spec<W: Write>(spec: &PartitionSpec, writer: W) -> Result<(), IoError> {
    serde_json::to_writer_pretty(writer, spec)?;
    Ok(())
}

fn parse_row(record: &csv::StringRecord, row: usize, width: usize) -> Result<Vec<f64>, IoError> {
    if record.len() != width {
        return Err(IoError::Width {
            row,
            expected: width,
            got: record.len(),
        });
    }
    record
        .iter()
        .map(|t| {
            t.trim().parse::<f64>().map_err(|_| IoError::Number {
                row,
                text: t.to_string(),
            })
        })
        .collect()
}

/// Writes a table of numbers under `header`.
pub fn write_table<W: Write, S: AsRef<str>>(header: &[S], rows: &[Vec<f64>], writer: W) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(header.iter().map(AsRef::as_ref))?;
    for row in rows {
        w.write_record(row.iter().map(|x| fmt_f64(*x)))?;
    }
    w.flush().map_err(|source| IoError::File {
        path: "<csv>".into(),
        source,
    })?;
    Ok(())
}

/// Reads a numeric table, returning its header and rows.
pub fn read_table<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>), IoError> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        rows.push(parse_row(&rec?, i + 1, header.len())?);
    }
    Ok((header, rows))
}

/// CSV with header `x1,...,xd`, one point per row.
pub fn write_points<W: Write>(ps: &PointSet, writer: W) -> Result<(), IoError> {
    let header: Vec<String> = (1..=ps.dim()).map(|k| format!("x{k}")).collect();
    let rows: Vec<Vec<f64>> = ps.iter().map(<[f64]>::to_vec).collect();
    write_table(&header, &rows, writer)
}

pub fn read_points<R: Read>(reader: R) -> Result<PointSet, IoError> {
    let (header, rows) = read_table(reader)?;
    let mut coords = Vec::with_capacity(rows.len() * header.len());
    for row in rows {
        coords.extend(row);
    }
    Ok(PointSet::new(header.len(), coords)?)
}

/// CSV with header `lo1,...,lod,hi1,...,hid`, one box per row.
pub fn read_boxes<R: Read>(reader: R) -> Result<Vec<AxisBox>, IoError> {
    let (header, rows) = read_table(reader)?;
    if header.is_empty() || header.len() % 2 != 0 {
        return Err(IoError::BoxHeader);
    }
    let d = header.len() / 2;
    rows.into_iter()
        .map(|r| Ok(AxisBox::new(r[..d].to_vec(), r[d..].to_vec())?))
        .collect()
}

pub fn write_boxes<W: Write>(boxes: &[AxisBox], writer: W) -> Result<(), IoError> {
    let d = boxes.first().map_or(0, AxisBox::dim);
    let header: Vec<String> = (1..=d)
        .map(|k| format!("lo{k}"))
        .chain((1..=d).map(|k| format!("hi{k}")))
        .collect();
    let rows: Vec<Vec<f64>> = boxes.iter().map(|b| [b.lo(), b.hi()].concat()).collect();
    write_table(&header, &rows, writer)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Family;

    #[test]
    fn points_round_trip_bitwise() {
        let ps = PointSet::new(2, vec![0.1, 1.0 / 3.0, 0.999_999_999_999_999_9, 2f64.sqrt() / 2.0]).unwrap();
        let mut buf = Vec::new();
        write_points(&ps, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x1,x2\n"));
        let back = read_points(&buf[..]).unwrap();
        assert_eq!(back.coords(), ps.coords());
    }

    #[test]
    fn spec_round_trip() {
        let spec = PartitionSpec::diag(vec![0.530_900_123_456_789, 1.070_55]);
        let mut buf = Vec::new();
        write_partition_spec(&spec, &mut buf).unwrap();
        assert_eq!(read_partition_spec(&buf[..]).unwrap(), spec);
        let spec: PartitionSpec = serde_json::from_str(r#"{"family":"jittered","dim":2,"n":16}"#).unwrap();
        assert_eq!(spec.family, Family::Jittered);
    }

    #[test]
    fn boxes_round_trip() {
        let boxes = vec![
            AxisBox::new(vec![0.0, 0.1], vec![0.5, 0.7]).unwrap(),
            AxisBox::new(vec![0.25, 0.25], vec![1.0, 1.0]).unwrap(),
        ];
        let mut buf = Vec::new();
        write_boxes(&boxes, &mut buf).unwrap();
        assert_eq!(read_boxes(&buf[..]).unwrap(), boxes);
        assert!(matches!(
            read_boxes(&b"lo1,lo2,hi1\n0,0,1\n"[..]),
            Err(IoError::BoxHeader)
        ));
    }

    #[test]
    fn bad_numbers_are_reported() {
        let err = read_points(&b"x1,x2\n0.1,abc\n"[..]).unwrap_err();
        assert!(err.to_string().contains("abc"));
    }
}
