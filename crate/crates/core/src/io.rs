//! CSV ingestion of return series and plot-ready CSV output.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::series::ReturnSeries;

/// Seventeen significant digits, enough to round-trip any `f64`.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Provenance recorded as the first line of every output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Provenance {
    pub seed: Option<u64>,
    pub config_hash: String,
}

impl Provenance {
    pub fn comment_line(&self) -> String {
        let seed = self.seed.map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# gjr-cogarch {} seed={} config={}",
            env!("CARGO_PKG_VERSION"),
            seed,
            self.config_hash
        )
    }
}

/// Reads a return series. A `time,value` header gives an irregular series;
/// a single `value` column needs `delta` and yields times `0, Δ, ..., NΔ`.
pub fn read_returns(path: &Path, delta: Option<f64>) -> Result<ReturnSeries> {
    read_returns_from(File::open(path)?, delta)
}

pub fn read_returns_from(reader: impl Read, delta: Option<f64>) -> Result<ReturnSeries> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let irregular = match header.as_slice() {
        [t, v] if t == "time" && v == "value" => true,
        [v] if v == "value" => false,
        _ => {
            return Err(Error::Ingest {
                row: 1,
                message: format!("expected header 'time,value' or 'value', got '{}'", header.join(",")),
            })
        }
    };
    if !irregular && delta.is_none() {
        return Err(Error::InvalidArgument("a 'value' column needs a sampling interval (--delta)".into()));
    }
    if let Some(d) = delta {
        if !(d > 0.0 && d.is_finite()) {
            return Err(Error::InvalidArgument(format!("delta must be positive, got {d}")));
        }
    }

    let width = header.len();
    let mut times: Vec<f64> = Vec::new();
    let mut values = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record?;
        // Header is row 1.
        let row = record.position().map_or(i + 2, |p| p.line() as usize);
        if record.len() != width {
            return Err(Error::Ingest { row, message: format!("expected {width} fields, got {}", record.len()) });
        }
        let field = |j: usize| -> Result<f64> {
            let s = &record[j];
            if s.is_empty() {
                return Err(Error::Ingest { row, message: "blank field".into() });
            }
            let v: f64 = s
                .parse()
                .map_err(|_| Error::Ingest { row, message: format!("malformed number '{s}'") })?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Ingest { row, message: format!("non-finite value '{s}'") })
            }
        };
        if irregular {
            let t = field(0)?;
            if let Some(&last) = times.last() {
                if !(t > last) {
                    return Err(Error::Ingest {
                        row,
                        message: format!("time {t} does not exceed previous time {last}"),
                    });
                }
            }
            times.push(t);
            values.push(field(1)?);
        } else {
            values.push(field(0)?);
        }
    }
    if irregular {
        // The first row only fixes the time origin; its return covers an
        // interval of unknown length.
        if !values.is_empty() {
            values.remove(0);
        }
        ReturnSeries::new(times, values)
    } else {
        ReturnSeries::equidistant(values, delta.expect("checked above"))
    }
}

/// Writes `rows` under a provenance comment and a column header.
pub fn write_csv(path: &Path, provenance: &Provenance, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv_to(&mut out, provenance, columns, rows)?;
    out.flush()?;
    Ok(())
}

pub fn write_csv_to(out: &mut impl Write, provenance: &Provenance, columns: &[&str], rows: &[Vec<f64>]) -> Result<()> {
    writeln!(out, "{}", provenance.comment_line())?;
    writeln!(out, "{}", columns.join(","))?;
    for row in rows {
        if row.len() != columns.len() {
            return Err(Error::InvalidArgument(format!(
                "row has {} fields, header has {}",
                row.len(),
                columns.len()
            )));
        }
        let line: Vec<String> = row.iter().map(|v| format_float(*v)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_times_are_rejected_with_row() {
        let text = "time,value\n0.0,0.1\n1.0,0.2\n1.0,0.3\n";
        match read_returns_from(text.as_bytes(), None) {
            Err(Error::Ingest { row, .. }) => assert_eq!(row, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn value_column_with_delta() {
        let text = "value\n0.1\n-0.2\n0.3\n";
        let s = read_returns_from(text.as_bytes(), Some(1.0)).unwrap();
        assert_eq!(s.times(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(s.returns(), &[0.1, -0.2, 0.3]);
        assert!(read_returns_from(text.as_bytes(), None).is_err());
    }

    #[test]
    fn irregular_file_uses_first_row_as_origin() {
        let text = "# comment\ntime,value\n0.5,0.0\n0.75,0.1\n2.0,-0.3\n";
        let s = read_returns_from(text.as_bytes(), None).unwrap();
        assert_eq!(s.times(), &[0.5, 0.75, 2.0]);
        assert_eq!(s.returns(), &[0.1, -0.3]);
    }

    #[test]
    fn blank_and_nan_rows_are_rejected() {
        for text in ["value\n0.1\n\"\"\n", "value\n0.1\nNaN\n", "value\n0.1\nabc\n"] {
            match read_returns_from(text.as_bytes(), Some(1.0)) {
                Err(Error::Ingest { row, .. }) => assert_eq!(row, 3, "{text}"),
                other => panic!("{text}: unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn file_round_trip_irregular() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("y.csv");
        let prov = Provenance { seed: None, config_hash: "0".into() };
        let rows = vec![vec![0.0, 0.0], vec![0.3, -1.5e-3], vec![1.7, 2.25e-2]];
        write_csv(&path, &prov, &["time", "value"], &rows).unwrap();
        let s = read_returns(&path, None).unwrap();
        assert_eq!(s.times(), &[0.0, 0.3, 1.7]);
        assert_eq!(s.returns(), &[-1.5e-3, 2.25e-2]);
        assert!(!s.is_equidistant());
        assert!(matches!(read_returns(&dir.path().join("missing.csv"), None), Err(Error::Io(_))));
    }

    #[test]
    fn seventeen_digit_round_trip() {
        let values: Vec<f64> = vec![0.1, 1.0 / 3.0, -2.5e-300, 123456789.123456789, f64::MIN_POSITIVE, -0.0];
        let prov = Provenance { seed: Some(1), config_hash: "abc".into() };
        let mut buf = Vec::new();
        let rows: Vec<Vec<f64>> = values.iter().map(|v| vec![*v]).collect();
        write_csv_to(&mut buf, &prov, &["value"], &rows).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("# gjr-cogarch "));
        let back = read_returns_from(text.as_bytes(), Some(1.0)).unwrap();
        for (a, b) in values.iter().zip(back.returns()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
