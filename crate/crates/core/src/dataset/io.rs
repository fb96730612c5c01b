use std::collections::BTreeMap;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{fmt17, Scalar};
use crate::series::{SeriesMeta, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesFormat {
    /// One value per line.
    Column,
    /// One comma-separated row.
    Row,
}

impl FromStr for SeriesFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "column" => Ok(SeriesFormat::Column),
            "row" | "csv" => Ok(SeriesFormat::Row),
            other => Err(Error::Usage(format!("unknown series format `{other}`"))),
        }
    }
}

fn parse_value<T: Scalar>(field: &str, line: usize) -> Result<T> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::Parse { line, msg: format!("`{}` is not a number", field.trim()) })?;
    if !v.is_finite() {
        return Err(Error::Parse { line, msg: format!("non-finite value `{}`", field.trim()) });
    }
    Ok(T::of(v))
}

fn is_skippable(line: &str) -> bool {
    let t = line.trim();
    t.is_empty() || t.starts_with('#')
}

/// Reads a single series. Blank lines and `#` comments are skipped; line numbers in errors are 1-based.
pub fn load_series<T: Scalar>(path: impl AsRef<Path>, format: SeriesFormat) -> Result<TimeSeries<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut samples = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        match format {
            SeriesFormat::Column => samples.push(parse_value(line, i + 1)?),
            SeriesFormat::Row => {
                for field in line.split(',') {
                    samples.push(parse_value(field, i + 1)?);
                }
            }
        }
    }
    if samples.is_empty() {
        return Err(Error::Length(format!("{} contains no samples", path.display())));
    }
    let name = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    Ok(TimeSeries::new(samples)?.with_meta(SeriesMeta::new(format!("file:{name}"))))
}

/// Writes a series one value per line at 17 significant digits.
pub fn save_series<T: Scalar>(path: impl AsRef<Path>, series: &TimeSeries<T>) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for &x in series.samples() {
        writeln!(w, "{}", fmt17(x))?;
    }
    w.flush()?;
    Ok(())
}

/// One row per series, no header.
pub fn write_matrix_csv<T: Scalar, S: AsRef<[T]>>(path: impl AsRef<Path>, rows: &[S]) -> Result<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    for row in rows {
        let line: Vec<String> = row.as_ref().iter().map(|&x| fmt17(x)).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

/// Reads equal-length rows written by [`write_matrix_csv`].
pub fn read_matrix_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<Vec<Vec<T>>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut rows: Vec<Vec<T>> = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if is_skippable(line) {
            continue;
        }
        let row = line.split(',').map(|f| parse_value(f, i + 1)).collect::<Result<Vec<T>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::Parse {
                    line: i + 1,
                    msg: format!("row has {} values, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Length(format!("{} contains no rows", path.display())));
    }
    Ok(rows)
}

/// Sidecar describing a realization CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationMeta {
    pub system: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    #[serde(rename = "L")]
    pub len: usize,
    #[serde(rename = "N")]
    pub count: usize,
    pub mode: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reads_column_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        fs::write(&p, "1\n2\n3\n").unwrap();
        let s: TimeSeries<f64> = load_series(&p, SeriesFormat::Column).unwrap();
        assert_eq!(s.samples(), &[1.0, 2.0, 3.0]);
    }

    #[test]
    fn reports_bad_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        fs::write(&p, "1\nabc\n3\n").unwrap();
        match load_series::<f64>(&p, SeriesFormat::Column) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_file_is_length_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        fs::write(&p, "\n\n").unwrap();
        assert!(matches!(load_series::<f64>(&p, SeriesFormat::Column), Err(Error::Length(_))));
    }

    #[test]
    fn row_format() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.csv");
        fs::write(&p, "0.5, -1, 2e3\n").unwrap();
        let s: TimeSeries<f64> = load_series(&p, SeriesFormat::Row).unwrap();
        assert_eq!(s.samples(), &[0.5, -1.0, 2000.0]);
    }

    #[test]
    fn ragged_matrix_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        fs::write(&p, "1,2,3\n4,5\n").unwrap();
        assert!(matches!(read_matrix_csv::<f64>(&p), Err(Error::Parse { line: 2, .. })));
    }

    proptest! {
        #[test]
        fn save_load_is_bit_exact(v in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..50)) {
            let dir = tempfile::tempdir().unwrap();
            let p = dir.path().join("s.txt");
            let s = TimeSeries::new(v.clone()).unwrap();
            save_series(&p, &s).unwrap();
            let back: TimeSeries<f64> = load_series(&p, SeriesFormat::Column).unwrap();
            let a: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
            let b: Vec<u64> = back.samples().iter().map(|x| x.to_bits()).collect();
            prop_assert_eq!(&a, &b);

            let m = dir.path().join("m.csv");
            write_matrix_csv(&m, &[v.clone(), v.clone()]).unwrap();
            let rows: Vec<Vec<f64>> = read_matrix_csv(&m).unwrap();
            prop_assert_eq!(rows[1].iter().map(|x| x.to_bits()).collect::<Vec<_>>(), a);
        }
    }
}
