//! CSV serialization of [`TimeSeries`].
//!
//! Format: optional `# key: value` metadata lines, then a header row of
//! `t` plus the channel names, then one comma-separated row per sample.
//! Values are written with full round-trip precision, so write-then-read
//! reproduces the series bit-exactly.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use indexmap::IndexMap;

use super::series::TimeSeries;
use crate::error::{Error, Result};

pub fn write_csv(series: &TimeSeries, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut writer = BufWriter::new(file);
    write_to(series, &mut writer).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn write_to(series: &TimeSeries, out: &mut impl Write) -> std::io::Result<()> {
    for (key, value) in &series.meta {
        writeln!(out, "# {key}: {value}")?;
    }
    let names = series.channel_names();
    writeln!(out, "t,{}", names.join(","))?;
    let mut row = String::new();
    for i in 0..series.len() {
        row.clear();
        push_value(&mut row, series.t()[i]);
        for &name in &names {
            row.push(',');
            push_value(&mut row, series.channel(name).unwrap()[i]);
        }
        writeln!(out, "{row}")?;
    }
    out.flush()
}

fn push_value(row: &mut String, value: f64) {
    use std::fmt::Write as _;
    // Rust's shortest round-trip formatting preserves f64 bit patterns.
    write!(row, "{value}").unwrap();
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<TimeSeries> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_from(BufReader::new(file), path)
}

pub fn read_from(reader: impl Read, path: &Path) -> Result<TimeSeries> {
    let parse_err = |line: usize, message: String| Error::CsvParse {
        path: path.to_path_buf(),
        line,
        message,
    };

    let mut meta = std::collections::BTreeMap::new();
    let mut header: Option<Vec<String>> = None;
    let mut t = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();

    for (idx, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if header.is_some() {
                return Err(parse_err(line_no, "metadata after the header row".into()));
            }
            if let Some((key, value)) = rest.split_once(':') {
                meta.insert(key.trim().to_string(), value.trim().to_string());
            }
            continue;
        }
        match &header {
            None => {
                let names: Vec<String> = trimmed.split(',').map(|s| s.trim().to_string()).collect();
                if names.first().map(String::as_str) != Some("t") {
                    return Err(parse_err(line_no, "header row must start with 't'".into()));
                }
                if names.len() < 2 {
                    return Err(parse_err(line_no, "header has no channels".into()));
                }
                columns = vec![Vec::new(); names.len() - 1];
                header = Some(names);
            }
            Some(names) => {
                let cells: Vec<&str> = trimmed.split(',').collect();
                if cells.len() != names.len() {
                    return Err(parse_err(
                        line_no,
                        format!("row has {} cells, expected {}", cells.len(), names.len()),
                    ));
                }
                for (col, cell) in cells.iter().enumerate() {
                    let value: f64 = cell.trim().parse().map_err(|_| {
                        parse_err(line_no, format!("cell '{}' is not a number", cell.trim()))
                    })?;
                    if col == 0 {
                        t.push(value);
                    } else {
                        columns[col - 1].push(value);
                    }
                }
            }
        }
    }

    let names = header.ok_or_else(|| parse_err(0, "file has no header row".into()))?;
    let mut channels = IndexMap::new();
    for (name, values) in names.into_iter().skip(1).zip(columns) {
        channels.insert(name, values);
    }
    let mut series = TimeSeries::new(t, channels)?;
    series.meta = meta;
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn simple_series() -> TimeSeries {
        let mut channels = IndexMap::new();
        channels.insert("u".to_string(), vec![1.5, -2.25, 1e-17]);
        channels.insert("v".to_string(), vec![0.1, 0.2, 0.3]);
        TimeSeries::new(vec![0.0, 0.01, 0.02], channels)
            .unwrap()
            .with_meta("source", "test")
    }

    #[test]
    fn round_trip_preserves_everything() {
        let series = simple_series();
        let mut buf = Vec::new();
        write_to(&series, &mut buf).unwrap();
        let back = read_from(buf.as_slice(), Path::new("mem")).unwrap();
        assert_eq!(series, back);
        assert_eq!(back.meta.get("source").map(String::as_str), Some("test"));
    }

    #[test]
    fn ragged_row_errors_with_line_number() {
        let text = "t,u\n0,1\n0.01,2,3\n";
        let err = read_from(text.as_bytes(), Path::new("mem")).unwrap_err();
        match err {
            Error::CsvParse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn non_numeric_cell_errors() {
        let text = "t,u\n0,hello\n";
        let err = read_from(text.as_bytes(), Path::new("mem")).unwrap_err();
        assert!(matches!(err, Error::CsvParse { line: 2, .. }));
    }

    #[test]
    fn missing_channels_errors() {
        let text = "t\n0\n";
        let err = read_from(text.as_bytes(), Path::new("mem")).unwrap_err();
        assert!(matches!(err, Error::CsvParse { .. }));
    }

    #[test]
    fn non_uniform_time_rejected_on_read() {
        let text = "t,u\n0,1\n0.01,2\n0.025,3\n";
        let err = read_from(text.as_bytes(), Path::new("mem")).unwrap_err();
        assert!(matches!(err, Error::NonUniformTime { .. }));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            values in proptest::collection::vec(-1e12..1e12f64, 2..40),
            dt in 1e-4..10.0f64,
        ) {
            let t: Vec<f64> = (0..values.len()).map(|i| i as f64 * dt).collect();
            let mut channels = IndexMap::new();
            channels.insert("ch".to_string(), values);
            let series = TimeSeries::new(t, channels).unwrap();
            let mut buf = Vec::new();
            write_to(&series, &mut buf).unwrap();
            let back = read_from(buf.as_slice(), Path::new("mem")).unwrap();
            prop_assert_eq!(series, back);
        }
    }
}
