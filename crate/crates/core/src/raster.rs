//! Plain-text raster layers.
//!
//! The format is a stripped-down ESRI ASCII grid: the first line holds
//! `ncols nrows`, followed by `nrows` lines of `ncols` whitespace-separated
//! values in row-major order. Reals are written with six significant digits
//! using the shortest decimal text that parses back to the same value, so a
//! layer that was read from disk is written back byte-for-byte.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// Value written in output rasters for cells without a defined indicator.
pub const NODATA: f64 = -9999.0;

#[derive(Debug, Clone, PartialEq)]
pub struct AsciiGrid {
    pub n_rows: usize,
    pub n_cols: usize,
    pub values: Vec<f64>,
}

impl AsciiGrid {
    pub fn new(n_rows: usize, n_cols: usize, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), n_rows * n_cols, "raster size mismatch");
        AsciiGrid {
            n_rows,
            n_cols,
            values,
        }
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(path, 1, "empty raster"))?;
        let dims: Vec<&str> = header.split_whitespace().collect();
        if dims.len() != 2 {
            return Err(Error::parse(path, 1, "header must be `ncols nrows`"));
        }
        let parse_dim = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(path, 1, format!("bad dimension `{s}`")))
        };
        let n_cols = parse_dim(dims[0])?;
        let n_rows = parse_dim(dims[1])?;

        let mut values = Vec::with_capacity(n_rows * n_cols);
        let mut rows_seen = 0;
        for (lineno, line) in lines {
            let before = values.len();
            for tok in line.split_whitespace() {
                let v: f64 = tok
                    .parse()
                    .map_err(|_| Error::parse(path, lineno + 1, format!("bad value `{tok}`")))?;
                values.push(v);
            }
            if values.len() - before != n_cols {
                return Err(Error::parse(
                    path,
                    lineno + 1,
                    format!("expected {n_cols} values, found {}", values.len() - before),
                ));
            }
            rows_seen += 1;
        }
        if rows_seen != n_rows {
            return Err(Error::parse(
                path,
                rows_seen + 1,
                format!("expected {n_rows} rows, found {rows_seen}"),
            ));
        }
        Ok(AsciiGrid {
            n_rows,
            n_cols,
            values,
        })
    }

    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.values.len() * 8);
        out.push_str(&format!("{} {}\n", self.n_cols, self.n_rows));
        for row in self.values.chunks(self.n_cols.max(1)) {
            let line: Vec<String> = row.iter().map(|&v| format_sig6(v)).collect();
            out.push_str(&line.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(self.to_text().as_bytes())
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }
}

/// Rounds to six significant digits.
pub fn round_sig6(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.5e}").parse().expect("formatted float parses")
}

/// Six significant digits, shortest round-trip text.
pub fn format_sig6(v: f64) -> String {
    let r = round_sig6(v);
    if r == 0.0 {
        // avoid "-0"
        return "0".to_string();
    }
    format!("{r}")
}
