//! Scattered-sample CSV ingestion.
//!
//! Header `x1,...,xm,f,g1,...,gm`, one row per sample. Coordinates and
//! gradients are expected in cube coordinates already; scaling raw data to
//! the cube (and pulling gradients back through it) is the caller's job.

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{PointM, SamplePoint, SampleSet};

impl SampleSet {
    pub fn read_csv_file(path: &Path) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?)
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let reader = BufReader::new(reader);
        let mut lines = reader.lines().enumerate();

        let (_, header) = lines.next().ok_or(Error::Csv {
            line: 1,
            msg: "missing header".into(),
        })?;
        let header = header?;
        let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
        let dim = parse_header(&cols).ok_or_else(|| Error::Csv {
            line: 1,
            msg: format!(
                "expected header x1,...,xm,f,g1,...,gm, got '{}'",
                header.trim()
            ),
        })?;

        let mut samples = Vec::new();
        for (i, line) in lines {
            let line_no = i + 1;
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if fields.len() != 2 * dim + 1 {
                return Err(Error::Csv {
                    line: line_no,
                    msg: format!("expected {} fields, got {}", 2 * dim + 1, fields.len()),
                });
            }
            let mut nums = Vec::with_capacity(fields.len());
            for f in &fields {
                nums.push(f.parse::<f64>().map_err(|_| Error::Csv {
                    line: line_no,
                    msg: format!("cannot parse '{f}' as a number"),
                })?);
            }
            let coords = nums[..dim].to_vec();
            for (axis, &c) in coords.iter().enumerate() {
                if !c.is_finite() || c.abs() > 1.0 + 1e-12 {
                    return Err(Error::Csv {
                        line: line_no,
                        msg: format!("coordinate x{} = {c} outside [-1, 1]", axis + 1),
                    });
                }
            }
            let value = nums[dim];
            let gradient = nums[dim + 1..].to_vec();
            samples.push(SamplePoint::new(PointM::new(coords), value, gradient)?);
        }
        Self::scattered(samples)
    }
}

/// Validates `x1..xm,f,g1..gm` and returns `m`.
fn parse_header(cols: &[&str]) -> Option<usize> {
    if cols.len() < 3 || cols.len().is_multiple_of(2) {
        return None;
    }
    let dim = (cols.len() - 1) / 2;
    for (i, c) in cols[..dim].iter().enumerate() {
        if !c.eq_ignore_ascii_case(&format!("x{}", i + 1)) {
            return None;
        }
    }
    if !cols[dim].eq_ignore_ascii_case("f") {
        return None;
    }
    for (i, c) in cols[dim + 1..].iter().enumerate() {
        if !c.eq_ignore_ascii_case(&format!("g{}", i + 1)) {
            return None;
        }
    }
    Some(dim)
}
