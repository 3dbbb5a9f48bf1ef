//! Line-oriented `ANISOFIELD` text format.
//!
//! ```text
//! ANISOFIELD 1
//! dim <n>
//! counts <k1> ... <kn>
//! lower <a1> ... <an>
//! upper <b1> ... <bn>
//! <value>            one per line, row-major, last axis fastest
//! ```
//!
//! Reals are written with 17 significant digits, which round-trips `f64`
//! exactly.

use std::fmt::Write as _;
use std::path::Path;

use super::{BoxDomain, GridFunction, TensorGrid};
use crate::error::{Error, ParseError, Result};
use crate::scalar::Real;

const MAGIC: &str = "ANISOFIELD 1";

fn fmt_real<T: Real>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

pub fn render_field<T: Real>(u: &GridFunction<T>) -> String {
    let grid = u.grid();
    let mut out = String::with_capacity(32 * (grid.len() + 5));
    out.push_str(MAGIC);
    out.push('\n');
    let _ = writeln!(out, "dim {}", grid.dim());
    let counts: Vec<String> = grid.counts().iter().map(|c| c.to_string()).collect();
    let _ = writeln!(out, "counts {}", counts.join(" "));
    let lower: Vec<String> = grid.domain().lower().iter().map(|&x| fmt_real(x)).collect();
    let _ = writeln!(out, "lower {}", lower.join(" "));
    let upper: Vec<String> = grid.domain().upper().iter().map(|&x| fmt_real(x)).collect();
    let _ = writeln!(out, "upper {}", upper.join(" "));
    for &v in u.values() {
        out.push_str(&fmt_real(v));
        out.push('\n');
    }
    out
}

pub fn write_field<T: Real>(u: &GridFunction<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, render_field(u)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_field<T: Real>(path: impl AsRef<Path>) -> Result<GridFunction<T>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_field(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn header_fields<'a>(line: Option<&'a str>, lineno: usize, key: &str) -> Result<Vec<&'a str>, ParseError> {
    let line = line.ok_or_else(|| ParseError::MalformedHeader {
        line: lineno,
        reason: format!("missing `{key}` line"),
    })?;
    let mut parts = line.split_whitespace();
    if parts.next() != Some(key) {
        return Err(ParseError::MalformedHeader {
            line: lineno,
            reason: format!("expected `{key}`, found {line:?}"),
        });
    }
    Ok(parts.collect())
}

fn parse_reals<T: Real>(parts: &[&str], lineno: usize, n: usize) -> Result<Vec<T>, ParseError> {
    if parts.len() != n {
        return Err(ParseError::DimensionMismatch(format!(
            "line {lineno}: expected {n} entries, found {}",
            parts.len()
        )));
    }
    parts
        .iter()
        .map(|p| {
            let x: f64 = p.parse().map_err(|_| ParseError::MalformedHeader {
                line: lineno,
                reason: format!("not a number: {p:?}"),
            })?;
            if !x.is_finite() {
                return Err(ParseError::NonFinite { line: lineno });
            }
            T::from_f64(x).ok_or(ParseError::NonFinite { line: lineno })
        })
        .collect()
}

pub fn parse_field<T: Real>(text: &str) -> Result<GridFunction<T>, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::Empty);
    }
    let mut lines = text.lines();
    let magic = lines.next().map(str::trim_end);
    if magic != Some(MAGIC) {
        return Err(ParseError::MalformedHeader {
            line: 1,
            reason: format!("expected `{MAGIC}`"),
        });
    }

    let dim_parts = header_fields(lines.next(), 2, "dim")?;
    let dim: usize = match dim_parts.as_slice() {
        [d] => d.parse().map_err(|_| ParseError::MalformedHeader {
            line: 2,
            reason: format!("bad dimension {d:?}"),
        })?,
        _ => {
            return Err(ParseError::MalformedHeader {
                line: 2,
                reason: "expected a single dimension".into(),
            })
        }
    };
    if dim == 0 {
        return Err(ParseError::MalformedHeader {
            line: 2,
            reason: "dimension must be positive".into(),
        });
    }

    let count_parts = header_fields(lines.next(), 3, "counts")?;
    if count_parts.len() != dim {
        return Err(ParseError::DimensionMismatch(format!(
            "dim {dim} but {} counts",
            count_parts.len()
        )));
    }
    let counts = count_parts
        .iter()
        .map(|c| match c.parse::<usize>() {
            Ok(k) if k > 0 => Ok(k),
            _ => Err(ParseError::MalformedHeader {
                line: 3,
                reason: format!("bad count {c:?}"),
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;

    let lower = parse_reals::<T>(&header_fields(lines.next(), 4, "lower")?, 4, dim)?;
    let upper = parse_reals::<T>(&header_fields(lines.next(), 5, "upper")?, 5, dim)?;
    let domain = BoxDomain::new(lower, upper).map_err(|e| ParseError::MalformedHeader {
        line: 4,
        reason: e.to_string(),
    })?;
    let grid = TensorGrid::new(domain, counts).map_err(|e| ParseError::MalformedHeader {
        line: 3,
        reason: e.to_string(),
    })?;

    let expected = grid.len();
    let mut values = Vec::with_capacity(expected);
    for (i, line) in lines.enumerate() {
        let lineno = i + 6;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        let x: f64 = t.parse().map_err(|_| ParseError::MalformedValue {
            line: lineno,
            text: t.to_string(),
        })?;
        if !x.is_finite() {
            return Err(ParseError::NonFinite { line: lineno });
        }
        values.push(T::from_f64(x).ok_or(ParseError::NonFinite { line: lineno })?);
    }
    if values.len() != expected {
        return Err(ParseError::DimensionMismatch(format!(
            "header promises {expected} values, found {}",
            values.len()
        )));
    }
    Ok(GridFunction::new(grid, values).expect("length and finiteness checked"))
}
