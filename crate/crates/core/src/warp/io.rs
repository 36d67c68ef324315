//! Plain-text warp files.
//!
//! ```text
//! L2RECOLOR-WARP
//! version 1
//! space rgb
//! grid 5 0.0000000000000000e0 ... (per-axis count, lo[3], hi[3])
//! rbf tps 0.0000000000000000e0
//! theta 387
//! <one value per line>
//! ```
//!
//! Values are written with 17 significant digits, which round-trips `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{theta_len, ControlGrid, RbfKind, WarpParameters};
use crate::color::ColorSpace;
use crate::error::{Error, Result};
use crate::Scalar;

pub const WARP_MAGIC: &str = "L2RECOLOR-WARP";
pub const WARP_VERSION: u32 = 1;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Serialise a warp to its canonical text form.
pub fn write_warp<T: Scalar>(w: &WarpParameters<T>) -> String {
    let mut s = String::new();
    let g = w.grid();
    let _ = writeln!(s, "{WARP_MAGIC}");
    let _ = writeln!(s, "version {WARP_VERSION}");
    let _ = writeln!(s, "space {}", w.space());
    let _ = write!(s, "grid {}", g.per_axis());
    for v in g.lo().into_iter().chain(g.hi()) {
        let _ = write!(s, " {}", num(v.as_f64()));
    }
    s.push('\n');
    let eps = w.rbf().epsilon().map_or(0.0, |e| e.as_f64());
    let _ = writeln!(s, "rbf {} {}", w.rbf().name(), num(eps));
    let theta = w.theta();
    let _ = writeln!(s, "theta {}", theta.len());
    for v in theta {
        let _ = writeln!(s, "{}", num(v.as_f64()));
    }
    s
}

pub fn save_warp<T: Scalar>(w: &WarpParameters<T>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, write_warp(w)).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn load_warp<T: Scalar>(path: impl AsRef<Path>) -> Result<WarpParameters<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_warp(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn next_line(&mut self, what: &str) -> Result<(usize, &'a str)> {
        match self.inner.next() {
            Some((i, l)) => Ok((i + 1, l.trim_end_matches('\r'))),
            None => Err(Error::WarpFormat {
                line: 0,
                message: format!("unexpected end of file, expected {what}"),
            }),
        }
    }

    fn keyed(&mut self, key: &str) -> Result<(usize, Vec<&'a str>)> {
        let (n, line) = self.next_line(key)?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some(k) if k == key => Ok((n, parts.collect())),
            _ => Err(Error::WarpFormat {
                line: n,
                message: format!("expected `{key}`, found `{line}`"),
            }),
        }
    }
}

fn parse_f64(line: usize, s: &str) -> Result<f64> {
    let v: f64 = s.parse().map_err(|_| Error::WarpFormat {
        line,
        message: format!("invalid number `{s}`"),
    })?;
    if !v.is_finite() {
        return Err(Error::WarpFormat {
            line,
            message: format!("non-finite value `{s}`"),
        });
    }
    Ok(v)
}

fn expect_arity(line: usize, key: &str, parts: &[&str], n: usize) -> Result<()> {
    if parts.len() != n {
        return Err(Error::WarpFormat {
            line,
            message: format!("`{key}` takes {n} values, found {}", parts.len()),
        });
    }
    Ok(())
}

/// Parse the text produced by [`write_warp`].
pub fn parse_warp<T: Scalar>(text: &str) -> Result<WarpParameters<T>> {
    let mut lines = Lines {
        inner: text.lines().enumerate(),
    };
    let (n, magic) = lines.next_line("magic")?;
    if magic != WARP_MAGIC {
        return Err(Error::WarpFormat {
            line: n,
            message: format!("bad magic `{magic}`, expected `{WARP_MAGIC}`"),
        });
    }

    let (n, v) = lines.keyed("version")?;
    expect_arity(n, "version", &v, 1)?;
    let version: u32 = v[0].parse().map_err(|_| Error::WarpFormat {
        line: n,
        message: format!("invalid version `{}`", v[0]),
    })?;
    if version != WARP_VERSION {
        return Err(Error::WarpFormat {
            line: n,
            message: format!(
                "unsupported version {version}, this build reads version {WARP_VERSION}"
            ),
        });
    }

    let (n, v) = lines.keyed("space")?;
    expect_arity(n, "space", &v, 1)?;
    let space = ColorSpace::parse(v[0]).ok_or_else(|| Error::WarpFormat {
        line: n,
        message: format!("unknown colour space `{}`", v[0]),
    })?;

    let (n, v) = lines.keyed("grid")?;
    expect_arity(n, "grid", &v, 7)?;
    let per_axis: usize = v[0].parse().map_err(|_| Error::WarpFormat {
        line: n,
        message: format!("invalid grid size `{}`", v[0]),
    })?;
    let mut bounds = [T::zero(); 6];
    for (b, s) in bounds.iter_mut().zip(&v[1..]) {
        *b = T::lit(parse_f64(n, s)?);
    }
    let grid = ControlGrid::new(
        per_axis,
        [bounds[0], bounds[1], bounds[2]],
        [bounds[3], bounds[4], bounds[5]],
    )
    .map_err(|e| Error::WarpFormat {
        line: n,
        message: e.to_string(),
    })?;

    let (n, v) = lines.keyed("rbf")?;
    expect_arity(n, "rbf", &v, 2)?;
    let eps = T::lit(parse_f64(n, v[1])?);
    let rbf = RbfKind::from_name(v[0], eps).ok_or_else(|| Error::WarpFormat {
        line: n,
        message: format!("unknown kernel `{}`", v[0]),
    })?;
    if !rbf.is_valid() {
        return Err(Error::WarpFormat {
            line: n,
            message: "kernel scale must be positive".into(),
        });
    }

    let (n, v) = lines.keyed("theta")?;
    expect_arity(n, "theta", &v, 1)?;
    let count: usize = v[0].parse().map_err(|_| Error::WarpFormat {
        line: n,
        message: format!("invalid count `{}`", v[0]),
    })?;
    let expected = theta_len(grid.len());
    if count != expected {
        return Err(Error::WarpFormat {
            line: n,
            message: format!("theta count {count} does not match grid ({expected})"),
        });
    }
    let mut theta = Vec::with_capacity(count);
    for _ in 0..count {
        let (n, line) = lines.next_line("parameter value")?;
        theta.push(T::lit(parse_f64(n, line.trim())?));
    }
    for (i, rest) in lines.inner.by_ref() {
        if !rest.trim().is_empty() {
            return Err(Error::WarpFormat {
                line: i + 1,
                message: "trailing data after parameters".into(),
            });
        }
    }
    WarpParameters::from_theta(&theta, grid, rbf, space)
}
