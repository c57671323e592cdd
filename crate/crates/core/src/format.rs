//! Plain-text formats shared by the command-line tool and the tests.
//!
//! All structured files are sequences of `key = value` lines. `#` starts a
//! comment, blank lines are ignored, and a line without `=` continues the
//! value of the previous key, so matrices can be written one row per line:
//!
//! ```text
//! # rotation by a quarter turn
//! q = 1
//! w = 0 1
//!     -1 0
//! ```
//!
//! Floating-point values are written with 17 significant digits, which
//! reproduces every `f64` exactly on reading. Sampled wavefunctions use CSV
//! with columns `x_1..x_q,re_psi,im_psi`.

use std::io::{Read, Write};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::eigenstate::{Flavor, QuadraticPhaseState, Residuals};
use crate::error::{Error, Result};
use crate::numeric::GridWavefunction;
use crate::symplectic;

/// Ordered `key = value` pairs.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    entries: Vec<(String, String)>,
}

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn push(&mut self, key: &str, value: impl Into<String>) -> &mut Self {
        self.entries.push((key.to_string(), value.into()));
        self
    }

    pub fn push_f64(&mut self, key: &str, v: f64) -> &mut Self {
        self.push(key, fmt_f64(v))
    }

    pub fn push_slice(&mut self, key: &str, v: &[f64]) -> &mut Self {
        self.push(key, fmt_slice(v))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| Error::Parse {
            line: 0,
            msg: format!("missing key '{key}'"),
        })
    }

    fn usize_field(&self, key: &str) -> Result<usize> {
        let v = self.require(key)?;
        v.trim().parse().map_err(|_| Error::Parse {
            line: 0,
            msg: format!("'{key}' is not a non-negative integer: '{v}'"),
        })
    }

    fn f64_field(&self, key: &str) -> Result<f64> {
        let v = self.require(key)?;
        parse_f64(v.trim()).map_err(|msg| Error::Parse {
            line: 0,
            msg: format!("{key}: {msg}"),
        })
    }

    fn vec_field(&self, key: &str, len: usize) -> Result<Vec<f64>> {
        let v = parse_numbers(self.require(key)?)?;
        if v.len() != len {
            return Err(Error::Parse {
                line: 0,
                msg: format!("'{key}' has {} values, expected {len}", v.len()),
            });
        }
        Ok(v)
    }

    /// Multi-value fields put one matrix row per line.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let mut lines = v.lines();
            out.push_str(k);
            out.push_str(" =");
            if let Some(first) = lines.next() {
                out.push(' ');
                out.push_str(first);
            }
            out.push('\n');
            for line in lines {
                out.push_str("    ");
                out.push_str(line);
                out.push('\n');
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<Record> {
        let mut rec = Record::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            match line.split_once('=') {
                Some((k, v)) => {
                    let key = k.trim();
                    let valid =
                        !key.is_empty() && key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.');
                    if !valid {
                        return Err(Error::Parse {
                            line: i + 1,
                            msg: format!("invalid key '{key}'"),
                        });
                    }
                    if rec.get(key).is_some() {
                        return Err(Error::Parse {
                            line: i + 1,
                            msg: format!("duplicate key '{key}'"),
                        });
                    }
                    rec.push(key, v.trim());
                }
                None => match rec.entries.last_mut() {
                    Some((_, v)) => {
                        if !v.is_empty() {
                            v.push('\n');
                        }
                        v.push_str(line);
                    }
                    None => {
                        return Err(Error::Parse {
                            line: i + 1,
                            msg: "value line before any key".into(),
                        })
                    }
                },
            }
        }
        Ok(rec)
    }
}

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_slice(v: &[f64]) -> String {
    v.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ")
}

fn fmt_rows(m: &DMatrix<f64>) -> String {
    (0..m.nrows())
        .map(|i| fmt_slice(&m.row(i).iter().copied().collect::<Vec<_>>()))
        .collect::<Vec<_>>()
        .join("\n")
}

fn parse_f64(tok: &str) -> std::result::Result<f64, String> {
    let v: f64 = tok.parse().map_err(|_| format!("'{tok}' is not a number"))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(format!("'{tok}' is not finite"))
    }
}

/// Numbers separated by whitespace, commas or semicolons.
pub fn parse_numbers(text: &str) -> Result<Vec<f64>> {
    text.split(|c: char| c.is_whitespace() || c == ',' || c == ';')
        .filter(|t| !t.is_empty())
        .map(|t| parse_f64(t).map_err(|msg| Error::Parse { line: 0, msg }))
        .collect()
}

pub fn parse_vector(text: &str) -> Result<DVector<f64>> {
    Ok(DVector::from_vec(parse_numbers(text)?))
}

/// Row-major `2q × 2q` entries; the size is inferred from the count.
pub fn parse_inline_matrix(text: &str) -> Result<DMatrix<f64>> {
    let v = parse_numbers(text)?;
    let n = (v.len() as f64).sqrt().round() as usize;
    if n == 0 || n * n != v.len() || !n.is_multiple_of(2) {
        return Err(Error::Parse {
            line: 0,
            msg: format!("{} entries do not form a 2q×2q matrix", v.len()),
        });
    }
    Ok(DMatrix::from_row_slice(n, n, &v))
}

/// Matrix file: keys `q` and `w` (row-major, `4q²` values). The matrix is
/// returned unvalidated.
pub fn parse_matrix_file(text: &str) -> Result<DMatrix<f64>> {
    let rec = Record::parse(text)?;
    for (k, _) in rec.entries() {
        if k != "q" && k != "w" {
            return Err(Error::Parse {
                line: 0,
                msg: format!("unknown key '{k}' in matrix file"),
            });
        }
    }
    let q = rec.usize_field("q")?;
    if q == 0 || q > 64 {
        return Err(Error::Parse {
            line: 0,
            msg: format!("q = {q} is out of range"),
        });
    }
    let n = 2 * q;
    let w = rec.vec_field("w", n * n)?;
    Ok(DMatrix::from_row_slice(n, n, &w))
}

pub fn write_matrix_file(w: &DMatrix<f64>) -> String {
    let mut rec = Record::new();
    rec.push("q", (w.nrows() / 2).to_string());
    rec.push("w", fmt_rows(w));
    rec.to_text()
}

/// Contents of a params file: the state plus its algebraic residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamsFile {
    pub state: QuadraticPhaseState,
    pub residuals: Option<Residuals>,
}

pub fn write_params(state: &QuadraticPhaseState, residuals: Option<&Residuals>) -> String {
    let q = state.q_dim;
    let r = state.rank();
    let mut rec = Record::new();
    rec.push("flavor", state.flavor.to_string())
        .push("q", q.to_string())
        .push("rank", r.to_string())
        .push_f64("rank_tol", state.rank_tol)
        .push_slice("eigenvalue", state.eigenvalue.as_slice())
        .push_slice("support_offset", state.support_offset.as_slice())
        .push("support_basis", fmt_rows(&state.support_basis))
        .push("quad_form", fmt_rows(&state.quad_form))
        .push_slice("linear_vec", state.linear_vec.as_slice())
        .push_slice("norm_const", &[state.norm_const.re, state.norm_const.im]);
    if let Some(res) = residuals {
        rec.push_f64("residual_row", res.row_residual)
            .push_f64("residual_constraint", res.constraint_residual)
            .push_f64("residual_offset_null", res.offset_null_residual);
    }
    rec.push("matrix", fmt_rows(state.source.matrix()));
    rec.to_text()
}

/// Read a params file back. The embedded matrix is validated with
/// `symplectic_tol`.
pub fn parse_params(text: &str, symplectic_tol: f64) -> Result<ParamsFile> {
    let rec = Record::parse(text)?;
    let flavor: Flavor = rec.require("flavor")?.parse().map_err(|e: Error| Error::Parse {
        line: 0,
        msg: e.to_string(),
    })?;
    let q = rec.usize_field("q")?;
    let r = rec.usize_field("rank")?;
    if q == 0 || q > 64 || r > q {
        return Err(Error::Parse {
            line: 0,
            msg: format!("rank {r} and q {q} are inconsistent"),
        });
    }
    let rank_tol = rec.f64_field("rank_tol")?;
    let eigenvalue = DVector::from_vec(rec.vec_field("eigenvalue", q)?);
    let support_offset = DVector::from_vec(rec.vec_field("support_offset", q)?);
    let support_basis = DMatrix::from_row_slice(q, r, &rec.vec_field("support_basis", q * r)?);
    let quad_form = DMatrix::from_row_slice(r, r, &rec.vec_field("quad_form", r * r)?);
    let linear_vec = DVector::from_vec(rec.vec_field("linear_vec", r)?);
    let nc = rec.vec_field("norm_const", 2)?;
    let w = DMatrix::from_row_slice(2 * q, 2 * q, &rec.vec_field("matrix", 4 * q * q)?);
    let source = symplectic::validate(&w, symplectic_tol)?;
    let residuals = match (rec.get("residual_row"), rec.get("residual_constraint")) {
        (Some(_), Some(_)) => Some(Residuals {
            row_residual: rec.f64_field("residual_row")?,
            constraint_residual: rec.f64_field("residual_constraint")?,
            offset_null_residual: rec.f64_field("residual_offset_null")?,
        }),
        _ => None,
    };
    Ok(ParamsFile {
        state: QuadraticPhaseState {
            q_dim: q,
            support_offset,
            support_basis,
            quad_form,
            linear_vec,
            norm_const: Complex64::new(nc[0], nc[1]),
            eigenvalue,
            flavor,
            source,
            rank_tol,
        },
        residuals,
    })
}

pub fn write_grid_csv<W: Write>(grid: &GridWavefunction, out: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let q = grid.q_dim;
    let mut header: Vec<String> = (1..=q).map(|i| format!("x_{i}")).collect();
    header.push("re_psi".into());
    header.push("im_psi".into());
    wtr.write_record(&header).map_err(csv_err)?;
    for (idx, z) in grid.samples.iter().enumerate() {
        let mut row: Vec<String> = grid.point(idx).into_iter().map(fmt_f64).collect();
        row.push(fmt_f64(z.re));
        row.push(fmt_f64(z.im));
        wtr.write_record(&row).map_err(csv_err)?;
    }
    wtr.flush()?;
    Ok(())
}

/// Rows of a grid CSV: positions and complex samples, in file order.
pub fn read_grid_csv<R: Read>(input: R) -> Result<(Vec<Vec<f64>>, Vec<Complex64>)> {
    let mut rdr = csv::Reader::from_reader(input);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let cols = headers.len();
    let valid = cols >= 3
        && headers.get(cols - 2) == Some("re_psi")
        && headers.get(cols - 1) == Some("im_psi")
        && (0..cols - 2).all(|i| headers.get(i) == Some(format!("x_{}", i + 1).as_str()));
    if !valid {
        return Err(Error::Parse {
            line: 1,
            msg: "expected header x_1..x_q,re_psi,im_psi".into(),
        });
    }
    let mut points = Vec::new();
    let mut samples = Vec::new();
    for (i, row) in rdr.records().enumerate() {
        let row = row.map_err(csv_err)?;
        let vals: Vec<f64> = row
            .iter()
            .map(|t| parse_f64(t.trim()).map_err(|msg| Error::Parse { line: i + 2, msg }))
            .collect::<Result<_>>()?;
        if vals.len() != cols {
            return Err(Error::Parse {
                line: i + 2,
                msg: format!("expected {cols} columns"),
            });
        }
        points.push(vals[..cols - 2].to_vec());
        samples.push(Complex64::new(vals[cols - 2], vals[cols - 1]));
    }
    Ok((points, samples))
}

fn csv_err(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
    Error::Parse {
        line,
        msg: e.to_string(),
    }
}

/// Reports use the same grammar as the other structured files.
pub fn parse_report(text: &str) -> Result<Record> {
    Record::parse(text)
}
