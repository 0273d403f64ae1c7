//! File formats: records/series CSV, MatrixMarket export, spectrum CSV and
//! JSON helpers.
//!
//! All numeric fields are written with 12 significant digits in scientific
//! notation, locale-independent, so byte-level comparison of outputs is
//! meaningful. Row order is fixed: n ascending, kind in sweep order, seed
//! ascending.

use std::fs;
use std::io::Write;
use std::path::Path;

use cyclegap_core::chain::{CondensedChain, StochasticMatrix};
use cyclegap_core::spectral::{EigenPair, EigenVector, Spectrum};
use thiserror::Error;

use crate::experiments::{QuartilePoint, SweepKind, TrialRecord};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// 12 significant digits, scientific, locale-independent.
pub fn fmt_sig(x: f64) -> String {
    format!("{x:.11e}")
}

pub const RECORDS_HEADER: &str = "n,k,kind,seed,gap,gap_sym,lambda_A,wall_time";
pub const SERIES_HEADER: &str = "n,k,kind,q1,median,q3,q1_comp,median_comp,q3_comp";

pub fn records_to_csv(records: &[TrialRecord]) -> String {
    let mut out = String::from(RECORDS_HEADER);
    out.push('\n');
    for r in records {
        let sym = r.gap_symmetrized.map(fmt_sig).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.n,
            r.k,
            r.kind.label(),
            r.seed,
            fmt_sig(r.gap),
            sym,
            fmt_sig(r.lambda_a),
            fmt_sig(r.wall_time)
        ));
    }
    out
}

pub fn write_records_csv(path: &Path, records: &[TrialRecord]) -> Result<(), FormatError> {
    fs::write(path, records_to_csv(records))?;
    Ok(())
}

pub fn read_records_csv(path: &Path) -> Result<Vec<TrialRecord>, FormatError> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != RECORDS_HEADER {
                return Err(FormatError::Parse { line: 1, msg: format!("bad header `{line}`") });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 8 {
            return Err(FormatError::Parse { line: i + 1, msg: format!("{} fields", f.len()) });
        }
        let parse_err = |msg: &str| FormatError::Parse { line: i + 1, msg: msg.to_string() };
        out.push(TrialRecord {
            n: f[0].parse().map_err(|_| parse_err("n"))?,
            k: f[1].parse().map_err(|_| parse_err("k"))?,
            kind: SweepKind::parse(f[2]).ok_or_else(|| parse_err("kind"))?,
            seed: f[3].parse().map_err(|_| parse_err("seed"))?,
            gap: f[4].parse().map_err(|_| parse_err("gap"))?,
            gap_symmetrized: if f[5].is_empty() {
                None
            } else {
                Some(f[5].parse().map_err(|_| parse_err("gap_sym"))?)
            },
            lambda_a: f[6].parse().map_err(|_| parse_err("lambda_A"))?,
            wall_time: f[7].parse().map_err(|_| parse_err("wall_time"))?,
        });
    }
    Ok(out)
}

/// One row of the aggregated series file.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub n: usize,
    pub k: usize,
    pub kind: SweepKind,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub q1_comp: f64,
    pub median_comp: f64,
    pub q3_comp: f64,
}

pub fn series_rows(series: &[QuartilePoint], compensated: &[QuartilePoint]) -> Vec<SeriesRow> {
    series
        .iter()
        .zip(compensated.iter())
        .map(|(q, c)| {
            debug_assert_eq!((q.n, q.kind), (c.n, c.kind));
            SeriesRow {
                n: q.n,
                k: q.k,
                kind: q.kind,
                q1: q.q1,
                median: q.median,
                q3: q.q3,
                q1_comp: c.q1,
                median_comp: c.median,
                q3_comp: c.q3,
            }
        })
        .collect()
}

pub fn series_to_csv(rows: &[SeriesRow]) -> String {
    let mut out = String::from(SERIES_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.n,
            r.k,
            r.kind.label(),
            fmt_sig(r.q1),
            fmt_sig(r.median),
            fmt_sig(r.q3),
            fmt_sig(r.q1_comp),
            fmt_sig(r.median_comp),
            fmt_sig(r.q3_comp)
        ));
    }
    out
}

pub fn write_series_csv(path: &Path, rows: &[SeriesRow]) -> Result<(), FormatError> {
    fs::write(path, series_to_csv(rows))?;
    Ok(())
}

pub fn read_series_csv(path: &Path) -> Result<Vec<SeriesRow>, FormatError> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 {
            if line != SERIES_HEADER {
                return Err(FormatError::Parse { line: 1, msg: format!("bad header `{line}`") });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 9 {
            return Err(FormatError::Parse { line: i + 1, msg: format!("{} fields", f.len()) });
        }
        let parse_err = |msg: &str| FormatError::Parse { line: i + 1, msg: msg.to_string() };
        let num = |s: &str, what: &str| -> Result<f64, FormatError> {
            s.parse().map_err(|_| parse_err(what))
        };
        out.push(SeriesRow {
            n: f[0].parse().map_err(|_| parse_err("n"))?,
            k: f[1].parse().map_err(|_| parse_err("k"))?,
            kind: SweepKind::parse(f[2]).ok_or_else(|| parse_err("kind"))?,
            q1: num(f[3], "q1")?,
            median: num(f[4], "median")?,
            q3: num(f[5], "q3")?,
            q1_comp: num(f[6], "q1_comp")?,
            median_comp: num(f[7], "median_comp")?,
            q3_comp: num(f[8], "q3_comp")?,
        });
    }
    Ok(out)
}

/// MatrixMarket coordinate format, 1-based, `(row, col) = (destination,
/// source)`.
pub fn matrix_market(m: &StochasticMatrix) -> String {
    let mut out = String::from("%%MatrixMarket matrix coordinate real general\n");
    out.push_str(&format!("{} {} {}\n", m.dim(), m.dim(), m.nnz()));
    for (d, s, w) in m.entries() {
        out.push_str(&format!("{} {} {}\n", d + 1, s + 1, fmt_sig(w)));
    }
    out
}

/// Spectrum CSV with columns `re,im,modulus`, sorted by descending modulus.
pub fn spectrum_to_csv(spec: &Spectrum) -> String {
    let mut eig = spec.eigenvalues().to_vec();
    eig.sort_by(|a, b| {
        (b.norm(), a.re, a.im).partial_cmp(&(a.norm(), b.re, b.im)).unwrap()
    });
    let mut out = String::from("re,im,modulus\n");
    for mu in eig {
        out.push_str(&format!("{},{},{}\n", fmt_sig(mu.re), fmt_sig(mu.im), fmt_sig(mu.norm())));
    }
    out
}

/// Debug dump of one eigenpair.
pub fn eigenpair_to_json(pair: &EigenPair) -> serde_json::Value {
    let kind = match pair.vector {
        EigenVector::Full(_) => "full",
        EigenVector::Condensed(_) => "condensed",
    };
    serde_json::json!({
        "mu": { "re": pair.mu.re, "im": pair.mu.im },
        "vector_type": kind,
        "vector": pair.vector.components().iter()
            .map(|c| serde_json::json!({ "re": c.re, "im": c.im }))
            .collect::<Vec<_>>(),
    })
}

pub fn load_chain(path: &Path) -> Result<CondensedChain, FormatError> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

pub fn save_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), FormatError> {
    let mut f = fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}
