//! CSV tables. Both schemas are version 1; columns only ever get appended.

use std::io::{Read, Write};

use rtaccel_core::ConvergenceHistory;
use serde::{Deserialize, Serialize};

use crate::Error;

pub const HISTORY_HEADER: [&str; 5] = ["k", "residual", "factor", "seconds", "solves"];

/// One outer step; k = 0 is the initial guess and has no factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRow {
    pub k: usize,
    pub residual: f64,
    pub factor: Option<f64>,
    pub seconds: f64,
    pub solves: usize,
}

pub fn history_rows(h: &ConvergenceHistory, timings: bool) -> Vec<HistoryRow> {
    let mut rows = vec![HistoryRow { k: 0, residual: h.initial_residual, factor: None, seconds: 0.0, solves: h.setup_solves }];
    rows.extend(h.steps.iter().map(|s| HistoryRow {
        k: s.k,
        residual: s.residual,
        factor: Some(s.factor),
        seconds: if timings { s.seconds } else { 0.0 },
        solves: s.solves,
    }));
    rows
}

fn write_rows<W: Write, T: Serialize>(w: W, header: &[&str], rows: &[T]) -> Result<(), Error> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header)?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush().map_err(csv::Error::from)?;
    Ok(())
}

fn read_rows<R: Read, T: for<'de> Deserialize<'de>>(r: R, header: &[&str]) -> Result<Vec<T>, Error> {
    let mut rdr = csv::Reader::from_reader(r);
    let found: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if found.len() < header.len() || found.iter().zip(header).any(|(a, b)| a != b) {
        return Err(Error::Format { line: 1, msg: format!("expected columns {header:?}, found {found:?}") });
    }
    Ok(rdr.deserialize().collect::<Result<_, _>>()?)
}

pub fn write_history<W: Write>(w: W, rows: &[HistoryRow]) -> Result<(), Error> {
    write_rows(w, &HISTORY_HEADER, rows)
}

pub fn read_history<R: Read>(r: R) -> Result<Vec<HistoryRow>, Error> {
    read_rows(r, &HISTORY_HEADER)
}

pub const SUMMARY_HEADER: [&str; 16] = [
    "g",
    "K",
    "space",
    "cells",
    "level",
    "vertices",
    "pairs",
    "dofs",
    "rho",
    "iterations",
    "max_factor",
    "final_residual",
    "solves",
    "seconds",
    "status",
    "history",
];

/// One suite case. Numeric fields are empty when the case failed early.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub g: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub space: String,
    pub cells: usize,
    pub level: usize,
    pub vertices: Option<usize>,
    pub pairs: Option<usize>,
    pub dofs: Option<usize>,
    pub rho: Option<f64>,
    pub iterations: Option<usize>,
    pub max_factor: Option<f64>,
    pub final_residual: Option<f64>,
    pub solves: Option<usize>,
    pub seconds: f64,
    /// `converged`, `max_iterations` or `error: <message>`.
    pub status: String,
    /// History file relative to the output directory.
    pub history: String,
}

impl SummaryRow {
    pub fn succeeded(&self) -> bool {
        self.status == "converged"
    }
}

pub fn write_summary<W: Write>(w: W, rows: &[SummaryRow]) -> Result<(), Error> {
    write_rows(w, &SUMMARY_HEADER, rows)
}

pub fn read_summary<R: Read>(r: R) -> Result<Vec<SummaryRow>, Error> {
    read_rows(r, &SUMMARY_HEADER)
}
