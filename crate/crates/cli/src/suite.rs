//! Parameter sweeps over the checkerboard benchmark.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use rtaccel_core::assembly::AngularOptions;
use rtaccel_core::operators::TransportOptions;
use rtaccel_core::solver::run_with;
use rtaccel_core::TransportProblem;

use crate::config::{BenchmarkConfig, Case, MeshLevel};
use crate::history::{history_rows, read_history, write_history, write_summary, SummaryRow};
use crate::plot::{residual_plot, Series};
use crate::{write_atomic, Error};

pub const THREADS_ENV: &str = "RTACCEL_THREADS";

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub rows: Vec<SummaryRow>,
    pub summary: PathBuf,
    pub plots: Vec<PathBuf>,
}

impl SuiteReport {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.succeeded()).count()
    }
}

/// Worker count from `RTACCEL_THREADS`, or rayon's default.
pub fn worker_pool() -> Result<rayon::ThreadPool, Error> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v.trim().parse().map_err(|_| Error::Config(format!("{THREADS_ENV}={v:?} is not a count")))?;
        b = b.num_threads(n.max(1));
    }
    b.build().map_err(|e| Error::Pool(e.to_string()))
}

pub fn build_checkerboard(cfg: &BenchmarkConfig, mesh: MeshLevel, g: f64) -> Result<TransportProblem, Error> {
    let opts = TransportOptions { inner_tol: cfg.inner_tol, ..Default::default() };
    Ok(cfg.checkerboard()?.problem(mesh.cells, mesh.level, g, &AngularOptions::default(), &opts)?)
}

fn history_path(case: &Case) -> String {
    format!("history/{}.csv", case.stem())
}

fn family_stem(mesh: MeshLevel, g: f64) -> String {
    format!("g{g}_c{}_l{}", mesh.cells, mesh.level)
}

fn run_case(cfg: &BenchmarkConfig, problem: &Result<TransportProblem, Error>, case: &Case, out: &Path) -> SummaryRow {
    let mut row = SummaryRow {
        g: case.g,
        k: case.k,
        space: case.space.to_string(),
        cells: case.mesh.cells,
        level: case.mesh.level,
        vertices: None,
        pairs: None,
        dofs: None,
        rho: None,
        iterations: None,
        max_factor: None,
        final_residual: None,
        solves: None,
        seconds: 0.0,
        status: String::new(),
        history: String::new(),
    };
    let result = (|| -> Result<(), Error> {
        let p = problem.as_ref().map_err(|e| Error::Config(e.to_string()))?;
        let l = p.layout();
        row.vertices = Some(l.n_vertices);
        row.pairs = Some(l.n_pairs);
        row.dofs = Some(l.total());
        row.rho = Some(p.rho());
        let start = Instant::now();
        let clock = || start.elapsed().as_secs_f64();
        let h = run_with(p, &cfg.iteration(case), None, &clock, None)?;
        row.iterations = Some(h.iterations());
        row.max_factor = Some(h.max_factor());
        row.final_residual = Some(h.final_residual_norm());
        row.solves = Some(h.setup_solves + h.steps.iter().map(|s| s.solves).sum::<usize>());
        if cfg.timings {
            row.seconds = clock();
        }
        row.status = if h.converged() { "converged" } else { "max_iterations" }.into();
        let rel = history_path(case);
        let mut buf = Vec::new();
        write_history(&mut buf, &history_rows(&h, cfg.timings))?;
        write_atomic(&out.join(&rel), &buf)?;
        row.history = rel;
        Ok(())
    })();
    if let Err(e) = result {
        row.status = format!("error: {e}");
    }
    row
}

/// Runs every case of `cfg`, writing `history/*.csv`, `summary.csv` and one
/// plot per (mesh, g) family under the output directory. Failed cases are
/// recorded in the summary and do not stop the suite.
pub fn run_suite(cfg: &BenchmarkConfig) -> Result<SuiteReport, Error> {
    cfg.validate()?;
    let out = cfg.output.clone();
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let cases = cfg.cases();
    // cases sharing a problem run in sequence so solve counts stay per run
    let mut groups: Vec<((MeshLevel, u64), Vec<Case>)> = Vec::new();
    for c in &cases {
        let key = (c.mesh, c.g.to_bits());
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(*c),
            None => groups.push((key, vec![*c])),
        }
    }
    let pool = worker_pool()?;
    let rows: Vec<Vec<(Case, SummaryRow)>> = pool.install(|| {
        groups
            .par_iter()
            .map(|((mesh, g), group)| {
                let problem = build_checkerboard(cfg, *mesh, f64::from_bits(*g));
                group.iter().map(|c| (*c, run_case(cfg, &problem, c, &out))).collect()
            })
            .collect()
    });
    let mut by_case: Vec<(Case, SummaryRow)> = rows.into_iter().flatten().collect();
    by_case.sort_by_key(|(c, _)| cases.iter().position(|x| x == c));
    let rows: Vec<SummaryRow> = by_case.into_iter().map(|(_, r)| r).collect();

    let summary = out.join("summary.csv");
    let mut buf = Vec::new();
    write_summary(&mut buf, &rows)?;
    write_atomic(&summary, &buf)?;

    let mut plots = Vec::new();
    for ((mesh, g), group) in &groups {
        let g = f64::from_bits(*g);
        let mut series = Vec::new();
        for c in group {
            let row = &rows[cases.iter().position(|x| x == c).expect("case listed")];
            if row.history.is_empty() {
                continue;
            }
            let path = out.join(&row.history);
            let f = std::fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            let label = if c.k == 0 { "K=0".to_string() } else { format!("K={} {}", c.k, c.space) };
            series.push(Series::from_history(label, &read_history(f)?));
        }
        if series.is_empty() {
            continue;
        }
        let title = format!("g = {g}, {} cells, sphere level {}", mesh.cells, mesh.level);
        let path = out.join("plots").join(format!("{}.svg", family_stem(*mesh, g)));
        write_atomic(&path, residual_plot(&title, &series).as_bytes())?;
        plots.push(path);
    }
    Ok(SuiteReport { rows, summary, plots })
}
