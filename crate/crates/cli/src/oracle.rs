//! Dense cross-check of the iteration on a tiny checkerboard instance.

use rtaccel_core::solver::{dense_oracle, run, IterationConfig};

use crate::config::{BenchmarkConfig, Case, MeshLevel, Space};
use crate::suite::build_checkerboard;
use crate::Error;

/// Largest allowed ‖u_k − u_h‖_M at convergence.
pub const ORACLE_TOL: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub g: f64,
    pub k: usize,
    pub space: Space,
    pub iterations: usize,
    pub error: f64,
    pub passed: bool,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// One mesh cell per map cell and an unrefined sphere, so every K is
/// capped at the 4 angular pairs available there.
pub fn run_oracle(cfg: &BenchmarkConfig) -> Result<Vec<OracleRow>, Error> {
    cfg.validate()?;
    let map = cfg.checkerboard()?.map;
    let (w, h) = (map.width(), map.height());
    let mesh = MeshLevel { cells: w / gcd(w, h) * h, level: 0 };
    let mut rows = Vec::new();
    for &g in &cfg.g {
        let p = build_checkerboard(cfg, mesh, g)?;
        let exact = dense_oracle(&p)?;
        for (k, space) in cfg.runs() {
            let case = Case { g, k: k.min(p.layout().n_pairs), space, mesh };
            let it = IterationConfig { tol: 1e-11, verify_residuals: true, ..cfg.iteration(&case) };
            let hist = run(&p, &it)?;
            let error = p.weighted_norm(&hist.final_iterate.sub(&exact))?;
            rows.push(OracleRow { g, k: case.k, space, iterations: hist.iterations(), error, passed: hist.converged() && error <= ORACLE_TOL });
        }
    }
    Ok(rows)
}
