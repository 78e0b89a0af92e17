use alloc::vec;
use alloc::vec::Vec;

use crate::assembly::SystemMatrices;
use crate::error::{Error, Result};
use crate::linalg::{pcg, reverse_cuthill_mckee, CsrMatrix, EnvelopeCholesky};
use crate::par;

/// Inner solver controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    /// Relative residual required of every scattering-free solve.
    pub inner_tol: f64,
    /// Largest vertex count for which the even blocks are factored; above it
    /// they are solved by diagonally preconditioned CG.
    pub direct_limit: usize,
    pub max_cg_iterations: usize,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { inner_tol: 1e-10, direct_limit: 200_000, max_cg_iterations: 20_000 }
    }
}

#[derive(Debug, Clone)]
enum PairSolve {
    Direct(EnvelopeCholesky),
    Iterative { matrix: CsrMatrix, inv_diag: Vec<f64> },
}

/// Per-pair solvers for the even-parity Schur complements
/// 𝗔ᵀ(𝐌⁻)⁻¹𝗔 + 𝐌⁺ + 𝐁 restricted to one angular pair.
#[derive(Debug, Clone)]
pub struct TransportSolver {
    pairs: Vec<PairSolve>,
    inner_tol: f64,
    max_cg_iterations: usize,
}

/// Dᵢᵀ W Dⱼ with W = (M_σt^-)⁻¹, on the P1 pattern: [xx, xy + yx, yy].
pub(crate) fn derivative_products(m: &SystemMatrices) -> [CsrMatrix; 3] {
    let sp = &m.spatial;
    let pattern = sp.mass_t.zeros_like();
    let mut out = [pattern.clone(), pattern.clone(), pattern];
    // column e of D (row e of Dᵀ) touches the three vertices of element e
    let ne = sp.n_elements();
    let mut cols: Vec<Vec<(usize, [f64; 2])>> = vec![Vec::new(); ne];
    for (n, d) in sp.deriv.iter().enumerate() {
        for (e, v, val) in d.triplets() {
            let slot = match cols[e].iter().position(|c| c.0 == v) {
                Some(p) => p,
                None => {
                    cols[e].push((v, [0.0; 2]));
                    cols[e].len() - 1
                }
            };
            cols[e][slot].1[n] = val;
        }
    }
    for (e, entries) in cols.iter().enumerate() {
        let w = 1.0 / sp.diag_t[e];
        for &(a, da) in entries {
            for &(b, db) in entries {
                out[0].add_at(a, b, w * da[0] * db[0]);
                out[1].add_at(a, b, w * (da[0] * db[1] + da[1] * db[0]));
                out[2].add_at(a, b, w * da[1] * db[1]);
            }
        }
    }
    out
}

impl TransportSolver {
    pub fn new(m: &SystemMatrices, opts: &TransportOptions) -> Result<Self> {
        if !(opts.inner_tol > 0.0) {
            return Err(Error::InvalidArgument("inner_tol must be positive".into()));
        }
        let dwd = derivative_products(m);
        let ang = &m.angular;
        let np = ang.n_pairs();
        let direct = m.layout.n_vertices <= opts.direct_limit;
        let perm = if direct { reverse_cuthill_mckee(&m.spatial.mass_t) } else { Vec::new() };
        let built: Vec<Result<PairSolve>> = par::map(np, |k| {
            let block = pair_block(m, &dwd, k);
            if direct {
                EnvelopeCholesky::factor_with(&block, perm.clone()).map(PairSolve::Direct)
            } else {
                let inv_diag = block.diagonal().iter().map(|d| 1.0 / d).collect();
                Ok(PairSolve::Iterative { matrix: block, inv_diag })
            }
        });
        let pairs = built.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self { pairs, inner_tol: opts.inner_tol, max_cg_iterations: opts.max_cg_iterations })
    }

    pub fn inner_tol(&self) -> f64 {
        self.inner_tol
    }

    pub fn is_direct(&self) -> bool {
        matches!(self.pairs.first(), Some(PairSolve::Direct(_)))
    }

    pub(crate) fn solve_pair(&self, k: usize, rhs: &[f64]) -> Result<Vec<f64>> {
        match &self.pairs[k] {
            PairSolve::Direct(f) => Ok(f.solve(rhs)),
            PairSolve::Iterative { matrix, inv_diag } => {
                let mut x = vec![0.0; rhs.len()];
                pcg(
                    |v, out| matrix.matvec(v, out),
                    |r, z| {
                        for i in 0..r.len() {
                            z[i] = r[i] * inv_diag[i];
                        }
                    },
                    rhs,
                    &mut x,
                    0.1 * self.inner_tol,
                    self.max_cg_iterations,
                )?;
                Ok(x)
            }
        }
    }
}

/// The even-parity Schur block of pair k as a sparse matrix.
pub fn pair_block(m: &SystemMatrices, dwd: &[CsrMatrix; 3], k: usize) -> CsrMatrix {
    let ang = &m.angular;
    let sp = &m.spatial;
    let mom = &ang.moments[k];
    let minv = &ang.mass_minus_inv[k];
    let d = ang.dim();
    let c = |i: usize, j: usize| -> f64 {
        let mut s = 0.0;
        for a in 0..d {
            for b in 0..d {
                s += mom[(a, i)] * minv[(a, b)] * mom[(b, j)];
            }
        }
        s
    };
    let mut terms: Vec<(f64, &CsrMatrix)> = vec![
        (c(0, 0), &dwd[0]),
        (0.5 * (c(0, 1) + c(1, 0)), &dwd[1]),
        (c(1, 1), &dwd[2]),
        (ang.mass_plus[k], &sp.mass_t),
    ];
    for (cls, e) in sp.edge_mass.iter().enumerate() {
        terms.push((ang.omega[cls][k], e));
    }
    sp.mass_t.combine(&terms)
}
