//! Block operators 𝐓, 𝐒, 𝐌, the weighted norm and scattering-free solves.

mod transport;
mod vector;

use alloc::vec;
use alloc::vec::Vec;
use core::sync::atomic::{AtomicUsize, Ordering};

use nalgebra::{DMatrix, DMatrixView};

pub use transport::{pair_block, TransportOptions, TransportSolver};
pub use vector::{BlockVector, Layout};

use crate::assembly::SystemMatrices;
use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::par;

/// Assembled system plus the factored transport blocks. Every call to
/// [`TransportProblem::solve_transport`] increments a counter.
#[derive(Debug)]
pub struct TransportProblem {
    m: SystemMatrices,
    solver: TransportSolver,
    solves: AtomicUsize,
}

impl TransportProblem {
    pub fn new(matrices: SystemMatrices, opts: &TransportOptions) -> Result<Self> {
        let solver = TransportSolver::new(&matrices, opts)?;
        Ok(Self { m: matrices, solver, solves: AtomicUsize::new(0) })
    }

    pub fn matrices(&self) -> &SystemMatrices {
        &self.m
    }

    pub fn layout(&self) -> Layout {
        self.m.layout
    }

    pub fn rho(&self) -> f64 {
        self.m.rho
    }

    pub fn inner_tol(&self) -> f64 {
        self.solver.inner_tol()
    }

    pub fn load(&self) -> BlockVector {
        BlockVector::from_parts(self.m.layout, self.m.load_even.clone(), self.m.load_odd.clone())
            .expect("load sized by assembly")
    }

    pub fn zeros(&self) -> BlockVector {
        BlockVector::zeros(self.m.layout)
    }

    pub fn solve_count(&self) -> usize {
        self.solves.load(Ordering::Relaxed)
    }

    pub fn reset_solve_count(&self) {
        self.solves.store(0, Ordering::Relaxed);
    }

    fn nv(&self) -> usize {
        self.m.layout.n_vertices
    }

    fn ne(&self) -> usize {
        self.m.layout.n_elements
    }

    fn dim(&self) -> usize {
        self.m.layout.n_local
    }

    /// 𝐓x with 𝐓 = [𝐁 + 𝐌⁺, −𝐀ᵀ; 𝐀, 𝐌⁻].
    pub fn apply_t(&self, x: &BlockVector) -> Result<BlockVector> {
        x.check(self.layout())?;
        let (nv, ne, d) = (self.nv(), self.ne(), self.dim());
        let sp = &self.m.spatial;
        let ang = &self.m.angular;
        let mut out = BlockVector::zeros(self.layout());
        par::for_each_chunk(out.even_mut(), nv, |k, y| {
            let xk = &x.even()[k * nv..(k + 1) * nv];
            let xo = &x.odd()[k * d * ne..(k + 1) * d * ne];
            sp.mass_t.matvec_add(ang.mass_plus[k], xk, y);
            for (c, e) in sp.edge_mass.iter().enumerate() {
                let w = ang.omega[c][k];
                if w != 0.0 {
                    e.matvec_add(w, xk, y);
                }
            }
            let mom = &ang.moments[k];
            for i in 0..2 {
                for a in 0..d {
                    let c = mom[(a, i)];
                    if c != 0.0 {
                        sp.deriv[i].tmatvec_add(-c, &xo[a * ne..(a + 1) * ne], y);
                    }
                }
            }
        });
        par::for_each_chunk(out.odd_mut(), d * ne, |k, y| {
            let xk = &x.even()[k * nv..(k + 1) * nv];
            let xo = &x.odd()[k * d * ne..(k + 1) * d * ne];
            let mom = &ang.moments[k];
            let mm = &ang.mass_minus[k];
            let mut dx = [vec![0.0; ne], vec![0.0; ne]];
            for i in 0..2 {
                sp.deriv[i].matvec(xk, &mut dx[i]);
            }
            for a in 0..d {
                let ya = &mut y[a * ne..(a + 1) * ne];
                for j in 0..ne {
                    let mut s = mom[(a, 0)] * dx[0][j] + mom[(a, 1)] * dx[1][j];
                    for b in 0..d {
                        s += mm[(a, b)] * sp.diag_t[j] * xo[b * ne + j];
                    }
                    ya[j] = s;
                }
            }
        });
        Ok(out)
    }

    /// 𝐒x by angular contraction with Θ± followed by the σ_s masses.
    pub fn apply_s(&self, x: &BlockVector) -> Result<BlockVector> {
        x.check(self.layout())?;
        let even = self.apply_s_even(x.even());
        let odd = self.apply_s_odd(x.odd());
        BlockVector::from_parts(self.layout(), even, odd)
    }

    pub(crate) fn apply_s_even(&self, x: &[f64]) -> Vec<f64> {
        let nv = self.nv();
        let np = self.m.layout.n_pairs;
        let xv = DMatrixView::from_slice(x, nv, np);
        let y: DMatrix<f64> = xv * &self.m.angular.theta_plus;
        let ys = y.as_slice();
        let mut out = vec![0.0; nv * np];
        par::for_each_chunk(&mut out, nv, |k, o| {
            self.m.spatial.mass_s.matvec(&ys[k * nv..(k + 1) * nv], o);
        });
        out
    }

    /// 𝐒⁻ applied to an odd block.
    pub fn apply_s_odd(&self, x: &[f64]) -> Vec<f64> {
        let ne = self.ne();
        let no = self.m.layout.n_odd_angular();
        let xv = DMatrixView::from_slice(x, ne, no);
        let y: DMatrix<f64> = xv * &self.m.angular.theta_minus;
        let mut out = y.as_slice().to_vec();
        for col in out.chunks_mut(ne) {
            for (v, s) in col.iter_mut().zip(&self.m.spatial.diag_s) {
                *v *= s;
            }
        }
        out
    }

    /// 𝐌x, the σ_t-weighted block mass.
    pub fn apply_m(&self, x: &BlockVector) -> Result<BlockVector> {
        x.check(self.layout())?;
        let nv = self.nv();
        let mut out = BlockVector::zeros(self.layout());
        par::for_each_chunk(out.even_mut(), nv, |k, y| {
            self.m.spatial.mass_t.matvec(&x.even()[k * nv..(k + 1) * nv], y);
            let c = self.m.angular.mass_plus[k];
            y.iter_mut().for_each(|v| *v *= c);
        });
        let odd = self.apply_m_odd(x.odd());
        out.odd_mut().copy_from_slice(&odd);
        Ok(out)
    }

    /// 𝐌⁻ applied to an odd block.
    pub fn apply_m_odd(&self, x: &[f64]) -> Vec<f64> {
        self.odd_blockwise(x, &self.m.angular.mass_minus, |v, j| v * self.m.spatial.diag_t[j])
    }

    /// (𝐌⁻)⁻¹ applied to an odd block.
    pub fn solve_m_odd(&self, x: &[f64]) -> Vec<f64> {
        self.odd_blockwise(x, &self.m.angular.mass_minus_inv, |v, j| v / self.m.spatial.diag_t[j])
    }

    fn odd_blockwise(&self, x: &[f64], blocks: &[DMatrix<f64>], f: impl Fn(f64, usize) -> f64 + Sync) -> Vec<f64> {
        let (ne, d) = (self.ne(), self.dim());
        let mut out = vec![0.0; x.len()];
        par::for_each_chunk(&mut out, d * ne, |k, y| {
            let xo = &x[k * d * ne..(k + 1) * d * ne];
            let b = &blocks[k];
            for a in 0..d {
                for j in 0..ne {
                    let mut s = 0.0;
                    for c in 0..d {
                        s += b[(a, c)] * xo[c * ne + j];
                    }
                    y[a * ne + j] = f(s, j);
                }
            }
        });
        out
    }

    /// 𝐀x⁺ (even block to odd block).
    pub fn apply_a(&self, x_even: &[f64]) -> Vec<f64> {
        let (nv, ne, d) = (self.nv(), self.ne(), self.dim());
        let mut out = vec![0.0; self.m.layout.odd_len()];
        par::for_each_chunk(&mut out, d * ne, |k, y| {
            let xk = &x_even[k * nv..(k + 1) * nv];
            let mom = &self.m.angular.moments[k];
            let mut dx = [vec![0.0; ne], vec![0.0; ne]];
            for i in 0..2 {
                self.m.spatial.deriv[i].matvec(xk, &mut dx[i]);
            }
            for a in 0..d {
                for j in 0..ne {
                    y[a * ne + j] = mom[(a, 0)] * dx[0][j] + mom[(a, 1)] * dx[1][j];
                }
            }
        });
        out
    }

    /// √(xᵀ𝐌x)
    pub fn weighted_norm(&self, x: &BlockVector) -> Result<f64> {
        let mx = self.apply_m(x)?;
        let q = x.dot(&mx);
        if !q.is_finite() {
            return Err(Error::NonFinite("weighted norm"));
        }
        Ok(sqrt(q.max(0.0)))
    }

    /// xᵀ𝐌y
    pub fn m_inner(&self, x: &BlockVector, y: &BlockVector) -> Result<f64> {
        Ok(x.dot(&self.apply_m(y)?))
    }

    /// x = 𝐓⁻¹b, counted.
    pub fn solve_transport(&self, b: &BlockVector) -> Result<BlockVector> {
        self.solves.fetch_add(1, Ordering::Relaxed);
        self.solve_uncounted(b)
    }

    /// Same as [`Self::solve_transport`] without touching the counter; used
    /// for diagnostics that must not distort cost accounting.
    pub fn solve_uncounted(&self, b: &BlockVector) -> Result<BlockVector> {
        b.check(self.layout())?;
        let (nv, ne, d) = (self.nv(), self.ne(), self.dim());
        let sp = &self.m.spatial;
        let ang = &self.m.angular;
        let y = self.solve_m_odd(b.odd());
        let evens: Vec<Result<Vec<f64>>> = par::map(self.m.layout.n_pairs, |k| {
            let mut rhs = b.even()[k * nv..(k + 1) * nv].to_vec();
            let yk = &y[k * d * ne..(k + 1) * d * ne];
            let mom = &ang.moments[k];
            for i in 0..2 {
                for a in 0..d {
                    let c = mom[(a, i)];
                    if c != 0.0 {
                        sp.deriv[i].tmatvec_add(c, &yk[a * ne..(a + 1) * ne], &mut rhs);
                    }
                }
            }
            self.solver.solve_pair(k, &rhs)
        });
        let mut even = Vec::with_capacity(self.m.layout.even_len());
        for e in evens {
            even.extend_from_slice(&e?);
        }
        let ax = self.apply_a(&even);
        let rhs: Vec<f64> = b.odd().iter().zip(&ax).map(|(p, q)| p - q).collect();
        let odd = self.solve_m_odd(&rhs);
        let x = BlockVector::from_parts(self.layout(), even, odd)?;
        let tx = self.apply_t(&x)?;
        let r = tx.sub(b);
        let rn = sqrt(r.dot(&r));
        let bn = sqrt(b.dot(b));
        if !rn.is_finite() {
            return Err(Error::NonFinite("transport solve"));
        }
        if rn > self.solver.inner_tol() * bn {
            return Err(Error::NoConvergence { what: "transport solve", iterations: 1, residual: rn / bn });
        }
        Ok(x)
    }

    /// (𝐓 − 𝐒)x
    pub fn apply_t_minus_s(&self, x: &BlockVector) -> Result<BlockVector> {
        let mut t = self.apply_t(x)?;
        t.axpy(-1.0, &self.apply_s(x)?);
        Ok(t)
    }

    /// 𝐑(u) = 𝐓⁻¹(ℓ − (𝐓 − 𝐒)u)
    pub fn residual_precond(&self, u: &BlockVector) -> Result<BlockVector> {
        let mut b = self.load();
        b.axpy(-1.0, &self.apply_t_minus_s(u)?);
        self.solve_transport(&b)
    }

    pub(crate) fn residual_precond_uncounted(&self, u: &BlockVector) -> Result<BlockVector> {
        let mut b = self.load();
        b.axpy(-1.0, &self.apply_t_minus_s(u)?);
        self.solve_uncounted(&b)
    }

    /// 𝐑₀w = 𝐑(w) − 𝐑(0) = −𝐓⁻¹(𝐓 − 𝐒)w
    pub fn apply_r0(&self, w: &BlockVector) -> Result<BlockVector> {
        let b = self.apply_t_minus_s(w)?.scaled(-1.0);
        self.solve_transport(&b)
    }

    /// 𝐓⁻¹(𝐒u + ℓ)
    pub fn half_step(&self, u: &BlockVector) -> Result<BlockVector> {
        let mut b = self.apply_s(u)?;
        b.axpy(1.0, &self.load());
        self.solve_transport(&b)
    }
}
