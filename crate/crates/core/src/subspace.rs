//! Minimization spaces: the eigen-based tensor space Y_{h,K}, the Galerkin
//! correction on it, the two odd corrections and history columns.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::assembly::AngularBlocks;
use crate::error::{invalid, Error, Result};
use crate::linalg::{pcg, CsrMatrix, EnvelopeCholesky};
use crate::math::{fabs, sqrt};
use crate::operators::{BlockVector, TransportProblem};

/// Leading generalized eigenpairs of (Θ⁺, 𝗠⁺).
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub gammas: Vec<f64>,
    /// H_k⁺, 𝗠⁺-orthonormal, length n_S^+ each.
    pub h_plus: Vec<Vec<f64>>,
    /// H_{k,i}⁻ at index k·dim + i, length n_S^- each.
    pub h_minus: Vec<Vec<f64>>,
    pub dim: usize,
}

impl EigenBasis {
    pub fn k(&self) -> usize {
        self.gammas.len()
    }
}

fn symmetric_eigen(theta: &DMatrix<f64>, mass: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = mass.len();
    let s: Vec<f64> = mass.iter().map(|m| 1.0 / sqrt(*m)).collect();
    let c = DMatrix::from_fn(n, n, |i, j| s[i] * theta[(i, j)] * s[j]);
    if c.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("scattering matrix"));
    }
    let eig = SymmetricEigen::try_new(c, 1e-15, 10_000)
        .ok_or(Error::NoConvergence { what: "symmetric eigensolver", iterations: 10_000, residual: f64::NAN })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_fn(n, n, |r, c| s[r] * eig.eigenvectors[(r, order[c])]);
    Ok((vals, vecs))
}

/// All generalized eigenvalues of (Θ⁺, 𝗠⁺), non-increasing.
pub fn theta_spectrum(angular: &AngularBlocks) -> Result<Vec<f64>> {
    Ok(symmetric_eigen(&angular.theta_plus, &angular.mass_plus)?.0)
}

/// Top-K eigenpairs with the first significant component made positive.
pub fn eigen_theta(angular: &AngularBlocks, k: usize) -> Result<EigenBasis> {
    let n = angular.n_pairs();
    if k == 0 || k > n {
        return Err(invalid("K must satisfy 1 ≤ K ≤ number of angular pairs"));
    }
    let (vals, vecs) = symmetric_eigen(&angular.theta_plus, &angular.mass_plus)?;
    let d = angular.dim();
    let mut h_plus = Vec::with_capacity(k);
    for c in 0..k {
        let mut h: Vec<f64> = vecs.column(c).iter().copied().collect();
        let big = h.iter().fold(0.0, |m: f64, v| m.max(fabs(*v)));
        if let Some(first) = h.iter().find(|v| fabs(**v) > 1e-8 * big) {
            if *first < 0.0 {
                h.iter_mut().for_each(|v| *v = -*v);
            }
        }
        h_plus.push(h);
    }
    let mut h_minus = Vec::with_capacity(k * d);
    for h in &h_plus {
        for i in 0..d {
            let mut v = vec![0.0; n * d];
            for p in 0..n {
                let mom = &angular.moments[p];
                let minv = &angular.mass_minus_inv[p];
                for a in 0..d {
                    let mut s = 0.0;
                    for b in 0..d {
                        s += minv[(a, b)] * mom[(b, i)];
                    }
                    v[p * d + a] = s * h[p];
                }
            }
            h_minus.push(v);
        }
    }
    Ok(EigenBasis { gammas: vals[..k].to_vec(), h_plus, h_minus, dim: d })
}

/// The Galerkin system of 𝐓 − 𝐒 on Y_{h,K}, with the odd unknowns
/// eliminated element by element and the even Schur complement factored.
#[derive(Debug, Clone)]
pub struct CorrectionSolver {
    basis: EigenBasis,
    coupling: [DMatrix<f64>; 2],
    q_inv: Vec<DMatrix<f64>>,
    schur: EnvelopeCholesky,
    n_vertices: usize,
    n_elements: usize,
}

fn gram(a: &[Vec<f64>], b: &[Vec<f64>], m: impl Fn(&[f64]) -> Vec<f64>) -> DMatrix<f64> {
    let mb: Vec<Vec<f64>> = b.iter().map(|v| m(v)).collect();
    DMatrix::from_fn(a.len(), b.len(), |i, j| crate::math::dot(&a[i], &mb[j]))
}

fn diag_mul(w: &[f64], v: &[f64]) -> Vec<f64> {
    v.iter().zip(w).map(|(a, b)| a * b).collect()
}

fn dense_mul(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (m * nalgebra::DVector::from_column_slice(v)).iter().copied().collect()
}

impl CorrectionSolver {
    pub fn new(problem: &TransportProblem, basis: EigenBasis) -> Result<Self> {
        let m = problem.matrices();
        let ang = &m.angular;
        let sp = &m.spatial;
        let kk = basis.k();
        let d = basis.dim;
        let nv = sp.n_vertices();
        let ne = sp.n_elements();

        let gm_plus = gram(&basis.h_plus, &basis.h_plus, |v| diag_mul(&ang.mass_plus, v));
        let gt_plus = gram(&basis.h_plus, &basis.h_plus, |v| dense_mul(&ang.theta_plus, v));
        let g_omega: Vec<DMatrix<f64>> =
            ang.omega.iter().map(|w| gram(&basis.h_plus, &basis.h_plus, |v| diag_mul(w, v))).collect();
        let mm = ang.mass_minus_dense();
        let gm_minus = gram(&basis.h_minus, &basis.h_minus, |v| dense_mul(&mm, v));
        let gt_minus = gram(&basis.h_minus, &basis.h_minus, |v| dense_mul(&ang.theta_minus, v));
        let coupling = [0, 1].map(|i| {
            let a = ang.moment_dense(i);
            gram(&basis.h_minus, &basis.h_plus, |v| dense_mul(&a, v))
        });

        let mut q_inv = Vec::with_capacity(ne);
        for e in 0..ne {
            let q = &gm_minus * sp.diag_t[e] - &gt_minus * sp.diag_s[e];
            let inv = q.cholesky().ok_or(Error::SingularReduced)?.inverse();
            q_inv.push(inv);
        }

        // P_r on the vertex pattern, unknown (v, k) at v·K + k
        let mut trip: Vec<(usize, usize, f64)> = Vec::with_capacity(sp.mass_t.nnz() * kk * kk);
        for (v, w, _) in sp.mass_t.triplets() {
            let mt = sp.mass_t.get(v, w);
            let ms = sp.mass_s.get(v, w);
            let es: Vec<f64> = sp.edge_mass.iter().map(|e| e.get(v, w)).collect();
            for a in 0..kk {
                for b in 0..kk {
                    let mut val = gm_plus[(a, b)] * mt - gt_plus[(a, b)] * ms;
                    for (c, ev) in es.iter().enumerate() {
                        val += g_omega[c][(a, b)] * ev;
                    }
                    trip.push((v * kk + a, w * kk + b, val));
                }
            }
        }
        // A_rᵀ Q⁻¹ A_r, element by element
        let tri = element_vertices(&sp.deriv);
        for e in 0..ne {
            let local = local_coupling(&coupling, &sp.deriv, &tri[e], e, kk, d);
            let prod = local.transpose() * &q_inv[e] * &local;
            for (la, &va) in tri[e].iter().enumerate() {
                for (lb, &vb) in tri[e].iter().enumerate() {
                    for a in 0..kk {
                        for b in 0..kk {
                            trip.push((va * kk + a, vb * kk + b, prod[(la * kk + a, lb * kk + b)]));
                        }
                    }
                }
            }
        }
        let sigma = CsrMatrix::from_triplets(nv * kk, nv * kk, &trip);
        let schur = EnvelopeCholesky::factor(&sigma).map_err(|_| Error::SingularReduced)?;
        Ok(Self { basis, coupling, q_inv, schur, n_vertices: nv, n_elements: ne })
    }

    pub fn basis(&self) -> &EigenBasis {
        &self.basis
    }

    /// K·n_R^+ + d·K·n_R^-
    pub fn reduced_dimension(&self) -> usize {
        let k = self.basis.k();
        k * self.n_vertices + k * self.basis.dim * self.n_elements
    }

    /// W_Yᵀx: even coefficients a[v·K + k] and odd coefficients
    /// b[e·K·d + (k·d + i)].
    pub fn project(&self, x: &BlockVector) -> (Vec<f64>, Vec<f64>) {
        let (nv, ne) = (self.n_vertices, self.n_elements);
        let kk = self.basis.k();
        let kd = kk * self.basis.dim;
        let mut a = vec![0.0; nv * kk];
        for (k, h) in self.basis.h_plus.iter().enumerate() {
            for (p, &hp) in h.iter().enumerate() {
                if hp == 0.0 {
                    continue;
                }
                let xp = &x.even()[p * nv..(p + 1) * nv];
                for v in 0..nv {
                    a[v * kk + k] += hp * xp[v];
                }
            }
        }
        let mut b = vec![0.0; ne * kd];
        for (m, h) in self.basis.h_minus.iter().enumerate() {
            for (l, &hl) in h.iter().enumerate() {
                if hl == 0.0 {
                    continue;
                }
                let xl = &x.odd()[l * ne..(l + 1) * ne];
                for e in 0..ne {
                    b[e * kd + m] += hl * xl[e];
                }
            }
        }
        (a, b)
    }

    /// W_Y(a, b), the inverse bookkeeping of [`Self::project`].
    pub fn embed(&self, problem: &TransportProblem, a: &[f64], b: &[f64]) -> BlockVector {
        let (nv, ne) = (self.n_vertices, self.n_elements);
        let kk = self.basis.k();
        let kd = kk * self.basis.dim;
        let mut out = problem.zeros();
        for (k, h) in self.basis.h_plus.iter().enumerate() {
            for (p, &hp) in h.iter().enumerate() {
                let y = &mut out.even_mut()[p * nv..(p + 1) * nv];
                for v in 0..nv {
                    y[v] += hp * a[v * kk + k];
                }
            }
        }
        for (m, h) in self.basis.h_minus.iter().enumerate() {
            for (l, &hl) in h.iter().enumerate() {
                if hl == 0.0 {
                    continue;
                }
                let y = &mut out.odd_mut()[l * ne..(l + 1) * ne];
                for e in 0..ne {
                    y[e] += hl * b[e * kd + m];
                }
            }
        }
        out
    }

    /// Solves [P, −Aᵀ; A, Q][a; b] = [f; g] for the reduced system.
    pub fn solve_reduced(&self, problem: &TransportProblem, f: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let sp = &problem.matrices().spatial;
        let kk = self.basis.k();
        let kd = kk * self.basis.dim;
        let tri = element_vertices(&sp.deriv);
        let mut rhs = f.to_vec();
        let mut locals = Vec::with_capacity(self.n_elements);
        for e in 0..self.n_elements {
            let local = local_coupling(&self.coupling, &sp.deriv, &tri[e], e, kk, self.basis.dim);
            let ge = nalgebra::DVector::from_column_slice(&g[e * kd..(e + 1) * kd]);
            let t = local.transpose() * (&self.q_inv[e] * ge);
            for (l, &v) in tri[e].iter().enumerate() {
                for k in 0..kk {
                    rhs[v * kk + k] += t[l * kk + k];
                }
            }
            locals.push(local);
        }
        let a = self.schur.solve(&rhs);
        let mut b = vec![0.0; g.len()];
        for e in 0..self.n_elements {
            let ae = nalgebra::DVector::from_fn(3 * kk, |r, _| a[tri[e][r / kk] * kk + r % kk]);
            let ge = nalgebra::DVector::from_column_slice(&g[e * kd..(e + 1) * kd]);
            let be = &self.q_inv[e] * (ge - &locals[e] * ae);
            b[e * kd..(e + 1) * kd].copy_from_slice(be.as_slice());
        }
        (a, b)
    }

    /// u_c ∈ Y_{h,K} with (t − s)(u_c, v) = s(r, v) for all v ∈ Y_{h,K}.
    pub fn galerkin_correction(&self, problem: &TransportProblem, r: &BlockVector) -> Result<BlockVector> {
        let sr = problem.apply_s(r)?;
        let (f, g) = self.project(&sr);
        let (a, b) = self.solve_reduced(problem, &f, &g);
        let u = self.embed(problem, &a, &b);
        if !u.is_finite() {
            return Err(Error::NonFinite("galerkin correction"));
        }
        Ok(u)
    }
}

/// Vertices of each element, read off the derivative matrix rows.
fn element_vertices(deriv: &[CsrMatrix; 2]) -> Vec<[usize; 3]> {
    (0..deriv[0].nrows())
        .map(|e| {
            let cols = deriv[0].row(e).0;
            [cols[0], cols[1], cols[2]]
        })
        .collect()
}

/// Rows (k, i) of A_r restricted to element e; columns (local vertex, k').
fn local_coupling(
    coupling: &[DMatrix<f64>; 2],
    deriv: &[CsrMatrix; 2],
    verts: &[usize; 3],
    e: usize,
    kk: usize,
    d: usize,
) -> DMatrix<f64> {
    let mut l = DMatrix::zeros(kk * d, 3 * kk);
    for (lv, &v) in verts.iter().enumerate() {
        let dv = [deriv[0].get(e, v), deriv[1].get(e, v)];
        for r in 0..kk * d {
            for k in 0..kk {
                l[(r, lv * kk + k)] = coupling[0][(r, k)] * dv[0] + coupling[1][(r, k)] * dv[1];
            }
        }
    }
    l
}

/// Odd-only ũ¹: 𝐌⁻(u⁻_half + ũ¹) = 𝐒⁻u⁻_half + ℓ⁻ − 𝐀(u⁺_half + u_c⁺).
pub fn enrich_odd_sweep(problem: &TransportProblem, u_half: &BlockVector, u_c: &BlockVector) -> Result<BlockVector> {
    let rhs = odd_rhs(problem, u_half, u_c, true);
    let z = problem.solve_m_odd(&rhs);
    let odd: Vec<f64> = z.iter().zip(u_half.odd()).map(|(a, b)| a - b).collect();
    BlockVector::from_parts(problem.layout(), vec![0.0; problem.layout().even_len()], odd)
}

/// Odd-only ũ²: (𝐌⁻ − 𝐒⁻)(u⁻_half + ũ²) = ℓ⁻ − 𝐀(u⁺_half + u_c⁺), by CG
/// preconditioned with 𝐌⁻.
pub fn enrich_odd_scatter(
    problem: &TransportProblem,
    u_half: &BlockVector,
    u_c: &BlockVector,
    tol: f64,
) -> Result<BlockVector> {
    let rhs = odd_rhs(problem, u_half, u_c, false);
    let mut z = u_half.odd().to_vec();
    pcg(
        |x, y| {
            let m = problem.apply_m_odd(x);
            let s = problem.apply_s_odd(x);
            for i in 0..y.len() {
                y[i] = m[i] - s[i];
            }
        },
        |r, z| z.copy_from_slice(&problem.solve_m_odd(r)),
        &rhs,
        &mut z,
        tol,
        10_000,
    )?;
    let odd: Vec<f64> = z.iter().zip(u_half.odd()).map(|(a, b)| a - b).collect();
    BlockVector::from_parts(problem.layout(), vec![0.0; problem.layout().even_len()], odd)
}

fn odd_rhs(problem: &TransportProblem, u_half: &BlockVector, u_c: &BlockVector, with_scatter: bool) -> Vec<f64> {
    let even: Vec<f64> = u_half.even().iter().zip(u_c.even()).map(|(a, b)| a + b).collect();
    let au = problem.apply_a(&even);
    let mut rhs: Vec<f64> = problem.matrices().load_odd.iter().zip(&au).map(|(l, a)| l - a).collect();
    if with_scatter {
        let s = problem.apply_s_odd(u_half.odd());
        rhs.iter_mut().zip(&s).for_each(|(r, s)| *r += s);
    }
    rhs
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    GalerkinCorrection,
    OddSweep,
    OddScatter,
    History,
}

/// Ordered columns spanning W_{h,N}. History columns carry their 𝐑₀ image.
#[derive(Debug, Clone, Default)]
pub struct SubspaceBasis {
    pub columns: Vec<BlockVector>,
    pub tags: Vec<Provenance>,
    pub images: Vec<Option<BlockVector>>,
}

impl SubspaceBasis {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Appends unless the column is zero, non-finite or repeats an earlier one.
    pub fn push(&mut self, column: BlockVector, tag: Provenance, image: Option<BlockVector>) {
        if column.is_zero() || !column.is_finite() {
            return;
        }
        let scale = column.norm_inf();
        if self.columns.iter().any(|c| c.sub(&column).norm_inf() <= 1e-14 * scale) {
            return;
        }
        self.columns.push(column);
        self.tags.push(tag);
        self.images.push(image);
    }
}

/// Which generators enter the minimization space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpaceKind {
    /// N = 0: plain source iteration.
    None,
    /// W^c = span{u_c}.
    Correction,
    /// span{u_c⁺, u_c⁻, ũ¹, ũ²}.
    Enriched,
    /// Enriched plus the last m + 1 iterates.
    EnrichedHistory(usize),
}

impl SpaceKind {
    pub fn needs_correction(self) -> bool {
        !matches!(self, SpaceKind::None)
    }

    pub fn history(self) -> Option<usize> {
        match self {
            SpaceKind::EnrichedHistory(m) => Some(m),
            _ => None,
        }
    }
}

/// Assembles the basis from already computed generators. `history` holds
/// (iterate, 𝐑₀ image) pairs, oldest first.
pub fn build_space(
    kind: SpaceKind,
    u_c: Option<&BlockVector>,
    u1: Option<&BlockVector>,
    u2: Option<&BlockVector>,
    history: &[(BlockVector, BlockVector)],
) -> SubspaceBasis {
    let mut basis = SubspaceBasis::default();
    match kind {
        SpaceKind::None => {}
        SpaceKind::Correction => {
            if let Some(c) = u_c {
                basis.push(c.clone(), Provenance::GalerkinCorrection, None);
            }
        }
        SpaceKind::Enriched | SpaceKind::EnrichedHistory(_) => {
            if let Some(c) = u_c {
                basis.push(c.even_part(), Provenance::GalerkinCorrection, None);
                basis.push(c.odd_part(), Provenance::GalerkinCorrection, None);
            }
            if let Some(v) = u1 {
                basis.push(v.clone(), Provenance::OddSweep, None);
            }
            if let Some(v) = u2 {
                basis.push(v.clone(), Provenance::OddScatter, None);
            }
            if let SpaceKind::EnrichedHistory(m) = kind {
                let start = history.len().saturating_sub(m + 1);
                for (u, img) in &history[start..] {
                    basis.push(u.clone(), Provenance::History, Some(img.clone()));
                }
            }
        }
    }
    basis
}
