use alloc::vec;
use alloc::vec::Vec;
use nalgebra::DMatrix;

use super::kernel::Kernel;
use crate::error::{Error, Result};
use crate::geometry::{AngularDomain, AngularMesh};
use crate::math::{arc_between, cos, fabs, sqrt, V3};
use crate::par;

/// Quadrature controls for the scattering matrices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularOptions {
    /// Subdivision level for well-separated element pairs; `None` picks one
    /// from the element size.
    pub far_sublevel: Option<usize>,
    /// Subdivision level for element pairs closer than three diameters;
    /// `None` picks one from the kernel width 1 − g.
    pub near_sublevel: Option<usize>,
    /// Rescale Θ⁺ symmetrically so that Θ⁺𝟙 = 𝗠⁺𝟙 holds exactly.
    pub normalize: bool,
}

impl Default for AngularOptions {
    fn default() -> Self {
        Self { far_sublevel: None, near_sublevel: None, normalize: true }
    }
}

/// Angular blocks. Odd basis functions of pair k are the ambient
/// coordinates s_a (a < dim) restricted to K_k ∪ −K_k; odd index k·dim + a.
#[derive(Debug, Clone)]
pub struct AngularBlocks {
    pub domain: AngularDomain,
    pub g: f64,
    /// Θ⁺, n_S^+ × n_S^+
    pub theta_plus: DMatrix<f64>,
    /// Θ⁻, n_S^- × n_S^-
    pub theta_minus: DMatrix<f64>,
    /// Diagonal of 𝗠⁺ (pair measures).
    pub mass_plus: Vec<f64>,
    /// dim × dim blocks of 𝗠⁻.
    pub mass_minus: Vec<DMatrix<f64>>,
    pub mass_minus_inv: Vec<DMatrix<f64>>,
    /// moments[k][(a, i)] = (𝗔_i) entry at odd dof (k, a) and even dof k.
    pub moments: Vec<DMatrix<f64>>,
    /// ω[c][k] = ∫_{pair k} |s·n_c| ds for each spatial boundary normal.
    pub omega: Vec<Vec<f64>>,
    pub far_sublevel: usize,
    pub near_sublevel: usize,
    /// Range of the symmetric scaling applied to Θ⁺ (1, 1 if disabled).
    pub scaling_range: (f64, f64),
}

impl AngularBlocks {
    pub fn n_pairs(&self) -> usize {
        self.mass_plus.len()
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn n_odd(&self) -> usize {
        self.n_pairs() * self.dim()
    }

    /// Dense 𝗠⁻.
    pub fn mass_minus_dense(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(self.n_odd(), self.n_odd());
        for (k, b) in self.mass_minus.iter().enumerate() {
            m.view_mut((k * d, k * d), (d, d)).copy_from(b);
        }
        m
    }

    /// Dense 𝗔_i (n_S^- × n_S^+).
    pub fn moment_dense(&self, i: usize) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(self.n_odd(), self.n_pairs());
        for (k, b) in self.moments.iter().enumerate() {
            for a in 0..d {
                m[(k * d + a, k)] = b[(a, i)];
            }
        }
        m
    }
}

fn auto_far(mesh: &AngularMesh) -> usize {
    let h = if mesh.domain() == AngularDomain::Sphere { 0.35 } else { 0.2 };
    levels_for(mesh.max_diameter(), h)
}

fn auto_near(mesh: &AngularMesh, g: f64, far: usize) -> usize {
    match mesh.domain() {
        AngularDomain::Sphere => {
            let h = (1.5 * (1.0 - g)).min(0.35);
            levels_for(mesh.max_diameter(), h).clamp(far, far + 3)
        }
        AngularDomain::Circle => {
            let h = (0.5 * (1.0 - g)).min(0.2);
            levels_for(mesh.max_diameter(), h).clamp(far, 12)
        }
    }
}

fn levels_for(diam: f64, h: f64) -> usize {
    let mut s = 0;
    while diam / (1u64 << s) as f64 > h && s < 12 {
        s += 1;
    }
    s
}

struct Points {
    p: Vec<V3>,
    w: Vec<f64>,
}

fn points(mesh: &AngularMesh, sublevel: usize) -> Vec<Points> {
    (0..mesh.n_elements())
        .map(|e| {
            let r = mesh.rule(e, sublevel);
            Points { p: r.nodes, w: r.weights }
        })
        .collect()
}

/// Contribution Σ_x Σ_y w_x w_y θ(x·y) [1, x_a y_b].
fn pair_integral(kernel: &Kernel, x: &Points, y: &Points, dim: usize, out_plus: &mut f64, out_minus: &mut [f64]) {
    for (px, wx) in x.p.iter().zip(&x.w) {
        let (mut s0, mut s1, mut s2, mut s3) = (0.0, 0.0, 0.0, 0.0);
        for (py, wy) in y.p.iter().zip(&y.w) {
            let mu = (px[0] * py[0] + px[1] * py[1] + px[2] * py[2]).clamp(-1.0, 1.0);
            let kw = wy * kernel.eval(mu);
            s0 += kw;
            s1 += kw * py[0];
            s2 += kw * py[1];
            s3 += kw * py[2];
        }
        *out_plus += wx * s0;
        let sy = [s1, s2, s3];
        for a in 0..dim {
            for b in 0..dim {
                out_minus[a * dim + b] += wx * px[a] * sy[b];
            }
        }
    }
}

pub fn assemble_angular(
    mesh: &AngularMesh,
    g: f64,
    normals: &[[f64; 2]],
    opts: &AngularOptions,
) -> Result<AngularBlocks> {
    let kernel = Kernel::new(g, mesh.domain())?;
    let np = mesh.n_pairs();
    let dim = mesh.dim();
    let n_odd = np * dim;
    let far = opts.far_sublevel.unwrap_or_else(|| auto_far(mesh));
    let near = opts.near_sublevel.unwrap_or_else(|| auto_near(mesh, g, far)).max(far);
    let far_pts = points(mesh, far);
    let near_pts = if near > far { Some(points(mesh, near)) } else { None };
    let centroids: Vec<V3> = (0..mesh.n_elements()).map(|e| mesh.centroid(e)).collect();

    let rows = par::map(np, |k| {
        let r = mesh.pair(k)[0];
        let mut plus = vec![0.0; np];
        let mut minus = vec![0.0; dim * n_odd];
        let mut block = vec![0.0; dim * dim];
        for e in 0..mesh.n_elements() {
            let kk = mesh.pair_of(e);
            if kk < k {
                continue;
            }
            let close = arc_between(centroids[r], centroids[e])
                < 3.0 * mesh.diameter(r).max(mesh.diameter(e));
            let (x, y) = match (&near_pts, close) {
                (Some(n), true) => (&n[r], &n[e]),
                _ => (&far_pts[r], &far_pts[e]),
            };
            block.iter_mut().for_each(|v| *v = 0.0);
            let mut p = 0.0;
            pair_integral(&kernel, x, y, dim, &mut p, &mut block);
            plus[kk] += 2.0 * p;
            for a in 0..dim {
                for b in 0..dim {
                    minus[a * n_odd + kk * dim + b] += 2.0 * block[a * dim + b];
                }
            }
        }
        (plus, minus)
    });

    let mut theta_plus = DMatrix::zeros(np, np);
    let mut theta_minus = DMatrix::zeros(n_odd, n_odd);
    for (k, (plus, minus)) in rows.iter().enumerate() {
        for kk in k..np {
            theta_plus[(k, kk)] = plus[kk];
            theta_plus[(kk, k)] = plus[kk];
            for a in 0..dim {
                for b in 0..dim {
                    let v = minus[a * n_odd + kk * dim + b];
                    theta_minus[(k * dim + a, kk * dim + b)] = v;
                    theta_minus[(kk * dim + b, k * dim + a)] = v;
                }
            }
        }
    }
    // diagonal blocks come out transposed-equivalent only up to rounding
    let tm = theta_minus.transpose();
    theta_minus = (theta_minus + tm) * 0.5;

    let mass_plus: Vec<f64> = (0..np)
        .map(|k| mesh.pair(k).iter().map(|&e| mesh.measures()[e]).sum())
        .collect();

    if theta_plus.iter().chain(theta_minus.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Assembly("non-finite scattering matrix entry".into()));
    }

    let mut scaling_range = (1.0, 1.0);
    if opts.normalize {
        scaling_range = sinkhorn(&mut theta_plus, &mass_plus)?;
    }

    let moment_level = if mesh.domain() == AngularDomain::Sphere { 2 } else { 1 };
    let mut mass_minus = Vec::with_capacity(np);
    let mut mass_minus_inv = Vec::with_capacity(np);
    for k in 0..np {
        let r = mesh.rule(mesh.pair(k)[0], moment_level);
        let mut m = DMatrix::zeros(dim, dim);
        for (p, w) in r.nodes.iter().zip(&r.weights) {
            for a in 0..dim {
                for b in 0..dim {
                    m[(a, b)] += 2.0 * w * p[a] * p[b];
                }
            }
        }
        let inv = m
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Assembly("odd angular mass block is not positive definite".into()))?
            .inverse();
        mass_minus.push(m);
        mass_minus_inv.push(inv);
    }
    let moments = mass_minus.clone();

    let omega = normals
        .iter()
        .map(|n| {
            (0..np)
                .map(|k| {
                    let r = mesh.pair(k)[0];
                    2.0 * match mesh.domain() {
                        AngularDomain::Circle => circle_abs_projection(mesh, r, *n),
                        AngularDomain::Sphere => {
                            let q = mesh.rule(r, moment_level);
                            q.nodes
                                .iter()
                                .zip(&q.weights)
                                .map(|(p, w)| w * fabs(p[0] * n[0] + p[1] * n[1]))
                                .sum()
                        }
                    }
                })
                .collect()
        })
        .collect();

    Ok(AngularBlocks {
        domain: mesh.domain(),
        g,
        theta_plus,
        theta_minus,
        mass_plus,
        mass_minus,
        mass_minus_inv,
        moments,
        omega,
        far_sublevel: far,
        near_sublevel: near,
        scaling_range,
    })
}

/// Symmetric diagonal scaling D Θ D with row sums equal to `target`.
fn sinkhorn(theta: &mut DMatrix<f64>, target: &[f64]) -> Result<(f64, f64)> {
    let n = target.len();
    let mut d = vec![1.0; n];
    let mut converged = false;
    for _ in 0..1000 {
        let mut worst: f64 = 0.0;
        let mut next = d.clone();
        for i in 0..n {
            let row: f64 = (0..n).map(|j| theta[(i, j)] * d[j]).sum();
            if !(row > 0.0) {
                return Err(Error::Assembly("scattering row without positive mass".into()));
            }
            worst = worst.max(fabs(d[i] * row - target[i]) / target[i]);
            next[i] = sqrt(d[i] * target[i] / row);
        }
        if worst < 1e-13 {
            converged = true;
            break;
        }
        d = next;
    }
    if !converged {
        return Err(Error::NoConvergence { what: "scattering normalization", iterations: 1000, residual: f64::NAN });
    }
    for i in 0..n {
        for j in 0..n {
            theta[(i, j)] *= d[i] * d[j];
        }
    }
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = d.iter().copied().fold(0.0, f64::max);
    Ok((lo, hi))
}

/// ∫_arc |s·n| exactly, via the antiderivative of |cos|.
fn circle_abs_projection(mesh: &AngularMesh, e: usize, n: [f64; 2]) -> f64 {
    let c = mesh.corners(e);
    let t0 = libm::atan2(c[0][1], c[0][0]);
    let t1 = t0 + mesh.measures()[e];
    let phi = libm::atan2(n[1], n[0]);
    let len = libm::hypot(n[0], n[1]);
    let h = |u: f64| {
        let v = u - phi + 0.5 * core::f64::consts::PI;
        let k = libm::floor(v / core::f64::consts::PI);
        let r = v - k * core::f64::consts::PI;
        2.0 * k + 1.0 - cos(r)
    };
    len * (h(t1) - h(t0))
}
