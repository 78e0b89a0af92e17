//! Weighted least squares over the subspace (normal equations in the
//! 𝐌 inner product, minimum-norm solution).

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::math::sqrt;
use crate::operators::{BlockVector, TransportProblem};
use crate::par;
use crate::subspace::SubspaceBasis;

/// Relative eigenvalue cutoff for the normal matrix.
pub const RANK_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct MinimizeResult {
    pub coefficients: Vec<f64>,
    pub u_next: BlockVector,
    pub r_next: BlockVector,
    pub residual_norm: f64,
    pub rank: usize,
    /// 𝐑₀ images of the basis columns.
    pub images: Vec<BlockVector>,
}

/// Minimizes ‖r_half + 𝐑₀ W w‖_M over w.
pub fn minimize(
    problem: &TransportProblem,
    u_half: &BlockVector,
    r_half: &BlockVector,
    basis: &SubspaceBasis,
) -> Result<MinimizeResult> {
    let n = basis.len();
    let computed: Vec<Result<BlockVector>> = par::map(n, |j| match &basis.images[j] {
        Some(img) => Ok(img.clone()),
        None => problem.apply_r0(&basis.columns[j]),
    });
    let images = computed.into_iter().collect::<Result<Vec<_>>>()?;
    let mut coefficients = vec![0.0; n];
    let mut rank = 0;
    if n > 0 {
        let m_images = images.iter().map(|z| problem.apply_m(z)).collect::<Result<Vec<_>>>()?;
        let mut g = DMatrix::zeros(n, n);
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            for j in 0..=i {
                let v = images[i].dot(&m_images[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
            rhs[i] = -r_half.dot(&m_images[i]);
        }
        if g.iter().chain(&rhs).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("normal equations"));
        }
        // Jacobi scaling keeps columns of very different size comparable
        let scale: Vec<f64> = (0..n).map(|i| if g[(i, i)] > 0.0 { 1.0 / sqrt(g[(i, i)]) } else { 0.0 }).collect();
        let gs = DMatrix::from_fn(n, n, |i, j| scale[i] * g[(i, j)] * scale[j]);
        let eig = SymmetricEigen::new(gs);
        let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
        if top > 0.0 {
            let mut ws = vec![0.0; n];
            for (c, &lam) in eig.eigenvalues.iter().enumerate() {
                if lam <= RANK_CUTOFF * top {
                    continue;
                }
                rank += 1;
                let v = eig.eigenvectors.column(c);
                let proj: f64 = (0..n).map(|i| v[i] * scale[i] * rhs[i]).sum();
                for i in 0..n {
                    ws[i] += v[i] * proj / lam;
                }
            }
            for i in 0..n {
                coefficients[i] = scale[i] * ws[i];
            }
        }
    }
    let mut u_next = u_half.clone();
    let mut r_next = r_half.clone();
    for j in 0..n {
        if coefficients[j] != 0.0 {
            u_next.axpy(coefficients[j], &basis.columns[j]);
            r_next.axpy(coefficients[j], &images[j]);
        }
    }
    let residual_norm = problem.weighted_norm(&r_next)?;
    Ok(MinimizeResult { coefficients, u_next, r_next, residual_norm, rank, images })
}
