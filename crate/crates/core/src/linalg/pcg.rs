use alloc::vec;

use crate::error::{Error, Result};
use crate::math::{dot, sqrt};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgOutcome {
    pub iterations: usize,
    /// ‖b − A x‖ / ‖b‖ in the Euclidean norm at exit.
    pub relative_residual: f64,
}

/// Preconditioned conjugate gradients for SPD `apply`. `x` holds the initial
/// guess on entry and the solution on exit.
pub fn pcg<A, P>(
    mut apply: A,
    mut precond: P,
    b: &[f64],
    x: &mut [f64],
    tol: f64,
    max_iter: usize,
) -> Result<PcgOutcome>
where
    A: FnMut(&[f64], &mut [f64]),
    P: FnMut(&[f64], &mut [f64]),
{
    let n = b.len();
    let bnorm = sqrt(dot(b, b));
    if bnorm == 0.0 {
        x.iter_mut().for_each(|v| *v = 0.0);
        return Ok(PcgOutcome { iterations: 0, relative_residual: 0.0 });
    }
    let mut r = vec![0.0; n];
    apply(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    let mut z = vec![0.0; n];
    let mut q = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut res = sqrt(dot(&r, &r)) / bnorm;
    let mut it = 0;
    while res > tol {
        if it == max_iter {
            return Err(Error::NoConvergence { what: "pcg", iterations: it, residual: res });
        }
        apply(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0) {
            return Err(Error::NoConvergence { what: "pcg", iterations: it, residual: res });
        }
        let alpha = rz / pq;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * q[i];
        }
        precond(&r, &mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        it += 1;
        res = sqrt(dot(&r, &r)) / bnorm;
        if !res.is_finite() {
            return Err(Error::NonFinite("pcg residual"));
        }
    }
    Ok(PcgOutcome { iterations: it, relative_residual: res })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn tridiagonal_system() {
        let n = 50;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                let mut s = 3.0 * x[i];
                if i > 0 {
                    s -= x[i - 1];
                }
                if i + 1 < n {
                    s -= x[i + 1];
                }
                y[i] = s;
            }
        };
        let b: Vec<f64> = (0..n).map(|i| 1.0 + i as f64).collect();
        let mut x = vec![0.0; n];
        let out = pcg(apply, |r: &[f64], z: &mut [f64]| z.copy_from_slice(r), &b, &mut x, 1e-12, 200)
            .unwrap();
        assert!(out.relative_residual <= 1e-12);
        let mut y = vec![0.0; n];
        apply(&x, &mut y);
        for i in 0..n {
            assert!((y[i] - b[i]).abs() < 1e-9);
        }
    }
}
