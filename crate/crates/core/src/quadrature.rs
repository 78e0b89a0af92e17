//! Reference quadrature rules.

use alloc::vec;
use alloc::vec::Vec;

use crate::math::{cos, fabs};

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut z = cos(core::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5));
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if fabs(dz) < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Symmetric 12-point rule of degree 6 on a triangle: barycentric
/// coordinates and weights normalized to sum to one.
pub fn triangle_degree6() -> Vec<([f64; 3], f64)> {
    let mut out = Vec::with_capacity(12);
    let orbit3 = [
        (0.063089014491502, 0.873821971016996, 0.050844906370207),
        (0.249286745170910, 0.501426509658179, 0.116786275726379),
    ];
    for &(a, b, w) in &orbit3 {
        out.push(([b, a, a], w));
        out.push(([a, b, a], w));
        out.push(([a, a, b], w));
    }
    let (a, b, c, w) = (0.053145049844817, 0.310352451033784, 0.636502499121399, 0.082851075618374);
    for l in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        out.push((l, w));
    }
    out
}
