pub(crate) use libm::{atan2, cos, fabs, sin, sqrt};

pub(crate) type V3 = [f64; 3];

pub(crate) fn dot3(a: V3, b: V3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross3(a: V3, b: V3) -> V3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn norm3(a: V3) -> f64 {
    sqrt(dot3(a, a))
}

pub(crate) fn normalize3(a: V3) -> V3 {
    let n = norm3(a);
    [a[0] / n, a[1] / n, a[2] / n]
}

pub(crate) fn neg3(a: V3) -> V3 {
    [-a[0], -a[1], -a[2]]
}

/// Great-circle distance between unit vectors.
pub(crate) fn arc_between(a: V3, b: V3) -> f64 {
    atan2(norm3(cross3(a, b)), dot3(a, b))
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
