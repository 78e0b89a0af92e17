use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math::{fabs, sqrt};

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    /// Outward unit normal.
    pub normal: [f64; 2],
    pub triangle: usize,
    /// Index into [`SpatialMesh::normals`].
    pub normal_class: usize,
    pub length: f64,
}

/// Conforming triangulation with counter-clockwise triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialMesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    areas: Vec<f64>,
    boundary: Vec<BoundaryEdge>,
    normals: Vec<[f64; 2]>,
}

impl SpatialMesh {
    /// Validates the triangulation and derives areas and boundary data.
    /// Clockwise triangles are reoriented.
    pub fn from_parts(vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>) -> Result<Self> {
        if triangles.is_empty() {
            return Err(Error::InvalidMesh("no triangles".into()));
        }
        let nv = vertices.len();
        if vertices.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::InvalidMesh("non-finite vertex".into()));
        }
        let mut areas = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::InvalidMesh(format!("triangle {t} references a missing vertex")));
            }
            let mut a = signed_area(&vertices, *tri);
            if a < 0.0 {
                tri.swap(1, 2);
                a = -a;
            }
            if !(a > 0.0) {
                return Err(Error::InvalidMesh(format!("triangle {t} is degenerate")));
            }
            areas.push(a);
        }
        let mut edges: BTreeMap<(usize, usize), Vec<(usize, usize, usize)>> = BTreeMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for l in 0..3 {
                let (a, b) = (tri[l], tri[(l + 1) % 3]);
                edges.entry((a.min(b), a.max(b))).or_default().push((t, a, b));
            }
        }
        let mut boundary = Vec::new();
        let mut normals: Vec<[f64; 2]> = Vec::new();
        for (key, owners) in &edges {
            match owners.len() {
                1 => {
                    let (t, a, b) = owners[0];
                    let (pa, pb) = (vertices[a], vertices[b]);
                    let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                    let length = sqrt(dx * dx + dy * dy);
                    let normal = [dy / length, -dx / length];
                    let class = match normals
                        .iter()
                        .position(|n| fabs(n[0] - normal[0]) + fabs(n[1] - normal[1]) < 1e-12)
                    {
                        Some(c) => c,
                        None => {
                            normals.push(normal);
                            normals.len() - 1
                        }
                    };
                    boundary.push(BoundaryEdge {
                        vertices: [a, b],
                        normal,
                        triangle: t,
                        normal_class: class,
                        length,
                    });
                }
                2 => {}
                _ => {
                    return Err(Error::InvalidMesh(format!(
                        "edge {:?} shared by {} triangles",
                        key,
                        owners.len()
                    )))
                }
            }
        }
        Ok(Self { vertices, triangles, areas, boundary, normals })
    }

    /// Uniform grid on [0, lx] × [0, ly]; each cell is split along its
    /// (+x, +y) diagonal. Vertex (i, j) has index j·(cells_x + 1) + i.
    pub fn rectangle(cells_x: usize, cells_y: usize, lx: f64, ly: f64) -> Result<Self> {
        if cells_x == 0 || cells_y == 0 {
            return Err(Error::InvalidArgument("cell counts must be positive".into()));
        }
        if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(Error::InvalidArgument("side lengths must be positive".into()));
        }
        let stride = cells_x + 1;
        let mut vertices = Vec::with_capacity(stride * (cells_y + 1));
        for j in 0..=cells_y {
            for i in 0..=cells_x {
                vertices.push([lx * i as f64 / cells_x as f64, ly * j as f64 / cells_y as f64]);
            }
        }
        let mut triangles = Vec::with_capacity(2 * cells_x * cells_y);
        for j in 0..cells_y {
            for i in 0..cells_x {
                let v00 = j * stride + i;
                let (v10, v01, v11) = (v00 + 1, v00 + stride, v00 + stride + 1);
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        Self::from_parts(vertices, triangles)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary
    }

    /// Distinct outward boundary normals.
    pub fn normals(&self) -> &[[f64; 2]] {
        &self.normals
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Constant gradients of the three local hat functions.
    pub fn hat_gradients(&self, t: usize) -> [[f64; 2]; 3] {
        let [a, b, c] = self.triangles[t].map(|v| self.vertices[v]);
        let two_area = 2.0 * self.areas[t];
        [
            [(b[1] - c[1]) / two_area, (c[0] - b[0]) / two_area],
            [(c[1] - a[1]) / two_area, (a[0] - c[0]) / two_area],
            [(a[1] - b[1]) / two_area, (b[0] - a[0]) / two_area],
        ]
    }

    pub fn bounding_box(&self) -> ([f64; 2], [f64; 2]) {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for p in &self.vertices {
            for d in 0..2 {
                lo[d] = lo[d].min(p[d]);
                hi[d] = hi[d].max(p[d]);
            }
        }
        (lo, hi)
    }
}

fn signed_area(v: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let [a, b, c] = t.map(|i| v[i]);
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        let m = SpatialMesh::rectangle(28, 28, 7.0, 7.0).unwrap();
        assert_eq!(m.n_vertices(), 841);
        assert_eq!(m.n_elements(), 1568);
        let m = SpatialMesh::rectangle(1, 1, 1.0, 1.0).unwrap();
        assert_eq!((m.n_vertices(), m.n_elements()), (4, 2));
        assert_eq!(m.boundary_edges().len(), 4);
        assert_eq!(m.normals().len(), 4);
        assert!(SpatialMesh::rectangle(0, 1, 1.0, 1.0).is_err());
        assert!(SpatialMesh::rectangle(1, 1, -1.0, 1.0).is_err());
    }

    #[test]
    fn outward_normals() {
        let m = SpatialMesh::rectangle(3, 2, 3.0, 1.0).unwrap();
        for e in m.boundary_edges() {
            let [a, b] = e.vertices.map(|v| m.vertices()[v]);
            let mid = [(a[0] + b[0]) / 2.0 - 1.5, (a[1] + b[1]) / 2.0 - 0.5];
            assert!(mid[0] * e.normal[0] + mid[1] * e.normal[1] > 0.0);
            assert!((e.normal[0].hypot(e.normal[1]) - 1.0).abs() < 1e-15);
        }
        let total: f64 = m.areas().iter().sum();
        assert!((total - 3.0).abs() < 1e-14);
    }

    #[test]
    fn hat_gradients_sum_to_zero() {
        let m = SpatialMesh::rectangle(2, 2, 1.0, 2.0).unwrap();
        for t in 0..m.n_elements() {
            let g = m.hat_gradients(t);
            for d in 0..2 {
                assert!((g[0][d] + g[1][d] + g[2][d]).abs() < 1e-14);
            }
        }
    }
}
