use alloc::vec;
use alloc::vec::Vec;

use super::OpticalField;
use crate::error::{invalid, Result};
use crate::geometry::SpatialMesh;
use crate::linalg::CsrMatrix;

/// Spatial finite element blocks. Every vertex-by-vertex matrix shares the
/// P1 adjacency pattern so that linear combinations are value-wise.
#[derive(Debug, Clone)]
pub struct SpatialBlocks {
    /// M_σt^+ (consistent P1 mass weighted by σ_t)
    pub mass_t: CsrMatrix,
    /// M_σs^+
    pub mass_s: CsrMatrix,
    /// Diagonal of M_σt^- (σ_t · area)
    pub diag_t: Vec<f64>,
    /// Diagonal of M_σs^-
    pub diag_s: Vec<f64>,
    /// D_n, elements × vertices, entries area · ∂φ_v/∂r_n
    pub deriv: [CsrMatrix; 2],
    /// Boundary edge mass per distinct outward normal.
    pub edge_mass: Vec<CsrMatrix>,
    pub normals: Vec<[f64; 2]>,
    pub areas: Vec<f64>,
}

impl SpatialBlocks {
    pub fn n_vertices(&self) -> usize {
        self.mass_t.nrows()
    }

    pub fn n_elements(&self) -> usize {
        self.diag_t.len()
    }
}

fn p1_pattern(mesh: &SpatialMesh) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::with_capacity(9 * mesh.n_elements());
    for tri in mesh.triangles() {
        for &a in tri {
            for &b in tri {
                t.push((a, b, 0.0));
            }
        }
    }
    t
}

fn weighted_mass(mesh: &SpatialMesh, sigma: &[f64]) -> CsrMatrix {
    let mut t = p1_pattern(mesh);
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let c = sigma[e] * mesh.areas()[e] / 12.0;
        for (la, &a) in tri.iter().enumerate() {
            for (lb, &b) in tri.iter().enumerate() {
                t.push((a, b, if la == lb { 2.0 * c } else { c }));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.n_vertices(), mesh.n_vertices(), &t)
}

pub fn assemble_spatial(mesh: &SpatialMesh, optics: &OpticalField) -> Result<SpatialBlocks> {
    let ne = mesh.n_elements();
    let nv = mesh.n_vertices();
    if optics.n_elements() != ne {
        return Err(invalid("optical field size does not match the mesh"));
    }
    let sigma_t: Vec<f64> = (0..ne).map(|e| optics.sigma_t(e)).collect();
    let sigma_s = optics.sigma_s();
    let areas = mesh.areas().to_vec();
    let mut d = [Vec::with_capacity(3 * ne), Vec::with_capacity(3 * ne)];
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let grads = mesh.hat_gradients(e);
        for (l, &v) in tri.iter().enumerate() {
            for n in 0..2 {
                d[n].push((e, v, areas[e] * grads[l][n]));
            }
        }
    }
    let [dx, dy] = d;
    let mut edge_mass = Vec::with_capacity(mesh.normals().len());
    for class in 0..mesh.normals().len() {
        let mut t = p1_pattern(mesh);
        for edge in mesh.boundary_edges().iter().filter(|e| e.normal_class == class) {
            let [a, b] = edge.vertices;
            let c = edge.length / 6.0;
            t.extend_from_slice(&[(a, a, 2.0 * c), (b, b, 2.0 * c), (a, b, c), (b, a, c)]);
        }
        edge_mass.push(CsrMatrix::from_triplets(nv, nv, &t));
    }
    Ok(SpatialBlocks {
        mass_t: weighted_mass(mesh, &sigma_t),
        mass_s: weighted_mass(mesh, sigma_s),
        diag_t: (0..ne).map(|e| sigma_t[e] * areas[e]).collect(),
        diag_s: (0..ne).map(|e| sigma_s[e] * areas[e]).collect(),
        deriv: [CsrMatrix::from_triplets(ne, nv, &dx), CsrMatrix::from_triplets(ne, nv, &dy)],
        edge_mass,
        normals: mesh.normals().to_vec(),
        areas,
    })
}

/// ∫ q φ_i for piecewise constant q.
pub(crate) fn hat_load(mesh: &SpatialMesh, q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; mesh.n_vertices()];
    for (e, tri) in mesh.triangles().iter().enumerate() {
        let c = q[e] * mesh.areas()[e] / 3.0;
        for &v in tri {
            out[v] += c;
        }
    }
    out
}
