//! Block matrices of the even/odd Galerkin system and the load vector.

mod angular;
mod kernel;
mod spatial;

use alloc::vec;
use alloc::vec::Vec;

pub use angular::{assemble_angular, AngularBlocks, AngularOptions};
pub use kernel::hg_phase;
pub use spatial::{assemble_spatial, SpatialBlocks};

use crate::error::{invalid, Result};
use crate::geometry::{AngularMesh, SpatialMesh};
use crate::operators::Layout;

/// Piecewise constant optical parameters and the anisotropy factor.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalField {
    sigma_a: Vec<f64>,
    sigma_s: Vec<f64>,
    g: f64,
}

impl OpticalField {
    pub fn new(sigma_a: Vec<f64>, sigma_s: Vec<f64>, g: f64) -> Result<Self> {
        if sigma_a.len() != sigma_s.len() || sigma_a.is_empty() {
            return Err(invalid("sigma_a and sigma_s must have one entry per element"));
        }
        if sigma_a.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(invalid("sigma_a must be positive and finite"));
        }
        if sigma_s.iter().any(|&s| !(s >= 0.0) || !s.is_finite()) {
            return Err(invalid("sigma_s must be non-negative and finite"));
        }
        if !(0.0..1.0).contains(&g) {
            return Err(invalid("anisotropy factor g must lie in [0, 1)"));
        }
        Ok(Self { sigma_a, sigma_s, g })
    }

    pub fn uniform(n_elements: usize, sigma_a: f64, sigma_s: f64, g: f64) -> Result<Self> {
        Self::new(vec![sigma_a; n_elements], vec![sigma_s; n_elements], g)
    }

    pub fn n_elements(&self) -> usize {
        self.sigma_a.len()
    }

    pub fn sigma_a(&self) -> &[f64] {
        &self.sigma_a
    }

    pub fn sigma_s(&self) -> &[f64] {
        &self.sigma_s
    }

    pub fn sigma_t(&self, e: usize) -> f64 {
        self.sigma_a[e] + self.sigma_s[e]
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    /// ρ = max σ_s/σ_t
    pub fn rho(&self) -> f64 {
        (0..self.n_elements())
            .map(|e| self.sigma_s[e] / self.sigma_t(e))
            .fold(0.0, f64::max)
    }
}

/// Isotropic volume source per element and isotropic inflow per boundary edge.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub q: Vec<f64>,
    /// Indexed like [`SpatialMesh::boundary_edges`].
    pub inflow: Vec<f64>,
}

impl SourceSpec {
    pub fn zero(mesh: &SpatialMesh) -> Self {
        Self { q: vec![0.0; mesh.n_elements()], inflow: vec![0.0; mesh.boundary_edges().len()] }
    }

    pub fn volume(mesh: &SpatialMesh, q: Vec<f64>) -> Self {
        Self { q, inflow: vec![0.0; mesh.boundary_edges().len()] }
    }

    fn validate(&self, mesh: &SpatialMesh) -> Result<()> {
        if self.q.len() != mesh.n_elements() || self.inflow.len() != mesh.boundary_edges().len() {
            return Err(invalid("source sizes do not match the mesh"));
        }
        if self.q.iter().chain(&self.inflow).any(|v| !v.is_finite()) {
            return Err(invalid("source values must be finite"));
        }
        Ok(())
    }
}

/// Load blocks (ℓ⁺, ℓ⁻) in the angular-major layout of [`Layout`].
pub fn assemble_load(
    mesh: &SpatialMesh,
    angular: &AngularBlocks,
    source: &SourceSpec,
) -> Result<(Vec<f64>, Vec<f64>)> {
    source.validate(mesh)?;
    let nv = mesh.n_vertices();
    let np = angular.n_pairs();
    let hat = spatial::hat_load(mesh, &source.q);
    let mut even = vec![0.0; nv * np];
    for k in 0..np {
        let block = &mut even[k * nv..(k + 1) * nv];
        for (b, h) in block.iter_mut().zip(&hat) {
            *b = angular.mass_plus[k] * h;
        }
        for (edge, &qb) in mesh.boundary_edges().iter().zip(&source.inflow) {
            if qb == 0.0 {
                continue;
            }
            let c = qb * angular.omega[edge.normal_class][k] * edge.length / 2.0;
            for &v in &edge.vertices {
                block[v] += c;
            }
        }
    }
    let odd = vec![0.0; mesh.n_elements() * angular.n_odd()];
    Ok((even, odd))
}

/// Everything the operators need: spatial and angular blocks, load, ρ.
#[derive(Debug, Clone)]
pub struct SystemMatrices {
    pub spatial: SpatialBlocks,
    pub angular: AngularBlocks,
    pub load_even: Vec<f64>,
    pub load_odd: Vec<f64>,
    pub rho: f64,
    pub layout: Layout,
}

impl SystemMatrices {
    pub fn assemble(
        spatial_mesh: &SpatialMesh,
        angular_mesh: &AngularMesh,
        optics: &OpticalField,
        source: &SourceSpec,
        opts: &AngularOptions,
    ) -> Result<Self> {
        let spatial = assemble_spatial(spatial_mesh, optics)?;
        let angular = assemble_angular(angular_mesh, optics.g(), spatial_mesh.normals(), opts)?;
        let (load_even, load_odd) = assemble_load(spatial_mesh, &angular, source)?;
        let layout = Layout {
            n_vertices: spatial_mesh.n_vertices(),
            n_elements: spatial_mesh.n_elements(),
            n_pairs: angular.n_pairs(),
            n_local: angular.dim(),
        };
        Ok(Self { spatial, angular, load_even, load_odd, rho: optics.rho(), layout })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_element_load() {
        let mesh = SpatialMesh::rectangle(1, 1, 1.0, 1.0).unwrap();
        let amesh = AngularMesh::circle(2).unwrap();
        let ang = assemble_angular(&amesh, 0.0, mesh.normals(), &AngularOptions::default()).unwrap();
        let src = SourceSpec::volume(&mesh, vec![1.0, 0.0]);
        let (even, odd) = assemble_load(&mesh, &ang, &src).unwrap();
        assert!(odd.iter().all(|&v| v == 0.0));
        // triangle 0 = (v0, v1, v3), area 1/2; hat integral 1/6; pair measure π
        let pi = core::f64::consts::PI;
        for k in 0..2 {
            let b = &even[k * 4..k * 4 + 4];
            let expect = [pi / 6.0, pi / 6.0, 0.0, pi / 6.0];
            for i in 0..4 {
                assert!((b[i] - expect[i]).abs() < 1e-14);
            }
        }
        let zero = assemble_load(&mesh, &ang, &SourceSpec::zero(&mesh)).unwrap();
        assert!(zero.0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn optics_validation() {
        assert!(OpticalField::new(vec![0.0], vec![1.0], 0.1).is_err());
        assert!(OpticalField::new(vec![1.0], vec![-1.0], 0.1).is_err());
        assert!(OpticalField::new(vec![1.0], vec![1.0], 1.0).is_err());
        let o = OpticalField::new(vec![0.01, 1.0], vec![10.0, 0.0], 0.5).unwrap();
        assert!((o.rho() - 10.0 / 10.01).abs() < 1e-15);
    }
}
