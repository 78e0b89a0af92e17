#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rtaccel_core::assembly::AngularOptions;
use rtaccel_core::operators::TransportOptions;
use rtaccel_core::{AngularMesh, BlockVector, OpticalField, SourceSpec, SpatialMesh, SystemMatrices, TransportProblem};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Piecewise-constant random optics with σ_s/σ_t ≤ rho_max.
pub fn random_optics(mesh: &SpatialMesh, g: f64, rho_max: f64, seed: u64) -> OpticalField {
    let mut r = rng(seed);
    let ne = mesh.n_elements();
    let mut sa = Vec::with_capacity(ne);
    let mut ss = Vec::with_capacity(ne);
    for _ in 0..ne {
        let st: f64 = r.gen_range(0.5..5.0);
        let c: f64 = r.gen_range(0.0..rho_max);
        ss.push(c * st);
        sa.push((1.0 - c) * st);
    }
    OpticalField::new(sa, ss, g).unwrap()
}

pub fn random_source(mesh: &SpatialMesh, seed: u64) -> SourceSpec {
    let mut r = rng(seed ^ 0x5eed);
    let q = (0..mesh.n_elements()).map(|_| r.gen_range(0.0..1.0)).collect();
    let inflow = (0..mesh.boundary_edges().len()).map(|_| r.gen_range(0.0..0.5)).collect();
    SourceSpec { q, inflow }
}

pub fn build(spatial: &SpatialMesh, angular: &AngularMesh, optics: &OpticalField, source: &SourceSpec) -> TransportProblem {
    let m = SystemMatrices::assemble(spatial, angular, optics, source, &AngularOptions::default()).unwrap();
    TransportProblem::new(m, &TransportOptions { inner_tol: 1e-13, ..Default::default() }).unwrap()
}

/// Small random instance on a unit square.
pub fn tiny(sphere: bool, cells: usize, g: f64, rho_max: f64, seed: u64) -> TransportProblem {
    let spatial = SpatialMesh::rectangle(cells, cells, 1.0, 1.0).unwrap();
    let angular = if sphere { AngularMesh::octahedral_sphere(0).unwrap() } else { AngularMesh::circle(6).unwrap() };
    let optics = random_optics(&spatial, g, rho_max, seed);
    let source = random_source(&spatial, seed);
    build(&spatial, &angular, &optics, &source)
}

pub fn random_vector(p: &TransportProblem, seed: u64) -> BlockVector {
    let mut r = rng(seed);
    let flat: Vec<f64> = (0..p.layout().total()).map(|_| r.gen_range(-1.0..1.0)).collect();
    BlockVector::from_flat(p.layout(), &flat).unwrap()
}

/// Dense matrix of a linear map, one unit vector at a time.
pub fn probe(p: &TransportProblem, f: impl Fn(&BlockVector) -> BlockVector) -> DMatrix<f64> {
    let n = p.layout().total();
    let mut out = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = f(&BlockVector::from_flat(p.layout(), &e).unwrap()).to_flat();
        out.set_column(j, &DVector::from_vec(col));
        e[j] = 0.0;
    }
    out
}

pub struct Dense {
    pub t: DMatrix<f64>,
    pub s: DMatrix<f64>,
    pub m: DMatrix<f64>,
    pub load: DVector<f64>,
}

pub fn dense(p: &TransportProblem) -> Dense {
    Dense {
        t: probe(p, |x| p.apply_t(x).unwrap()),
        s: probe(p, |x| p.apply_s(x).unwrap()),
        m: probe(p, |x| p.apply_m(x).unwrap()),
        load: DVector::from_vec(p.load().to_flat()),
    }
}

pub fn m_norm(m: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(m * x)).max(0.0).sqrt()
}

pub fn flat(x: &BlockVector) -> DVector<f64> {
    DVector::from_vec(x.to_flat())
}
