mod common;

use common::{build, random_optics, random_source, random_vector, tiny};
use rtaccel_core::assembly::hg_phase;
use rtaccel_core::geometry::{AngularCell, AngularDomain};
use rtaccel_core::minimizer::minimize;
use rtaccel_core::solver::dense_oracle;
use rtaccel_core::subspace::{eigen_theta, enrich_odd_scatter, enrich_odd_sweep, CorrectionSolver, Provenance, SubspaceBasis};
use rtaccel_core::{AngularMesh, BlockVector, OpticalField, SourceSpec, SpatialMesh};

const PI: f64 = std::f64::consts::PI;

fn basis_of(cols: Vec<BlockVector>) -> SubspaceBasis {
    let mut b = SubspaceBasis::default();
    for c in cols {
        b.push(c, Provenance::History, None);
    }
    b
}

#[test]
fn mesh_sizes() {
    let m = SpatialMesh::rectangle(28, 28, 7.0, 7.0).unwrap();
    assert_eq!((m.n_vertices(), m.n_elements()), (841, 1568));
    assert!((m.areas().iter().sum::<f64>() - 49.0).abs() < 1e-10);
    let one = SpatialMesh::rectangle(1, 1, 1.0, 1.0).unwrap();
    assert_eq!((one.n_vertices(), one.n_elements()), (4, 2));

    let s1 = AngularMesh::octahedral_sphere(1).unwrap();
    assert_eq!((s1.n_elements(), s1.n_pairs()), (32, 16));
    let s4 = AngularMesh::octahedral_sphere(4).unwrap();
    assert_eq!((s4.n_elements(), s4.n_pairs(), s4.n_odd()), (2048, 1024, 3072));
    for level in 0..4 {
        let s = AngularMesh::octahedral_sphere(level).unwrap();
        assert!((s.measures().iter().sum::<f64>() - 4.0 * PI).abs() < 1e-9);
        assert_eq!(AngularMesh::octahedral_sphere(level + 1).unwrap().n_elements(), 4 * s.n_elements());
    }

    let c2 = AngularMesh::circle(2).unwrap();
    assert_eq!(c2.n_elements(), 4);
    assert_eq!(c2.pairing(), &[2, 3, 0, 1]);
    let c8 = AngularMesh::circle(8).unwrap();
    assert!(c8.measures().iter().all(|m| (m - PI / 8.0).abs() < 1e-12));
    for (e, &p) in c8.pairing().iter().enumerate() {
        assert_eq!(c8.pairing()[p], e);
        let (a, b) = (c8.centroid(e), c8.centroid(p));
        assert!((0..3).all(|i| (a[i] + b[i]).abs() < 1e-12));
    }
}

#[test]
fn phase_function_values() {
    let iso = hg_phase(0.0, 0.3, AngularDomain::Sphere).unwrap();
    assert!((iso - 1.0 / (4.0 * PI)).abs() < 1e-15);
    let iso = hg_phase(0.0, -0.8, AngularDomain::Circle).unwrap();
    assert!((iso - 1.0 / (2.0 * PI)).abs() < 1e-15);
    let fwd = hg_phase(0.5, 1.0, AngularDomain::Sphere).unwrap();
    assert!((fwd - 0.75 / (4.0 * PI * 0.125)).abs() < 1e-12);
    assert!(hg_phase(0.5, 1.5, AngularDomain::Sphere).is_err());
    assert!(hg_phase(1.0, 0.0, AngularDomain::Sphere).is_err());
}

#[test]
fn indicator_norm_is_pair_measure_times_hat_mass() {
    let spatial = SpatialMesh::rectangle(1, 1, 1.0, 1.0).unwrap();
    let angular = AngularMesh::circle(2).unwrap();
    let optics = OpticalField::uniform(2, 1.0, 0.0, 0.0).unwrap();
    let p = build(&spatial, &angular, &optics, &SourceSpec::zero(&spatial));
    // vertex 0 lies in both triangles, each contributing area / 6
    let v = spatial.triangles().iter().filter(|t| t.contains(&0)).count() as f64;
    let mut x = p.zeros();
    x.even_mut()[0] = 1.0;
    let expect = (PI * v * 0.5 / 6.0).sqrt();
    assert!((p.weighted_norm(&x).unwrap() - expect).abs() < 1e-12);
    assert_eq!(p.weighted_norm(&p.zeros()).unwrap(), 0.0);
    let y = random_vector(&p, 3);
    let n = p.weighted_norm(&y).unwrap();
    assert!((p.weighted_norm(&y.scaled(-2.5)).unwrap() - 2.5 * n).abs() < 1e-12 * n);
}

#[test]
fn zero_data_gives_zero_iterates() {
    let spatial = SpatialMesh::rectangle(3, 3, 1.0, 1.0).unwrap();
    let angular = AngularMesh::octahedral_sphere(0).unwrap();
    let optics = random_optics(&spatial, 0.6, 0.9, 5);
    let p = build(&spatial, &angular, &optics, &SourceSpec::zero(&spatial));
    let z = p.zeros();
    assert!(p.residual_precond(&z).unwrap().is_zero());
    assert!(p.half_step(&z).unwrap().is_zero());
    assert!(dense_oracle(&p).unwrap().is_zero());
    assert!(p.solve_transport(&z).unwrap().is_zero());

    let cs = CorrectionSolver::new(&p, eigen_theta(&p.matrices().angular, 2).unwrap()).unwrap();
    assert!(cs.galerkin_correction(&p, &z).unwrap().is_zero());

    // no scattering: the correction vanishes and both odd enrichments agree
    let pure = OpticalField::uniform(spatial.n_elements(), 1.3, 0.0, 0.6).unwrap();
    let q = build(&spatial, &angular, &pure, &random_source(&spatial, 8));
    let cs = CorrectionSolver::new(&q, eigen_theta(&q.matrices().angular, 2).unwrap()).unwrap();
    let r = random_vector(&q, 4);
    let uc = cs.galerkin_correction(&q, &r).unwrap();
    assert!(uc.norm_inf() < 1e-14);
    let uh = random_vector(&q, 6);
    let a = enrich_odd_sweep(&q, &uh, &uc).unwrap();
    let b = enrich_odd_scatter(&q, &uh, &uc, 1e-13).unwrap();
    assert!(a.sub(&b).norm_inf() <= 1e-10 * a.norm_inf().max(1e-300));
}

#[test]
fn half_step_fixes_the_discrete_solution() {
    let p = tiny(true, 2, 0.4, 0.9, 12);
    let u = dense_oracle(&p).unwrap();
    let h = p.half_step(&u).unwrap();
    let n = p.weighted_norm(&u).unwrap();
    assert!(p.weighted_norm(&h.sub(&u)).unwrap() <= 1e-9 * n);
    assert!(p.weighted_norm(&p.residual_precond(&u).unwrap()).unwrap() <= 1e-9 * n);
    // residual identity r = half_step(u) − u
    let w = random_vector(&p, 2);
    let r = p.residual_precond(&w).unwrap();
    assert!(r.sub(&p.half_step(&w).unwrap().sub(&w)).norm_inf() <= 1e-10 * r.norm_inf());
    // no scattering: one half step is exact
    let spatial = SpatialMesh::rectangle(2, 2, 1.0, 1.0).unwrap();
    let angular = AngularMesh::circle(4).unwrap();
    let optics = OpticalField::uniform(spatial.n_elements(), 2.0, 0.0, 0.3).unwrap();
    let q = build(&spatial, &angular, &optics, &random_source(&spatial, 1));
    let exact = dense_oracle(&q).unwrap();
    let one = q.half_step(&random_vector(&q, 9)).unwrap();
    assert!(q.weighted_norm(&one.sub(&exact)).unwrap() <= 1e-9 * q.weighted_norm(&exact).unwrap());
}

#[test]
fn r0_is_bounded_below() {
    let p = tiny(false, 3, 0.6, 0.95, 21);
    for seed in 0..4 {
        let w = random_vector(&p, 100 + seed);
        let lhs = p.weighted_norm(&w).unwrap();
        let rhs = p.weighted_norm(&p.apply_r0(&w).unwrap()).unwrap() / (1.0 - p.rho());
        assert!(lhs <= rhs * (1.0 + 1e-10), "{lhs} > {rhs}");
    }
}

#[test]
fn odd_enrichments_satisfy_their_equations() {
    let p = tiny(true, 3, 0.7, 0.95, 31);
    let uh = random_vector(&p, 1);
    let uc = random_vector(&p, 2);
    let lhs_even: Vec<f64> = uh.even().iter().zip(uc.even()).map(|(a, b)| a + b).collect();
    let au = p.apply_a(&lhs_even);
    let load = &p.matrices().load_odd;

    let t1 = enrich_odd_sweep(&p, &uh, &uc).unwrap();
    assert!(t1.even().iter().all(|v| *v == 0.0));
    let z: Vec<f64> = uh.odd().iter().zip(t1.odd()).map(|(a, b)| a + b).collect();
    let mz = p.apply_m_odd(&z);
    let su = p.apply_s_odd(uh.odd());
    let scale = mz.iter().map(|v| v.abs()).fold(0.0, f64::max);
    for i in 0..z.len() {
        assert!((mz[i] - (su[i] + load[i] - au[i])).abs() <= 1e-10 * scale);
    }

    let t2 = enrich_odd_scatter(&p, &uh, &uc, 1e-13).unwrap();
    let z: Vec<f64> = uh.odd().iter().zip(t2.odd()).map(|(a, b)| a + b).collect();
    let mz = p.apply_m_odd(&z);
    let sz = p.apply_s_odd(&z);
    for i in 0..z.len() {
        assert!((mz[i] - sz[i] - (load[i] - au[i])).abs() <= 1e-9 * scale);
    }
}

#[test]
fn larger_spaces_never_increase_the_residual() {
    let p = tiny(true, 3, 0.5, 0.97, 41);
    let u = random_vector(&p, 1);
    let r = p.residual_precond(&u).unwrap();
    let cols: Vec<BlockVector> = (0..6).map(|i| random_vector(&p, 50 + i)).collect();
    let mut last = p.weighted_norm(&r).unwrap();
    for n in 1..=cols.len() {
        let res = minimize(&p, &u, &r, &basis_of(cols[..n].to_vec())).unwrap();
        assert!(res.residual_norm <= last * (1.0 + 1e-10), "{n} columns: {} > {last}", res.residual_norm);
        last = res.residual_norm;
    }
    // a basis containing the exact error removes the residual
    let err = dense_oracle(&p).unwrap().sub(&u);
    let res = minimize(&p, &u, &r, &basis_of(vec![cols[0].clone(), err])).unwrap();
    assert!(res.residual_norm <= 1e-8 * p.weighted_norm(&r).unwrap());
}

#[test]
fn reduced_dimension_counts() {
    let spatial = SpatialMesh::rectangle(28, 28, 7.0, 7.0).unwrap();
    let angular = AngularMesh::octahedral_sphere(0).unwrap();
    let optics = OpticalField::uniform(spatial.n_elements(), 0.1, 1.0, 0.5).unwrap();
    let p = build(&spatial, &angular, &optics, &SourceSpec::zero(&spatial));
    for k in [1, 2, 4] {
        let cs = CorrectionSolver::new(&p, eigen_theta(&p.matrices().angular, k).unwrap()).unwrap();
        assert_eq!(cs.reduced_dimension(), k * (841 + 3 * 1568));
    }
    assert!(eigen_theta(&p.matrices().angular, 0).is_err());
    assert!(eigen_theta(&p.matrices().angular, 5).is_err());
}

#[test]
fn reversed_angular_labels_give_the_same_solution() {
    let spatial = SpatialMesh::rectangle(2, 2, 1.0, 1.0).unwrap();
    let angular = AngularMesh::octahedral_sphere(0).unwrap();
    let n = angular.n_elements();
    let cells: Vec<AngularCell> = angular.cells().iter().rev().cloned().collect();
    let pairing: Vec<usize> = (0..n).map(|i| n - 1 - angular.pairing()[n - 1 - i]).collect();
    let flipped = AngularMesh::from_parts(angular.domain(), angular.vertices().to_vec(), cells, pairing).unwrap();
    let optics = random_optics(&spatial, 0.6, 0.9, 3);
    let source = random_source(&spatial, 3);
    let a = dense_oracle(&build(&spatial, &angular, &optics, &source)).unwrap();
    let b = dense_oracle(&build(&spatial, &flipped, &optics, &source)).unwrap();
    let (nv, ne, d) = (spatial.n_vertices(), spatial.n_elements(), angular.dim());
    let scale = a.norm_inf();
    for i in 0..n {
        let (pa, pb) = (angular.pair_of(n - 1 - i), flipped.pair_of(i));
        for v in 0..nv {
            assert!((a.even()[pa * nv + v] - b.even()[pb * nv + v]).abs() <= 1e-9 * scale);
        }
        for c in 0..d {
            for e in 0..ne {
                let (x, y) = (a.odd()[(pa * d + c) * ne + e], b.odd()[(pb * d + c) * ne + e]);
                assert!((x - y).abs() <= 1e-9 * scale);
            }
        }
    }
}
