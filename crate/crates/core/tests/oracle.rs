mod common;

use common::{dense, flat, m_norm, tiny};
use nalgebra::DVector;
use rtaccel_core::solver::{dense_mass, dense_operators, dense_oracle, run, run_with, IterationConfig, SpaceKind};
use rtaccel_core::{AngularMesh, BlockVector, SpatialMesh};

fn spaces() -> Vec<(SpaceKind, usize)> {
    vec![
        (SpaceKind::None, 0),
        (SpaceKind::Correction, 1),
        (SpaceKind::Correction, 3),
        (SpaceKind::Enriched, 3),
        (SpaceKind::EnrichedHistory(2), 3),
    ]
}

#[test]
fn kronecker_matrices_match_probed_operators() {
    for sphere in [false, true] {
        let p = tiny(sphere, 3, 0.6, 0.95, 11);
        let d = dense(&p);
        let (t, s) = dense_operators(&p).unwrap();
        let m = dense_mass(&p).unwrap();
        assert!((&t - &d.t).amax() < 1e-12 * d.t.amax());
        assert!((&s - &d.s).amax() < 1e-12 * d.t.amax());
        assert!((&m - &d.m).amax() < 1e-12 * d.m.amax());
    }
}

#[test]
fn transport_solve_round_trip() {
    for sphere in [false, true] {
        let p = tiny(sphere, 4, 0.3, 0.9, 5);
        let b = common::random_vector(&p, 99);
        let x = p.solve_transport(&b).unwrap();
        let back = p.apply_t(&x).unwrap();
        let err = back.sub(&b).norm_inf();
        assert!(err < 1e-10 * b.norm_inf(), "residual {err}");
        let d = dense(&p);
        let xd = d.t.clone().lu().solve(&flat(&b)).unwrap();
        assert!((xd - flat(&x)).amax() < 1e-9 * x.norm_inf());
    }
}

#[test]
fn converged_iterate_matches_dense_solution() {
    for sphere in [false, true] {
        let p = tiny(sphere, 3, 0.7, 0.98, 23);
        let d = dense(&p);
        let exact = (&d.t - &d.s).lu().solve(&d.load).unwrap();
        let via_oracle = flat(&dense_oracle(&p).unwrap());
        assert!(m_norm(&d.m, &(&via_oracle - &exact)) < 1e-10 * m_norm(&d.m, &exact));
        let rho = p.rho();
        for (space, k) in spaces() {
            let cfg = IterationConfig { space, k, tol: 1e-11, max_iters: 5000, verify_residuals: true, ..Default::default() };
            let mut iterates: Vec<(DVector<f64>, f64)> = Vec::new();
            let mut obs = |_k: usize, u: &BlockVector, r: &BlockVector| {
                iterates.push((flat(u), p.weighted_norm(r).unwrap()));
            };
            let h = run_with(&p, &cfg, None, &|| 0.0, Some(&mut obs)).unwrap();
            assert!(h.converged(), "{space:?}");
            let err = m_norm(&d.m, &(flat(&h.final_iterate) - &exact));
            assert!(err <= 1e-7, "{space:?} K={k}: error {err}");
            for (u, r) in &iterates {
                let e = m_norm(&d.m, &(u - &exact));
                assert!(e <= r / (1.0 - rho) * (1.0 + 1e-9) + 1e-13, "{space:?}: error bound {e} > {}", r / (1.0 - rho));
            }
        }
    }
}

#[test]
fn unaccelerated_run_is_source_iteration() {
    for sphere in [false, true] {
        let p = tiny(sphere, 3, 0.5, 0.9, 3);
        let d = dense(&p);
        let lu = d.t.clone().lu();
        let cfg = IterationConfig { max_iters: 25, tol: 1e-300, verify_residuals: false, ..Default::default() };
        let mut iterates = Vec::new();
        let mut obs = |_k: usize, u: &BlockVector, _r: &BlockVector| iterates.push(flat(u));
        let h = run_with(&p, &cfg, None, &|| 0.0, Some(&mut obs)).unwrap();
        assert_eq!(h.setup_solves, 1);
        assert!(h.steps.iter().all(|s| s.solves == 1));
        let mut u: DVector<f64> = DVector::zeros(d.load.len());
        for (k, got) in iterates.iter().enumerate() {
            let scale = u.amax().max(1.0);
            assert!((got - &u).amax() <= 1e-10 * scale, "step {k}");
            u = lu.solve(&(&d.s * &u + &d.load)).unwrap();
        }
    }
}

#[test]
fn skipping_the_half_solve_changes_nothing() {
    let p = tiny(true, 3, 0.8, 0.97, 41);
    for (space, k) in spaces() {
        let base = IterationConfig { space, k, max_iters: 12, tol: 1e-300, verify_residuals: false, ..Default::default() };
        let a = run(&p, &base).unwrap();
        let b = run(&p, &IterationConfig { skip_half_solve: false, ..base }).unwrap();
        let scale = a.final_iterate.norm_inf();
        assert!(a.final_iterate.sub(&b.final_iterate).norm_inf() <= 1e-12 * scale.max(1.0), "{space:?}");
        for (x, y) in a.steps.iter().zip(&b.steps) {
            assert!((x.residual - y.residual).abs() <= 1e-12 * a.initial_residual.max(1.0));
            assert_eq!(y.solves, x.solves + 1);
        }
    }
}

#[test]
fn vertex_relabeling_leaves_the_history_unchanged() {
    let base = SpatialMesh::rectangle(4, 3, 2.0, 1.5).unwrap();
    let nv = base.n_vertices();
    let perm: Vec<usize> = (0..nv).map(|i| (i * 7 + 3) % nv).collect();
    let mut inv = vec![0; nv];
    for (new, &old) in perm.iter().enumerate() {
        inv[old] = new;
    }
    let verts: Vec<[f64; 2]> = perm.iter().map(|&old| base.vertices()[old]).collect();
    let tris: Vec<[usize; 3]> = base.triangles().iter().rev().map(|t| [inv[t[1]], inv[t[2]], inv[t[0]]]).collect();
    let relabeled = SpatialMesh::from_parts(verts, tris).unwrap();
    let angular = AngularMesh::octahedral_sphere(0).unwrap();

    let optics = common::random_optics(&base, 0.5, 0.95, 8);
    let src = common::random_source(&base, 8);
    // element e of the relabeled mesh is element ne-1-e of the base mesh
    let ne = base.n_elements();
    let flip = |v: &[f64]| -> Vec<f64> { (0..ne).map(|e| v[ne - 1 - e]).collect() };
    let optics2 =
        rtaccel_core::OpticalField::new(flip(optics.sigma_a()), flip(optics.sigma_s()), optics.g()).unwrap();
    let mut src2 = rtaccel_core::SourceSpec::zero(&relabeled);
    src2.q = flip(&src.q);
    let mut src1 = rtaccel_core::SourceSpec::zero(&base);
    src1.q = src.q.clone();

    let p1 = common::build(&base, &angular, &optics, &src1);
    let p2 = common::build(&relabeled, &angular, &optics2, &src2);
    for (space, k) in spaces() {
        let cfg = IterationConfig { space, k, tol: 1e-9, verify_residuals: false, ..Default::default() };
        let h1 = run(&p1, &cfg).unwrap();
        let h2 = run(&p2, &cfg).unwrap();
        assert_eq!(h1.iterations(), h2.iterations(), "{space:?}");
        for (a, b) in h1.steps.iter().zip(&h2.steps) {
            assert!((a.residual - b.residual).abs() <= 1e-8 * h1.initial_residual, "{space:?}");
        }
    }
}

#[test]
fn dense_oracle_refuses_large_systems() {
    let p = tiny(true, 16, 0.5, 0.9, 1);
    assert!(p.layout().total() > rtaccel_core::solver::DENSE_LIMIT);
    assert!(matches!(dense_oracle(&p), Err(rtaccel_core::Error::TooLarge { .. })));
}
