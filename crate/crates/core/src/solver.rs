//! Outer iteration and the dense reference solution.

use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::minimizer::minimize;
use crate::operators::{BlockVector, TransportProblem};
use crate::subspace::{build_space, eigen_theta, enrich_odd_scatter, enrich_odd_sweep, CorrectionSolver};

pub use crate::subspace::SpaceKind;

/// Largest system [`dense_oracle`] will materialize.
pub const DENSE_LIMIT: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    pub space: SpaceKind,
    /// Number of eigenfunctions spanning Y_{h,K}; ignored for [`SpaceKind::None`].
    pub k: usize,
    /// Stop once ‖r_k‖_M < tol.
    pub tol: f64,
    pub max_iters: usize,
    /// Relative tolerance of the CG solve behind ũ².
    pub inner_tol: f64,
    /// Take u_{k+1/2} = u_k + r_k instead of a fresh transport solve.
    pub skip_half_solve: bool,
    /// Compare each updated residual with a fresh (uncounted) evaluation.
    pub verify_residuals: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        Self {
            space: SpaceKind::None,
            k: 0,
            tol: 1e-6,
            max_iters: 10_000,
            inner_tol: 1e-10,
            skip_half_solve: true,
            verify_residuals: cfg!(debug_assertions),
        }
    }
}

impl IterationConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(invalid("tol must be positive"));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if !(self.inner_tol > 0.0) {
            return Err(invalid("inner_tol must be positive"));
        }
        if self.space.needs_correction() && self.k == 0 {
            return Err(invalid("subspace acceleration needs K ≥ 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub k: usize,
    /// ‖r_k‖_M
    pub residual: f64,
    /// ‖r_k‖_M / ‖r_{k-1}‖_M
    pub factor: f64,
    /// Seconds since the start of the run, from the injected clock.
    pub seconds: f64,
    /// Transport solves spent in this step.
    pub solves: usize,
    /// Subspace dimension N used in this step.
    pub basis_size: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct ConvergenceHistory {
    /// ‖r_0‖_M
    pub initial_residual: f64,
    pub steps: Vec<StepRecord>,
    pub final_iterate: BlockVector,
    pub final_residual: BlockVector,
    pub termination: Termination,
    /// Solves spent before the first step (r_0, and 𝐑(0) if needed).
    pub setup_solves: usize,
}

impl ConvergenceHistory {
    /// Outer steps taken, counted from k = 1.
    pub fn iterations(&self) -> usize {
        self.steps.len()
    }

    pub fn max_factor(&self) -> f64 {
        self.steps.iter().map(|s| s.factor).fold(0.0, f64::max)
    }

    pub fn final_residual_norm(&self) -> f64 {
        self.steps.last().map_or(self.initial_residual, |s| s.residual)
    }

    pub fn converged(&self) -> bool {
        self.termination == Termination::Converged
    }
}

/// Passed to the observer after every step: (k, u_k, r_k).
pub type Observer<'a> = &'a mut dyn FnMut(usize, &BlockVector, &BlockVector);

/// Runs from u_0 = 0 with wall-clock timing where available.
pub fn run(problem: &TransportProblem, config: &IterationConfig) -> Result<ConvergenceHistory> {
    #[cfg(feature = "std")]
    {
        let start = std::time::Instant::now();
        run_with(problem, config, None, &|| start.elapsed().as_secs_f64(), None)
    }
    #[cfg(not(feature = "std"))]
    {
        run_with(problem, config, None, &|| 0.0, None)
    }
}

/// Precomputed pieces of the acceleration that depend only on the problem.
pub struct Accelerator {
    correction: Option<CorrectionSolver>,
}

impl Accelerator {
    pub fn new(problem: &TransportProblem, config: &IterationConfig) -> Result<Self> {
        let correction = if config.space.needs_correction() {
            let basis = eigen_theta(&problem.matrices().angular, config.k)?;
            Some(CorrectionSolver::new(problem, basis)?)
        } else {
            None
        };
        Ok(Self { correction })
    }

    pub fn correction(&self) -> Option<&CorrectionSolver> {
        self.correction.as_ref()
    }
}

pub fn run_with(
    problem: &TransportProblem,
    config: &IterationConfig,
    u0: Option<&BlockVector>,
    clock: &dyn Fn() -> f64,
    observer: Option<Observer<'_>>,
) -> Result<ConvergenceHistory> {
    let acc = Accelerator::new(problem, config)?;
    run_prepared(problem, config, &acc, u0, clock, observer)
}

pub fn run_prepared(
    problem: &TransportProblem,
    config: &IterationConfig,
    acc: &Accelerator,
    u0: Option<&BlockVector>,
    clock: &dyn Fn() -> f64,
    mut observer: Option<Observer<'_>>,
) -> Result<ConvergenceHistory> {
    config.validate()?;
    let t0 = clock();
    let mut u = match u0 {
        Some(v) => {
            v.check(problem.layout())?;
            v.clone()
        }
        None => problem.zeros(),
    };
    let before = problem.solve_count();
    let mut r = problem.residual_precond(&u)?;
    let history_m = config.space.history();
    // 𝐑(0) turns stored residuals into 𝐑₀ images of past iterates
    let r_zero = match (history_m, u.is_zero()) {
        (Some(_), true) => Some(r.clone()),
        (Some(_), false) => Some(problem.residual_precond(&problem.zeros())?),
        _ => None,
    };
    let setup_solves = problem.solve_count() - before;
    let mut past: Vec<(BlockVector, BlockVector)> = Vec::new();
    if let Some(rz) = &r_zero {
        past.push((u.clone(), r.sub(rz)));
    }
    let initial = problem.weighted_norm(&r)?;
    if let Some(obs) = observer.as_mut() {
        obs(0, &u, &r);
    }
    let mut steps = Vec::new();
    let mut prev = initial;
    let mut termination = Termination::MaxIterations;
    if initial < config.tol {
        termination = Termination::Converged;
    }
    let mut k = 0;
    while termination != Termination::Converged && k < config.max_iters {
        k += 1;
        let count0 = problem.solve_count();
        let (u_half, r_step) = if config.skip_half_solve {
            (u.add(&r), r.clone())
        } else {
            let uh = problem.half_step(&u)?;
            let rs = uh.sub(&u);
            (uh, rs)
        };
        let r_half = problem.residual_precond(&u_half)?;

        let mut u_c = None;
        let mut u1 = None;
        let mut u2 = None;
        if let Some(cs) = acc.correction() {
            let c = cs.galerkin_correction(problem, &r_step)?;
            if matches!(config.space, SpaceKind::Enriched | SpaceKind::EnrichedHistory(_)) {
                u1 = Some(enrich_odd_sweep(problem, &u_half, &c)?);
                u2 = Some(enrich_odd_scatter(problem, &u_half, &c, config.inner_tol)?);
            }
            u_c = Some(c);
        }
        let basis = build_space(config.space, u_c.as_ref(), u1.as_ref(), u2.as_ref(), &past);
        let result = minimize(problem, &u_half, &r_half, &basis)?;

        if config.verify_residuals {
            let fresh = problem.residual_precond_uncounted(&result.u_next)?;
            let drift = problem.weighted_norm(&fresh.sub(&result.r_next))?;
            let mut scale = problem.weighted_norm(&r_half)?;
            for (w, z) in result.coefficients.iter().zip(&result.images) {
                scale += w.abs() * problem.weighted_norm(z)?;
            }
            // the fresh evaluation is itself only accurate to the inner tolerance
            let floor = 10.0 * problem.inner_tol() * problem.weighted_norm(&result.u_next)?;
            if drift > 1e-9 * scale + floor {
                return Err(Error::ResidualDrift { drift, scale });
            }
        }

        u = result.u_next;
        r = result.r_next;
        let norm = result.residual_norm;
        if let Some(rz) = &r_zero {
            past.push((u.clone(), r.sub(rz)));
            let keep = history_m.unwrap_or(0) + 1;
            if past.len() > keep {
                past.remove(0);
            }
        }
        steps.push(StepRecord {
            k,
            residual: norm,
            factor: if prev > 0.0 { norm / prev } else { 0.0 },
            seconds: clock() - t0,
            solves: problem.solve_count() - count0,
            basis_size: basis.len(),
        });
        prev = norm;
        if let Some(obs) = observer.as_mut() {
            obs(k, &u, &r);
        }
        if norm < config.tol {
            termination = Termination::Converged;
        }
    }
    Ok(ConvergenceHistory {
        initial_residual: initial,
        steps,
        final_iterate: u,
        final_residual: r,
        termination,
        setup_solves,
    })
}

/// Dense 𝐓 and 𝐒 from Kronecker products of the assembled blocks.
pub fn dense_operators(problem: &TransportProblem) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let l = problem.layout();
    let n = l.total();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { dofs: n, limit: DENSE_LIMIT });
    }
    let m = problem.matrices();
    let sp = &m.spatial;
    let ang = &m.angular;
    let ne_even = l.even_len();
    let mass_plus = DMatrix::from_diagonal(&DVector::from_column_slice(&ang.mass_plus));
    let mut even = mass_plus.kronecker(&sp.mass_t.to_dense());
    for (c, e) in sp.edge_mass.iter().enumerate() {
        let om = DMatrix::from_diagonal(&DVector::from_column_slice(&ang.omega[c]));
        even += om.kronecker(&e.to_dense());
    }
    let mut a = DMatrix::zeros(l.odd_len(), ne_even);
    for i in 0..2 {
        a += ang.moment_dense(i).kronecker(&sp.deriv[i].to_dense());
    }
    let mdiag_t = DMatrix::from_diagonal(&DVector::from_column_slice(&sp.diag_t));
    let mdiag_s = DMatrix::from_diagonal(&DVector::from_column_slice(&sp.diag_s));
    let odd = ang.mass_minus_dense().kronecker(&mdiag_t);
    let mut t = DMatrix::zeros(n, n);
    t.view_mut((0, 0), (ne_even, ne_even)).copy_from(&even);
    t.view_mut((0, ne_even), (ne_even, l.odd_len())).copy_from(&(-a.transpose()));
    t.view_mut((ne_even, 0), (l.odd_len(), ne_even)).copy_from(&a);
    t.view_mut((ne_even, ne_even), (l.odd_len(), l.odd_len())).copy_from(&odd);
    let mut s = DMatrix::zeros(n, n);
    s.view_mut((0, 0), (ne_even, ne_even)).copy_from(&ang.theta_plus.kronecker(&sp.mass_s.to_dense()));
    s.view_mut((ne_even, ne_even), (l.odd_len(), l.odd_len()))
        .copy_from(&ang.theta_minus.kronecker(&mdiag_s));
    Ok((t, s))
}

/// Dense 𝐌.
pub fn dense_mass(problem: &TransportProblem) -> Result<DMatrix<f64>> {
    let l = problem.layout();
    if l.total() > DENSE_LIMIT {
        return Err(Error::TooLarge { dofs: l.total(), limit: DENSE_LIMIT });
    }
    let m = problem.matrices();
    let mass_plus = DMatrix::from_diagonal(&DVector::from_column_slice(&m.angular.mass_plus));
    let even = mass_plus.kronecker(&m.spatial.mass_t.to_dense());
    let odd = m
        .angular
        .mass_minus_dense()
        .kronecker(&DMatrix::from_diagonal(&DVector::from_column_slice(&m.spatial.diag_t)));
    let mut out = DMatrix::zeros(l.total(), l.total());
    out.view_mut((0, 0), (l.even_len(), l.even_len())).copy_from(&even);
    out.view_mut((l.even_len(), l.even_len()), (l.odd_len(), l.odd_len())).copy_from(&odd);
    Ok(out)
}

/// Solves (𝐓 − 𝐒)u = ℓ by dense LU.
pub fn dense_oracle(problem: &TransportProblem) -> Result<BlockVector> {
    let (t, s) = dense_operators(problem)?;
    let rhs = DVector::from_vec(problem.load().to_flat());
    let u = (t - s).lu().solve(&rhs).ok_or(Error::Singular("dense system"))?;
    BlockVector::from_flat(problem.layout(), u.as_slice())
}
