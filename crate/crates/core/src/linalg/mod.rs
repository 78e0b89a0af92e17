//! Sparse storage and the two inner solvers: envelope Cholesky and PCG.

mod csr;
mod envelope;
mod pcg;

pub use csr::CsrMatrix;
pub use envelope::{reverse_cuthill_mckee, EnvelopeCholesky};
pub use pcg::{pcg, PcgOutcome};
