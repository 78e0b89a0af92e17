use crate::error::{invalid, Result};
use crate::geometry::AngularDomain;
use crate::math::sqrt;

use core::f64::consts::PI;

/// Henyey-Greenstein phase function θ(μ), μ = s·s'.
pub fn hg_phase(g: f64, mu: f64, domain: AngularDomain) -> Result<f64> {
    let k = Kernel::new(g, domain)?;
    if !(-1.0..=1.0).contains(&mu) {
        return Err(invalid("mu must lie in [-1, 1]"));
    }
    Ok(k.eval(mu))
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Kernel {
    g: f64,
    c: f64,
    a: f64,
    sphere: bool,
}

impl Kernel {
    pub(crate) fn new(g: f64, domain: AngularDomain) -> Result<Self> {
        if !(0.0..1.0).contains(&g) {
            return Err(invalid("anisotropy factor g must lie in [0, 1)"));
        }
        let sphere = domain == AngularDomain::Sphere;
        let norm = if sphere { 4.0 * PI } else { 2.0 * PI };
        Ok(Self { g, c: (1.0 - g * g) / norm, a: 1.0 + g * g, sphere })
    }

    #[inline]
    pub(crate) fn eval(&self, mu: f64) -> f64 {
        let t = self.a - 2.0 * self.g * mu;
        if self.sphere {
            self.c / (t * sqrt(t))
        } else {
            self.c / t
        }
    }
}
