//! Composite Simpson quadrature with panel doubling.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Controls numeric integration of the equilibrium density.
///
/// Integrals over `[a, b]` with `b` close to the horizon are split at
/// `T * (1 - tail_fraction)`: the left part is integrated with composite
/// Simpson, the right part with the exact antiderivative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuadratureSpec {
    /// Initial number of Simpson panels (even, at least 64).
    pub panels: usize,
    /// Width of the closed-form tail as a fraction of the horizon.
    pub tail_fraction: f64,
    /// Absolute tolerance on the Richardson error estimate.
    pub tolerance: f64,
    /// Doubling stops here and reports non-convergence.
    pub max_panels: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            panels: 4096,
            tail_fraction: 0.05,
            tolerance: 1e-11,
            max_panels: 1 << 22,
        }
    }
}

impl QuadratureSpec {
    pub const MIN_PANELS: usize = 64;

    pub fn validate(&self) -> Result<()> {
        if self.panels < Self::MIN_PANELS {
            return Err(Error::InvalidQuadrature(format!(
                "panel count {} below minimum {}",
                self.panels,
                Self::MIN_PANELS
            )));
        }
        if !(self.tail_fraction >= 0.0 && self.tail_fraction < 1.0) {
            return Err(Error::InvalidQuadrature(format!(
                "tail fraction {} outside [0, 1)",
                self.tail_fraction
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidQuadrature("tolerance must be positive".into()));
        }
        if self.max_panels < self.panels {
            return Err(Error::InvalidQuadrature("max_panels below panels".into()));
        }
        Ok(())
    }
}

/// Composite Simpson rule on `n` panels (`n` rounded up to even).
pub fn simpson<F: Real>(f: impl Fn(F) -> F, a: F, b: F, n: usize) -> F {
    let n = (n.max(2) + 1) & !1;
    let h = (b - a) / F::of_usize(n);
    let mut odd = F::zero();
    let mut even = F::zero();
    for i in 1..n {
        let x = a + h * F::of_usize(i);
        if i % 2 == 1 {
            odd = odd + f(x);
        } else {
            even = even + f(x);
        }
    }
    h / F::lit(3.0) * (f(a) + f(b) + F::lit(4.0) * odd + F::lit(2.0) * even)
}

/// Result of an adaptive Simpson evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate<F> {
    pub value: F,
    pub error: F,
    pub panels: usize,
}

/// Doubles the panel count, starting at `start`, until the Richardson estimate
/// `|S(2n) - S(n)| / 15` drops below `tol` or `max` panels are exceeded.
pub fn simpson_converged<F: Real>(
    f: impl Fn(F) -> F,
    a: F,
    b: F,
    spec: &QuadratureSpec,
) -> Result<Estimate<F>> {
    spec.validate()?;
    if a == b {
        return Ok(Estimate {
            value: F::zero(),
            error: F::zero(),
            panels: 0,
        });
    }
    let tol = F::lit(spec.tolerance);
    let mut n = spec.panels;
    let mut coarse = simpson(&f, a, b, n);
    loop {
        let fine = simpson(&f, a, b, 2 * n);
        let err = (fine - coarse).abs() / F::lit(15.0);
        n *= 2;
        if err <= tol {
            return Ok(Estimate {
                value: fine + (fine - coarse) / F::lit(15.0),
                error: err,
                panels: n,
            });
        }
        if 2 * n > spec.max_panels {
            return Err(Error::QuadratureNonConvergence {
                residual: err.as_f64(),
                panels: n,
            });
        }
        coarse = fine;
    }
}
