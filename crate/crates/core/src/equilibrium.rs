//! The infinite-population equilibrium density and checks on its derivation.
//!
//! The density on `[0, T]` is `den(s) = (T - s)^gamma / alpha` with
//! `gamma = (2 rho - 1) / (1 - rho)` and
//! `alpha = (1 - rho) T^(rho / (1 - rho)) / rho`.
//! Under it every strategy earns the same expected pay `rho * T`.
//!
//! For `rho < 1/2` the exponent is negative and the density diverges at `T`,
//! so integrals reaching the horizon switch to the exact antiderivative for
//! the last `tail_fraction * T` of the interval.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::GameParams;
use crate::quadrature::{simpson_converged, QuadratureSpec};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumDensity<F> {
    params: GameParams<F>,
    gamma: F,
    alpha: F,
    /// `gamma + 1 = rho / (1 - rho)`; the CDF exponent.
    mass_exponent: F,
}

/// Analytic and finite-difference values of one derivation residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualCheck<F> {
    pub s: F,
    pub analytic: F,
    pub finite_difference: F,
    /// Magnitude of the largest term, used to make residuals relative.
    pub scale: F,
}

impl<F: Real> ResidualCheck<F> {
    pub fn relative_fd(&self) -> F {
        if self.scale >= F::min_positive_value() {
            self.finite_difference.abs() / self.scale
        } else {
            self.finite_difference.abs()
        }
    }
}

impl<F: Real> EquilibriumDensity<F> {
    pub fn build(params: GameParams<F>) -> Self {
        let rho = params.rho();
        let t = params.horizon();
        let one = F::one();
        let two = F::lit(2.0);
        let gamma = (two * rho - one) / (one - rho);
        let mass_exponent = rho / (one - rho);
        let alpha = (one - rho) * t.powf(mass_exponent) / rho;
        Self {
            params,
            gamma,
            alpha,
            mass_exponent,
        }
    }

    /// Validates `(rho, T)` and builds the density.
    pub fn from_rho(rho: F, horizon: F) -> Result<Self> {
        Ok(Self::build(GameParams::new(rho, horizon)?))
    }

    #[inline]
    pub fn params(&self) -> &GameParams<F> {
        &self.params
    }
    #[inline]
    pub fn rho(&self) -> F {
        self.params.rho()
    }
    #[inline]
    pub fn horizon(&self) -> F {
        self.params.horizon()
    }
    #[inline]
    pub fn gamma(&self) -> F {
        self.gamma
    }
    #[inline]
    pub fn alpha(&self) -> F {
        self.alpha
    }

    /// The common pay every strategy earns, `rho * T`.
    pub fn constant_pay(&self) -> F {
        self.rho() * self.horizon()
    }

    /// Closed-form mean strategy, `(1 - rho) T`.
    pub fn mean(&self) -> F {
        (F::one() - self.rho()) * self.horizon()
    }

    fn check_s(&self, s: F) -> Result<()> {
        if s >= F::zero() && s <= self.horizon() {
            Ok(())
        } else {
            Err(Error::StrategyOutOfRange {
                value: s.as_f64(),
                horizon: self.horizon().as_f64(),
            })
        }
    }

    /// Density at `s`. Returns `+inf` at `s = T` when `gamma < 0`.
    pub fn den(&self, s: F) -> Result<F> {
        self.check_s(s)?;
        Ok(self.den_unchecked(s))
    }

    #[inline]
    pub fn den_unchecked(&self, s: F) -> F {
        (self.horizon() - s).powf(self.gamma) / self.alpha
    }

    /// Analytic derivative `-gamma (T - s)^(gamma - 1) / alpha`.
    pub fn den_derivative(&self, s: F) -> F {
        if self.gamma == F::zero() {
            return F::zero();
        }
        -self.gamma * (self.horizon() - s).powf(self.gamma - F::one()) / self.alpha
    }

    /// `F(s) = 1 - ((T - s) / T)^(rho / (1 - rho))`.
    pub fn cdf(&self, s: F) -> Result<F> {
        self.check_s(s)?;
        Ok(self.cdf_unchecked(s))
    }

    #[inline]
    pub fn cdf_unchecked(&self, s: F) -> F {
        -(self.mass_exponent * (-s / self.horizon()).ln_1p()).exp_m1()
    }

    /// Mass above `s`, `((T - s) / T)^(rho / (1 - rho))`.
    #[inline]
    pub fn survival(&self, s: F) -> F {
        ((self.horizon() - s) / self.horizon()).powf(self.mass_exponent)
    }

    /// `s = T (1 - (1 - u)^((1 - rho) / rho))`.
    pub fn inverse_cdf(&self, u: F) -> Result<F> {
        if !(u >= F::zero() && u <= F::one()) {
            return Err(Error::ProbabilityOutOfRange(u.as_f64()));
        }
        Ok(self.inverse_cdf_unchecked(u))
    }

    #[inline]
    pub fn inverse_cdf_unchecked(&self, u: F) -> F {
        let s = -self.horizon() * ((-u).ln_1p() / self.mass_exponent).exp_m1();
        s.max(F::zero()).min(self.horizon())
    }

    /// `n` independent draws by inverse-transform sampling from a seeded stream.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<F> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(&mut rng, n)
    }

    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<F> {
        (0..n)
            .map(|_| self.inverse_cdf_unchecked(F::lit(rng.gen::<f64>())))
            .collect()
    }

    fn tail_start(&self, spec: &QuadratureSpec) -> F {
        self.horizon() * (F::one() - F::lit(spec.tail_fraction))
    }

    fn quad_spec(&self, spec: &QuadratureSpec) -> QuadratureSpec {
        // the density has width about T / gamma when gamma is large
        let need = 8 * (self.gamma.max(F::zero()).ceil().to_usize().unwrap_or(0) + 2);
        let panels = spec.panels.max(need + (need & 1));
        QuadratureSpec {
            panels,
            max_panels: spec.max_panels.max(panels),
            ..*spec
        }
    }

    /// Splits `[a, b]` at the tail cutoff: Simpson on the left piece, `closed` on the right.
    fn split_integral(
        &self,
        a: F,
        b: F,
        spec: &QuadratureSpec,
        integrand: impl Fn(F) -> F,
        antiderivative: impl Fn(F) -> F,
    ) -> Result<F> {
        self.check_s(a)?;
        self.check_s(b)?;
        spec.validate()?;
        if b <= a {
            return Ok(F::zero());
        }
        let cut = self.tail_start(spec);
        let mut total = F::zero();
        let left_end = b.min(cut);
        if left_end > a {
            total = total + simpson_converged(&integrand, a, left_end, &self.quad_spec(spec))?.value;
        }
        let right_start = a.max(cut);
        if b > right_start {
            total = total + antiderivative(b) - antiderivative(right_start);
        }
        Ok(total)
    }

    /// Numeric `int_a^b den(t) dt`.
    pub fn mass_between(&self, a: F, b: F, spec: &QuadratureSpec) -> Result<F> {
        let t = self.horizon();
        let k = self.mass_exponent;
        let alpha = self.alpha;
        self.split_integral(
            a,
            b,
            spec,
            |x| self.den_unchecked(x),
            |x| -(t - x).powf(k) / (k * alpha),
        )
    }

    /// Numeric `int_a^b den(t) (T - t) dt`.
    pub fn remaining_moment(&self, a: F, b: F, spec: &QuadratureSpec) -> Result<F> {
        let t = self.horizon();
        let k = self.mass_exponent + F::one();
        let alpha = self.alpha;
        self.split_integral(
            a,
            b,
            spec,
            |x| self.den_unchecked(x) * (t - x),
            |x| -(t - x).powf(k) / (k * alpha),
        )
    }

    /// Numeric total mass over `[0, T]`; equals one.
    pub fn normalization(&self, spec: &QuadratureSpec) -> Result<F> {
        self.mass_between(F::zero(), self.horizon(), spec)
    }

    /// Numeric `E[T - s]`; equals `rho * T`.
    pub fn expected_remaining(&self, spec: &QuadratureSpec) -> Result<F> {
        self.remaining_moment(F::zero(), self.horizon(), spec)
    }

    /// Expected pay of a fixed strategy `s` against a population distributed by
    /// this density: what it earns against lower strategies plus the
    /// capitulator's share against higher ones.
    pub fn pay_numeric(&self, s: F, spec: &QuadratureSpec) -> Result<F> {
        self.check_s(s)?;
        let won = self.remaining_moment(F::zero(), s, spec)?;
        let above = self.mass_between(s, self.horizon(), spec)?;
        Ok(won + self.rho() * (self.horizon() - s) * above)
    }

    /// The same pay assembled from antiderivatives only.
    pub fn pay_closed_form(&self, s: F) -> F {
        let t = self.horizon();
        let k = self.mass_exponent + F::one();
        let won = (t.powf(k) - (t - s).powf(k)) / (k * self.alpha);
        won + self.rho() * (t - s) * self.survival(s)
    }

    // pay_closed_form without its constant, so differences keep relative precision near T
    fn pay_varying_part(&self, s: F) -> F {
        let w = self.horizon() - s;
        let k = self.mass_exponent + F::one();
        -w.powf(k) / (k * self.alpha) + self.rho() * w * self.survival(s)
    }

    /// Residual of the once-differentiated constant-pay condition:
    /// `den(s)(T-s) - rho den(s)(T-s) - rho int_s^T den`.
    ///
    /// The finite-difference companion differentiates the `s`-dependent part of
    /// the closed-form pay with a central step of `1e-6 T`.
    pub fn residual_indifference(&self, s: F) -> F {
        let rho = self.rho();
        let d = self.den_unchecked(s);
        let w = self.horizon() - s;
        d * w - rho * d * w - rho * self.survival(s)
    }

    pub fn check_indifference(&self, s: F) -> Result<ResidualCheck<F>> {
        let h = self.fd_step();
        self.check_fd_window(s, h)?;
        let fd = (self.pay_varying_part(s + h) - self.pay_varying_part(s - h)) / (F::lit(2.0) * h);
        let d = self.den_unchecked(s);
        let w = self.horizon() - s;
        Ok(ResidualCheck {
            s,
            analytic: self.residual_indifference(s),
            finite_difference: fd,
            scale: (d * w).max(self.rho() * self.survival(s)),
        })
    }

    /// Residual of the differential equation `(1-rho)(T-s) den' + (2 rho - 1) den`.
    pub fn residual_ode(&self, s: F) -> F {
        let (a, b) = self.ode_terms(s, self.den_derivative(s));
        a + b
    }

    fn ode_terms(&self, s: F, derivative: F) -> (F, F) {
        let one = F::one();
        let rho = self.rho();
        (
            (one - rho) * (self.horizon() - s) * derivative,
            (F::lit(2.0) * rho - one) * self.den_unchecked(s),
        )
    }

    pub fn check_ode(&self, s: F) -> Result<ResidualCheck<F>> {
        let h = self.fd_step();
        self.check_fd_window(s, h)?;
        let fd_derivative =
            (self.den_unchecked(s + h) - self.den_unchecked(s - h)) / (F::lit(2.0) * h);
        let (a, b) = self.ode_terms(s, fd_derivative);
        let (a_exact, b_exact) = self.ode_terms(s, self.den_derivative(s));
        let scale = a_exact.abs().max(b_exact.abs()).max(self.den_unchecked(s));
        Ok(ResidualCheck {
            s,
            analytic: a_exact + b_exact,
            finite_difference: a + b,
            scale,
        })
    }

    /// Central-difference step, `1e-6 T`.
    pub fn fd_step(&self) -> F {
        F::lit(1e-6) * self.horizon()
    }

    fn check_fd_window(&self, s: F, h: F) -> Result<()> {
        let margin = F::lit(10.0) * h;
        if s < margin || s > self.horizon() - margin {
            return Err(Error::InvalidArgument(format!(
                "finite-difference point {s} within {margin} of an endpoint"
            )));
        }
        Ok(())
    }
}
