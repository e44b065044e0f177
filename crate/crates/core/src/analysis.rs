//! Guarantees and threats in the repeated two-player game.
//!
//! Each scenario is evaluated twice: analytically from the equilibrium
//! density and by seeded Monte Carlo over sampled opponent strategies.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::equilibrium::EquilibriumDensity;
use crate::error::{Error, Result};
use crate::game::{own_payoff, GameParams};
use crate::quadrature::QuadratureSpec;
use crate::scalar::Real;
use crate::stats::RunningMean;

pub const DEFAULT_SAMPLES: usize = 1_000_000;

/// Absolute slack, as a fraction of `T`, granted to analytic values that
/// come out of quadrature.
const QUADRATURE_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuaranteeReport {
    pub scenario: String,
    pub analytic: f64,
    pub monte_carlo: f64,
    pub samples: usize,
    pub std_error: f64,
    /// Second analytic route where one exists (quadrature against closed form).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub analytic_cross_check: Option<f64>,
    /// A commonly quoted value this scenario is compared against.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_value: Option<f64>,
    /// Whether `reference_value` differs from `analytic`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub discrepancy: Option<bool>,
    horizon: f64,
}

impl GuaranteeReport {
    /// `|analytic - monte_carlo| <= 4 SE`, plus a `1e-9 T` allowance for the
    /// numeric error of the analytic side.
    pub fn consistent(&self) -> bool {
        (self.analytic - self.monte_carlo).abs()
            <= 4.0 * self.std_error + QUADRATURE_SLACK * self.horizon
    }

    /// Gap in standard errors, after the same numeric allowance as [`Self::consistent`].
    pub fn sigmas(&self) -> f64 {
        let gap = ((self.analytic - self.monte_carlo).abs() - QUADRATURE_SLACK * self.horizon).max(0.0);
        if self.std_error > 0.0 {
            gap / self.std_error
        } else if gap == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Expected pay of a fixed strategy `s` against an opponent mixing by `d`.
pub fn fixed_vs_mixed<F: Real>(
    s: F,
    d: &EquilibriumDensity<F>,
    samples: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<GuaranteeReport> {
    let params = *d.params();
    params.check_strategy(s)?;
    check_samples(samples)?;
    let analytic = d.pay_numeric(s, spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let est = d
        .sample_with(&mut rng, samples)
        .into_iter()
        .map(|t| own_payoff(s, t, &params).as_f64())
        .collect::<RunningMean>()
        .finish();
    Ok(GuaranteeReport {
        scenario: format!("fixed_vs_mixed(s={})", s.as_f64()),
        analytic: analytic.as_f64(),
        monte_carlo: est.mean,
        samples,
        std_error: est.std_error,
        analytic_cross_check: Some(d.constant_pay().as_f64()),
        reference_value: None,
        discrepancy: None,
        horizon: params.horizon().as_f64(),
    })
}

/// Expected pay of a mixing opponent when the other player always holds out to `T`.
///
/// The analytic value is `rho * E[T - s] = rho^2 T`. The commonly quoted
/// `rho T / 2` is reported alongside and flagged when it disagrees.
pub fn mixed_vs_fixed_t<F: Real>(
    d: &EquilibriumDensity<F>,
    samples: usize,
    seed: u64,
    spec: &QuadratureSpec,
) -> Result<GuaranteeReport> {
    check_samples(samples)?;
    let params = *d.params();
    let t = params.horizon();
    let rho = params.rho();
    let analytic = rho * rho * t;
    let quadrature = rho * d.expected_remaining(spec)?;
    let reference = rho * t / F::lit(2.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let est = d
        .sample_with(&mut rng, samples)
        .into_iter()
        .map(|x| own_payoff(x, t, &params).as_f64())
        .collect::<RunningMean>()
        .finish();
    let tol = QUADRATURE_SLACK * t.as_f64();
    Ok(GuaranteeReport {
        scenario: "mixed_vs_fixed_T".into(),
        analytic: analytic.as_f64(),
        monte_carlo: est.mean,
        samples,
        std_error: est.std_error,
        analytic_cross_check: Some(quadrature.as_f64()),
        reference_value: Some(reference.as_f64()),
        discrepancy: Some((analytic - reference).abs().as_f64() > tol),
        horizon: t.as_f64(),
    })
}

/// Opponent's payoff when this player capitulates immediately.
pub fn play_zero_guarantee<F: Real>(opponent_s: F, params: &GameParams<F>) -> Result<F> {
    params.check_strategy(opponent_s)?;
    Ok(own_payoff(opponent_s, F::zero(), params))
}

/// `(opponent pay, own pay)` when this player holds out to `T`.
pub fn play_t_ratio<F: Real>(opponent_s: F, params: &GameParams<F>) -> Result<(F, F)> {
    params.check_strategy(opponent_s)?;
    let t = params.horizon();
    if opponent_s == t {
        return Err(Error::InvalidArgument(
            "opponent at T ties; both payoffs are zero and the ratio is undefined".into(),
        ));
    }
    Ok((own_payoff(opponent_s, t, params), own_payoff(t, opponent_s, params)))
}

/// Per-player average pay when the two players take turns capitulating at 0
/// while the other holds out.
pub fn alternation_split<F: Real>(params: &GameParams<F>, rounds: usize) -> Result<[F; 2]> {
    if rounds < 2 || !rounds.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!(
            "alternation needs an even number of rounds >= 2, got {rounds}"
        )));
    }
    let hold = params.horizon() / F::lit(2.0);
    let mut totals = [F::zero(); 2];
    for r in 0..rounds {
        let capitulator = r % 2;
        let mut s = [hold; 2];
        s[capitulator] = F::zero();
        totals[0] = totals[0] + own_payoff(s[0], s[1], params);
        totals[1] = totals[1] + own_payoff(s[1], s[0], params);
    }
    let n = F::of_usize(rounds);
    Ok([totals[0] / n, totals[1] / n])
}

fn check_samples(samples: usize) -> Result<()> {
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 Monte Carlo samples, got {samples}"
        )));
    }
    Ok(())
}
