//! Pairwise payoff kernel for a single Will-Testing game.
//!
//! Each player picks a capitulation time in `[0, T]`. The player who holds out
//! longer receives the time remaining after the other capitulates; the
//! capitulator receives the fraction `rho` of that amount. Exactly equal
//! strategies count as both capitulating together.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{approx_f64, Scalar};

/// Game parameters: capitulator's fraction `rho` and horizon `T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GameParams<S> {
    rho: S,
    horizon: S,
}

impl<S: Scalar> GameParams<S> {
    /// Validates `0 < rho < 1` and `horizon > 0`.
    pub fn new(rho: S, horizon: S) -> Result<Self> {
        let zero = S::zero();
        let one = S::one();
        // written so that NaN fails both checks
        if !(rho > zero && rho < one) {
            return Err(Error::RhoOutOfRange(approx_f64(rho)));
        }
        if !(horizon > zero) || !approx_f64(horizon).is_finite() {
            return Err(Error::NonPositiveHorizon(approx_f64(horizon)));
        }
        Ok(Self { rho, horizon })
    }

    #[inline]
    pub fn rho(&self) -> S {
        self.rho
    }

    /// The horizon `T`.
    #[inline]
    pub fn horizon(&self) -> S {
        self.horizon
    }

    pub fn check_strategy(&self, s: S) -> Result<Strategy<S>> {
        Strategy::new(s, self)
    }
}

/// `validate_params` from the public operation list; alias of [`GameParams::new`].
pub fn validate_params<S: Scalar>(rho: S, horizon: S) -> Result<GameParams<S>> {
    GameParams::new(rho, horizon)
}

/// A strategy known to lie in `[0, T]` for some game.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
#[serde(transparent)]
pub struct Strategy<S>(S);

impl<S: Scalar> Strategy<S> {
    pub fn new(s: S, params: &GameParams<S>) -> Result<Self> {
        if s >= S::zero() && s <= params.horizon {
            Ok(Self(s))
        } else {
            Err(Error::StrategyOutOfRange {
                value: approx_f64(s),
                horizon: approx_f64(params.horizon),
            })
        }
    }

    #[inline]
    pub fn value(self) -> S {
        self.0
    }
}

/// Payoffs to player one and player two.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PayoffPair<S> {
    pub p1: S,
    pub p2: S,
}

impl<S: Scalar> PayoffPair<S> {
    pub fn swapped(self) -> Self {
        Self {
            p1: self.p2,
            p2: self.p1,
        }
    }
}

/// Payoffs for a validated strategy pair.
pub fn payoff<S: Scalar>(s1: Strategy<S>, s2: Strategy<S>, params: &GameParams<S>) -> PayoffPair<S> {
    payoff_unchecked(s1.0, s2.0, params)
}

/// Payoffs for raw values, validating both strategies first.
pub fn payoff_checked<S: Scalar>(s1: S, s2: S, params: &GameParams<S>) -> Result<PayoffPair<S>> {
    Ok(payoff(
        Strategy::new(s1, params)?,
        Strategy::new(s2, params)?,
        params,
    ))
}

/// Payoff table without range checks. Callers guarantee `s1, s2` in `[0, T]`.
///
/// The tie row is selected by exact equality; there is no tolerance.
#[inline]
pub fn payoff_unchecked<S: Scalar>(s1: S, s2: S, params: &GameParams<S>) -> PayoffPair<S> {
    let t = params.horizon;
    let rho = params.rho;
    if s1 > s2 {
        let win = t - s2;
        PayoffPair {
            p1: win,
            p2: rho * win,
        }
    } else if s1 < s2 {
        let win = t - s1;
        PayoffPair {
            p1: rho * win,
            p2: win,
        }
    } else {
        let both = rho * (t - s1);
        PayoffPair { p1: both, p2: both }
    }
}

/// Payoff to the player choosing `own` against an opponent choosing `other`.
#[inline]
pub fn own_payoff<S: Scalar>(own: S, other: S, params: &GameParams<S>) -> S {
    payoff_unchecked(own, other, params).p1
}
