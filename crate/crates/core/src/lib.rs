//! The Will-Testing game.
//!
//! Two players each pick a capitulation time in `[0, T]`; whoever holds out
//! longer earns the time remaining, the capitulator earns the fraction `rho`
//! of it. This crate provides:
//!
//! * [`game`]: the exact pairwise payoff table,
//! * [`equilibrium`]: the infinite-population equilibrium density, its
//!   sampler, and numeric checks of the constant-pay property,
//! * [`population`]: finite populations on interaction graphs with
//!   best-response revision dynamics,
//! * [`analysis`]: guarantees available in the repeated two-player game.
//!
//! Numeric code is generic over [`Real`] (`f32`, `f64`); the payoff kernel
//! also accepts exact rationals. Aliases for the common instantiations live
//! at the crate root.

pub mod analysis;
pub mod equilibrium;
pub mod error;
pub mod game;
pub mod graph;
pub mod population;
pub mod quadrature;
pub mod scalar;
pub mod stats;

pub use analysis::GuaranteeReport;
pub use equilibrium::{EquilibriumDensity, ResidualCheck};
pub use error::{Error, Result};
pub use game::{payoff, validate_params, GameParams, PayoffPair, Strategy};
pub use graph::InteractionGraph;
pub use population::{
    BestResponse, EquilibriumCheck, InitialCondition, Observation, PopulationState,
    RevisionPolicy, SimReport,
};
pub use quadrature::QuadratureSpec;
pub use scalar::{Real, Scalar};

pub type GameParamsF64 = GameParams<f64>;
pub type GameParamsF32 = GameParams<f32>;
/// Exact parameters; ties are decided without rounding.
pub type ExactGameParams = GameParams<num_rational::Rational64>;
pub type DensityF64 = EquilibriumDensity<f64>;
pub type DensityF32 = EquilibriumDensity<f32>;
pub type PopulationF64 = PopulationState<f64>;
pub type PolicyF64 = RevisionPolicy<f64>;
pub type SimReportF64 = SimReport<f64>;
