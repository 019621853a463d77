//! Time-consistent equilibrium of a Stackelberg reinsurance game.
//!
//! One mean-variance insurer buys a capped proportional layer from a reinsurer
//! pricing by the mean-variance principle and an excess-of-loss layer from a
//! reinsurer pricing by the expected-value principle. The two reinsurers set
//! their safety loadings in a simultaneous price game; the insurer follows.
//!
//! Module map:
//!
//! - [`market`]: exogenous data (rate curves, claim law, loadings, admissibility box)
//!   and the two premium principles.
//! - [`response`]: the insurer's layered best response and its indemnity map.
//! - [`reaction`]: first-order conditions and reaction curves for arbitrary claim laws.
//! - [`expo`]: closed-form machinery for exponential claims, including the
//!   constrained equilibrium.
//! - [`strategy`]: loading paths over time and the market state they induce.
//! - [`valuation`]: closed-form mean-variance objectives and value intercepts.
//! - [`montecarlo`]: exact-event simulation of the three surplus processes.

pub mod error;
pub mod expo;
pub mod market;
pub mod montecarlo;
pub mod numeric;
pub mod reaction;
pub mod response;
pub mod strategy;
pub mod valuation;

pub use error::{Error, Result};
pub use expo::{
    big_g, constrained_equilibrium, e_fun, g_fun, g_inv, regime_changes_in_beta,
    unconstrained_fixed_point, EquilibriumResult, ExpoGame, Regime, RegimeChange,
};
pub use market::{
    accumulation, admissible_box, claim_moments, premium_rates, AdmissibleBox, BoundConvention,
    ClaimDistribution, GenericClaims, MarketParams, Party, PerParty, PremiumPoint, RateCurve,
};
pub use montecarlo::{
    estimate_objectives, simulate, ObjectiveEstimate, PathRecord, SimConfig, TerminalSamples,
};
pub use reaction::{
    foc_residual_r1, foc_residual_r2, general_equilibrium, instantaneous_reward, reaction_xi1,
    reaction_xi2, truncated_moments, FocRatios, GeneralEquilibrium, GeneralOptions, Reinsurer,
    TruncatedMoments,
};
pub use response::{indemnity, response, Indemnity, IndemnityMoments, ResponseStrategy};
pub use strategy::{InstantState, PremiumPath, DEFAULT_PATH_NODES};
pub use valuation::{
    closed_form_objective, closed_form_objectives, value_intercept, value_intercepts,
    ObjectiveValue, ValueIntercept,
};
