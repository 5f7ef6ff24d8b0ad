//! Monte-Carlo pricing of European path-dependent options under a lognormal
//! stochastic-volatility model, via a spectral decomposition of the
//! variance-path measure.
//!
//! The discretized transition kernel of the joint (log-price, log-variance)
//! process factorizes into a conditional log-price step and a log-variance
//! chain ([`kernel`]). Conditioned on its two endpoints, the interior of the
//! log-variance chain is Gaussian with a tridiagonal precision matrix whose
//! eigensystem is known in closed form, so interior paths are sampled as
//! independent scalar modes ([`bridge`]). The price is an outer quadrature
//! over terminal log-variance of inner Monte-Carlo payoff expectations
//! ([`pricer`]). [`reference`] supplies Black-Scholes, implied-vol, and
//! Euler-scheme cross-checks.

pub mod bridge;
pub mod kernel;
pub mod model;
pub mod rng;

pub use model::{
    Contract, CustomPayoff, GridSpec, MarketState, McConfig, ModelParams, NodeDiagnostic,
    PayoffKind, PriceResult, PricingError, QuadratureKind, Trajectory,
};
