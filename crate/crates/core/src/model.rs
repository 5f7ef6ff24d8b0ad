//! Shared model, market, contract, and run-configuration types.
//!
//! Trajectories are stored in reciprocal time: slot `n + 1` holds the
//! valuation-date value, slot `0` the value at maturity, and calendar time
//! increases as the slot index decreases. All simulation and payoff code
//! follows this convention.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

/// Errors surfaced by input validation and the numerical routines.
#[derive(Debug, Error)]
pub enum PricingError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

fn check_finite(violations: &mut Vec<String>, name: &str, value: f64) {
    if !value.is_finite() {
        violations.push(format!("{name} must be finite, got {value}"));
    }
}

fn join_violations(kind: &str, violations: Vec<String>) -> Result<(), PricingError> {
    if violations.is_empty() {
        Ok(())
    } else {
        Err(PricingError::InvalidInput(format!(
            "{kind}: {}",
            violations.join("; ")
        )))
    }
}

/// Parameters of the joint (log-price, variance) diffusion.
///
/// The asset follows `dS = mu_S S dt + sqrt(V) S dW1` and is priced under the
/// risk-neutral rate `r`; the variance follows `dV = (lambda + k V) dt +
/// xi V^alpha dW2` with `corr(dW1, dW2) = rho`. In the lognormal branch
/// (`alpha = 1`, `lambda = 0`) the multiplicative variance drift is the single
/// scalar `mu`, and the spectral pricer supports only that branch. `k` is the
/// multiplicative drift of the general-exponent branch and is inert when
/// `alpha = 1`; `lambda` and `alpha` feed the transition kernel and the Euler
/// reference scheme at general exponents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    /// Risk-free rate (continuous compounding, 1/year).
    pub r: f64,
    /// Multiplicative variance drift of the lognormal branch (1/year).
    pub mu: f64,
    /// Volatility of variance.
    pub xi: f64,
    /// Instantaneous correlation between price and variance noise.
    pub rho: f64,
    /// Additive variance drift (general branch).
    pub lambda: f64,
    /// Multiplicative variance drift (general branch, unused when `alpha = 1`).
    pub k: f64,
    /// Variance diffusion exponent.
    pub alpha: f64,
}

impl ModelParams {
    /// Lognormal-branch parameter set (`alpha = 1`, `lambda = 0`, `k` inert).
    pub fn lognormal(r: f64, mu: f64, xi: f64, rho: f64) -> Self {
        Self {
            r,
            mu,
            xi,
            rho,
            lambda: 0.0,
            k: 0.0,
            alpha: 1.0,
        }
    }

    /// Drift of log-variance in the lognormal branch.
    #[inline]
    pub fn lognormal_drift(&self) -> f64 {
        self.mu - 0.5 * self.xi * self.xi
    }

    /// Whether the spectral pricer supports these parameters.
    pub fn is_lognormal_branch(&self) -> bool {
        self.alpha == 1.0 && self.lambda == 0.0
    }

    /// All violated invariants; empty means the parameters are usable.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        for (name, value) in [
            ("r", self.r),
            ("mu", self.mu),
            ("xi", self.xi),
            ("rho", self.rho),
            ("lambda", self.lambda),
            ("k", self.k),
            ("alpha", self.alpha),
        ] {
            check_finite(&mut v, name, value);
        }
        if !(self.xi > 0.0) {
            v.push(format!("xi must be > 0, got {}", self.xi));
        }
        if !(self.rho.abs() < 1.0) {
            v.push(format!("rho must lie strictly inside (-1, 1), got {}", self.rho));
        }
        // lambda < 0 lets the variance cross zero where its diffusion vanishes.
        if !(self.lambda >= 0.0) {
            v.push(format!("lambda must be >= 0, got {}", self.lambda));
        }
        if !(self.alpha >= 0.0) {
            v.push(format!("alpha must be >= 0, got {}", self.alpha));
        }
        v
    }

    pub fn validate(&self) -> Result<(), PricingError> {
        join_violations("model parameters", self.violations())
    }
}

/// Market snapshot at the valuation date, stored in logs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarketState {
    pub spot_log_price: f64,
    pub spot_log_variance: f64,
}

impl MarketState {
    /// Builds the state from the spot price and spot variance in levels.
    pub fn from_levels(spot: f64, variance: f64) -> Result<Self, PricingError> {
        if !(spot > 0.0 && spot.is_finite()) {
            return Err(PricingError::InvalidInput(format!(
                "spot must be a positive finite price, got {spot}"
            )));
        }
        if !(variance > 0.0 && variance.is_finite()) {
            return Err(PricingError::InvalidInput(format!(
                "spot variance must be positive and finite, got {variance}"
            )));
        }
        Ok(Self {
            spot_log_price: spot.ln(),
            spot_log_variance: variance.ln(),
        })
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        check_finite(&mut v, "spot_log_price", self.spot_log_price);
        check_finite(&mut v, "spot_log_variance", self.spot_log_variance);
        v
    }

    pub fn validate(&self) -> Result<(), PricingError> {
        join_violations("market state", self.violations())
    }
}

/// Payoff family of a [`Contract`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PayoffKind {
    EuropeanCall,
    EuropeanPut,
    AsianArithmeticCall,
    AsianGeometricCall,
    LookbackFixedCall,
    UpAndOutCall,
    Custom,
}

impl fmt::Display for PayoffKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PayoffKind::EuropeanCall => "european_call",
            PayoffKind::EuropeanPut => "european_put",
            PayoffKind::AsianArithmeticCall => "asian_arithmetic_call",
            PayoffKind::AsianGeometricCall => "asian_geometric_call",
            PayoffKind::LookbackFixedCall => "lookback_fixed_call",
            PayoffKind::UpAndOutCall => "up_and_out_call",
            PayoffKind::Custom => "custom",
        };
        f.write_str(name)
    }
}

/// User-supplied payoff functional over a sampled trajectory.
pub type CustomPayoff = Arc<dyn Fn(&Trajectory) -> f64 + Send + Sync>;

/// A European-exercise contract on the simulated asset.
#[derive(Clone)]
pub struct Contract {
    pub kind: PayoffKind,
    /// Strike in price units; unused by `Custom` payoffs.
    pub strike: f64,
    /// Time to maturity in years.
    pub maturity: f64,
    /// Knock-out level; required (and `> strike`) for `UpAndOutCall`.
    pub barrier: Option<f64>,
    /// Payoff body; required for `Custom`, ignored otherwise.
    pub custom_payoff: Option<CustomPayoff>,
}

impl fmt::Debug for Contract {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Contract")
            .field("kind", &self.kind)
            .field("strike", &self.strike)
            .field("maturity", &self.maturity)
            .field("barrier", &self.barrier)
            .field("custom_payoff", &self.custom_payoff.as_ref().map(|_| "<fn>"))
            .finish()
    }
}

impl Contract {
    pub fn new(kind: PayoffKind, strike: f64, maturity: f64) -> Self {
        Self {
            kind,
            strike,
            maturity,
            barrier: None,
            custom_payoff: None,
        }
    }

    pub fn with_barrier(mut self, barrier: f64) -> Self {
        self.barrier = Some(barrier);
        self
    }

    /// Contract paying `f(trajectory)` at maturity.
    pub fn custom(maturity: f64, f: CustomPayoff) -> Self {
        Self {
            kind: PayoffKind::Custom,
            strike: f64::NAN,
            maturity,
            barrier: None,
            custom_payoff: Some(f),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.maturity > 0.0 && self.maturity.is_finite()) {
            v.push(format!("maturity must be > 0, got {}", self.maturity));
        }
        if self.kind != PayoffKind::Custom && !(self.strike > 0.0 && self.strike.is_finite()) {
            v.push(format!("strike must be > 0, got {}", self.strike));
        }
        match (self.kind, self.barrier) {
            (PayoffKind::UpAndOutCall, None) => {
                v.push("up_and_out_call requires a barrier".to_string());
            }
            (PayoffKind::UpAndOutCall, Some(b)) => {
                if !(b > self.strike && b.is_finite()) {
                    v.push(format!(
                        "barrier must be finite and > strike, got barrier {b} with strike {}",
                        self.strike
                    ));
                }
            }
            (_, Some(_)) => v.push(format!("{} does not take a barrier", self.kind)),
            (_, None) => {}
        }
        if self.kind == PayoffKind::Custom && self.custom_payoff.is_none() {
            v.push("custom contract requires a payoff body".to_string());
        }
        if self.kind != PayoffKind::Custom && self.custom_payoff.is_some() {
            v.push(format!("{} does not take a custom payoff body", self.kind));
        }
        v
    }

    pub fn validate(&self) -> Result<(), PricingError> {
        join_violations("contract", self.violations())
    }
}

/// Quadrature family for the outer terminal log-variance integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub enum QuadratureKind {
    #[default]
    Trapezoid,
    Simpson,
}

/// Discretization of the path integral and of the outer quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    /// Interior trajectory slots; the time step is `maturity / (n + 1)`.
    pub n: usize,
    /// Outer quadrature nodes over terminal log-variance (odd, >= 3).
    pub y0_nodes: usize,
    /// Half-width of the outer integral, in standard deviations of the
    /// terminal log-variance.
    pub y0_halfwidth_sigmas: f64,
    pub quadrature: QuadratureKind,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: 64,
            y0_nodes: 101,
            y0_halfwidth_sigmas: 6.0,
            quadrature: QuadratureKind::Trapezoid,
        }
    }
}

impl GridSpec {
    /// Time step `maturity / (n + 1)`.
    pub fn eps(&self, maturity: f64) -> f64 {
        maturity / (self.n + 1) as f64
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.n < 1 {
            v.push("n must be >= 1".to_string());
        }
        if self.y0_nodes < 3 || self.y0_nodes % 2 == 0 {
            v.push(format!("y0_nodes must be odd and >= 3, got {}", self.y0_nodes));
        }
        if !(self.y0_halfwidth_sigmas > 0.0 && self.y0_halfwidth_sigmas.is_finite()) {
            v.push(format!(
                "y0_halfwidth_sigmas must be > 0, got {}",
                self.y0_halfwidth_sigmas
            ));
        }
        v
    }

    pub fn validate(&self) -> Result<(), PricingError> {
        join_violations("grid", self.violations())
    }
}

/// Monte-Carlo budgets and seeding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    /// Conditioned variance trajectories per quadrature node.
    pub variance_paths: usize,
    /// Log-price paths per variance trajectory.
    pub price_paths: usize,
    /// Master seed; every substream is derived from it deterministically.
    pub seed: u64,
    /// Pair each variance trajectory and its price paths with the
    /// sign-flipped draws.
    pub antithetic: bool,
}

impl McConfig {
    /// Default budgets (1000 variance trajectories, 10 price paths each).
    pub fn new(seed: u64) -> Self {
        Self {
            variance_paths: 1000,
            price_paths: 10,
            seed,
            antithetic: false,
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.variance_paths < 2 {
            v.push("variance_paths must be >= 2".to_string());
        }
        if self.price_paths < 1 {
            v.push("price_paths must be >= 1".to_string());
        }
        v
    }

    pub fn validate(&self) -> Result<(), PricingError> {
        join_violations("mc config", self.violations())
    }
}

/// A sampled joint path in reciprocal time; see the module doc for the slot
/// convention. Both vectors have length `n + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub log_price: Vec<f64>,
    pub log_variance: Vec<f64>,
}

impl Trajectory {
    /// Zero-filled trajectory with `n` interior slots.
    pub fn zeros(n: usize) -> Self {
        Self {
            log_price: vec![0.0; n + 2],
            log_variance: vec![0.0; n + 2],
        }
    }

    /// Number of stored samples, `n + 2`.
    pub fn len(&self) -> usize {
        self.log_price.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_price.is_empty()
    }

    /// Log-price at maturity (slot 0).
    #[inline]
    pub fn maturity_log_price(&self) -> f64 {
        self.log_price[0]
    }
}

/// One outer-quadrature node's contribution, kept for diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeDiagnostic {
    /// Terminal log-variance at the node.
    pub y0: f64,
    /// Quadrature weight.
    pub quad_weight: f64,
    /// Endpoint marginal weight (density of the node's terminal log-variance).
    pub endpoint_weight: f64,
    /// Conditional payoff expectation at the node.
    pub chi: f64,
    /// Standard error of `chi`.
    pub chi_std_error: f64,
}

/// A price estimate with its Monte-Carlo uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceResult {
    pub price: f64,
    pub std_error: f64,
    /// Total payoff evaluations behind the estimate.
    pub n_evaluations: u64,
    /// Per-node conditional expectations (empty for plain Monte-Carlo runs).
    pub diagnostics: Vec<NodeDiagnostic>,
}
