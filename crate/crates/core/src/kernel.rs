//! One-step transition kernel of the joint (log-price, log-variance) chain.
//!
//! Over a step of width `eps` the kernel freezes its coefficients at the
//! current log-variance `y`, which makes the step a bivariate Gaussian. Its
//! log-density is `log_normalization + eps * (l_xy + l_y)`, where the two
//! Lagrangian pieces are a completed square: `l_y` is the marginal factor of
//! the log-variance move and `l_xy` the factor of the log-price move
//! conditioned on it. [`conditional_price_step`] exposes that conditional law
//! directly for sampling.
//!
//! Displacement convention: the kernel advances slot `i + 1` to slot `i`
//! (one step toward maturity). [`lagrangian`] and [`log_propagator`] take
//! differences `u[i + 1] - u[i]`, while [`conditional_price_step`] takes the
//! realized forward move `dy = y[i] - y[i + 1]`. Both brackets are even in
//! their argument around the drift, so the two conventions agree where they
//! overlap.

use std::f64::consts::PI;

use crate::model::ModelParams;

/// Drift of log-variance at `y`: `lambda e^{-y} + mu - xi^2 e^{2y(alpha-1)}/2`.
/// The lognormal branch reduces to `mu - xi^2/2`.
#[inline]
pub fn log_variance_drift(y: f64, p: &ModelParams) -> f64 {
    p.lambda * (-y).exp() + p.mu - 0.5 * p.xi * p.xi * (2.0 * y * (p.alpha - 1.0)).exp()
}

/// Drift of log-price at `y` under the pricing measure: `r - e^y/2`.
#[inline]
pub fn log_price_drift(y: f64, r: f64) -> f64 {
    r - 0.5 * y.exp()
}

/// Diffusion coefficient of log-variance at `y`: `xi e^{y(alpha-1)}`.
#[inline]
pub fn log_variance_vol(y: f64, p: &ModelParams) -> f64 {
    p.xi * (y * (p.alpha - 1.0)).exp()
}

/// Log of the kernel's Gaussian normalization at state `y`.
pub fn log_normalization(eps: f64, y: f64, p: &ModelParams) -> f64 {
    y * (0.5 - p.alpha) - (2.0 * PI * eps * p.xi * (1.0 - p.rho * p.rho).sqrt()).ln()
}

/// Completed-square Lagrangian pieces `(l_xy, l_y)` for displacements
/// `dx = x[i+1] - x[i]`, `dy = y[i+1] - y[i]` from state `y = y[i+1]`.
///
/// `l_y` depends only on the variance move; `l_xy` vanishes when the price
/// move sits exactly at its conditional mean given the variance move.
pub fn lagrangian(dx: f64, dy: f64, y: f64, eps: f64, p: &ModelParams) -> (f64, f64) {
    let a = dx / eps + log_price_drift(y, p.r);
    let b = dy / eps + log_variance_drift(y, p);
    // Regression coefficient of the price move on the variance move.
    let kappa = p.rho * (y * (1.5 - p.alpha)).exp() / p.xi;
    let resid = a - kappa * b;
    let l_xy = -(-y).exp() / (2.0 * (1.0 - p.rho * p.rho)) * resid * resid;
    let sig_y = log_variance_vol(y, p);
    let l_y = -b * b / (2.0 * sig_y * sig_y);
    (l_xy, l_y)
}

/// Gaussian law of one sampled quantity; draw with `mean + std * z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLaw {
    pub mean: f64,
    pub std: f64,
}

impl StepLaw {
    #[inline]
    pub fn sample(&self, z: f64) -> f64 {
        self.mean + self.std * z
    }

    /// Log-density of the law at `x`.
    pub fn log_density(&self, x: f64) -> f64 {
        let u = (x - self.mean) / self.std;
        -0.5 * u * u - (self.std * (2.0 * PI).sqrt()).ln()
    }
}

/// Law of the next log-price `x[i]` given `x[i+1]`, `y[i+1]`, and the realized
/// forward variance move `dy = y[i] - y[i+1]`.
///
/// The mean carries the correlation correction
/// `rho e^{y(3/2-alpha)}/xi * (dy - eps * drift_y)`; the correction vanishes
/// when the variance move sits at its drift.
pub fn conditional_price_step(
    x_next: f64,
    y_next: f64,
    dy: f64,
    eps: f64,
    p: &ModelParams,
) -> StepLaw {
    let kappa = p.rho * (y_next * (1.5 - p.alpha)).exp() / p.xi;
    let mean = x_next
        + eps * log_price_drift(y_next, p.r)
        + kappa * (dy - eps * log_variance_drift(y_next, p));
    let std = (0.5 * y_next).exp() * (eps * (1.0 - p.rho * p.rho)).sqrt();
    StepLaw { mean, std }
}

/// Log transition density from `(x_from, y_from)` at slot `i + 1` to
/// `(x_to, y_to)` at slot `i`. Integrates to one over `(x_to, y_to)`.
pub fn log_propagator(
    x_from: f64,
    y_from: f64,
    x_to: f64,
    y_to: f64,
    eps: f64,
    p: &ModelParams,
) -> f64 {
    let (l_xy, l_y) = lagrangian(x_from - x_to, y_from - y_to, y_from, eps, p);
    log_normalization(eps, y_from, p) + eps * (l_xy + l_y)
}
