//! Payoff functionals over sampled trajectories.
//!
//! Path statistics (average, maximum) run over every stored sample, both
//! endpoints included, and barriers are checked at the stored samples only —
//! the contract being priced is the discretely monitored one, on whatever
//! grid the trajectory carries.

use crate::model::{Contract, CustomPayoff, PayoffKind, PricingError, Trajectory};

/// Evaluation-ready payoff, extracted from a validated [`Contract`].
#[derive(Clone)]
pub enum PayoffSpec {
    EuropeanCall { strike: f64 },
    EuropeanPut { strike: f64 },
    AsianArithmeticCall { strike: f64 },
    AsianGeometricCall { strike: f64 },
    LookbackFixedCall { strike: f64 },
    UpAndOutCall { strike: f64, log_barrier: f64 },
    Custom(CustomPayoff),
}

impl std::fmt::Debug for PayoffSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::EuropeanCall { strike } => write!(f, "EuropeanCall {{ strike: {strike} }}"),
            Self::EuropeanPut { strike } => write!(f, "EuropeanPut {{ strike: {strike} }}"),
            Self::AsianArithmeticCall { strike } => {
                write!(f, "AsianArithmeticCall {{ strike: {strike} }}")
            }
            Self::AsianGeometricCall { strike } => {
                write!(f, "AsianGeometricCall {{ strike: {strike} }}")
            }
            Self::LookbackFixedCall { strike } => {
                write!(f, "LookbackFixedCall {{ strike: {strike} }}")
            }
            Self::UpAndOutCall { strike, log_barrier } => write!(
                f,
                "UpAndOutCall {{ strike: {strike}, barrier: {} }}",
                log_barrier.exp()
            ),
            Self::Custom(_) => write!(f, "Custom(<fn>)"),
        }
    }
}

impl PayoffSpec {
    pub fn from_contract(c: &Contract) -> Result<Self, PricingError> {
        c.validate()?;
        Ok(match c.kind {
            PayoffKind::EuropeanCall => Self::EuropeanCall { strike: c.strike },
            PayoffKind::EuropeanPut => Self::EuropeanPut { strike: c.strike },
            PayoffKind::AsianArithmeticCall => Self::AsianArithmeticCall { strike: c.strike },
            PayoffKind::AsianGeometricCall => Self::AsianGeometricCall { strike: c.strike },
            PayoffKind::LookbackFixedCall => Self::LookbackFixedCall { strike: c.strike },
            PayoffKind::UpAndOutCall => Self::UpAndOutCall {
                strike: c.strike,
                log_barrier: c.barrier.expect("validated").ln(),
            },
            PayoffKind::Custom => Self::Custom(c.custom_payoff.clone().expect("validated")),
        })
    }

    /// Payoff of one trajectory, in price units at maturity.
    pub fn evaluate(&self, traj: &Trajectory) -> f64 {
        let xs = &traj.log_price;
        match self {
            Self::EuropeanCall { strike } => (xs[0].exp() - strike).max(0.0),
            Self::EuropeanPut { strike } => (strike - xs[0].exp()).max(0.0),
            Self::AsianArithmeticCall { strike } => {
                let mean = xs.iter().map(|x| x.exp()).sum::<f64>() / xs.len() as f64;
                (mean - strike).max(0.0)
            }
            Self::AsianGeometricCall { strike } => {
                let mean_log = xs.iter().sum::<f64>() / xs.len() as f64;
                (mean_log.exp() - strike).max(0.0)
            }
            Self::LookbackFixedCall { strike } => {
                let max = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (max.exp() - strike).max(0.0)
            }
            Self::UpAndOutCall { strike, log_barrier } => {
                // Knocked out as soon as any stored sample touches the barrier.
                if xs.iter().any(|x| *x >= *log_barrier) {
                    0.0
                } else {
                    (xs[0].exp() - strike).max(0.0)
                }
            }
            Self::Custom(f) => f(traj),
        }
    }
}
