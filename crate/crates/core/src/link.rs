//! Link and response functions mapping distribution parameters to the
//! unconstrained additive-predictor scale.

use crate::error::{Error, Result};
use crate::normal;
use serde::{Deserialize, Serialize};

/// Range of a distribution parameter, as enforced by its response function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ParamRange {
    /// (0, 1)
    UnitInterval,
    /// (0, inf)
    Positive,
    /// all of R
    Real,
}

impl ParamRange {
    pub fn bounds(self) -> (f64, f64) {
        match self {
            ParamRange::UnitInterval => (0.0, 1.0),
            ParamRange::Positive => (0.0, f64::INFINITY),
            ParamRange::Real => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn contains(self, x: f64) -> bool {
        let (lo, hi) = self.bounds();
        x.is_finite() && x > lo && x < hi
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Link {
    Identity,
    Log,
    Logit,
    Probit,
    Cloglog,
}

impl Link {
    pub fn parse(id: &str) -> Result<Link> {
        match id {
            "identity" => Ok(Link::Identity),
            "log" => Ok(Link::Log),
            "logit" => Ok(Link::Logit),
            "probit" => Ok(Link::Probit),
            "cloglog" => Ok(Link::Cloglog),
            other => Err(Error::config(format!("unknown link id '{other}'"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Link::Identity => "identity",
            Link::Log => "log",
            Link::Logit => "logit",
            Link::Probit => "probit",
            Link::Cloglog => "cloglog",
        }
    }

    pub fn range(self) -> ParamRange {
        match self {
            Link::Identity => ParamRange::Real,
            Link::Log => ParamRange::Positive,
            Link::Logit | Link::Probit | Link::Cloglog => ParamRange::UnitInterval,
        }
    }

    /// Response function h = g^{-1}, mapping the predictor to the parameter.
    pub fn response(self, eta: f64) -> f64 {
        match self {
            Link::Identity => eta,
            // capped so that the parameter stays finite
            Link::Log => eta.min(700.0).exp(),
            Link::Logit => {
                if eta >= 0.0 {
                    1.0 / (1.0 + (-eta).exp())
                } else {
                    let e = eta.exp();
                    e / (1.0 + e)
                }
            }
            Link::Probit => normal::cdf(eta),
            Link::Cloglog => -libm::expm1(-eta.min(700.0).exp()),
        }
    }

    /// Link function g, mapping the parameter back to the predictor scale.
    pub fn apply(self, theta: f64) -> f64 {
        match self {
            Link::Identity => theta,
            Link::Log => theta.ln(),
            Link::Logit => (theta / (1.0 - theta)).ln(),
            Link::Probit => normal::quantile(theta),
            Link::Cloglog => (-libm::log1p(-theta)).ln(),
        }
    }

    /// Derivative of the response function, dh/deta.
    pub fn response_deriv(self, eta: f64) -> f64 {
        match self {
            Link::Identity => 1.0,
            Link::Log => eta.min(700.0).exp(),
            Link::Logit => {
                let e = (-eta.abs()).exp();
                e / ((1.0 + e) * (1.0 + e))
            }
            Link::Probit => normal::pdf(eta),
            Link::Cloglog => {
                let t = eta.min(700.0).exp();
                (eta.min(700.0) - t).exp()
            }
        }
    }

    /// Applies the response and nudges the result into the open range, so
    /// that downstream densities never see an exact boundary value.
    pub fn response_clamped(self, eta: f64) -> f64 {
        let v = self.response(eta);
        match self.range() {
            ParamRange::UnitInterval => v.clamp(1e-12, 1.0 - 1e-12),
            ParamRange::Positive => v.max(1e-300),
            ParamRange::Real => v,
        }
    }
}
