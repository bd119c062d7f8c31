//! Univariate marginal distribution families for binary, count and
//! continuous responses.
//!
//! Parameterisations follow the GAMLSS conventions (Rigby & Stasinopoulos).
//! Each family documents its probability function explicitly since the
//! moment/link tables alone do not pin it down.

use crate::error::{Error, Result};
use crate::link::{Link, ParamRange};
use crate::normal;
use crate::numeric;
use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::{gamma_ur, ln_gamma};

/// Support of a marginal response.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Support {
    /// {0, 1}
    Binary,
    /// {0, 1, 2, ...}
    Count,
    /// all of R
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarginFamily {
    Bernoulli,
    Gaussian,
    Poisson,
    Geometric,
    Negbin1,
    Zalg,
    Zip,
    Zanbi,
    Zinbi,
}

impl MarginFamily {
    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "bernoulli" => Self::Bernoulli,
            "gaussian" => Self::Gaussian,
            "poisson" => Self::Poisson,
            "geometric" => Self::Geometric,
            "negbin1" => Self::Negbin1,
            "zalg" => Self::Zalg,
            "zip" => Self::Zip,
            "zanbi" => Self::Zanbi,
            "zinbi" => Self::Zinbi,
            other => return Err(Error::config(format!("unknown margin family '{other}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Bernoulli => "bernoulli",
            Self::Gaussian => "gaussian",
            Self::Poisson => "poisson",
            Self::Geometric => "geometric",
            Self::Negbin1 => "negbin1",
            Self::Zalg => "zalg",
            Self::Zip => "zip",
            Self::Zanbi => "zanbi",
            Self::Zinbi => "zinbi",
        }
    }

    pub fn n_params(self) -> usize {
        match self {
            Self::Bernoulli | Self::Poisson | Self::Geometric => 1,
            Self::Gaussian | Self::Negbin1 | Self::Zalg | Self::Zip => 2,
            Self::Zanbi | Self::Zinbi => 3,
        }
    }

    pub fn param_names(self) -> &'static [&'static str] {
        match self {
            Self::Bernoulli => &["p"],
            Self::Gaussian => &["mu", "sigma"],
            Self::Poisson | Self::Geometric => &["mu"],
            Self::Negbin1 => &["mu", "sigma"],
            Self::Zalg => &["mu", "sigma"],
            Self::Zip => &["mu", "sigma"],
            Self::Zanbi | Self::Zinbi => &["mu", "sigma", "nu"],
        }
    }

    pub fn param_ranges(self) -> &'static [ParamRange] {
        use ParamRange::*;
        match self {
            Self::Bernoulli => &[UnitInterval],
            Self::Gaussian => &[Real, Positive],
            Self::Poisson | Self::Geometric => &[Positive],
            Self::Negbin1 => &[Positive, Positive],
            Self::Zalg => &[UnitInterval, UnitInterval],
            Self::Zip => &[Positive, UnitInterval],
            Self::Zanbi | Self::Zinbi => &[Positive, Positive, UnitInterval],
        }
    }

    pub fn default_links(self) -> Vec<Link> {
        match self {
            Self::Bernoulli => vec![Link::Logit],
            Self::Gaussian => vec![Link::Identity, Link::Log],
            Self::Poisson | Self::Geometric => vec![Link::Log],
            Self::Negbin1 => vec![Link::Log, Link::Log],
            Self::Zalg => vec![Link::Logit, Link::Logit],
            Self::Zip => vec![Link::Log, Link::Logit],
            Self::Zanbi | Self::Zinbi => vec![Link::Log, Link::Log, Link::Logit],
        }
    }

    pub fn support(self) -> Support {
        match self {
            Self::Bernoulli => Support::Binary,
            Self::Gaussian => Support::Real,
            _ => Support::Count,
        }
    }

    pub fn check_params(self, params: &[f64]) -> Result<()> {
        if params.len() != self.n_params() {
            return Err(Error::domain(format!(
                "{} expects {} parameters, got {}",
                self.name(),
                self.n_params(),
                params.len()
            )));
        }
        for (i, (&v, r)) in params.iter().zip(self.param_ranges()).enumerate() {
            if !r.contains(v) {
                return Err(Error::domain(format!(
                    "{} parameter {} ({}) out of range: {v}",
                    self.name(),
                    i + 1,
                    self.param_names()[i]
                )));
            }
        }
        Ok(())
    }

    pub fn check_support(self, y: f64) -> Result<()> {
        let ok = match self.support() {
            Support::Binary => y == 0.0 || y == 1.0,
            Support::Count => y.is_finite() && y >= 0.0 && y.fract() == 0.0,
            Support::Real => y.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("response {y} outside support of {}", self.name())))
        }
    }

    /// Probability density (continuous) or mass (discrete) at `y`.
    pub fn pdf(self, y: f64, params: &[f64]) -> Result<f64> {
        self.check_params(params)?;
        self.check_support(y)?;
        Ok(self.pdf_unchecked(y, params))
    }

    /// CDF `P(Y <= y)`; for `y` below the support this is 0.
    pub fn cdf(self, y: f64, params: &[f64]) -> Result<f64> {
        self.check_params(params)?;
        Ok(self.cdf_unchecked(y, params))
    }

    pub(crate) fn pdf_unchecked(self, y: f64, p: &[f64]) -> f64 {
        match self {
            // f(y) = p^y (1-p)^(1-y)
            Self::Bernoulli => {
                if y == 1.0 {
                    p[0]
                } else {
                    1.0 - p[0]
                }
            }
            // f(y) = phi((y - mu)/sigma) / sigma
            Self::Gaussian => normal::pdf((y - p[0]) / p[1]) / p[1],
            Self::Poisson => poisson_pmf(y, p[0]),
            Self::Geometric => geometric_pmf(y, p[0]),
            Self::Negbin1 => nbi_pmf(y, p[0], p[1]),
            Self::Zalg => zalg_pmf(y, p[0], p[1]),
            Self::Zip => zip_pmf(y, p[0], p[1]),
            Self::Zanbi => zanbi_pmf(y, p[0], p[1], p[2]),
            Self::Zinbi => zinbi_pmf(y, p[0], p[1], p[2]),
        }
    }

    pub(crate) fn cdf_unchecked(self, y: f64, p: &[f64]) -> f64 {
        match self.support() {
            Support::Real => normal::cdf((y - p[0]) / p[1]),
            Support::Binary => {
                if y < 0.0 {
                    0.0
                } else if y < 1.0 {
                    1.0 - p[0]
                } else {
                    1.0
                }
            }
            Support::Count => {
                if y < 0.0 {
                    return 0.0;
                }
                let y = y.floor();
                match self {
                    Self::Poisson => gamma_ur(y + 1.0, p[0].max(1e-300)),
                    Self::Geometric => geometric_cdf(y, p[0]),
                    Self::Negbin1 => nbi_cdf(y, p[0], p[1]),
                    Self::Zalg => zalg_cdf(y, p[0], p[1]),
                    Self::Zip => p[1] + (1.0 - p[1]) * gamma_ur(y + 1.0, p[0].max(1e-300)),
                    Self::Zanbi => zanbi_cdf(y, p[0], p[1], p[2]),
                    Self::Zinbi => p[2] + (1.0 - p[2]) * nbi_cdf(y, p[0], p[1]),
                    _ => unreachable!(),
                }
            }
        }
    }

    /// Generalized inverse of the CDF: the smallest `y` in the support with
    /// `F(y) >= prob`. Count families use an exponentially stepped bracket
    /// followed by an integer bisection, capped at 1e7.
    pub fn quantile(self, prob: f64, params: &[f64]) -> Result<f64> {
        self.check_params(params)?;
        if !(prob > 0.0 && prob < 1.0) {
            return Err(Error::domain(format!("quantile probability {prob} outside (0,1)")));
        }
        match self.support() {
            Support::Real => Ok(params[0] + params[1] * normal::quantile(prob)),
            Support::Binary => Ok(if 1.0 - params[0] >= prob { 0.0 } else { 1.0 }),
            Support::Count => {
                if self.cdf_unchecked(0.0, params) >= prob {
                    return Ok(0.0);
                }
                let mut lo = 0.0f64; // F(lo) < prob
                let mut hi = 16.0f64;
                while self.cdf_unchecked(hi, params) < prob {
                    lo = hi;
                    hi *= 2.0;
                    if hi > 1e7 {
                        return Err(Error::numeric(format!(
                            "quantile scan for {} exceeded the 1e7 cap at prob {prob}",
                            self.name()
                        )));
                    }
                }
                while hi - lo > 1.0 {
                    let mid = ((lo + hi) / 2.0).floor();
                    if self.cdf_unchecked(mid, params) >= prob {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                Ok(hi)
            }
        }
    }

    /// E(Y), closed forms from the family's moment table.
    pub fn mean(self, p: &[f64]) -> Result<f64> {
        self.check_params(p)?;
        Ok(match self {
            Self::Bernoulli | Self::Gaussian | Self::Poisson | Self::Geometric | Self::Negbin1 => {
                p[0]
            }
            // (1 - sigma) * alpha * mu / (1 - mu), alpha = -1/log(1 - mu)
            Self::Zalg => {
                let alpha = -1.0 / libm::log1p(-p[0]);
                (1.0 - p[1]) * alpha * p[0] / (1.0 - p[0])
            }
            Self::Zip => (1.0 - p[1]) * p[0],
            Self::Zanbi => zanbi_c(p[0], p[1], p[2]) * p[0],
            Self::Zinbi => (1.0 - p[2]) * p[0],
        })
    }

    /// Var(Y), closed forms from the family's moment table.
    pub fn variance(self, p: &[f64]) -> Result<f64> {
        self.check_params(p)?;
        Ok(match self {
            Self::Bernoulli => p[0] * (1.0 - p[0]),
            Self::Gaussian => p[1] * p[1],
            Self::Poisson => p[0],
            Self::Geometric => p[0] + p[0] * p[0],
            Self::Negbin1 => p[0] + p[1] * p[0] * p[0],
            Self::Zalg => {
                let alpha = -1.0 / libm::log1p(-p[0]);
                let m = (1.0 - p[1]) * alpha * p[0];
                m * (1.0 - m) / ((1.0 - p[0]) * (1.0 - p[0]))
            }
            Self::Zip => p[0] * (1.0 - p[1]) * (1.0 + p[0] * p[1]),
            Self::Zanbi => {
                let c = zanbi_c(p[0], p[1], p[2]);
                c * p[0] + c * p[0] * p[0] * (1.0 + p[1] - c)
            }
            Self::Zinbi => (1.0 - p[2]) * p[0] + p[0] * p[0] * (1.0 - p[2]) * (p[1] + p[2]),
        })
    }

    /// Sensitivity of (F(y), f(y)) with respect to parameter `k`.
    ///
    /// Gaussian and Bernoulli margins use closed forms; the count families
    /// fall back to range-aware central differences, which the gradient
    /// oracle suite pins down.
    pub fn cdf_pdf_sens(self, y: f64, params: &[f64], k: usize) -> (f64, f64) {
        match self {
            Self::Bernoulli => {
                // F(0) = 1 - p, f(1) = p, f(0) = 1 - p
                let df = if y < 1.0 { -1.0 } else { 0.0 };
                let dpdf = if y == 1.0 { 1.0 } else { -1.0 };
                (df, dpdf)
            }
            Self::Gaussian => {
                let (mu, sigma) = (params[0], params[1]);
                let z = (y - mu) / sigma;
                let phi = normal::pdf(z);
                let f = phi / sigma;
                if k == 0 {
                    (-phi / sigma, f * z / sigma)
                } else {
                    (-phi * z / sigma, f * (z * z - 1.0) / sigma)
                }
            }
            _ => {
                let (lo, hi) = self.param_ranges()[k].bounds();
                numeric::paired_diff_in_range(
                    |v| {
                        let mut q = [0.0f64; 3];
                        q[..params.len()].copy_from_slice(params);
                        q[k] = v;
                        let q = &q[..params.len()];
                        (self.cdf_unchecked(y, q), self.pdf_unchecked(y, q))
                    },
                    params[k],
                    lo,
                    hi,
                )
            }
        }
    }
}

/// A margin family together with the chosen per-parameter links.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginSpec {
    pub family: MarginFamily,
    pub links: Vec<Link>,
}

impl MarginSpec {
    pub fn new(family: MarginFamily, links: Vec<Link>) -> Result<Self> {
        let spec = MarginSpec { family, links };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_default_links(family: MarginFamily) -> Self {
        MarginSpec { family, links: family.default_links() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.links.len() != self.family.n_params() {
            return Err(Error::config(format!(
                "{} needs {} links, got {}",
                self.family.name(),
                self.family.n_params(),
                self.links.len()
            )));
        }
        for (i, (link, range)) in self.links.iter().zip(self.family.param_ranges()).enumerate() {
            if link.range() != *range {
                return Err(Error::config(format!(
                    "link '{}' incompatible with parameter {} of {}",
                    link.name(),
                    i + 1,
                    self.family.name()
                )));
            }
        }
        Ok(())
    }

    /// Parameters from predictor values, clamped into their open ranges.
    pub fn response(&self, eta: &[f64]) -> Vec<f64> {
        eta.iter().zip(&self.links).map(|(&e, l)| l.response_clamped(e)).collect()
    }

    /// Negative log-likelihood of an intercept-only model at predictor `eta`.
    pub fn nll_intercept(&self, y: &[f64], eta: &[f64]) -> f64 {
        let params = self.response(eta);
        let mut nll = 0.0;
        for &yi in y {
            let f = self.family.pdf_unchecked(yi, &params).max(1e-300);
            nll -= f.ln();
        }
        nll
    }

    /// Offset values: the intercept-only maximum-likelihood fit on the link
    /// scale. Closed forms where available, otherwise a deterministic
    /// Nelder-Mead search. Degenerate samples are clamped (probabilities to
    /// [1e-6, 1-1e-6], scales to >= 1e-6) so the offsets stay finite.
    pub fn offset(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.is_empty() {
            return Err(Error::data("offset needs a nonempty response vector"));
        }
        for &yi in y {
            self.family.check_support(yi)?;
        }
        let n = y.len() as f64;
        let mean = y.iter().sum::<f64>() / n;
        let clamp_prob = |p: f64| {
            if !(1e-6..=1.0 - 1e-6).contains(&p) {
                log::warn!("degenerate sample for {}: clamping probability", self.family.name());
            }
            p.clamp(1e-6, 1.0 - 1e-6)
        };
        let clamp_scale = |s: f64| {
            if s < 1e-6 {
                log::warn!("degenerate sample for {}: clamping scale", self.family.name());
            }
            s.max(1e-6)
        };
        match self.family {
            MarginFamily::Bernoulli => Ok(vec![self.links[0].apply(clamp_prob(mean))]),
            MarginFamily::Gaussian => {
                let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                Ok(vec![mean, clamp_scale(var.sqrt()).ln()])
            }
            MarginFamily::Poisson | MarginFamily::Geometric => {
                Ok(vec![clamp_scale(mean).ln()])
            }
            family => {
                let frac0 = y.iter().filter(|&&v| v == 0.0).count() as f64 / n;
                let start = match family {
                    MarginFamily::Negbin1 => {
                        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
                        let m = clamp_scale(mean);
                        let disp = ((var - m) / (m * m)).clamp(0.05, 20.0);
                        vec![m.ln(), disp.ln()]
                    }
                    MarginFamily::Zalg => {
                        vec![0.0, Link::Logit.apply(frac0.clamp(0.02, 0.98))]
                    }
                    MarginFamily::Zip => {
                        let pz = frac0.clamp(0.02, 0.98) * 0.8;
                        vec![clamp_scale(mean / (1.0 - pz)).ln(), Link::Logit.apply(pz)]
                    }
                    MarginFamily::Zanbi | MarginFamily::Zinbi => {
                        let nu = frac0.clamp(0.02, 0.98) * 0.8;
                        vec![
                            clamp_scale(mean / (1.0 - nu)).ln(),
                            0.5f64.ln(),
                            Link::Logit.apply(nu),
                        ]
                    }
                    _ => unreachable!(),
                };
                let sol = numeric::nelder_mead(
                    |eta| self.nll_intercept(y, eta) / n,
                    &start,
                    0.5,
                    2000,
                );
                Ok(sol)
            }
        }
    }
}

// ---------------------------------------------------------------------------
// probability functions
// ---------------------------------------------------------------------------

/// Poisson: f(y) = exp(-mu) mu^y / y!
fn poisson_pmf(y: f64, mu: f64) -> f64 {
    let mut lf = -mu - ln_gamma(y + 1.0);
    if y > 0.0 {
        lf += y * mu.ln();
    }
    lf.exp()
}

/// Geometric (mean parameterisation): f(y) = mu^y / (1 + mu)^(y + 1)
fn geometric_pmf(y: f64, mu: f64) -> f64 {
    // log(mu/(1+mu)) = -log1p(1/mu)
    (-y * libm::log1p(1.0 / mu) - libm::log1p(mu)).exp()
}

/// Geometric CDF: F(y) = 1 - (mu/(1+mu))^(y+1)
fn geometric_cdf(y: f64, mu: f64) -> f64 {
    -libm::expm1(-(y + 1.0) * libm::log1p(1.0 / mu))
}

/// NBI log mass at zero: log f(0) = -(1/sigma) log(1 + sigma mu)
fn nbi_log_p0(mu: f64, sigma: f64) -> f64 {
    -libm::log1p(sigma * mu) / sigma
}

/// Negative binomial type I:
/// f(y) = Gamma(y + 1/sigma)/(Gamma(1/sigma) y!) (sigma mu/(1+sigma mu))^y (1+sigma mu)^(-1/sigma)
fn nbi_pmf(y: f64, mu: f64, sigma: f64) -> f64 {
    let r = 1.0 / sigma;
    let yl = y as u64;
    // Gamma-ratio term log Gamma(y + r) - log Gamma(r); the explicit product
    // avoids catastrophic cancellation when r is huge (sigma -> 0).
    let lg_ratio = if r > 1e8 && yl <= 100_000 {
        (0..yl).map(|j| (r + j as f64).ln()).sum::<f64>()
    } else {
        ln_gamma(y + r) - ln_gamma(r)
    };
    let mut lf = lg_ratio - ln_gamma(y + 1.0) + nbi_log_p0(mu, sigma);
    if y > 0.0 {
        lf += y * (sigma * mu).ln() - y * libm::log1p(sigma * mu);
    }
    lf.exp()
}

/// NBI CDF via the regularized incomplete beta: F(y) = I_{1/(1+sigma mu)}(1/sigma, y+1)
fn nbi_cdf(y: f64, mu: f64, sigma: f64) -> f64 {
    if sigma < 1e-10 {
        // Poisson limit; beta_reg becomes ill-conditioned for huge 1/sigma
        return gamma_ur(y + 1.0, mu);
    }
    beta_reg(1.0 / sigma, y + 1.0, 1.0 / (1.0 + sigma * mu)).clamp(0.0, 1.0)
}

/// Zero-altered logarithmic:
/// f(0) = sigma; f(y) = (1 - sigma) alpha mu^y / y for y >= 1, alpha = -1/log(1-mu)
fn zalg_pmf(y: f64, mu: f64, sigma: f64) -> f64 {
    if y == 0.0 {
        sigma
    } else {
        let alpha = -1.0 / libm::log1p(-mu);
        (1.0 - sigma) * alpha * (y * mu.ln() - y.ln()).exp()
    }
}

fn zalg_cdf(y: f64, mu: f64, sigma: f64) -> f64 {
    if y < 1.0 {
        return sigma;
    }
    let alpha = -1.0 / libm::log1p(-mu);
    let mut acc = 0.0;
    let mut term = mu; // mu^k / k at k = 1
    let mut k = 1.0f64;
    loop {
        acc += term;
        if k >= y {
            break;
        }
        // tail bound: sum_{j>k} mu^j/j < mu^{k+1} / ((k+1)(1-mu))
        if term * mu / (1.0 - mu) < 1e-18 {
            break;
        }
        term *= mu * k / (k + 1.0);
        k += 1.0;
    }
    (sigma + (1.0 - sigma) * alpha * acc).min(1.0)
}

/// Zero-inflated Poisson:
/// f(0) = sigma + (1-sigma) exp(-mu); f(y) = (1-sigma) exp(-mu) mu^y / y! for y >= 1
fn zip_pmf(y: f64, mu: f64, sigma: f64) -> f64 {
    if y == 0.0 {
        sigma + (1.0 - sigma) * (-mu).exp()
    } else {
        (1.0 - sigma) * poisson_pmf(y, mu)
    }
}

fn zanbi_c(mu: f64, sigma: f64, nu: f64) -> f64 {
    // c = (1 - nu) / (1 - (1 + sigma mu)^(-1/sigma))
    (1.0 - nu) / -libm::expm1(nbi_log_p0(mu, sigma))
}

/// Zero-altered (hurdle) NBI:
/// f(0) = nu; f(y) = (1-nu) NBI(y) / (1 - NBI(0)) for y >= 1
fn zanbi_pmf(y: f64, mu: f64, sigma: f64, nu: f64) -> f64 {
    if y == 0.0 {
        nu
    } else {
        (1.0 - nu) * nbi_pmf(y, mu, sigma) / -libm::expm1(nbi_log_p0(mu, sigma))
    }
}

fn zanbi_cdf(y: f64, mu: f64, sigma: f64, nu: f64) -> f64 {
    if y < 1.0 {
        return nu;
    }
    let p0 = nbi_log_p0(mu, sigma).exp();
    (nu + (1.0 - nu) * (nbi_cdf(y, mu, sigma) - p0) / (1.0 - p0)).clamp(0.0, 1.0)
}

/// Zero-inflated NBI:
/// f(0) = nu + (1-nu) NBI(0); f(y) = (1-nu) NBI(y) for y >= 1
fn zinbi_pmf(y: f64, mu: f64, sigma: f64, nu: f64) -> f64 {
    if y == 0.0 {
        nu + (1.0 - nu) * nbi_log_p0(mu, sigma).exp()
    } else {
        (1.0 - nu) * nbi_pmf(y, mu, sigma)
    }
}
