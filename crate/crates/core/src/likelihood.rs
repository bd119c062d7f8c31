//! Joint negative log-likelihood of a bivariate copula model and its
//! gradient with respect to the additive predictors.
//!
//! The loss is assembled per observation from the margin CDFs/densities and
//! the copula: binary pairs use the four-cell decomposition of the joint
//! mass, count pairs the four-corner rectangle mass, and the mixed
//! binary-continuous pair a latent-variable representation through the
//! copula h-function. Gradients combine analytic outer derivatives
//! (h-functions, copula densities, response-function slopes) with
//! range-aware central differences for the margin and copula inner
//! sensitivities; a plain finite-difference oracle over the predictors pins
//! their correctness in the test suites.

use crate::copulas::{CopulaSpec, HWrt};
use crate::error::{Error, Result};
use crate::margins::{MarginSpec, Support};
use serde::{Deserialize, Serialize};

/// Smallest cell or rectangle probability passed to the logarithm.
pub const MASS_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairKind {
    BinaryBinary,
    CountCount,
    BinaryContinuous,
}

impl PairKind {
    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "binary-binary" => Self::BinaryBinary,
            "count-count" => Self::CountCount,
            "binary-continuous" => Self::BinaryContinuous,
            other => return Err(Error::config(format!("unknown pair kind '{other}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::BinaryBinary => "binary-binary",
            Self::CountCount => "count-count",
            Self::BinaryContinuous => "binary-continuous",
        }
    }
}

/// Full model specification: the response pair, both margins and the copula.
///
/// The K = K1 + K2 + 1 distribution parameters are laid out as margin 1
/// first, margin 2 second and the copula parameter last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub pair_kind: PairKind,
    pub margin1: MarginSpec,
    pub margin2: MarginSpec,
    pub copula: CopulaSpec,
}

impl ModelSpec {
    pub fn new(
        pair_kind: PairKind,
        margin1: MarginSpec,
        margin2: MarginSpec,
        copula: CopulaSpec,
    ) -> Result<Self> {
        let spec = ModelSpec { pair_kind, margin1, margin2, copula };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        self.margin1.validate()?;
        self.margin2.validate()?;
        let (need1, need2) = match self.pair_kind {
            PairKind::BinaryBinary => (Support::Binary, Support::Binary),
            PairKind::CountCount => (Support::Count, Support::Count),
            // the binary component is fixed as margin 1
            PairKind::BinaryContinuous => (Support::Binary, Support::Real),
        };
        if self.margin1.family.support() != need1 || self.margin2.family.support() != need2 {
            return Err(Error::config(format!(
                "margin supports do not match pair kind {}",
                self.pair_kind.name()
            )));
        }
        Ok(())
    }

    pub fn k1(&self) -> usize {
        self.margin1.family.n_params()
    }

    pub fn k2(&self) -> usize {
        self.margin2.family.n_params()
    }

    /// Total number of distribution parameters, K = K1 + K2 + 1.
    pub fn k_total(&self) -> usize {
        self.k1() + self.k2() + 1
    }

    pub fn param_labels(&self) -> Vec<String> {
        let mut labels = Vec::with_capacity(self.k_total());
        for name in self.margin1.family.param_names() {
            labels.push(format!("margin1.{name}"));
        }
        for name in self.margin2.family.param_names() {
            labels.push(format!("margin2.{name}"));
        }
        labels.push("copula.theta".to_string());
        labels
    }

    /// Distribution parameters from the predictor vector, via the response
    /// functions (margins clamped into their open ranges).
    pub fn theta_from_eta(&self, eta: &[f64]) -> Vec<f64> {
        let k1 = self.k1();
        let k2 = self.k2();
        let mut out = Vec::with_capacity(self.k_total());
        out.extend(self.margin1.response(&eta[..k1]));
        out.extend(self.margin2.response(&eta[k1..k1 + k2]));
        out.push(self.copula.theta_response(eta[k1 + k2]));
        out
    }

    pub fn check_responses(&self, y1: f64, y2: f64) -> Result<()> {
        self.margin1.family.check_support(y1)?;
        self.margin2.family.check_support(y2)
    }

    /// Negative log-likelihood contribution of one observation.
    pub fn joint_nll(&self, y1: f64, y2: f64, eta: &[f64]) -> Result<f64> {
        self.check_eta(eta)?;
        self.check_responses(y1, y2)?;
        let nll = match self.pair_kind {
            PairKind::BinaryBinary => self.nll_binary(y1, y2, eta)?,
            PairKind::CountCount => self.nll_count(y1, y2, eta)?,
            PairKind::BinaryContinuous => self.nll_mixed(y1, y2, eta)?,
        };
        if nll.is_finite() {
            Ok(nll)
        } else {
            Err(Error::numeric(format!("non-finite loss at y=({y1}, {y2})")))
        }
    }

    /// Partial derivatives of the loss with respect to each predictor,
    /// i.e. d omega / d eta_k (the boosting engine negates them).
    pub fn nll_gradient(&self, y1: f64, y2: f64, eta: &[f64]) -> Result<Vec<f64>> {
        self.check_eta(eta)?;
        self.check_responses(y1, y2)?;
        let grad = match self.pair_kind {
            PairKind::BinaryBinary => self.grad_binary(y1, y2, eta)?,
            PairKind::CountCount => self.grad_count(y1, y2, eta)?,
            PairKind::BinaryContinuous => self.grad_mixed(y1, y2, eta)?,
        };
        if let Some(bad) = grad.iter().position(|g| !g.is_finite()) {
            return Err(Error::numeric(format!(
                "non-finite gradient component {bad} at y=({y1}, {y2})"
            )));
        }
        Ok(grad)
    }

    fn check_eta(&self, eta: &[f64]) -> Result<()> {
        if eta.len() != self.k_total() {
            return Err(Error::domain(format!(
                "predictor vector has length {}, expected {}",
                eta.len(),
                self.k_total()
            )));
        }
        if eta.iter().any(|e| !e.is_finite()) {
            return Err(Error::numeric("non-finite predictor value"));
        }
        Ok(())
    }

    // -- binary-binary ------------------------------------------------------

    fn binary_parts(&self, eta: &[f64]) -> Result<(f64, f64, f64, f64)> {
        let p1 = self.margin1.links[0].response_clamped(eta[0]);
        let p2 = self.margin2.links[0].response_clamped(eta[1]);
        let th = self.copula.theta_response(eta[2]);
        let p11 = self.copula.cdf(p1, p2, th)?;
        Ok((p1, p2, th, p11))
    }

    fn nll_binary(&self, y1: f64, y2: f64, eta: &[f64]) -> Result<f64> {
        let (p1, p2, _, p11) = self.binary_parts(eta)?;
        let mass = match (y1 as u8, y2 as u8) {
            (1, 1) => p11,
            (1, 0) => p1 - p11,
            (0, 1) => p2 - p11,
            _ => 1.0 - p1 - p2 + p11,
        };
        Ok(-mass.max(MASS_FLOOR).ln())
    }

    fn grad_binary(&self, y1: f64, y2: f64, eta: &[f64]) -> Result<Vec<f64>> {
        let (p1, p2, th, p11) = self.binary_parts(eta)?;
        let hu = self.copula.hfun(p1, p2, th, HWrt::First)?;
        let hv = self.copula.hfun(p1, p2, th, HWrt::Second)?;
        let dth = self.copula.dcdf_dtheta(p1, p2, th);
        let (mass, dm_dp1, dm_dp2, dm_dth) = match (y1 as u8, y2 as u8) {
            (1, 1) => (p11, hu, hv, dth),
            (1, 0) => (p1 - p11, 1.0 - hu, -hv, -dth),
            (0, 1) => (p2 - p11, -hu, 1.0 - hv, -dth),
            _ => (1.0 - p1 - p2 + p11, hu - 1.0, hv - 1.0, dth),
        };
        let m = mass.max(MASS_FLOOR);
        Ok(vec![
            -dm_dp1 / m * self.margin1.links[0].response_deriv(eta[0]),
            -dm_dp2 / m * self.margin2.links[0].response_deriv(eta[1]),
            -dm_dth / m * self.copula.theta_response_deriv(eta[2]),
        ])
    }

    // -- count-count --------------------------------------------------------

    fn nll_count(&self, y1: f64, y2: f64, eta: &[f64]) -> Result<f64> {
        let k1 = self.k1();
        let k2 = self.k2();
        let par1 = self.margin1.response(&eta[..k1]);
        let par2 = self.margin2.response(&eta[k1..k1 + k2]);
        let th = self.copula.theta_response(eta[k1 + k2]);
        let f1 = self.margin1.family.pdf_unchecked(y1, &par1);
        let f2 = self.margin2.family.pdf_unchecked(y2, &par2);
        let a2 = self.margin1.family.cdf_unchecked(y1, &par1);
        let b2 = self.margin2.family.cdf_unchecked(y2, &par2);
        // lower corners via F - f, which is exactly zero at y = 0
        let a1 = (a2 - f1).max(0.0);
        let b1 = (b2 - f2).max(0.0);
        let mass = self.copula.cdf(a2, b2, th)? - self.copula.cdf(a1, b2, th)?
            - self.copula.cdf(a2, b1, th)?
            + self.copula.cdf(a1, b1, th)?;
        Ok(-mass.max(MASS_FLOOR).ln())
    }

    fn grad_count(&self, y1: f64, y2: f64, eta: &[f64]) -> Result<Vec<f64>> {
        let k1 = self.k1();
        let k2 = self.k2();
        let par1 = self.margin1.response(&eta[..k1]);
        let par2 = self.margin2.response(&eta[k1..k1 + k2]);
        let th = self.copula.theta_response(eta[k1 + k2]);
        let f1 = self.margin1.family.pdf_unchecked(y1, &par1);
        let f2 = self.margin2.family.pdf_unchecked(y2, &par2);
        let a2 = self.margin1.family.cdf_unchecked(y1, &par1);
        let b2 = self.margin2.family.cdf_unchecked(y2, &par2);
        let a1 = (a2 - f1).max(0.0);
        let b1 = (b2 - f2).max(0.0);

        let mass = self.copula.cdf(a2, b2, th)? - self.copula.cdf(a1, b2, th)?
            - self.copula.cdf(a2, b1, th)?
            + self.copula.cdf(a1, b1, th)?;
        let m = mass.max(MASS_FLOOR);

        // outer derivatives of the rectangle mass with respect to its corners
        let dm_da2 =
            self.copula.hfun(a2, b2, th, HWrt::First)? - self.copula.hfun(a2, b1, th, HWrt::First)?;
        let dm_da1 = -self.copula.hfun(a1, b2, th, HWrt::First)?
            + self.copula.hfun(a1, b1, th, HWrt::First)?;
        let dm_db2 = self.copula.hfun(a2, b2, th, HWrt::Second)?
            - self.copula.hfun(a1, b2, th, HWrt::Second)?;
        let dm_db1 = -self.copula.hfun(a2, b1, th, HWrt::Second)?
            + self.copula.hfun(a1, b1, th, HWrt::Second)?;
        let dm_dth = self.copula.dcdf_dtheta(a2, b2, th) - self.copula.dcdf_dtheta(a1, b2, th)
            - self.copula.dcdf_dtheta(a2, b1, th)
            + self.copula.dcdf_dtheta(a1, b1, th);

        let mut grad = Vec::with_capacity(self.k_total());
        for k in 0..k1 {
            let (df, dp) = self.margin1.family.cdf_pdf_sens(y1, &par1, k);
            let dmass = dm_da2 * df + dm_da1 * (df - dp);
            grad.push(-dmass / m * self.margin1.links[k].response_deriv(eta[k]));
        }
        for k in 0..k2 {
            let (df, dp) = self.margin2.family.cdf_pdf_sens(y2, &par2, k);
            let dmass = dm_db2 * df + dm_db1 * (df - dp);
            grad.push(-dmass / m * self.margin2.links[k].response_deriv(eta[k1 + k]));
        }
        grad.push(-dm_dth / m * self.copula.theta_response_deriv(eta[k1 + k2]));
        Ok(grad)
    }

    // -- binary-continuous --------------------------------------------------

    fn nll_mixed(&self, y1: f64, y2: f64, eta: &[f64]) -> Result<f64> {
        let k2 = self.k2();
        let p1 = self.margin1.links[0].response_clamped(eta[0]);
        let par2 = self.margin2.response(&eta[1..1 + k2]);
        let th = self.copula.theta_response(eta[1 + k2]);
        // latent representation: F1(0) = P(Y1 = 0) = 1 - p1
        let u = 1.0 - p1;
        let v = self.margin2.family.cdf_unchecked(y2, &par2);
        let f2 = self.margin2.family.pdf_unchecked(y2, &par2);
        let hv = self.copula.hfun(u, v, th, HWrt::Second)?;
        let mass = if y1 == 0.0 { hv } else { 1.0 - hv };
        Ok(-mass.max(MASS_FLOOR).ln() - f2.max(MASS_FLOOR).ln())
    }

    fn grad_mixed(&self, y1: f64, y2: f64, eta: &[f64]) -> Result<Vec<f64>> {
        let k2 = self.k2();
        let p1 = self.margin1.links[0].response_clamped(eta[0]);
        let par2 = self.margin2.response(&eta[1..1 + k2]);
        let th = self.copula.theta_response(eta[1 + k2]);
        let u = 1.0 - p1;
        let v = self.margin2.family.cdf_unchecked(y2, &par2);
        let f2 = self.margin2.family.pdf_unchecked(y2, &par2).max(MASS_FLOOR);
        let hv = self.copula.hfun(u, v, th, HWrt::Second)?;

        let dw_dh = if y1 == 0.0 {
            -1.0 / hv.max(MASS_FLOOR)
        } else {
            1.0 / (1.0 - hv).max(MASS_FLOOR)
        };
        // dh/du is the copula density; dh/dv and dh/dtheta by differences
        let dh_du = self.copula.density(u, v, th)?;
        let dh_dv = self.copula.dhfun_dv(u, v, th);
        let dh_dth = self.copula.dhfun_dtheta(u, v, th, HWrt::Second);

        let mut grad = Vec::with_capacity(self.k_total());
        grad.push(dw_dh * dh_du * -1.0 * self.margin1.links[0].response_deriv(eta[0]));
        for k in 0..k2 {
            let (df, dp) = self.margin2.family.cdf_pdf_sens(y2, &par2, k);
            let d = dw_dh * dh_dv * df - dp / f2;
            grad.push(d * self.margin2.links[k].response_deriv(eta[1 + k]));
        }
        grad.push(dw_dh * dh_dth * self.copula.theta_response_deriv(eta[1 + k2]));
        Ok(grad)
    }
}

/// Gradient stabilisation applied per parameter before base-learner fitting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stabilization {
    None,
    L2,
    Mad,
}

impl Stabilization {
    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "none" => Self::None,
            "l2" => Self::L2,
            "mad" => Self::Mad,
            other => return Err(Error::config(format!("unknown stabilization '{other}'"))),
        })
    }
}

/// Rescales a parameter's gradient vector in place: L2 divides by the
/// root-mean-square, MAD by 1.4826 times the median absolute deviation.
/// A stabiliser below 1e-12 leaves the vector unchanged.
pub fn stabilize(grad: &mut [f64], mode: Stabilization) {
    if grad.is_empty() {
        return;
    }
    let scale = match mode {
        Stabilization::None => return,
        Stabilization::L2 => {
            (grad.iter().map(|g| g * g).sum::<f64>() / grad.len() as f64).sqrt()
        }
        Stabilization::Mad => {
            let med = median(grad);
            let dev: Vec<f64> = grad.iter().map(|g| (g - med).abs()).collect();
            1.4826 * median(&dev)
        }
    };
    if scale < 1e-12 {
        return;
    }
    for g in grad.iter_mut() {
        *g /= scale;
    }
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = s.len();
    if n % 2 == 1 {
        s[n / 2]
    } else {
        0.5 * (s[n / 2 - 1] + s[n / 2])
    }
}
