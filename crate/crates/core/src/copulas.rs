//! One-parameter bivariate copula families with 90/180/270-degree rotations.
//!
//! Every public entry point takes the user-facing dependence parameter theta:
//! for Clayton/Gumbel/Joe rotated by 90 or 270 degrees theta is negative and
//! the reflected base copula is evaluated at -theta, matching the negative
//! dependence those rotations introduce.
//!
//! The FGM family uses the multiplicative form
//! `C = u v (1 + theta (1-u)(1-v))`; the divisive variant fails both the
//! 2-increasing property and the tau = 2 theta / 9 relation, so it is not a
//! copula and is deliberately not implemented.

use crate::error::{Error, Result};
use crate::normal;
use crate::numeric;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Interior clip applied to copula arguments inside densities, h-functions
/// and inverses (CDF boundary values are kept exact).
pub const UV_EPS: f64 = 1e-12;

/// Below this magnitude a Frank copula is evaluated at its independence
/// limit; the identity link admits eta = 0 while theta = 0 itself is
/// excluded from the parameter range.
const FRANK_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopulaFamily {
    Gauss,
    Clayton,
    Gumbel,
    Frank,
    Amh,
    Fgm,
    Joe,
    /// Degenerate family used by the univariate benchmark: C(u,v) = uv with
    /// the dependence parameter pinned to zero.
    Independence,
}

impl CopulaFamily {
    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "gauss" => Self::Gauss,
            "clayton" => Self::Clayton,
            "gumbel" => Self::Gumbel,
            "frank" => Self::Frank,
            "amh" => Self::Amh,
            "fgm" => Self::Fgm,
            "joe" => Self::Joe,
            "independence" => Self::Independence,
            other => return Err(Error::config(format!("unknown copula family '{other}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Gauss => "gauss",
            Self::Clayton => "clayton",
            Self::Gumbel => "gumbel",
            Self::Frank => "frank",
            Self::Amh => "amh",
            Self::Fgm => "fgm",
            Self::Joe => "joe",
            Self::Independence => "independence",
        }
    }

    /// Families whose unrotated range only covers positive dependence; for
    /// these a 90/270 rotation flips the sign of theta.
    fn one_directional(self) -> bool {
        matches!(self, Self::Clayton | Self::Gumbel | Self::Joe)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Rotation {
    R0,
    R90,
    R180,
    R270,
}

impl Rotation {
    pub fn parse(deg: u32) -> Result<Self> {
        Ok(match deg {
            0 => Self::R0,
            90 => Self::R90,
            180 => Self::R180,
            270 => Self::R270,
            other => return Err(Error::config(format!("rotation must be 0/90/180/270, got {other}"))),
        })
    }

    pub fn degrees(self) -> u32 {
        match self {
            Self::R0 => 0,
            Self::R90 => 90,
            Self::R180 => 180,
            Self::R270 => 270,
        }
    }

    fn flips_sign(self) -> bool {
        matches!(self, Self::R90 | Self::R270)
    }
}

/// Which argument an h-function differentiates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HWrt {
    /// dC/du: the conditional CDF of V given U = u.
    First,
    /// dC/dv: the conditional CDF of U given V = v.
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopulaSpec {
    pub family: CopulaFamily,
    pub rotation: Rotation,
}

impl CopulaSpec {
    pub fn new(family: CopulaFamily, rotation: Rotation) -> Self {
        CopulaSpec { family, rotation }
    }

    pub fn label(&self) -> String {
        if self.rotation == Rotation::R0 {
            self.family.name().to_string()
        } else {
            format!("{}{}", self.family.name(), self.rotation.degrees())
        }
    }

    /// Range of the user-facing theta (open interval understood where the
    /// boundary is not attainable through the link).
    pub fn theta_range(&self) -> (f64, f64) {
        let flip = self.family.one_directional() && self.rotation.flips_sign();
        match self.family {
            CopulaFamily::Gauss | CopulaFamily::Amh | CopulaFamily::Fgm => (-1.0, 1.0),
            CopulaFamily::Frank => (f64::NEG_INFINITY, f64::INFINITY),
            CopulaFamily::Clayton => {
                if flip {
                    (f64::NEG_INFINITY, 0.0)
                } else {
                    (0.0, f64::INFINITY)
                }
            }
            CopulaFamily::Gumbel | CopulaFamily::Joe => {
                if flip {
                    (f64::NEG_INFINITY, -1.0)
                } else {
                    (1.0, f64::INFINITY)
                }
            }
            CopulaFamily::Independence => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub fn check_theta(&self, theta: f64) -> Result<()> {
        if !theta.is_finite() {
            return Err(Error::domain(format!("{}: theta {theta} not finite", self.label())));
        }
        let (lo, hi) = self.theta_range();
        let ok = match self.family {
            CopulaFamily::Gauss | CopulaFamily::Amh | CopulaFamily::Fgm => {
                (-1.0..=1.0).contains(&theta)
            }
            CopulaFamily::Gumbel | CopulaFamily::Joe => {
                if self.rotation.flips_sign() {
                    theta <= -1.0
                } else {
                    theta >= 1.0
                }
            }
            CopulaFamily::Clayton => {
                if self.rotation.flips_sign() {
                    theta < 0.0
                } else {
                    theta > 0.0
                }
            }
            // theta = 0 is admitted operationally through the independence
            // limit even though the formal range excludes it
            CopulaFamily::Frank | CopulaFamily::Independence => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "{}: theta {theta} outside range ({lo}, {hi})",
                self.label()
            )))
        }
    }

    /// Dependence response function: theta from the additive predictor.
    pub fn theta_response(&self, eta: f64) -> f64 {
        let e = eta.clamp(-30.0, 30.0);
        let base = match self.family {
            CopulaFamily::Gauss | CopulaFamily::Amh | CopulaFamily::Fgm => eta.tanh(),
            CopulaFamily::Clayton => e.exp(),
            CopulaFamily::Gumbel | CopulaFamily::Joe => 1.0 + e.exp(),
            CopulaFamily::Frank => eta,
            CopulaFamily::Independence => 0.0,
        };
        if self.family.one_directional() && self.rotation.flips_sign() {
            -base
        } else {
            base
        }
    }

    /// Dependence link function g (inverse of the response).
    pub fn theta_link(&self, theta: f64) -> f64 {
        let t = if self.family.one_directional() && self.rotation.flips_sign() {
            -theta
        } else {
            theta
        };
        match self.family {
            CopulaFamily::Gauss | CopulaFamily::Amh | CopulaFamily::Fgm => t.atanh(),
            CopulaFamily::Clayton => t.ln(),
            CopulaFamily::Gumbel | CopulaFamily::Joe => (t - 1.0).ln(),
            CopulaFamily::Frank => t,
            CopulaFamily::Independence => 0.0,
        }
    }

    /// d theta / d eta.
    pub fn theta_response_deriv(&self, eta: f64) -> f64 {
        let e = eta.clamp(-30.0, 30.0);
        let base = match self.family {
            CopulaFamily::Gauss | CopulaFamily::Amh | CopulaFamily::Fgm => {
                let t = eta.tanh();
                1.0 - t * t
            }
            CopulaFamily::Clayton | CopulaFamily::Gumbel | CopulaFamily::Joe => e.exp(),
            CopulaFamily::Frank => 1.0,
            CopulaFamily::Independence => 0.0,
        };
        if self.family.one_directional() && self.rotation.flips_sign() {
            -base
        } else {
            base
        }
    }

    /// Base-copula parameter for the rotated evaluation.
    fn base_theta(&self, theta: f64) -> f64 {
        if self.family.one_directional() && self.rotation.flips_sign() {
            -theta
        } else {
            theta
        }
    }

    /// Copula CDF C(u, v; theta). Boundary values are exact.
    pub fn cdf(&self, u: f64, v: f64, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
            return Err(Error::domain(format!("copula arguments ({u}, {v}) outside [0,1]^2")));
        }
        let th = self.base_theta(theta);
        let c = match self.rotation {
            Rotation::R0 => base_cdf(self.family, u, v, th),
            Rotation::R90 => v - base_cdf(self.family, 1.0 - u, v, th),
            Rotation::R180 => u + v - 1.0 + base_cdf(self.family, 1.0 - u, 1.0 - v, th),
            Rotation::R270 => u - base_cdf(self.family, u, 1.0 - v, th),
        };
        Ok(c.clamp(0.0, 1.0))
    }

    /// Conditional h-function: dC/du (`HWrt::First`) or dC/dv (`HWrt::Second`).
    pub fn hfun(&self, u: f64, v: f64, theta: f64, wrt: HWrt) -> Result<f64> {
        self.check_theta(theta)?;
        let th = self.base_theta(theta);
        let u = u.clamp(UV_EPS, 1.0 - UV_EPS);
        let v = v.clamp(UV_EPS, 1.0 - UV_EPS);
        let h = match (self.rotation, wrt) {
            (Rotation::R0, HWrt::First) => base_h1(self.family, u, v, th),
            (Rotation::R0, HWrt::Second) => base_h1(self.family, v, u, th),
            (Rotation::R90, HWrt::First) => base_h1(self.family, 1.0 - u, v, th),
            (Rotation::R90, HWrt::Second) => 1.0 - base_h1(self.family, v, 1.0 - u, th),
            (Rotation::R180, HWrt::First) => 1.0 - base_h1(self.family, 1.0 - u, 1.0 - v, th),
            (Rotation::R180, HWrt::Second) => 1.0 - base_h1(self.family, 1.0 - v, 1.0 - u, th),
            (Rotation::R270, HWrt::First) => 1.0 - base_h1(self.family, u, 1.0 - v, th),
            (Rotation::R270, HWrt::Second) => base_h1(self.family, 1.0 - v, u, th),
        };
        Ok(h.clamp(0.0, 1.0))
    }

    /// Copula density c(u, v; theta).
    pub fn density(&self, u: f64, v: f64, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        let th = self.base_theta(theta);
        let u = u.clamp(UV_EPS, 1.0 - UV_EPS);
        let v = v.clamp(UV_EPS, 1.0 - UV_EPS);
        let d = match self.rotation {
            Rotation::R0 => base_density(self.family, u, v, th),
            Rotation::R90 => base_density(self.family, 1.0 - u, v, th),
            Rotation::R180 => base_density(self.family, 1.0 - u, 1.0 - v, th),
            Rotation::R270 => base_density(self.family, u, 1.0 - v, th),
        };
        Ok(d.max(0.0))
    }

    /// Kendall's tau as a function of theta. Rotations by 90/270 negate tau.
    pub fn kendall_tau(&self, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        let tau = base_tau(self.family, self.base_theta(theta));
        Ok(if self.rotation.flips_sign() { -tau } else { tau })
    }

    /// Sensitivity of the CDF to theta, by range-aware central differences.
    pub fn dcdf_dtheta(&self, u: f64, v: f64, theta: f64) -> f64 {
        let (lo, hi) = self.theta_range();
        numeric::diff_in_range(|t| self.cdf(u, v, t).unwrap_or(f64::NAN), theta, lo, hi)
    }

    /// Sensitivity of an h-function to theta.
    pub fn dhfun_dtheta(&self, u: f64, v: f64, theta: f64, wrt: HWrt) -> f64 {
        let (lo, hi) = self.theta_range();
        numeric::diff_in_range(|t| self.hfun(u, v, t, wrt).unwrap_or(f64::NAN), theta, lo, hi)
    }

    /// Sensitivity of dC/dv to its conditioning argument v.
    pub fn dhfun_dv(&self, u: f64, v: f64, theta: f64) -> f64 {
        numeric::diff_in_range(
            |vv| self.hfun(u, vv, theta, HWrt::Second).unwrap_or(f64::NAN),
            v,
            0.0,
            1.0,
        )
    }

    /// Solves h(v | u) = dC/du (u, v) = w for v.
    pub fn inverse_hfun(&self, w: f64, u: f64, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        let th = self.base_theta(theta);
        let u = u.clamp(UV_EPS, 1.0 - UV_EPS);
        let w = w.clamp(UV_EPS, 1.0 - UV_EPS);
        let v = match self.rotation {
            Rotation::R0 => base_inv_h1(self.family, w, u, th),
            Rotation::R90 => base_inv_h1(self.family, w, 1.0 - u, th),
            Rotation::R180 => 1.0 - base_inv_h1(self.family, 1.0 - w, 1.0 - u, th),
            Rotation::R270 => 1.0 - base_inv_h1(self.family, 1.0 - w, u, th),
        };
        Ok(v.clamp(UV_EPS, 1.0 - UV_EPS))
    }

    /// Draws `n` pairs by conditional inversion: u and w are uniform and v
    /// solves h(v|u) = w. Deterministic for a given seed.
    pub fn sample(&self, theta: f64, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
        self.check_theta(theta)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let u: f64 = rng.random();
            let w: f64 = rng.random();
            let u = u.clamp(UV_EPS, 1.0 - UV_EPS);
            let w = w.clamp(UV_EPS, 1.0 - UV_EPS);
            let v = self.inverse_hfun(w, u, theta)?;
            out.push((u, v));
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// base (unrotated) implementations; theta is in the family's own range
// ---------------------------------------------------------------------------

/// log(exp(a) + exp(b)) without overflow.
fn logsumexp2(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// log(expm1(x)) for x > 0.
fn ln_expm1(x: f64) -> f64 {
    if x > 33.0 {
        x + libm::log1p(-(-x).exp())
    } else {
        libm::expm1(x).ln()
    }
}

fn base_cdf(fam: CopulaFamily, u: f64, v: f64, th: f64) -> f64 {
    if u <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return v;
    }
    if v >= 1.0 {
        return u;
    }
    match fam {
        CopulaFamily::Independence => u * v,
        // Phi2(Phi^-1(u), Phi^-1(v); theta)
        CopulaFamily::Gauss => {
            normal::bvn_cdf(normal::quantile(u), normal::quantile(v), th.clamp(-1.0, 1.0))
        }
        // (u^-th + v^-th - 1)^(-1/th), evaluated in the log domain
        CopulaFamily::Clayton => {
            let a = -th * u.ln();
            let b = -th * v.ln();
            let m = a.max(b);
            let s = (a - m).exp() + (b - m).exp() - (-m).exp();
            (-(m + s.ln()) / th).exp()
        }
        // exp(-((-ln u)^th + (-ln v)^th)^(1/th))
        CopulaFamily::Gumbel => {
            if th == 1.0 {
                return u * v;
            }
            let lx = (-u.ln()).ln();
            let ly = (-v.ln()).ln();
            let ln_a = logsumexp2(th * lx, th * ly) / th;
            (-ln_a.exp()).exp()
        }
        CopulaFamily::Frank => frank_cdf(u, v, th),
        // u v / (1 - th (1-u)(1-v))
        CopulaFamily::Amh => u * v / (1.0 - th * (1.0 - u) * (1.0 - v)),
        // u v (1 + th (1-u)(1-v))
        CopulaFamily::Fgm => u * v * (1.0 + th * (1.0 - u) * (1.0 - v)),
        // 1 - ((1-u)^th + (1-v)^th - (1-u)^th (1-v)^th)^(1/th)
        CopulaFamily::Joe => {
            if th == 1.0 {
                return u * v;
            }
            let ln_t = joe_ln_t(1.0 - u, 1.0 - v, th);
            -libm::expm1(ln_t / th)
        }
    }
}

/// -1/th log(1 + (e^{-th u} - 1)(e^{-th v} - 1)/(e^{-th} - 1)) with log-domain
/// branches for large |th|.
fn frank_cdf(u: f64, v: f64, th: f64) -> f64 {
    if th.abs() < FRANK_EPS {
        return u * v;
    }
    if th.abs() <= 25.0 {
        let eu = libm::expm1(-th * u);
        let ev = libm::expm1(-th * v);
        let e1 = libm::expm1(-th);
        return -libm::log1p(eu * ev / e1) / th;
    }
    if th > 0.0 {
        // 1 + eu ev / e1 = |denom| / |e1| with
        // |denom| = e^{-th u}(1 - e^{-th v}) + e^{-th v}(1 - e^{-th (1-v)})
        let d1 = (-th * u).exp() * -libm::expm1(-th * v);
        let d2 = (-th * v).exp() * -libm::expm1(-th * (1.0 - v));
        let ln_ratio = (d1 + d2).ln() - libm::log1p(-(-th).exp());
        -ln_ratio / th
    } else {
        let s = -th;
        let ln_e1 = ln_expm1(s);
        let ln_num = logsumexp2(ln_e1, ln_expm1(s * u) + ln_expm1(s * v));
        (ln_num - ln_e1) / s
    }
}

/// log T with T = ub^th + vb^th - ub^th vb^th for the Joe copula,
/// stable when the powers underflow.
fn joe_ln_t(ub: f64, vb: f64, th: f64) -> f64 {
    let a = th * ub.ln();
    let b = th * vb.ln();
    let m = a.max(b);
    // T = e^m (e^{a-m} + e^{b-m} - e^{a+b-m})
    m + ((a - m).exp() + (b - m).exp() - (a + b - m).exp()).ln()
}

/// dC/du of the base copula; all families here are exchangeable, so
/// dC/dv (u, v) = dC/du (v, u).
fn base_h1(fam: CopulaFamily, u: f64, v: f64, th: f64) -> f64 {
    match fam {
        CopulaFamily::Independence => v,
        // Phi((Phi^-1(v) - th Phi^-1(u)) / sqrt(1 - th^2))
        CopulaFamily::Gauss => {
            let r = th.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
            let x = normal::quantile(u);
            let y = normal::quantile(v);
            normal::cdf((y - r * x) / (1.0 - r * r).sqrt())
        }
        // u^{-th-1} (u^-th + v^-th - 1)^{-1/th - 1}
        CopulaFamily::Clayton => {
            let a = -th * u.ln();
            let b = -th * v.ln();
            let m = a.max(b);
            let ln_s = m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln();
            ((-th - 1.0) * u.ln() + (-1.0 / th - 1.0) * ln_s).exp()
        }
        // C(u,v) A^{1-th} (-ln u)^{th-1} / u with A = ((-ln u)^th + (-ln v)^th)^{1/th}
        CopulaFamily::Gumbel => {
            if th == 1.0 {
                return v;
            }
            let lx = (-u.ln()).ln();
            let ly = (-v.ln()).ln();
            let ln_a = logsumexp2(th * lx, th * ly) / th;
            let ln_c = -ln_a.exp();
            (ln_c + (th - 1.0) * (lx - ln_a) - u.ln()).exp()
        }
        // e^{-th u} (e^{-th v} - 1) / ((e^{-th} - 1) + (e^{-th u} - 1)(e^{-th v} - 1))
        CopulaFamily::Frank => frank_h1(u, v, th),
        // v (1 - th(1-v)) / (1 - th(1-u)(1-v))^2
        CopulaFamily::Amh => {
            let d = 1.0 - th * (1.0 - u) * (1.0 - v);
            v * (1.0 - th * (1.0 - v)) / (d * d)
        }
        // v + th v (1-v) (1-2u)
        CopulaFamily::Fgm => v + th * v * (1.0 - v) * (1.0 - 2.0 * u),
        // T^{1/th - 1} (1-u)^{th-1} (1 - (1-v)^th)
        CopulaFamily::Joe => {
            if th == 1.0 {
                return v;
            }
            let ub = 1.0 - u;
            let vb = 1.0 - v;
            let ln_t = joe_ln_t(ub, vb, th);
            let pv = -libm::expm1(th * vb.ln());
            ((1.0 / th - 1.0) * ln_t + (th - 1.0) * ub.ln() + pv.ln()).exp()
        }
    }
}

fn frank_h1(u: f64, v: f64, th: f64) -> f64 {
    if th.abs() < FRANK_EPS {
        return v;
    }
    if th.abs() <= 25.0 {
        let eu = libm::expm1(-th * u);
        let ev = libm::expm1(-th * v);
        let e1 = libm::expm1(-th);
        return (-th * u).exp() * ev / (e1 + eu * ev);
    }
    if th > 0.0 {
        // numerator e^{-th u} (1 - e^{-th v}); |denominator| as in frank_cdf
        // with the roles of u and v swapped for the grouping
        let num = (-th * u).exp() * -libm::expm1(-th * v);
        let d1 = (-th * v).exp() * -libm::expm1(-th * u);
        let d2 = (-th * u).exp() * -libm::expm1(-th * (1.0 - u));
        num / (d1 + d2)
    } else {
        let s = -th;
        let ln_num = s * u + ln_expm1(s * v);
        let ln_den = logsumexp2(ln_expm1(s), ln_expm1(s * u) + ln_expm1(s * v));
        (ln_num - ln_den).exp()
    }
}

fn base_density(fam: CopulaFamily, u: f64, v: f64, th: f64) -> f64 {
    match fam {
        CopulaFamily::Independence => 1.0,
        // exp(-(th^2 (x^2+y^2) - 2 th x y) / (2(1-th^2))) / sqrt(1-th^2)
        CopulaFamily::Gauss => {
            let r = th.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
            let x = normal::quantile(u);
            let y = normal::quantile(v);
            let omr2 = (1.0 - r) * (1.0 + r);
            (-(r * r * (x * x + y * y) - 2.0 * r * x * y) / (2.0 * omr2)).exp() / omr2.sqrt()
        }
        // (1+th) (uv)^{-th-1} (u^-th + v^-th - 1)^{-1/th - 2}
        CopulaFamily::Clayton => {
            let a = -th * u.ln();
            let b = -th * v.ln();
            let m = a.max(b);
            let ln_s = m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln();
            ((1.0 + th).ln() + (-th - 1.0) * (u.ln() + v.ln()) + (-1.0 / th - 2.0) * ln_s).exp()
        }
        // C (uv)^{-1} (ln u ln v)^{th-1} S^{2/th-2} (1 + (th-1) S^{-1/th})
        CopulaFamily::Gumbel => {
            if th == 1.0 {
                return 1.0;
            }
            let lx = (-u.ln()).ln();
            let ly = (-v.ln()).ln();
            let ln_a = logsumexp2(th * lx, th * ly) / th;
            let ln_c = -ln_a.exp();
            let tail = libm::log1p((th - 1.0) * (-ln_a).exp());
            (ln_c - u.ln() - v.ln() + (th - 1.0) * (lx + ly) + (2.0 - 2.0 * th) * ln_a + tail)
                .exp()
        }
        // -th e1 e^{-th(u+v)} / (e1 + eu ev)^2
        CopulaFamily::Frank => frank_density(u, v, th),
        // ((1-th+2 th u) D - 2 th (1-v) u (1-th+th u)) / D^3, D = 1-th(1-u)(1-v)
        CopulaFamily::Amh => {
            let d = 1.0 - th * (1.0 - u) * (1.0 - v);
            let n1 = (1.0 - th + 2.0 * th * u) * d;
            let n2 = 2.0 * th * (1.0 - v) * u * (1.0 - th + th * u);
            (n1 - n2) / (d * d * d)
        }
        // 1 + th (1-2u)(1-2v)
        CopulaFamily::Fgm => 1.0 + th * (1.0 - 2.0 * u) * (1.0 - 2.0 * v),
        // T^{1/th-2} (1-u)^{th-1} (1-v)^{th-1} (th - 1 + T)
        CopulaFamily::Joe => {
            if th == 1.0 {
                return 1.0;
            }
            let ub = 1.0 - u;
            let vb = 1.0 - v;
            let ln_t = joe_ln_t(ub, vb, th);
            ((1.0 / th - 2.0) * ln_t
                + (th - 1.0) * (ub.ln() + vb.ln())
                + (th - 1.0 + ln_t.exp()).ln())
            .exp()
        }
    }
}

fn frank_density(u: f64, v: f64, th: f64) -> f64 {
    if th.abs() < FRANK_EPS {
        return 1.0;
    }
    if th.abs() <= 25.0 {
        let eu = libm::expm1(-th * u);
        let ev = libm::expm1(-th * v);
        let e1 = libm::expm1(-th);
        let den = e1 + eu * ev;
        return -th * e1 * (-th * (u + v)).exp() / (den * den);
    }
    if th > 0.0 {
        let d1 = (-th * v).exp() * -libm::expm1(-th * u);
        let d2 = (-th * u).exp() * -libm::expm1(-th * (1.0 - u));
        let ln_den = (d1 + d2).ln();
        (th.ln() + libm::log1p(-(-th).exp()) - th * (u + v) - 2.0 * ln_den).exp()
    } else {
        let s = -th;
        let ln_den = logsumexp2(ln_expm1(s), ln_expm1(s * u) + ln_expm1(s * v));
        (s.ln() + ln_expm1(s) + s * (u + v) - 2.0 * ln_den).exp()
    }
}

fn base_tau(fam: CopulaFamily, th: f64) -> f64 {
    match fam {
        CopulaFamily::Independence => 0.0,
        // 2/pi arcsin(theta)
        CopulaFamily::Gauss => 2.0 / std::f64::consts::PI * th.asin(),
        // theta / (theta + 2)
        CopulaFamily::Clayton => th / (th + 2.0),
        // 1 - 1/theta
        CopulaFamily::Gumbel => 1.0 - 1.0 / th,
        // 1 - 4/theta (1 - D1(theta)), D1 the first Debye function
        CopulaFamily::Frank => {
            if th.abs() < 1e-4 {
                return th / 9.0 - th.powi(3) / 900.0;
            }
            1.0 - 4.0 / th * (1.0 - debye1(th))
        }
        // 1 - 2 (theta + (1-theta)^2 log(1-theta)) / (3 theta^2)
        CopulaFamily::Amh => {
            if th.abs() < 1e-2 {
                // series expansion; the closed form cancels near zero
                return 2.0 * th / 9.0 + th * th / 18.0 + th.powi(3) / 45.0 + th.powi(4) / 90.0;
            }
            let om = 1.0 - th;
            1.0 - 2.0 * (th + om * om * libm::log1p(-th)) / (3.0 * th * th)
        }
        // 2 theta / 9
        CopulaFamily::Fgm => 2.0 * th / 9.0,
        // 1 + 4/theta^2 int_0^1 x ln(x) (1-x)^{2(1-theta)/theta} dx, evaluated
        // through its series expansion 1 - 4 sum_k 1/(k (th k + 2)(th (k-1) + 2))
        CopulaFamily::Joe => {
            let mut sum = 0.0;
            let mut k = 1.0f64;
            loop {
                let term = 1.0 / (k * (th * k + 2.0) * (th * (k - 1.0) + 2.0));
                sum += term;
                if (term < 1e-14 && k > 8.0) || k > 5e6 {
                    // integral tail estimate sum_{j>k} 1/(th^2 j^3)
                    sum += 1.0 / (th * th) * (0.5 / (k * k) - 0.5 / (k * k * k));
                    break;
                }
                k += 1.0;
            }
            1.0 - 4.0 * sum
        }
    }
}

/// First Debye function D1(x) = (1/x) int_0^x t/(e^t - 1) dt by adaptive
/// quadrature; the integrand's singularity at zero is removable.
pub fn debye1(x: f64) -> f64 {
    let f = |t: f64| if t == 0.0 { 1.0 } else { t / libm::expm1(t) };
    numeric::integrate(f, 0.0, x, 1e-12) / x
}

/// v solving dC/du (u, v) = w for the base copula.
fn base_inv_h1(fam: CopulaFamily, w: f64, u: f64, th: f64) -> f64 {
    match fam {
        CopulaFamily::Independence => w,
        CopulaFamily::Gauss => {
            let r = th.clamp(-1.0 + 1e-12, 1.0 - 1e-12);
            let x = normal::quantile(u);
            normal::cdf(r * x + (1.0 - r * r).sqrt() * normal::quantile(w))
        }
        CopulaFamily::Clayton => {
            // v = ((w^{-th/(1+th)} - 1) u^{-th} + 1)^{-1/th}
            let t = libm::expm1(-th / (1.0 + th) * w.ln());
            let a = t.ln() - th * u.ln();
            let ln_s = if a > 35.0 { a } else { libm::log1p(a.exp()) };
            (-ln_s / th).exp()
        }
        _ => {
            // h1 is nondecreasing in v; bracketed bisection
            numeric::bisect_nondecreasing(
                |v| base_h1(fam, u, v, th),
                UV_EPS,
                1.0 - UV_EPS,
                w,
                1e-10,
            )
        }
    }
}
