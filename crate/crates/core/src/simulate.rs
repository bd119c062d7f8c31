//! Synthetic data generation for the three simulation scenarios: binary
//! pair with a Gaussian copula, count pair (ZALG x ZINBI) with a Joe
//! copula, and mixed binary-continuous pair with a 270-degree rotated
//! Clayton copula, each in a linear and (where applicable) non-linear
//! version.
//!
//! Responses are produced by conditional inversion of the copula followed
//! by marginal quantile transforms. Every row draws from its own
//! counter-based RNG stream derived from the master seed, so the output is
//! identical no matter how generation is scheduled.

use crate::copulas::{CopulaFamily, CopulaSpec, Rotation};
use crate::data::{Dataset, Partition};
use crate::error::{Error, Result};
use crate::likelihood::{ModelSpec, PairKind};
use crate::link::Link;
use crate::margins::{MarginFamily, MarginSpec};
use crate::normal;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    S1BinaryLinear,
    S2CountLinear,
    S2CountNonlinear,
    S3MixedLinear,
    S3MixedNonlinear,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CovariateMode {
    /// multivariate Gaussian with Toeplitz covariance rho^|i-j|
    ToeplitzGaussian { rho: f64 },
    /// independent Uniform(0,1) columns
    IidUniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpSpec {
    pub preset: Preset,
    pub n_train: usize,
    pub n_mstop: usize,
    pub n_test: usize,
    pub p: usize,
    pub seed: u64,
}

impl DgpSpec {
    pub fn new(preset: Preset, seed: u64) -> Self {
        DgpSpec { preset, n_train: 1000, n_mstop: 1500, n_test: 1000, p: 10, seed }
    }

    pub fn n_total(&self) -> usize {
        self.n_train + self.n_mstop + self.n_test
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_total() == 0 {
            return Err(Error::config("empty simulated sample"));
        }
        if self.p < self.preset.min_p() {
            return Err(Error::config(format!(
                "preset {:?} needs at least {} covariates, got {}",
                self.preset,
                self.preset.min_p(),
                self.p
            )));
        }
        Ok(())
    }
}

impl Preset {
    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "s1-binary-linear" => Self::S1BinaryLinear,
            "s2-count-linear" => Self::S2CountLinear,
            "s2-count-nonlinear" => Self::S2CountNonlinear,
            "s3-mixed-linear" => Self::S3MixedLinear,
            "s3-mixed-nonlinear" => Self::S3MixedNonlinear,
            other => return Err(Error::config(format!("unknown preset '{other}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::S1BinaryLinear => "s1-binary-linear",
            Self::S2CountLinear => "s2-count-linear",
            Self::S2CountNonlinear => "s2-count-nonlinear",
            Self::S3MixedLinear => "s3-mixed-linear",
            Self::S3MixedNonlinear => "s3-mixed-nonlinear",
        }
    }

    fn min_p(self) -> usize {
        match self {
            Self::S1BinaryLinear => 6,
            Self::S2CountLinear => 8,
            Self::S2CountNonlinear => 5,
            Self::S3MixedLinear => 6,
            Self::S3MixedNonlinear => 3,
        }
    }

    pub fn covariate_mode(self) -> CovariateMode {
        match self {
            Self::S1BinaryLinear => CovariateMode::ToeplitzGaussian { rho: 0.5 },
            _ => CovariateMode::IidUniform,
        }
    }

    pub fn model_spec(self) -> ModelSpec {
        match self {
            Self::S1BinaryLinear => ModelSpec::new(
                PairKind::BinaryBinary,
                MarginSpec::new(MarginFamily::Bernoulli, vec![Link::Probit]).unwrap(),
                MarginSpec::new(MarginFamily::Bernoulli, vec![Link::Cloglog]).unwrap(),
                CopulaSpec::new(CopulaFamily::Gauss, Rotation::R0),
            )
            .unwrap(),
            Self::S2CountLinear | Self::S2CountNonlinear => ModelSpec::new(
                PairKind::CountCount,
                MarginSpec::with_default_links(MarginFamily::Zalg),
                MarginSpec::with_default_links(MarginFamily::Zinbi),
                CopulaSpec::new(CopulaFamily::Joe, Rotation::R0),
            )
            .unwrap(),
            Self::S3MixedLinear | Self::S3MixedNonlinear => ModelSpec::new(
                PairKind::BinaryContinuous,
                MarginSpec::new(MarginFamily::Bernoulli, vec![Link::Probit]).unwrap(),
                MarginSpec::with_default_links(MarginFamily::Gaussian),
                CopulaSpec::new(CopulaFamily::Clayton, Rotation::R270),
            )
            .unwrap(),
        }
    }

    /// True predictor values for one covariate row (no intercept terms).
    pub fn eta(self, x: &[f64]) -> Vec<f64> {
        match self {
            Self::S1BinaryLinear => vec![
                -1.0 * x[1] + 0.5 * x[2] + 1.0 * x[3] - 0.5 * x[5],
                0.5 * x[0] - 1.0 * x[1] + 0.75 * x[2],
                0.5 * x[1] - 1.5 * x[2] + 1.5 * x[3],
            ],
            Self::S2CountLinear => vec![
                -1.0 * x[0] + 1.0 * x[2],
                1.0 * x[3] + 1.0 * x[4] - 2.0 * x[7],
                1.5 * x[0] - 1.5 * x[1],
                -0.75 * x[1] + 1.0 * x[3],
                -0.75 * x[1] + 1.0 * x[2],
                -0.5 * x[1] + 1.5 * x[2] + 1.5 * x[4],
            ],
            Self::S2CountNonlinear => vec![
                0.5 * (x[0].powf(1.5) - 2.0 * (3.0 * x[0]).cos()),
                -80.0 * (x[2].powf(1.5) - x[2].powf(4.0 / 3.0)),
                -0.7 * (x[1] * x[1]).exp() + x[1].powf(0.4).exp(),
                3.0 - 1.5 * (1.5 * (2.0 * x[4]).cos() + 3.0 * x[4].tanh()),
                -3.0 - 0.7 * (x[0].sin() - (2.0 * x[0]).exp()),
                2.0 * (4.0 * x[3]).sin(),
            ],
            Self::S3MixedLinear => vec![
                1.5 * x[1] - 1.0 * x[2] + 1.5 * x[3],
                0.5 * x[1] + 1.5 * x[2],
                1.0 * x[4],
                1.5 * x[4] - 1.5 * x[5],
            ],
            Self::S3MixedNonlinear => vec![
                0.5 * (x[0].powf(1.5) - 2.0 * (3.0 * x[0]).cos()),
                -0.7 * (x[0] * x[0]).exp() + x[0].powf(0.4).exp(),
                -0.5 + (2.0 * x[1]).cos(),
                -1.0 + 3.0 * (4.0 * x[2]).sin(),
            ],
        }
    }

    /// Informative covariate indices (0-based) per distribution parameter.
    pub fn informative(self) -> Vec<Vec<usize>> {
        match self {
            Self::S1BinaryLinear => vec![vec![1, 2, 3, 5], vec![0, 1, 2], vec![1, 2, 3]],
            Self::S2CountLinear => vec![
                vec![0, 2],
                vec![3, 4, 7],
                vec![0, 1],
                vec![1, 3],
                vec![1, 2],
                vec![1, 2, 4],
            ],
            Self::S2CountNonlinear => {
                vec![vec![0], vec![2], vec![1], vec![4], vec![0], vec![3]]
            }
            Self::S3MixedLinear => vec![vec![1, 2, 3], vec![1, 2], vec![4], vec![4, 5]],
            Self::S3MixedNonlinear => vec![vec![0], vec![0], vec![1], vec![2]],
        }
    }
}

/// Ground truth emitted beside the simulated data.
#[derive(Debug, Clone)]
pub struct Truth {
    pub informative: Vec<Vec<usize>>,
    pub param_labels: Vec<String>,
    /// row-major true predictors, n x K
    pub eta_true: Vec<f64>,
}

fn covariate_rng(seed: u64, row: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row);
    rng
}

fn response_rng(seed: u64, row: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1u64 << 32) | row);
    rng
}

/// Covariate matrix as `p` columns of length `n`; deterministic in the seed
/// and independent across rows.
pub fn gen_covariates(mode: CovariateMode, n: usize, p: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut x = vec![vec![0.0; n]; p];
    for i in 0..n {
        let mut rng = covariate_rng(seed, i as u64);
        match mode {
            CovariateMode::IidUniform => {
                for col in x.iter_mut() {
                    col[i] = rng.random::<f64>();
                }
            }
            CovariateMode::ToeplitzGaussian { rho } => {
                // AR(1) construction realises the Toeplitz correlation rho^|i-j|
                let scale = (1.0 - rho * rho).sqrt();
                let mut prev = std_normal(&mut rng);
                x[0][i] = prev;
                for col in x.iter_mut().skip(1) {
                    prev = rho * prev + scale * std_normal(&mut rng);
                    col[i] = prev;
                }
            }
        }
    }
    x
}

fn std_normal(rng: &mut ChaCha8Rng) -> f64 {
    normal::quantile(rng.random_range(1e-16..1.0 - 1e-16))
}

/// Responses for existing covariates: per row, evaluate the true
/// predictors, transform to distribution parameters, draw a copula pair and
/// apply the marginal quantile transforms.
pub fn gen_response(
    preset: Preset,
    x: &[Vec<f64>],
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    let spec = preset.model_spec();
    let k = spec.k_total();
    let k1 = spec.k1();
    let k2 = spec.k2();
    let n = x.first().map_or(0, |c| c.len());
    let mut y1 = Vec::with_capacity(n);
    let mut y2 = Vec::with_capacity(n);
    let mut eta_true = Vec::with_capacity(n * k);
    for i in 0..n {
        let xrow: Vec<f64> = x.iter().map(|c| c[i]).collect();
        let eta = preset.eta(&xrow);
        let theta = spec.theta_from_eta(&eta);
        let mut rng = response_rng(seed, i as u64);
        let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
        let w: f64 = rng.random_range(1e-12..1.0 - 1e-12);
        let v = spec.copula.inverse_hfun(w, u, theta[k1 + k2])?;
        let a = spec
            .margin1
            .family
            .quantile(u, &theta[..k1])
            .map_err(|e| Error::numeric(format!("row {}: {e}", i + 1)))?;
        let b = spec
            .margin2
            .family
            .quantile(v, &theta[k1..k1 + k2])
            .map_err(|e| Error::numeric(format!("row {}: {e}", i + 1)))?;
        y1.push(a);
        y2.push(b);
        eta_true.extend(eta);
    }
    Ok((y1, y2, eta_true))
}

/// Full scenario draw: covariates, responses, partition labels and truth.
pub fn simulate(dgp: &DgpSpec) -> Result<(Dataset, Truth)> {
    dgp.validate()?;
    let n = dgp.n_total();
    let x = gen_covariates(dgp.preset.covariate_mode(), n, dgp.p, dgp.seed);
    let (y1, y2, eta_true) = gen_response(dgp.preset, &x, dgp.seed)?;
    let mut partition = Vec::with_capacity(n);
    for i in 0..n {
        partition.push(if i < dgp.n_train {
            Partition::Train
        } else if i < dgp.n_train + dgp.n_mstop {
            Partition::Mstop
        } else {
            Partition::Test
        });
    }
    let x_names = (1..=dgp.p).map(|j| format!("x{j}")).collect();
    let data = Dataset { y1, y2, x, x_names, partition };
    let spec = dgp.preset.model_spec();
    let truth = Truth {
        informative: dgp.preset.informative(),
        param_labels: spec.param_labels(),
        eta_true,
    };
    Ok((data, truth))
}
