//! TOML run configuration: model, boosting, base-learner and simulation
//! settings. Unknown keys are rejected and every default is spelled out
//! here so a config file only needs the fields it wants to change.

use copboost::baselearners::PSplineConfig;
use copboost::boosting::{BoostConfig, OffsetMode};
use copboost::copulas::{CopulaFamily, CopulaSpec, Rotation};
use copboost::error::{Error, Result};
use copboost::likelihood::{ModelSpec, PairKind, Stabilization};
use copboost::link::Link;
use copboost::margins::{MarginFamily, MarginSpec};
use copboost::simulate::{DgpSpec, Preset};
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: Option<ModelSection>,
    #[serde(default)]
    pub boost: BoostSection,
    #[serde(default)]
    pub learners: LearnerSection,
    pub simulate: Option<SimulateSection>,
    #[serde(default)]
    pub score: ScoreSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub pair_kind: String,
    pub margin1_family: String,
    #[serde(default)]
    pub margin1_links: Option<Vec<String>>,
    pub margin2_family: String,
    #[serde(default)]
    pub margin2_links: Option<Vec<String>>,
    pub copula_family: String,
    #[serde(default)]
    pub copula_rotation: u32,
    /// univariate benchmark: independence copula, no dependence learners
    #[serde(default)]
    pub univariate: bool,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoostSection {
    pub s_step: f64,
    pub m_stop: usize,
    pub stabilization: String,
    pub offset_mode: String,
    pub seed: u64,
    /// "mstop-opt" writes the model truncated at the tuned iteration,
    /// "final" keeps all m_stop iterations
    pub write_at: String,
}

impl Default for BoostSection {
    fn default() -> Self {
        BoostSection {
            s_step: 0.1,
            m_stop: 1000,
            stabilization: "l2".into(),
            offset_mode: "mle".into(),
            seed: 1,
            write_at: "mstop-opt".into(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LearnerSection {
    /// candidate type for continuous covariates: "linear" or "pspline"
    pub default_kind: String,
    pub df_linear: f64,
    pub df_smooth: f64,
    pub pspline_inner_knots: usize,
    pub pspline_degree: usize,
    pub pspline_diff_order: usize,
    /// z-score covariates on the training rows before fitting
    pub standardize: bool,
    /// column names treated as categorical ridge learners
    pub categorical: Vec<String>,
}

impl Default for LearnerSection {
    fn default() -> Self {
        LearnerSection {
            default_kind: "linear".into(),
            df_linear: 2.0,
            df_smooth: 4.0,
            pspline_inner_knots: 20,
            pspline_degree: 3,
            pspline_diff_order: 2,
            standardize: false,
            categorical: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    pub preset: String,
    #[serde(default = "default_n_train")]
    pub n_train: usize,
    #[serde(default = "default_n_mstop")]
    pub n_mstop: usize,
    #[serde(default = "default_n_test")]
    pub n_test: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_n_train() -> usize {
    1000
}
fn default_n_mstop() -> usize {
    1500
}
fn default_n_test() -> usize {
    1000
}
fn default_p() -> usize {
    10
}
fn default_seed() -> u64 {
    1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScoreSection {
    pub energy_samples: usize,
    pub seed: u64,
}

impl Default for ScoreSection {
    fn default() -> Self {
        ScoreSection { energy_samples: 1000, seed: 9 }
    }
}

/// A parsed configuration together with the hash of its source bytes,
/// recorded in every output for provenance.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub hash: String,
}

pub fn load_config(path: &std::path::Path) -> Result<LoadedConfig> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::config("config file is not valid UTF-8"))?;
    let config: RunConfig =
        toml::from_str(&text).map_err(|e| Error::config(format!("config parse error: {e}")))?;
    let digest = Sha256::digest(&bytes);
    let hash: String = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(LoadedConfig { config, hash })
}

impl RunConfig {
    /// Model specification, either from the explicit `[model]` section or
    /// derived from the simulation preset.
    pub fn model_spec(&self) -> Result<ModelSpec> {
        match &self.model {
            Some(m) => {
                let margin1 = margin_spec(&m.margin1_family, m.margin1_links.as_deref())?;
                let margin2 = margin_spec(&m.margin2_family, m.margin2_links.as_deref())?;
                let copula = if m.univariate {
                    CopulaSpec::new(CopulaFamily::Independence, Rotation::R0)
                } else {
                    CopulaSpec::new(
                        CopulaFamily::parse(&m.copula_family)?,
                        Rotation::parse(m.copula_rotation)?,
                    )
                };
                ModelSpec::new(PairKind::parse(&m.pair_kind)?, margin1, margin2, copula)
            }
            None => {
                let sim = self.simulate.as_ref().ok_or_else(|| {
                    Error::config("config needs a [model] or a [simulate] section")
                })?;
                let mut spec = Preset::parse(&sim.preset)?.model_spec();
                if self.univariate() {
                    spec.copula = CopulaSpec::new(CopulaFamily::Independence, Rotation::R0);
                }
                Ok(spec)
            }
        }
    }

    pub fn univariate(&self) -> bool {
        self.model.as_ref().is_some_and(|m| m.univariate)
    }

    pub fn boost_config(&self, seed_override: Option<u64>) -> Result<BoostConfig> {
        let b = &self.boost;
        let config = BoostConfig {
            s_step: b.s_step,
            m_stop: b.m_stop,
            stabilization: Stabilization::parse(&b.stabilization)?,
            offset_mode: match b.offset_mode.as_str() {
                "mle" => OffsetMode::Mle,
                "zero" => OffsetMode::Zero,
                other => {
                    return Err(Error::config(format!("unknown offset mode '{other}'")))
                }
            },
            seed: seed_override.unwrap_or(b.seed),
        };
        if !matches!(b.write_at.as_str(), "mstop-opt" | "final") {
            return Err(Error::config(format!(
                "write_at must be 'mstop-opt' or 'final', got '{}'",
                b.write_at
            )));
        }
        config.validate()?;
        Ok(config)
    }

    pub fn pspline_config(&self) -> PSplineConfig {
        PSplineConfig {
            inner_knots: self.learners.pspline_inner_knots,
            degree: self.learners.pspline_degree,
            diff_order: self.learners.pspline_diff_order,
        }
    }

    pub fn dgp_spec(&self, seed_override: Option<u64>) -> Result<DgpSpec> {
        let sim = self
            .simulate
            .as_ref()
            .ok_or_else(|| Error::config("missing [simulate] section"))?;
        Ok(DgpSpec {
            preset: Preset::parse(&sim.preset)?,
            n_train: sim.n_train,
            n_mstop: sim.n_mstop,
            n_test: sim.n_test,
            p: sim.p,
            seed: seed_override.unwrap_or(sim.seed),
        })
    }
}

fn margin_spec(family: &str, links: Option<&[String]>) -> Result<MarginSpec> {
    let family = MarginFamily::parse(family)?;
    match links {
        None => Ok(MarginSpec::with_default_links(family)),
        Some(ids) => {
            let links: Result<Vec<Link>> = ids.iter().map(|s| Link::parse(s)).collect();
            MarginSpec::new(family, links?)
        }
    }
}
