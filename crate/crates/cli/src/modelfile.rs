//! Versioned JSON serialisation of a fitted model. serde_json prints floats
//! in their shortest round-trip form, so a load/save cycle reproduces
//! predictions exactly.

use copboost::boosting::FittedModel;
use copboost::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Per-covariate standardisation constants (training mean and standard
/// deviation) applied before the model sees the data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateScale {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub m_opt: usize,
    pub standardize: Option<Vec<CovariateScale>>,
    pub model: FittedModel,
}

impl ModelFile {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)
            .map_err(|e| Error::data(format!("model serialisation failed: {e}")))?;
        crate::csvio::write_file(path, &text)
    }

    pub fn load(path: &Path) -> Result<ModelFile> {
        let text = crate::csvio::read_file(path)?;
        let file: ModelFile = serde_json::from_str(&text)
            .map_err(|e| Error::data(format!("model parse error in {}: {e}", path.display())))?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::data(format!(
                "unsupported model format version {}",
                file.format_version
            )));
        }
        Ok(file)
    }

    /// Applies the stored standardisation to raw covariate columns.
    pub fn scale_columns(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        match &self.standardize {
            None => x.to_vec(),
            Some(scales) => x
                .iter()
                .enumerate()
                .map(|(j, col)| {
                    let s = &scales[j];
                    col.iter().map(|v| (v - s.mean) / s.sd).collect()
                })
                .collect(),
        }
    }
}

/// Standardisation constants from the training rows of each column.
pub fn training_scales(x: &[Vec<f64>], train_rows: &[usize]) -> Vec<CovariateScale> {
    x.iter()
        .map(|col| {
            let n = train_rows.len() as f64;
            let mean = train_rows.iter().map(|&i| col[i]).sum::<f64>() / n;
            let var = train_rows.iter().map(|&i| (col[i] - mean).powi(2)).sum::<f64>() / n;
            CovariateScale { mean, sd: var.sqrt().max(1e-12) }
        })
        .collect()
}
