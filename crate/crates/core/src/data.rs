//! In-memory dataset shared by the boosting engine, the simulator and the
//! scoring routines.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Partition {
    /// rows used to fit base-learners and compute training risk
    Train,
    /// out-of-bag rows used to tune the stopping iteration
    Mstop,
    /// held-out rows used only for evaluation
    Test,
}

impl Partition {
    pub fn parse(id: &str) -> Result<Self> {
        Ok(match id {
            "train" => Self::Train,
            "mstop" => Self::Mstop,
            "test" => Self::Test,
            other => return Err(Error::data(format!("unknown partition label '{other}'"))),
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Train => "train",
            Self::Mstop => "mstop",
            Self::Test => "test",
        }
    }
}

/// Bivariate response, covariate columns and the partition assignment.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub y1: Vec<f64>,
    pub y2: Vec<f64>,
    /// column-major covariates: `x[j]` is the j-th covariate over all rows
    pub x: Vec<Vec<f64>>,
    pub x_names: Vec<String>,
    pub partition: Vec<Partition>,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.y1.len()
    }

    pub fn p(&self) -> usize {
        self.x.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 {
            return Err(Error::data("dataset has no rows"));
        }
        if self.y2.len() != n || self.partition.len() != n {
            return Err(Error::data("column lengths disagree"));
        }
        if self.x_names.len() != self.x.len() {
            return Err(Error::data("covariate names and columns disagree"));
        }
        for (j, col) in self.x.iter().enumerate() {
            if col.len() != n {
                return Err(Error::data(format!("covariate column {} has wrong length", j + 1)));
            }
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::data(format!(
                    "non-finite value in covariate {} at row {}",
                    self.x_names[j],
                    i + 1
                )));
            }
        }
        for (i, (a, b)) in self.y1.iter().zip(&self.y2).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::data(format!("non-finite response at row {}", i + 1)));
            }
        }
        Ok(())
    }

    pub fn rows_in(&self, part: Partition) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.partition[i] == part).collect()
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for p in &self.partition {
            match p {
                Partition::Train => c.0 += 1,
                Partition::Mstop => c.1 += 1,
                Partition::Test => c.2 += 1,
            }
        }
        c
    }
}
