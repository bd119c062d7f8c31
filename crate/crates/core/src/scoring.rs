//! Proper scoring rules, univariate evaluation metrics and selection-rate
//! aggregation across simulation replicates. All scores are oriented so
//! that lower is better, except AUC.

use crate::boosting::FittedModel;
use crate::data::{Dataset, Partition};
use crate::error::{Error, Result};
use crate::margins::Support;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Joint negative log-likelihood summed over the rows of one partition.
pub fn log_score(model: &FittedModel, data: &Dataset, part: Partition) -> Result<f64> {
    let pred = model.predict(&data.x, None)?;
    let mut acc = 0.0;
    for i in data.rows_in(part) {
        acc += model
            .spec
            .joint_nll(data.y1[i], data.y2[i], pred.eta_row(i))
            .map_err(|e| Error::data(format!("row {}: {e}", i + 1)))?;
    }
    Ok(acc)
}

/// Lazily extended CDF table for drawing count quantiles repeatedly at one
/// fixed parameter vector.
struct QuantileSampler<'a> {
    fam: crate::margins::MarginFamily,
    params: &'a [f64],
    cum: Vec<f64>,
}

impl<'a> QuantileSampler<'a> {
    fn new(fam: crate::margins::MarginFamily, params: &'a [f64]) -> Self {
        QuantileSampler { fam, params, cum: Vec::new() }
    }

    fn draw(&mut self, u: f64) -> Result<f64> {
        match self.fam.support() {
            Support::Real | Support::Binary => self.fam.quantile(u, self.params),
            Support::Count => {
                if self.cum.is_empty() {
                    self.cum.push(self.fam.pdf_unchecked(0.0, self.params));
                }
                while *self.cum.last().unwrap() < u {
                    let y = self.cum.len() as f64;
                    if y > 1e7 {
                        return Err(Error::numeric("quantile table exceeded the 1e7 cap"));
                    }
                    let last = *self.cum.last().unwrap();
                    self.cum.push(last + self.fam.pdf_unchecked(y, self.params));
                }
                let idx = self.cum.partition_point(|&c| c < u);
                Ok(idx as f64)
            }
        }
    }
}

/// Monte-Carlo energy score averaged over one partition's rows:
/// `ES(F, y) = (1/S) sum ||X_s - y|| - 1/(2 S^2) sum ||X_s - X_t||`
/// with `X_s` drawn from the fitted bivariate distribution of each row.
pub fn energy_score(
    model: &FittedModel,
    data: &Dataset,
    part: Partition,
    s_samples: usize,
    seed: u64,
) -> Result<f64> {
    if s_samples < 2 {
        return Err(Error::config("energy score needs at least 2 samples"));
    }
    let pred = model.predict(&data.x, None)?;
    let rows = data.rows_in(part);
    if rows.is_empty() {
        return Err(Error::data("empty partition for the energy score"));
    }
    let k1 = model.spec.k1();
    let k2 = model.spec.k2();
    let per_row: Result<Vec<f64>> = rows
        .par_iter()
        .map(|&i| -> Result<f64> {
            let theta = pred.theta_row(i);
            let th_c = theta[k1 + k2];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut q1 = QuantileSampler::new(model.spec.margin1.family, &theta[..k1]);
            let mut q2 = QuantileSampler::new(model.spec.margin2.family, &theta[k1..k1 + k2]);
            let mut xs = Vec::with_capacity(s_samples);
            for _ in 0..s_samples {
                let u: f64 = rng.random_range(1e-12..1.0 - 1e-12);
                let w: f64 = rng.random_range(1e-12..1.0 - 1e-12);
                let v = model.spec.copula.inverse_hfun(w, u, th_c)?;
                xs.push((q1.draw(u)?, q2.draw(v)?));
            }
            let y = (data.y1[i], data.y2[i]);
            let dist =
                |a: (f64, f64), b: (f64, f64)| ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
            let term1 = xs.iter().map(|&x| dist(x, y)).sum::<f64>() / s_samples as f64;
            let mut term2 = 0.0;
            for (a, &xa) in xs.iter().enumerate() {
                for &xb in xs.iter().skip(a + 1) {
                    term2 += dist(xa, xb);
                }
            }
            // the double sum over all ordered pairs is twice the upper triangle
            term2 /= (s_samples * s_samples) as f64;
            Ok(term1 - term2)
        })
        .collect();
    Ok(per_row?.iter().sum::<f64>() / rows.len() as f64)
}

/// Mean squared error of a binary probability forecast.
pub fn brier(model: &FittedModel, data: &Dataset, part: Partition, margin: usize) -> Result<f64> {
    let (probs, labels) = binary_margin_scores(model, data, part, margin)?;
    let n = labels.len() as f64;
    Ok(probs.iter().zip(&labels).map(|(p, y)| (p - y) * (p - y)).sum::<f64>() / n)
}

/// Area under the ROC curve (Mann-Whitney with midranks for ties).
pub fn auc(model: &FittedModel, data: &Dataset, part: Partition, margin: usize) -> Result<f64> {
    let (probs, labels) = binary_margin_scores(model, data, part, margin)?;
    auc_from_scores(&probs, &labels)
}

/// Mann-Whitney AUC on raw scores; ties get midranks.
pub fn auc_from_scores(scores: &[f64], labels: &[f64]) -> Result<f64> {
    let n_pos = labels.iter().filter(|&&y| y == 1.0).count();
    let n_neg = labels.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::data("AUC undefined: test margin has a single class"));
    }
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());
    let mut rank_sum_pos = 0.0;
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j < idx.len() && scores[idx[j]] == scores[idx[i]] {
            j += 1;
        }
        let midrank = (i + 1 + j) as f64 / 2.0;
        for &r in &idx[i..j] {
            if labels[r] == 1.0 {
                rank_sum_pos += midrank;
            }
        }
        i = j;
    }
    let n_pos_f = n_pos as f64;
    Ok((rank_sum_pos - n_pos_f * (n_pos_f + 1.0) / 2.0) / (n_pos_f * n_neg as f64))
}

/// Mean squared error of prediction with the fitted marginal mean as the
/// point forecast.
pub fn msep(model: &FittedModel, data: &Dataset, part: Partition, margin: usize) -> Result<f64> {
    let pred = model.predict(&data.x, None)?;
    let k1 = model.spec.k1();
    let rows = data.rows_in(part);
    let mut acc = 0.0;
    for &i in &rows {
        let theta = pred.theta_row(i);
        let (fam, params, y) = if margin == 1 {
            (model.spec.margin1.family, &theta[..k1], data.y1[i])
        } else {
            (model.spec.margin2.family, &theta[k1..k1 + model.spec.k2()], data.y2[i])
        };
        let yhat = fam.mean(params)?;
        acc += (yhat - y) * (yhat - y);
    }
    Ok(acc / rows.len() as f64)
}

fn binary_margin_scores(
    model: &FittedModel,
    data: &Dataset,
    part: Partition,
    margin: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (fam, y) = if margin == 1 {
        (model.spec.margin1.family, &data.y1)
    } else {
        (model.spec.margin2.family, &data.y2)
    };
    if fam.support() != Support::Binary {
        return Err(Error::config(format!("margin {margin} is not binary")));
    }
    let pred = model.predict(&data.x, None)?;
    let k1 = model.spec.k1();
    let rows = data.rows_in(part);
    let offset = if margin == 1 { 0 } else { k1 };
    let probs: Vec<f64> = rows.iter().map(|&i| pred.theta_row(i)[offset]).collect();
    let labels: Vec<f64> = rows.iter().map(|&i| y[i]).collect();
    Ok((probs, labels))
}

/// Everything the evaluation emits for one model on one test partition.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScoreReport {
    pub log_score: f64,
    pub energy_score: f64,
    pub brier1: Option<f64>,
    pub brier2: Option<f64>,
    pub auc1: Option<f64>,
    pub auc2: Option<f64>,
    pub msep1: Option<f64>,
    pub msep2: Option<f64>,
    pub n_test: usize,
    pub mc_samples: usize,
}

impl ScoreReport {
    pub fn rows(&self) -> Vec<(&'static str, f64)> {
        let mut out = vec![("log", self.log_score), ("energy", self.energy_score)];
        if let Some(v) = self.brier1 {
            out.push(("brier_y1", v));
        }
        if let Some(v) = self.brier2 {
            out.push(("brier_y2", v));
        }
        if let Some(v) = self.auc1 {
            out.push(("auc_y1", v));
        }
        if let Some(v) = self.auc2 {
            out.push(("auc_y2", v));
        }
        if let Some(v) = self.msep1 {
            out.push(("msep_y1", v));
        }
        if let Some(v) = self.msep2 {
            out.push(("msep_y2", v));
        }
        out
    }
}

/// Computes the full report for one partition: the joint log score, the
/// energy score and the applicable univariate metrics per margin.
pub fn score_report(
    model: &FittedModel,
    data: &Dataset,
    part: Partition,
    energy_samples: usize,
    seed: u64,
) -> Result<ScoreReport> {
    let n_test = data.rows_in(part).len();
    let binary1 = model.spec.margin1.family.support() == Support::Binary;
    let binary2 = model.spec.margin2.family.support() == Support::Binary;
    Ok(ScoreReport {
        log_score: log_score(model, data, part)?,
        energy_score: energy_score(model, data, part, energy_samples, seed)?,
        brier1: if binary1 { Some(brier(model, data, part, 1)?) } else { None },
        brier2: if binary2 { Some(brier(model, data, part, 2)?) } else { None },
        auc1: if binary1 { Some(auc(model, data, part, 1)?) } else { None },
        auc2: if binary2 { Some(auc(model, data, part, 2)?) } else { None },
        msep1: if binary1 { None } else { Some(msep(model, data, part, 1)?) },
        msep2: if binary2 { None } else { Some(msep(model, data, part, 2)?) },
        n_test,
        mc_samples: energy_samples,
    })
}

/// Selection rates across a replicate set, split per distribution
/// parameter into informative and non-informative covariates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SelectionRates {
    pub param_labels: Vec<String>,
    /// % of (informative covariate, replicate) pairs selected
    pub informative_pct: Vec<f64>,
    /// % of (non-informative covariate, replicate) pairs selected
    pub noninformative_pct: Vec<f64>,
    /// per parameter and covariate: % of replicates selecting it
    pub detail_pct: Vec<Vec<f64>>,
}

pub fn selection_rates(
    models: &[&FittedModel],
    informative: &[Vec<usize>],
    p: usize,
) -> Result<SelectionRates> {
    let first = models.first().ok_or_else(|| Error::data("no replicate models"))?;
    let k = first.spec.k_total();
    if informative.len() != k {
        return Err(Error::data("informative sets do not match the parameter count"));
    }
    for m in models {
        if m.spec != first.spec {
            return Err(Error::data("replicate models have mismatched specifications"));
        }
    }
    let n_rep = models.len() as f64;
    let mut detail = vec![vec![0.0f64; p]; k];
    for model in models {
        let selected = model.selected_covariates();
        for (param, set) in selected.iter().enumerate() {
            for &j in set {
                if j < p {
                    detail[param][j] += 100.0 / n_rep;
                }
            }
        }
    }
    let mut inf = Vec::with_capacity(k);
    let mut noninf = Vec::with_capacity(k);
    for param in 0..k {
        let inf_set = &informative[param];
        let (mut s_inf, mut n_inf, mut s_non, mut n_non) = (0.0, 0usize, 0.0, 0usize);
        for j in 0..p {
            if inf_set.contains(&j) {
                s_inf += detail[param][j];
                n_inf += 1;
            } else {
                s_non += detail[param][j];
                n_non += 1;
            }
        }
        inf.push(if n_inf > 0 { s_inf / n_inf as f64 } else { f64::NAN });
        noninf.push(if n_non > 0 { s_non / n_non as f64 } else { f64::NAN });
    }
    Ok(SelectionRates {
        param_labels: first.spec.param_labels(),
        informative_pct: inf,
        noninformative_pct: noninf,
        detail_pct: detail,
    })
}

/// Sample Kendall's tau (tau-b) computed in O(n log n) with Knight's
/// merge-sort inversion count; ties are handled by the usual tau-b
/// normalisation.
pub fn sample_kendall_tau(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let n = x.len();
    assert!(n >= 2, "kendall tau needs at least two observations");

    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b]).unwrap().then(y[a].partial_cmp(&y[b]).unwrap())
    });

    // tie counts in x, and joint ties in (x, y)
    let mut n1 = 0u64; // sum t(t-1)/2 over x-tie groups
    let mut n3 = 0u64; // sum over joint-tie groups
    {
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && x[idx[j]] == x[idx[i]] {
                j += 1;
            }
            let t = (j - i) as u64;
            n1 += t * (t - 1) / 2;
            let mut a = i;
            while a < j {
                let mut b = a + 1;
                while b < j && y[idx[b]] == y[idx[a]] {
                    b += 1;
                }
                let s = (b - a) as u64;
                n3 += s * (s - 1) / 2;
                a = b;
            }
            i = j;
        }
    }

    // discordant pairs = inversions of the y-sequence ordered by x
    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut ys, &mut buf);

    // tie counts in y
    let mut sorted_y: Vec<f64> = y.to_vec();
    sorted_y.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut n2 = 0u64;
    {
        let mut i = 0;
        while i < n {
            let mut j = i + 1;
            while j < n && sorted_y[j] == sorted_y[i] {
                j += 1;
            }
            let t = (j - i) as u64;
            n2 += t * (t - 1) / 2;
            i = j;
        }
    }

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    // concordant minus discordant
    let cmd = n0 as f64 - n1 as f64 - n2 as f64 + n3 as f64 - 2.0 * swaps as f64;
    let denom = ((n0 - n1) as f64 * (n0 - n2) as f64).sqrt();
    cmd / denom
}

fn merge_count(v: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = v.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = v.split_at_mut(mid);
    let mut inv = merge_count(left, &mut buf[..mid]) + merge_count(right, &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        // strict inversion only: equal values are ties, not discordances
        if right[j] < left[i] {
            inv += (left.len() - i) as u64;
            buf[k] = right[j];
            j += 1;
        } else {
            buf[k] = left[i];
            i += 1;
        }
        k += 1;
    }
    while i < left.len() {
        buf[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        buf[k] = right[j];
        j += 1;
        k += 1;
    }
    v.copy_from_slice(&buf[..n]);
    inv
}
