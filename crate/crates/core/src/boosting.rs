//! Non-cyclic component-wise gradient boosting for bivariate distributional
//! copula regression.
//!
//! Per iteration, the stabilized negative gradient of the joint loss is
//! computed for every distribution parameter, every candidate base-learner
//! is fitted to it by penalized least squares, the per-parameter best is
//! chosen by residual sum of squares, and only the single update with the
//! lowest resulting training risk across all parameters is applied (scaled
//! by the step length). The out-of-bag risk drives the choice of the
//! stopping iteration.

use crate::baselearners::{predict_at, BaseLearnerDef, Basis, LearnerWorkspace};
use crate::data::{Dataset, Partition};
use crate::error::{Error, Result};
use crate::likelihood::{stabilize, ModelSpec, Stabilization};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// How the predictor offsets are initialised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OffsetMode {
    /// intercept-only maximum likelihood per margin, zero for the copula
    Mle,
    /// all offsets at zero (benchmarks and convergence tests)
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostConfig {
    pub s_step: f64,
    pub m_stop: usize,
    pub stabilization: Stabilization,
    pub offset_mode: OffsetMode,
    /// recorded for provenance; the fit itself is deterministic
    pub seed: u64,
}

impl Default for BoostConfig {
    fn default() -> Self {
        BoostConfig {
            s_step: 0.1,
            m_stop: 1000,
            stabilization: Stabilization::L2,
            offset_mode: OffsetMode::Mle,
            seed: 0,
        }
    }
}

impl BoostConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.s_step > 0.0 && self.s_step < 1.0) {
            return Err(Error::config(format!("step length {} outside (0,1)", self.s_step)));
        }
        Ok(())
    }
}

/// Candidate base-learners per distribution parameter. An empty list pins
/// that parameter at its offset (used by the univariate benchmark for the
/// dependence parameter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerPlan {
    pub per_param: Vec<Vec<BaseLearnerDef>>,
}

/// One applied update: iteration, winning learner index and the coefficient
/// vector already scaled by the step length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleEntry {
    pub iteration: usize,
    pub learner: usize,
    pub scaled_coefs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub m_stop: usize,
    pub m_used: usize,
    pub final_train_risk: f64,
    pub final_oobag_risk: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub spec: ModelSpec,
    pub config: BoostConfig,
    pub plan: LearnerPlan,
    pub x_names: Vec<String>,
    pub offsets: Vec<f64>,
    /// frozen bases per (parameter, learner)
    pub bases: Vec<Vec<Basis>>,
    /// applied updates per parameter, in iteration order
    pub ensembles: Vec<Vec<EnsembleEntry>>,
    /// iterations actually applied (updates with iteration > m_used are absent)
    pub m_used: usize,
    pub trace_summary: TraceSummary,
}

/// Per-iteration record: selection, risks and every candidate's trial risk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: usize,
    pub selected_param: usize,
    pub selected_learner: usize,
    pub train_risk: f64,
    pub oobag_risk: f64,
    /// trial training risk of each parameter's best candidate (infinite for
    /// parameters without candidates)
    pub candidate_risks: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoostTrace {
    pub rows: Vec<TraceRow>,
}

/// Optimal stopping iteration: the argmin of the out-of-bag risk, smallest
/// iteration on ties. An empty trace gives 0 (offsets only).
pub fn tune_mstop(trace: &BoostTrace) -> usize {
    let mut best = 0usize;
    let mut best_risk = f64::INFINITY;
    for row in &trace.rows {
        if row.oobag_risk < best_risk {
            best_risk = row.oobag_risk;
            best = row.iteration;
        }
    }
    best
}

struct Workspaces {
    /// per (parameter, learner)
    per_param: Vec<Vec<LearnerWorkspace>>,
}

fn build_workspaces(
    spec: &ModelSpec,
    plan: &LearnerPlan,
    data: &Dataset,
    train_rows: &[usize],
) -> Result<Workspaces> {
    let zeros = vec![0.0; data.n()];
    let mut per_param = Vec::with_capacity(plan.per_param.len());
    for defs in &plan.per_param {
        let mut ws = Vec::with_capacity(defs.len());
        for def in defs {
            let col = match def.covariate {
                Some(j) => data.x.get(j).ok_or_else(|| {
                    Error::config(format!(
                        "learner references covariate {} but data has {}",
                        j + 1,
                        data.p()
                    ))
                })?,
                None => &zeros,
            };
            ws.push(LearnerWorkspace::build(def, col, train_rows)?);
        }
        per_param.push(ws);
    }
    if per_param.len() != spec.k_total() {
        return Err(Error::config(format!(
            "learner plan covers {} parameters, model has {}",
            per_param.len(),
            spec.k_total()
        )));
    }
    Ok(Workspaces { per_param })
}

fn offsets_for(spec: &ModelSpec, data: &Dataset, rows: &[usize], mode: OffsetMode) -> Result<Vec<f64>> {
    let k = spec.k_total();
    match mode {
        OffsetMode::Zero => Ok(vec![0.0; k]),
        OffsetMode::Mle => {
            let y1: Vec<f64> = rows.iter().map(|&i| data.y1[i]).collect();
            let y2: Vec<f64> = rows.iter().map(|&i| data.y2[i]).collect();
            let mut off = spec.margin1.offset(&y1)?;
            off.extend(spec.margin2.offset(&y2)?);
            off.push(0.0); // dependence starts at the link origin
            Ok(off)
        }
    }
}

/// Fits the model: Algorithm steps (1)-(4) for `m_stop` iterations.
pub fn fit(
    spec: &ModelSpec,
    data: &Dataset,
    plan: &LearnerPlan,
    config: &BoostConfig,
) -> Result<(FittedModel, BoostTrace)> {
    config.validate()?;
    spec.validate()?;
    data.validate()?;
    for i in 0..data.n() {
        spec.check_responses(data.y1[i], data.y2[i])
            .map_err(|e| Error::data(format!("row {}: {e}", i + 1)))?;
    }
    let k = spec.k_total();
    let train_rows = data.rows_in(Partition::Train);
    let oobag_rows = data.rows_in(Partition::Mstop);
    if train_rows.is_empty() {
        return Err(Error::data("no training rows in the partition"));
    }
    if plan.per_param.len() != k {
        return Err(Error::config(format!(
            "learner plan covers {} parameters, model has {k}",
            plan.per_param.len()
        )));
    }

    let ws = build_workspaces(spec, plan, data, &train_rows)?;
    let offsets = offsets_for(spec, data, &train_rows, config.offset_mode)?;

    let n = data.n();
    // row-major predictor state eta[i*k + j]
    let mut eta: Vec<f64> = Vec::with_capacity(n * k);
    for _ in 0..n {
        eta.extend_from_slice(&offsets);
    }

    let risk_over = |eta: &[f64], rows: &[usize]| -> Result<f64> {
        let vals: Result<Vec<f64>> = rows
            .par_iter()
            .map(|&i| spec.joint_nll(data.y1[i], data.y2[i], &eta[i * k..(i + 1) * k]))
            .collect();
        // fixed-order reduction for bit-stable risks
        Ok(vals?.iter().sum())
    };

    let mut ensembles: Vec<Vec<EnsembleEntry>> = vec![Vec::new(); k];
    let mut trace = BoostTrace::default();
    let s = config.s_step;

    for m in 1..=config.m_stop {
        // (a) negative gradients on the training rows, all parameters at once
        let grads: Result<Vec<Vec<f64>>> = train_rows
            .par_iter()
            .map(|&i| {
                spec.nll_gradient(data.y1[i], data.y2[i], &eta[i * k..(i + 1) * k])
                    .map(|g| g.iter().map(|v| -v).collect())
            })
            .collect();
        let grads = grads.map_err(|e| {
            Error::numeric(format!("iteration {m}: gradient evaluation failed: {e}"))
        })?;

        // per parameter: stabilize, fit candidates, select by rss, trial risk
        let candidates: Vec<Option<(usize, Vec<f64>, f64)>> = (0..k)
            .into_par_iter()
            .map(|param| -> Result<Option<(usize, Vec<f64>, f64)>> {
                if ws.per_param[param].is_empty() {
                    return Ok(None);
                }
                let mut target = vec![0.0; n];
                let mut column: Vec<f64> = grads.iter().map(|g| g[param]).collect();
                stabilize(&mut column, config.stabilization);
                for (pos, &i) in train_rows.iter().enumerate() {
                    target[i] = column[pos];
                }
                // (b)-(c) best-fitting base-learner by rss, lowest index wins ties
                let mut best: Option<(usize, Vec<f64>, f64)> = None;
                for (r, lws) in ws.per_param[param].iter().enumerate() {
                    let (coefs, rss) = lws.fit(&target);
                    if best.as_ref().map_or(true, |b| rss < b.2) {
                        best = Some((r, coefs, rss));
                    }
                }
                let (r, coefs, _) = best.unwrap();
                // (d) trial training risk of the weak update
                let scaled: Vec<f64> = coefs.iter().map(|c| c * s).collect();
                let lws = &ws.per_param[param][r];
                let upd = lws.predict_all(&scaled);
                let vals: Result<Vec<f64>> = train_rows
                    .iter()
                    .map(|&i| {
                        let mut row = [0.0f64; 8];
                        row[..k].copy_from_slice(&eta[i * k..(i + 1) * k]);
                        row[param] += upd[i];
                        spec.joint_nll(data.y1[i], data.y2[i], &row[..k])
                    })
                    .collect();
                let risk = vals?.iter().sum::<f64>();
                Ok(Some((r, scaled, risk)))
            })
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::numeric(format!("iteration {m}: {e}")))?;

        // (2) apply only the update with the lowest trial risk
        let candidate_risks: Vec<f64> =
            candidates.iter().map(|c| c.as_ref().map_or(f64::INFINITY, |c| c.2)).collect();
        let best_param = candidate_risks
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .map(|(i, _)| i)
            .unwrap();
        let (learner, scaled, train_risk) = candidates[best_param].clone().ok_or_else(|| {
            Error::config("no parameter has any candidate base-learner".to_string())
        })?;
        if !train_risk.is_finite() {
            return Err(Error::numeric(format!(
                "iteration {m}: non-finite training risk for parameter {best_param}"
            )));
        }
        let upd = ws.per_param[best_param][learner].predict_all(&scaled);
        for i in 0..n {
            eta[i * k + best_param] += upd[i];
        }
        ensembles[best_param].push(EnsembleEntry {
            iteration: m,
            learner,
            scaled_coefs: scaled,
        });

        // (4) out-of-bag risk at the updated state
        let oobag_risk = risk_over(&eta, &oobag_rows)
            .map_err(|e| Error::numeric(format!("iteration {m}: oobag risk failed: {e}")))?;
        if !oobag_risk.is_finite() {
            return Err(Error::numeric(format!("iteration {m}: non-finite oobag risk")));
        }
        trace.rows.push(TraceRow {
            iteration: m,
            selected_param: best_param,
            selected_learner: learner,
            train_risk,
            oobag_risk,
            candidate_risks,
        });
    }

    let bases: Vec<Vec<Basis>> =
        ws.per_param.iter().map(|v| v.iter().map(|l| l.basis.clone()).collect()).collect();
    let summary = TraceSummary {
        m_stop: config.m_stop,
        m_used: config.m_stop,
        final_train_risk: trace.rows.last().map_or(f64::NAN, |r| r.train_risk),
        final_oobag_risk: trace.rows.last().map_or(f64::NAN, |r| r.oobag_risk),
    };
    let model = FittedModel {
        spec: spec.clone(),
        config: *config,
        plan: plan.clone(),
        x_names: data.x_names.clone(),
        offsets,
        bases,
        ensembles,
        m_used: config.m_stop,
        trace_summary: summary,
    };
    Ok((model, trace))
}

/// Predictor and parameter values for a set of rows.
#[derive(Debug, Clone)]
pub struct Predictions {
    pub k: usize,
    /// row-major, `eta[i*k + j]`
    pub eta: Vec<f64>,
    /// row-major distribution parameters after the response functions
    pub theta: Vec<f64>,
}

impl Predictions {
    pub fn eta_row(&self, i: usize) -> &[f64] {
        &self.eta[i * self.k..(i + 1) * self.k]
    }

    pub fn theta_row(&self, i: usize) -> &[f64] {
        &self.theta[i * self.k..(i + 1) * self.k]
    }

    pub fn n(&self) -> usize {
        self.eta.len() / self.k
    }
}

impl FittedModel {
    /// Replays the ensemble up to `at_iteration` (default: every applied
    /// update) on new covariate columns.
    pub fn predict(&self, x: &[Vec<f64>], at_iteration: Option<usize>) -> Result<Predictions> {
        let k = self.spec.k_total();
        let upto = at_iteration.unwrap_or(self.m_used);
        let n = x.first().map_or(0, |c| c.len());
        for (param, entries) in self.ensembles.iter().enumerate() {
            for e in entries.iter().filter(|e| e.iteration <= upto) {
                if let Some(j) = self.plan.per_param[param][e.learner].covariate {
                    if j >= x.len() {
                        return Err(Error::data(format!(
                            "prediction data misses covariate column {}",
                            j + 1
                        )));
                    }
                    if x[j].len() != n {
                        return Err(Error::data("covariate columns of unequal length"));
                    }
                }
            }
        }
        let mut eta = Vec::with_capacity(n * k);
        for _ in 0..n {
            eta.extend_from_slice(&self.offsets);
        }
        for (param, entries) in self.ensembles.iter().enumerate() {
            for e in entries.iter().filter(|e| e.iteration <= upto) {
                let basis = &self.bases[param][e.learner];
                let def = &self.plan.per_param[param][e.learner];
                match def.covariate {
                    Some(j) => {
                        for i in 0..n {
                            eta[i * k + param] += predict_at(basis, &e.scaled_coefs, x[j][i]);
                        }
                    }
                    None => {
                        for i in 0..n {
                            eta[i * k + param] += predict_at(basis, &e.scaled_coefs, 0.0);
                        }
                    }
                }
            }
        }
        let mut theta = Vec::with_capacity(n * k);
        for i in 0..n {
            theta.extend(self.spec.theta_from_eta(&eta[i * k..(i + 1) * k]));
        }
        Ok(Predictions { k, eta, theta })
    }

    /// Drops every update beyond iteration `m`.
    pub fn truncated(&self, m: usize) -> FittedModel {
        let mut out = self.clone();
        for entries in &mut out.ensembles {
            entries.retain(|e| e.iteration <= m);
        }
        out.m_used = m.min(self.m_used);
        out.trace_summary.m_used = out.m_used;
        out
    }

    /// Aggregated coefficient vectors per (parameter, learner): the sum of
    /// all applied scaled updates.
    pub fn aggregated_coefs(&self) -> Vec<Vec<Vec<f64>>> {
        let mut agg: Vec<Vec<Vec<f64>>> = self
            .bases
            .iter()
            .map(|bs| bs.iter().map(|b| vec![0.0; b.dim()]).collect())
            .collect();
        for (param, entries) in self.ensembles.iter().enumerate() {
            for e in entries {
                let acc = &mut agg[param][e.learner];
                for (a, c) in acc.iter_mut().zip(&e.scaled_coefs) {
                    *a += c;
                }
            }
        }
        agg
    }

    /// Aggregated effect of one (parameter, learner) evaluated at `x`.
    pub fn effect_at(&self, param: usize, learner: usize, x: f64) -> f64 {
        let agg = {
            let mut acc = vec![0.0; self.bases[param][learner].dim()];
            for e in self.ensembles[param].iter().filter(|e| e.learner == learner) {
                for (a, c) in acc.iter_mut().zip(&e.scaled_coefs) {
                    *a += c;
                }
            }
            acc
        };
        predict_at(&self.bases[param][learner], &agg, x)
    }

    /// Update counts per (parameter, learner).
    pub fn update_counts(&self) -> Vec<Vec<usize>> {
        let mut counts: Vec<Vec<usize>> =
            self.plan.per_param.iter().map(|defs| vec![0; defs.len()]).collect();
        for (param, entries) in self.ensembles.iter().enumerate() {
            for e in entries {
                counts[param][e.learner] += 1;
            }
        }
        counts
    }

    /// Covariates with at least one applied update, per parameter.
    pub fn selected_covariates(&self) -> Vec<std::collections::BTreeSet<usize>> {
        let counts = self.update_counts();
        let mut out = Vec::with_capacity(counts.len());
        for (param, defs) in self.plan.per_param.iter().enumerate() {
            let mut set = std::collections::BTreeSet::new();
            for (r, def) in defs.iter().enumerate() {
                if counts[param][r] > 0 {
                    if let Some(j) = def.covariate {
                        set.insert(j);
                    }
                }
            }
            out.push(set);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copulas::{CopulaFamily, CopulaSpec, Rotation};
    use crate::link::Link;
    use crate::margins::{MarginFamily, MarginSpec};
    use crate::likelihood::PairKind;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn gaussian_pair_spec() -> ModelSpec {
        ModelSpec::new(
            PairKind::CountCount,
            MarginSpec::with_default_links(MarginFamily::Poisson),
            MarginSpec::with_default_links(MarginFamily::Poisson),
            CopulaSpec::new(CopulaFamily::Independence, Rotation::R0),
        )
        .unwrap()
    }

    fn toy_binary_data(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x1: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x2: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut y1 = Vec::with_capacity(n);
        let mut y2 = Vec::with_capacity(n);
        for i in 0..n {
            let p1 = Link::Logit.response(1.5 * x1[i]);
            let p2 = Link::Logit.response(-1.2 * x2[i]);
            y1.push(f64::from(rng.random::<f64>() < p1));
            y2.push(f64::from(rng.random::<f64>() < p2));
        }
        let partition = (0..n)
            .map(|i| if i % 3 == 2 { Partition::Mstop } else { Partition::Train })
            .collect();
        Dataset {
            y1,
            y2,
            x: vec![x1, x2],
            x_names: vec!["x1".into(), "x2".into()],
            partition,
        }
    }

    fn binary_spec() -> ModelSpec {
        ModelSpec::new(
            PairKind::BinaryBinary,
            MarginSpec::new(MarginFamily::Bernoulli, vec![Link::Logit]).unwrap(),
            MarginSpec::new(MarginFamily::Bernoulli, vec![Link::Logit]).unwrap(),
            CopulaSpec::new(CopulaFamily::Gauss, Rotation::R0),
        )
        .unwrap()
    }

    fn linear_plan(k: usize, p: usize) -> LearnerPlan {
        LearnerPlan {
            per_param: (0..k)
                .map(|_| (0..p).map(BaseLearnerDef::linear).collect())
                .collect(),
        }
    }

    #[test]
    fn mstop_zero_returns_offsets() {
        let data = toy_binary_data(120, 1);
        let spec = binary_spec();
        let config = BoostConfig { m_stop: 0, ..Default::default() };
        let (model, trace) = fit(&spec, &data, &linear_plan(3, 2), &config).unwrap();
        assert!(trace.rows.is_empty());
        let pred = model.predict(&data.x, None).unwrap();
        for i in 0..data.n() {
            for j in 0..3 {
                assert_eq!(pred.eta_row(i)[j], model.offsets[j]);
            }
        }
    }

    #[test]
    fn intercept_only_boosting_reaches_mle() {
        // Gaussian margins under an independence copula, offsets disabled:
        // 2000 intercept updates must recover the closed-form MLE
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 400;
        let y1: Vec<f64> = (0..n).map(|_| (rng.random_range(0..7)) as f64).collect();
        let y2: Vec<f64> = (0..n).map(|_| (rng.random_range(0..5)) as f64).collect();
        let data = Dataset {
            y1: y1.clone(),
            y2,
            x: vec![vec![0.0; n]],
            x_names: vec!["x1".into()],
            partition: vec![Partition::Train; n],
        };
        let spec = gaussian_pair_spec();
        let plan = LearnerPlan {
            per_param: (0..3).map(|_| vec![BaseLearnerDef::intercept()]).collect(),
        };
        let config = BoostConfig {
            m_stop: 2000,
            offset_mode: OffsetMode::Zero,
            ..Default::default()
        };
        let (model, _) = fit(&spec, &data, &plan, &config).unwrap();
        let pred = model.predict(&data.x, None).unwrap();
        let mean1 = y1.iter().sum::<f64>() / n as f64;
        // Poisson intercept MLE on the log scale
        assert!(
            (pred.eta_row(0)[0] - mean1.ln()).abs() < 1e-4,
            "{} vs {}",
            pred.eta_row(0)[0],
            mean1.ln()
        );
    }

    #[test]
    fn engine_invariants_hold() {
        let data = toy_binary_data(240, 3);
        let spec = binary_spec();
        let config = BoostConfig { m_stop: 60, ..Default::default() };
        let (model, trace) = fit(&spec, &data, &linear_plan(3, 2), &config).unwrap();

        // exactly one update per iteration, counts add up
        assert_eq!(trace.rows.len(), 60);
        let counts = model.update_counts();
        let total: usize = counts.iter().flatten().sum();
        assert_eq!(total, 60);

        for row in &trace.rows {
            // the executed update is the argmin over candidate risks
            let min = row
                .candidate_risks
                .iter()
                .cloned()
                .fold(f64::INFINITY, f64::min);
            assert_eq!(row.candidate_risks[row.selected_param], min);
            assert!(row.train_risk.is_finite() && row.oobag_risk.is_finite());
        }

        // training risk is nonincreasing under greedy updates
        for w in trace.rows.windows(2) {
            assert!(w[1].train_risk <= w[0].train_risk + 1e-9);
        }
    }

    #[test]
    fn deterministic_and_truncation_equals_refit() {
        let data = toy_binary_data(150, 9);
        let spec = binary_spec();
        let config = BoostConfig { m_stop: 40, ..Default::default() };
        let plan = linear_plan(3, 2);
        let (m1, t1) = fit(&spec, &data, &plan, &config).unwrap();
        let (m2, t2) = fit(&spec, &data, &plan, &config).unwrap();
        assert_eq!(serde_json::to_string(&m1).unwrap(), serde_json::to_string(&m2).unwrap());
        assert_eq!(serde_json::to_string(&t1).unwrap(), serde_json::to_string(&t2).unwrap());

        // truncation at m equals a refit with m_stop = m
        let short_config = BoostConfig { m_stop: 25, ..config };
        let (m_short, _) = fit(&spec, &data, &plan, &short_config).unwrap();
        let truncated = m1.truncated(25);
        let pa = truncated.predict(&data.x, None).unwrap();
        let pb = m_short.predict(&data.x, None).unwrap();
        assert_eq!(pa.eta, pb.eta);

        // predict with at_iteration matches the truncated model
        let pc = m1.predict(&data.x, Some(25)).unwrap();
        assert_eq!(pa.eta, pc.eta);
    }

    #[test]
    fn ensemble_and_aggregate_predictions_agree() {
        let data = toy_binary_data(200, 4);
        let spec = binary_spec();
        let config = BoostConfig { m_stop: 80, ..Default::default() };
        let (model, _) = fit(&spec, &data, &linear_plan(3, 2), &config).unwrap();
        let pred = model.predict(&data.x, None).unwrap();
        let agg = model.aggregated_coefs();
        for i in 0..data.n() {
            for param in 0..3 {
                let mut eta = model.offsets[param];
                for (r, coefs) in agg[param].iter().enumerate() {
                    let x = model.plan.per_param[param][r]
                        .covariate
                        .map_or(0.0, |j| data.x[j][i]);
                    eta += predict_at(&model.bases[param][r], coefs, x);
                }
                assert!(
                    (eta - pred.eta_row(i)[param]).abs() < 1e-12,
                    "row {i} param {param}"
                );
            }
        }
        // predicted parameters respect their ranges
        for i in 0..data.n() {
            let th = pred.theta_row(i);
            assert!(th[0] > 0.0 && th[0] < 1.0);
            assert!(th[1] > 0.0 && th[1] < 1.0);
            assert!(th[2] > -1.0 && th[2] < 1.0);
        }
    }

    #[test]
    fn informative_covariates_get_selected() {
        let data = toy_binary_data(400, 5);
        let spec = binary_spec();
        let config = BoostConfig { m_stop: 150, ..Default::default() };
        let (model, trace) = fit(&spec, &data, &linear_plan(3, 2), &config).unwrap();
        let m_opt = tune_mstop(&trace);
        let selected = model.truncated(m_opt).selected_covariates();
        assert!(selected[0].contains(&0), "margin1 should pick x1");
        assert!(selected[1].contains(&1), "margin2 should pick x2");
    }

    #[test]
    fn tune_mstop_argmin_rules() {
        let mk = |risks: &[f64]| BoostTrace {
            rows: risks
                .iter()
                .enumerate()
                .map(|(i, &r)| TraceRow {
                    iteration: i + 1,
                    selected_param: 0,
                    selected_learner: 0,
                    train_risk: 0.0,
                    oobag_risk: r,
                    candidate_risks: vec![0.0],
                })
                .collect(),
        };
        // strictly decreasing risk: stop at the last iteration
        let dec: Vec<f64> = (0..200).map(|i| 100.0 - i as f64 * 0.1).collect();
        assert_eq!(tune_mstop(&mk(&dec)), 200);
        // V-shaped curve with the minimum at 137
        let v: Vec<f64> = (1..=300)
            .map(|m| (m as f64 - 137.0).abs() + 5.0)
            .collect();
        assert_eq!(tune_mstop(&mk(&v)), 137);
        // ties resolve to the smallest iteration
        assert_eq!(tune_mstop(&mk(&[3.0, 2.0, 2.0, 4.0])), 2);
        assert_eq!(tune_mstop(&BoostTrace::default()), 0);
    }

    #[test]
    fn empty_candidate_lists_pin_parameters() {
        let data = toy_binary_data(150, 11);
        let spec = ModelSpec::new(
            PairKind::BinaryBinary,
            MarginSpec::new(MarginFamily::Bernoulli, vec![Link::Logit]).unwrap(),
            MarginSpec::new(MarginFamily::Bernoulli, vec![Link::Logit]).unwrap(),
            CopulaSpec::new(CopulaFamily::Independence, Rotation::R0),
        )
        .unwrap();
        let plan = LearnerPlan {
            per_param: vec![
                vec![BaseLearnerDef::linear(0), BaseLearnerDef::linear(1)],
                vec![BaseLearnerDef::linear(0), BaseLearnerDef::linear(1)],
                vec![],
            ],
        };
        let config = BoostConfig { m_stop: 30, ..Default::default() };
        let (model, trace) = fit(&spec, &data, &plan, &config).unwrap();
        assert!(trace.rows.iter().all(|r| r.selected_param != 2));
        assert!(model.ensembles[2].is_empty());
        let pred = model.predict(&data.x, None).unwrap();
        assert!(pred.eta.iter().skip(2).step_by(3).all(|&e| e == 0.0));
    }

    #[test]
    fn error_paths() {
        let data = toy_binary_data(60, 13);
        let spec = binary_spec();
        // plan with wrong parameter count
        let bad = LearnerPlan { per_param: vec![vec![BaseLearnerDef::linear(0)]; 2] };
        assert!(fit(&spec, &data, &bad, &BoostConfig::default()).is_err());
        // covariate index out of range
        let bad = LearnerPlan { per_param: vec![vec![BaseLearnerDef::linear(7)]; 3] };
        assert!(fit(&spec, &data, &bad, &BoostConfig::default()).is_err());
        // bad step length
        let config = BoostConfig { s_step: 1.5, ..Default::default() };
        assert!(fit(&spec, &data, &linear_plan(3, 2), &config).is_err());
        // missing covariate at prediction time
        let (model, _) = fit(
            &spec,
            &data,
            &linear_plan(3, 2),
            &BoostConfig { m_stop: 10, ..Default::default() },
        )
        .unwrap();
        assert!(model.predict(&data.x[..1].to_vec(), None).is_err());
    }
}
