//! Implementations of the CLI subcommands.

use crate::config::{load_config, LoadedConfig, RunConfig};
use crate::csvio;
use crate::modelfile::{training_scales, ModelFile, MODEL_FORMAT_VERSION};
use copboost::baselearners::BaseLearnerDef;
use copboost::boosting::{fit, tune_mstop, FittedModel, LearnerPlan};
use copboost::data::{Dataset, Partition};
use copboost::error::{Error, Result};
use copboost::likelihood::PairKind;
use copboost::scoring::{score_report, selection_rates, ScoreReport};
use copboost::simulate::simulate;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Writes the simulated data CSV and its companion truth CSV
/// (`<out>.truth.csv`).
pub fn cmd_simulate(config: &Path, out: &Path, seed: Option<u64>) -> Result<()> {
    let loaded = load_config(config)?;
    let dgp = loaded.config.dgp_spec(seed)?;
    let (data, truth) = simulate(&dgp)?;
    csvio::write_file(out, &csvio::dataset_to_csv(&data))?;
    let truth_path = truth_path_for(out);
    csvio::write_file(&truth_path, &csvio::truth_to_csv(&truth, &data.x_names))?;
    let (n_train, n_mstop, n_test) = data.counts();
    println!(
        "simulated {} ({} rows: {n_train} train / {n_mstop} mstop / {n_test} test, p = {}) -> {}",
        dgp.preset.name(),
        data.n(),
        dgp.p,
        out.display()
    );
    Ok(())
}

pub fn truth_path_for(data_out: &Path) -> PathBuf {
    let mut name = data_out.file_stem().unwrap_or_default().to_os_string();
    name.push(".truth.csv");
    data_out.with_file_name(name)
}

/// Candidate base-learner plan from the configuration: one learner per
/// covariate per parameter, none for the dependence parameter in
/// univariate-benchmark mode.
pub fn build_plan(config: &RunConfig, data: &Dataset, k: usize) -> Result<LearnerPlan> {
    let l = &config.learners;
    let mut candidates = Vec::with_capacity(data.p());
    for (j, name) in data.x_names.iter().enumerate() {
        let def = if l.categorical.contains(name) {
            BaseLearnerDef::categorical(j, l.df_smooth)
        } else {
            match l.default_kind.as_str() {
                "linear" => {
                    let mut d = BaseLearnerDef::linear(j);
                    d.df_target = l.df_linear;
                    d
                }
                "pspline" => BaseLearnerDef::pspline(j, config.pspline_config(), l.df_smooth),
                other => {
                    return Err(Error::config(format!("unknown learner kind '{other}'")))
                }
            }
        };
        candidates.push(def);
    }
    let mut per_param = vec![candidates; k];
    if config.univariate() {
        per_param[k - 1] = Vec::new();
    }
    Ok(LearnerPlan { per_param })
}

/// Swaps the response columns of a mixed pair if the user supplied them in
/// (continuous, binary) order; the binary component is margin 1.
fn orient_mixed_responses(data: &mut Dataset, kind: PairKind) {
    if kind != PairKind::BinaryContinuous {
        return;
    }
    let is_binary = |v: &[f64]| v.iter().all(|&y| y == 0.0 || y == 1.0);
    if !is_binary(&data.y1) && is_binary(&data.y2) {
        log::warn!("responses arrive as (continuous, binary); swapping so the binary margin is y1");
        std::mem::swap(&mut data.y1, &mut data.y2);
    }
}

pub struct FitOutput {
    pub model_file: ModelFile,
    pub m_opt: usize,
    pub final_train_risk: f64,
    pub final_oobag_risk: f64,
}

/// Library-level fit used by both the CLI and the test suites.
pub fn run_fit(loaded: &LoadedConfig, mut data: Dataset, seed: Option<u64>) -> Result<(FitOutput, copboost::boosting::BoostTrace)> {
    let config = &loaded.config;
    let spec = config.model_spec()?;
    orient_mixed_responses(&mut data, spec.pair_kind);
    let plan = build_plan(config, &data, spec.k_total())?;
    let boost = config.boost_config(seed)?;

    let standardize = if config.learners.standardize {
        let scales = training_scales(&data.x, &data.rows_in(Partition::Train));
        for (col, s) in data.x.iter_mut().zip(&scales) {
            for v in col.iter_mut() {
                *v = (*v - s.mean) / s.sd;
            }
        }
        Some(scales)
    } else {
        None
    };

    let (model, trace) = fit(&spec, &data, &plan, &boost)?;
    let m_opt = tune_mstop(&trace);
    let final_model = if config.boost.write_at == "final" {
        model
    } else {
        model.truncated(m_opt)
    };
    let out = FitOutput {
        final_train_risk: trace.rows.last().map_or(f64::NAN, |r| r.train_risk),
        final_oobag_risk: trace.rows.last().map_or(f64::NAN, |r| r.oobag_risk),
        m_opt,
        model_file: ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            config_hash: loaded.hash.clone(),
            seed: boost.seed,
            m_opt,
            standardize,
            model: final_model,
        },
    };
    Ok((out, trace))
}

pub fn cmd_fit(
    config: &Path,
    data_path: &Path,
    out: &Path,
    trace_path: Option<&Path>,
    seed: Option<u64>,
) -> Result<()> {
    let loaded = load_config(config)?;
    let data = csvio::dataset_from_csv(&csvio::read_file(data_path)?)?;
    let (result, trace) = run_fit(&loaded, data, seed)?;
    result.model_file.save(out)?;
    let default_trace = out.with_extension("trace.csv");
    let trace_path = trace_path.unwrap_or(&default_trace);
    let labels = result.model_file.model.spec.param_labels();
    csvio::write_file(trace_path, &csvio::trace_to_csv(&trace, &labels))?;
    println!(
        "fit {} iterations (m_opt = {}, train risk {:.6}, oobag risk {:.6}) -> {}",
        result.model_file.model.trace_summary.m_stop,
        result.m_opt,
        result.final_train_risk,
        result.final_oobag_risk,
        out.display()
    );
    Ok(())
}

/// Reads a trace CSV and prints the oobag-optimal iteration.
pub fn cmd_tune(trace_path: &Path) -> Result<usize> {
    let rows = csvio::oobag_from_trace_csv(&csvio::read_file(trace_path)?)?;
    if rows.is_empty() {
        return Err(Error::data("trace file has no iterations"));
    }
    let mut best = rows[0];
    for &(it, risk) in &rows[1..] {
        if risk < best.1 {
            best = (it, risk);
        }
    }
    println!("{}", best.0);
    Ok(best.0)
}

/// Reorders the data's covariate columns to the model's layout.
fn columns_for_model(model: &FittedModel, data: &Dataset) -> Result<Vec<Vec<f64>>> {
    model
        .x_names
        .iter()
        .map(|name| {
            data.x_names
                .iter()
                .position(|n| n == name)
                .map(|j| data.x[j].clone())
                .ok_or_else(|| Error::data(format!("data misses covariate column '{name}'")))
        })
        .collect()
}

pub fn cmd_predict(
    model_path: &Path,
    data_path: &Path,
    out: &Path,
    at_iteration: Option<usize>,
) -> Result<()> {
    let mf = ModelFile::load(model_path)?;
    let mut data = csvio::dataset_from_csv(&csvio::read_file(data_path)?)?;
    orient_mixed_responses(&mut data, mf.model.spec.pair_kind);
    let x = mf.scale_columns(&columns_for_model(&mf.model, &data)?);
    let pred = mf.model.predict(&x, at_iteration)?;
    let labels = mf.model.spec.param_labels();
    let mut outbuf = String::from("row");
    for l in &labels {
        let _ = write!(outbuf, ",eta_{l}");
    }
    for l in &labels {
        let _ = write!(outbuf, ",theta_{l}");
    }
    outbuf.push('\n');
    for i in 0..pred.n() {
        let _ = write!(outbuf, "{}", i + 1);
        for v in pred.eta_row(i) {
            let _ = write!(outbuf, ",{v}");
        }
        for v in pred.theta_row(i) {
            let _ = write!(outbuf, ",{v}");
        }
        outbuf.push('\n');
    }
    csvio::write_file(out, &outbuf)?;
    println!("predicted {} rows -> {}", pred.n(), out.display());
    Ok(())
}

pub fn score_to_csv(report: &ScoreReport, config_hash: &str) -> String {
    let mut out = String::from("metric,value\n");
    for (name, value) in report.rows() {
        let _ = writeln!(out, "{name},{value}");
    }
    let _ = writeln!(out, "n_test,{}", report.n_test);
    let _ = writeln!(out, "mc_samples,{}", report.mc_samples);
    let _ = writeln!(out, "config_hash,{config_hash}");
    out
}

pub fn cmd_score(
    config: Option<&Path>,
    model_path: &Path,
    data_path: &Path,
    out: &Path,
    partition: Option<&str>,
    seed: Option<u64>,
) -> Result<()> {
    let score_cfg = match config {
        Some(p) => load_config(p)?.config.score,
        None => Default::default(),
    };
    let mf = ModelFile::load(model_path)?;
    let mut data = csvio::dataset_from_csv(&csvio::read_file(data_path)?)?;
    orient_mixed_responses(&mut data, mf.model.spec.pair_kind);
    let part = match partition {
        None => Partition::Test,
        Some(p) => Partition::parse(p)?,
    };
    // evaluate in the model's covariate layout and scaling
    let x = mf.scale_columns(&columns_for_model(&mf.model, &data)?);
    let eval_data = Dataset {
        y1: data.y1.clone(),
        y2: data.y2.clone(),
        x,
        x_names: mf.model.x_names.clone(),
        partition: data.partition.clone(),
    };
    let report = score_report(
        &mf.model,
        &eval_data,
        part,
        score_cfg.energy_samples,
        seed.unwrap_or(score_cfg.seed),
    )?;
    csvio::write_file(out, &score_to_csv(&report, &mf.config_hash))?;
    for (name, value) in report.rows() {
        println!("{name:>10}: {value:.6}");
    }
    Ok(())
}

fn parse_score_csv(text: &str) -> Result<Vec<(String, f64)>> {
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        if line.is_empty() {
            continue;
        }
        let (name, value) = line
            .split_once(',')
            .ok_or_else(|| Error::data("malformed score file"))?;
        if name == "config_hash" {
            continue;
        }
        let v: f64 =
            value.parse().map_err(|_| Error::data(format!("bad score value '{value}'")))?;
        out.push((name.to_string(), v));
    }
    Ok(out)
}

/// Aggregates replicate directories into score-summary and selection-rate
/// tables. Each replicate directory holds `score_<model>.csv`,
/// `model_<model>.json` (model in {copula, univariate}) and `truth.csv`.
pub fn cmd_report(dir: &Path, out_dir: &Path) -> Result<()> {
    let mut reps: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    reps.sort();
    if reps.is_empty() {
        return Err(Error::data(format!("no replicate directories in {}", dir.display())));
    }

    let mut scores: Vec<(String, String, f64)> = Vec::new(); // (model, metric, value)
    let mut models: std::collections::BTreeMap<String, Vec<ModelFile>> = Default::default();
    for rep in &reps {
        for kind in ["copula", "univariate"] {
            let score_path = rep.join(format!("score_{kind}.csv"));
            if score_path.exists() {
                for (metric, value) in parse_score_csv(&csvio::read_file(&score_path)?)? {
                    scores.push((kind.to_string(), metric, value));
                }
            }
            let model_path = rep.join(format!("model_{kind}.json"));
            if model_path.exists() {
                models.entry(kind.to_string()).or_default().push(ModelFile::load(&model_path)?);
            }
        }
    }
    if scores.is_empty() {
        return Err(Error::data("no score files found in the replicate directories"));
    }

    // mean and standard deviation per (model, metric), in first-seen order
    let mut order: Vec<(String, String)> = Vec::new();
    let mut groups: std::collections::BTreeMap<(String, String), Vec<f64>> = Default::default();
    for (model, metric, value) in scores {
        let key = (model, metric);
        if !groups.contains_key(&key) {
            order.push(key.clone());
        }
        groups.entry(key).or_default().push(value);
    }
    let mut summary = String::from("metric,model,mean,sd,n_replicates\n");
    for key in &order {
        let vals = &groups[key];
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let sd = if vals.len() > 1 {
            (vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        let _ = writeln!(summary, "{},{},{mean},{sd},{}", key.1, key.0, vals.len());
    }
    csvio::write_file(&out_dir.join("scores_summary.csv"), &summary)?;

    // selection rates against the simulated truth
    let truth_file = reps
        .iter()
        .map(|r| r.join("truth.csv"))
        .find(|p| p.exists());
    let mut rates_csv = String::from("model,param,informative_pct,noninformative_pct\n");
    let mut detail_csv = String::from("model,param,covariate,selected_pct\n");
    if let Some(truth_file) = truth_file {
        for (kind, files) in &models {
            let refs: Vec<&FittedModel> = files.iter().map(|f| &f.model).collect();
            if refs.is_empty() {
                continue;
            }
            let x_names = &refs[0].x_names;
            let informative =
                csvio::informative_from_truth_csv(&csvio::read_file(&truth_file)?, x_names)?;
            let rates = selection_rates(&refs, &informative, x_names.len())?;
            for (i, label) in rates.param_labels.iter().enumerate() {
                let _ = writeln!(
                    rates_csv,
                    "{kind},{label},{},{}",
                    rates.informative_pct[i], rates.noninformative_pct[i]
                );
                for (j, name) in x_names.iter().enumerate() {
                    let _ = writeln!(
                        detail_csv,
                        "{kind},{label},{name},{}",
                        rates.detail_pct[i][j]
                    );
                }
            }
        }
        csvio::write_file(&out_dir.join("selection_rates.csv"), &rates_csv)?;
        csvio::write_file(&out_dir.join("selection_detail.csv"), &detail_csv)?;
    }
    println!(
        "aggregated {} replicates -> {}",
        reps.len(),
        out_dir.join("scores_summary.csv").display()
    );
    Ok(())
}
