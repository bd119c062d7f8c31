//! CSV reading and writing. All files are plain comma-separated text with a
//! header row; floats are written in Rust's shortest round-trip format, so
//! rereading a file reproduces every value bit for bit.

use copboost::boosting::BoostTrace;
use copboost::data::{Dataset, Partition};
use copboost::error::{Error, Result};
use copboost::simulate::Truth;
use std::fmt::Write as _;
use std::path::Path;

pub fn write_file(path: &Path, content: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)
                .map_err(|e| Error::data(format!("cannot create {}: {e}", dir.display())))?;
        }
    }
    std::fs::write(path, content)
        .map_err(|e| Error::data(format!("cannot write {}: {e}", path.display())))
}

pub fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))
}

pub fn dataset_to_csv(data: &Dataset) -> String {
    let mut out = String::new();
    out.push_str("y1,y2");
    for name in &data.x_names {
        out.push(',');
        out.push_str(name);
    }
    out.push_str(",partition\n");
    for i in 0..data.n() {
        let _ = write!(out, "{},{}", data.y1[i], data.y2[i]);
        for col in &data.x {
            let _ = write!(out, ",{}", col[i]);
        }
        let _ = writeln!(out, ",{}", data.partition[i].name());
    }
    out
}

pub fn dataset_from_csv(text: &str) -> Result<Dataset> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::data("empty data file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.len() < 3 || cols[0] != "y1" || cols[1] != "y2" || *cols.last().unwrap() != "partition"
    {
        return Err(Error::data(
            "data header must be y1,y2,<covariates...>,partition".to_string(),
        ));
    }
    let x_names: Vec<String> = cols[2..cols.len() - 1].iter().map(|s| s.to_string()).collect();
    let p = x_names.len();
    let mut data = Dataset {
        y1: Vec::new(),
        y2: Vec::new(),
        x: vec![Vec::new(); p],
        x_names,
        partition: Vec::new(),
    };
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(Error::data(format!(
                "row {}: expected {} fields, found {}",
                lineno + 2,
                cols.len(),
                fields.len()
            )));
        }
        let parse = |s: &str, what: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| {
                Error::data(format!("row {}: invalid {what} value '{s}'", lineno + 2))
            })?;
            if !v.is_finite() {
                return Err(Error::data(format!(
                    "row {}: missing or non-finite {what}",
                    lineno + 2
                )));
            }
            Ok(v)
        };
        data.y1.push(parse(fields[0], "y1")?);
        data.y2.push(parse(fields[1], "y2")?);
        for j in 0..p {
            let v = parse(fields[2 + j], &format!("covariate {}", data.x_names[j]))?;
            data.x[j].push(v);
        }
        data.partition.push(
            Partition::parse(fields[cols.len() - 1])
                .map_err(|e| Error::data(format!("row {}: {e}", lineno + 2)))?,
        );
    }
    data.validate()?;
    Ok(data)
}

/// Truth file: per-row true predictors plus the informative covariate sets
/// (constant per column, semicolon-separated names).
pub fn truth_to_csv(truth: &Truth, x_names: &[String]) -> String {
    let k = truth.param_labels.len();
    let mut out = String::new();
    for label in &truth.param_labels {
        let _ = write!(out, "inf_{label},");
    }
    let header: Vec<String> =
        truth.param_labels.iter().map(|l| format!("eta_{l}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    let inf_strings: Vec<String> = truth
        .informative
        .iter()
        .map(|set| {
            set.iter().map(|&j| x_names[j].clone()).collect::<Vec<_>>().join(";")
        })
        .collect();
    let n = truth.eta_true.len() / k;
    for i in 0..n {
        for s in &inf_strings {
            let _ = write!(out, "{s},");
        }
        let row: Vec<String> =
            (0..k).map(|j| format!("{}", truth.eta_true[i * k + j])).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Informative covariate sets back out of a truth file, as column indices
/// resolved against the given covariate names.
pub fn informative_from_truth_csv(text: &str, x_names: &[String]) -> Result<Vec<Vec<usize>>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::data("empty truth file"))?;
    let first = lines.next().ok_or_else(|| Error::data("truth file has no rows"))?;
    let mut out = Vec::new();
    for (name, value) in header.split(',').zip(first.split(',')) {
        if !name.starts_with("inf_") {
            continue;
        }
        let mut set = Vec::new();
        if !value.is_empty() {
            for tok in value.split(';') {
                let j = x_names
                    .iter()
                    .position(|n| n == tok)
                    .ok_or_else(|| Error::data(format!("unknown covariate '{tok}' in truth")))?;
                set.push(j);
            }
        }
        out.push(set);
    }
    Ok(out)
}

pub fn trace_to_csv(trace: &BoostTrace, param_labels: &[String]) -> String {
    let mut out = String::from("iteration,selected_param,selected_learner,train_risk,oobag_risk");
    for label in param_labels {
        let _ = write!(out, ",dw_{label}");
    }
    out.push('\n');
    for row in &trace.rows {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            row.iteration,
            param_labels[row.selected_param],
            row.selected_learner,
            row.train_risk,
            row.oobag_risk
        );
        for risk in &row.candidate_risks {
            if risk.is_finite() {
                let _ = write!(out, ",{risk}");
            } else {
                out.push_str(",inf");
            }
        }
        out.push('\n');
    }
    out
}

/// Reads the iteration/oobag-risk columns back from a trace file.
pub fn oobag_from_trace_csv(text: &str) -> Result<Vec<(usize, f64)>> {
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| Error::data("empty trace file"))?;
    let cols: Vec<&str> = header.split(',').collect();
    let it_idx = cols
        .iter()
        .position(|&c| c == "iteration")
        .ok_or_else(|| Error::data("trace file misses the iteration column"))?;
    let risk_idx = cols
        .iter()
        .position(|&c| c == "oobag_risk")
        .ok_or_else(|| Error::data("trace file misses the oobag_risk column"))?;
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let it: usize = fields
            .get(it_idx)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::data(format!("trace row {}: bad iteration", lineno + 2)))?;
        let risk: f64 = fields
            .get(risk_idx)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::data(format!("trace row {}: bad oobag risk", lineno + 2)))?;
        out.push((it, risk));
    }
    Ok(out)
}
