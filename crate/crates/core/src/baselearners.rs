//! Regression-type base-learners: intercept, linear, P-spline and
//! categorical ridge, each fitted by penalized least squares to a
//! pseudo-residual vector.

use crate::error::{Error, Result};
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PSplineConfig {
    pub inner_knots: usize,
    pub degree: usize,
    pub diff_order: usize,
}

impl Default for PSplineConfig {
    fn default() -> Self {
        PSplineConfig { inner_knots: 20, degree: 3, diff_order: 2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LearnerKind {
    Intercept,
    Linear,
    PSpline(PSplineConfig),
    Categorical,
}

/// Definition of one candidate base-learner: its type, the covariate it
/// reads (absent for the intercept) and the target degrees of freedom that
/// calibrate the penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseLearnerDef {
    pub kind: LearnerKind,
    pub covariate: Option<usize>,
    pub df_target: f64,
}

impl BaseLearnerDef {
    pub fn intercept() -> Self {
        BaseLearnerDef { kind: LearnerKind::Intercept, covariate: None, df_target: 1.0 }
    }

    pub fn linear(covariate: usize) -> Self {
        BaseLearnerDef { kind: LearnerKind::Linear, covariate: Some(covariate), df_target: 2.0 }
    }

    pub fn pspline(covariate: usize, cfg: PSplineConfig, df_target: f64) -> Self {
        BaseLearnerDef { kind: LearnerKind::PSpline(cfg), covariate: Some(covariate), df_target }
    }

    pub fn categorical(covariate: usize, df_target: f64) -> Self {
        BaseLearnerDef { kind: LearnerKind::Categorical, covariate: Some(covariate), df_target }
    }

    pub fn label(&self, x_names: &[String]) -> String {
        let cov = self.covariate.map(|j| x_names[j].clone()).unwrap_or_default();
        match self.kind {
            LearnerKind::Intercept => "intercept".into(),
            LearnerKind::Linear => format!("linear({cov})"),
            LearnerKind::PSpline(_) => format!("pspline({cov})"),
            LearnerKind::Categorical => format!("ridge({cov})"),
        }
    }
}

/// Frozen basis of a learner, built from the training rows and stored with
/// the fitted model so predictions on new data reproduce exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Basis {
    Intercept,
    Linear,
    /// full (extended) knot vector; basis dimension = knots - degree - 1
    PSpline { knots: Vec<f64>, degree: usize },
    /// sorted distinct training levels, one indicator column per level
    Categorical { levels: Vec<f64> },
}

impl Basis {
    pub fn dim(&self) -> usize {
        match self {
            Basis::Intercept => 1,
            Basis::Linear => 2,
            Basis::PSpline { knots, degree } => knots.len() - degree - 1,
            Basis::Categorical { levels } => levels.len(),
        }
    }

    /// Design row at a single covariate value.
    pub fn row(&self, x: f64) -> Vec<f64> {
        match self {
            Basis::Intercept => vec![1.0],
            Basis::Linear => vec![1.0, x],
            Basis::PSpline { knots, degree } => {
                let mut row = vec![0.0; self.dim()];
                let (start, vals) = bspline_row(knots, *degree, x);
                for (offset, v) in vals.iter().enumerate() {
                    row[start + offset] = *v;
                }
                row
            }
            Basis::Categorical { levels } => {
                let mut row = vec![0.0; levels.len()];
                match levels.binary_search_by(|l| l.partial_cmp(&x).unwrap()) {
                    Ok(idx) => row[idx] = 1.0,
                    Err(_) => {
                        log::warn!("unseen categorical level {x}; mapped to zero effect");
                    }
                }
                row
            }
        }
    }

    /// Penalty matrix paired with this basis: difference penalty for
    /// P-splines, ridge for categorical levels, zero otherwise.
    pub fn penalty(&self, diff_order: usize) -> DMatrix<f64> {
        let d = self.dim();
        match self {
            Basis::PSpline { .. } => {
                let diff = difference_matrix(d, diff_order);
                diff.transpose() * diff
            }
            Basis::Categorical { .. } => DMatrix::identity(d, d),
            _ => DMatrix::zeros(d, d),
        }
    }
}

/// Builds the frozen basis for a learner from the training values of its
/// covariate.
pub fn build_basis(def: &BaseLearnerDef, x_train: &[f64]) -> Result<Basis> {
    match def.kind {
        LearnerKind::Intercept => Ok(Basis::Intercept),
        LearnerKind::Linear => Ok(Basis::Linear),
        LearnerKind::PSpline(cfg) => {
            let lo = x_train.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = x_train.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !(hi - lo).is_finite() || hi - lo < 1e-12 {
                return Err(Error::config(format!(
                    "covariate range [{lo}, {hi}] too narrow for a P-spline basis"
                )));
            }
            // equidistant knots over the training range, extended degree-many
            // steps beyond each boundary
            let h = (hi - lo) / (cfg.inner_knots + 1) as f64;
            let total = cfg.inner_knots + 2 + 2 * cfg.degree;
            let knots: Vec<f64> =
                (0..total).map(|i| lo + h * (i as f64 - cfg.degree as f64)).collect();
            Ok(Basis::PSpline { knots, degree: cfg.degree })
        }
        LearnerKind::Categorical => {
            let mut levels: Vec<f64> = x_train.to_vec();
            levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
            levels.dedup();
            if levels.len() < 2 {
                return Err(Error::config("categorical covariate has fewer than 2 levels"));
            }
            Ok(Basis::Categorical { levels })
        }
    }
}

/// B-spline basis values at `x`: returns the first nonzero basis index and
/// the `degree + 1` nonzero values. Outside the knot range the boundary
/// span is evaluated at the raw `x`, which extends each boundary B-spline
/// by its natural polynomial.
fn bspline_row(knots: &[f64], degree: usize, x: f64) -> (usize, Vec<f64>) {
    let nbasis = knots.len() - degree - 1;
    // span index such that knots[span] <= x < knots[span + 1], clamped
    let mut span = degree;
    while span < nbasis - 1 && x >= knots[span + 1] {
        span += 1;
    }
    let mut vals = vec![0.0; degree + 1];
    vals[0] = 1.0;
    let mut left = vec![0.0; degree + 1];
    let mut right = vec![0.0; degree + 1];
    for d in 1..=degree {
        left[d] = x - knots[span + 1 - d];
        right[d] = knots[span + d] - x;
        let mut saved = 0.0;
        for r in 0..d {
            let tmp = vals[r] / (right[r + 1] + left[d - r]);
            vals[r] = saved + right[r + 1] * tmp;
            saved = left[d - r] * tmp;
        }
        vals[d] = saved;
    }
    (span - degree, vals)
}

/// `order`-th difference operator of dimension `(d - order) x d`.
fn difference_matrix(d: usize, order: usize) -> DMatrix<f64> {
    assert!(order < d, "difference order must be below the basis dimension");
    let mut m = DMatrix::<f64>::identity(d, d);
    for _ in 0..order {
        let rows = m.nrows() - 1;
        let mut next = DMatrix::<f64>::zeros(rows, d);
        for r in 0..rows {
            for c in 0..d {
                next[(r, c)] = m[(r + 1, c)] - m[(r, c)];
            }
        }
        m = next;
    }
    m
}

/// Smoothing parameter giving the requested effective degrees of freedom:
/// trace(X (X'WX + lambda P)^-1 X'W) = df, found by bisection on
/// log(lambda) in [-20, 20].
pub fn df_to_lambda(xtwx: &DMatrix<f64>, penalty: &DMatrix<f64>, df_target: f64) -> Result<f64> {
    let d = xtwx.nrows();
    if penalty.amax() == 0.0 {
        // unpenalized learner: df is fixed at the column count
        if (df_target - d as f64).abs() > 1e-6 {
            return Err(Error::config(format!(
                "df target {df_target} unattainable for an unpenalized learner of dimension {d}"
            )));
        }
        return Ok(0.0);
    }
    let df_at = |ln_lambda: f64| -> Result<f64> {
        let s = xtwx + penalty * ln_lambda.exp();
        let chol = Cholesky::new(s)
            .ok_or_else(|| Error::numeric("singular penalized system in df calibration"))?;
        let sol = chol.solve(xtwx);
        Ok(sol.trace())
    };
    let (mut lo, mut hi) = (-20.0f64, 20.0f64);
    let df_lo = df_at(lo)?; // large df (weak penalty)
    let df_hi = df_at(hi)?;
    if df_target > df_lo + 1e-3 || df_target < df_hi - 1e-3 {
        return Err(Error::config(format!(
            "df target {df_target} outside attainable range [{df_hi:.3}, {df_lo:.3}]"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let df = df_at(mid)?;
        if (df - df_target).abs() < 1e-4 {
            return Ok(mid.exp());
        }
        if df > df_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// A base-learner bound to a dataset: frozen basis, cached design matrix
/// over all rows, calibrated penalty and pre-factored normal equations for
/// the training rows.
pub struct LearnerWorkspace {
    pub def: BaseLearnerDef,
    pub basis: Basis,
    pub lambda: f64,
    design: DMatrix<f64>,
    train_rows: Vec<usize>,
    xtwx: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
}

impl LearnerWorkspace {
    /// Builds the design over all rows, calibrates lambda on the training
    /// rows to the definition's df target, and factors the normal equations.
    pub fn build(def: &BaseLearnerDef, x_col: &[f64], train_rows: &[usize]) -> Result<Self> {
        let x_train: Vec<f64> = train_rows.iter().map(|&i| x_col[i]).collect();
        let basis = build_basis(def, &x_train)?;
        let d = basis.dim();
        if def.df_target < 1.0 || def.df_target > d as f64 {
            return Err(Error::config(format!(
                "df target {} outside [1, {d}] for {:?}",
                def.df_target, def.kind
            )));
        }
        let n = x_col.len();
        let mut design = DMatrix::<f64>::zeros(n, d);
        for (i, &x) in x_col.iter().enumerate() {
            let row = basis.row(x);
            for c in 0..d {
                design[(i, c)] = row[c];
            }
        }
        let mut xtwx = DMatrix::<f64>::zeros(d, d);
        for &i in train_rows {
            let row = design.row(i);
            for a in 0..d {
                for b in a..d {
                    xtwx[(a, b)] += row[a] * row[b];
                }
            }
        }
        for a in 0..d {
            for b in 0..a {
                xtwx[(a, b)] = xtwx[(b, a)];
            }
        }
        let diff_order = match def.kind {
            LearnerKind::PSpline(cfg) => cfg.diff_order,
            _ => 2,
        };
        let penalty = basis.penalty(diff_order);
        let lambda = df_to_lambda(&xtwx, &penalty, def.df_target)?;
        let system = &xtwx + &penalty * lambda;
        let chol = match Cholesky::new(system.clone()) {
            Some(c) => c,
            None => {
                // one ridge jitter, then give up
                let jittered = system + DMatrix::<f64>::identity(d, d) * 1e-10;
                Cholesky::new(jittered).ok_or_else(|| {
                    Error::numeric(format!("singular base-learner system for {:?}", def.kind))
                })?
            }
        };
        Ok(LearnerWorkspace {
            def: def.clone(),
            basis,
            lambda,
            design,
            train_rows: train_rows.to_vec(),
            xtwx,
            chol,
        })
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Penalized weighted least squares fit to `target` (full-length vector;
    /// only training rows enter). Returns the coefficients and the residual
    /// sum of squares over the training rows.
    pub fn fit(&self, target: &[f64]) -> (Vec<f64>, f64) {
        let d = self.dim();
        let mut xtwg = DVector::<f64>::zeros(d);
        let mut gtg = 0.0;
        for &i in &self.train_rows {
            let g = target[i];
            gtg += g * g;
            for c in 0..d {
                xtwg[c] += self.design[(i, c)] * g;
            }
        }
        let coefs = self.chol.solve(&xtwg);
        // rss = g'g - 2 b'X'Wg + b'X'WX b
        let rss = gtg - 2.0 * coefs.dot(&xtwg) + (&self.xtwx * &coefs).dot(&coefs);
        (coefs.as_slice().to_vec(), rss.max(0.0))
    }

    /// Fitted values over every row of the bound dataset.
    pub fn predict_all(&self, coefs: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let mut out = vec![0.0; self.design.nrows()];
        for i in 0..self.design.nrows() {
            let mut acc = 0.0;
            for c in 0..d {
                acc += self.design[(i, c)] * coefs[c];
            }
            out[i] = acc;
        }
        out
    }
}

/// Evaluates a fitted learner at an arbitrary covariate value.
pub fn predict_at(basis: &Basis, coefs: &[f64], x: f64) -> f64 {
    basis.row(x).iter().zip(coefs).map(|(b, c)| b * c).sum()
}
