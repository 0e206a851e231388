//! Learning cost coefficients from scored trajectory segments with
//! ordinary least squares, ridge and lasso, plus k-fold cross-validation.

use std::io::Read;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cost::{CostError, WeightCoefficients};

/// Training columns, in design-matrix order.
pub const FEATURE_NAMES: [&str; 11] = [
    "length_m",
    "max_slope",
    "min_width",
    "surface",
    "weather",
    "hour",
    "day_of_week",
    "journey_length",
    "daily_total_length",
    "age",
    "gender",
];

pub const TARGET_NAME: &str = "score";

/// Relative pivot below which the normal-equation matrix counts as singular.
const PIVOT_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum LearnError {
    #[error("design matrix is rank deficient")]
    SingularDesign,
    #[error("all coefficients are zero")]
    AllZeroCoefficients,
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("cannot read training data: {0}")]
    Io(#[from] std::io::Error),
    #[error("training data parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Row-major design matrix with its target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub names: Vec<String>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
}

impl Dataset {
    pub fn new(names: Vec<String>, x: Vec<Vec<f64>>, y: Vec<f64>) -> Result<Self, LearnError> {
        if x.len() != y.len() {
            return Err(LearnError::Invalid(format!("{} rows but {} targets", x.len(), y.len())));
        }
        if let Some(r) = x.iter().position(|r| r.len() != names.len()) {
            return Err(LearnError::Invalid(format!("row {r} has the wrong number of columns")));
        }
        Ok(Dataset { names, x, y })
    }

    pub fn rows(&self) -> usize {
        self.y.len()
    }

    pub fn cols(&self) -> usize {
        self.names.len()
    }

    fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            names: self.names.clone(),
            x: idx.iter().map(|&i| self.x[i].clone()).collect(),
            y: idx.iter().map(|&i| self.y[i]).collect(),
        }
    }

    /// Reads training CSV with the columns of [`FEATURE_NAMES`] plus
    /// `score`. Rows with an empty or non-numeric cell are dropped;
    /// `day_of_week` (ISO 1..=7) becomes a weekend indicator.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self, LearnError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| LearnError::Parse(e.to_string()))?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| LearnError::Parse(format!("missing column '{name}'")))
        };
        let cols: Vec<usize> = FEATURE_NAMES.iter().map(|n| col(n)).collect::<Result<_, _>>()?;
        let cy = col(TARGET_NAME)?;
        let (mut x, mut y) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec.map_err(|e| LearnError::Parse(e.to_string()))?;
            let num = |c: usize| rec.get(c).and_then(|v| v.parse::<f64>().ok()).filter(|v| v.is_finite());
            let row: Option<Vec<f64>> = cols.iter().map(|&c| num(c)).collect();
            let (Some(mut row), Some(target)) = (row, num(cy)) else {
                continue;
            };
            row[6] = if row[6] >= 6.0 { 1.0 } else { 0.0 };
            x.push(row);
            y.push(target);
        }
        Dataset::new(FEATURE_NAMES.iter().map(|s| s.to_string()).collect(), x, y)
    }
}

/// Per-column centring and scaling. Constant columns keep scale 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &[Vec<f64>]) -> Self {
        let n = x.len() as f64;
        let p = x.first().map_or(0, Vec::len);
        let mean: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
        let scale = (0..p)
            .map(|j| {
                let var = x.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n;
                if var > 0.0 {
                    var.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn transform(&self, x: &[Vec<f64>]) -> Vec<Vec<f64>> {
        x.iter()
            .map(|r| r.iter().enumerate().map(|(j, v)| (v - self.mean[j]) / self.scale[j]).collect())
            .collect()
    }

    /// Coefficients and intercept on the original scale.
    pub fn destandardize(&self, coef: &[f64], intercept: f64) -> (Vec<f64>, f64) {
        let raw: Vec<f64> = coef.iter().zip(&self.scale).map(|(b, s)| b / s).collect();
        let shift: f64 = raw.iter().zip(&self.mean).map(|(b, m)| b * m).sum();
        (raw, intercept - shift)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Ols,
    Ridge,
    Lasso,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Ols => "ols",
            Model::Ridge => "ridge",
            Model::Lasso => "lasso",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: Model,
    pub lambda: f64,
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    pub r2_train: f64,
    pub r2_folds: Vec<f64>,
    pub r2_cv: Option<f64>,
    pub train_ms: f64,
    /// False when lasso hit the sweep cap before converging.
    pub converged: bool,
    pub sweeps: usize,
}

impl FitResult {
    pub fn predict(&self, row: &[f64]) -> f64 {
        self.intercept + row.iter().zip(&self.coefficients).map(|(x, b)| x * b).sum::<f64>()
    }
}

/// Coefficient of determination; 0 when the target has no variance.
pub fn r2(y: &[f64], pred: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    r2_against(y, pred, mean)
}

fn r2_against(y: &[f64], pred: &[f64], reference: f64) -> f64 {
    let ss_tot: f64 = y.iter().map(|v| (v - reference).powi(2)).sum();
    let ss_res: f64 = y.iter().zip(pred).map(|(v, p)| (v - p).powi(2)).sum();
    if ss_tot == 0.0 {
        return 0.0;
    }
    1.0 - ss_res / ss_tot
}

fn center(x: &[Vec<f64>], y: &[f64]) -> (Vec<Vec<f64>>, Vec<f64>, Vec<f64>, f64) {
    let n = x.len() as f64;
    let p = x.first().map_or(0, Vec::len);
    let xm: Vec<f64> = (0..p).map(|j| x.iter().map(|r| r[j]).sum::<f64>() / n).collect();
    let ym = y.iter().sum::<f64>() / n;
    let xc = x.iter().map(|r| r.iter().zip(&xm).map(|(v, m)| v - m).collect()).collect();
    let yc = y.iter().map(|v| v - ym).collect();
    (xc, yc, xm, ym)
}

/// Solves `a * x = b` for symmetric positive-definite `a` by Cholesky.
fn cholesky_solve(mut a: Vec<Vec<f64>>, b: &[f64]) -> Result<Vec<f64>, LearnError> {
    let n = b.len();
    let max_diag = (0..n).map(|i| a[i][i].abs()).fold(0.0, f64::max);
    for j in 0..n {
        let mut d = a[j][j];
        for k in 0..j {
            d -= a[j][k] * a[j][k];
        }
        if d <= PIVOT_TOL * max_diag.max(f64::MIN_POSITIVE) {
            return Err(LearnError::SingularDesign);
        }
        let d = d.sqrt();
        a[j][j] = d;
        for i in (j + 1)..n {
            let mut s = a[i][j];
            for k in 0..j {
                s -= a[i][k] * a[j][k];
            }
            a[i][j] = s / d;
        }
    }
    let mut z = vec![0.0; n];
    for i in 0..n {
        let s: f64 = (0..i).map(|k| a[i][k] * z[k]).sum();
        z[i] = (b[i] - s) / a[i][i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| a[k][i] * x[k]).sum();
        x[i] = (z[i] - s) / a[i][i];
    }
    Ok(x)
}

fn finish(model: Model, lambda: f64, x: &[Vec<f64>], y: &[f64], coefficients: Vec<f64>, intercept: f64, clock: Instant) -> FitResult {
    let mut fit = FitResult {
        model,
        lambda,
        coefficients,
        intercept,
        r2_train: 0.0,
        r2_folds: Vec::new(),
        r2_cv: None,
        train_ms: 0.0,
        converged: true,
        sweeps: 0,
    };
    let pred: Vec<f64> = x.iter().map(|r| fit.predict(r)).collect();
    fit.r2_train = r2(y, &pred);
    fit.train_ms = clock.elapsed().as_secs_f64() * 1e3;
    fit
}

fn check_shape(x: &[Vec<f64>], y: &[f64]) -> Result<(), LearnError> {
    if x.is_empty() || x.len() != y.len() {
        return Err(LearnError::Invalid("need matching, non-empty X and y".into()));
    }
    Ok(())
}

/// Ridge regression with unpenalized intercept; `lambda = 0` is OLS.
pub fn fit_ridge(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<FitResult, LearnError> {
    check_shape(x, y)?;
    if !(lambda >= 0.0) {
        return Err(LearnError::Invalid(format!("lambda {lambda} must be non-negative")));
    }
    let clock = Instant::now();
    let p = x[0].len();
    let (xc, yc, xm, ym) = center(x, y);
    if p == 0 {
        return Ok(finish(Model::Ridge, lambda, x, y, vec![], ym, clock));
    }
    let mut a = vec![vec![0.0; p]; p];
    let mut b = vec![0.0; p];
    for (r, v) in xc.iter().zip(&yc) {
        for i in 0..p {
            b[i] += r[i] * v;
            for j in 0..=i {
                a[i][j] += r[i] * r[j];
            }
        }
    }
    for i in 0..p {
        a[i][i] += lambda;
        for j in 0..i {
            a[j][i] = a[i][j];
        }
    }
    let coef = cholesky_solve(a, &b)?;
    let intercept = ym - coef.iter().zip(&xm).map(|(c, m)| c * m).sum::<f64>();
    Ok(finish(Model::Ridge, lambda, x, y, coef, intercept, clock))
}

impl FitResult {
    fn with_model(mut self, model: Model, lambda: f64) -> Self {
        self.model = model;
        self.lambda = lambda;
        self
    }
}

/// Ordinary least squares via the normal equations.
pub fn fit_ols(x: &[Vec<f64>], y: &[f64]) -> Result<FitResult, LearnError> {
    Ok(fit_ridge(x, y, 0.0)?.with_model(Model::Ols, 0.0))
}

pub const LASSO_TOL: f64 = 1e-8;
pub const LASSO_MAX_SWEEPS: usize = 100_000;

fn soft_threshold(z: f64, g: f64) -> f64 {
    if z > g {
        z - g
    } else if z < -g {
        z + g
    } else {
        0.0
    }
}

/// Lasso by cyclic coordinate descent on
/// `sum (y - Xb - c)^2 / (2n) + lambda * |b|_1`.
pub fn fit_lasso(x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<FitResult, LearnError> {
    check_shape(x, y)?;
    if !(lambda >= 0.0) {
        return Err(LearnError::Invalid(format!("lambda {lambda} must be non-negative")));
    }
    let clock = Instant::now();
    let n = x.len() as f64;
    let p = x[0].len();
    let (xc, yc, xm, ym) = center(x, y);
    let norms: Vec<f64> = (0..p).map(|j| xc.iter().map(|r| r[j] * r[j]).sum::<f64>() / n).collect();
    let mut beta = vec![0.0; p];
    let mut resid = yc.clone();
    let mut converged = false;
    let mut sweeps = 0;
    while sweeps < LASSO_MAX_SWEEPS {
        sweeps += 1;
        let mut max_change: f64 = 0.0;
        for j in 0..p {
            if norms[j] == 0.0 {
                continue;
            }
            let rho = xc.iter().zip(&resid).map(|(r, e)| r[j] * e).sum::<f64>() / n + norms[j] * beta[j];
            let new = soft_threshold(rho, lambda) / norms[j];
            let delta = new - beta[j];
            if delta != 0.0 {
                for (r, e) in xc.iter().zip(resid.iter_mut()) {
                    *e -= r[j] * delta;
                }
                beta[j] = new;
            }
            max_change = max_change.max(delta.abs());
        }
        if max_change < LASSO_TOL {
            converged = true;
            break;
        }
    }
    let intercept = ym - beta.iter().zip(&xm).map(|(c, m)| c * m).sum::<f64>();
    let mut fit = finish(Model::Lasso, lambda, x, y, beta, intercept, clock);
    fit.converged = converged;
    fit.sweeps = sweeps;
    Ok(fit)
}

/// Smallest lambda at which lasso zeroes every coefficient.
pub fn lasso_lambda_max(x: &[Vec<f64>], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (xc, yc, _, _) = center(x, y);
    let p = xc.first().map_or(0, Vec::len);
    (0..p)
        .map(|j| (xc.iter().zip(&yc).map(|(r, v)| r[j] * v).sum::<f64>() / n).abs())
        .fold(0.0, f64::max)
}

pub fn fit(model: Model, x: &[Vec<f64>], y: &[f64], lambda: f64) -> Result<FitResult, LearnError> {
    match model {
        Model::Ols => fit_ols(x, y),
        Model::Ridge => fit_ridge(x, y, lambda),
        Model::Lasso => fit_lasso(x, y, lambda),
    }
}

/// Shuffled assignment of `n` rows to `k` folds, sizes differing by at most one.
pub fn fold_assignment(n: usize, k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % k;
    }
    fold
}

/// k-fold cross-validation. Each fold's R² is measured on its held-out rows
/// against the training-fold mean. The returned fit is trained on all data.
pub fn cross_validate(model: Model, data: &Dataset, lambda: f64, k: usize, seed: u64) -> Result<FitResult, LearnError> {
    let n = data.rows();
    if k < 2 || k > n {
        return Err(LearnError::Invalid(format!("fold count {k} must be within 2..={n}")));
    }
    let folds = fold_assignment(n, k, seed);
    let mut r2_folds = Vec::with_capacity(k);
    let mut ms = 0.0;
    for f in 0..k {
        let train: Vec<usize> = (0..n).filter(|&i| folds[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| folds[i] == f).collect();
        let tr = data.subset(&train);
        let te = data.subset(&test);
        let fitted = fit(model, &tr.x, &tr.y, lambda)?;
        ms += fitted.train_ms;
        let pred: Vec<f64> = te.x.iter().map(|r| fitted.predict(r)).collect();
        let reference = tr.y.iter().sum::<f64>() / tr.y.len() as f64;
        r2_folds.push(r2_against(&te.y, &pred, reference));
    }
    let mut full = fit(model, &data.x, &data.y, lambda)?;
    full.train_ms += ms;
    full.r2_cv = Some(r2_folds.iter().sum::<f64>() / k as f64);
    full.r2_folds = r2_folds;
    Ok(full)
}

/// Eleven log-spaced penalties from 1e-4 to 1e1.
pub fn lambda_grid() -> Vec<f64> {
    (0..11).map(|i| 10f64.powf(-4.0 + 0.5 * i as f64)).collect()
}

/// Penalty with the best mean CV R² over [`lambda_grid`]; ties keep the
/// smaller penalty.
pub fn select_lambda(model: Model, data: &Dataset, k: usize, seed: u64) -> Result<FitResult, LearnError> {
    let mut best: Option<FitResult> = None;
    for lambda in lambda_grid() {
        let f = cross_validate(model, data, lambda, k, seed)?;
        if best.as_ref().is_none_or(|b| f.r2_cv > b.r2_cv) {
            best = Some(f);
        }
    }
    Ok(best.expect("grid is not empty"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceReport {
    pub names: Vec<String>,
    pub importance: Vec<f64>,
}

impl ImportanceReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.names.iter().position(|n| n == name).map(|i| self.importance[i])
    }

    /// Feature names ordered by decreasing importance (stable on ties).
    pub fn ranking(&self) -> Vec<&str> {
        let mut idx: Vec<usize> = (0..self.names.len()).collect();
        idx.sort_by(|&a, &b| self.importance[b].total_cmp(&self.importance[a]));
        idx.into_iter().map(|i| self.names[i].as_str()).collect()
    }
}

/// `|b_i| / sum |b_j|` over standardized coefficients.
pub fn feature_importance(names: &[String], coefficients: &[f64]) -> Result<ImportanceReport, LearnError> {
    let total: f64 = coefficients.iter().map(|b| b.abs()).sum();
    if total == 0.0 {
        return Err(LearnError::AllZeroCoefficients);
    }
    Ok(ImportanceReport {
        names: names.to_vec(),
        importance: coefficients.iter().map(|b| b.abs() / total).collect(),
    })
}

/// Maps the five cost-feature importances onto cost coefficients.
pub fn to_cost_coefficients(report: &ImportanceReport) -> Result<WeightCoefficients, LearnError> {
    let pick = |name: &str| report.get(name).unwrap_or(0.0);
    Ok(WeightCoefficients::normalized([
        pick("length_m"),
        pick("max_slope"),
        pick("min_width"),
        pick("surface"),
        pick("weather"),
    ])?)
}

/// Standardizes `data` and fits; coefficients stay on the standardized
/// scale, as feature importance expects.
pub fn fit_standardized(
    model: Model,
    data: &Dataset,
    lambda: f64,
    k: usize,
    seed: u64,
) -> Result<(FitResult, Standardizer), LearnError> {
    let st = Standardizer::fit(&data.x);
    let scaled = Dataset { names: data.names.clone(), x: st.transform(&data.x), y: data.y.clone() };
    Ok((cross_validate(model, &scaled, lambda, k, seed)?, st))
}
