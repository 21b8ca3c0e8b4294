//! Group lasso on log-virality.
//!
//! Minimizes `(1/2n) ||y - X b - b0||^2 + lambda * sum_g sqrt(p_g) ||b_g||_2`
//! with an unpenalized intercept, by accelerated proximal gradient with
//! backtracking and a monotone restart (an iterate is only accepted when the
//! objective does not increase). Convergence requires both a small relative
//! objective change and a KKT certificate below `kkt_tol`.

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::labels::FeatureMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LassoConfig {
    /// Number of grid points between `lambda_max * min_ratio` and `lambda_max`.
    pub lambda_grid: usize,
    pub min_ratio: f64,
    pub folds: usize,
    /// Relative objective change below which the solver may stop.
    pub tol: f64,
    /// Largest admissible KKT residual at a returned solution.
    pub kkt_tol: f64,
    pub max_iter: usize,
    pub standardize: bool,
    pub seed: u64,
}

impl Default for LassoConfig {
    fn default() -> Self {
        LassoConfig {
            lambda_grid: 100,
            min_ratio: 1e-4,
            folds: 5,
            tol: 1e-6,
            kkt_tol: 1e-7,
            max_iter: 10_000,
            standardize: true,
            seed: 0,
        }
    }
}

impl LassoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.folds < 2 {
            return Err(Error::Config(format!(
                "folds must be ≥ 2, got {}",
                self.folds
            )));
        }
        if self.lambda_grid < 1 || !(self.min_ratio > 0.0 && self.min_ratio < 1.0) {
            return Err(Error::Config(
                "lambda grid must be nonempty with 0 < min_ratio < 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LassoFit {
    pub lambda: f64,
    pub intercept: f64,
    /// Coefficients on the original column scale.
    pub beta: Vec<f64>,
    pub active_groups: Vec<usize>,
    /// `(lambda, mean validation MSE)` in decreasing lambda order; empty for a single fit.
    pub cv_curve: Vec<(f64, f64)>,
    pub kkt_residual: f64,
    pub iterations: usize,
    /// Objective value after each accepted iterate, starting with the initial point.
    pub objective_trace: Vec<f64>,
}

/// Centered (and optionally scaled) copy of a design.
#[derive(Debug, Clone)]
struct Prepared {
    x: Array2<f64>,
    y: Array1<f64>,
    x_mean: Array1<f64>,
    x_scale: Array1<f64>,
    y_mean: f64,
    weights: Vec<f64>,
    groups: Vec<Vec<usize>>,
}

impl Prepared {
    fn new(
        x: ArrayView2<f64>,
        y: ArrayView1<f64>,
        groups: &[Vec<usize>],
        standardize: bool,
    ) -> Self {
        let n = x.nrows() as f64;
        let x_mean = x.mean_axis(Axis(0)).unwrap();
        let mut xc = &x - &x_mean.view().insert_axis(Axis(0));
        let mut x_scale = Array1::ones(x.ncols());
        if standardize {
            for (j, mut col) in xc.axis_iter_mut(Axis(1)).enumerate() {
                let sd = (col.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
                if sd > 1e-12 {
                    col.mapv_inplace(|v| v / sd);
                    x_scale[j] = sd;
                }
            }
        }
        let y_mean = y.mean().unwrap();
        let yc = y.mapv(|v| v - y_mean);
        Prepared {
            x: xc,
            y: yc,
            x_mean,
            x_scale,
            y_mean,
            weights: groups.iter().map(|g| (g.len() as f64).sqrt()).collect(),
            groups: groups.to_vec(),
        }
    }

    fn n(&self) -> f64 {
        self.x.nrows() as f64
    }

    fn lambda_max(&self) -> f64 {
        let xty = self.x.t().dot(&self.y);
        self.groups
            .iter()
            .zip(&self.weights)
            .map(|(g, w)| group_norm(&xty, g) / (self.n() * w))
            .fold(0.0, f64::max)
    }

    fn residual(&self, beta: &Array1<f64>) -> Array1<f64> {
        &self.y - &self.x.dot(beta)
    }

    fn loss(&self, beta: &Array1<f64>) -> f64 {
        let r = self.residual(beta);
        r.dot(&r) / (2.0 * self.n())
    }

    fn penalty(&self, beta: &Array1<f64>, lambda: f64) -> f64 {
        self.groups
            .iter()
            .zip(&self.weights)
            .map(|(g, w)| w * group_norm(beta, g))
            .sum::<f64>()
            * lambda
    }

    /// Gradient of the smooth part: `-X^T (y - X b) / n`.
    fn gradient(&self, beta: &Array1<f64>) -> Array1<f64> {
        self.x.t().dot(&self.residual(beta)) / -self.n()
    }

    fn prox(&self, v: &mut Array1<f64>, step_lambda: f64) {
        for (g, w) in self.groups.iter().zip(&self.weights) {
            let norm = group_norm(v, g);
            let thresh = step_lambda * w;
            let factor = if norm <= thresh {
                0.0
            } else {
                1.0 - thresh / norm
            };
            for &j in g {
                v[j] *= factor;
            }
        }
    }

    /// Largest violation of the group-lasso optimality conditions at `beta`.
    fn kkt_residual(&self, beta: &Array1<f64>, lambda: f64) -> f64 {
        let corr = self.x.t().dot(&self.residual(beta)) / self.n();
        let mut worst: f64 = 0.0;
        for (g, w) in self.groups.iter().zip(&self.weights) {
            let bn = group_norm(beta, g);
            let v = if bn > 0.0 {
                g.iter()
                    .map(|&j| {
                        let d = corr[j] - lambda * w * beta[j] / bn;
                        d * d
                    })
                    .sum::<f64>()
                    .sqrt()
            } else {
                (group_norm(&corr, g) - lambda * w).max(0.0)
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Solves on the prepared scale from `start`.
    fn solve(&self, lambda: f64, start: Array1<f64>, cfg: &LassoConfig) -> Result<Solved> {
        let p = self.x.ncols();
        if lambda >= self.lambda_max() {
            let zero = Array1::zeros(p);
            let obj = self.loss(&zero);
            return Ok(Solved {
                kkt: self.kkt_residual(&zero, lambda),
                beta: zero,
                iterations: 0,
                trace: vec![obj],
            });
        }
        let objective = |b: &Array1<f64>| self.loss(b) + self.penalty(b, lambda);
        let mut lip = (0..p)
            .map(|j| self.x.column(j).dot(&self.x.column(j)) / self.n())
            .fold(1e-12, f64::max);

        // proximal step from z with backtracking on the Lipschitz estimate
        let step = |z: &Array1<f64>, lip: &mut f64| -> Array1<f64> {
            let fz = self.loss(z);
            let gz = self.gradient(z);
            loop {
                let mut cand = z - &(&gz / *lip);
                self.prox(&mut cand, lambda / *lip);
                let d = &cand - z;
                let bound = fz + gz.dot(&d) + 0.5 * *lip * d.dot(&d);
                if self.loss(&cand) <= bound + 1e-15 * fz.abs().max(1.0) {
                    return cand;
                }
                *lip *= 2.0;
            }
        };

        let mut x = start;
        let mut x_prev = x.clone();
        let mut t = 1.0_f64;
        let mut fx = objective(&x);
        let mut trace = vec![fx];
        let mut last_change = f64::INFINITY;
        let mut kkt = f64::INFINITY;
        for it in 1..=cfg.max_iter {
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let z = &x + &((&x - &x_prev) * ((t - 1.0) / t_next));
            let cand = step(&z, &mut lip);
            let fc = objective(&cand);
            let (next, f_next) = if fc <= fx {
                t = t_next;
                (cand, fc)
            } else {
                // momentum overshot: restart with a plain proximal step from x
                t = 1.0;
                let plain = step(&x, &mut lip);
                let fp = objective(&plain);
                if fp <= fx {
                    (plain, fp)
                } else {
                    (x.clone(), fx)
                }
            };
            last_change = (fx - f_next) / fx.abs().max(1e-300);
            x_prev = std::mem::replace(&mut x, next);
            fx = f_next;
            trace.push(fx);
            if last_change < cfg.tol {
                kkt = self.kkt_residual(&x, lambda);
                if kkt <= cfg.kkt_tol {
                    return Ok(Solved {
                        beta: x,
                        iterations: it,
                        kkt,
                        trace,
                    });
                }
            }
        }
        Err(Error::NoConvergence {
            iterations: cfg.max_iter,
            kkt_residual: kkt.min(self.kkt_residual(&x, lambda)),
            relative_change: last_change,
            last_beta: x.to_vec(),
        })
    }

    fn unscale(&self, beta_std: &Array1<f64>) -> (f64, Vec<f64>) {
        let beta: Vec<f64> = beta_std
            .iter()
            .zip(&self.x_scale)
            .map(|(b, s)| b / s)
            .collect();
        let intercept = self.y_mean
            - beta
                .iter()
                .zip(&self.x_mean)
                .map(|(b, m)| b * m)
                .sum::<f64>();
        (intercept, beta)
    }

    fn to_fit(&self, lambda: f64, s: Solved) -> LassoFit {
        let (intercept, beta) = self.unscale(&s.beta);
        let active_groups = self
            .groups
            .iter()
            .enumerate()
            .filter(|(_, g)| group_norm(&s.beta, g) > 0.0)
            .map(|(i, _)| i)
            .collect();
        LassoFit {
            lambda,
            intercept,
            beta,
            active_groups,
            cv_curve: Vec::new(),
            kkt_residual: s.kkt,
            iterations: s.iterations,
            objective_trace: s.trace,
        }
    }
}

struct Solved {
    beta: Array1<f64>,
    iterations: usize,
    kkt: f64,
    trace: Vec<f64>,
}

fn group_norm(v: &Array1<f64>, g: &[usize]) -> f64 {
    g.iter().map(|&j| v[j] * v[j]).sum::<f64>().sqrt()
}

fn check_design(x: ArrayView2<f64>, y: ArrayView1<f64>, groups: &[Vec<usize>]) -> Result<()> {
    if x.nrows() != y.len() {
        return Err(Error::Input(format!(
            "design has {} rows but response has {}",
            x.nrows(),
            y.len()
        )));
    }
    if x.nrows() < 2 {
        return Err(Error::Input("group lasso needs at least 2 rows".into()));
    }
    let mut seen = vec![false; x.ncols()];
    for g in groups {
        for &j in g {
            if j >= x.ncols() || seen[j] {
                return Err(Error::Input(format!(
                    "column {j} is out of range or grouped twice"
                )));
            }
            seen[j] = true;
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(Error::Input("every column must belong to a group".into()));
    }
    if x.iter().chain(y.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Input("design contains non-finite values".into()));
    }
    Ok(())
}

/// `max_g ||X_g^T (y - mean y)|| / (n sqrt(p_g))` on the (standardized) design.
pub fn lambda_max(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    groups: &[Vec<usize>],
    standardize: bool,
) -> f64 {
    Prepared::new(x, y, groups, standardize).lambda_max()
}

/// Fits the group lasso at a single `lambda`.
pub fn fit_group_lasso(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    groups: &[Vec<usize>],
    lambda: f64,
    config: &LassoConfig,
) -> Result<LassoFit> {
    check_design(x, y, groups)?;
    let prep = Prepared::new(x, y, groups, config.standardize);
    let solved = prep.solve(lambda, Array1::zeros(x.ncols()), config)?;
    Ok(prep.to_fit(lambda, solved))
}

/// Warm-started solutions along `lambdas` (expected in decreasing order).
pub fn fit_path(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    groups: &[Vec<usize>],
    lambdas: &[f64],
    config: &LassoConfig,
) -> Result<Vec<LassoFit>> {
    check_design(x, y, groups)?;
    let prep = Prepared::new(x, y, groups, config.standardize);
    let mut warm = Array1::zeros(x.ncols());
    let mut out = Vec::with_capacity(lambdas.len());
    for &lam in lambdas {
        let s = prep.solve(lam, warm.clone(), config)?;
        warm = s.beta.clone();
        out.push(prep.to_fit(lam, s));
    }
    Ok(out)
}

/// Geometric grid from `lambda_max` down to `lambda_max * min_ratio`.
pub fn lambda_grid(lambda_max: f64, config: &LassoConfig) -> Vec<f64> {
    let k = config.lambda_grid;
    if k == 1 {
        return vec![lambda_max];
    }
    (0..k)
        .map(|i| lambda_max * config.min_ratio.powf(i as f64 / (k - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvResult {
    pub lambda_best: f64,
    pub best_index: usize,
    /// `(lambda, mean validation MSE)`, decreasing lambda.
    pub curve: Vec<(f64, f64)>,
}

/// Fold index of every row after a seeded shuffle.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut fold = vec![0; n];
    for (pos, &row) in order.iter().enumerate() {
        fold[row] = pos % folds;
    }
    fold
}

/// K-fold cross-validation over the lambda grid; ties favor the larger lambda.
pub fn cv_select_lambda(
    x: ArrayView2<f64>,
    y: ArrayView1<f64>,
    groups: &[Vec<usize>],
    config: &LassoConfig,
) -> Result<CvResult> {
    config.validate()?;
    check_design(x, y, groups)?;
    let n = x.nrows();
    if n < config.folds {
        return Err(Error::Config(format!(
            "{} rows cannot fill {} folds",
            n, config.folds
        )));
    }
    let grid = lambda_grid(lambda_max(x, y, groups, config.standardize), config);
    let fold = fold_assignment(n, config.folds, config.seed);

    let per_fold: Vec<Vec<f64>> = (0..config.folds)
        .into_par_iter()
        .map(|k| -> Result<Vec<f64>> {
            let train: Vec<usize> = (0..n).filter(|&i| fold[i] != k).collect();
            let val: Vec<usize> = (0..n).filter(|&i| fold[i] == k).collect();
            if val.is_empty() || train.len() < 2 {
                return Err(Error::Config(format!("fold {k} has no rows")));
            }
            let xt = x.select(Axis(0), &train);
            let yt = y.select(Axis(0), &train);
            let xv = x.select(Axis(0), &val);
            let yv = y.select(Axis(0), &val);
            let path = fit_path(xt.view(), yt.view(), groups, &grid, config)?;
            Ok(path
                .iter()
                .map(|fit| {
                    let beta = Array1::from(fit.beta.clone());
                    let pred = xv.dot(&beta) + fit.intercept;
                    let err = &yv - &pred;
                    err.dot(&err) / val.len() as f64
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let curve: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(i, &lam)| {
            let m = per_fold.iter().map(|f| f[i]).sum::<f64>() / config.folds as f64;
            (lam, m)
        })
        .collect();
    let mut best_index = 0;
    for (i, &(_, m)) in curve.iter().enumerate() {
        if m < curve[best_index].1 {
            best_index = i;
        }
    }
    Ok(CvResult {
        lambda_best: curve[best_index].0,
        best_index,
        curve,
    })
}

/// Cross-validates lambda, then refits on all rows at the selected value.
pub fn fit_cv(fm: &FeatureMatrix, config: &LassoConfig) -> Result<LassoFit> {
    let cv = cv_select_lambda(fm.x.view(), fm.y.view(), &fm.groups, config)?;
    // refit along the grid prefix so the chosen solution is warm-started like in CV
    let lambdas: Vec<f64> = cv.curve[..=cv.best_index].iter().map(|c| c.0).collect();
    let mut path = fit_path(fm.x.view(), fm.y.view(), &fm.groups, &lambdas, config)?;
    let mut fit = path.pop().expect("nonempty path");
    fit.cv_curve = cv.curve;
    Ok(fit)
}

pub fn write_cv_curve_csv(path: &Path, curve: &[(f64, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["lambda", "mean_val_mse"])
        .map_err(|e| Error::csv(path, e))?;
    for (l, m) in curve {
        w.write_record([l.to_string(), m.to_string()])
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Predicted percentage change of the response's exponential per unit increase.
pub fn pct_change(beta: f64) -> f64 {
    beta.exp_m1() * 100.0
}

fn fmt_pct(v: f64) -> String {
    let s = format!("{v:.1}");
    if s == "-0.0" {
        "0.0".into()
    } else {
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub feature: String,
    pub beta: f64,
    pub pct_change: f64,
    pub selected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientReport {
    pub rows: Vec<CoefficientRow>,
    /// `(min pct, max pct, selected)` over the author indicators.
    pub authors: Option<(f64, f64, bool)>,
}

/// Transformed coefficients; author indicators are summarized as a range.
pub fn report_coefficients(fit: &LassoFit, fm: &FeatureMatrix) -> CoefficientReport {
    let author_group = fm.author_group();
    let mut rows = Vec::new();
    let mut authors = None;
    for (gi, g) in fm.groups.iter().enumerate() {
        let selected = fit.active_groups.contains(&gi);
        if Some(gi) == author_group {
            let pcts: Vec<f64> = g.iter().map(|&j| pct_change(fit.beta[j])).collect();
            let lo = pcts.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = pcts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            authors = Some((lo, hi, selected));
            continue;
        }
        for &j in g {
            rows.push(CoefficientRow {
                feature: fm.columns[j].clone(),
                beta: fit.beta[j],
                pct_change: pct_change(fit.beta[j]),
                selected,
            });
        }
    }
    CoefficientReport { rows, authors }
}

pub fn write_report_csv(path: &Path, report: &CoefficientReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record(["feature", "beta", "pct_change", "selected"])
        .map_err(|e| Error::csv(path, e))?;
    for r in &report.rows {
        w.write_record([
            r.feature.clone(),
            (r.beta + 0.0).to_string(),
            fmt_pct(r.pct_change),
            r.selected.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    if let Some((lo, hi, sel)) = report.authors {
        w.write_record([
            "authors".to_owned(),
            fmt_pct(lo),
            fmt_pct(hi),
            sel.to_string(),
        ])
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}
