//! Binary logistic regression baseline.
//!
//! `log p/(1−p) = β0 + Σ βi·xi`, fitted by iteratively reweighted least
//! squares with step-halving, pruned by backward Wald elimination. Cases with
//! any missing predictor are deleted listwise, both when fitting and when
//! predicting.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::woe::logistic;

/// Coefficients beyond this magnitude are taken as a sign of separation.
pub const DIVERGENCE_LIMIT: f64 = 20.0;

pub const INTERCEPT: &str = "(intercept)";

/// One case before listwise deletion.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignRow {
    pub id: String,
    pub values: Vec<Option<f64>>,
    pub response: bool,
}

/// Complete-case predictor matrix with a binary response.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    names: Vec<String>,
    rows: Vec<Vec<f64>>,
    response: Vec<bool>,
    ids: Vec<String>,
    dropped: Vec<String>,
}

impl DesignMatrix {
    /// Builds the matrix from rows, deleting any row with a missing or
    /// non-finite value. Deleted ids are kept in [`dropped`](Self::dropped).
    pub fn from_rows(names: Vec<String>, input: Vec<DesignRow>) -> Result<Self> {
        let mut rows = Vec::new();
        let mut response = Vec::new();
        let mut ids = Vec::new();
        let mut dropped = Vec::new();
        for row in input {
            if row.values.len() != names.len() {
                return Err(Error::InvalidConfig(format!(
                    "row `{}` has {} values for {} predictors",
                    row.id,
                    row.values.len(),
                    names.len()
                )));
            }
            let complete: Option<Vec<f64>> = row.values.iter().map(|v| v.filter(|x| x.is_finite())).collect();
            match complete {
                Some(values) => {
                    rows.push(values);
                    response.push(row.response);
                    ids.push(row.id);
                }
                None => dropped.push(row.id),
            }
        }
        let positives = response.iter().filter(|&&r| r).count();
        if positives == 0 || positives == response.len() {
            return Err(Error::SingleClass);
        }
        Ok(DesignMatrix {
            names,
            rows,
            response,
            ids,
            dropped,
        })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn dropped(&self) -> &[String] {
        &self.dropped
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Keeps only the named predictor columns.
    pub fn select(&self, keep: &[String]) -> Result<DesignMatrix> {
        let idx = keep
            .iter()
            .map(|k| {
                self.names
                    .iter()
                    .position(|n| n == k)
                    .ok_or_else(|| Error::UnknownVariable(k.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(DesignMatrix {
            names: keep.to_vec(),
            rows: self.rows.iter().map(|r| idx.iter().map(|&i| r[i]).collect()).collect(),
            response: self.response.clone(),
            ids: self.ids.clone(),
            dropped: self.dropped.clone(),
        })
    }

    /// Predictors with a leading column of ones.
    fn with_intercept(&self) -> DMatrix<f64> {
        let p = self.names.len() + 1;
        DMatrix::from_fn(self.rows.len(), p, |i, j| if j == 0 { 1.0 } else { self.rows[i][j - 1] })
    }

    fn response_vector(&self) -> DVector<f64> {
        DVector::from_iterator(self.response.len(), self.response.iter().map(|&r| f64::from(u8::from(r))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    pub max_iter: usize,
    pub tol: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iter: 50,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
    pub names: Vec<String>,
    /// Standard errors, intercept first.
    pub std_errors: Vec<f64>,
    pub log_likelihood: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn log_likelihood(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let eta = x * beta;
    eta.iter()
        .zip(y.iter())
        .map(|(&e, &yi)| {
            // y·η − ln(1 + e^η), computed without overflow
            let softplus = if e > 0.0 { e + (-e).exp().ln_1p() } else { e.exp().ln_1p() };
            yi * e - softplus
        })
        .sum()
}

fn score_and_information(x: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let mu = (x * beta).map(logistic);
    let w = mu.map(|m| m * (1.0 - m));
    let score = x.transpose() * (y - &mu);
    let mut weighted = x.clone();
    for (mut row, wi) in weighted.row_iter_mut().zip(w.iter()) {
        row *= *wi;
    }
    (score, x.transpose() * weighted)
}

/// Maximum-likelihood fit by IRLS.
///
/// Iteration stops once the largest score component or the largest
/// parameter step drops below `cfg.tol`. Hitting `max_iter` first yields a
/// model flagged `converged = false`.
pub fn fit(design: &DesignMatrix, cfg: &FitConfig) -> Result<LogisticModel> {
    let x = design.with_intercept();
    let y = design.response_vector();
    let p = x.ncols();
    if x.nrows() < p {
        return Err(Error::RankDeficient);
    }
    let sv = x.clone().singular_values();
    let largest = sv.max();
    if largest <= 0.0 || sv.min() <= largest * 1e-10 {
        return Err(Error::RankDeficient);
    }

    let name_of = |j: usize| if j == 0 { INTERCEPT.to_string() } else { design.names[j - 1].clone() };
    let mut beta = DVector::zeros(p);
    let mut ll = log_likelihood(&x, &y, &beta);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < cfg.max_iter {
        let (score, info) = score_and_information(&x, &y, &beta);
        if score.amax() < cfg.tol {
            converged = true;
            break;
        }
        iterations += 1;
        let step = info
            .cholesky()
            .map(|c| c.solve(&score))
            .ok_or(Error::RankDeficient)?;
        let mut scale = 1.0;
        let mut candidate = &beta + &step;
        let mut candidate_ll = log_likelihood(&x, &y, &candidate);
        for _ in 0..30 {
            if candidate_ll >= ll - 1e-12 {
                break;
            }
            scale *= 0.5;
            candidate = &beta + &step * scale;
            candidate_ll = log_likelihood(&x, &y, &candidate);
        }
        let moved = (&candidate - &beta).amax();
        beta = candidate;
        ll = candidate_ll;
        if let Some(j) = beta.iter().position(|b| b.abs() > DIVERGENCE_LIMIT) {
            return Err(Error::Separation(name_of(j)));
        }
        if moved < cfg.tol {
            converged = true;
            break;
        }
    }

    let (_, info) = score_and_information(&x, &y, &beta);
    let std_errors = match info.try_inverse() {
        Some(cov) => (0..p).map(|j| cov[(j, j)].max(0.0).sqrt()).collect(),
        None => vec![f64::INFINITY; p],
    };
    Ok(LogisticModel {
        intercept: beta[0],
        coefficients: beta.iter().skip(1).copied().collect(),
        names: design.names.clone(),
        std_errors,
        log_likelihood: ll,
        iterations,
        converged,
    })
}

impl LogisticModel {
    /// Two-sided Wald p-values for the predictors (intercept excluded).
    pub fn p_values(&self) -> Vec<f64> {
        let normal = Normal::standard();
        self.coefficients
            .iter()
            .zip(&self.std_errors[1..])
            .map(|(&b, &se)| {
                if se.is_finite() && se > 0.0 {
                    2.0 * normal.sf((b / se).abs())
                } else {
                    1.0
                }
            })
            .collect()
    }

    pub fn linear_predictor(&self, values: &[f64]) -> f64 {
        self.intercept + self.coefficients.iter().zip(values).map(|(b, x)| b * x).sum::<f64>()
    }

    /// Response probability for a case; any missing retained predictor makes
    /// the case undiagnosable.
    pub fn predict<F>(&self, lookup: F) -> Result<f64>
    where
        F: Fn(&str) -> Option<f64>,
    {
        let values = self
            .names
            .iter()
            .map(|n| lookup(n).filter(|x| x.is_finite()).ok_or_else(|| Error::Undiagnosable(n.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(logistic(self.linear_predictor(&values)))
    }

    /// `term,coefficient` with the intercept first.
    pub fn to_csv(&self) -> String {
        let mut out = format!("term,coefficient\n{INTERCEPT},{}\n", self.intercept);
        for (n, b) in self.names.iter().zip(&self.coefficients) {
            out.push_str(&format!("{n},{b}\n"));
        }
        out
    }

    /// Reads coefficients written by [`to_csv`](Self::to_csv). Fit
    /// diagnostics are not stored and come back empty.
    pub fn from_csv<R: Read>(reader: R, source: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut terms = Vec::new();
        for record in rdr.records() {
            let record = record?;
            let line = record.position().map_or(0, |p| p.line());
            let b: f64 = record[1]
                .parse()
                .map_err(|_| Error::parse(source, line, format!("`{}` is not a number", &record[1])))?;
            terms.push((record[0].to_string(), b));
        }
        match terms.split_first() {
            Some(((first, b0), rest)) if first == INTERCEPT => Ok(LogisticModel {
                intercept: *b0,
                coefficients: rest.iter().map(|t| t.1).collect(),
                names: rest.iter().map(|t| t.0.clone()).collect(),
                std_errors: vec![f64::NAN; terms.len()],
                log_likelihood: f64::NAN,
                iterations: 0,
                converged: true,
            }),
            _ => Err(Error::parse(source, 2, format!("first term must be `{INTERCEPT}`"))),
        }
    }

    pub fn from_csv_path(path: &Path) -> Result<Self> {
        Self::from_csv(std::fs::File::open(path)?, &path.display().to_string())
    }
}

/// Backward elimination by Wald test.
///
/// While some predictor's p-value exceeds `1 − significance`, the worst one
/// is dropped and the model refitted. The intercept always stays.
pub fn prune(model: &LogisticModel, design: &DesignMatrix, significance: f64, cfg: &FitConfig) -> Result<LogisticModel> {
    if !(significance > 0.0 && significance < 1.0) {
        return Err(Error::InvalidConfig(format!("significance {significance} outside (0, 1)")));
    }
    let limit = 1.0 - significance;
    let mut current = model.clone();
    loop {
        let worst = current
            .p_values()
            .into_iter()
            .enumerate()
            .filter(|(_, p)| *p > limit)
            .max_by(|a, b| a.1.total_cmp(&b.1));
        let Some((drop, _)) = worst else {
            return Ok(current);
        };
        let keep: Vec<String> = current
            .names
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != drop)
            .map(|(_, n)| n.clone())
            .collect();
        current = fit(&design.select(&keep)?, cfg)?;
    }
}
