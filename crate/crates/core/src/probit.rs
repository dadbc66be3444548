//! Lagged probit recession models.
//!
//! Three nested specifications share one design builder: common factors
//! only; factors plus the two survey indices; and the proposed model, which
//! adds the news z-score and its interactions with the surveys. The
//! proposed model's product term `γ₁·z·(1 + γ₂·mics + γ₃·pmi)` is estimated
//! in its linear form `δ₁·z + δ₂·z·mics + δ₃·z·pmi` and mapped back with
//! [`proposed_gammas`].

use std::fmt;
use std::fs;
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor_panel::{FactorSet, SurveySeries};
use crate::indicator::{RecessionSeries, SentimentIndex};
use crate::month::YearMonth;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    FactorsOnly,
    FactorsSurvey,
    Proposed,
}

impl ModelKind {
    pub const ALL: [ModelKind; 3] = [ModelKind::FactorsOnly, ModelKind::FactorsSurvey, ModelKind::Proposed];

    pub fn label(self) -> &'static str {
        match self {
            ModelKind::FactorsOnly => "factors_only",
            ModelKind::FactorsSurvey => "factors_survey",
            ModelKind::Proposed => "proposed",
        }
    }

    /// Model number as used in result tables (1, 2, 3).
    pub fn number(self) -> usize {
        match self {
            ModelKind::FactorsOnly => 1,
            ModelKind::FactorsSurvey => 2,
            ModelKind::Proposed => 3,
        }
    }

    fn uses_surveys(self) -> bool {
        self != ModelKind::FactorsOnly
    }

    fn uses_news(self) -> bool {
        self == ModelKind::Proposed
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label() == s)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub kind: ModelKind,
    /// Forecast horizon h in months.
    pub horizon: usize,
    pub k_factors: usize,
}

impl ModelSpec {
    pub fn columns(&self) -> Vec<String> {
        let mut cols = vec!["intercept".to_string()];
        cols.extend((1..=self.k_factors).map(|i| format!("f{i}")));
        if self.kind.uses_surveys() {
            cols.extend(["mics".into(), "pmi".into()]);
        }
        if self.kind.uses_news() {
            cols.extend(["zsent".into(), "zsent_x_mics".into(), "zsent_x_pmi".into()]);
        }
        cols
    }
}

/// Aligned inputs shared by every specification.
#[derive(Debug, Clone)]
pub struct ModelInputs {
    pub factors: FactorSet,
    pub surveys: SurveySeries,
    pub index: SentimentIndex,
    pub rec: RecessionSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    /// Target month t of each row; regressors are dated t − horizon.
    pub months: Vec<YearMonth>,
    pub horizon: usize,
    pub y: Vec<f64>,
    pub columns: Vec<String>,
    pub x: DMatrix<f64>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.y.len()
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    /// Rows at the given positions, in that order.
    pub fn select_rows(&self, rows: &[usize]) -> DesignMatrix {
        DesignMatrix {
            months: rows.iter().map(|&i| self.months[i]).collect(),
            horizon: self.horizon,
            y: rows.iter().map(|&i| self.y[i]).collect(),
            columns: self.columns.clone(),
            x: self.x.select_rows(rows),
        }
    }

    /// Regressor date of row `i`.
    pub fn regressor_month(&self, i: usize) -> YearMonth {
        self.months[i].offset(-(self.horizon as i64))
    }
}

struct RowSource {
    factors: Vec<f64>,
    mics: Option<f64>,
    pmi: Option<f64>,
    zsent: Option<f64>,
}

fn source_at(inputs: &ModelInputs, month: YearMonth, k: usize) -> Option<RowSource> {
    let f = inputs.factors.row(month)?;
    let s = inputs.surveys.position(month);
    let z = inputs.index.position(month);
    Some(RowSource {
        factors: f[..k].to_vec(),
        mics: s.and_then(|i| inputs.surveys.mics[i]),
        pmi: s.and_then(|i| inputs.surveys.pmi[i]),
        zsent: z.and_then(|i| inputs.index.zsent.get(i).copied().flatten()),
    })
}

fn row_complete(src: &RowSource, kind: ModelKind) -> bool {
    (!kind.uses_surveys() || (src.mics.is_some() && src.pmi.is_some())) && (!kind.uses_news() || src.zsent.is_some())
}

fn check_k(inputs: &ModelInputs, spec: &ModelSpec) -> Result<()> {
    if spec.k_factors > inputs.factors.k() {
        return Err(Error::InvalidConfig(format!(
            "{} factors requested, {} available",
            spec.k_factors,
            inputs.factors.k()
        )));
    }
    if spec.horizon == 0 {
        return Err(Error::InvalidConfig("horizon must be at least 1".into()));
    }
    Ok(())
}

/// Target months with every regressor of `kinds` observed at t − h.
fn usable_targets(inputs: &ModelInputs, kinds: &[ModelKind], horizon: usize, k: usize) -> Result<Vec<YearMonth>> {
    let h = horizon as i64;
    let lagged_sources = inputs.factors.months.iter().map(|m| m.offset(h));
    let overlap = lagged_sources.clone().any(|m| inputs.rec.get(m).is_some());
    if !overlap {
        return Err(Error::NoOverlap);
    }
    let targets: Vec<YearMonth> = inputs
        .rec
        .months
        .iter()
        .copied()
        .filter(|t| {
            source_at(inputs, t.offset(-h), k).is_some_and(|src| kinds.iter().all(|&kind| row_complete(&src, kind)))
        })
        .collect();
    if targets.is_empty() {
        return Err(Error::EmptyAfterLag { horizon });
    }
    Ok(targets)
}

fn build_on(inputs: &ModelInputs, spec: &ModelSpec, targets: &[YearMonth]) -> DesignMatrix {
    let h = spec.horizon as i64;
    let sources: Vec<RowSource> = targets
        .iter()
        .map(|t| source_at(inputs, t.offset(-h), spec.k_factors).expect("usable target"))
        .collect();
    let standardized = |get: fn(&RowSource) -> Option<f64>| -> Vec<f64> {
        let raw: Vec<f64> = sources.iter().map(|s| get(s).unwrap_or(0.0)).collect();
        let mean = stats::mean(&raw);
        let sd = if raw.len() > 1 {
            stats::sample_variance(&raw).sqrt()
        } else {
            0.0
        };
        raw.iter()
            .map(|x| if sd > 0.0 { (x - mean) / sd } else { 0.0 })
            .collect()
    };
    let (mics, pmi) = if spec.kind.uses_surveys() {
        (standardized(|s| s.mics), standardized(|s| s.pmi))
    } else {
        (vec![], vec![])
    };
    let columns = spec.columns();
    let mut x = DMatrix::zeros(targets.len(), columns.len());
    for (i, src) in sources.iter().enumerate() {
        let mut row = vec![1.0];
        row.extend_from_slice(&src.factors);
        if spec.kind.uses_surveys() {
            row.extend([mics[i], pmi[i]]);
        }
        if spec.kind.uses_news() {
            let z = src.zsent.expect("usable target");
            row.extend([z, z * mics[i], z * pmi[i]]);
        }
        for (j, v) in row.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    DesignMatrix {
        months: targets.to_vec(),
        horizon: spec.horizon,
        y: targets
            .iter()
            .map(|t| inputs.rec.get(*t).expect("target has outcome") as f64)
            .collect(),
        columns,
        x,
    }
}

/// Builds the h-lagged design for one specification. Survey regressors are
/// standardized over the rows of the design before the interactions are
/// formed; rows with any missing regressor are dropped.
pub fn build_design(inputs: &ModelInputs, spec: &ModelSpec) -> Result<DesignMatrix> {
    check_k(inputs, spec)?;
    let targets = usable_targets(inputs, &[spec.kind], spec.horizon, spec.k_factors)?;
    Ok(build_on(inputs, spec, &targets))
}

/// Builds designs for several specifications on their common rows, so that
/// nested models are estimated on the same sample.
pub fn build_aligned(inputs: &ModelInputs, specs: &[ModelSpec]) -> Result<Vec<DesignMatrix>> {
    let Some(first) = specs.first() else {
        return Ok(vec![]);
    };
    if specs.iter().any(|s| s.horizon != first.horizon) {
        return Err(Error::InvalidConfig("aligned designs need a common horizon".into()));
    }
    for s in specs {
        check_k(inputs, s)?;
    }
    let k = specs.iter().map(|s| s.k_factors).max().unwrap_or(0);
    let kinds: Vec<ModelKind> = specs.iter().map(|s| s.kind).collect();
    let targets = usable_targets(inputs, &kinds, first.horizon, k)?;
    Ok(specs.iter().map(|s| build_on(inputs, s, &targets)).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbitOptions {
    pub max_iterations: usize,
    /// Convergence threshold on the max-norm of the score.
    pub gradient_tolerance: f64,
}

impl Default for ProbitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 100,
            gradient_tolerance: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbitFit {
    pub columns: Vec<String>,
    pub coefficients: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub vcov: DMatrix<f64>,
    pub log_likelihood: f64,
    pub n_obs: usize,
    pub converged: bool,
    pub iterations: usize,
    pub max_abs_gradient: f64,
    /// Target months the model was fitted on.
    pub sample: Vec<YearMonth>,
}

impl ProbitFit {
    pub fn n_params(&self) -> usize {
        self.coefficients.len()
    }

    pub fn aic(&self) -> f64 {
        aic(self.log_likelihood, self.n_params())
    }

    pub fn bic(&self) -> f64 {
        bic(self.log_likelihood, self.n_params(), self.n_obs)
    }

    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|i| self.coefficients[i])
    }

    /// Turns a non-converged fit into [`Error::NonConvergence`].
    pub fn ensure_converged(&self) -> Result<&Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::NonConvergence {
                iterations: self.iterations,
                gradient: self.max_abs_gradient,
            })
        }
    }
}

/// Log-likelihood `Σ y ln Φ(xβ) + (1 − y) ln(1 − Φ(xβ))`.
pub fn log_likelihood(x: &DMatrix<f64>, y: &[f64], beta: &[f64]) -> f64 {
    let b = DVector::from_column_slice(beta);
    let eta = x * b;
    eta.iter()
        .zip(y)
        .map(|(&e, &yi)| stats::ln_norm_cdf(if yi > 0.5 { e } else { -e }))
        .sum()
}

/// Analytic score (gradient of [`log_likelihood`]).
pub fn score(x: &DMatrix<f64>, y: &[f64], beta: &[f64]) -> Vec<f64> {
    evaluate(x, y, &DVector::from_column_slice(beta))
        .1
        .iter()
        .copied()
        .collect()
}

/// (log-likelihood, score, observed information).
fn evaluate(x: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>) -> (f64, DVector<f64>, DMatrix<f64>) {
    let (n, p) = x.shape();
    let eta = x * beta;
    let mut ll = 0.0;
    let mut g = DVector::zeros(p);
    let mut weights = DVector::zeros(n);
    let mut gw = DVector::zeros(n);
    for i in 0..n {
        let q = if y[i] > 0.5 { 1.0 } else { -1.0 };
        let u = q * eta[i];
        ll += stats::ln_norm_cdf(u);
        let lambda = stats::inverse_mills(u);
        gw[i] = q * lambda;
        weights[i] = lambda * (lambda + u);
    }
    g.gemv_tr(1.0, x, &gw, 0.0);
    let mut wx = x.clone();
    for (i, mut row) in wx.row_iter_mut().enumerate() {
        row *= weights[i];
    }
    let info = x.transpose() * wx;
    (ll, g, info)
}

fn invert_psd(m: &DMatrix<f64>) -> DMatrix<f64> {
    if let Some(ch) = Cholesky::new(m.clone()) {
        return ch.inverse();
    }
    // Pseudo-inverse on the non-negligible spectrum.
    let eig = SymmetricEigen::new(m.clone());
    let max = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
    let inv = eig.eigenvalues.map(|l| if l > 1e-12 * max { 1.0 / l } else { 0.0 });
    &eig.eigenvectors * DMatrix::from_diagonal(&inv) * eig.eigenvectors.transpose()
}

fn check_identifiable(d: &DesignMatrix) -> Result<()> {
    let (n, p) = d.x.shape();
    if n < p + 1 {
        return Err(Error::TooFewRows { rows: n, columns: p });
    }
    let ones = d.y.iter().filter(|&&v| v > 0.5).count();
    if ones == 0 || ones == n {
        return Err(Error::OneClassOnly);
    }
    let gram = d.x.transpose() * &d.x;
    let eig = SymmetricEigen::new(gram).eigenvalues;
    let max = eig.iter().fold(0.0f64, |a, &b| a.max(b));
    let min = eig.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(max > 0.0) || min <= 1e-12 * max {
        return Err(Error::Noninvertible);
    }
    Ok(())
}

/// Maximum-likelihood probit fit by Newton–Raphson with step halving, started
/// at zero.
pub fn fit_probit(d: &DesignMatrix) -> Result<ProbitFit> {
    fit_probit_with(d, None, &ProbitOptions::default())
}

/// Fit from an optional warm start. A fit that hits the iteration limit or
/// stalls is returned with `converged = false` rather than as an error.
pub fn fit_probit_with(d: &DesignMatrix, start: Option<&[f64]>, opts: &ProbitOptions) -> Result<ProbitFit> {
    check_identifiable(d)?;
    let p = d.n_cols();
    let mut beta = match start {
        Some(s) if s.len() == p => DVector::from_column_slice(s),
        _ => DVector::zeros(p),
    };
    let (mut ll, mut g, mut info) = evaluate(&d.x, &d.y, &beta);
    if start.is_some() {
        // Fall back to the origin if the warm start is worse than it.
        let zero = DVector::zeros(p);
        let (ll0, g0, info0) = evaluate(&d.x, &d.y, &zero);
        if !(ll >= ll0) {
            (beta, ll, g, info) = (zero, ll0, g0, info0);
        }
    }
    let mut iterations = 0;
    let mut converged = false;
    loop {
        let Some(ch) = Cholesky::new(info.clone()) else {
            log::debug!("probit: information matrix lost definiteness at iteration {iterations}");
            break;
        };
        let step = ch.solve(&g);
        // A vanishing score alone is not enough: under separation the score
        // decays while the coefficients diverge, so the Newton step must be
        // small too.
        if g.amax() < opts.gradient_tolerance && step.amax() <= 1e-6 * (1.0 + beta.amax()) {
            converged = true;
            break;
        }
        if iterations >= opts.max_iterations {
            break;
        }
        let decrement = g.dot(&step);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            let cand = &beta + &step * t;
            let ll_c = log_likelihood(&d.x, &d.y, cand.as_slice());
            // Inside the quadratic region the predicted gain is below
            // rounding noise in ℓ; take the full step.
            if ll_c >= ll || (t == 1.0 && decrement < 1e-12 * (1.0 + ll.abs())) {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        let Some(next) = accepted else {
            break;
        };
        iterations += 1;
        beta = next;
        (ll, g, info) = evaluate(&d.x, &d.y, &beta);
    }
    if !converged {
        log::warn!(
            "probit did not converge after {iterations} iterations (max |gradient| {:.3e}); possible quasi-separation",
            g.amax()
        );
    }
    let vcov = invert_psd(&info);
    let standard_errors = (0..p).map(|i| vcov[(i, i)].max(0.0).sqrt()).collect();
    Ok(ProbitFit {
        columns: d.columns.clone(),
        coefficients: beta.iter().copied().collect(),
        standard_errors,
        vcov,
        log_likelihood: ll,
        n_obs: d.n_rows(),
        converged,
        iterations,
        max_abs_gradient: g.amax(),
        sample: d.months.clone(),
    })
}

/// `Φ(xβ̂)` for every row of a design with the fitted column layout.
pub fn predict(fit: &ProbitFit, d: &DesignMatrix) -> Result<Vec<f64>> {
    if d.columns != fit.columns {
        return Err(Error::SchemaMismatch(format!(
            "expected [{}], got [{}]",
            fit.columns.join(", "),
            d.columns.join(", ")
        )));
    }
    Ok(predict_rows(fit, &d.x))
}

pub fn predict_rows(fit: &ProbitFit, x: &DMatrix<f64>) -> Vec<f64> {
    let eta = x * DVector::from_column_slice(&fit.coefficients);
    eta.iter().map(|&e| stats::norm_cdf(e)).collect()
}

pub fn aic(log_likelihood: f64, n_params: usize) -> f64 {
    2.0 * n_params as f64 - 2.0 * log_likelihood
}

pub fn bic(log_likelihood: f64, n_params: usize, n_obs: usize) -> f64 {
    if n_params == 0 {
        return -2.0 * log_likelihood;
    }
    n_params as f64 * (n_obs as f64).ln() - 2.0 * log_likelihood
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub stat: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Likelihood-ratio χ² test from the two log-likelihoods and parameter counts.
pub fn lr_test(ll_restricted: f64, p_restricted: usize, ll_full: f64, p_full: usize) -> TestResult {
    let stat = (2.0 * (ll_full - ll_restricted)).max(0.0);
    let df = p_full.saturating_sub(p_restricted);
    TestResult {
        stat,
        df,
        p_value: stats::chi2_sf(stat, df),
    }
}

/// Likelihood-ratio test of a restricted model nested in a full one.
pub fn nested_lr_test(restricted: &ProbitFit, full: &ProbitFit) -> Result<TestResult> {
    if let Some(c) = restricted.columns.iter().find(|c| !full.columns.contains(c)) {
        return Err(Error::NotNested(format!("column {c} missing from the full model")));
    }
    if restricted.n_obs != full.n_obs || restricted.sample != full.sample {
        return Err(Error::SampleMismatch);
    }
    Ok(lr_test(
        restricted.log_likelihood,
        restricted.n_params(),
        full.log_likelihood,
        full.n_params(),
    ))
}

/// Wald test that the named coefficients are jointly zero.
pub fn wald_test(fit: &ProbitFit, names: &[&str]) -> Result<TestResult> {
    let idx = names
        .iter()
        .map(|n| {
            fit.columns
                .iter()
                .position(|c| c == n)
                .ok_or_else(|| Error::NotNested(format!("column {n} not in model")))
        })
        .collect::<Result<Vec<_>>>()?;
    let b = DVector::from_iterator(idx.len(), idx.iter().map(|&i| fit.coefficients[i]));
    let v = DMatrix::from_fn(idx.len(), idx.len(), |a, c| fit.vcov[(idx[a], idx[c])]);
    let vinv = Cholesky::new(v).ok_or(Error::Noninvertible)?.inverse();
    let stat = (b.transpose() * vinv * &b)[(0, 0)];
    Ok(TestResult {
        stat,
        df: idx.len(),
        p_value: stats::chi2_sf(stat, idx.len()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gammas {
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma3: f64,
}

/// Maps the linear news coefficients (δ₁, δ₂, δ₃) back to the product form
/// γ₁ = δ₁, γ₂ = δ₂/δ₁, γ₃ = δ₃/δ₁. `None` unless the fit has the news
/// columns and |δ₁| > 1e-8.
pub fn proposed_gammas(fit: &ProbitFit) -> Option<Gammas> {
    let d1 = fit.coefficient("zsent")?;
    let d2 = fit.coefficient("zsent_x_mics")?;
    let d3 = fit.coefficient("zsent_x_pmi")?;
    (d1.abs() > 1e-8).then(|| Gammas {
        gamma1: d1,
        gamma2: d2 / d1,
        gamma3: d3 / d1,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub z: f64,
    pub p_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LrTestReport {
    pub restricted: ModelKind,
    pub full: ModelKind,
    pub test: String,
    pub stat: f64,
    pub df: usize,
    pub p_value: f64,
}

/// JSON fit report laid out like a regression table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: ModelKind,
    pub model_number: usize,
    pub horizon: usize,
    pub n_obs: usize,
    pub log_likelihood: f64,
    pub aic: f64,
    pub bic: f64,
    pub converged: bool,
    pub iterations: usize,
    pub max_abs_gradient: f64,
    pub coefficients: Vec<CoefficientRow>,
    pub gammas: Option<Gammas>,
    pub lr_tests: Vec<LrTestReport>,
}

impl FitReport {
    pub fn new(kind: ModelKind, horizon: usize, fit: &ProbitFit) -> Self {
        let coefficients = fit
            .columns
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let (est, se) = (fit.coefficients[i], fit.standard_errors[i]);
                let z = est / se;
                CoefficientRow {
                    name: name.clone(),
                    estimate: est,
                    std_error: se,
                    z,
                    p_value: 2.0 * stats::norm_sf(z.abs()),
                }
            })
            .collect();
        Self {
            model: kind,
            model_number: kind.number(),
            horizon,
            n_obs: fit.n_obs,
            log_likelihood: fit.log_likelihood,
            aic: fit.aic(),
            bic: fit.bic(),
            converged: fit.converged,
            iterations: fit.iterations,
            max_abs_gradient: fit.max_abs_gradient,
            coefficients,
            gammas: proposed_gammas(fit),
            lr_tests: vec![],
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }
}
