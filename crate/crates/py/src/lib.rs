//! Python bindings for the recession-signal pipeline.

use chrono::NaiveDate;
use nalgebra::DMatrix;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use recession_signal::corpus::{self, Document, MonthlySlice};
use recession_signal::evaluation::{self, Loss};
use recession_signal::factor_panel::{self, RawPanel};
use recession_signal::indicator::{self, WindowMode};
use recession_signal::lda::{self, LdaConfig};
use recession_signal::lexicon::{self, Lexicon};
use recession_signal::probit::{self, DesignMatrix, ProbitFit};
use recession_signal::topic_geometry::{self, DistanceMatrix, LogBase};
use recession_signal::YearMonth;

fn err(e: recession_signal::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn base(natural: bool) -> LogBase {
    if natural {
        LogBase::Natural
    } else {
        LogBase::Two
    }
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<DMatrix<f64>> {
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != p) {
        return Err(PyValueError::new_err("ragged matrix"));
    }
    Ok(DMatrix::from_fn(n, p, |i, j| rows[i][j]))
}

fn rows_of(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn start_month() -> YearMonth {
    YearMonth::new(2000, 1).expect("valid month")
}

/// Normalize, tokenize and drop stopwords (bundled English list by default).
#[pyfunction]
#[pyo3(signature = (text, stopwords=None))]
fn preprocess(text: &str, stopwords: Option<Vec<String>>) -> Vec<String> {
    let sw = match stopwords {
        Some(words) => words.into_iter().collect(),
        None => corpus::default_stopwords(),
    };
    corpus::preprocess(text, &sw)
}

/// Net lexicon polarity per token of a document.
#[pyfunction]
fn score_document(tokens: Vec<String>, positive: Vec<String>, negative: Vec<String>) -> PyResult<f64> {
    let lex = Lexicon::new(positive, negative).map_err(err)?;
    Ok(lexicon::score_document(&tokens, &lex))
}

#[pyfunction]
#[pyo3(signature = (p, q, natural=false))]
fn js_divergence(p: Vec<f64>, q: Vec<f64>, natural: bool) -> PyResult<f64> {
    topic_geometry::js_divergence_in(&p, &q, base(natural)).map_err(err)
}

#[pyfunction]
#[pyo3(signature = (p, q, natural=false))]
fn js_distance(p: Vec<f64>, q: Vec<f64>, natural: bool) -> PyResult<f64> {
    topic_geometry::js_distance_in(&p, &q, base(natural)).map_err(err)
}

/// Pairwise Jensen–Shannon distances between topic-word rows.
#[pyfunction]
#[pyo3(signature = (phi, natural=false))]
fn distance_matrix(phi: Vec<Vec<f64>>, natural: bool) -> PyResult<Vec<Vec<f64>>> {
    let d = topic_geometry::distance_matrix_in(&phi, base(natural)).map_err(err)?;
    Ok(rows_of(d.as_matrix()))
}

/// Standard deviation of all entries of a distance matrix.
#[pyfunction]
fn coherence(distances: Vec<Vec<f64>>) -> PyResult<f64> {
    let d = DistanceMatrix::from_matrix(matrix(&distances)?).map_err(err)?;
    Ok(topic_geometry::coherence(&d))
}

/// Classical MDS of a distance matrix into two dimensions.
#[pyfunction]
fn project_2d(distances: Vec<Vec<f64>>) -> PyResult<Vec<(f64, f64)>> {
    let d = DistanceMatrix::from_matrix(matrix(&distances)?).map_err(err)?;
    Ok(topic_geometry::project_2d(&d).map_err(err)?.points)
}

/// Collapsed Gibbs LDA on tokenized documents. Returns a dict with
/// `vocabulary`, `phi` and `theta`.
#[pyfunction]
#[pyo3(signature = (documents, topics=30, iterations=1000, burn_in=500, thin=10, alpha=None, beta=0.1, seed=0))]
#[allow(clippy::too_many_arguments)]
fn fit_lda<'py>(
    py: Python<'py>,
    documents: Vec<Vec<String>>,
    topics: usize,
    iterations: usize,
    burn_in: usize,
    thin: usize,
    alpha: Option<f64>,
    beta: f64,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let date = NaiveDate::from_ymd_opt(2000, 1, 1).expect("valid date");
    let slice = MonthlySlice {
        month: start_month(),
        documents: documents
            .into_iter()
            .enumerate()
            .map(|(i, tokens)| Document {
                id: i.to_string(),
                date,
                tokens,
            })
            .collect(),
    };
    let config = LdaConfig {
        topics,
        alpha,
        beta,
        iterations,
        burn_in,
        thin,
        single_sample: false,
        seed,
    };
    let model = py.detach(|| lda::fit_lda(&slice, &config)).map_err(err)?;
    let out = PyDict::new(py);
    out.set_item("vocabulary", model.vocabulary)?;
    out.set_item("phi", model.phi)?;
    out.set_item("theta", model.theta)?;
    Ok(out)
}

/// Rolling z-score over the trailing `window` months (current included);
/// `None` marks missing values.
#[pyfunction]
#[pyo3(signature = (values, window=24, lagged=false))]
fn rolling_zscore(values: Vec<Option<f64>>, window: usize, lagged: bool) -> PyResult<Vec<Option<f64>>> {
    let mode = if lagged {
        WindowMode::Lagged
    } else {
        WindowMode::Inclusive
    };
    indicator::rolling_zscore_with(&values, window, mode).map_err(err)
}

/// FRED-MD stationarity transform.
#[pyfunction]
fn apply_tcode(values: Vec<Option<f64>>, code: u8) -> PyResult<Vec<Option<f64>>> {
    factor_panel::apply_tcode(&values, code).map_err(err)
}

/// Principal-component factors of a months × series panel (`None` =
/// missing). Returns `(factors, loadings, explained_variance)`.
#[pyfunction]
#[allow(clippy::type_complexity)]
fn extract_factors(
    panel: Vec<Vec<Option<f64>>>,
    tcodes: Vec<u8>,
    k: usize,
) -> PyResult<(Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<f64>)> {
    let n_series = tcodes.len();
    if panel.iter().any(|r| r.len() != n_series) {
        return Err(PyValueError::new_err("every row needs one value per tcode"));
    }
    let months = (0..panel.len() as i64).map(|i| start_month().offset(i)).collect();
    let series = (0..n_series).map(|j| panel.iter().map(|r| r[j]).collect()).collect();
    let names = (1..=n_series).map(|j| format!("s{j}")).collect();
    let raw = RawPanel::new(months, names, series, tcodes).map_err(err)?;
    let f = factor_panel::extract_factors(&raw, k).map_err(err)?;
    Ok((rows_of(&f.factors), rows_of(&f.loadings), f.explained_variance))
}

/// A fitted probit model.
#[pyclass(name = "ProbitFit", frozen)]
struct PyProbitFit {
    inner: ProbitFit,
}

#[pymethods]
impl PyProbitFit {
    #[getter]
    fn columns(&self) -> Vec<String> {
        self.inner.columns.clone()
    }
    #[getter]
    fn coefficients(&self) -> Vec<f64> {
        self.inner.coefficients.clone()
    }
    #[getter]
    fn standard_errors(&self) -> Vec<f64> {
        self.inner.standard_errors.clone()
    }
    #[getter]
    fn log_likelihood(&self) -> f64 {
        self.inner.log_likelihood
    }
    #[getter]
    fn n_obs(&self) -> usize {
        self.inner.n_obs
    }
    #[getter]
    fn converged(&self) -> bool {
        self.inner.converged
    }
    #[getter]
    fn iterations(&self) -> usize {
        self.inner.iterations
    }
    fn aic(&self) -> f64 {
        self.inner.aic()
    }
    fn bic(&self) -> f64 {
        self.inner.bic()
    }
    /// `Φ(xβ̂)` for each row of `x`.
    fn predict(&self, x: Vec<Vec<f64>>) -> PyResult<Vec<f64>> {
        let x = matrix(&x)?;
        if x.ncols() != self.inner.coefficients.len() {
            return Err(PyValueError::new_err("column count does not match the fit"));
        }
        Ok(probit::predict_rows(&self.inner, &x))
    }
    fn __repr__(&self) -> String {
        format!(
            "ProbitFit(n_obs={}, log_likelihood={:.4}, converged={})",
            self.inner.n_obs, self.inner.log_likelihood, self.inner.converged
        )
    }
}

/// Probit maximum likelihood on a design matrix (include an intercept column
/// yourself).
#[pyfunction]
#[pyo3(signature = (x, y, columns=None))]
fn fit_probit(py: Python<'_>, x: Vec<Vec<f64>>, y: Vec<f64>, columns: Option<Vec<String>>) -> PyResult<PyProbitFit> {
    let x = matrix(&x)?;
    if x.nrows() != y.len() {
        return Err(PyValueError::new_err("x and y lengths differ"));
    }
    let columns = columns.unwrap_or_else(|| (0..x.ncols()).map(|j| format!("x{j}")).collect());
    if columns.len() != x.ncols() {
        return Err(PyValueError::new_err("one column name per column required"));
    }
    let design = DesignMatrix {
        months: (0..y.len() as i64).map(|i| start_month().offset(i)).collect(),
        horizon: 1,
        y,
        columns,
        x,
    };
    let inner = py.detach(|| probit::fit_probit(&design)).map_err(err)?;
    Ok(PyProbitFit { inner })
}

#[pyfunction]
fn aic(log_likelihood: f64, n_params: usize) -> f64 {
    probit::aic(log_likelihood, n_params)
}

#[pyfunction]
fn bic(log_likelihood: f64, n_params: usize, n_obs: usize) -> f64 {
    probit::bic(log_likelihood, n_params, n_obs)
}

/// Likelihood-ratio test; returns `(stat, df, p_value)`.
#[pyfunction]
fn lr_test(ll_restricted: f64, p_restricted: usize, ll_full: f64, p_full: usize) -> (f64, usize, f64) {
    let t = probit::lr_test(ll_restricted, p_restricted, ll_full, p_full);
    (t.stat, t.df, t.p_value)
}

/// Returns `(f1, precision, recall)` at threshold `c_star`.
#[pyfunction]
#[pyo3(signature = (probs, actual, c_star=0.5))]
fn f1_score(probs: Vec<f64>, actual: Vec<u8>, c_star: f64) -> PyResult<(f64, f64, f64)> {
    let m = evaluation::threshold_metrics(&probs, &actual, c_star).map_err(err)?;
    Ok((m.f1, m.precision, m.recall))
}

/// ROC points `(threshold, fpr, tpr)`.
#[pyfunction]
fn roc_curve(probs: Vec<f64>, actual: Vec<u8>) -> PyResult<Vec<(f64, f64, f64)>> {
    let roc = evaluation::roc_curve(&probs, &actual).map_err(err)?;
    Ok(roc.into_iter().map(|p| (p.threshold, p.fpr, p.tpr)).collect())
}

#[pyfunction]
fn auroc(probs: Vec<f64>, actual: Vec<u8>) -> PyResult<f64> {
    evaluation::auroc(&probs, &actual).map_err(err)
}

/// Diebold–Mariano test of two probability forecasts; returns `(stat, p_value)`.
#[pyfunction]
#[pyo3(signature = (actual, first, second, horizon=1, absolute=false))]
fn diebold_mariano(
    actual: Vec<u8>,
    first: Vec<f64>,
    second: Vec<f64>,
    horizon: usize,
    absolute: bool,
) -> PyResult<(f64, f64)> {
    let loss = if absolute { Loss::Absolute } else { Loss::Squared };
    let t = evaluation::diebold_mariano(&actual, &first, &second, horizon, loss).map_err(err)?;
    Ok((t.stat, t.p_value))
}

/// Moving-block bootstrap index sets.
#[pyfunction]
#[pyo3(signature = (n, block_length=24, replications=200, seed=0))]
fn block_bootstrap(n: usize, block_length: usize, replications: usize, seed: u64) -> PyResult<Vec<Vec<usize>>> {
    evaluation::block_bootstrap(n, block_length, replications, seed).map_err(err)
}

#[pymodule]
fn recession_signal_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyProbitFit>()?;
    m.add_function(wrap_pyfunction!(preprocess, m)?)?;
    m.add_function(wrap_pyfunction!(score_document, m)?)?;
    m.add_function(wrap_pyfunction!(js_divergence, m)?)?;
    m.add_function(wrap_pyfunction!(js_distance, m)?)?;
    m.add_function(wrap_pyfunction!(distance_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(coherence, m)?)?;
    m.add_function(wrap_pyfunction!(project_2d, m)?)?;
    m.add_function(wrap_pyfunction!(fit_lda, m)?)?;
    m.add_function(wrap_pyfunction!(rolling_zscore, m)?)?;
    m.add_function(wrap_pyfunction!(apply_tcode, m)?)?;
    m.add_function(wrap_pyfunction!(extract_factors, m)?)?;
    m.add_function(wrap_pyfunction!(fit_probit, m)?)?;
    m.add_function(wrap_pyfunction!(aic, m)?)?;
    m.add_function(wrap_pyfunction!(bic, m)?)?;
    m.add_function(wrap_pyfunction!(lr_test, m)?)?;
    m.add_function(wrap_pyfunction!(f1_score, m)?)?;
    m.add_function(wrap_pyfunction!(roc_curve, m)?)?;
    m.add_function(wrap_pyfunction!(auroc, m)?)?;
    m.add_function(wrap_pyfunction!(diebold_mariano, m)?)?;
    m.add_function(wrap_pyfunction!(block_bootstrap, m)?)?;
    Ok(())
}
