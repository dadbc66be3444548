//! Stagewise orchestration driven by a TOML configuration file.
//!
//! `index` builds the news indicator, `fit` estimates the three probit
//! specifications at every horizon, and `evaluate` produces accuracy tables,
//! backtests, bootstrap summaries and forecast-comparison tests. Each stage
//! persists its outputs so later stages can be rerun on their own.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{self, InputFormat};
use crate::error::{Error, Result};
use crate::evaluation::{self, BacktestOptions, Loss, Scheme};
use crate::factor_panel::{self, FactorSet, RawPanel, SurveySeries};
use crate::indicator::{self, MonthlyCoherence, RecessionSeries, SentimentIndex, WindowMode};
use crate::lda::{self, LdaConfig};
use crate::lexicon::{self, Lexicon};
use crate::month::{MonthRange, YearMonth};
use crate::probit::{self, DesignMatrix, FitReport, LrTestReport, ModelInputs, ModelKind, ModelSpec};
use crate::topic_geometry::{self, CoherenceVariant, LogBase};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PathsConfig {
    pub corpus: Option<PathBuf>,
    pub corpus_format: Option<InputFormat>,
    pub positive_words: Option<PathBuf>,
    pub negative_words: Option<PathBuf>,
    /// Defaults to the bundled English list.
    pub stopwords: Option<PathBuf>,
    pub panel: Option<PathBuf>,
    pub surveys: Option<PathBuf>,
    pub recession: Option<PathBuf>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndexConfig {
    pub window: usize,
    pub window_mode: WindowMode,
    pub log_base: LogBase,
    pub coherence: CoherenceVariant,
    /// Month span of the index; defaults to the corpus span.
    pub start: Option<YearMonth>,
    pub end: Option<YearMonth>,
}

impl Default for IndexConfig {
    fn default() -> Self {
        Self {
            window: 24,
            window_mode: WindowMode::default(),
            log_base: LogBase::default(),
            coherence: CoherenceVariant::default(),
            start: None,
            end: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FactorsConfig {
    pub k: usize,
}

impl Default for FactorsConfig {
    fn default() -> Self {
        Self { k: 15 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub horizons: Vec<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            horizons: vec![1, 3, 6, 12],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluationConfig {
    pub c_star: f64,
    pub schemes: Vec<Scheme>,
    pub loss: Loss,
}

impl Default for EvaluationConfig {
    fn default() -> Self {
        Self {
            c_star: 0.5,
            schemes: vec![Scheme::LastThird, Scheme::FirstThird, Scheme::MiddleThird],
            loss: Loss::Squared,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BootstrapConfig {
    pub block_length: usize,
    pub replications: usize,
    pub seed: u64,
    /// Refit interval of the backtest inside each replicate.
    pub refit_interval: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        Self {
            block_length: 24,
            replications: 200,
            seed: 0,
            refit_interval: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub paths: PathsConfig,
    pub lda: LdaConfig,
    pub index: IndexConfig,
    pub factors: FactorsConfig,
    pub model: ModelConfig,
    pub evaluation: EvaluationConfig,
    pub bootstrap: BootstrapConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Index,
    Fit,
    Evaluate,
}

impl PipelineConfig {
    /// Parses a configuration; relative paths are resolved against `base`.
    pub fn from_toml_str(text: &str, base: &Path) -> Result<Self> {
        let mut cfg: PipelineConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let p = &mut cfg.paths;
        for slot in [
            &mut p.corpus,
            &mut p.positive_words,
            &mut p.negative_words,
            &mut p.stopwords,
            &mut p.panel,
            &mut p.surveys,
            &mut p.recession,
            &mut p.output,
        ] {
            if let Some(path) = slot.as_mut() {
                if path.is_relative() {
                    *path = base.join(&*path);
                }
            }
        }
        if p.output.is_none() {
            p.output = Some(base.join("output"));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml_str(&text, base)
    }

    pub fn output_dir(&self) -> &Path {
        self.paths.output.as_deref().unwrap_or(Path::new("output"))
    }

    /// Overrides the LDA and bootstrap seeds.
    pub fn set_seed(&mut self, seed: u64) {
        self.lda.seed = seed;
        self.bootstrap.seed = seed;
    }

    fn required<'a>(&self, path: &'a Option<PathBuf>, key: &str) -> Result<&'a Path> {
        let p = path
            .as_deref()
            .ok_or_else(|| Error::Config(format!("paths.{key} is required")))?;
        if !p.is_file() {
            return Err(Error::Config(format!("paths.{key}: {} does not exist", p.display())));
        }
        Ok(p)
    }

    /// Checks parameters and that every input of `stage` exists.
    pub fn validate(&self, stage: Stage) -> Result<()> {
        match stage {
            Stage::Index => {
                self.required(&self.paths.corpus, "corpus")?;
                self.required(&self.paths.positive_words, "positive_words")?;
                self.required(&self.paths.negative_words, "negative_words")?;
                if self.paths.stopwords.is_some() {
                    self.required(&self.paths.stopwords, "stopwords")?;
                }
                self.lda.validate()?;
                if self.lda.topics < 2 {
                    return Err(Error::Config("lda.topics must be at least 2".into()));
                }
                if self.index.window < 1 {
                    return Err(Error::Config("index.window must be at least 1".into()));
                }
            }
            Stage::Fit => {
                self.required(&self.paths.panel, "panel")?;
                self.required(&self.paths.surveys, "surveys")?;
                self.required(&self.paths.recession, "recession")?;
                if self.factors.k == 0 {
                    return Err(Error::Config("factors.k must be positive".into()));
                }
                if self.model.horizons.is_empty() || self.model.horizons.contains(&0) {
                    return Err(Error::Config(
                        "model.horizons must be a non-empty list of positive integers".into(),
                    ));
                }
            }
            Stage::Evaluate => {
                self.validate(Stage::Fit)?;
                if !(self.evaluation.c_star > 0.0 && self.evaluation.c_star < 1.0) {
                    return Err(Error::Config("evaluation.c_star must lie in (0, 1)".into()));
                }
                if self.bootstrap.block_length == 0 {
                    return Err(Error::Config("bootstrap.block_length must be positive".into()));
                }
            }
        }
        Ok(())
    }
}

pub const SENTIMENT_INDEX: &str = "sentiment_index.csv";
pub const FACTORS: &str = "factors.csv";

pub fn fit_report_name(kind: ModelKind, h: usize) -> String {
    format!("fit_{}_{h}.json", kind.label())
}

pub fn insample_name(kind: ModelKind, h: usize) -> String {
    format!("insample_probs_{}_{h}.csv", kind.label())
}

pub fn oos_name(kind: ModelKind, h: usize, scheme: Scheme) -> String {
    format!("oos_probs_{}_{h}_{}.csv", kind.label(), scheme.label())
}

pub fn roc_name(kind: ModelKind, h: usize) -> String {
    format!("roc_{}_{h}.csv", kind.label())
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn require_artifact(path: PathBuf, stage: &'static str) -> Result<PathBuf> {
    if path.is_file() {
        Ok(path)
    } else {
        Err(Error::MissingArtifact { path, stage })
    }
}

fn month_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Builds the news indicator: per-month LDA, intertopic distances, 2-D
/// projections, coherence, lexicon scores and the rolling z-score.
pub fn cmd_index(cfg: &PipelineConfig) -> Result<SentimentIndex> {
    cfg.validate(Stage::Index)?;
    let paths = &cfg.paths;
    let stopwords = match &paths.stopwords {
        Some(p) => corpus::load_stopwords(p)?,
        None => corpus::default_stopwords(),
    };
    let corpus_path = paths.corpus.as_deref().expect("validated");
    let format = paths
        .corpus_format
        .or_else(|| InputFormat::from_path(corpus_path))
        .ok_or_else(|| Error::Config("paths.corpus_format is required for this file extension".into()))?;
    let corpus = corpus::load_documents(corpus_path, format, &stopwords)?;
    let lexicon = Lexicon::from_files(
        paths.positive_words.as_deref().expect("validated"),
        paths.negative_words.as_deref().expect("validated"),
    )?;
    let span = match (cfg.index.start, cfg.index.end, corpus.span()) {
        (Some(s), Some(e), _) => MonthRange::new(s, e)?,
        (s, e, Some(c)) => MonthRange::new(s.unwrap_or(c.start), e.unwrap_or(c.end))?,
        (_, _, None) => return Err(Error::EmptyCorpus),
    };
    let slices = corpus::bucket_monthly(&corpus, span);
    log::info!("index: {} documents over {} months", corpus.len(), slices.len());

    let out = cfg.output_dir();
    let (dist_dir, proj_dir) = (out.join("distances"), out.join("projection"));
    create_dir(&dist_dir)?;
    create_dir(&proj_dir)?;

    let coherences: Vec<MonthlyCoherence> = slices
        .par_iter()
        .enumerate()
        .map(|(i, slice)| -> Result<MonthlyCoherence> {
            if slice.token_count() == 0 {
                log::warn!("{}: no tokens; indicator left missing", slice.month);
                return Ok(MonthlyCoherence {
                    period: slice.month,
                    sigma: None,
                });
            }
            let at = |e: Error| e.at_month(slice.month);
            let config = LdaConfig {
                seed: month_seed(cfg.lda.seed, i),
                ..cfg.lda.clone()
            };
            let model = lda::fit_lda(slice, &config).map_err(at)?;
            log::info!(
                "{}: LDA fitted on {} documents, per-token log-likelihood {:.4}",
                slice.month,
                slice.documents.len(),
                lda::held_out_log_likelihood(&model, slice) / slice.token_count() as f64
            );
            let dist = topic_geometry::distance_matrix_in(&model.phi, cfg.index.log_base).map_err(at)?;
            let name = format!("{}.csv", slice.month);
            dist.write_csv(&dist_dir.join(&name)).map_err(at)?;
            topic_geometry::project_2d(&dist)
                .and_then(|p| p.write_csv(&proj_dir.join(&name)))
                .map_err(at)?;
            Ok(MonthlyCoherence {
                period: slice.month,
                sigma: Some(topic_geometry::coherence_with(&dist, cfg.index.coherence)),
            })
        })
        .collect::<Result<_>>()?;

    let scores: Vec<_> = slices.iter().map(|s| lexicon::score_period(s, &lexicon)).collect();
    let index =
        indicator::build_raw_index(&scores, &coherences)?.with_zscore(cfg.index.window, cfg.index.window_mode)?;
    index.write_csv(&out.join(SENTIMENT_INDEX))?;
    Ok(index)
}

fn load_index(cfg: &PipelineConfig) -> Result<SentimentIndex> {
    SentimentIndex::read_csv(&require_artifact(cfg.output_dir().join(SENTIMENT_INDEX), "index")?)
}

fn specs(cfg: &PipelineConfig, h: usize) -> Vec<ModelSpec> {
    ModelKind::ALL
        .map(|kind| ModelSpec {
            kind,
            horizon: h,
            k_factors: cfg.factors.k,
        })
        .to_vec()
}

#[derive(Debug, Serialize)]
struct ProbRow {
    month: YearMonth,
    prob: f64,
    actual: u8,
}

fn write_probs(path: &Path, months: &[YearMonth], probs: &[f64], actual: &[u8]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for ((&month, &prob), &actual) in months.iter().zip(probs).zip(actual) {
        w.serialize(ProbRow { month, prob, actual })
            .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Probability file written by `fit` or `evaluate`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ProbSeries {
    pub months: Vec<YearMonth>,
    pub probs: Vec<f64>,
    pub actual: Vec<u8>,
}

pub fn read_probs(path: &Path) -> Result<ProbSeries> {
    #[derive(Deserialize)]
    struct Row {
        month: YearMonth,
        prob: f64,
        actual: u8,
    }
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = ProbSeries::default();
    for row in r.deserialize::<Row>() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        out.months.push(row.month);
        out.probs.push(row.prob);
        out.actual.push(row.actual);
    }
    Ok(out)
}

fn actual_of(d: &DesignMatrix) -> Vec<u8> {
    d.y.iter().map(|&v| (v > 0.5) as u8).collect()
}

#[derive(Debug, Serialize)]
struct RegimeDiagnostics {
    sent: Option<indicator::RegimeReport>,
    zsent: Option<indicator::RegimeReport>,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn write_regime_outputs(out: &Path, index: &SentimentIndex, rec: &RecessionSeries) -> Result<()> {
    let report = |values: &[Option<f64>]| match indicator::regime_diagnostics(&index.months, values, rec) {
        Ok(r) => Some(r),
        Err(e) => {
            log::warn!("regime diagnostics skipped: {e}");
            None
        }
    };
    write_json(
        &out.join("regime_diagnostics.json"),
        &RegimeDiagnostics {
            sent: report(&index.sent),
            zsent: report(&index.zsent),
        },
    )?;
    let (mut in_rec, mut out_rec) = (vec![], vec![]);
    for (m, z) in index.months.iter().zip(&index.zsent) {
        match (z, rec.get(*m)) {
            (Some(z), Some(1)) => in_rec.push(*z),
            (Some(z), Some(_)) => out_rec.push(*z),
            _ => {}
        }
    }
    let path = out.join("zsent_histogram.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| Error::csv(&path, e))?;
    for bin in indicator::regime_histogram(&in_rec, &out_rec, 20) {
        w.serialize(bin).map_err(|e| Error::csv(&path, e))?;
    }
    w.flush().map_err(|e| Error::io(&path, e))
}

fn load_model_inputs(cfg: &PipelineConfig, factors: FactorSet) -> Result<ModelInputs> {
    Ok(ModelInputs {
        factors,
        surveys: SurveySeries::read_csv(cfg.paths.surveys.as_deref().expect("validated"))?,
        index: load_index(cfg)?,
        rec: RecessionSeries::read_csv(cfg.paths.recession.as_deref().expect("validated"))?,
    })
}

/// Extracts factors and fits the three probit specifications at every
/// horizon on common rows, writing reports and in-sample probabilities.
pub fn cmd_fit(cfg: &PipelineConfig) -> Result<()> {
    cfg.validate(Stage::Fit)?;
    let out = cfg.output_dir();
    load_index(cfg)?;
    let panel = RawPanel::read_csv(cfg.paths.panel.as_deref().expect("validated"))?;
    let factors = factor_panel::extract_factors(&panel, cfg.factors.k)?;
    log::info!(
        "factors: {} months, variance share of {} factors {:.3}",
        factors.months.len(),
        factors.k(),
        factors.explained_variance.iter().sum::<f64>()
    );
    factors.write_csv(&out.join(FACTORS))?;
    let inputs = load_model_inputs(cfg, factors)?;
    write_regime_outputs(out, &inputs.index, &inputs.rec)?;

    type HorizonFits = (usize, Vec<(ModelKind, DesignMatrix, probit::ProbitFit)>);
    let results: Vec<HorizonFits> = cfg
        .model
        .horizons
        .par_iter()
        .map(|&h| {
            let designs = probit::build_aligned(&inputs, &specs(cfg, h))?;
            let fits = designs
                .into_iter()
                .zip(ModelKind::ALL)
                .map(|(d, kind)| {
                    let fit = probit::fit_probit(&d)?;
                    log::info!(
                        "{kind} h={h}: n={} logL={:.3} converged={} after {} iterations",
                        fit.n_obs,
                        fit.log_likelihood,
                        fit.converged,
                        fit.iterations
                    );
                    Ok((kind, d, fit))
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((h, fits))
        })
        .collect::<Result<_>>()?;

    for (h, fits) in &results {
        for (i, (kind, d, fit)) in fits.iter().enumerate() {
            let mut report = FitReport::new(*kind, *h, fit);
            for (rkind, _, rfit) in &fits[..i] {
                let t = probit::nested_lr_test(rfit, fit)?;
                report.lr_tests.push(LrTestReport {
                    restricted: *rkind,
                    full: *kind,
                    test: "likelihood_ratio".into(),
                    stat: t.stat,
                    df: t.df,
                    p_value: t.p_value,
                });
            }
            report.write_json(&out.join(fit_report_name(*kind, *h)))?;
            let probs = probit::predict(fit, d)?;
            write_probs(&out.join(insample_name(*kind, *h)), &d.months, &probs, &actual_of(d))?;
        }
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct MetricRow {
    model: ModelKind,
    horizon: usize,
    period: String,
    f1: f64,
    precision: f64,
    recall: f64,
    auroc: Option<f64>,
}

#[derive(Debug, Serialize)]
struct BootstrapRow {
    model: ModelKind,
    horizon: usize,
    min: Option<f64>,
    q1: Option<f64>,
    median: Option<f64>,
    mean: Option<f64>,
    q3: Option<f64>,
    max: Option<f64>,
    replicates: usize,
}

#[derive(Debug, Serialize)]
struct DmRow {
    horizon: usize,
    period: String,
    model_a: ModelKind,
    model_b: ModelKind,
    stat: Option<f64>,
    p_value: Option<f64>,
    n: usize,
    note: String,
}

fn metric_row(kind: ModelKind, h: usize, period: &str, probs: &[f64], actual: &[u8], c_star: f64) -> Result<MetricRow> {
    let m = evaluation::threshold_metrics(probs, actual, c_star)?;
    Ok(MetricRow {
        model: kind,
        horizon: h,
        period: period.into(),
        f1: m.f1,
        precision: m.precision,
        recall: m.recall,
        auroc: evaluation::auroc(probs, actual).ok(),
    })
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_roc(path: &Path, probs: &[f64], actual: &[u8]) -> Result<()> {
    let roc = evaluation::roc_curve(probs, actual)?;
    write_rows(path, &roc)
}

/// Accuracy tables, recursive backtests, bootstrap AUROC and Diebold–Mariano
/// comparisons from the outputs of `fit`.
pub fn cmd_evaluate(cfg: &PipelineConfig) -> Result<()> {
    cfg.validate(Stage::Evaluate)?;
    let out = cfg.output_dir();
    let factors_path = require_artifact(out.join(FACTORS), "fit")?;
    for &h in &cfg.model.horizons {
        for kind in ModelKind::ALL {
            require_artifact(out.join(fit_report_name(kind, h)), "fit")?;
            require_artifact(out.join(insample_name(kind, h)), "fit")?;
        }
    }
    let inputs = load_model_inputs(cfg, FactorSet::read_csv(&factors_path)?)?;
    let ev = &cfg.evaluation;
    let opts = BacktestOptions::default();
    let boot_opts = BacktestOptions {
        refit_interval: cfg.bootstrap.refit_interval.max(1),
        ..Default::default()
    };

    let mut metrics = Vec::new();
    let mut boot_rows = Vec::new();
    let mut dm_rows = Vec::new();
    for &h in &cfg.model.horizons {
        let designs = probit::build_aligned(&inputs, &specs(cfg, h))?;
        for kind in ModelKind::ALL {
            let s = read_probs(&out.join(insample_name(kind, h)))?;
            metrics.push(metric_row(kind, h, "in_sample", &s.probs, &s.actual, ev.c_star)?);
        }
        for (si, &scheme) in ev.schemes.iter().enumerate() {
            let backtests = designs
                .par_iter()
                .map(|d| evaluation::recursive_backtest(d, scheme, &opts))
                .collect::<Result<Vec<_>>>()?;
            for (kind, bt) in ModelKind::ALL.into_iter().zip(&backtests) {
                write_probs(&out.join(oos_name(kind, h, scheme)), &bt.months, &bt.probs, &bt.actual)?;
                metrics.push(metric_row(kind, h, scheme.label(), &bt.probs, &bt.actual, ev.c_star)?);
                if si == 0 {
                    let path = out.join(roc_name(kind, h));
                    if let Err(e) = write_roc(&path, &bt.probs, &bt.actual) {
                        log::warn!("{kind} h={h}: out-of-sample ROC unavailable ({e}); using in-sample probabilities");
                        let s = read_probs(&out.join(insample_name(kind, h)))?;
                        write_roc(&path, &s.probs, &s.actual)?;
                    }
                }
            }
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                let (ka, kb) = (ModelKind::ALL[a], ModelKind::ALL[b]);
                let mut row = DmRow {
                    horizon: h,
                    period: scheme.label().into(),
                    model_a: ka,
                    model_b: kb,
                    stat: None,
                    p_value: None,
                    n: backtests[a].probs.len(),
                    note: String::new(),
                };
                match evaluation::diebold_mariano(
                    &backtests[a].actual,
                    &backtests[a].probs,
                    &backtests[b].probs,
                    h,
                    ev.loss,
                ) {
                    Ok(t) => {
                        row.stat = Some(t.stat);
                        row.p_value = Some(t.p_value);
                    }
                    Err(e) => row.note = e.to_string(),
                }
                dm_rows.push(row);
            }
        }

        let refs: Vec<&DesignMatrix> = designs.iter().collect();
        let aurocs = evaluation::bootstrap_auroc(
            &refs,
            cfg.bootstrap.block_length,
            cfg.bootstrap.replications,
            cfg.bootstrap.seed,
            &boot_opts,
        )?;
        for (kind, values) in ModelKind::ALL.into_iter().zip(&aurocs) {
            let s = evaluation::summarize(values);
            boot_rows.push(BootstrapRow {
                model: kind,
                horizon: h,
                min: s.map(|s| s.min),
                q1: s.map(|s| s.q1),
                median: s.map(|s| s.median),
                mean: s.map(|s| s.mean),
                q3: s.map(|s| s.q3),
                max: s.map(|s| s.max),
                replicates: values.len(),
            });
        }
        log::info!(
            "h={h}: evaluation done ({} bootstrap replicates kept)",
            aurocs.first().map_or(0, Vec::len)
        );
    }
    write_rows(&out.join("metrics.csv"), &metrics)?;
    write_rows(&out.join("bootstrap_auroc.csv"), &boot_rows)?;
    write_rows(&out.join("dm_tests.csv"), &dm_rows)?;
    Ok(())
}

/// `index`, `fit` and `evaluate` in sequence.
pub fn cmd_all(cfg: &PipelineConfig) -> Result<()> {
    cfg.validate(Stage::Index)?;
    cfg.validate(Stage::Evaluate)?;
    cmd_index(cfg)?;
    cmd_fit(cfg)?;
    cmd_evaluate(cfg)
}
