//! Forecast evaluation: threshold metrics, ROC analysis, recursive
//! out-of-sample backtests, block bootstrap and Diebold–Mariano tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::probit::{fit_probit_with, predict_rows, DesignMatrix, ProbitFit, ProbitOptions};
use crate::stats;

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    Ok(())
}

/// 1 where `p ≥ threshold`.
pub fn classify(probs: &[f64], threshold: f64) -> Vec<u8> {
    probs.iter().map(|&p| (p >= threshold) as u8).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub fn_: usize,
    pub tn: usize,
}

pub fn confusion(probs: &[f64], actual: &[u8], threshold: f64) -> Result<Confusion> {
    check_lengths(probs.len(), actual.len())?;
    confusion_from_labels(&classify(probs, threshold), actual)
}

pub fn confusion_from_labels(pred: &[u8], actual: &[u8]) -> Result<Confusion> {
    check_lengths(pred.len(), actual.len())?;
    let mut c = Confusion::default();
    for (&p, &y) in pred.iter().zip(actual) {
        match (p != 0, y != 0) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, true) => c.fn_ += 1,
            (false, false) => c.tn += 1,
        }
    }
    Ok(c)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub confusion: Confusion,
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Precision, recall and F1 of 0/1 predictions; every 0/0 is taken as 0.
pub fn metrics_from_labels(pred: &[u8], actual: &[u8]) -> Result<ThresholdMetrics> {
    let c = confusion_from_labels(pred, actual)?;
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ThresholdMetrics {
        precision,
        recall,
        f1,
        confusion: c,
    })
}

/// [`metrics_from_labels`] after classifying `probs` at `threshold`.
pub fn threshold_metrics(probs: &[f64], actual: &[u8], threshold: f64) -> Result<ThresholdMetrics> {
    check_lengths(probs.len(), actual.len())?;
    metrics_from_labels(&classify(probs, threshold), actual)
}

pub fn f1_score(probs: &[f64], actual: &[u8], threshold: f64) -> Result<f64> {
    Ok(threshold_metrics(probs, actual, threshold)?.f1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC curve with one point per distinct score, in decreasing threshold
/// order, anchored at (0, 0) with an infinite threshold.
pub fn roc_curve(probs: &[f64], actual: &[u8]) -> Result<Vec<RocPoint>> {
    check_lengths(probs.len(), actual.len())?;
    let pos = actual.iter().filter(|&&y| y != 0).count();
    let neg = actual.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(Error::OneClassOnly);
    }
    let mut order: Vec<usize> = (0..probs.len()).collect();
    order.sort_by(|&a, &b| probs[b].total_cmp(&probs[a]));
    let mut points = vec![RocPoint {
        threshold: f64::INFINITY,
        fpr: 0.0,
        tpr: 0.0,
    }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut i = 0;
    while i < order.len() {
        let t = probs[order[i]];
        while i < order.len() && probs[order[i]] == t {
            if actual[order[i]] != 0 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint {
            threshold: t,
            fpr: fp as f64 / neg as f64,
            tpr: tp as f64 / pos as f64,
        });
    }
    Ok(points)
}

/// Area under the ROC curve by the trapezoid rule (ties count one half).
pub fn auroc(probs: &[f64], actual: &[u8]) -> Result<f64> {
    let roc = roc_curve(probs, actual)?;
    Ok(roc
        .windows(2)
        .map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0)
        .sum())
}

/// Which third of the sample is held out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    FirstThird,
    MiddleThird,
    LastThird,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::FirstThird, Scheme::MiddleThird, Scheme::LastThird];

    pub fn label(self) -> &'static str {
        match self {
            Scheme::FirstThird => "first_third",
            Scheme::MiddleThird => "middle_third",
            Scheme::LastThird => "last_third",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label() == s)
    }

    /// Half-open row range of the test block for a sample of `n` rows, split
    /// at ⌊n/3⌋ and ⌊2n/3⌋.
    pub fn test_block(self, n: usize) -> std::ops::Range<usize> {
        let (a, b) = (n / 3, 2 * n / 3);
        match self {
            Scheme::FirstThird => 0..a,
            Scheme::MiddleThird => a..b,
            Scheme::LastThird => b..n,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BacktestOptions {
    /// Re-estimate every this many test months (1 = every month).
    pub refit_interval: usize,
    pub probit: ProbitOptions,
}

impl Default for BacktestOptions {
    fn default() -> Self {
        Self {
            refit_interval: 1,
            probit: ProbitOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Backtest {
    pub months: Vec<crate::month::YearMonth>,
    pub probs: Vec<f64>,
    pub actual: Vec<u8>,
    /// Test months whose refit failed and reused the previous estimate.
    pub carried_forward: usize,
}

/// Training rows for a forecast of the row at `i`: every row whose outcome
/// is known when the forecast is made (target ≤ t − h), plus rows outside
/// the test block that lie after it.
pub fn training_rows(d: &DesignMatrix, block: &std::ops::Range<usize>, i: usize) -> Vec<usize> {
    let t = d.months[i];
    let cutoff = t.offset(-(d.horizon as i64));
    (0..d.n_rows())
        .filter(|&j| d.months[j] <= cutoff || (j >= block.end && d.months[j] > t))
        .collect()
}

/// Recursive out-of-sample forecasts for every row in the held-out third,
/// re-estimating the model on the data available for each test month.
pub fn recursive_backtest(d: &DesignMatrix, scheme: Scheme, opts: &BacktestOptions) -> Result<Backtest> {
    let block = scheme.test_block(d.n_rows());
    let interval = opts.refit_interval.max(1);
    let mut current: Option<ProbitFit> = None;
    let mut out = Backtest {
        months: vec![],
        probs: vec![],
        actual: vec![],
        carried_forward: 0,
    };
    for (step, i) in block.clone().enumerate() {
        if step % interval == 0 || current.is_none() {
            let train = d.select_rows(&training_rows(d, &block, i));
            let start = current.as_ref().map(|f| f.coefficients.as_slice());
            match fit_probit_with(&train, start, &opts.probit) {
                Ok(f) => current = Some(f),
                Err(e) => {
                    log::debug!("refit for {} failed: {e}", d.months[i]);
                    out.carried_forward += 1;
                }
            }
        }
        let Some(fit) = &current else {
            return Err(Error::InsufficientTraining);
        };
        let row = d.x.rows(i, 1).into_owned();
        out.months.push(d.months[i]);
        out.probs.push(predict_rows(fit, &row)[0]);
        out.actual.push((d.y[i] > 0.5) as u8);
    }
    if out.carried_forward > 0 {
        log::warn!(
            "{} of {} refits failed; previous estimates reused",
            out.carried_forward,
            block.len()
        );
    }
    Ok(out)
}

/// Moving-block bootstrap resamples of `0..n`: ⌈n/L⌉ blocks of `L`
/// consecutive indices with uniform starts, concatenated and truncated to
/// `n`. Replicate `r` draws from ChaCha stream `r` of `seed`.
pub fn block_bootstrap(n: usize, block_length: usize, replications: usize, seed: u64) -> Result<Vec<Vec<usize>>> {
    if block_length == 0 {
        return Err(Error::InvalidConfig("block length must be positive".into()));
    }
    if block_length > n {
        return Err(Error::BlockTooLong { block: block_length, n });
    }
    let blocks = n.div_ceil(block_length);
    Ok((0..replications)
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(r as u64);
            let mut idx = Vec::with_capacity(blocks * block_length);
            for _ in 0..blocks {
                let s = rng.random_range(0..=n - block_length);
                idx.extend(s..s + block_length);
            }
            idx.truncate(n);
            idx
        })
        .collect())
}

/// Rows of `d` at `indices`, relabelled with consecutive months from the
/// original start so the replicate is a fresh time series.
pub fn resample(d: &DesignMatrix, indices: &[usize]) -> DesignMatrix {
    let mut r = d.select_rows(indices);
    let start = d.months[0];
    r.months = (0..indices.len() as i64).map(|i| start.offset(i)).collect();
    r
}

/// Last-third out-of-sample AUROC on each bootstrap replicate, for several
/// competing designs resampled with the same indices. Replicates where any
/// model's AUROC is undefined or the backtest fails are skipped for all.
pub fn bootstrap_auroc(
    designs: &[&DesignMatrix],
    block_length: usize,
    replications: usize,
    seed: u64,
    opts: &BacktestOptions,
) -> Result<Vec<Vec<f64>>> {
    let Some(first) = designs.first() else {
        return Ok(vec![]);
    };
    for d in designs {
        check_lengths(first.n_rows(), d.n_rows())?;
    }
    let samples = block_bootstrap(first.n_rows(), block_length, replications, seed)?;
    let per_replicate: Vec<Option<Vec<f64>>> = samples
        .par_iter()
        .map(|idx| {
            designs
                .iter()
                .map(|d| {
                    let bt = recursive_backtest(&resample(d, idx), Scheme::LastThird, opts).ok()?;
                    auroc(&bt.probs, &bt.actual).ok()
                })
                .collect()
        })
        .collect();
    let mut out = vec![Vec::with_capacity(replications); designs.len()];
    let mut skipped = 0;
    for row in per_replicate {
        match row {
            Some(row) => {
                for (m, a) in row.into_iter().enumerate() {
                    out[m].push(a);
                }
            }
            None => skipped += 1,
        }
    }
    if skipped > 0 {
        log::warn!("{skipped} of {replications} bootstrap replicates skipped (single class or failed fit)");
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub mean: f64,
    pub q3: f64,
    pub max: f64,
}

/// Five-number summary plus mean (type-7 quantiles). `None` when empty.
pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    Some(Summary {
        min: v[0],
        q1: stats::quantile_sorted(&v, 0.25),
        median: stats::quantile_sorted(&v, 0.5),
        mean: stats::mean(&v),
        q3: stats::quantile_sorted(&v, 0.75),
        max: v[v.len() - 1],
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    #[default]
    Squared,
    Absolute,
}

impl Loss {
    fn apply(self, e: f64) -> f64 {
        match self {
            Loss::Squared => e * e,
            Loss::Absolute => e.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DmTest {
    /// Negative when the first forecast has lower loss.
    pub stat: f64,
    pub p_value: f64,
    pub mean_differential: f64,
    pub n: usize,
}

/// Minimum sample size accepted by [`diebold_mariano`].
pub const DM_MIN_OBS: usize = 10;

/// Diebold–Mariano test of equal predictive accuracy of two probability
/// forecasts. The loss differential's long-run variance uses a Bartlett
/// kernel with `horizon − 1` lags.
pub fn diebold_mariano(actual: &[u8], first: &[f64], second: &[f64], horizon: usize, loss: Loss) -> Result<DmTest> {
    check_lengths(actual.len(), first.len())?;
    check_lengths(actual.len(), second.len())?;
    let n = actual.len();
    if n < DM_MIN_OBS {
        return Err(Error::InsufficientData {
            needed: DM_MIN_OBS,
            got: n,
        });
    }
    let d: Vec<f64> = (0..n)
        .map(|i| {
            let y = actual[i] as f64;
            loss.apply(y - first[i]) - loss.apply(y - second[i])
        })
        .collect();
    let mean = stats::mean(&d);
    let autocov = |k: usize| -> f64 { (k..n).map(|t| (d[t] - mean) * (d[t - k] - mean)).sum::<f64>() / n as f64 };
    let lags = horizon.saturating_sub(1).min(n - 1);
    let mut lrv = autocov(0);
    for k in 1..=lags {
        lrv += 2.0 * (1.0 - k as f64 / (lags + 1) as f64) * autocov(k);
    }
    if !(lrv > 1e-15) {
        return Err(Error::ZeroLossDifferential);
    }
    let stat = mean / (lrv / n as f64).sqrt();
    Ok(DmTest {
        stat,
        p_value: 2.0 * stats::norm_sf(stat.abs()),
        mean_differential: mean,
        n,
    })
}
