//! The monthly news-sentiment index: coherence-weighted lexicon score, its
//! rolling z-score, and recession/expansion distribution diagnostics.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexicon::PeriodScore;
use crate::month::{is_contiguous, YearMonth};
use crate::stats;

/// σ of one month's topic-distance matrix; `None` when the month had no
/// tokens to model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonthlyCoherence {
    pub period: YearMonth,
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SentimentIndex {
    pub months: Vec<YearMonth>,
    pub score: Vec<Option<f64>>,
    pub sigma: Vec<Option<f64>>,
    pub sent: Vec<Option<f64>>,
    pub zsent: Vec<Option<f64>>,
}

impl SentimentIndex {
    pub fn len(&self) -> usize {
        self.months.len()
    }

    pub fn is_empty(&self) -> bool {
        self.months.is_empty()
    }

    pub fn position(&self, month: YearMonth) -> Option<usize> {
        let first = *self.months.first()?;
        let i = month.months_since(first);
        (i >= 0 && (i as usize) < self.len()).then_some(i as usize)
    }

    /// Fills `zsent` from `sent`.
    pub fn with_zscore(mut self, window: usize, mode: WindowMode) -> Result<Self> {
        self.zsent = rolling_zscore_with(&self.sent, window, mode)?;
        Ok(self)
    }

    /// CSV `month,score,sigma,sent,zsent`; missing values are empty cells.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        for row in self.rows() {
            w.serialize(row).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut idx = SentimentIndex::default();
        for row in r.deserialize::<IndexRow>() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            idx.months.push(row.month);
            idx.score.push(row.score);
            idx.sigma.push(row.sigma);
            idx.sent.push(row.sent);
            idx.zsent.push(row.zsent);
        }
        if !is_contiguous(&idx.months) {
            return Err(Error::SpanMismatch);
        }
        Ok(idx)
    }

    fn rows(&self) -> impl Iterator<Item = IndexRow> + '_ {
        (0..self.len()).map(move |i| IndexRow {
            month: self.months[i],
            score: self.score[i],
            sigma: self.sigma[i],
            sent: self.sent[i],
            zsent: self.zsent.get(i).copied().flatten(),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct IndexRow {
    month: YearMonth,
    score: Option<f64>,
    sigma: Option<f64>,
    sent: Option<f64>,
    zsent: Option<f64>,
}

/// `sent_t = σ_t × score_t` month by month. Months without a coherence value
/// (no documents) are missing in every column but the month key.
pub fn build_raw_index(scores: &[PeriodScore], coherences: &[MonthlyCoherence]) -> Result<SentimentIndex> {
    if scores.len() != coherences.len() || scores.iter().zip(coherences).any(|(s, c)| s.period != c.period) {
        return Err(Error::SpanMismatch);
    }
    let months: Vec<YearMonth> = scores.iter().map(|s| s.period).collect();
    if !is_contiguous(&months) {
        return Err(Error::SpanMismatch);
    }
    let mut idx = SentimentIndex {
        months,
        ..Default::default()
    };
    for (s, c) in scores.iter().zip(coherences) {
        match c.sigma {
            Some(sigma) => {
                idx.score.push(Some(s.score));
                idx.sigma.push(Some(sigma));
                idx.sent.push(Some(sigma * s.score));
            }
            None => {
                idx.score.push(None);
                idx.sigma.push(None);
                idx.sent.push(None);
            }
        }
        idx.zsent.push(None);
    }
    Ok(idx)
}

/// Which observations the rolling mean and standard deviation use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    /// Months t−w..=t (w + 1 observations, current month included).
    #[default]
    Inclusive,
    /// Months t−w..t (w observations, current month excluded).
    Lagged,
}

const SD_FLOOR: f64 = 1e-12;

/// Rolling z-score over a window of `window` months, inclusive of the current
/// month.
pub fn rolling_zscore(series: &[Option<f64>], window: usize) -> Result<Vec<Option<f64>>> {
    rolling_zscore_with(series, window, WindowMode::Inclusive)
}

/// The first `window` months are always missing. A later month is missing
/// when its own value is missing or fewer than two present observations fall
/// in its window; missing observations are skipped in the mean and (n − 1)
/// standard deviation. A standard deviation below 1e-12 yields 0.
pub fn rolling_zscore_with(series: &[Option<f64>], window: usize, mode: WindowMode) -> Result<Vec<Option<f64>>> {
    if window < 2 {
        return Err(Error::InvalidConfig(format!("z-score window {window} < 2")));
    }
    let needed = window + 1;
    if needed > series.len() {
        return Err(Error::WindowTooLarge {
            window,
            needed,
            len: series.len(),
        });
    }
    let mut out = vec![None; series.len()];
    for t in window..series.len() {
        let Some(x) = series[t] else { continue };
        let range = match mode {
            WindowMode::Inclusive => t - window..t + 1,
            WindowMode::Lagged => t - window..t,
        };
        let obs: Vec<f64> = series[range].iter().flatten().copied().collect();
        if obs.len() < 2 {
            continue;
        }
        let mean = stats::mean(&obs);
        let sd = stats::sample_variance(&obs).sqrt();
        out[t] = Some(if sd < SD_FLOOR {
            log::warn!("rolling z-score: near-zero standard deviation at position {t}; using 0");
            0.0
        } else {
            (x - mean) / sd
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecessionSeries {
    pub months: Vec<YearMonth>,
    pub rec: Vec<u8>,
}

impl RecessionSeries {
    pub fn get(&self, month: YearMonth) -> Option<u8> {
        let first = *self.months.first()?;
        let i = month.months_since(first);
        (i >= 0).then(|| self.rec.get(i as usize).copied()).flatten()
    }

    /// Reads CSV `month,rec` with `rec ∈ {0, 1}`; rows must be consecutive months.
    pub fn read_csv(path: &Path) -> Result<Self> {
        #[derive(Deserialize)]
        struct Row {
            month: YearMonth,
            rec: u8,
        }
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut out = RecessionSeries {
            months: vec![],
            rec: vec![],
        };
        for (i, row) in r.deserialize::<Row>().enumerate() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            if row.rec > 1 {
                return Err(Error::MalformedRecord {
                    line: i + 2,
                    reason: format!("rec must be 0 or 1, got {}", row.rec),
                });
            }
            out.months.push(row.month);
            out.rec.push(row.rec);
        }
        if !is_contiguous(&out.months) {
            return Err(Error::SpanMismatch);
        }
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["month", "rec"]).map_err(|e| Error::csv(path, e))?;
        for (m, r) in self.months.iter().zip(&self.rec) {
            w.write_record([m.to_string(), r.to_string()])
                .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub n_rec: usize,
    pub n_nonrec: usize,
    pub mean_rec: f64,
    pub mean_nonrec: f64,
    /// Welch two-sample t statistic (recession minus expansion).
    pub t_stat: f64,
    pub t_df: f64,
    pub t_pvalue: f64,
    pub ks_stat: f64,
    pub ks_pvalue: f64,
}

/// Compares a monthly series between recession and expansion months with a
/// Welch t-test and a two-sample Kolmogorov–Smirnov test. Months where the
/// series or the recession flag is missing are skipped.
pub fn regime_diagnostics(months: &[YearMonth], values: &[Option<f64>], rec: &RecessionSeries) -> Result<RegimeReport> {
    let mut in_rec = Vec::new();
    let mut out_rec = Vec::new();
    for (m, v) in months.iter().zip(values) {
        if let (Some(v), Some(r)) = (v, rec.get(*m)) {
            if r == 1 {
                in_rec.push(*v);
            } else {
                out_rec.push(*v);
            }
        }
    }
    two_sample_tests(&in_rec, &out_rec)
}

pub fn two_sample_tests(rec: &[f64], nonrec: &[f64]) -> Result<RegimeReport> {
    if rec.len() < 2 || nonrec.len() < 2 {
        return Err(Error::InsufficientRegimeData {
            recession: rec.len(),
            expansion: nonrec.len(),
        });
    }
    let (t_stat, t_df, t_pvalue) = welch_t(rec, nonrec);
    let ks_stat = ks_statistic(rec, nonrec);
    let ks_pvalue = ks_pvalue(ks_stat, rec.len(), nonrec.len());
    Ok(RegimeReport {
        n_rec: rec.len(),
        n_nonrec: nonrec.len(),
        mean_rec: stats::mean(rec),
        mean_nonrec: stats::mean(nonrec),
        t_stat,
        t_df,
        t_pvalue,
        ks_stat,
        ks_pvalue,
    })
}

fn welch_t(a: &[f64], b: &[f64]) -> (f64, f64, f64) {
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (va, vb) = (stats::sample_variance(a) / na, stats::sample_variance(b) / nb);
    let diff = stats::mean(a) - stats::mean(b);
    let se2 = va + vb;
    if se2 == 0.0 {
        // Both samples constant.
        return if diff == 0.0 {
            (0.0, f64::INFINITY, 1.0)
        } else {
            (diff.signum() * f64::INFINITY, f64::INFINITY, 0.0)
        };
    }
    let t = diff / se2.sqrt();
    let df = se2 * se2 / (va * va / (na - 1.0) + vb * vb / (nb - 1.0));
    (t, df, stats::t_two_sided(t, df))
}

/// `sup_x |F̂_a(x) − F̂_b(x)|` by merging the sorted samples.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> f64 {
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic Kolmogorov p-value with the Stephens small-sample adjustment.
fn ks_pvalue(d: f64, n1: usize, n2: usize) -> f64 {
    let ne = (n1 * n2) as f64 / (n1 + n2) as f64;
    let sq = ne.sqrt();
    let lambda = (sq + 0.12 + 0.11 / sq) * d;
    kolmogorov_q(lambda)
}

/// `Q(λ) = 2 Σ_{j≥1} (−1)^{j−1} e^{−2 j² λ²}`, the Kolmogorov upper tail.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for j in 1..=200 {
        let jf = j as f64;
        let term = sign * (-2.0 * jf * jf * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Equal-width histogram counts per regime, for density plots.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub recession: usize,
    pub expansion: usize,
}

pub fn regime_histogram(rec: &[f64], nonrec: &[f64], bins: usize) -> Vec<HistogramBin> {
    let all = rec.iter().chain(nonrec);
    let lo = all.clone().copied().fold(f64::INFINITY, f64::min);
    let hi = all.copied().fold(f64::NEG_INFINITY, f64::max);
    if !lo.is_finite() || bins == 0 {
        return vec![];
    }
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let bin_of = |x: f64| (((x - lo) / width) as usize).min(bins - 1);
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            lower: lo + b as f64 * width,
            upper: lo + (b + 1) as f64 * width,
            recession: 0,
            expansion: 0,
        })
        .collect();
    for &x in rec {
        out[bin_of(x)].recession += 1;
    }
    for &x in nonrec {
        out[bin_of(x)].expansion += 1;
    }
    out
}
