//! Macro panel ingestion and principal-component factor extraction.
//!
//! The panel follows the FRED-MD layout: a header row of series names, a
//! `transform:` row of per-series transform codes, then one row per month.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::month::{is_contiguous, YearMonth};
use crate::stats;

pub type Column = Vec<Option<f64>>;

#[derive(Debug, Clone, PartialEq)]
pub struct RawPanel {
    pub months: Vec<YearMonth>,
    pub names: Vec<String>,
    /// One column per series, aligned with `months`.
    pub series: Vec<Column>,
    pub tcodes: Vec<u8>,
}

impl RawPanel {
    pub fn new(months: Vec<YearMonth>, names: Vec<String>, series: Vec<Column>, tcodes: Vec<u8>) -> Result<Self> {
        if series.is_empty() {
            return Err(Error::MalformedPanel("panel has no series".into()));
        }
        if names.len() != series.len() || tcodes.len() != series.len() {
            return Err(Error::MalformedPanel(
                "names, series and tcodes differ in length".into(),
            ));
        }
        if series.iter().any(|c| c.len() != months.len()) {
            return Err(Error::MalformedPanel("series lengths differ from month index".into()));
        }
        if !is_contiguous(&months) {
            return Err(Error::MalformedPanel("months are not consecutive".into()));
        }
        if let Some(&c) = tcodes.iter().find(|c| !(1..=7).contains(*c)) {
            return Err(Error::InvalidTcode(c));
        }
        Ok(Self {
            months,
            names,
            series,
            tcodes,
        })
    }

    /// Reads a FRED-MD style CSV. Empty, `NA` and `NaN` cells are missing.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut r = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(text.as_bytes());
        let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
        let names: Vec<String> = header.iter().skip(1).map(|s| s.trim().to_string()).collect();
        let mut records = r.records();
        let trow = records
            .next()
            .ok_or_else(|| Error::MalformedPanel("missing transform row".into()))?
            .map_err(|e| Error::csv(path, e))?;
        if !trow.get(0).unwrap_or("").trim().to_lowercase().starts_with("transform") {
            return Err(Error::MalformedPanel("second row must start with `transform:`".into()));
        }
        let tcodes = trow
            .iter()
            .skip(1)
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|c| c.fract() == 0.0)
                    .map(|c| c as u8)
                    .ok_or_else(|| Error::MalformedPanel(format!("bad transform code {s:?}")))
            })
            .collect::<Result<Vec<u8>>>()?;
        let mut months = Vec::new();
        let mut series = vec![Vec::new(); names.len()];
        for rec in records {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            let first = rec.get(0).unwrap_or("").trim();
            if first.is_empty() {
                continue;
            }
            months.push(YearMonth::parse_loose(first)?);
            for (j, col) in series.iter_mut().enumerate() {
                col.push(parse_cell(rec.get(j + 1).unwrap_or("")));
            }
        }
        Self::new(months, names, series, tcodes)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = vec!["sasdate".to_string()];
        header.extend(self.names.iter().cloned());
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        let mut trow = vec!["transform:".to_string()];
        trow.extend(self.tcodes.iter().map(|c| c.to_string()));
        w.write_record(&trow).map_err(|e| Error::csv(path, e))?;
        for (i, m) in self.months.iter().enumerate() {
            let mut row = vec![m.to_string()];
            row.extend(
                self.series
                    .iter()
                    .map(|c| c[i].map(|x| x.to_string()).unwrap_or_default()),
            );
            w.write_record(&row).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn parse_cell(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() || s.eq_ignore_ascii_case("na") {
        return None;
    }
    s.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn diff(x: &[Option<f64>]) -> Column {
    let mut out = vec![None; x.len()];
    for t in 1..x.len() {
        if let (Some(a), Some(b)) = (x[t], x[t - 1]) {
            out[t] = Some(a - b);
        }
    }
    out
}

fn log_levels(x: &[Option<f64>]) -> Result<Column> {
    x.iter()
        .enumerate()
        .map(|(row, v)| match *v {
            Some(value) if value <= 0.0 => Err(Error::NonPositiveForLog { row, value }),
            Some(value) => Ok(Some(value.ln())),
            None => Ok(None),
        })
        .collect()
}

/// Applies a FRED-MD transform code:
/// 1 level, 2 Δx, 3 Δ²x, 4 ln x, 5 Δln x, 6 Δ²ln x, 7 Δ(x_t / x_{t−1} − 1).
/// Leading entries lost to differencing are missing.
pub fn apply_tcode(series: &[Option<f64>], code: u8) -> Result<Column> {
    Ok(match code {
        1 => series.to_vec(),
        2 => diff(series),
        3 => diff(&diff(series)),
        4 => log_levels(series)?,
        5 => diff(&log_levels(series)?),
        6 => diff(&diff(&log_levels(series)?)),
        7 => {
            let mut growth = vec![None; series.len()];
            for t in 1..series.len() {
                if let (Some(a), Some(b)) = (series[t], series[t - 1]) {
                    growth[t] = Some(a / b - 1.0);
                }
            }
            diff(&growth)
        }
        other => return Err(Error::InvalidTcode(other)),
    })
}

/// Fills interior gaps linearly between the nearest observed neighbours.
/// Leading and trailing gaps stay missing.
pub fn interpolate_missing(column: &[Option<f64>]) -> Result<Column> {
    let present: Vec<usize> = (0..column.len()).filter(|&i| column[i].is_some()).collect();
    if present.is_empty() {
        return Err(Error::AllMissing);
    }
    let mut out = column.to_vec();
    for w in present.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (ya, yb) = (column[a].unwrap(), column[b].unwrap());
        for (i, slot) in out.iter_mut().enumerate().take(b).skip(a + 1) {
            let frac = (i - a) as f64 / (b - a) as f64;
            *slot = Some(ya + frac * (yb - ya));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FactorSet {
    pub months: Vec<YearMonth>,
    /// T × k factor values.
    pub factors: DMatrix<f64>,
    /// N × k loadings with orthonormal columns.
    pub loadings: DMatrix<f64>,
    /// Share of total standardized variance per factor, non-increasing.
    pub explained_variance: Vec<f64>,
}

impl FactorSet {
    pub fn k(&self) -> usize {
        self.factors.ncols()
    }

    pub fn position(&self, month: YearMonth) -> Option<usize> {
        let first = *self.months.first()?;
        let i = month.months_since(first);
        (i >= 0 && (i as usize) < self.months.len()).then_some(i as usize)
    }

    pub fn row(&self, month: YearMonth) -> Option<Vec<f64>> {
        self.position(month)
            .map(|i| self.factors.row(i).iter().copied().collect())
    }

    /// CSV `month,f1..fk`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = vec!["month".to_string()];
        header.extend((1..=self.k()).map(|i| format!("f{i}")));
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for (i, m) in self.months.iter().enumerate() {
            let mut row = vec![m.to_string()];
            row.extend(self.factors.row(i).iter().map(|x| x.to_string()));
            w.write_record(&row).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// Reads factor values only; loadings and variance shares are not stored
    /// in the CSV and come back empty.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let k = r.headers().map_err(|e| Error::csv(path, e))?.len().saturating_sub(1);
        let mut months = Vec::new();
        let mut values = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            months.push(YearMonth::parse_loose(&rec[0])?);
            for s in rec.iter().skip(1) {
                values.push(
                    s.parse::<f64>()
                        .map_err(|e| Error::MalformedPanel(format!("{}: {e}", path.display())))?,
                );
            }
        }
        Ok(Self {
            factors: DMatrix::from_row_slice(months.len(), k, &values),
            months,
            loadings: DMatrix::zeros(0, k),
            explained_variance: vec![],
        })
    }
}

/// Transformed and interpolated panel restricted to its balanced block.
#[derive(Debug, Clone, PartialEq)]
pub struct BalancedPanel {
    pub months: Vec<YearMonth>,
    /// T × N.
    pub data: DMatrix<f64>,
}

/// Applies each series' transform code, interpolates interior gaps, and keeps
/// the longest run of months where every series is observed.
pub fn stationary_block(panel: &RawPanel) -> Result<BalancedPanel> {
    let cols = panel
        .series
        .iter()
        .zip(&panel.tcodes)
        .map(|(col, &code)| interpolate_missing(&apply_tcode(col, code)?))
        .collect::<Result<Vec<_>>>()?;
    let t = panel.months.len();
    let mut best: Option<(usize, usize)> = None;
    let mut start = None;
    for i in 0..=t {
        let full = i < t && cols.iter().all(|c| c[i].is_some());
        match (full, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                if best.is_none_or(|(a, b)| i - s > b - a) {
                    best = Some((s, i));
                }
                start = None;
            }
            _ => {}
        }
    }
    let (a, b) = best.ok_or(Error::UnbalancedPanel)?;
    let data = DMatrix::from_fn(b - a, cols.len(), |i, j| cols[j][a + i].unwrap());
    Ok(BalancedPanel {
        months: panel.months[a..b].to_vec(),
        data,
    })
}

/// Extracts `k` principal-component factors from the panel.
///
/// Each balanced column is standardized to mean 0 and sample sd 1; the
/// loadings are the top-k eigenvectors of the correlation matrix (each
/// oriented so its largest-magnitude entry is positive) and the factors are
/// the standardized data projected on them.
pub fn extract_factors(panel: &RawPanel, k: usize) -> Result<FactorSet> {
    let block = stationary_block(panel)?;
    factors_from_block(&block, k)
}

pub fn factors_from_block(block: &BalancedPanel, k: usize) -> Result<FactorSet> {
    let (t, n) = block.data.shape();
    if k == 0 || k > n {
        return Err(Error::RankDeficient {
            positive: n,
            requested: k,
        });
    }
    if t < 2 {
        return Err(Error::UnbalancedPanel);
    }
    let z = standardize(&block.data);
    let corr = (z.transpose() * &z) / (t as f64 - 1.0);
    let eig = SymmetricEigen::new(corr);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));

    let tol = 1e-10 * n as f64;
    let positive = order.iter().filter(|&&i| eig.eigenvalues[i] > tol).count();
    if positive < k {
        return Err(Error::RankDeficient { positive, requested: k });
    }
    let mut loadings = DMatrix::zeros(n, k);
    for (c, &idx) in order.iter().take(k).enumerate() {
        let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
        let mut best = 0;
        for i in 1..n {
            if v[i].abs() > v[best].abs() {
                best = i;
            }
        }
        if v[best] < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        loadings.set_column(c, &nalgebra::DVector::from_vec(v));
    }
    let factors = &z * &loadings;
    let explained_variance = order.iter().take(k).map(|&i| eig.eigenvalues[i] / n as f64).collect();
    Ok(FactorSet {
        months: block.months.clone(),
        factors,
        loadings,
        explained_variance,
    })
}

/// Column-wise standardization to mean 0 and sample sd 1. Constant columns
/// become zeros.
pub fn standardize(x: &DMatrix<f64>) -> DMatrix<f64> {
    let mut z = x.clone();
    for mut col in z.column_iter_mut() {
        let vals: Vec<f64> = col.iter().copied().collect();
        let mean = stats::mean(&vals);
        let sd = stats::sample_variance(&vals).sqrt();
        for v in col.iter_mut() {
            *v = if sd > 0.0 { (*v - mean) / sd } else { 0.0 };
        }
    }
    z
}

/// Survey sentiment regressors (`month,mics,pmi`).
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SurveySeries {
    pub months: Vec<YearMonth>,
    pub mics: Vec<Option<f64>>,
    pub pmi: Vec<Option<f64>>,
}

impl SurveySeries {
    pub fn position(&self, month: YearMonth) -> Option<usize> {
        let first = *self.months.first()?;
        let i = month.months_since(first);
        (i >= 0 && (i as usize) < self.months.len()).then_some(i as usize)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut out = SurveySeries::default();
        for rec in r.records() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            if rec.len() < 3 {
                return Err(Error::MalformedPanel(format!(
                    "{}: expected month,mics,pmi",
                    path.display()
                )));
            }
            out.months.push(YearMonth::parse_loose(&rec[0])?);
            out.mics.push(parse_cell(&rec[1]));
            out.pmi.push(parse_cell(&rec[2]));
        }
        if !is_contiguous(&out.months) {
            return Err(Error::MalformedPanel(format!(
                "{}: months are not consecutive",
                path.display()
            )));
        }
        Ok(out)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["month", "mics", "pmi"])
            .map_err(|e| Error::csv(path, e))?;
        let cell = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        for i in 0..self.months.len() {
            w.write_record([self.months[i].to_string(), cell(self.mics[i]), cell(self.pmi[i])])
                .map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}
