//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling.
//!
//! Each monthly slice is modeled independently with its own vocabulary. The
//! sampler integrates out the document-topic and topic-word distributions and
//! resamples one token assignment at a time from
//!
//! ```text
//! p(z = k | rest) ∝ (n_dk + α) · (n_kw + β) / (n_k + Vβ)
//! ```
//!
//! Point estimates of φ and θ are averaged over thinned post-burn-in sweeps.

use std::collections::BTreeSet;
use std::collections::HashMap;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::corpus::MonthlySlice;
use crate::error::{Error, Result};
use crate::month::YearMonth;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LdaConfig {
    pub topics: usize,
    /// Document-topic concentration; `None` means 50 / topics.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub iterations: usize,
    pub burn_in: usize,
    /// Sweeps between averaged samples after burn-in.
    pub thin: usize,
    /// Use only the final sweep instead of averaging thinned samples.
    pub single_sample: bool,
    pub seed: u64,
}

impl Default for LdaConfig {
    fn default() -> Self {
        Self {
            topics: 30,
            alpha: None,
            beta: 0.1,
            iterations: 1000,
            burn_in: 500,
            thin: 10,
            single_sample: false,
            seed: 0,
        }
    }
}

impl LdaConfig {
    pub fn alpha(&self) -> f64 {
        self.alpha.unwrap_or(50.0 / self.topics as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_string()));
        if self.topics == 0 {
            return bad("topics must be positive");
        }
        if !(self.alpha() > 0.0 && self.alpha().is_finite()) {
            return bad("alpha must be positive");
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return bad("beta must be positive");
        }
        if self.iterations == 0 {
            return bad("iterations must be positive");
        }
        if self.burn_in >= self.iterations {
            return bad("burn_in must be smaller than iterations");
        }
        if self.thin == 0 {
            return bad("thin must be positive");
        }
        Ok(())
    }
}

/// Fitted topic model for one slice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopicModel {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub month: Option<YearMonth>,
    pub vocabulary: Vec<String>,
    /// K rows of V word probabilities.
    pub phi: Vec<Vec<f64>>,
    /// One row of K topic probabilities per document.
    pub theta: Vec<Vec<f64>>,
    pub config: LdaConfig,
}

impl TopicModel {
    pub fn topics(&self) -> usize {
        self.phi.len()
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

struct Sampler {
    k: usize,
    v: usize,
    alpha: f64,
    beta: f64,
    /// Word index per token, documents concatenated.
    words: Vec<usize>,
    /// Document of each token.
    doc_of: Vec<usize>,
    z: Vec<usize>,
    n_dk: Vec<u32>,
    n_kw: Vec<u32>,
    n_k: Vec<u32>,
    doc_len: Vec<u32>,
    probs: Vec<f64>,
    rng: ChaCha8Rng,
}

impl Sampler {
    fn new(docs: &[Vec<usize>], k: usize, v: usize, alpha: f64, beta: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = docs.len();
        let mut s = Sampler {
            k,
            v,
            alpha,
            beta,
            words: Vec::new(),
            doc_of: Vec::new(),
            z: Vec::new(),
            n_dk: vec![0; m * k],
            n_kw: vec![0; k * v],
            n_k: vec![0; k],
            doc_len: docs.iter().map(|d| d.len() as u32).collect(),
            probs: vec![0.0; k],
            rng: ChaCha8Rng::seed_from_u64(0),
        };
        for (d, doc) in docs.iter().enumerate() {
            for &w in doc {
                let topic = rng.random_range(0..k);
                s.words.push(w);
                s.doc_of.push(d);
                s.z.push(topic);
                s.n_dk[d * k + topic] += 1;
                s.n_kw[topic * v + w] += 1;
                s.n_k[topic] += 1;
            }
        }
        s.rng = rng;
        s
    }

    fn sweep(&mut self) {
        let (k, v) = (self.k, self.v);
        let vbeta = v as f64 * self.beta;
        for i in 0..self.words.len() {
            let (w, d, old) = (self.words[i], self.doc_of[i], self.z[i]);
            self.n_dk[d * k + old] -= 1;
            self.n_kw[old * v + w] -= 1;
            self.n_k[old] -= 1;

            let mut total = 0.0;
            for t in 0..k {
                let p = (self.n_dk[d * k + t] as f64 + self.alpha) * (self.n_kw[t * v + w] as f64 + self.beta)
                    / (self.n_k[t] as f64 + vbeta);
                total += p;
                self.probs[t] = total;
            }
            let u = self.rng.random::<f64>() * total;
            let new = self.probs.iter().position(|&c| u < c).unwrap_or(k - 1);

            self.z[i] = new;
            self.n_dk[d * k + new] += 1;
            self.n_kw[new * v + w] += 1;
            self.n_k[new] += 1;
        }
        debug_assert!(self.counts_consistent());
    }

    fn counts_consistent(&self) -> bool {
        let (k, v) = (self.k, self.v);
        let topics_ok =
            (0..k).all(|t| self.n_kw[t * v..(t + 1) * v].iter().map(|&c| c as u64).sum::<u64>() == self.n_k[t] as u64);
        let docs_ok = self
            .doc_len
            .iter()
            .enumerate()
            .all(|(d, &len)| self.n_dk[d * k..(d + 1) * k].iter().sum::<u32>() == len);
        topics_ok && docs_ok
    }

    fn phi(&self) -> Vec<Vec<f64>> {
        let vbeta = self.v as f64 * self.beta;
        (0..self.k)
            .map(|t| {
                let denom = self.n_k[t] as f64 + vbeta;
                (0..self.v)
                    .map(|w| (self.n_kw[t * self.v + w] as f64 + self.beta) / denom)
                    .collect()
            })
            .collect()
    }

    fn theta(&self) -> Vec<Vec<f64>> {
        let kalpha = self.k as f64 * self.alpha;
        self.doc_len
            .iter()
            .enumerate()
            .map(|(d, &len)| {
                let denom = len as f64 + kalpha;
                (0..self.k)
                    .map(|t| (self.n_dk[d * self.k + t] as f64 + self.alpha) / denom)
                    .collect()
            })
            .collect()
    }

    fn log_likelihood(&self) -> f64 {
        let phi = self.phi();
        let theta = self.theta();
        self.words
            .iter()
            .zip(&self.doc_of)
            .map(|(&w, &d)| (0..self.k).map(|t| theta[d][t] * phi[t][w]).sum::<f64>().ln())
            .sum()
    }
}

/// Sorted slice vocabulary and each document's tokens as word indices.
fn index_slice(slice: &MonthlySlice) -> (Vec<String>, Vec<Vec<usize>>) {
    let vocabulary: Vec<String> = slice
        .documents
        .iter()
        .flat_map(|d| d.tokens.iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let index: HashMap<&str, usize> = vocabulary.iter().enumerate().map(|(i, w)| (w.as_str(), i)).collect();
    let docs = slice
        .documents
        .iter()
        .map(|d| d.tokens.iter().map(|t| index[t.as_str()]).collect())
        .collect();
    (vocabulary, docs)
}

fn accumulate(acc: &mut [Vec<f64>], rows: &[Vec<f64>]) {
    for (a, r) in acc.iter_mut().zip(rows) {
        for (x, y) in a.iter_mut().zip(r) {
            *x += y;
        }
    }
}

fn scale(rows: &mut [Vec<f64>], by: f64) {
    for r in rows {
        for x in r.iter_mut() {
            *x /= by;
        }
    }
}

/// Fits LDA to one monthly slice. Deterministic for a given seed.
pub fn fit_lda(slice: &MonthlySlice, config: &LdaConfig) -> Result<TopicModel> {
    fit_lda_traced(slice, config).map(|(m, _)| m)
}

/// Like [`fit_lda`], also returning the in-sample log-likelihood of the
/// current point estimates after every sweep.
pub fn fit_lda_traced(slice: &MonthlySlice, config: &LdaConfig) -> Result<(TopicModel, Vec<f64>)> {
    fit(slice, config, true)
}

fn fit(slice: &MonthlySlice, config: &LdaConfig, trace: bool) -> Result<(TopicModel, Vec<f64>)> {
    config.validate()?;
    if slice.token_count() == 0 {
        return Err(Error::EmptySlice);
    }
    let (vocabulary, docs) = index_slice(slice);
    let k = config.topics;
    let mut sampler = Sampler::new(&docs, k, vocabulary.len(), config.alpha(), config.beta, config.seed);

    let mut phi_acc = vec![vec![0.0; vocabulary.len()]; k];
    let mut theta_acc = vec![vec![0.0; k]; docs.len()];
    let mut samples = 0usize;
    let mut lls = Vec::new();
    for it in 0..config.iterations {
        sampler.sweep();
        if trace {
            lls.push(sampler.log_likelihood());
        }
        let post = it + 1 - config.burn_in.min(it + 1);
        if !config.single_sample && it >= config.burn_in && post.is_multiple_of(config.thin) {
            accumulate(&mut phi_acc, &sampler.phi());
            accumulate(&mut theta_acc, &sampler.theta());
            samples += 1;
        }
    }
    let (phi, theta) = if samples == 0 {
        (sampler.phi(), sampler.theta())
    } else {
        scale(&mut phi_acc, samples as f64);
        scale(&mut theta_acc, samples as f64);
        (phi_acc, theta_acc)
    };
    Ok((
        TopicModel {
            month: Some(slice.month),
            vocabulary,
            phi,
            theta,
            config: config.clone(),
        },
        lls,
    ))
}

/// Σ over tokens of `ln Σ_k θ_dk φ_kw`.
///
/// Documents are matched to `model.theta` by position; documents beyond the
/// fitted ones use the mean topic mixture. Out-of-vocabulary tokens are
/// skipped.
pub fn held_out_log_likelihood(model: &TopicModel, slice: &MonthlySlice) -> f64 {
    let index: HashMap<&str, usize> = model
        .vocabulary
        .iter()
        .enumerate()
        .map(|(i, w)| (w.as_str(), i))
        .collect();
    let k = model.topics();
    let mean_theta: Vec<f64> = if model.theta.is_empty() {
        vec![1.0 / k as f64; k]
    } else {
        (0..k)
            .map(|t| model.theta.iter().map(|r| r[t]).sum::<f64>() / model.theta.len() as f64)
            .collect()
    };
    let mut total = 0.0;
    for (d, doc) in slice.documents.iter().enumerate() {
        let theta = model.theta.get(d).unwrap_or(&mean_theta);
        for tok in &doc.tokens {
            if let Some(&w) = index.get(tok.as_str()) {
                let p: f64 = (0..k).map(|t| theta[t] * model.phi[t][w]).sum();
                total += p.min(1.0).ln();
            }
        }
    }
    total
}
