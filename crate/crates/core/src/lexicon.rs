//! Opinion-lexicon scoring of documents and months.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::MonthlySlice;
use crate::error::{Error, Result};
use crate::month::YearMonth;

/// Disjoint sets of positive (+1) and negative (-1) words.
#[derive(Debug, Clone, Default)]
pub struct Lexicon {
    positive: HashSet<String>,
    negative: HashSet<String>,
}

impl Lexicon {
    pub fn new<P, N>(positive: P, negative: N) -> Result<Self>
    where
        P: IntoIterator,
        P::Item: AsRef<str>,
        N: IntoIterator,
        N::Item: AsRef<str>,
    {
        let positive: HashSet<String> = positive.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        let negative: HashSet<String> = negative.into_iter().map(|w| w.as_ref().to_lowercase()).collect();
        if let Some(w) = positive.intersection(&negative).min() {
            return Err(Error::LexiconOverlap(w.clone()));
        }
        Ok(Self { positive, negative })
    }

    /// Loads `positive-words.txt` / `negative-words.txt` style files: one word
    /// per line, `;` comment lines and blank lines ignored.
    pub fn from_files(positive: &Path, negative: &Path) -> Result<Self> {
        Self::new(read_word_file(positive)?, read_word_file(negative)?)
    }

    pub fn polarity(&self, token: &str) -> i32 {
        if self.positive.contains(token) {
            1
        } else if self.negative.contains(token) {
            -1
        } else {
            0
        }
    }

    /// The same lexicon with positive and negative swapped.
    pub fn inverted(&self) -> Self {
        Self {
            positive: self.negative.clone(),
            negative: self.positive.clone(),
        }
    }

    pub fn positive(&self) -> &HashSet<String> {
        &self.positive
    }

    pub fn negative(&self) -> &HashSet<String> {
        &self.negative
    }
}

fn read_word_file(path: &Path) -> Result<Vec<String>> {
    // The widely used opinion lexicon ships as Latin-1; decode lossily.
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = String::from_utf8_lossy(&bytes);
    Ok(text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with(';'))
        .map(str::to_lowercase)
        .collect())
}

/// Net polarity per token: (#positive − #negative) / #tokens, 0 when empty.
pub fn score_document<S: AsRef<str>>(tokens: &[S], lexicon: &Lexicon) -> f64 {
    if tokens.is_empty() {
        return 0.0;
    }
    let net: i64 = tokens.iter().map(|t| lexicon.polarity(t.as_ref()) as i64).sum();
    net as f64 / tokens.len() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodScore {
    pub period: YearMonth,
    pub score: f64,
}

/// Sum of document scores in the slice. Summing rather than averaging keeps
/// the volume of coverage in the signal.
pub fn score_period(slice: &MonthlySlice, lexicon: &Lexicon) -> PeriodScore {
    PeriodScore {
        period: slice.month,
        score: slice.documents.iter().map(|d| score_document(&d.tokens, lexicon)).sum(),
    }
}

/// Writes `period,score`.
pub fn write_scores(path: &Path, scores: &[PeriodScore]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for s in scores {
        w.serialize(s).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn read_scores(path: &Path) -> Result<Vec<PeriodScore>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::csv(path, e))
}
