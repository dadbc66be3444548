//! Document ingestion, text normalization and monthly bucketing.

use std::collections::{BTreeSet, HashSet};
use std::fs;
use std::path::Path;

use chrono::NaiveDate;
use serde::Deserialize;
use unicode_normalization::UnicodeNormalization;

use crate::error::{Error, Result};
use crate::month::{MonthRange, YearMonth};

const DEFAULT_STOPWORDS: &str = include_str!("../data/stopwords_en.txt");

pub type Stopwords = HashSet<String>;

/// The built-in English stopword list.
pub fn default_stopwords() -> Stopwords {
    parse_word_list(DEFAULT_STOPWORDS)
}

/// Reads a one-token-per-line stopword file. Blank lines are skipped.
pub fn load_stopwords(path: &Path) -> Result<Stopwords> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_word_list(&text))
}

fn parse_word_list(text: &str) -> Stopwords {
    text.lines()
        .map(|l| l.trim().to_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub id: String,
    pub date: NaiveDate,
    pub tokens: Vec<String>,
}

impl Document {
    pub fn month(&self) -> YearMonth {
        YearMonth::of(self.date)
    }
}

/// Documents sorted by (date, id) together with their lexicographic vocabulary.
#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    documents: Vec<Document>,
    vocabulary: Vec<String>,
}

impl Corpus {
    pub fn new(mut documents: Vec<Document>) -> Self {
        documents.sort_by(|a, b| a.date.cmp(&b.date).then_with(|| a.id.cmp(&b.id)));
        let vocabulary = documents
            .iter()
            .flat_map(|d| d.tokens.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        Self { documents, vocabulary }
    }

    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn vocabulary(&self) -> &[String] {
        &self.vocabulary
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Months of the earliest and latest documents.
    pub fn span(&self) -> Option<MonthRange> {
        let first = self.documents.first()?.month();
        let last = self.documents.last()?.month();
        MonthRange::new(first, last).ok()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonthlySlice {
    pub month: YearMonth,
    pub documents: Vec<Document>,
}

impl MonthlySlice {
    pub fn token_count(&self) -> usize {
        self.documents.iter().map(|d| d.tokens.len()).sum()
    }
}

/// Normalizes raw text into tokens.
///
/// The text is NFC-normalized and lowercased, then split into maximal
/// alphanumeric runs. Runs containing a digit are dropped whole ("q3",
/// "300"); the rest are split into maximal ASCII-letter runs, and stopwords
/// are removed.
pub fn preprocess(raw_text: &str, stopwords: &Stopwords) -> Vec<String> {
    let normalized: String = raw_text.nfc().collect::<String>().to_lowercase();
    let mut tokens = Vec::new();
    for chunk in normalized.split(|c: char| !c.is_alphanumeric()) {
        if chunk.is_empty() || chunk.chars().any(|c| c.is_numeric()) {
            continue;
        }
        for word in chunk.split(|c: char| !c.is_ascii_lowercase()) {
            if !word.is_empty() && !stopwords.contains(word) {
                tokens.push(word.to_string());
            }
        }
    }
    tokens
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    Jsonl,
    Csv,
}

impl InputFormat {
    /// Guesses the format from a file extension.
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()? {
            "jsonl" | "json" | "ndjson" => Some(Self::Jsonl),
            "csv" => Some(Self::Csv),
            _ => None,
        }
    }
}

#[derive(Deserialize)]
struct RawRecord {
    #[serde(default)]
    id: Option<String>,
    date: String,
    text: String,
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    // Accept full timestamps by keeping only the calendar date.
    let date_part = s.get(..10).unwrap_or(s);
    NaiveDate::parse_from_str(date_part, "%Y-%m-%d").ok()
}

fn make_document(rec: RawRecord, line: usize, stopwords: &Stopwords) -> Result<Document> {
    if rec.date.trim().is_empty() {
        return Err(Error::MalformedRecord {
            line,
            reason: "empty date".into(),
        });
    }
    let date = parse_date(&rec.date).ok_or_else(|| Error::MalformedRecord {
        line,
        reason: format!("unparseable date {:?}", rec.date),
    })?;
    let id = rec.id.filter(|s| !s.is_empty()).unwrap_or_else(|| line.to_string());
    Ok(Document {
        id,
        date,
        tokens: preprocess(&rec.text, stopwords),
    })
}

/// Loads and preprocesses a corpus file. Record order in the file does not
/// affect the result.
pub fn load_documents(path: &Path, format: InputFormat, stopwords: &Stopwords) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let documents = match format {
        InputFormat::Jsonl => parse_jsonl(&text, stopwords)?,
        InputFormat::Csv => parse_csv(&text, stopwords)?,
    };
    if documents.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(Corpus::new(documents))
}

fn parse_jsonl(text: &str, stopwords: &Stopwords) -> Result<Vec<Document>> {
    let mut docs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawRecord = serde_json::from_str(line).map_err(|e| Error::MalformedRecord {
            line: line_no,
            reason: e.to_string(),
        })?;
        docs.push(make_document(rec, line_no, stopwords)?);
    }
    Ok(docs)
}

fn parse_csv(text: &str, stopwords: &Stopwords) -> Result<Vec<Document>> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
    let mut docs = Vec::new();
    for (i, rec) in reader.deserialize::<RawRecord>().enumerate() {
        // Header is line 1.
        let line_no = i + 2;
        let rec = rec.map_err(|e| Error::MalformedRecord {
            line: e.position().map(|p| p.line() as usize).unwrap_or(line_no),
            reason: e.to_string(),
        })?;
        docs.push(make_document(rec, line_no, stopwords)?);
    }
    Ok(docs)
}

/// One slice per month of `span`, in order. Months without documents yield
/// empty slices; documents outside the span are dropped.
pub fn bucket_monthly(corpus: &Corpus, span: MonthRange) -> Vec<MonthlySlice> {
    let mut slices: Vec<MonthlySlice> = span
        .iter()
        .map(|month| MonthlySlice {
            month,
            documents: Vec::new(),
        })
        .collect();
    for doc in corpus.documents() {
        if let Some(i) = span.index_of(doc.month()) {
            slices[i].documents.push(doc.clone());
        }
    }
    slices
}
