//! Synthetic world with planted recessions: a news corpus whose tone turns
//! negative six months ahead of each recession, a macro panel carrying a
//! weak contemporaneous recession factor, and pure-noise surveys.

#![allow(dead_code)]

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use recession_signal::factor_panel::{RawPanel, SurveySeries};
use recession_signal::indicator::RecessionSeries;
use recession_signal::YearMonth;

pub const POSITIVE: [&str; 8] = [
    "gain", "growth", "strong", "boom", "profit", "rally", "optimism", "surge",
];
pub const NEGATIVE: [&str; 8] = ["loss", "decline", "weak", "slump", "crisis", "layoff", "fear", "plunge"];

/// (start index, length) of each planted recession.
pub const EPISODES: [(usize, usize); 8] = [
    (40, 8),
    (110, 12),
    (175, 10),
    (250, 14),
    (320, 9),
    (390, 11),
    (460, 13),
    (530, 10),
];

pub const LEAD: usize = 6;

pub struct World {
    pub months: Vec<YearMonth>,
    pub rec: Vec<u8>,
}

/// Letters-only word for index `i` (digits would be stripped by the
/// tokenizer).
fn word(i: usize) -> String {
    let mut s = String::from("th");
    let mut n = i;
    loop {
        s.push((b'a' + (n % 26) as u8) as char);
        n /= 26;
        if n == 0 {
            break;
        }
    }
    s
}

pub fn world(n_months: usize) -> World {
    let start = YearMonth::new(1965, 1).unwrap();
    let months: Vec<YearMonth> = (0..n_months as i64).map(|i| start.offset(i)).collect();
    let mut rec = vec![0u8; n_months];
    for (s, len) in EPISODES {
        for r in rec.iter_mut().skip(s).take(len) {
            *r = 1;
        }
    }
    World { months, rec }
}

fn negative_tone(i: usize) -> bool {
    EPISODES.iter().any(|&(s, len)| i + LEAD >= s && i + LEAD < s + len)
}

pub struct Sizes {
    pub months: usize,
    pub docs_per_month: usize,
    pub tokens_per_doc: usize,
    pub series: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Self {
            months: 600,
            docs_per_month: 12,
            tokens_per_doc: 40,
            series: 20,
        }
    }
}

/// Writes every input file plus `config.toml` into `dir`; returns the config
/// path. `extra` is appended to the generated configuration.
pub fn write_world(dir: &Path, sizes: &Sizes, seed: u64, extra: &str) -> PathBuf {
    let w = world(sizes.months);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal: Normal<f64> = Normal::new(0.0, 1.0).unwrap();

    // Corpus: five themes of 20 words, plus sentiment words.
    let themes: Vec<Vec<String>> = (0..5).map(|t| (0..20).map(|j| word(t * 20 + j)).collect()).collect();
    let mut corpus = fs::File::create(dir.join("corpus.jsonl")).unwrap();
    for (i, m) in w.months.iter().enumerate() {
        let base: f64 = if negative_tone(i) { 0.40 } else { 0.58 };
        let share = (base + 0.06 * std_normal.sample(&mut rng)).clamp(0.05, 0.95);
        for d in 0..sizes.docs_per_month {
            let theme = &themes[rng.random_range(0..themes.len())];
            let other = &themes[rng.random_range(0..themes.len())];
            let mut toks = Vec::with_capacity(sizes.tokens_per_doc);
            for _ in 0..sizes.tokens_per_doc {
                let u: f64 = rng.random();
                let tok = if u < 0.12 {
                    if rng.random::<f64>() < share {
                        POSITIVE[rng.random_range(0..POSITIVE.len())].to_string()
                    } else {
                        NEGATIVE[rng.random_range(0..NEGATIVE.len())].to_string()
                    }
                } else if u < 0.75 {
                    theme[rng.random_range(0..theme.len())].clone()
                } else {
                    other[rng.random_range(0..other.len())].clone()
                };
                toks.push(tok);
            }
            let day = 1 + d % 28;
            writeln!(
                corpus,
                "{}",
                serde_json::json!({
                    "id": format!("{m}-{d}"),
                    "date": format!("{m}-{day:02}"),
                    "text": toks.join(" "),
                })
            )
            .unwrap();
        }
    }
    fs::write(
        dir.join("positive-words.txt"),
        format!(";; positive\n{}\n", POSITIVE.join("\n")),
    )
    .unwrap();
    fs::write(
        dir.join("negative-words.txt"),
        format!(";; negative\n{}\n", NEGATIVE.join("\n")),
    )
    .unwrap();

    // Panel: weak contemporaneous factor; a quarter of the series are
    // integrated levels with tcode 2.
    let factor: Vec<f64> = w
        .rec
        .iter()
        .map(|&r| -0.6 * r as f64 + std_normal.sample(&mut rng))
        .collect();
    let mut series = Vec::new();
    let mut tcodes = Vec::new();
    for j in 0..sizes.series {
        let loading = 0.3 + 0.5 * rng.random::<f64>();
        let stationary: Vec<f64> = factor
            .iter()
            .map(|f| loading * f + std_normal.sample(&mut rng))
            .collect();
        if j % 4 == 3 {
            let mut level = 100.0;
            series.push(
                stationary
                    .iter()
                    .map(|x| {
                        level += x;
                        Some(level)
                    })
                    .collect(),
            );
            tcodes.push(2);
        } else {
            series.push(stationary.into_iter().map(Some).collect());
            tcodes.push(1);
        }
    }
    let names = (1..=sizes.series).map(|j| format!("SER{j}")).collect();
    RawPanel::new(w.months.clone(), names, series, tcodes)
        .unwrap()
        .write_csv(&dir.join("panel.csv"))
        .unwrap();

    SurveySeries {
        months: w.months.clone(),
        mics: (0..sizes.months)
            .map(|_| Some(80.0 + 5.0 * std_normal.sample(&mut rng)))
            .collect(),
        pmi: (0..sizes.months)
            .map(|_| Some(50.0 + 3.0 * std_normal.sample(&mut rng)))
            .collect(),
    }
    .write_csv(&dir.join("surveys.csv"))
    .unwrap();

    RecessionSeries {
        months: w.months.clone(),
        rec: w.rec.clone(),
    }
    .write_csv(&dir.join("recession.csv"))
    .unwrap();

    let config = format!(
        r#"[paths]
corpus = "corpus.jsonl"
positive_words = "positive-words.txt"
negative_words = "negative-words.txt"
panel = "panel.csv"
surveys = "surveys.csv"
recession = "recession.csv"
output = "out"

{extra}
"#
    );
    let path = dir.join("config.toml");
    fs::write(&path, config).unwrap();
    path
}

/// Reduced topic model and bootstrap, otherwise the reference setup.
pub const FAST_SETTINGS: &str = r#"[lda]
topics = 8
iterations = 150
burn_in = 100
thin = 10
seed = 11

[factors]
k = 5

[model]
horizons = [1, 3, 6, 12]

[bootstrap]
block_length = 24
replications = 100
seed = 5
"#;

/// Every file under `root` with its bytes, sorted by relative path.
pub fn snapshot(root: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((p.strip_prefix(root).unwrap().to_path_buf(), fs::read(&p).unwrap()));
            }
        }
    }
    out.sort();
    out
}
