//! End-to-end runs of the staged pipeline on a small synthetic world, with
//! every persisted table checked against independent recomputation.

mod common;

use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::sync::OnceLock;

use common::{write_world, Sizes, NEGATIVE, POSITIVE};
use recession_signal::error::Error;
use recession_signal::evaluation::{self, BacktestOptions, Scheme};
use recession_signal::factor_panel::{FactorSet, SurveySeries};
use recession_signal::indicator::{RecessionSeries, SentimentIndex};
use recession_signal::pipeline::{self, PipelineConfig};
use recession_signal::probit::{self, DesignMatrix, FitReport, ModelInputs, ModelKind, ModelSpec};
use recession_signal::YearMonth;

const MONTHS: usize = 240;
const WINDOW: usize = 24;
const HORIZONS: [usize; 2] = [1, 6];
const K: usize = 3;

const SETTINGS: &str = r#"[lda]
topics = 4
iterations = 80
burn_in = 40
thin = 10
seed = 3

[factors]
k = 3

[model]
horizons = [1, 6]

[bootstrap]
block_length = 24
replications = 2
seed = 1
"#;

fn small() -> Sizes {
    Sizes {
        months: MONTHS,
        docs_per_month: 6,
        tokens_per_doc: 30,
        series: 12,
    }
}

struct Fixture {
    _dir: tempfile::TempDir,
    root: PathBuf,
    cfg: PipelineConfig,
}

/// One complete run shared by every test that only reads its outputs.
fn fixture() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().to_path_buf();
        let cfg = PipelineConfig::load(&write_world(&root, &small(), 17, SETTINGS)).unwrap();
        pipeline::cmd_all(&cfg).unwrap();
        Fixture { _dir: dir, root, cfg }
    })
}

fn out(name: &str) -> PathBuf {
    fixture().cfg.output_dir().join(name)
}

fn read_table(path: &Path) -> Vec<BTreeMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            headers
                .iter()
                .zip(rec.unwrap().iter())
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

fn num(row: &BTreeMap<String, String>, key: &str) -> f64 {
    row[key]
        .parse()
        .unwrap_or_else(|_| panic!("{key}={:?} is not a number", row[key]))
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

fn inputs() -> ModelInputs {
    let cfg = &fixture().cfg;
    ModelInputs {
        factors: FactorSet::read_csv(&out(pipeline::FACTORS)).unwrap(),
        surveys: SurveySeries::read_csv(cfg.paths.surveys.as_deref().unwrap()).unwrap(),
        index: SentimentIndex::read_csv(&out(pipeline::SENTIMENT_INDEX)).unwrap(),
        rec: RecessionSeries::read_csv(cfg.paths.recession.as_deref().unwrap()).unwrap(),
    }
}

fn designs(h: usize) -> Vec<DesignMatrix> {
    let specs: Vec<ModelSpec> = ModelKind::ALL
        .map(|kind| ModelSpec {
            kind,
            horizon: h,
            k_factors: K,
        })
        .to_vec();
    probit::build_aligned(&inputs(), &specs).unwrap()
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let p = entry.unwrap().path();
        let target = to.join(p.file_name().unwrap());
        if p.is_dir() {
            copy_dir(&p, &target);
        } else {
            fs::copy(&p, &target).unwrap();
        }
    }
}

// --- oracles ---------------------------------------------------------------

fn oracle_f1(probs: &[f64], actual: &[u8], c: f64) -> (f64, f64, f64) {
    let (mut tp, mut fp, mut fn_) = (0.0, 0.0, 0.0);
    for (&p, &y) in probs.iter().zip(actual) {
        match (p >= c, y == 1) {
            (true, true) => tp += 1.0,
            (true, false) => fp += 1.0,
            (false, true) => fn_ += 1.0,
            _ => {}
        }
    }
    let precision = if tp + fp > 0.0 { tp / (tp + fp) } else { 0.0 };
    let recall = if tp + fn_ > 0.0 { tp / (tp + fn_) } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    (f1, precision, recall)
}

/// Probability that a random positive outranks a random negative, ties
/// counting one half.
fn oracle_auroc(probs: &[f64], actual: &[u8]) -> Option<f64> {
    let pos: Vec<f64> = probs
        .iter()
        .zip(actual)
        .filter(|(_, &y)| y == 1)
        .map(|(&p, _)| p)
        .collect();
    let neg: Vec<f64> = probs
        .iter()
        .zip(actual)
        .filter(|(_, &y)| y == 0)
        .map(|(&p, _)| p)
        .collect();
    if pos.is_empty() || neg.is_empty() {
        return None;
    }
    let mut wins = 0.0;
    for &a in &pos {
        for &b in &neg {
            wins += if a > b {
                1.0
            } else if a == b {
                0.5
            } else {
                0.0
            };
        }
    }
    Some(wins / (pos.len() * neg.len()) as f64)
}

fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

// --- index -----------------------------------------------------------------

#[test]
fn index_has_one_row_per_month_and_a_warm_up_gap() {
    let idx = SentimentIndex::read_csv(&out(pipeline::SENTIMENT_INDEX)).unwrap();
    assert_eq!(idx.len(), MONTHS);
    assert_eq!(idx.months[0], YearMonth::new(1965, 1).unwrap());
    assert!(idx.sent.iter().all(Option::is_some));
    assert!(idx.zsent[..WINDOW].iter().all(Option::is_none));
    assert!(idx.zsent[WINDOW..].iter().all(Option::is_some));
    for m in &idx.months {
        assert!(out("distances").join(format!("{m}.csv")).is_file());
        assert!(out("projection").join(format!("{m}.csv")).is_file());
    }
}

#[test]
fn sentiment_index_composes_from_its_parts() {
    let f = fixture();
    let pos: HashSet<&str> = POSITIVE.into_iter().collect();
    let neg: HashSet<&str> = NEGATIVE.into_iter().collect();
    // Some generated filler words ("the", "then", ...) are stopwords.
    let stop = recession_signal::corpus::default_stopwords();

    // Lexicon score per month: sum over documents of net polarity per token.
    let mut score: BTreeMap<String, f64> = BTreeMap::new();
    for line in fs::read_to_string(f.root.join("corpus.jsonl")).unwrap().lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        let toks: Vec<&str> = v["text"]
            .as_str()
            .unwrap()
            .split_whitespace()
            .filter(|t| !stop.contains(*t))
            .collect();
        let net = toks.iter().filter(|t| pos.contains(*t)).count() as f64
            - toks.iter().filter(|t| neg.contains(*t)).count() as f64;
        *score.entry(v["date"].as_str().unwrap()[..7].to_string()).or_default() += net / toks.len() as f64;
    }

    let idx = SentimentIndex::read_csv(&out(pipeline::SENTIMENT_INDEX)).unwrap();
    let mut sent = Vec::new();
    for (i, m) in idx.months.iter().enumerate() {
        // Coherence: population standard deviation of every matrix cell.
        let mut r = csv::Reader::from_path(out("distances").join(format!("{m}.csv"))).unwrap();
        let cells: Vec<f64> = r
            .records()
            .flat_map(|rec| {
                rec.unwrap()
                    .iter()
                    .skip(1)
                    .map(|c| c.parse::<f64>().unwrap())
                    .collect::<Vec<_>>()
            })
            .collect();
        assert_eq!(cells.len(), 16);
        let mean = cells.iter().sum::<f64>() / 16.0;
        let sigma = (cells.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / 16.0).sqrt();
        let s = score[&m.to_string()];
        assert!(close(idx.sigma[i].unwrap(), sigma, 1e-12), "{m}: sigma");
        assert!(close(idx.score[i].unwrap(), s, 1e-12), "{m}: score");
        assert!(close(idx.sent[i].unwrap(), sigma * s, 1e-12), "{m}: sent");
        sent.push(sigma * s);
    }
    // Rolling z-score over the current month and the 24 before it.
    for t in WINDOW..MONTHS {
        let w = &sent[t - WINDOW..=t];
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let sd = (w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (w.len() - 1) as f64).sqrt();
        assert!(
            close(idx.zsent[t].unwrap(), (sent[t] - mean) / sd, 1e-9),
            "zsent at {t}"
        );
    }
}

#[test]
fn rerunning_index_is_byte_identical() {
    let f = fixture();
    let other = tempfile::tempdir().unwrap();
    let mut cfg = f.cfg.clone();
    cfg.paths.output = Some(other.path().to_path_buf());
    pipeline::cmd_index(&cfg).unwrap();
    assert_eq!(
        fs::read(other.path().join(pipeline::SENTIMENT_INDEX)).unwrap(),
        fs::read(out(pipeline::SENTIMENT_INDEX)).unwrap()
    );
    assert_eq!(
        common::snapshot(&other.path().join("distances")),
        common::snapshot(&out("distances"))
    );
}

// --- fit -------------------------------------------------------------------

#[test]
fn fit_reports_have_the_expected_shape_and_criteria() {
    let rec = inputs().rec;
    for h in HORIZONS {
        let mut n_obs = None;
        for kind in ModelKind::ALL {
            let r = FitReport::read_json(&out(&pipeline::fit_report_name(kind, h))).unwrap();
            let p = match kind {
                ModelKind::FactorsOnly => K + 1,
                ModelKind::FactorsSurvey => K + 3,
                ModelKind::Proposed => K + 6,
            };
            assert_eq!(r.coefficients.len(), p, "{kind} h={h}");
            assert_eq!((r.model, r.horizon, r.model_number), (kind, h, kind.number()));
            assert!(r.converged);
            let (pf, nf) = (p as f64, r.n_obs as f64);
            assert!(close(r.aic, 2.0 * pf - 2.0 * r.log_likelihood, 1e-12));
            assert!(close(r.bic, pf * nf.ln() - 2.0 * r.log_likelihood, 1e-12));
            for c in &r.coefficients {
                assert!(close(c.z, c.estimate / c.std_error, 1e-12), "{}", c.name);
                assert!(
                    close(c.p_value, 2.0 * (1.0 - std_normal_cdf(c.z.abs())), 1e-6),
                    "{}",
                    c.name
                );
            }
            assert_eq!(r.lr_tests.len(), kind.number() - 1);
            assert_eq!(r.gammas.is_some(), kind == ModelKind::Proposed);
            // All three models share one sample.
            assert_eq!(*n_obs.get_or_insert(r.n_obs), r.n_obs);

            let probs = pipeline::read_probs(&out(&pipeline::insample_name(kind, h))).unwrap();
            assert_eq!(probs.months.len(), r.n_obs);
            // In-sample log-likelihood recomputed from the written probabilities.
            let ll: f64 = probs
                .probs
                .iter()
                .zip(&probs.actual)
                .map(|(&q, &y)| if y == 1 { q.ln() } else { (1.0 - q).ln() })
                .sum();
            assert!(
                close(ll, r.log_likelihood, 1e-9),
                "{kind} h={h}: {ll} vs {}",
                r.log_likelihood
            );
            for (m, &y) in probs.months.iter().zip(&probs.actual) {
                assert_eq!(rec.get(*m), Some(y));
            }
            // Regressors dated t − h must have a z-score, so the first target
            // is WINDOW + h months after the start.
            assert_eq!(
                probs.months[0],
                YearMonth::new(1965, 1).unwrap().offset((WINDOW + h) as i64)
            );
            assert_eq!(r.n_obs, MONTHS - WINDOW - h);
        }
    }
}

#[test]
fn lr_tests_in_reports_match_their_log_likelihoods() {
    for h in HORIZONS {
        let reports: Vec<FitReport> = ModelKind::ALL
            .map(|k| FitReport::read_json(&out(&pipeline::fit_report_name(k, h))).unwrap())
            .to_vec();
        for full in &reports {
            for t in &full.lr_tests {
                let restricted = &reports[t.restricted.number() - 1];
                let stat = 2.0 * (full.log_likelihood - restricted.log_likelihood);
                assert!(close(t.stat, stat.max(0.0), 1e-9));
                assert_eq!(t.df, full.coefficients.len() - restricted.coefficients.len());
            }
        }
    }
}

// --- evaluate --------------------------------------------------------------

fn period_file(kind: ModelKind, h: usize, period: &str) -> PathBuf {
    match Scheme::parse(period) {
        Some(s) => out(&pipeline::oos_name(kind, h, s)),
        None => {
            assert_eq!(period, "in_sample");
            out(&pipeline::insample_name(kind, h))
        }
    }
}

#[test]
fn metrics_table_is_complete_and_recomputable() {
    let rows = read_table(&out("metrics.csv"));
    let schemes = &fixture().cfg.evaluation.schemes;
    assert_eq!(rows.len(), ModelKind::ALL.len() * HORIZONS.len() * (1 + schemes.len()));
    let mut seen = HashSet::new();
    for row in &rows {
        let kind = ModelKind::parse(&row["model"]).unwrap();
        let h: usize = row["horizon"].parse().unwrap();
        assert!(seen.insert((kind, h, row["period"].clone())), "duplicate row");
        let s = pipeline::read_probs(&period_file(kind, h, &row["period"])).unwrap();
        let (f1, precision, recall) = oracle_f1(&s.probs, &s.actual, 0.5);
        assert!(close(num(row, "f1"), f1, 1e-12));
        assert!(close(num(row, "precision"), precision, 1e-12));
        assert!(close(num(row, "recall"), recall, 1e-12));
        match oracle_auroc(&s.probs, &s.actual) {
            Some(a) => assert!(close(num(row, "auroc"), a, 1e-9), "{row:?}"),
            None => assert_eq!(row["auroc"], ""),
        }
    }
}

#[test]
fn out_of_sample_files_cover_their_test_blocks() {
    for h in HORIZONS {
        let months = pipeline::read_probs(&out(&pipeline::insample_name(ModelKind::Proposed, h)))
            .unwrap()
            .months;
        let n = months.len();
        for &scheme in &fixture().cfg.evaluation.schemes {
            let block = scheme.test_block(n);
            for kind in ModelKind::ALL {
                let s = pipeline::read_probs(&out(&pipeline::oos_name(kind, h, scheme))).unwrap();
                assert_eq!(s.months, months[block.clone()]);
                assert!(s.probs.iter().all(|p| (0.0..=1.0).contains(p)));
            }
        }
        let roc = read_table(&out(&pipeline::roc_name(ModelKind::Proposed, h)));
        assert_eq!((num(&roc[0], "fpr"), num(&roc[0], "tpr")), (0.0, 0.0));
        let last = roc.last().unwrap();
        assert_eq!((num(last, "fpr"), num(last, "tpr")), (1.0, 1.0));
    }
}

#[test]
fn dm_table_matches_a_direct_computation_at_one_month() {
    let rows = read_table(&out("dm_tests.csv"));
    let schemes = &fixture().cfg.evaluation.schemes;
    assert_eq!(rows.len(), HORIZONS.len() * schemes.len() * 3);
    for row in rows.iter().filter(|r| r["horizon"] == "1") {
        let period = &row["period"];
        let a = pipeline::read_probs(&period_file(ModelKind::parse(&row["model_a"]).unwrap(), 1, period)).unwrap();
        let b = pipeline::read_probs(&period_file(ModelKind::parse(&row["model_b"]).unwrap(), 1, period)).unwrap();
        // With h = 1 the long-run variance is the plain variance.
        let d: Vec<f64> = a
            .actual
            .iter()
            .zip(a.probs.iter().zip(&b.probs))
            .map(|(&y, (&pa, &pb))| (y as f64 - pa).powi(2) - (y as f64 - pb).powi(2))
            .collect();
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
        let stat = mean / (var / n).sqrt();
        assert_eq!(num(row, "n") as usize, d.len());
        assert!(close(num(row, "stat"), stat, 1e-9), "{row:?} vs {stat}");
        assert!(close(
            num(row, "p_value"),
            2.0 * (1.0 - std_normal_cdf(stat.abs())),
            1e-6
        ));
    }
}

#[test]
fn degenerate_bootstrap_reproduces_the_point_estimate() {
    // One replicate whose single block spans the whole sample is the
    // original series, so its AUROC is the last-third estimate.
    let h = 6;
    let n = MONTHS - WINDOW - h;
    let other = tempfile::tempdir().unwrap();
    copy_dir(fixture().cfg.output_dir(), other.path());
    let mut cfg = fixture().cfg.clone();
    cfg.paths.output = Some(other.path().to_path_buf());
    cfg.model.horizons = vec![h];
    cfg.evaluation.schemes = vec![Scheme::LastThird];
    cfg.bootstrap.replications = 1;
    cfg.bootstrap.block_length = n;
    pipeline::cmd_evaluate(&cfg).unwrap();

    let metrics = read_table(&other.path().join("metrics.csv"));
    let boot = read_table(&other.path().join("bootstrap_auroc.csv"));
    assert_eq!(boot.len(), 3);
    for row in &boot {
        let point = metrics
            .iter()
            .find(|m| m["model"] == row["model"] && m["period"] == "last_third")
            .unwrap();
        assert_eq!(row["replicates"], "1");
        assert_eq!(num(row, "min"), num(row, "max"));
        assert!(
            close(num(row, "median"), num(point, "auroc"), 1e-12),
            "{row:?} vs {point:?}"
        );
    }
}

#[test]
fn bootstrap_summaries_are_ordered() {
    for row in read_table(&out("bootstrap_auroc.csv")) {
        if row["replicates"] == "0" {
            continue;
        }
        let q: Vec<f64> = ["min", "q1", "median", "q3", "max"]
            .iter()
            .map(|k| num(&row, k))
            .collect();
        assert!(q.windows(2).all(|w| w[0] <= w[1]), "{row:?}");
        assert!((q[0]..=q[4]).contains(&num(&row, "mean")));
    }
}

// --- recursive backtest ------------------------------------------------------

#[test]
fn first_backtest_step_is_fit_then_predict() {
    let d = &designs(6)[2];
    let block = Scheme::LastThird.test_block(d.n_rows());
    let i = block.start;
    let cutoff = d.months[i].offset(-6);
    let rows: Vec<usize> = (0..d.n_rows()).filter(|&j| d.months[j] <= cutoff).collect();
    let fit = probit::fit_probit(&d.select_rows(&rows)).unwrap();
    let expected = probit::predict(&fit, &d.select_rows(&[i])).unwrap()[0];
    let bt = evaluation::recursive_backtest(d, Scheme::LastThird, &BacktestOptions::default()).unwrap();
    assert_eq!(bt.months[0], d.months[i]);
    assert!(close(bt.probs[0], expected, 1e-12), "{} vs {expected}", bt.probs[0]);
}

/// Cold-start refit on exactly the rows observable at each test month.
fn scripted_backtest(d: &DesignMatrix, scheme: Scheme) -> Vec<f64> {
    let block = scheme.test_block(d.n_rows());
    block
        .clone()
        .map(|i| {
            let t = d.months[i];
            let cutoff = t.offset(-(d.horizon as i64));
            let rows: Vec<usize> = (0..d.n_rows())
                .filter(|&j| d.months[j] <= cutoff || (j >= block.end && d.months[j] > t))
                .collect();
            let fit = probit::fit_probit(&d.select_rows(&rows)).unwrap();
            probit::predict(&fit, &d.select_rows(&[i])).unwrap()[0]
        })
        .collect()
}

#[test]
fn recursive_backtest_matches_a_scripted_loop() {
    for h in HORIZONS {
        for (d, kind) in designs(h).iter().zip(ModelKind::ALL) {
            for scheme in [Scheme::LastThird, Scheme::FirstThird] {
                let bt = evaluation::recursive_backtest(d, scheme, &BacktestOptions::default()).unwrap();
                let expected = scripted_backtest(d, scheme);
                assert_eq!(bt.carried_forward, 0);
                for (a, b) in bt.probs.iter().zip(&expected) {
                    assert!((a - b).abs() < 1e-7, "{kind} h={h} {}: {a} vs {b}", scheme.label());
                }
                // The pipeline wrote the same forecasts.
                let s = pipeline::read_probs(&out(&pipeline::oos_name(kind, h, scheme))).unwrap();
                assert_eq!(s.probs, bt.probs);
            }
        }
    }
}

#[test]
fn design_regressors_never_postdate_the_forecast_origin() {
    let idx = inputs().index;
    for h in HORIZONS {
        let d = &designs(h)[2];
        let col = d.columns.iter().position(|c| c == "zsent").unwrap();
        for i in 0..d.n_rows() {
            let origin = d.regressor_month(i);
            assert_eq!(origin, d.months[i].offset(-(h as i64)));
            let z = idx.zsent[idx.position(origin).unwrap()].unwrap();
            assert_eq!(d.x[(i, col)], z);
        }
    }
}

// --- error paths -------------------------------------------------------------

fn binary() -> Command {
    Command::new(env!("CARGO_BIN_EXE_recession-signal"))
}

fn tiny_world() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let sizes = Sizes {
        months: 60,
        docs_per_month: 2,
        tokens_per_doc: 10,
        series: 4,
    };
    let cfg = write_world(
        dir.path(),
        &sizes,
        1,
        "[lda]\ntopics = 2\niterations = 10\nburn_in = 5\nthin = 1\n",
    );
    (dir, cfg)
}

#[test]
fn evaluate_before_fit_is_a_missing_artifact() {
    let (_dir, path) = tiny_world();
    let cfg = PipelineConfig::load(&path).unwrap();
    match pipeline::cmd_evaluate(&cfg) {
        Err(e @ Error::MissingArtifact { stage: "fit", .. }) => assert!(e.is_validation()),
        other => panic!("expected a missing artifact, got {other:?}"),
    }
    assert!(matches!(
        pipeline::cmd_fit(&cfg),
        Err(Error::MissingArtifact { stage: "index", .. })
    ));

    let status = binary().args(["evaluate", "--config"]).arg(&path).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn configuration_errors_exit_with_one() {
    let (dir, path) = tiny_world();
    let text = fs::read_to_string(&path).unwrap();
    fs::write(
        &path,
        text.replace("corpus = \"corpus.jsonl\"", "corpus = \"missing.jsonl\""),
    )
    .unwrap();
    let status = binary().args(["index", "--config"]).arg(&path).status().unwrap();
    assert_eq!(status.code(), Some(1));

    fs::write(&path, "[lda]\nunknown_key = 1\n").unwrap();
    let status = binary().args(["index", "--config"]).arg(&path).status().unwrap();
    assert_eq!(status.code(), Some(1));
    drop(dir);
}

#[test]
fn malformed_corpus_is_a_runtime_error() {
    let (dir, path) = tiny_world();
    let corpus = dir.path().join("corpus.jsonl");
    let mut text = fs::read_to_string(&corpus).unwrap();
    text.push_str("{\"id\": \"x\", \"date\": \"not a date\", \"text\": \"gain\"}\n");
    fs::write(&corpus, text).unwrap();
    let cfg = PipelineConfig::load(&path).unwrap();
    assert!(matches!(pipeline::cmd_index(&cfg), Err(Error::MalformedRecord { .. })));
    let status = binary().args(["index", "--config"]).arg(&path).status().unwrap();
    assert_eq!(status.code(), Some(2));
}

#[test]
fn cli_index_writes_an_index_readable_by_the_library() {
    let (dir, path) = tiny_world();
    let status = binary().args(["index", "--config"]).arg(&path).status().unwrap();
    assert!(status.success());
    let idx = SentimentIndex::read_csv(&dir.path().join("out").join(pipeline::SENTIMENT_INDEX)).unwrap();
    assert_eq!(idx.len(), 60);
    assert_eq!(idx.zsent.iter().filter(|z| z.is_some()).count(), 60 - WINDOW);
}
