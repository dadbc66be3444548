//! News-sentiment leading indicator for recession forecasting.
//!
//! The pipeline runs in three stages:
//!
//! 1. [`corpus`], [`lexicon`], [`lda`], [`topic_geometry`] and [`indicator`]
//!    turn dated news text into a monthly sentiment index. Each month is
//!    scored with an opinion lexicon, weighted by the dispersion of the
//!    month's Jensen–Shannon topic-distance matrix, and relativized with a
//!    rolling z-score.
//! 2. [`factor_panel`] extracts principal-component factors from a
//!    FRED-MD style macro panel, and [`probit`] fits lagged probit recession
//!    models that combine factors, survey sentiment and the news index.
//! 3. [`evaluation`] scores the forecasts (F1, ROC/AUROC, recursive
//!    backtests, moving-block bootstrap, Diebold–Mariano).
//!
//! [`pipeline`] wires the stages together behind the `recession-signal`
//! command-line tool.

// Negated comparisons are deliberate: they route NaN to the failure branch.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod factor_panel;
pub mod indicator;
pub mod lda;
pub mod lexicon;
pub mod month;
pub mod pipeline;
pub mod probit;
pub mod stats;
pub mod topic_geometry;

pub use error::{Error, Result};
pub use month::{MonthRange, YearMonth};
