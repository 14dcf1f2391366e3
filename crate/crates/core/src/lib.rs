//! Misinformation detection toolkit: dataset ingestion, text normalization,
//! tweet feature engineering, TF-IDF and embedding vectorizers, from-scratch
//! classifiers, similarity voting and evaluation reports.

pub mod corpus;
pub mod error;
pub mod evaluate;
pub mod features;
pub mod learn;
pub mod pipeline;
pub mod simclass;
pub mod textprep;
pub mod vectorize;

pub use error::{Error, Result};
