//! Tweet and user feature extraction, encoding, standardization, selection
//! and projection for the network-based classifiers.

mod extract;
mod frame;
pub mod lexicon;
pub mod pca;
pub mod pos;
pub mod readability;
pub mod rfe;
pub mod syllables;

pub use extract::{
    extract_features, is_emoji, is_punctuation, sentiment, FeatureValue, FeatureVector,
    CATEGORICAL_FEATURES, FEATURE_NAMES, TWEET_FEATURE_COUNT,
};
pub use frame::{
    read_feature_csv, write_feature_csv, FeatureFrame, FeaturePipeline, FeatureTable, OneHotEncoder,
    Scaler,
};
pub use lexicon::{Lexicons, PosLexicon};
pub use pca::{pca, pca2, Pca};
pub use readability::{readability, ReadabilityScores};
pub use rfe::{rfe_select, RfeResult};
