//! Meta-learning toolkit that predicts whether tuning the hyperparameters of
//! an RBF SVM pays off on a dataset, compared with using defaults.

pub mod config;
pub mod data;
pub mod error;
pub mod eval;
pub mod labeling;
pub mod learners;
pub mod matrix;
pub mod metafeatures;
pub mod metalevel;
pub mod pipeline;
pub mod projection;
pub mod rng;
pub mod svg;
pub mod tuning;

pub use error::{Error, Result};
