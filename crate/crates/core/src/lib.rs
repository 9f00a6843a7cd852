//! Mahalanobis-distance uncertainty and out-of-distribution detection for
//! neural classifiers, with self-supervised relabelling of multimodal
//! classes into Gaussian-friendly pseudo-classes.
//!
//! The pieces compose as: [`dataio`] loads or synthesizes labelled
//! embeddings, [`relabel::train_maple`] trains an [`nn::MlpClassifier`]
//! while [`cluster::xmeans`] splits struggling classes, [`mahal`] fits a
//! PCA reduction and a shared-covariance Gaussian head on the learned
//! embeddings, and [`metrics`] scores the resulting predictions.

pub mod benchmark;
pub mod cluster;
pub mod config;
pub mod dataio;
pub mod error;
pub mod linalg;
pub mod mahal;
pub mod metrics;
pub mod nn;
pub mod pipeline;
pub mod relabel;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
