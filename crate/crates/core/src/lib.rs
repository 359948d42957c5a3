//! Perceptual-variability scoring for sets of generated images.
//!
//! The crate works on image *embeddings* produced by an external backbone and
//! turns them into interpretable scores:
//!
//! 1. [`distance`] computes raw pairwise distances between embeddings.
//! 2. [`normalization`] maps raw distances to `[0, 1]` through an empirical
//!    CDF fitted on a reference sample of the same backbone and generator.
//! 3. [`variability`] aggregates normalized distances with U-statistics
//!    (pairwise mean and k-expected maximum) and reports the inverted
//!    similarity-style score `w1kp = 1 - eta`.
//! 4. [`calibration`] fits the three cutoffs that split scores into the
//!    `none`/`low`/`mid`/`high` similarity levels against graded human labels.
//! 5. [`evaluation`] scores a backbone against two-alternative forced-choice
//!    triplet judgments.
//! 6. [`analysis`] builds prompt-reusability curves, classical MDS layouts,
//!    Spearman correlations, and splits prompts into main text and keywords.
//!
//! ```
//! use w1kp::{distance, normalization, variability, EmbeddingSet, MetricKind};
//!
//! let set = EmbeddingSet::from_rows(
//!     vec!["a".into(), "b".into(), "c".into()],
//!     vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]],
//!     "toy",
//! )
//! .unwrap();
//! let raw = distance::pairwise_matrix(&set, MetricKind::Euclidean).unwrap();
//! let cdf = normalization::fit_cdf(raw.values().to_vec(), MetricKind::Euclidean, "toy").unwrap();
//! let normalized = normalization::normalize_matrix(&raw, &cdf).unwrap();
//! let score = variability::eta_mean(&normalized).unwrap();
//! assert_eq!(score.eta + score.w1kp, 1.0);
//! ```

pub mod analysis;
pub mod calibration;
pub mod distance;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod ks;
pub mod model;
pub mod normalization;
pub mod variability;

pub use crate::calibration::CalibrationCutoffs;
pub use crate::distance::MetricKind;
pub use crate::error::{Error, Result};
pub use crate::model::{
    DistanceKind, DistanceMatrix, EmbeddingSet, GradedJudgment, JudgmentKind, JudgmentRecords,
    SimilarityLevel, TripletJudgment,
};
pub use crate::normalization::FittedCdf;
pub use crate::variability::VariabilityScore;
