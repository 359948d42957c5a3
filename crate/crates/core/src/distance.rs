//! Raw distances between embedding vectors.
//!
//! All arithmetic is carried out in `f64` with index-ascending accumulation,
//! so a given pair always yields the same bits no matter how the pairwise
//! matrix is scheduled across threads.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DistanceKind, DistanceMatrix, EmbeddingSet};

/// Cosine results may overshoot `[0, 2]` by rounding; anything beyond this
/// margin indicates a bug rather than rounding.
const COSINE_CLAMP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Euclidean,
    SquaredEuclidean,
    Cosine,
}

impl MetricKind {
    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Euclidean => "euclidean",
            MetricKind::SquaredEuclidean => "squared_euclidean",
            MetricKind::Cosine => "cosine",
        }
    }

    pub fn distance(self, a: &[f32], b: &[f32]) -> Result<f64> {
        match self {
            MetricKind::Euclidean => euclidean(a, b),
            MetricKind::SquaredEuclidean => squared_euclidean(a, b),
            MetricKind::Cosine => cosine_distance(a, b),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" | "l2" => Ok(MetricKind::Euclidean),
            "squared_euclidean" => Ok(MetricKind::SquaredEuclidean),
            "cosine" => Ok(MetricKind::Cosine),
            other => Err(Error::validation(format!(
                "unknown metric {other:?} (expected euclidean, squared_euclidean or cosine)"
            ))),
        }
    }
}

fn check_dims(a: &[f32], b: &[f32]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::validation(format!(
            "dimension mismatch: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    Ok(())
}

#[inline]
fn sum_sq_diff(a: &[f32], b: &[f32]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = f64::from(x) - f64::from(y);
            d * d
        })
        .fold(0.0, |acc, v| acc + v)
}

pub fn squared_euclidean(a: &[f32], b: &[f32]) -> Result<f64> {
    check_dims(a, b)?;
    Ok(sum_sq_diff(a, b))
}

pub fn euclidean(a: &[f32], b: &[f32]) -> Result<f64> {
    check_dims(a, b)?;
    Ok(sum_sq_diff(a, b).sqrt())
}

/// `1 - cos(a, b)`, clamped to `[0, 2]`. Zero vectors are rejected.
pub fn cosine_distance(a: &[f32], b: &[f32]) -> Result<f64> {
    check_dims(a, b)?;
    let (mut dot, mut na, mut nb) = (0.0f64, 0.0f64, 0.0f64);
    for (&x, &y) in a.iter().zip(b) {
        let (x, y) = (f64::from(x), f64::from(y));
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(Error::validation("cosine distance of a zero-norm vector"));
    }
    let d = 1.0 - dot / (na * nb).sqrt();
    debug_assert!(
        d > -COSINE_CLAMP_TOLERANCE && d < 2.0 + COSINE_CLAMP_TOLERANCE,
        "cosine distance {d} outside rounding margin"
    );
    Ok(d.clamp(0.0, 2.0))
}

/// Raw distance matrix over every pair of rows in `set`.
///
/// Rows are processed in parallel; each entry depends only on its own pair,
/// so the result is bitwise identical to a serial double loop.
pub fn pairwise_matrix(set: &EmbeddingSet, metric: MetricKind) -> Result<DistanceMatrix> {
    let n = set.len();
    if n < 2 {
        return Err(Error::validation(format!(
            "pairwise distances need at least 2 embeddings, got {n}"
        )));
    }
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let a = set.row(i);
            (i + 1..n)
                .map(|j| metric.distance(a, set.row(j)))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    DistanceMatrix::new(n, rows.concat(), DistanceKind::Raw)
}
