//! Empirical-CDF normalization of raw distances.
//!
//! A [`FittedCdf`] keeps the full sorted reference sample of raw distances
//! for one (metric, backbone, generator) combination. A raw distance `x` maps
//! to the fraction of sample entries `<= x`, which is uniform on `[0, 1]`
//! when `x` comes from the same distribution as the sample.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::distance::MetricKind;
use crate::error::{Error, Result};
use crate::model::{pair_count, DistanceKind, DistanceMatrix, EmbeddingSet};

pub const CDF_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedCdf {
    metric: MetricKind,
    provenance: String,
    sample: Vec<f64>,
}

/// Fits an empirical CDF. Input order is irrelevant; duplicates are kept.
pub fn fit_cdf(
    mut distances: Vec<f64>,
    metric: MetricKind,
    provenance: impl Into<String>,
) -> Result<FittedCdf> {
    if distances.is_empty() {
        return Err(Error::validation("cannot fit a CDF to an empty sample"));
    }
    if let Some((i, v)) = distances
        .iter()
        .enumerate()
        .find(|(_, v)| !v.is_finite() || **v < 0.0)
    {
        return Err(Error::validation(format!(
            "sample entry {i} is {v}; distances must be finite and non-negative"
        )));
    }
    distances.sort_by(f64::total_cmp);
    Ok(FittedCdf {
        metric,
        provenance: provenance.into(),
        sample: distances,
    })
}

impl FittedCdf {
    pub fn metric(&self) -> MetricKind {
        self.metric
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Sorted reference sample.
    pub fn sample(&self) -> &[f64] {
        &self.sample
    }

    pub fn len(&self) -> usize {
        self.sample.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sample.is_empty()
    }

    /// Fraction of sample entries `<= x`. Values past the sample maximum
    /// saturate at exactly 1.0.
    pub fn apply(&self, x: f64) -> f64 {
        let count = self.sample.partition_point(|&s| s <= x);
        count as f64 / self.sample.len() as f64
    }

    /// Checks that the sample is sorted, finite and non-negative.
    fn validate(&self) -> Result<()> {
        if self.sample.is_empty() {
            return Err(Error::validation("CDF sample is empty"));
        }
        if self.sample.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::validation(
                "CDF sample has negative or non-finite entries",
            ));
        }
        if self.sample.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::validation("CDF sample is not sorted ascending"));
        }
        Ok(())
    }
}

/// Free-function form of [`FittedCdf::apply`].
pub fn apply_cdf(cdf: &FittedCdf, x: f64) -> f64 {
    cdf.apply(x)
}

/// Maps every entry of a raw matrix through the CDF.
pub fn normalize_matrix(raw: &DistanceMatrix, cdf: &FittedCdf) -> Result<DistanceMatrix> {
    if raw.kind() != DistanceKind::Raw {
        return Err(Error::validation(
            "normalize_matrix expects a raw distance matrix",
        ));
    }
    raw.map(DistanceKind::Normalized, |v| cdf.apply(v))
}

/// Draws `count` distinct unordered index pairs out of `n` items.
///
/// Uses Floyd's subset sampling over the linear pair index with a ChaCha8
/// generator seeded by `seed_from_u64(seed)`. Pairs come back in ascending
/// `(i, j)` order.
pub fn sample_pairs(n: usize, count: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if n < 2 {
        return Err(Error::Capacity(format!(
            "sampling pairs needs at least 2 images, got {n}"
        )));
    }
    let total = pair_count(n) as u64;
    if count as u64 > total {
        return Err(Error::Capacity(format!(
            "requested {count} distinct pairs but {n} images only have {total}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut chosen = BTreeSet::new();
    for upper in total - count as u64..total {
        let t = rng.random_range(0..=upper);
        if !chosen.insert(t) {
            chosen.insert(upper);
        }
    }
    let mut pairs = Vec::with_capacity(count);
    let (mut i, mut row_start, mut row_len) = (0usize, 0u64, (n - 1) as u64);
    for p in chosen {
        while p >= row_start + row_len {
            row_start += row_len;
            i += 1;
            row_len -= 1;
        }
        pairs.push((i, i + 1 + (p - row_start) as usize));
    }
    Ok(pairs)
}

/// Raw distances of the given index pairs, fitted into a CDF.
pub fn fit_cdf_from_pairs(
    set: &EmbeddingSet,
    pairs: &[(usize, usize)],
    metric: MetricKind,
    provenance: impl Into<String>,
) -> Result<FittedCdf> {
    let distances = pairs
        .iter()
        .map(|&(a, b)| {
            if a >= set.len() || b >= set.len() || a == b {
                return Err(Error::validation(format!("invalid pair ({a}, {b})")));
            }
            metric.distance(set.row(a), set.row(b))
        })
        .collect::<Result<Vec<_>>>()?;
    fit_cdf(distances, metric, provenance)
}

#[derive(Serialize, Deserialize)]
struct CdfFile {
    version: u32,
    metric: MetricKind,
    provenance: String,
    sample: Vec<f64>,
}

pub fn cdf_to_json(cdf: &FittedCdf) -> String {
    serde_json::to_string(&CdfFile {
        version: CDF_FORMAT_VERSION,
        metric: cdf.metric,
        provenance: cdf.provenance.clone(),
        sample: cdf.sample.clone(),
    })
    .expect("CDF serialization cannot fail")
}

pub fn cdf_from_json(text: &str, context: &str) -> Result<FittedCdf> {
    let fail = |msg: String| Error::format(context, "document", msg);
    let value: serde_json::Value = serde_json::from_str(text)
        .map_err(|e| Error::format(context, format!("line {}", e.line()), e.to_string()))?;
    match value.get("version").and_then(serde_json::Value::as_u64) {
        Some(v) if v == u64::from(CDF_FORMAT_VERSION) => {}
        Some(v) => {
            return Err(fail(format!(
                "unsupported CDF version {v}, expected {CDF_FORMAT_VERSION}"
            )))
        }
        None => return Err(fail("missing integer \"version\" key".into())),
    }
    let file: CdfFile = serde_json::from_value(value).map_err(|e| fail(e.to_string()))?;
    let cdf = FittedCdf {
        metric: file.metric,
        provenance: file.provenance,
        sample: file.sample,
    };
    cdf.validate().map_err(|e| fail(e.to_string()))?;
    Ok(cdf)
}

/// Writes the CDF artifact as JSON. Sample values use shortest round-trip
/// decimal form, so loading reproduces them exactly.
pub fn save_cdf(cdf: &FittedCdf, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, cdf_to_json(cdf)).map_err(|e| Error::io(path, e))
}

pub fn load_cdf(path: impl AsRef<Path>) -> Result<FittedCdf> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    cdf_from_json(&text, &path.display().to_string())
}
