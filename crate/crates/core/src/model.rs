//! Domain types shared by every stage of the pipeline.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered set of fixed-dimension image embeddings.
///
/// Rows are stored contiguously (row-major) as `f32`. Every constructor
/// checks that ids are unique, that the dimension is at least one, and that
/// every value is finite, so downstream code can rely on those properties.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    ids: Vec<String>,
    dim: usize,
    data: Vec<f32>,
    provenance: String,
}

impl EmbeddingSet {
    /// Builds a set from row-major data of `ids.len() * dim` values.
    pub fn from_flat(
        ids: Vec<String>,
        dim: usize,
        data: Vec<f32>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if ids.is_empty() {
            return Err(Error::validation(
                "embedding set must contain at least one row",
            ));
        }
        if dim == 0 {
            return Err(Error::validation("embedding dimension must be at least 1"));
        }
        if data.len() != ids.len() * dim {
            return Err(Error::validation(format!(
                "expected {} values for {} rows of dimension {}, got {}",
                ids.len() * dim,
                ids.len(),
                dim,
                data.len()
            )));
        }
        let mut seen = HashSet::with_capacity(ids.len());
        for id in &ids {
            if !seen.insert(id.as_str()) {
                return Err(Error::validation(format!("duplicate image id {id:?}")));
            }
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::validation(format!(
                "non-finite value {} in row {} ({:?}), column {}",
                data[pos],
                pos / dim,
                ids[pos / dim],
                pos % dim
            )));
        }
        Ok(EmbeddingSet {
            ids,
            dim,
            data,
            provenance: provenance.into(),
        })
    }

    pub fn from_rows(
        ids: Vec<String>,
        rows: Vec<Vec<f32>>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if ids.len() != rows.len() {
            return Err(Error::validation(format!(
                "{} ids for {} rows",
                ids.len(),
                rows.len()
            )));
        }
        let dim = rows.first().map_or(0, Vec::len);
        if let Some((i, row)) = rows.iter().enumerate().find(|(_, r)| r.len() != dim) {
            return Err(Error::validation(format!(
                "row {i} has dimension {}, expected {dim}",
                row.len()
            )));
        }
        let data = rows.into_iter().flatten().collect();
        Self::from_flat(ids, dim, data, provenance)
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    /// Row-major values.
    pub fn as_flat(&self) -> &[f32] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f32]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    /// Index of the row with the given id, if any.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    /// Index lookup table for repeated id resolution.
    pub fn index(&self) -> std::collections::HashMap<&str, usize> {
        self.ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect()
    }
}

/// Whether a matrix holds raw backbone distances or CDF-normalized ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceKind {
    Raw,
    Normalized,
}

/// Symmetric pairwise distance matrix with an implicit zero diagonal.
///
/// Only the strict upper triangle is stored, row by row: `(0,1), (0,2), ...,
/// (0,n-1), (1,2), ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    size: usize,
    values: Vec<f64>,
    kind: DistanceKind,
}

impl DistanceMatrix {
    pub fn new(size: usize, values: Vec<f64>, kind: DistanceKind) -> Result<Self> {
        let expected = pair_count(size);
        if values.len() != expected {
            return Err(Error::validation(format!(
                "a {size}x{size} matrix needs {expected} upper-triangular values, got {}",
                values.len()
            )));
        }
        for (p, &v) in values.iter().enumerate() {
            let in_range = match kind {
                DistanceKind::Raw => v.is_finite() && v >= 0.0,
                DistanceKind::Normalized => (0.0..=1.0).contains(&v),
            };
            if !in_range {
                return Err(Error::validation(format!(
                    "{kind:?} distance {v} at pair index {p} is out of range"
                )));
            }
        }
        Ok(DistanceMatrix { size, values, kind })
    }

    /// Builds a matrix by evaluating `f(i, j)` for every `i < j`.
    pub fn from_fn(
        size: usize,
        kind: DistanceKind,
        mut f: impl FnMut(usize, usize) -> f64,
    ) -> Result<Self> {
        let mut values = Vec::with_capacity(pair_count(size));
        for i in 0..size {
            for j in i + 1..size {
                values.push(f(i, j));
            }
        }
        Self::new(size, values, kind)
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn kind(&self) -> DistanceKind {
        self.kind
    }

    /// Upper-triangular values in storage order.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Distance between items `i` and `j`; zero on the diagonal.
    ///
    /// Panics if either index is out of bounds.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        assert!(i < self.size && j < self.size, "index out of bounds");
        match i.cmp(&j) {
            std::cmp::Ordering::Equal => 0.0,
            std::cmp::Ordering::Less => self.values[self.offset(i, j)],
            std::cmp::Ordering::Greater => self.values[self.offset(j, i)],
        }
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        // rows 0..i hold (n-1) + (n-2) + ... + (n-i) entries
        i * (2 * self.size - i - 1) / 2 + (j - i - 1)
    }

    /// Applies `f` to every stored entry, producing a matrix of `kind`.
    pub fn map(&self, kind: DistanceKind, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(self.size, self.values.iter().map(|&v| f(v)).collect(), kind)
    }

    /// Submatrix restricted to the given item indices, in that order.
    pub fn select(&self, items: &[usize]) -> Result<Self> {
        Self::from_fn(items.len(), self.kind, |a, b| self.get(items[a], items[b]))
    }
}

/// Number of unordered pairs among `n` items.
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// Human-judged similarity level of an image pair, ordered from least to
/// most similar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimilarityLevel {
    None,
    Low,
    Mid,
    High,
}

impl SimilarityLevel {
    pub const ALL: [SimilarityLevel; 4] = [
        SimilarityLevel::None,
        SimilarityLevel::Low,
        SimilarityLevel::Mid,
        SimilarityLevel::High,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SimilarityLevel::None => "none",
            SimilarityLevel::Low => "low",
            SimilarityLevel::Mid => "mid",
            SimilarityLevel::High => "high",
        }
    }

    /// Position in `ALL`.
    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for SimilarityLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SimilarityLevel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(SimilarityLevel::None),
            "low" => Ok(SimilarityLevel::Low),
            "mid" => Ok(SimilarityLevel::Mid),
            "high" => Ok(SimilarityLevel::High),
            other => Err(Error::validation(format!(
                "unknown similarity level {other:?} (expected none, low, mid or high)"
            ))),
        }
    }
}

/// A pair of images with a graded similarity label.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedJudgment {
    pub pair_id: String,
    pub a: String,
    pub b: String,
    pub label: SimilarityLevel,
}

impl GradedJudgment {
    pub fn validate(&self) -> Result<()> {
        if self.a == self.b {
            return Err(Error::validation(format!(
                "pair {:?} compares image {:?} with itself",
                self.pair_id, self.a
            )));
        }
        Ok(())
    }
}

/// A reference image and two candidates, with the number of annotators who
/// found `a` closer to the reference.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletJudgment {
    #[serde(rename = "ref")]
    pub reference: String,
    pub a: String,
    pub b: String,
    pub votes_a: u32,
    pub votes_total: u32,
}

impl TripletJudgment {
    pub fn validate(&self) -> Result<()> {
        if self.votes_total == 0 {
            return Err(Error::validation("votes_total must be at least 1"));
        }
        if self.votes_a > self.votes_total {
            return Err(Error::validation(format!(
                "votes_a {} exceeds votes_total {}",
                self.votes_a, self.votes_total
            )));
        }
        Ok(())
    }

    /// Fraction of annotators preferring `a`.
    pub fn share_a(&self) -> f64 {
        f64::from(self.votes_a) / f64::from(self.votes_total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JudgmentKind {
    Graded,
    Triplet,
}

impl FromStr for JudgmentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "graded" => Ok(JudgmentKind::Graded),
            "triplet" => Ok(JudgmentKind::Triplet),
            other => Err(Error::validation(format!(
                "unknown judgment kind {other:?}"
            ))),
        }
    }
}

/// A record together with the 1-based source line it was read from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Numbered<T> {
    pub line: usize,
    pub record: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum JudgmentRecords {
    Graded(Vec<Numbered<GradedJudgment>>),
    Triplet(Vec<Numbered<TripletJudgment>>),
}

impl JudgmentRecords {
    pub fn len(&self) -> usize {
        match self {
            JudgmentRecords::Graded(v) => v.len(),
            JudgmentRecords::Triplet(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn into_graded(self) -> Option<Vec<GradedJudgment>> {
        match self {
            JudgmentRecords::Graded(v) => Some(v.into_iter().map(|n| n.record).collect()),
            JudgmentRecords::Triplet(_) => None,
        }
    }

    pub fn into_triplets(self) -> Option<Vec<TripletJudgment>> {
        match self {
            JudgmentRecords::Triplet(v) => Some(v.into_iter().map(|n| n.record).collect()),
            JudgmentRecords::Graded(_) => None,
        }
    }
}
