//! U-statistics over normalized distance matrices.
//!
//! Two kernels are supported:
//!
//! * **pairwise mean**: the average normalized distance over all unordered
//!   pairs;
//! * **k-expected maximum**: the average, over all size-`k` subsets, of the
//!   smallest pairwise distance inside the subset (the most similar pair a
//!   batch of `k` images is expected to contain).
//!
//! Scores are reported both as the dissimilarity `eta` and the
//! similarity-style `w1kp = 1 - eta`.
//!
//! The k-kernel averages over `C(n, k)` subsets, which is only enumerable for
//! small sets. [`eta_k`] enumerates exactly while `C(n, k)` fits the budget
//! and otherwise switches to seeded Monte-Carlo sampling.
//!
//! # Sampling scheme
//!
//! Monte-Carlo estimates split the requested sample count over
//! [`MC_CHUNKS`] fixed chunks. Chunk `c` draws from a ChaCha8 generator
//! created with `seed_from_u64(seed)` and switched to stream `c`; each draw
//! is a partial Fisher–Yates shuffle of the item indices using `u32` ranges.
//! Chunk sums are combined in chunk order, so the estimate depends only on
//! `(matrix, k, samples, seed)` and not on the thread count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DistanceKind, DistanceMatrix, EmbeddingSet};

/// Largest `C(n, k)` enumerated exactly by default.
pub const DEFAULT_EXACT_BUDGET: u64 = 200_000;
/// Default Monte-Carlo subset count.
pub const DEFAULT_MC_SAMPLES: u64 = 10_000;
/// Fixed number of independent sampling streams.
pub const MC_CHUNKS: u64 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Kernel {
    Mean,
    KMax { k: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Estimator {
    Exact,
    MonteCarlo { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariabilityScore {
    pub eta: f64,
    pub w1kp: f64,
    pub kernel: Kernel,
    pub estimator: Estimator,
}

impl VariabilityScore {
    fn new(eta: f64, kernel: Kernel, estimator: Estimator) -> Self {
        // Rounding can leave a mean marginally outside [0, 1].
        let eta = eta.clamp(0.0, 1.0);
        VariabilityScore {
            eta,
            w1kp: 1.0 - eta,
            kernel,
            estimator,
        }
    }
}

/// How [`eta_k`] chooses between enumeration and sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorPolicy {
    pub exact_budget: u64,
    pub mc_samples: u64,
    /// Required whenever sampling is needed.
    pub seed: Option<u64>,
}

impl Default for EstimatorPolicy {
    fn default() -> Self {
        EstimatorPolicy {
            exact_budget: DEFAULT_EXACT_BUDGET,
            mc_samples: DEFAULT_MC_SAMPLES,
            seed: None,
        }
    }
}

fn require_normalized(m: &DistanceMatrix) -> Result<()> {
    if m.kind() != DistanceKind::Normalized {
        return Err(Error::validation(
            "variability scores need a normalized distance matrix",
        ));
    }
    if m.size() < 2 {
        return Err(Error::validation(format!(
            "variability needs at least 2 images, got {}",
            m.size()
        )));
    }
    Ok(())
}

fn check_k(m: &DistanceMatrix, k: usize) -> Result<()> {
    if k < 2 || k > m.size() {
        return Err(Error::validation(format!(
            "k must lie in [2, {}], got {k}",
            m.size()
        )));
    }
    Ok(())
}

/// `C(n, k)`, or `None` if it exceeds `u64`.
pub fn binomial(n: u64, k: u64) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
        if acc > u128::from(u64::MAX) {
            return None;
        }
    }
    Some(acc as u64)
}

/// Pairwise-mean kernel over all unordered pairs.
pub fn eta_mean(m: &DistanceMatrix) -> Result<VariabilityScore> {
    require_normalized(m)?;
    let sum = m.values().iter().fold(0.0, |acc, &v| acc + v);
    let eta = sum / m.values().len() as f64;
    Ok(VariabilityScore::new(eta, Kernel::Mean, Estimator::Exact))
}

#[inline]
fn subset_min(m: &DistanceMatrix, items: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for (p, &i) in items.iter().enumerate() {
        for &j in &items[p + 1..] {
            best = best.min(m.get(i, j));
        }
    }
    best
}

/// Exact k-expected-maximum kernel by enumerating every size-`k` subset in
/// lexicographic order.
pub fn eta_k_exact(m: &DistanceMatrix, k: usize, budget: u64) -> Result<VariabilityScore> {
    require_normalized(m)?;
    check_k(m, k)?;
    let n = m.size();
    let total = match binomial(n as u64, k as u64) {
        Some(c) if c <= budget => c,
        c => {
            return Err(Error::Capacity(format!(
                "C({n}, {k}) = {} subsets exceeds the exact budget of {budget}; use Monte-Carlo sampling",
                c.map_or_else(|| "more than 2^64".to_owned(), |c| c.to_string())
            )))
        }
    };

    let mut idx: Vec<usize> = (0..k).collect();
    let mut sum = 0.0;
    loop {
        sum += subset_min(m, &idx);
        // advance to the next combination
        let mut p = k;
        while p > 0 && idx[p - 1] == n - k + p - 1 {
            p -= 1;
        }
        if p == 0 {
            break;
        }
        idx[p - 1] += 1;
        for q in p..k {
            idx[q] = idx[q - 1] + 1;
        }
    }
    Ok(VariabilityScore::new(
        sum / total as f64,
        Kernel::KMax { k },
        Estimator::Exact,
    ))
}

/// Monte-Carlo k-expected-maximum kernel over `samples` uniformly drawn
/// size-`k` subsets. Deterministic for a fixed seed.
pub fn eta_k_monte_carlo(
    m: &DistanceMatrix,
    k: usize,
    samples: u64,
    seed: u64,
) -> Result<VariabilityScore> {
    require_normalized(m)?;
    check_k(m, k)?;
    if samples == 0 {
        return Err(Error::validation(
            "Monte-Carlo sample count must be at least 1",
        ));
    }
    let n = u32::try_from(m.size())
        .map_err(|_| Error::validation("matrix too large for subset sampling"))?;

    let per_chunk = samples / MC_CHUNKS;
    let extra = samples % MC_CHUNKS;
    let sums: Vec<f64> = (0..MC_CHUNKS)
        .into_par_iter()
        .map(|chunk| {
            let count = per_chunk + u64::from(chunk < extra);
            if count == 0 {
                return 0.0;
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk);
            let mut perm: Vec<usize> = (0..n as usize).collect();
            let mut sum = 0.0;
            for _ in 0..count {
                for i in 0..k {
                    let j = rng.random_range(i as u32..n) as usize;
                    perm.swap(i, j);
                }
                sum += subset_min(m, &perm[..k]);
            }
            sum
        })
        .collect();
    let total = sums.iter().fold(0.0, |acc, &s| acc + s);
    Ok(VariabilityScore::new(
        total / samples as f64,
        Kernel::KMax { k },
        Estimator::MonteCarlo { samples, seed },
    ))
}

/// k-expected-maximum kernel with automatic estimator choice: the single
/// subset when `k = n`, enumeration within the budget, sampling otherwise.
pub fn eta_k(m: &DistanceMatrix, k: usize, policy: &EstimatorPolicy) -> Result<VariabilityScore> {
    require_normalized(m)?;
    check_k(m, k)?;
    let n = m.size();
    if k == n {
        let all: Vec<usize> = (0..n).collect();
        return Ok(VariabilityScore::new(
            subset_min(m, &all),
            Kernel::KMax { k },
            Estimator::Exact,
        ));
    }
    if binomial(n as u64, k as u64).is_some_and(|c| c <= policy.exact_budget) {
        return eta_k_exact(m, k, policy.exact_budget);
    }
    let seed = policy.seed.ok_or_else(|| {
        Error::validation(format!(
            "C({n}, {k}) exceeds the exact budget; Monte-Carlo estimation requires an explicit seed"
        ))
    })?;
    eta_k_monte_carlo(m, k, policy.mc_samples, seed)
}

/// Mean pairwise squared Euclidean distance and the trace of the biased
/// (1/n) covariance of the rows. They satisfy
/// `mean_pairwise_sq = 2n / (n - 1) * trace_cov`.
pub fn total_variance_identity_check(set: &EmbeddingSet) -> Result<(f64, f64)> {
    let n = set.len();
    if n < 2 {
        return Err(Error::validation(
            "total variance check needs at least 2 rows",
        ));
    }
    let dim = set.dim();

    let mut pair_sum = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            pair_sum += crate::distance::squared_euclidean(set.row(i), set.row(j))?;
        }
    }
    let mean_pairwise_sq = pair_sum / crate::model::pair_count(n) as f64;

    let mut mean = vec![0.0f64; dim];
    for row in set.rows() {
        for (acc, &v) in mean.iter_mut().zip(row) {
            *acc += f64::from(v);
        }
    }
    for v in &mut mean {
        *v /= n as f64;
    }
    let mut trace = 0.0;
    for row in set.rows() {
        for (&mu, &v) in mean.iter().zip(row) {
            let c = f64::from(v) - mu;
            trace += c * c;
        }
    }
    Ok((mean_pairwise_sq, trace / n as f64))
}
