//! Calibrating scores to graded human similarity levels.
//!
//! Three cutoffs `beta_low < beta_mid < beta_high` split `[0, 1]` into
//! left-closed segments: `none = [0, low)`, `low = [low, mid)`,
//! `mid = [mid, high)`, `high = [high, 1]`. [`fit_cutoffs`] picks the cutoffs
//! that maximize the fraction of labeled scores falling in their own
//! label's segment.
//!
//! # Optimization
//!
//! Only the position of each cutoff relative to the sorted distinct scores
//! matters, so the search runs over "gaps": gap `g` lies between the `g`-th
//! and `(g+1)`-th distinct score, with gap 0 below the minimum and gap `D`
//! above the maximum. With per-class prefix counts `P_c`, the number of
//! correct labels for gaps `g1 <= g2 <= g3` is
//!
//! ```text
//! P_none[g1] + (P_low[g2] - P_low[g1]) + (P_mid[g3] - P_mid[g2]) + (H - P_high[g3])
//! ```
//!
//! which separates into terms of one or two adjacent gaps. Two suffix-maximum
//! sweeps therefore find the exact optimum in linear time after sorting.
//! Among optima the lexicographically smallest `(g1, g2, g3)` wins, which is
//! also the smallest `beta_low`, then `beta_mid`, then `beta_high`.
//!
//! A gap holding one cutoff places it at the midpoint of the gap (so the
//! edge gaps give `min / 2` and `(max + 1) / 2`); a gap holding `c` cutoffs
//! spaces them evenly at `lo + (hi - lo) * j / (c + 1)`.

use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::MetricKind;
use crate::error::{Error, Result};
use crate::model::{EmbeddingSet, GradedJudgment, SimilarityLevel};
use crate::normalization::FittedCdf;

pub const CUTOFFS_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationCutoffs {
    beta_low: f64,
    beta_mid: f64,
    beta_high: f64,
}

impl CalibrationCutoffs {
    /// Published reference cutoffs for DreamSim-L2 embeddings, rounded to
    /// 0.05. These were fitted on crowd-sourced judgments that are not part of
    /// this crate; use them for display only, not as a local fit.
    pub const REFERENCE: CalibrationCutoffs = CalibrationCutoffs {
        beta_low: 0.2,
        beta_mid: 0.4,
        beta_high: 0.85,
    };

    pub fn new(beta_low: f64, beta_mid: f64, beta_high: f64) -> Result<Self> {
        let ordered =
            0.0 < beta_low && beta_low < beta_mid && beta_mid < beta_high && beta_high < 1.0;
        if !ordered {
            return Err(Error::validation(format!(
                "cutoffs must satisfy 0 < low < mid < high < 1, got {beta_low}, {beta_mid}, {beta_high}"
            )));
        }
        Ok(CalibrationCutoffs {
            beta_low,
            beta_mid,
            beta_high,
        })
    }

    pub fn beta_low(&self) -> f64 {
        self.beta_low
    }

    pub fn beta_mid(&self) -> f64 {
        self.beta_mid
    }

    pub fn beta_high(&self) -> f64 {
        self.beta_high
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.beta_low, self.beta_mid, self.beta_high]
    }

    pub fn classify(&self, score: f64) -> SimilarityLevel {
        classify(score, self)
    }
}

/// A score (the similarity-style score of a single pair) with its human label.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabeledScore {
    pub score: f64,
    pub label: SimilarityLevel,
}

/// Scores each judged pair as `1 - F(d(a, b))`.
pub fn labeled_scores(
    judgments: &[GradedJudgment],
    set: &EmbeddingSet,
    metric: MetricKind,
    cdf: &FittedCdf,
) -> Result<Vec<LabeledScore>> {
    let index = set.index();
    judgments
        .iter()
        .map(|j| {
            let get = |id: &str| {
                index.get(id).copied().ok_or_else(|| {
                    Error::validation(format!(
                        "pair {:?} references unknown image id {id:?}",
                        j.pair_id
                    ))
                })
            };
            let d = metric.distance(set.row(get(&j.a)?), set.row(get(&j.b)?))?;
            Ok(LabeledScore {
                score: 1.0 - cdf.apply(d),
                label: j.label,
            })
        })
        .collect()
}

/// Segment that `score` falls in.
pub fn classify(score: f64, cutoffs: &CalibrationCutoffs) -> SimilarityLevel {
    if score < cutoffs.beta_low {
        SimilarityLevel::None
    } else if score < cutoffs.beta_mid {
        SimilarityLevel::Low
    } else if score < cutoffs.beta_high {
        SimilarityLevel::Mid
    } else {
        SimilarityLevel::High
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Accuracy {
    /// Fraction of items predicted correctly.
    pub micro: f64,
    /// Unweighted mean recall over the classes present in the labels.
    #[serde(rename = "macro")]
    pub macro_: f64,
}

pub fn accuracy(preds: &[SimilarityLevel], labels: &[SimilarityLevel]) -> Result<Accuracy> {
    if preds.len() != labels.len() {
        return Err(Error::validation(format!(
            "{} predictions for {} labels",
            preds.len(),
            labels.len()
        )));
    }
    if labels.is_empty() {
        return Err(Error::validation("accuracy of an empty set is undefined"));
    }
    let mut hits = [0usize; 4];
    let mut totals = [0usize; 4];
    for (&p, &l) in preds.iter().zip(labels) {
        totals[l.index()] += 1;
        if p == l {
            hits[l.index()] += 1;
        }
    }
    let correct: usize = hits.iter().sum();
    let recalls: Vec<f64> = totals
        .iter()
        .zip(&hits)
        .filter(|(&t, _)| t > 0)
        .map(|(&t, &h)| h as f64 / t as f64)
        .collect();
    Ok(Accuracy {
        micro: correct as f64 / labels.len() as f64,
        macro_: recalls.iter().sum::<f64>() / recalls.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutoffFit {
    pub cutoffs: CalibrationCutoffs,
    /// Training items landing in their label's segment under `cutoffs`.
    pub correct: usize,
    /// `correct / N`, the maximized objective.
    pub accuracy: f64,
}

/// Finds accuracy-maximizing cutoffs; optionally rounds each to the nearest
/// multiple of `round_to`.
pub fn fit_cutoffs(data: &[LabeledScore], round_to: Option<f64>) -> Result<CutoffFit> {
    if data.is_empty() {
        return Err(Error::validation("cannot calibrate on an empty data set"));
    }
    if let Some(bad) = data.iter().find(|d| !(0.0..=1.0).contains(&d.score)) {
        return Err(Error::validation(format!(
            "score {} is outside [0, 1]",
            bad.score
        )));
    }

    let mut sorted: Vec<LabeledScore> = data.to_vec();
    sorted.sort_by(|a, b| a.score.total_cmp(&b.score));
    let mut distinct: Vec<f64> = Vec::new();
    // prefix[c][g]: items of class c among the first g distinct scores
    let mut prefix: [Vec<i64>; 4] = std::array::from_fn(|_| vec![0]);
    for item in &sorted {
        if distinct.last() != Some(&item.score) {
            distinct.push(item.score);
            for p in prefix.iter_mut() {
                let last = *p.last().unwrap();
                p.push(last);
            }
        }
        *prefix[item.label.index()].last_mut().unwrap() += 1;
    }
    let d = distinct.len();
    let high_total = prefix[3][d];
    let available = |g: usize| match g {
        0 => distinct[0] > 0.0,
        g if g == d => distinct[d - 1] < 1.0,
        _ => true,
    };

    // suffix maxima with leftmost argmax
    let suffix_best = |values: &dyn Fn(usize) -> i64| {
        let mut best = vec![(i64::MIN, usize::MAX); d + 2];
        for g in (0..=d).rev() {
            best[g] = best[g + 1];
            if available(g) {
                let v = values(g);
                if v >= best[g].0 {
                    best[g] = (v, g);
                }
            }
        }
        best
    };
    let upper = suffix_best(&|g| prefix[2][g] + high_total - prefix[3][g]);
    let middle = suffix_best(&|g| prefix[1][g] - prefix[2][g] + upper[g].0);

    let mut best: Option<(i64, usize)> = None;
    for g1 in (0..=d).filter(|&g| available(g)) {
        let v = prefix[0][g1] - prefix[1][g1] + middle[g1].0;
        if best.is_none_or(|(b, _)| v > b) {
            best = Some((v, g1));
        }
    }
    let (objective, g1) = best.expect("at least one gap is always available");
    let g2 = middle[g1].1;
    let g3 = upper[g2].1;
    let gaps = [g1, g2, g3];

    let mut betas = [0.0; 3];
    for (slot, &g) in gaps.iter().enumerate() {
        let lo = if g == 0 { 0.0 } else { distinct[g - 1] };
        let hi = if g == d { 1.0 } else { distinct[g] };
        let share = gaps.iter().filter(|&&x| x == g).count();
        let rank = gaps[..slot].iter().filter(|&&x| x == g).count() + 1;
        betas[slot] = lo + (hi - lo) * rank as f64 / (share + 1) as f64;
        if !(betas[slot] > lo && betas[slot] < hi) {
            return Err(Error::Calibration(format!(
                "scores {lo} and {hi} are too close to place a cutoff between them"
            )));
        }
    }
    let mut cutoffs = CalibrationCutoffs::new(betas[0], betas[1], betas[2])
        .map_err(|e| Error::Calibration(e.to_string()))?;
    debug_assert_eq!(count_correct(data, &cutoffs) as i64, objective);

    if let Some(step) = round_to {
        if !(step > 0.0 && step < 1.0) {
            return Err(Error::validation(format!(
                "rounding step must lie in (0, 1), got {step}"
            )));
        }
        let [l, m, h] = cutoffs.as_array().map(|b| round_to_multiple(b, step));
        cutoffs = CalibrationCutoffs::new(l, m, h).map_err(|_| {
            Error::Calibration(format!(
                "rounding to {step} collapses the cutoffs {betas:?} to {l}, {m}, {h}"
            ))
        })?;
    }

    let correct = count_correct(data, &cutoffs);
    Ok(CutoffFit {
        cutoffs,
        correct,
        accuracy: correct as f64 / data.len() as f64,
    })
}

fn count_correct(data: &[LabeledScore], cutoffs: &CalibrationCutoffs) -> usize {
    data.iter()
        .filter(|d| classify(d.score, cutoffs) == d.label)
        .count()
}

/// Nearest multiple of `step`; divides by `1/step` when that is an integer
/// so that e.g. 17 * 0.05 comes out as 0.85.
fn round_to_multiple(value: f64, step: f64) -> f64 {
    let q = (value / step).round();
    let inv = 1.0 / step;
    if (inv - inv.round()).abs() < 1e-9 {
        q / inv.round()
    } else {
        q * step
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub cutoffs: CalibrationCutoffs,
    pub train_accuracy: f64,
    pub test: Accuracy,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub folds: Vec<FoldResult>,
    /// Unweighted mean of the per-fold test scores.
    pub mean: Accuracy,
    /// Scores over all held-out predictions pooled together.
    pub pooled: Accuracy,
}

/// Shuffled k-fold assignment: a seeded Fisher–Yates permutation cut into
/// `folds` contiguous blocks whose sizes differ by at most one.
pub fn fold_assignment(len: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..len).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..len).rev() {
        let j = rng.random_range(0..=i as u64) as usize;
        order.swap(i, j);
    }
    let base = len / folds;
    let extra = len % folds;
    let mut out = Vec::with_capacity(folds);
    let mut start = 0;
    for f in 0..folds {
        let size = base + usize::from(f < extra);
        out.push(order[start..start + size].to_vec());
        start += size;
    }
    out
}

/// Fits on all but one fold and evaluates on the held-out fold, for every
/// fold.
pub fn cross_validate(
    data: &[LabeledScore],
    folds: usize,
    seed: u64,
    round_to: Option<f64>,
) -> Result<CrossValidation> {
    if folds < 2 {
        return Err(Error::validation(format!(
            "need at least 2 folds, got {folds}"
        )));
    }
    if data.len() < folds {
        return Err(Error::validation(format!(
            "{} records cannot fill {folds} folds",
            data.len()
        )));
    }
    let assignment = fold_assignment(data.len(), folds, seed);
    let results: Vec<(FoldResult, Vec<SimilarityLevel>, Vec<SimilarityLevel>)> = assignment
        .par_iter()
        .enumerate()
        .map(|(fold, held_out)| {
            let mut is_test = vec![false; data.len()];
            for &i in held_out {
                is_test[i] = true;
            }
            let train: Vec<LabeledScore> = data
                .iter()
                .zip(&is_test)
                .filter(|(_, &t)| !t)
                .map(|(d, _)| *d)
                .collect();
            let fit = fit_cutoffs(&train, round_to)?;
            let preds: Vec<SimilarityLevel> = held_out
                .iter()
                .map(|&i| classify(data[i].score, &fit.cutoffs))
                .collect();
            let labels: Vec<SimilarityLevel> = held_out.iter().map(|&i| data[i].label).collect();
            let test = accuracy(&preds, &labels)?;
            Ok((
                FoldResult {
                    fold,
                    train_size: train.len(),
                    test_size: held_out.len(),
                    cutoffs: fit.cutoffs,
                    train_accuracy: fit.accuracy,
                    test,
                },
                preds,
                labels,
            ))
        })
        .collect::<Result<_>>()?;

    let k = results.len() as f64;
    let mean = Accuracy {
        micro: results.iter().map(|r| r.0.test.micro).sum::<f64>() / k,
        macro_: results.iter().map(|r| r.0.test.macro_).sum::<f64>() / k,
    };
    let all_preds: Vec<SimilarityLevel> =
        results.iter().flat_map(|r| r.1.iter().copied()).collect();
    let all_labels: Vec<SimilarityLevel> =
        results.iter().flat_map(|r| r.2.iter().copied()).collect();
    let pooled = accuracy(&all_preds, &all_labels)?;
    Ok(CrossValidation {
        folds: results.into_iter().map(|r| r.0).collect(),
        mean,
        pooled,
    })
}

#[derive(Serialize, Deserialize)]
struct CutoffsFile {
    version: u32,
    beta_low: f64,
    beta_mid: f64,
    beta_high: f64,
}

pub fn cutoffs_to_json(c: &CalibrationCutoffs) -> String {
    serde_json::to_string(&CutoffsFile {
        version: CUTOFFS_FORMAT_VERSION,
        beta_low: c.beta_low,
        beta_mid: c.beta_mid,
        beta_high: c.beta_high,
    })
    .expect("cutoff serialization cannot fail")
}

pub fn cutoffs_from_json(text: &str, context: &str) -> Result<CalibrationCutoffs> {
    let fail = |msg: String| Error::format(context, "document", msg);
    let file: CutoffsFile = serde_json::from_str(text).map_err(|e| fail(e.to_string()))?;
    if file.version != CUTOFFS_FORMAT_VERSION {
        return Err(fail(format!(
            "unsupported cutoffs version {}, expected {CUTOFFS_FORMAT_VERSION}",
            file.version
        )));
    }
    CalibrationCutoffs::new(file.beta_low, file.beta_mid, file.beta_high)
        .map_err(|e| fail(e.to_string()))
}

pub fn save_cutoffs(c: &CalibrationCutoffs, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, cutoffs_to_json(c)).map_err(|e| Error::io(path, e))
}

pub fn load_cutoffs(path: impl AsRef<Path>) -> Result<CalibrationCutoffs> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    cutoffs_from_json(&text, &path.display().to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use SimilarityLevel::*;

    fn ls(score: f64, label: SimilarityLevel) -> LabeledScore {
        LabeledScore { score, label }
    }

    /// Exhaustive search over all gap triples with direct classification.
    fn brute_force_best(data: &[LabeledScore]) -> usize {
        let mut distinct: Vec<f64> = data.iter().map(|d| d.score).collect();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        let d = distinct.len();
        let ok = |g: usize| !(g == 0 && distinct[0] <= 0.0 || g == d && distinct[d - 1] >= 1.0);
        let rank = |s: f64| distinct.iter().position(|&v| v == s).unwrap();
        let mut best = 0;
        for g1 in (0..=d).filter(|&g| ok(g)) {
            for g2 in (g1..=d).filter(|&g| ok(g)) {
                for g3 in (g2..=d).filter(|&g| ok(g)) {
                    let hits = data
                        .iter()
                        .filter(|x| {
                            let r = rank(x.score);
                            let level = [g1, g2, g3].iter().filter(|&&g| g <= r).count();
                            level == x.label.index()
                        })
                        .count();
                    best = best.max(hits);
                }
            }
        }
        best
    }

    #[test]
    fn separable_classes() {
        let data = [ls(0.1, None), ls(0.3, Low), ls(0.6, Mid), ls(0.9, High)];
        let fit = fit_cutoffs(&data, Option::None).unwrap();
        assert_eq!(fit.accuracy, 1.0);
        let [l, m, h] = fit.cutoffs.as_array();
        assert!(0.1 < l && l < 0.3);
        assert!(0.3 < m && m < 0.6);
        assert!(0.6 < h && h < 0.9);
        for (got, want) in fit.cutoffs.as_array().iter().zip([0.2, 0.45, 0.75]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn edge_gaps_allow_empty_segments() {
        // only mid and high present: none/low segments pushed below the minimum
        let data = [ls(0.4, Mid), ls(0.5, Mid), ls(0.9, High)];
        let fit = fit_cutoffs(&data, Option::None).unwrap();
        assert_eq!(fit.accuracy, 1.0);
        let [l, m, h] = fit.cutoffs.as_array();
        assert_eq!(l, 0.4 / 3.0);
        assert_eq!(m, 0.8 / 3.0);
        assert_eq!(h, 0.7);
    }

    #[test]
    fn single_score_value() {
        let data = [ls(0.5, High), ls(0.5, High), ls(0.5, Low)];
        let fit = fit_cutoffs(&data, Option::None).unwrap();
        assert_eq!(fit.correct, 2);
        assert_eq!(fit.cutoffs.classify(0.5), High);
    }

    #[test]
    fn zero_and_one_scores() {
        let data = [ls(0.0, None), ls(1.0, High), ls(1.0, High)];
        let fit = fit_cutoffs(&data, Option::None).unwrap();
        assert_eq!(fit.accuracy, 1.0);
        assert!(fit.cutoffs.beta_low() > 0.0 && fit.cutoffs.beta_high() < 1.0);
    }

    #[test]
    fn ties_prefer_smallest_cutoffs() {
        // labels contradict ordering, so many triples tie
        let data = [ls(0.2, High), ls(0.8, None)];
        let fit = fit_cutoffs(&data, Option::None).unwrap();
        assert_eq!(fit.correct, 1);
        // everything in gap 0 classifies 0.2 as high: smallest possible cutoffs
        assert_eq!(fit.cutoffs.as_array(), [0.05, 0.1, 0.15000000000000002]);
    }

    #[test]
    fn empty_and_out_of_range_input() {
        assert!(fit_cutoffs(&[], Option::None).is_err());
        assert!(fit_cutoffs(&[ls(1.5, High)], Option::None).is_err());
    }

    #[test]
    fn rounding() {
        let data = [
            ls(0.1, None),
            ls(0.31, Low),
            ls(0.49, Mid),
            ls(0.9, High),
            ls(0.8, High),
        ];
        let fit = fit_cutoffs(&data, Some(0.05)).unwrap();
        assert_eq!(fit.cutoffs.as_array(), [0.2, 0.4, 0.65]);
        assert_eq!(round_to_multiple(0.851, 0.05), 0.85);

        let tight = [ls(0.50, None), ls(0.51, Low), ls(0.52, Mid), ls(0.53, High)];
        let err = fit_cutoffs(&tight, Some(0.05)).unwrap_err();
        assert!(matches!(err, Error::Calibration(_)));
    }

    #[test]
    fn classify_boundaries() {
        let c = CalibrationCutoffs::REFERENCE;
        assert_eq!(classify(0.90, &c), High);
        assert_eq!(classify(0.85, &c), High);
        assert_eq!(classify(0.4, &c), Mid);
        assert_eq!(classify(0.39, &c), Low);
        assert_eq!(classify(0.2, &c), Low);
        assert_eq!(classify(0.0, &c), None);
        assert_eq!(classify(1.0, &c), High);
    }

    #[test]
    fn accuracy_cases() {
        let a = accuracy(&[Low, High], &[Low, High]).unwrap();
        assert_eq!((a.micro, a.macro_), (1.0, 1.0));

        let a = accuracy(&[Low, Low, Low, Low], &[Low, Low, High, High]).unwrap();
        assert_eq!((a.micro, a.macro_), (0.5, 0.5));

        // 9 none (8 correct), 1 high (wrong): micro 8/10, macro (8/9 + 0)/2
        let mut labels = vec![None; 9];
        labels.push(High);
        let mut preds = vec![None; 8];
        preds.extend([Low, Mid]);
        let a = accuracy(&preds, &labels).unwrap();
        assert_eq!(a.micro, 0.8);
        assert_eq!(a.macro_, (8.0 / 9.0) / 2.0);

        assert!(accuracy(&[Low], &[Low, Low]).is_err());
        assert!(accuracy(&[], &[]).is_err());
    }

    #[test]
    fn fold_sizes_and_determinism() {
        let folds = fold_assignment(1500, 5, 3);
        assert!(folds.iter().all(|f| f.len() == 300));
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..1500).collect::<Vec<_>>());
        assert_eq!(folds, fold_assignment(1500, 5, 3));
        assert_ne!(folds, fold_assignment(1500, 5, 4));
        let uneven = fold_assignment(12, 5, 0);
        assert_eq!(
            uneven.iter().map(Vec::len).collect::<Vec<_>>(),
            [3, 3, 2, 2, 2]
        );
    }

    #[test]
    fn cross_validation_on_separable_data() {
        let mut data = Vec::new();
        for i in 0..40 {
            let level = SimilarityLevel::ALL[i % 4];
            data.push(ls(0.1 + 0.25 * (i % 4) as f64 + 0.001 * i as f64, level));
        }
        let cv = cross_validate(&data, 5, 1, Option::None).unwrap();
        assert_eq!(cv.folds.len(), 5);
        assert_eq!(cv.mean.micro, 1.0);
        assert_eq!(cv.pooled.micro, 1.0);
        assert_eq!(cv, cross_validate(&data, 5, 1, Option::None).unwrap());
        assert!(cross_validate(&data, 1, 1, Option::None).is_err());
        assert!(cross_validate(&data[..3], 5, 1, Option::None).is_err());
    }

    #[test]
    fn cutoffs_json() {
        let c = CalibrationCutoffs::new(0.2, 0.4, 0.85).unwrap();
        assert_eq!(cutoffs_from_json(&cutoffs_to_json(&c), "t").unwrap(), c);
        assert!(cutoffs_from_json(
            r#"{"version":2,"beta_low":0.2,"beta_mid":0.4,"beta_high":0.85}"#,
            "t"
        )
        .is_err());
        assert!(cutoffs_from_json(
            r#"{"version":1,"beta_low":0.5,"beta_mid":0.4,"beta_high":0.85}"#,
            "t"
        )
        .is_err());
    }

    fn labeled() -> impl Strategy<Value = Vec<LabeledScore>> {
        proptest::collection::vec(
            (0u32..=40, 0usize..4)
                .prop_map(|(s, l)| ls(f64::from(s) / 40.0, SimilarityLevel::ALL[l])),
            1..40,
        )
    }

    proptest! {
        #[test]
        fn matches_brute_force(data in labeled()) {
            let fit = fit_cutoffs(&data, Option::None).unwrap();
            prop_assert_eq!(fit.correct, brute_force_best(&data));
            let preds: Vec<_> = data.iter().map(|d| classify(d.score, &fit.cutoffs)).collect();
            let labels: Vec<_> = data.iter().map(|d| d.label).collect();
            prop_assert_eq!(accuracy(&preds, &labels).unwrap().micro, fit.accuracy);
        }

        #[test]
        fn beats_any_hand_cutoffs(data in labeled(), a in 0.01f64..0.99, b in 0.01f64..0.99, c in 0.01f64..0.99) {
            let mut t = [a, b, c];
            t.sort_by(f64::total_cmp);
            prop_assume!(t[0] < t[1] && t[1] < t[2]);
            let hand = CalibrationCutoffs::new(t[0], t[1], t[2]).unwrap();
            let fit = fit_cutoffs(&data, Option::None).unwrap();
            prop_assert!(fit.correct >= count_correct(&data, &hand));
        }

        #[test]
        fn classify_is_monotone(x in 0.0f64..=1.0, y in 0.0f64..=1.0) {
            let c = CalibrationCutoffs::REFERENCE;
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(classify(lo, &c) <= classify(hi, &c));
        }
    }
}
