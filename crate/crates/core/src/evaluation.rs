//! Two-alternative forced-choice (2AFC) evaluation of a distance backbone.
//!
//! For each triplet the backbone "prefers" the candidate whose pair with the
//! reference has the higher normalized similarity score. The 2AFC score is
//! the mean share of annotators agreeing with that choice; majority accuracy
//! is the fraction of triplets where it matches the annotator majority.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distance::MetricKind;
use crate::error::{Error, Result};
use crate::model::{EmbeddingSet, TripletJudgment};
use crate::normalization::FittedCdf;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preference {
    A,
    B,
    Tie,
}

impl Preference {
    pub fn flipped(self) -> Self {
        match self {
            Preference::A => Preference::B,
            Preference::B => Preference::A,
            Preference::Tie => Preference::Tie,
        }
    }
}

/// How exact ties (between the two pair scores, or an even annotator split)
/// are scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TiePolicy {
    /// A tie counts as half agreement.
    #[default]
    Half,
    /// Any tie is an error.
    Strict,
}

impl std::str::FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" => Ok(TiePolicy::Half),
            "strict" => Ok(TiePolicy::Strict),
            other => Err(Error::validation(format!(
                "unknown tie policy {other:?} (expected half or strict)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TripletOutcome {
    pub preference: Preference,
    pub votes_a: u32,
    pub votes_total: u32,
}

impl TripletOutcome {
    pub fn prefers_a(&self) -> bool {
        self.preference == Preference::A
    }

    pub fn tie(&self) -> bool {
        self.preference == Preference::Tie
    }

    fn share_a(&self) -> f64 {
        f64::from(self.votes_a) / f64::from(self.votes_total)
    }

    pub fn flipped(self) -> Self {
        TripletOutcome {
            preference: self.preference.flipped(),
            ..self
        }
    }
}

/// Which candidate the backbone finds closer to the reference, compared on
/// normalized similarity `1 - F(d)`.
pub fn metric_preference(
    reference: &[f32],
    a: &[f32],
    b: &[f32],
    metric: MetricKind,
    cdf: &FittedCdf,
) -> Result<Preference> {
    let score_a = 1.0 - cdf.apply(metric.distance(reference, a)?);
    let score_b = 1.0 - cdf.apply(metric.distance(reference, b)?);
    Ok(if score_a > score_b {
        Preference::A
    } else if score_a < score_b {
        Preference::B
    } else {
        Preference::Tie
    })
}

/// Resolves triplet ids against `set` and records the backbone's choice for
/// each, in input order.
pub fn evaluate_triplets(
    triplets: &[TripletJudgment],
    set: &EmbeddingSet,
    metric: MetricKind,
    cdf: &FittedCdf,
) -> Result<Vec<TripletOutcome>> {
    let index = set.index();
    let lookup = |id: &str, i: usize| {
        index.get(id).copied().ok_or_else(|| {
            Error::validation(format!("triplet {i} references unknown image id {id:?}"))
        })
    };
    triplets
        .par_iter()
        .enumerate()
        .map(|(i, t)| {
            t.validate()?;
            let r = lookup(&t.reference, i)?;
            let a = lookup(&t.a, i)?;
            let b = lookup(&t.b, i)?;
            let preference = metric_preference(set.row(r), set.row(a), set.row(b), metric, cdf)?;
            Ok(TripletOutcome {
                preference,
                votes_a: t.votes_a,
                votes_total: t.votes_total,
            })
        })
        .collect()
}

fn require_outcomes(outcomes: &[TripletOutcome]) -> Result<()> {
    if outcomes.is_empty() {
        return Err(Error::validation("no triplets to score"));
    }
    if let Some(o) = outcomes
        .iter()
        .find(|o| o.votes_total == 0 || o.votes_a > o.votes_total)
    {
        return Err(Error::validation(format!(
            "invalid vote counts {}/{}",
            o.votes_a, o.votes_total
        )));
    }
    Ok(())
}

/// Mean share of annotators agreeing with the backbone.
pub fn twoafc_score(outcomes: &[TripletOutcome], policy: TiePolicy) -> Result<f64> {
    require_outcomes(outcomes)?;
    let mut total = 0.0;
    for (i, o) in outcomes.iter().enumerate() {
        let y = o.share_a();
        total += match (o.preference, policy) {
            (Preference::A, _) => y,
            (Preference::B, _) => 1.0 - y,
            (Preference::Tie, TiePolicy::Half) => 0.5 * y + 0.5 * (1.0 - y),
            (Preference::Tie, TiePolicy::Strict) => {
                return Err(Error::validation(format!(
                    "triplet {i}: backbone scores both candidates equally (strict tie policy)"
                )))
            }
        };
    }
    Ok(total / outcomes.len() as f64)
}

/// Fraction of triplets where the backbone sides with the annotator
/// majority. Under [`TiePolicy::Half`], backbone ties and even annotator
/// splits count as half correct.
pub fn majority_accuracy(outcomes: &[TripletOutcome], policy: TiePolicy) -> Result<f64> {
    require_outcomes(outcomes)?;
    let mut correct = 0.0;
    for (i, o) in outcomes.iter().enumerate() {
        let twice_a = 2 * o.votes_a;
        let majority = match twice_a.cmp(&o.votes_total) {
            std::cmp::Ordering::Greater => Some(Preference::A),
            std::cmp::Ordering::Less => Some(Preference::B),
            std::cmp::Ordering::Equal => None,
        };
        let strict_err =
            |what: &str| Error::validation(format!("triplet {i}: {what} (strict tie policy)"));
        correct += match (majority, o.preference) {
            (None, _) if policy == TiePolicy::Strict => {
                return Err(strict_err("annotators split evenly"))
            }
            (_, Preference::Tie) if policy == TiePolicy::Strict => {
                return Err(strict_err("backbone scores both candidates equally"))
            }
            (None, _) | (_, Preference::Tie) => 0.5,
            (Some(m), p) if m == p => 1.0,
            _ => 0.0,
        };
    }
    Ok(correct / outcomes.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OracleBounds {
    pub max_twoafc: f64,
    pub max_accuracy: f64,
}

/// Best achievable scores: always side with the majority.
pub fn oracle_bounds(triplets: &[TripletJudgment]) -> Result<OracleBounds> {
    if triplets.is_empty() {
        return Err(Error::validation("no triplets to score"));
    }
    let mut total = 0.0;
    for t in triplets {
        t.validate()?;
        let y = t.share_a();
        total += y.max(1.0 - y);
    }
    Ok(OracleBounds {
        max_twoafc: total / triplets.len() as f64,
        max_accuracy: 1.0,
    })
}

/// Serialized summary of an evaluation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub twoafc: f64,
    pub accuracy: f64,
    pub oracle_twoafc: f64,
    pub n_triplets: usize,
    pub ties: usize,
}

pub fn evaluate(
    triplets: &[TripletJudgment],
    set: &EmbeddingSet,
    metric: MetricKind,
    cdf: &FittedCdf,
    policy: TiePolicy,
) -> Result<EvaluationReport> {
    let outcomes = evaluate_triplets(triplets, set, metric, cdf)?;
    Ok(EvaluationReport {
        twoafc: twoafc_score(&outcomes, policy)?,
        accuracy: majority_accuracy(&outcomes, policy)?,
        oracle_twoafc: oracle_bounds(triplets)?.max_twoafc,
        n_triplets: outcomes.len(),
        ties: outcomes.iter().filter(|o| o.tie()).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalization::fit_cdf;
    use proptest::prelude::*;

    fn outcome(p: Preference, a: u32, total: u32) -> TripletOutcome {
        TripletOutcome {
            preference: p,
            votes_a: a,
            votes_total: total,
        }
    }

    fn cdf() -> FittedCdf {
        fit_cdf(
            (1..=100).map(|i| i as f64 * 0.05).collect(),
            MetricKind::Euclidean,
            "t",
        )
        .unwrap()
    }

    #[test]
    fn preference_basics() {
        let c = cdf();
        let r = [0.0f32, 0.0];
        let far = [3.0f32, 1.0];
        assert_eq!(
            metric_preference(&r, &r, &far, MetricKind::Euclidean, &c).unwrap(),
            Preference::A
        );
        assert_eq!(
            metric_preference(&r, &far, &r, MetricKind::Euclidean, &c).unwrap(),
            Preference::B
        );
        assert_eq!(
            metric_preference(&r, &far, &far, MetricKind::Euclidean, &c).unwrap(),
            Preference::Tie
        );
        assert!(metric_preference(&r, &[1.0], &far, MetricKind::Euclidean, &c).is_err());
    }

    #[test]
    fn preference_agrees_with_direct_comparison() {
        let c = cdf();
        let r = [0.1f32, 0.7, -0.2];
        let a = [1.1f32, 0.3, 0.4];
        let b = [-0.9f32, 2.0, 0.0];
        let da: f64 = r
            .iter()
            .zip(&a)
            .map(|(x, y)| ((x - y) as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        let db: f64 = r
            .iter()
            .zip(&b)
            .map(|(x, y)| ((x - y) as f64).powi(2))
            .sum::<f64>()
            .sqrt();
        let na = c.sample().iter().filter(|&&s| s <= da).count();
        let nb = c.sample().iter().filter(|&&s| s <= db).count();
        let expected = match na.cmp(&nb) {
            std::cmp::Ordering::Less => Preference::A,
            std::cmp::Ordering::Greater => Preference::B,
            std::cmp::Ordering::Equal => Preference::Tie,
        };
        assert_eq!(
            metric_preference(&r, &a, &b, MetricKind::Euclidean, &c).unwrap(),
            expected
        );
        assert_eq!(expected, Preference::A);
    }

    #[test]
    fn twoafc_single_triplets() {
        assert_eq!(
            twoafc_score(&[outcome(Preference::A, 5, 5)], TiePolicy::Half).unwrap(),
            1.0
        );
        assert_eq!(
            twoafc_score(&[outcome(Preference::A, 3, 5)], TiePolicy::Half).unwrap(),
            0.6
        );
        assert_eq!(
            twoafc_score(&[outcome(Preference::B, 3, 5)], TiePolicy::Half).unwrap(),
            1.0 - 0.6
        );
        assert_eq!(
            twoafc_score(&[outcome(Preference::Tie, 3, 5)], TiePolicy::Half).unwrap(),
            0.5
        );
        assert!(twoafc_score(&[outcome(Preference::Tie, 3, 5)], TiePolicy::Strict).is_err());
        assert!(twoafc_score(&[], TiePolicy::Half).is_err());
    }

    #[test]
    fn majority_cases() {
        assert_eq!(
            majority_accuracy(&[outcome(Preference::A, 4, 5)], TiePolicy::Half).unwrap(),
            1.0
        );
        assert_eq!(
            majority_accuracy(&[outcome(Preference::A, 2, 5)], TiePolicy::Half).unwrap(),
            0.0
        );
        assert_eq!(
            majority_accuracy(&[outcome(Preference::A, 2, 4)], TiePolicy::Half).unwrap(),
            0.5
        );
        assert!(majority_accuracy(&[outcome(Preference::A, 2, 4)], TiePolicy::Strict).is_err());
        assert!(majority_accuracy(&[outcome(Preference::Tie, 1, 5)], TiePolicy::Strict).is_err());
    }

    #[test]
    fn oracle_examples() {
        let t = |a, total| TripletJudgment {
            reference: "r".into(),
            a: "a".into(),
            b: "b".into(),
            votes_a: a,
            votes_total: total,
        };
        assert_eq!(oracle_bounds(&[t(3, 5)]).unwrap().max_twoafc, 0.6);
        assert_eq!(oracle_bounds(&[t(5, 5), t(0, 5)]).unwrap().max_twoafc, 1.0);
        assert!(oracle_bounds(&[]).is_err());
    }

    fn outcomes() -> impl Strategy<Value = Vec<TripletOutcome>> {
        proptest::collection::vec(
            (0u32..=5, 0usize..2).prop_map(|(a, p)| {
                outcome(if p == 0 { Preference::A } else { Preference::B }, a, 5)
            }),
            1..60,
        )
    }

    proptest! {
        #[test]
        fn bounded_by_oracle_and_flip_complements(os in outcomes()) {
            let triplets: Vec<TripletJudgment> = os.iter().map(|o| TripletJudgment {
                reference: "r".into(), a: "a".into(), b: "b".into(),
                votes_a: o.votes_a, votes_total: o.votes_total,
            }).collect();
            let s = twoafc_score(&os, TiePolicy::Half).unwrap();
            let oracle = oracle_bounds(&triplets).unwrap().max_twoafc;
            prop_assert!(s <= oracle + 1e-12);
            let flipped: Vec<_> = os.iter().map(|o| o.flipped()).collect();
            let f = twoafc_score(&flipped, TiePolicy::Half).unwrap();
            prop_assert!((s + f - 1.0).abs() < 1e-12);
        }

        #[test]
        fn majority_follower_hits_oracle(votes in proptest::collection::vec(0u32..=5, 1..60)) {
            let os: Vec<_> = votes.iter().map(|&a| {
                outcome(if 2 * a > 5 { Preference::A } else { Preference::B }, a, 5)
            }).collect();
            let triplets: Vec<TripletJudgment> = votes.iter().map(|&a| TripletJudgment {
                reference: "r".into(), a: "a".into(), b: "b".into(), votes_a: a, votes_total: 5,
            }).collect();
            let s = twoafc_score(&os, TiePolicy::Strict).unwrap();
            prop_assert!((s - oracle_bounds(&triplets).unwrap().max_twoafc).abs() < 1e-12);
            prop_assert_eq!(majority_accuracy(&os, TiePolicy::Strict).unwrap(), 1.0);
        }
    }
}
