//! Prompt-reusability curves: the similarity-style k-expected-maximum score
//! as a function of how many images are generated from one prompt.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::DistanceMatrix;
use crate::variability::{eta_k, Estimator, EstimatorPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub k: usize,
    pub eta_tilde: f64,
    pub estimator: Estimator,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReusabilityCurve {
    points: Vec<CurvePoint>,
}

impl ReusabilityCurve {
    pub fn new(points: Vec<CurvePoint>) -> Result<Self> {
        if points.windows(2).any(|w| w[0].k >= w[1].k) {
            return Err(Error::validation(
                "curve k values must be strictly ascending",
            ));
        }
        if points
            .iter()
            .any(|p| p.k < 2 || !(0.0..=1.0).contains(&p.eta_tilde))
        {
            return Err(Error::validation(
                "curve points need k >= 2 and scores in [0, 1]",
            ));
        }
        Ok(ReusabilityCurve { points })
    }

    pub fn points(&self) -> &[CurvePoint] {
        &self.points
    }

    pub fn k_values(&self) -> Vec<usize> {
        self.points.iter().map(|p| p.k).collect()
    }

    pub fn scores(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.eta_tilde).collect()
    }

    /// Plot-ready CSV with columns `k,eta_tilde,estimator,samples,seed`;
    /// the last two are empty for exact points.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,eta_tilde,estimator,samples,seed\n");
        for p in &self.points {
            let tail = match p.estimator {
                Estimator::Exact => "exact,,".to_owned(),
                Estimator::MonteCarlo { samples, seed } => format!("monte_carlo,{samples},{seed}"),
            };
            out.push_str(&format!("{},{},{}\n", p.k, p.eta_tilde, tail));
        }
        out
    }
}

/// Similarity-style k-expected maximum for every `k` in `2..=k_max`.
pub fn reusability_curve(
    m: &DistanceMatrix,
    k_max: usize,
    policy: &EstimatorPolicy,
) -> Result<ReusabilityCurve> {
    if k_max < 2 || k_max > m.size() {
        return Err(Error::validation(format!(
            "k_max must lie in [2, {}], got {k_max}",
            m.size()
        )));
    }
    let points = (2..=k_max)
        .into_par_iter()
        .map(|k| {
            let score = eta_k(m, k, policy)?;
            Ok(CurvePoint {
                k,
                eta_tilde: score.w1kp,
                estimator: score.estimator,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ReusabilityCurve::new(points)
}

/// Smallest `k` whose score reaches `beta_high`, if any.
pub fn reuse_limit(curve: &ReusabilityCurve, beta_high: f64) -> Option<usize> {
    curve
        .points
        .iter()
        .find(|p| p.eta_tilde >= beta_high)
        .map(|p| p.k)
}
