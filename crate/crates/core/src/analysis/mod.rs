//! Downstream analyses built on variability scores.

pub mod curve;
pub mod mds;
pub mod prompt;
pub mod spearman;

pub use curve::{reusability_curve, reuse_limit, CurvePoint, ReusabilityCurve};
pub use mds::{classical_mds, MdsEmbedding};
pub use prompt::{split_prompt, PromptSplit};
pub use spearman::spearman;
