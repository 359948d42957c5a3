use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use w1kp::analysis::{classical_mds, prompt, reusability_curve, reuse_limit, spearman};
use w1kp::calibration::{
    accuracy, classify, cross_validate, fit_cutoffs, labeled_scores, load_cutoffs, save_cutoffs,
    Accuracy, CrossValidation, LabeledScore,
};
use w1kp::distance::pairwise_matrix;
use w1kp::evaluation::{evaluate, TiePolicy};
use w1kp::io::{read_embeddings, read_judgments, read_pairs_manifest, resolve_pairs};
use w1kp::normalization::{fit_cdf_from_pairs, load_cdf, normalize_matrix, sample_pairs, save_cdf};
use w1kp::variability::{
    eta_k, eta_mean, EstimatorPolicy, DEFAULT_EXACT_BUDGET, DEFAULT_MC_SAMPLES,
};
use w1kp::{
    CalibrationCutoffs, DistanceMatrix, EmbeddingSet, Error, FittedCdf, JudgmentKind, MetricKind,
    Result, SimilarityLevel, VariabilityScore,
};

use super::config::FileConfig;
use super::{
    CalibrateArgs, CorrelateArgs, EstimatorArgs, Eval2afcArgs, FitCdfArgs, KernelArg, MdsArgs,
    ReusabilityArgs, ScoreArgs, SplitPromptArgs,
};

const DEFAULT_PAIR_COUNT: usize = 10_000;
const DEFAULT_FOLDS: usize = 5;
const DEFAULT_MDS_DIMS: usize = 2;

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Error::io(path, e)),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|e| Error::io("<stdout>", e))
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serialization cannot fail");
    s.push('\n');
    s
}

/// Loads a CDF and rejects it when it was fitted for a different metric.
fn load_cdf_for(path: &Path, metric: Option<MetricKind>) -> Result<FittedCdf> {
    let cdf = load_cdf(path)?;
    if let Some(m) = metric {
        if m != cdf.metric() {
            return Err(Error::validation(format!(
                "requested metric {m} but {} was fitted for {}",
                path.display(),
                cdf.metric()
            )));
        }
    }
    Ok(cdf)
}

fn normalized_matrix(set: &EmbeddingSet, cdf: &FittedCdf) -> Result<DistanceMatrix> {
    normalize_matrix(&pairwise_matrix(set, cdf.metric())?, cdf)
}

fn estimator_policy(args: &EstimatorArgs, config: &FileConfig) -> EstimatorPolicy {
    EstimatorPolicy {
        exact_budget: args
            .exact_budget
            .or(config.exact_budget)
            .unwrap_or(DEFAULT_EXACT_BUDGET),
        mc_samples: args
            .mc_samples
            .or(config.mc_samples)
            .unwrap_or(DEFAULT_MC_SAMPLES),
        seed: args.seed.or(config.seed),
    }
}

fn require_seed(seed: Option<u64>, command: &str) -> Result<u64> {
    seed.ok_or_else(|| {
        Error::validation(format!(
            "{command} is randomized and needs an explicit --seed"
        ))
    })
}

pub(super) fn fit_cdf(args: FitCdfArgs, config: &FileConfig) -> Result<()> {
    let metric = args
        .metric
        .or(config.metric)
        .unwrap_or(MetricKind::Euclidean);
    if args.pairs.is_some() && args.pair_count.is_some() {
        return Err(Error::validation(
            "--pair-count cannot be combined with --pairs",
        ));
    }
    let pair_count = args
        .pair_count
        .or(config.pair_count)
        .unwrap_or(DEFAULT_PAIR_COUNT);
    let seed = match &args.pairs {
        Some(_) => None,
        None => Some(require_seed(args.seed.or(config.seed), "fit-cdf")?),
    };
    let set = read_embeddings(&args.embeddings)?;
    let pairs = match (&args.pairs, seed) {
        (Some(manifest), _) => {
            let pairs = resolve_pairs(&set, &read_pairs_manifest(manifest)?)?;
            if pairs.is_empty() {
                return Err(Error::validation("pair manifest lists no pairs"));
            }
            pairs
        }
        (None, Some(seed)) => {
            if pair_count == 0 {
                return Err(Error::validation("--pair-count must be positive"));
            }
            sample_pairs(set.len(), pair_count, seed)?
        }
        (None, None) => unreachable!("seed is resolved whenever no manifest is given"),
    };
    let provenance = args
        .provenance
        .unwrap_or_else(|| set.provenance().to_owned());
    let cdf = fit_cdf_from_pairs(&set, &pairs, metric, provenance)?;
    save_cdf(&cdf, &args.out)
}

#[derive(Serialize)]
struct ScoreReport<'a> {
    n: usize,
    metric: MetricKind,
    cdf_provenance: &'a str,
    #[serde(flatten)]
    score: VariabilityScore,
    #[serde(skip_serializing_if = "Option::is_none")]
    level: Option<SimilarityLevel>,
}

pub(super) fn score(args: ScoreArgs, config: &FileConfig) -> Result<()> {
    let policy = estimator_policy(&args.estimator, config);
    let cdf = load_cdf_for(&args.cdf, args.metric.or(config.metric))?;
    let cutoffs = args.cutoffs.as_deref().map(load_cutoffs).transpose()?;
    let set = read_embeddings(&args.embeddings)?;
    let m = normalized_matrix(&set, &cdf)?;
    let score = match (args.kernel, args.k) {
        (KernelArg::Mean, None) => eta_mean(&m)?,
        (KernelArg::Mean, Some(_)) => {
            return Err(Error::validation("--k only applies to --kernel kmax"))
        }
        (KernelArg::Kmax, Some(k)) => eta_k(&m, k, &policy)?,
        (KernelArg::Kmax, None) => return Err(Error::validation("--kernel kmax needs --k")),
    };
    let report = ScoreReport {
        n: set.len(),
        metric: cdf.metric(),
        cdf_provenance: cdf.provenance(),
        score,
        level: cutoffs.map(|c| c.classify(score.w1kp)),
    };
    emit(args.out.as_deref(), &to_json(&report))
}

#[derive(Deserialize)]
struct ScoreRow {
    score: f64,
    label: SimilarityLevel,
}

fn read_labeled_scores(path: &Path) -> Result<Vec<LabeledScore>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    reader
        .deserialize::<ScoreRow>()
        .map(|row| {
            row.map(|r| LabeledScore {
                score: r.score,
                label: r.label,
            })
            .map_err(|e| csv_error(path, e))
        })
        .collect()
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let location = e
        .position()
        .map(|p| format!("line {}", p.line()))
        .unwrap_or_else(|| "document".into());
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::format(path.display().to_string(), location, format!("{kind:?}")),
    }
}

#[derive(Serialize)]
struct TrainingSummary {
    correct: usize,
    #[serde(flatten)]
    accuracy: Accuracy,
}

#[derive(Serialize)]
struct CalibrationReport {
    n: usize,
    cutoffs: CalibrationCutoffs,
    training: TrainingSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_validation: Option<CrossValidation>,
}

pub(super) fn calibrate(args: CalibrateArgs, config: &FileConfig) -> Result<()> {
    let folds = args.folds.or(config.folds).unwrap_or(DEFAULT_FOLDS);
    let round_to = args.round_to.or(config.round_to);
    let seed = if folds == 0 {
        None
    } else {
        Some(require_seed(args.seed.or(config.seed), "calibrate")?)
    };
    let data = match (&args.scores, &args.judgments, &args.embeddings, &args.cdf) {
        (Some(scores), None, None, None) => read_labeled_scores(scores)?,
        (None, Some(judgments), Some(embeddings), Some(cdf)) => {
            let cdf = load_cdf_for(cdf, args.metric.or(config.metric))?;
            let judgments = read_judgments(judgments, JudgmentKind::Graded)?
                .into_graded()
                .expect("graded records requested");
            let set = read_embeddings(embeddings)?;
            labeled_scores(&judgments, &set, cdf.metric(), &cdf)?
        }
        _ => {
            return Err(Error::validation(
                "calibrate needs either --scores or all of --judgments, --embeddings and --cdf",
            ))
        }
    };
    let fit = fit_cutoffs(&data, round_to)?;
    let preds: Vec<SimilarityLevel> = data
        .iter()
        .map(|d| classify(d.score, &fit.cutoffs))
        .collect();
    let labels: Vec<SimilarityLevel> = data.iter().map(|d| d.label).collect();
    let cross_validation = seed
        .map(|seed| cross_validate(&data, folds, seed, round_to))
        .transpose()?;
    let report = CalibrationReport {
        n: data.len(),
        cutoffs: fit.cutoffs,
        training: TrainingSummary {
            correct: fit.correct,
            accuracy: accuracy(&preds, &labels)?,
        },
        cross_validation,
    };
    save_cutoffs(&fit.cutoffs, &args.out)?;
    emit(args.report.as_deref(), &to_json(&report))
}

pub(super) fn eval_2afc(args: Eval2afcArgs, config: &FileConfig) -> Result<()> {
    let policy = args
        .tie_policy
        .or(config.tie_policy)
        .unwrap_or(TiePolicy::Half);
    let cdf = load_cdf_for(&args.cdf, args.metric.or(config.metric))?;
    let triplets = read_judgments(&args.triplets, JudgmentKind::Triplet)?
        .into_triplets()
        .expect("triplet records requested");
    let set = read_embeddings(&args.embeddings)?;
    let report = evaluate(&triplets, &set, cdf.metric(), &cdf, policy)?;
    emit(args.out.as_deref(), &to_json(&report))
}

pub(super) fn reusability(args: ReusabilityArgs, config: &FileConfig) -> Result<()> {
    let policy = estimator_policy(&args.estimator, config);
    let cdf = load_cdf_for(&args.cdf, args.metric.or(config.metric))?;
    let beta_high = match (&args.cutoffs, args.beta_high) {
        (Some(path), _) => Some(load_cutoffs(path)?.beta_high()),
        (None, b) => b,
    };
    if let Some(b) = beta_high {
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::validation(format!(
                "--beta-high must lie in [0, 1], got {b}"
            )));
        }
    }
    let set = read_embeddings(&args.embeddings)?;
    let m = normalized_matrix(&set, &cdf)?;
    let curve = reusability_curve(&m, args.k_max.unwrap_or(set.len()), &policy)?;
    emit(args.out.as_deref(), &curve.to_csv())?;
    if let Some(b) = beta_high {
        match reuse_limit(&curve, b) {
            Some(k) => eprintln!("reuse limit at {b}: k = {k}"),
            None => eprintln!("reuse limit at {b}: not reached"),
        }
    }
    Ok(())
}

pub(super) fn mds(args: MdsArgs, config: &FileConfig) -> Result<()> {
    let dims = args.dims.or(config.dims).unwrap_or(DEFAULT_MDS_DIMS);
    let metric = args.metric.or(config.metric);
    let cdf = args
        .cdf
        .as_deref()
        .map(|p| load_cdf_for(p, metric))
        .transpose()?;
    let set = read_embeddings(&args.embeddings)?;
    let m = match &cdf {
        Some(cdf) => normalized_matrix(&set, cdf)?,
        None => pairwise_matrix(&set, metric.unwrap_or(MetricKind::Euclidean))?,
    };
    let embedding = classical_mds(&m, dims)?;
    emit(args.out.as_deref(), &embedding.to_csv(set.ids())?)
}

pub(super) fn split_prompt(args: SplitPromptArgs) -> Result<()> {
    let text = match (&args.text, &args.file) {
        (Some(text), None) => to_json(&prompt::split_prompt(text)),
        (None, Some(path)) => split_prompt_file(path)?,
        _ => return Err(Error::validation("give either a prompt or --file")),
    };
    emit(args.out.as_deref(), &text)
}

fn split_prompt_file(path: &Path) -> Result<String> {
    let contents = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = String::new();
    for line in contents.lines().filter(|l| !l.trim().is_empty()) {
        out.push_str(
            &serde_json::to_string(&prompt::split_prompt(line)).expect("split serializes"),
        );
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct CorrelationReport<'a> {
    x: &'a str,
    y: &'a str,
    n: usize,
    spearman: f64,
}

pub(super) fn correlate(args: CorrelateArgs) -> Result<()> {
    let path = args.input.as_path();
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let headers = reader.headers().map_err(|e| csv_error(path, e))?.clone();
    let column = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            Error::format(
                path.display().to_string(),
                "line 1",
                format!("no column named {name:?}"),
            )
        })
    };
    let (cx, cy) = (column(&args.x)?, column(&args.y)?);
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let parse = |c: usize, name: &str| -> Result<f64> {
            let raw = record.get(c).unwrap_or("");
            raw.parse().map_err(|_| {
                Error::format(
                    path.display().to_string(),
                    format!("line {line}"),
                    format!("column {name:?} value {raw:?} is not a number"),
                )
            })
        };
        xs.push(parse(cx, &args.x)?);
        ys.push(parse(cy, &args.y)?);
    }
    let report = CorrelationReport {
        x: &args.x,
        y: &args.y,
        n: xs.len(),
        spearman: spearman(&xs, &ys)?,
    };
    emit(args.out.as_deref(), &to_json(&report))
}
