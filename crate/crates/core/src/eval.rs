//! Cross-validated evaluation: fold splits, MRR at a cutoff, paired t-tests
//! and the method x representation report.

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::decoder::{truncate, DecoderConfig, TranslationHypothesis};
use crate::error::{Error, Result};
use crate::lexicon::{ConceptDictionary, ParallelCorpus};
use crate::model::{TrainedModel, TrainingSettings};
use crate::ranker::{Aggregation, Method, RankedConcepts, Ranker};
use crate::rng::{SeededRng, PRNG_DESCRIPTION};
use crate::scalar::Scalar;
use crate::vectors::{OovPolicy, WordVectors};

pub const REPORT_FILE: &str = "report.tsv";
pub const SIGNIFICANCE_FILE: &str = "significance.tsv";

/// Disjoint folds covering `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldSplit {
    pub folds: Vec<Vec<usize>>,
    pub seed: u64,
}

impl FoldSplit {
    pub fn n(&self) -> usize {
        self.folds.iter().map(Vec::len).sum()
    }

    /// Indices outside fold `f`, ascending.
    pub fn training_indices(&self, f: usize) -> Vec<usize> {
        let test: BTreeSet<usize> = self.folds[f].iter().copied().collect();
        (0..self.n()).filter(|i| !test.contains(i)).collect()
    }
}

/// Shuffles `0..n` with the seeded generator and deals the result into `k`
/// folds round-robin.
pub fn kfold_split(n: usize, k: usize, seed: u64) -> Result<FoldSplit> {
    if k < 2 || n < k {
        return Err(Error::TooFewItems { n, k });
    }
    let mut order: Vec<usize> = (0..n).collect();
    SeededRng::new(seed).shuffle(&mut order);
    let mut folds = vec![Vec::new(); k];
    for (pos, idx) in order.into_iter().enumerate() {
        folds[pos % k].push(idx);
    }
    for fold in &mut folds {
        fold.sort_unstable();
    }
    Ok(FoldSplit { folds, seed })
}

/// `1 / rank` of `gold` when it is within `cutoff`, else 0.
pub fn reciprocal_rank<T: Scalar>(ranking: &RankedConcepts<T>, gold: &str, cutoff: usize) -> f64 {
    match ranking.rank_of(gold) {
        Some(r) if r <= cutoff => 1.0 / r as f64,
        _ => 0.0,
    }
}

pub fn mrr_at_k<T: Scalar, S: AsRef<str>>(
    rankings: &[RankedConcepts<T>],
    gold: &[S],
    cutoff: usize,
) -> Result<f64> {
    if rankings.len() != gold.len() {
        return Err(Error::LengthMismatch {
            left: rankings.len(),
            right: gold.len(),
        });
    }
    if cutoff == 0 {
        return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
    }
    if rankings.is_empty() {
        return Ok(0.0);
    }
    let total: f64 = rankings
        .iter()
        .zip(gold)
        .map(|(r, g)| reciprocal_rank(r, g.as_ref(), cutoff))
        .sum();
    Ok(total / rankings.len() as f64)
}

/// Two-sided paired t-test p-value for `a` vs `b`.
///
/// All-zero differences give 1.0; constant non-zero differences give 0.0.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len();
    if n < 2 {
        return Err(Error::InvalidArgument("paired t-test needs n >= 2".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    if d.iter().all(|&x| x == 0.0) {
        return Ok(1.0);
    }
    let nf = n as f64;
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    if var == 0.0 {
        return Ok(0.0);
    }
    let t = mean / (var.sqrt() / nf.sqrt());
    let dist =
        StudentsT::new(0.0, 1.0, nf - 1.0).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    Ok((2.0 * dist.sf(t.abs())).clamp(0.0, 1.0))
}

/// A named vector table evaluated as one report column.
#[derive(Debug, Clone)]
pub struct Representation<T> {
    pub name: String,
    pub vectors: WordVectors<T>,
    /// Overrides the kind's default OOV policy.
    pub oov: Option<OovPolicy>,
}

impl<T: Scalar> Representation<T> {
    /// One-hot vectors over every corpus phrase and concept description.
    pub fn one_hot(corpus: &ParallelCorpus, dict: &ConceptDictionary) -> Self {
        let phrases = corpus
            .pairs
            .iter()
            .map(|p| &p.source)
            .chain(dict.iter().map(|c| &c.description));
        Representation {
            name: "one-hot".to_owned(),
            vectors: WordVectors::one_hot(phrases),
            oov: None,
        }
    }

    pub fn dense(name: impl Into<String>, vectors: WordVectors<T>) -> Self {
        Representation {
            name: name.into(),
            vectors,
            oov: None,
        }
    }

    fn oov_policy(&self) -> OovPolicy {
        self.oov
            .unwrap_or_else(|| OovPolicy::default_for(self.vectors.kind()))
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub methods: Vec<Method>,
    pub k_folds: usize,
    pub seed: u64,
    /// MRR cutoff.
    pub cutoff: usize,
    /// Translations used by the top-k methods.
    pub top_k: usize,
    pub decoder: DecoderConfig,
    pub training: TrainingSettings,
    pub aggregation: Aggregation,
    pub fusion_weight: f64,
    /// Worker threads for folds; results do not depend on it.
    pub jobs: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            methods: Method::ALL.to_vec(),
            k_folds: 10,
            seed: 42,
            cutoff: 5,
            top_k: 5,
            decoder: DecoderConfig::default(),
            training: TrainingSettings::default(),
            aggregation: Aggregation::Max,
            fusion_weight: 1.0,
            jobs: 1,
        }
    }
}

/// What one fold trained on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FoldTrace {
    pub fold: usize,
    pub test_indices: Vec<usize>,
    pub train_indices: Vec<usize>,
    pub train_hash: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub methods: Vec<Method>,
    pub representations: Vec<String>,
    pub cutoff: usize,
    pub k_folds: usize,
    pub seed: u64,
    /// `[method][representation]`
    pub mrr: Vec<Vec<f64>>,
    /// `[method][representation][corpus index]`
    pub reciprocal_ranks: Vec<Vec<Vec<f64>>>,
    /// Phrases whose ranking failed, per cell.
    pub failures: Vec<Vec<usize>>,
    /// Config labels in row-major (method, representation) order.
    pub config_labels: Vec<String>,
    /// Pairwise p-values between configs, indexed like `config_labels`.
    pub significance: Vec<Vec<f64>>,
    pub folds: Vec<FoldTrace>,
}

fn fmt_p(p: f64) -> String {
    format!("{p:.6}")
}

impl EvalReport {
    pub fn get(&self, method: Method, representation: &str) -> Option<f64> {
        let m = self.methods.iter().position(|&x| x == method)?;
        let r = self
            .representations
            .iter()
            .position(|x| x == representation)?;
        Some(self.mrr[m][r])
    }

    pub fn p_value(&self, a: (Method, &str), b: (Method, &str)) -> Option<f64> {
        let idx = |(m, r): (Method, &str)| {
            self.config_labels
                .iter()
                .position(|l| *l == format!("{m}@{r}"))
        };
        Some(self.significance[idx(a)?][idx(b)?])
    }

    pub fn report_tsv(&self) -> String {
        let mut out = format!(
            "# MRR@{} over {}-fold cross-validation; seed={}; prng={}\n",
            self.cutoff, self.k_folds, self.seed, PRNG_DESCRIPTION
        );
        out.push_str("method");
        for r in &self.representations {
            out.push('\t');
            out.push_str(r);
        }
        out.push('\n');
        for (m, row) in self.methods.iter().zip(&self.mrr) {
            out.push_str(m.name());
            for v in row {
                out.push_str(&format!("\t{v:.4}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn significance_tsv(&self) -> String {
        let mut out = String::from(
            "# two-sided paired t-test p-values over per-phrase reciprocal ranks\nconfig",
        );
        for l in &self.config_labels {
            out.push('\t');
            out.push_str(l);
        }
        out.push('\n');
        for (l, row) in self.config_labels.iter().zip(&self.significance) {
            out.push_str(l);
            for &p in row {
                out.push('\t');
                out.push_str(&fmt_p(p));
            }
            out.push('\n');
        }
        out
    }

    pub fn write(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [
            (REPORT_FILE, self.report_tsv()),
            (SIGNIFICANCE_FILE, self.significance_tsv()),
        ] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

struct FoldResult {
    trace: FoldTrace,
    /// `(corpus index, [method][representation] reciprocal rank or None)`
    rows: Vec<(usize, Vec<Vec<Option<f64>>>)>,
}

fn run_fold<T: Scalar>(
    fold: usize,
    split: &FoldSplit,
    corpus: &ParallelCorpus,
    dict: &ConceptDictionary,
    rankers: &[Ranker<'_, T>],
    config: &ExperimentConfig,
) -> Result<FoldResult> {
    let train_indices = split.training_indices(fold);
    let needs_mt = config.methods.iter().any(|m| m.uses_translation());
    let model = if needs_mt {
        Some(TrainedModel::train(
            corpus,
            dict,
            &train_indices,
            config.training,
        )?)
    } else {
        None
    };
    let train_hash = model
        .as_ref()
        .map(|m| m.train_hash.clone())
        .unwrap_or_default();
    let mut rows = Vec::with_capacity(split.folds[fold].len());
    for &idx in &split.folds[fold] {
        let pair = &corpus.pairs[idx];
        let hyps: Vec<TranslationHypothesis> = match &model {
            Some(m) => m
                .decode(&pair.source, config.top_k, &config.decoder)
                .unwrap_or_default(),
            None => Vec::new(),
        };
        let best = truncate(&hyps, 1);
        let cells = config
            .methods
            .iter()
            .map(|&method| {
                let hyps = if method.single_best() { &best } else { &hyps };
                rankers
                    .iter()
                    .map(|ranker| {
                        ranker
                            .rank(method, &pair.source, hyps)
                            .ok()
                            .map(|r| reciprocal_rank(&r, &pair.concept_id, config.cutoff))
                    })
                    .collect()
            })
            .collect();
        rows.push((idx, cells));
    }
    log::info!(
        "fold {}/{}: trained on {} pairs, ranked {} phrases",
        fold + 1,
        split.folds.len(),
        train_indices.len(),
        rows.len()
    );
    Ok(FoldResult {
        trace: FoldTrace {
            fold,
            test_indices: split.folds[fold].clone(),
            train_indices,
            train_hash,
        },
        rows,
    })
}

/// Runs every method on every representation under k-fold cross-validation.
///
/// Translation models are retrained per fold on the training folds only;
/// the representations are shared by all folds.
pub fn run_experiment<T: Scalar>(
    corpus: &ParallelCorpus,
    dict: &ConceptDictionary,
    representations: &[Representation<T>],
    config: &ExperimentConfig,
) -> Result<EvalReport> {
    if config.methods.is_empty() || representations.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one method and one representation".into(),
        ));
    }
    if config.top_k == 0 || config.top_k > config.decoder.beam {
        return Err(Error::InvalidArgument(format!(
            "top_k must be in 1..={}",
            config.decoder.beam
        )));
    }
    if config.cutoff == 0 {
        return Err(Error::InvalidArgument("cutoff must be >= 1".into()));
    }
    let split = kfold_split(corpus.len(), config.k_folds, config.seed)?;
    let rankers = representations
        .iter()
        .map(|rep| {
            let mut r = Ranker::new(dict, &rep.vectors, rep.oov_policy())?;
            r.aggregation = config.aggregation;
            r.fusion_weight = T::from_f64_lossy(config.fusion_weight);
            Ok(r)
        })
        .collect::<Result<Vec<_>>>()?;

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let results: Vec<FoldResult> = pool.install(|| {
        (0..split.folds.len())
            .into_par_iter()
            .map(|f| run_fold(f, &split, corpus, dict, &rankers, config))
            .collect::<Result<Vec<_>>>()
    })?;

    let (nm, nr, n) = (config.methods.len(), representations.len(), corpus.len());
    let mut rr = vec![vec![vec![0.0; n]; nr]; nm];
    let mut failures = vec![vec![0usize; nr]; nm];
    for result in &results {
        for (idx, cells) in &result.rows {
            for (m, row) in cells.iter().enumerate() {
                for (r, cell) in row.iter().enumerate() {
                    match cell {
                        Some(v) => rr[m][r][*idx] = *v,
                        None => failures[m][r] += 1,
                    }
                }
            }
        }
    }
    let mrr: Vec<Vec<f64>> = rr
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| v.iter().sum::<f64>() / n as f64)
                .collect()
        })
        .collect();

    let mut labels = Vec::with_capacity(nm * nr);
    let mut flat: Vec<&[f64]> = Vec::with_capacity(nm * nr);
    for (m, method) in config.methods.iter().enumerate() {
        for (r, rep) in representations.iter().enumerate() {
            labels.push(format!("{method}@{}", rep.name));
            flat.push(&rr[m][r]);
        }
    }
    let significance = flat
        .iter()
        .map(|a| {
            flat.iter()
                .map(|b| paired_ttest(a, b))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(EvalReport {
        methods: config.methods.clone(),
        representations: representations.iter().map(|r| r.name.clone()).collect(),
        cutoff: config.cutoff,
        k_folds: config.k_folds,
        seed: config.seed,
        mrr,
        reciprocal_ranks: rr,
        failures,
        config_labels: labels,
        significance,
        folds: results.into_iter().map(|r| r.trace).collect(),
    })
}
