//! Concept ranking for the seven normalisation methods.
//!
//! * `vSim` scores a concept by the cosine between the social phrase and
//!   the concept description.
//! * `bestMT` / `top5MT` score it by the cosine between translated phrases
//!   and the description, taking the best translation(s) from the decoder.
//! * `top5MTr` divides each translation's cosine by its rank.
//! * The `+vSim` variants add the `vSim` cosine to the MT score.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::decoder::TranslationHypothesis;
use crate::error::{Error, Result};
use crate::lexicon::ConceptDictionary;
use crate::scalar::Scalar;
use crate::text::Phrase;
use crate::vectors::{cosine, phrase_vector, OovPolicy, PhraseVector, WordVectors};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    VSim,
    BestMt,
    Top5Mt,
    Top5MtR,
    BestMtVSim,
    Top5MtVSim,
    Top5MtRVSim,
}

impl Method {
    pub const ALL: [Method; 7] = [
        Method::VSim,
        Method::BestMt,
        Method::Top5Mt,
        Method::Top5MtR,
        Method::BestMtVSim,
        Method::Top5MtVSim,
        Method::Top5MtRVSim,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::VSim => "vSim",
            Method::BestMt => "bestMT",
            Method::Top5Mt => "top5MT",
            Method::Top5MtR => "top5MTr",
            Method::BestMtVSim => "bestMT+vSim",
            Method::Top5MtVSim => "top5MT+vSim",
            Method::Top5MtRVSim => "top5MTr+vSim",
        }
    }

    pub fn uses_translation(self) -> bool {
        self != Method::VSim
    }

    /// Whether only the single best translation is used.
    pub fn single_best(self) -> bool {
        matches!(self, Method::BestMt | Method::BestMtVSim)
    }

    pub fn rank_discount(self) -> bool {
        matches!(self, Method::Top5MtR | Method::Top5MtRVSim)
    }

    pub fn fused(self) -> bool {
        matches!(
            self,
            Method::BestMtVSim | Method::Top5MtVSim | Method::Top5MtRVSim
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method `{s}`")))
    }
}

/// How per-translation cells combine into one concept score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Aggregation {
    #[default]
    Max,
    Sum,
}

impl FromStr for Aggregation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Aggregation::Max),
            "sum" => Ok(Aggregation::Sum),
            _ => Err(Error::InvalidArgument(format!("unknown aggregation `{s}`"))),
        }
    }
}

/// Concepts ordered by non-increasing score; ties keep dictionary order.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedConcepts<T> {
    pub entries: Vec<(String, T)>,
    /// Score terms that could not be computed and were replaced.
    pub errored_terms: usize,
}

impl<T: Scalar> RankedConcepts<T> {
    /// 1-based rank of `id`.
    pub fn rank_of(&self, id: &str) -> Option<usize> {
        self.entries
            .iter()
            .position(|(c, _)| c == id)
            .map(|i| i + 1)
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> + '_ {
        self.entries.iter().map(|(id, _)| id.as_str())
    }

    pub fn top(&self, n: usize) -> &[(String, T)] {
        &self.entries[..n.min(self.entries.len())]
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Ordering key: scores snapped to a grid of [`Scalar::tie_quantum`] so that
/// rounding noise does not reorder mathematically tied concepts.
fn snapped<T: Scalar>(score: T) -> f64 {
    if score.is_finite() {
        (score / T::tie_quantum()).round().to_f64_lossy()
    } else {
        score.to_f64_lossy()
    }
}

fn sort_scores<T: Scalar>(
    dict: &ConceptDictionary,
    scores: Vec<T>,
    errored: usize,
) -> RankedConcepts<T> {
    let mut order: Vec<(usize, f64)> = scores.iter().map(|&s| snapped(s)).enumerate().collect();
    order.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(Ordering::Equal)
            .then(a.0.cmp(&b.0))
    });
    RankedConcepts {
        entries: order
            .into_iter()
            .map(|(i, _)| (dict.concepts()[i].id.clone(), scores[i]))
            .collect(),
        errored_terms: errored,
    }
}

/// Ranking state for one dictionary and one vector table. Description
/// vectors are composed once.
#[derive(Debug, Clone)]
pub struct Ranker<'a, T> {
    dict: &'a ConceptDictionary,
    wv: &'a WordVectors<T>,
    oov: OovPolicy,
    descriptions: Vec<Option<PhraseVector<T>>>,
    pub aggregation: Aggregation,
    /// Weight on the MT term of the fused methods.
    pub fusion_weight: T,
}

impl<'a, T: Scalar> Ranker<'a, T> {
    pub fn new(
        dict: &'a ConceptDictionary,
        wv: &'a WordVectors<T>,
        oov: OovPolicy,
    ) -> Result<Self> {
        if dict.is_empty() {
            return Err(Error::EmptyDictionary);
        }
        let descriptions = dict
            .iter()
            .map(|c| {
                phrase_vector(&c.description, wv, oov)
                    .ok()
                    .filter(|v| v.norm() > T::zero())
            })
            .collect();
        Ok(Ranker {
            dict,
            wv,
            oov,
            descriptions,
            aggregation: Aggregation::Max,
            fusion_weight: T::one(),
        })
    }

    /// Uses the default OOV policy for the table's kind.
    pub fn with_default_oov(dict: &'a ConceptDictionary, wv: &'a WordVectors<T>) -> Result<Self> {
        Self::new(dict, wv, OovPolicy::default_for(wv.kind()))
    }

    pub fn dictionary(&self) -> &ConceptDictionary {
        self.dict
    }

    fn cosines(&self, phrase: &Phrase) -> Result<Vec<Option<T>>> {
        let v = phrase_vector(phrase, self.wv, self.oov)?;
        if v.norm() == T::zero() {
            return Err(Error::ZeroVector);
        }
        Ok(self
            .descriptions
            .iter()
            .map(|d| d.as_ref().and_then(|d| cosine(&v, d).ok()))
            .collect())
    }

    fn vsim_scores(&self, phr_t: &Phrase) -> Result<(Vec<T>, usize)> {
        let cells = self.cosines(phr_t)?;
        let errored = cells.iter().filter(|c| c.is_none()).count();
        Ok((
            cells
                .into_iter()
                .map(|c| c.unwrap_or(T::neg_infinity()))
                .collect(),
            errored,
        ))
    }

    /// Per-concept MT scores; `None` where no translation produced a cell.
    fn mt_scores(&self, hyps: &[TranslationHypothesis], discount: bool) -> Result<Vec<Option<T>>> {
        if hyps.is_empty() {
            return Err(Error::NoHypotheses);
        }
        let mut scores: Vec<Option<T>> = vec![None; self.dict.len()];
        for hyp in hyps {
            let Ok(cells) = self.cosines(&hyp.phrase) else {
                continue;
            };
            let weight = if discount {
                T::one() / T::from_f64_lossy(hyp.rank as f64)
            } else {
                T::one()
            };
            for (slot, cell) in scores.iter_mut().zip(cells) {
                let Some(c) = cell else { continue };
                let s = weight * c;
                *slot = Some(match (*slot, self.aggregation) {
                    (None, _) => s,
                    (Some(prev), Aggregation::Max) => prev.max(s),
                    (Some(prev), Aggregation::Sum) => prev + s,
                });
            }
        }
        Ok(scores)
    }

    /// Cosine between the social phrase and each description.
    pub fn rank_vsim(&self, phr_t: &Phrase) -> Result<RankedConcepts<T>> {
        let (scores, errored) = self.vsim_scores(phr_t)?;
        Ok(sort_scores(self.dict, scores, errored))
    }

    /// Cosine between translations and descriptions, aggregated over the
    /// hypotheses; with `discount` each cell is divided by the rank.
    pub fn rank_mt(
        &self,
        hyps: &[TranslationHypothesis],
        discount: bool,
    ) -> Result<RankedConcepts<T>> {
        let scores = self.mt_scores(hyps, discount)?;
        let errored = scores.iter().filter(|s| s.is_none()).count();
        let scores = scores
            .into_iter()
            .map(|s| s.unwrap_or(T::neg_infinity()))
            .collect();
        Ok(sort_scores(self.dict, scores, errored))
    }

    /// `vSim` cosine plus the weighted MT score. A term that cannot be
    /// computed contributes 0; with no hypotheses this is `vSim`.
    pub fn rank_combined(
        &self,
        phr_t: &Phrase,
        hyps: &[TranslationHypothesis],
        discount: bool,
    ) -> Result<RankedConcepts<T>> {
        let n = self.dict.len();
        let vsim = match self.cosines(phr_t) {
            Ok(cells) => cells,
            Err(_) => vec![None; n],
        };
        let mt = if hyps.is_empty() {
            vec![None; n]
        } else {
            self.mt_scores(hyps, discount)?
        };
        let mut errored = 0;
        let mut any = vec![false; n];
        let scores = vsim
            .iter()
            .zip(&mt)
            .zip(any.iter_mut())
            .map(|((v, m), seen)| {
                *seen = v.is_some() || m.is_some();
                let v = v.unwrap_or_else(|| {
                    errored += 1;
                    T::zero()
                });
                let m = m.unwrap_or_else(|| {
                    errored += usize::from(!hyps.is_empty());
                    T::zero()
                });
                v + self.fusion_weight * m
            })
            .collect::<Vec<T>>();
        // a concept with no computable term at all sinks to the bottom
        let scores = scores
            .into_iter()
            .zip(any)
            .map(|(s, seen)| if seen { s } else { T::neg_infinity() })
            .collect();
        Ok(sort_scores(self.dict, scores, errored))
    }

    /// Ranks with `method`, given the decoder's n-best list for `phr_t`
    /// (ignored by `vSim`; only the first entry is used by the `bestMT`
    /// variants).
    pub fn rank(
        &self,
        method: Method,
        phr_t: &Phrase,
        hyps: &[TranslationHypothesis],
    ) -> Result<RankedConcepts<T>> {
        let hyps = if method.single_best() {
            &hyps[..hyps.len().min(1)]
        } else {
            hyps
        };
        match method {
            Method::VSim => self.rank_vsim(phr_t),
            m if m.fused() => self.rank_combined(phr_t, hyps, m.rank_discount()),
            m => self.rank_mt(hyps, m.rank_discount()),
        }
    }
}

pub fn rank_vsim<T: Scalar>(
    phr_t: &Phrase,
    dict: &ConceptDictionary,
    wv: &WordVectors<T>,
) -> Result<RankedConcepts<T>> {
    Ranker::with_default_oov(dict, wv)?.rank_vsim(phr_t)
}

pub fn rank_mt<T: Scalar>(
    dict: &ConceptDictionary,
    wv: &WordVectors<T>,
    hyps: &[TranslationHypothesis],
    discount: bool,
) -> Result<RankedConcepts<T>> {
    Ranker::with_default_oov(dict, wv)?.rank_mt(hyps, discount)
}

pub fn rank_combined<T: Scalar>(
    phr_t: &Phrase,
    dict: &ConceptDictionary,
    wv: &WordVectors<T>,
    hyps: &[TranslationHypothesis],
    discount: bool,
) -> Result<RankedConcepts<T>> {
    Ranker::with_default_oov(dict, wv)?.rank_combined(phr_t, hyps, discount)
}
