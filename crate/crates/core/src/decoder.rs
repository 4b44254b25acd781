//! Monotone beam-search decoding into top-k medical-register translations.
//!
//! A hypothesis covers a prefix of the input with a left-to-right sequence
//! of phrase-table segments. Its model score is
//! `prod(phi(segment)) * exp(lambda_lm * lm_logprob(output))`. Single input
//! tokens without any table entry are copied through at a fixed penalty.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lm::LanguageModel;
use crate::ptable::PhraseTable;
use crate::text::{Phrase, Register, Token};

pub const PASS_THROUGH_PENALTY: f64 = 1e-6;
pub const DEFAULT_LAMBDA_LM: f64 = 0.5;
pub const DEFAULT_BEAM: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoderConfig {
    pub beam: usize,
    pub lambda_lm: f64,
    pub pass_through_penalty: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            beam: DEFAULT_BEAM,
            lambda_lm: DEFAULT_LAMBDA_LM,
            pass_through_penalty: PASS_THROUGH_PENALTY,
        }
    }
}

/// One entry of an n-best list.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationHypothesis {
    pub phrase: Phrase,
    /// Score renormalised over the returned list.
    pub score: f64,
    /// 1-based position in the list.
    pub rank: usize,
    /// Natural log of the unnormalised model score.
    pub log_score: f64,
}

#[derive(Debug, Clone)]
struct Partial {
    output: Vec<String>,
    log_phi: f64,
    priority: f64,
}

fn by_score_then_surface(a: (f64, &[String]), b: (f64, &[String])) -> Ordering {
    b.0.partial_cmp(&a.0)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.1.join(" ").cmp(&b.1.join(" ")))
}

/// Returns at most `k` translations of `phr_t`, best first.
pub fn decode_topk(
    phr_t: &Phrase,
    pt: &PhraseTable,
    lm: &LanguageModel,
    k: usize,
    config: &DecoderConfig,
) -> Result<Vec<TranslationHypothesis>> {
    if phr_t.is_empty() {
        return Err(Error::EmptyPhrase);
    }
    if k == 0 || config.beam < k {
        return Err(Error::InvalidArgument(format!(
            "need 1 <= k <= beam, got k={k}, beam={}",
            config.beam
        )));
    }
    let src: Vec<&str> = phr_t.words().collect();
    let n = src.len();
    let max_len = pt.max_phrase_len().max(1);
    let pass_log = config.pass_through_penalty.ln();

    // stacks[i] holds hypotheses covering src[..i], one per distinct output
    let mut stacks: Vec<HashMap<Vec<String>, Partial>> = vec![HashMap::new(); n + 1];
    stacks[0].insert(
        Vec::new(),
        Partial {
            output: Vec::new(),
            log_phi: 0.0,
            priority: 0.0,
        },
    );
    for pos in 0..n {
        let mut current: Vec<Partial> = stacks[pos].drain().map(|(_, p)| p).collect();
        current.sort_by(|a, b| {
            by_score_then_surface((a.priority, &a.output), (b.priority, &b.output))
        });
        current.truncate(config.beam);
        for hyp in &current {
            for len in 1..=max_len.min(n - pos) {
                let span = &src[pos..pos + len];
                let options: Vec<(&[String], f64)> = match pt.translations(span) {
                    Some(row) => row
                        .iter()
                        .map(|(t, phi)| (t.as_slice(), phi.ln()))
                        .collect(),
                    None => Vec::new(),
                };
                let pass = [span[0].to_owned()];
                let options = if options.is_empty() && len == 1 {
                    vec![(&pass[..], pass_log)]
                } else {
                    options
                };
                for (target, log_phi) in options {
                    let mut output = hyp.output.clone();
                    output.extend(target.iter().cloned());
                    let log_phi = hyp.log_phi + log_phi;
                    let words: Vec<&str> = output.iter().map(String::as_str).collect();
                    let priority = log_phi + config.lambda_lm * lm.prefix_logprob(&words);
                    let stack = &mut stacks[pos + len];
                    match stack.get(&output) {
                        Some(existing) if existing.log_phi >= log_phi => {}
                        _ => {
                            stack.insert(
                                output.clone(),
                                Partial {
                                    output,
                                    log_phi,
                                    priority,
                                },
                            );
                        }
                    }
                }
            }
        }
    }

    let mut finals: Vec<(f64, Vec<String>)> = stacks[n]
        .drain()
        .map(|(output, p)| {
            let words: Vec<&str> = output.iter().map(String::as_str).collect();
            (p.log_phi + config.lambda_lm * lm.logprob(&words), output)
        })
        .collect();
    finals.sort_by(|a, b| by_score_then_surface((a.0, &a.1), (b.0, &b.1)));
    finals.truncate(k);
    finals
        .into_iter()
        .enumerate()
        .map(|(i, (log_score, words))| {
            let tokens = words
                .into_iter()
                .map(Token::new)
                .collect::<Result<Vec<_>>>()?;
            Ok(TranslationHypothesis {
                phrase: Phrase::new(tokens, Register::Medical)?,
                score: 0.0,
                rank: i + 1,
                log_score,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(normalise)
}

fn normalise(mut hyps: Vec<TranslationHypothesis>) -> Vec<TranslationHypothesis> {
    let Some(max) = hyps.iter().map(|h| h.log_score).reduce(f64::max) else {
        return hyps;
    };
    let z: f64 = hyps.iter().map(|h| (h.log_score - max).exp()).sum();
    for h in &mut hyps {
        h.score = (h.log_score - max).exp() / z;
    }
    hyps
}

/// First `k` hypotheses of an n-best list, with scores renormalised.
pub fn truncate(hyps: &[TranslationHypothesis], k: usize) -> Vec<TranslationHypothesis> {
    normalise(hyps.iter().take(k).cloned().collect())
}
