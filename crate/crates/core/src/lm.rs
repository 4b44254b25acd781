//! Add-one smoothed n-gram language model over medical-register phrases.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::text::Phrase;

pub const BOS: &str = "<s>";
pub const EOS: &str = "</s>";
pub const DEFAULT_ORDER: usize = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct LanguageModel {
    order: usize,
    ngrams: BTreeMap<Vec<String>, u64>,
    contexts: HashMap<Vec<String>, u64>,
    vocab_size: usize,
}

fn padded<'a>(words: impl Iterator<Item = &'a str>, order: usize) -> Vec<&'a str> {
    let mut seq = vec![BOS; order.saturating_sub(1)];
    seq.extend(words);
    seq
}

impl LanguageModel {
    pub fn train(phrases: &[Phrase], order: usize) -> Result<Self> {
        if phrases.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if order == 0 {
            return Err(Error::InvalidArgument("LM order must be >= 1".into()));
        }
        let mut ngrams: BTreeMap<Vec<String>, u64> = BTreeMap::new();
        let mut vocab = BTreeSet::new();
        for phrase in phrases {
            vocab.extend(phrase.words());
            let mut seq = padded(phrase.words(), order);
            seq.push(EOS);
            for window in seq.windows(order) {
                let key = window.iter().map(|w| w.to_string()).collect();
                *ngrams.entry(key).or_default() += 1;
            }
        }
        Ok(Self::from_counts(order, ngrams, vocab.len() + 1))
    }

    fn from_counts(order: usize, ngrams: BTreeMap<Vec<String>, u64>, vocab_size: usize) -> Self {
        let mut contexts: HashMap<Vec<String>, u64> = HashMap::new();
        for (gram, &c) in &ngrams {
            *contexts.entry(gram[..order - 1].to_vec()).or_default() += c;
        }
        LanguageModel {
            order,
            ngrams,
            contexts,
            vocab_size,
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab_size
    }

    pub fn count<S: AsRef<str>>(&self, ngram: &[S]) -> u64 {
        let key: Vec<String> = ngram.iter().map(|s| s.as_ref().to_owned()).collect();
        self.ngrams.get(&key).copied().unwrap_or(0)
    }

    pub fn context_count<S: AsRef<str>>(&self, context: &[S]) -> u64 {
        let key: Vec<String> = context.iter().map(|s| s.as_ref().to_owned()).collect();
        self.contexts.get(&key).copied().unwrap_or(0)
    }

    /// `(count(context, word) + 1) / (count(context) + vocab_size)`.
    pub fn prob<S: AsRef<str>>(&self, context: &[S], word: &str) -> f64 {
        debug_assert_eq!(context.len(), self.order - 1);
        let mut gram: Vec<String> = context.iter().map(|s| s.as_ref().to_owned()).collect();
        let ctx = self.contexts.get(&gram).copied().unwrap_or(0);
        gram.push(word.to_owned());
        let c = self.ngrams.get(&gram).copied().unwrap_or(0);
        (c as f64 + 1.0) / (ctx as f64 + self.vocab_size as f64)
    }

    fn score(&self, words: &[&str], with_end: bool) -> f64 {
        let mut seq = padded(words.iter().copied(), self.order);
        if with_end {
            seq.push(EOS);
        }
        let ctx = self.order - 1;
        (ctx..seq.len())
            .map(|i| self.prob(&seq[i - ctx..i], seq[i]).ln())
            .sum()
    }

    /// Log-probability of the words including the end-of-sentence marker.
    pub fn logprob(&self, words: &[&str]) -> f64 {
        self.score(words, true)
    }

    /// Log-probability of the words as a sentence prefix, without the
    /// end-of-sentence term. Never increases as words are appended.
    pub fn prefix_logprob(&self, words: &[&str]) -> f64 {
        self.score(words, false)
    }

    /// `lm.tsv` rows: `ngram\tcount`, sorted by n-gram.
    pub fn to_tsv(&self) -> String {
        self.ngrams
            .iter()
            .map(|(g, c)| format!("{}\t{}\n", g.join(" "), c))
            .collect()
    }

    /// Rebuilds a model from `lm.tsv`; order and vocabulary size are
    /// recovered from the n-grams.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut ngrams = BTreeMap::new();
        let mut order = None;
        let mut vocab = BTreeSet::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let Some((gram, count)) = line.split_once('\t') else {
                return Err(Error::malformed(i + 1, "expected ngram and count"));
            };
            let gram: Vec<String> = gram.split(' ').map(str::to_owned).collect();
            let n = *order.get_or_insert(gram.len());
            if gram.len() != n {
                return Err(Error::malformed(i + 1, "mixed n-gram orders"));
            }
            let count: u64 = count
                .parse()
                .map_err(|_| Error::malformed(i + 1, "bad count"))?;
            vocab.extend(gram.iter().filter(|w| *w != BOS && *w != EOS).cloned());
            ngrams.insert(gram, count);
        }
        let order = order.ok_or(Error::EmptyCorpus)?;
        Ok(Self::from_counts(order, ngrams, vocab.len() + 1))
    }
}

pub fn train_lm(phrases: &[Phrase], order: usize) -> Result<LanguageModel> {
    LanguageModel::train(phrases, order)
}

pub fn lm_logprob(phrase: &Phrase, lm: &LanguageModel) -> f64 {
    let words: Vec<&str> = phrase.words().collect();
    lm.logprob(&words)
}
