//! IBM Model 1 lexical translation trained with EM, Viterbi word alignment
//! and grow-diag symmetrisation.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::text::Phrase;

/// Reserved source token that absorbs unaligned target words.
pub const NULL_TOKEN: &str = "<NULL>";

/// Probability assigned to `(target, source)` pairs never seen in training.
pub const PROB_FLOOR: f64 = 1e-12;

pub const DEFAULT_EM_ITERATIONS: usize = 10;

/// Lexical translation probabilities `t(target | source)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationTable {
    vocab: Vec<String>,
    ids: HashMap<String, u32>,
    probs: HashMap<(u32, u32), f64>,
}

impl TranslationTable {
    fn intern(&mut self, word: &str) -> u32 {
        if let Some(&id) = self.ids.get(word) {
            return id;
        }
        let id = self.vocab.len() as u32;
        self.vocab.push(word.to_owned());
        self.ids.insert(word.to_owned(), id);
        id
    }

    fn id(&self, word: &str) -> Option<u32> {
        self.ids.get(word).copied()
    }

    /// `t(target | source)`, or `None` when the pair was never observed.
    pub fn get(&self, target: &str, source: &str) -> Option<f64> {
        let (t, s) = (self.id(target)?, self.id(source)?);
        self.probs.get(&(s, t)).copied()
    }

    /// `t(target | source)` with the unseen-pair floor.
    pub fn prob(&self, target: &str, source: &str) -> f64 {
        self.get(target, source).unwrap_or(PROB_FLOOR)
    }

    fn prob_ids(&self, source: Option<u32>, target: Option<u32>) -> f64 {
        match (source, target) {
            (Some(s), Some(t)) => self.probs.get(&(s, t)).copied().unwrap_or(PROB_FLOOR),
            _ => PROB_FLOOR,
        }
    }

    /// Entries as `(source, target, prob)` sorted by source then target.
    pub fn entries(&self) -> Vec<(&str, &str, f64)> {
        let mut out: Vec<_> = self
            .probs
            .iter()
            .map(|(&(s, t), &p)| {
                (
                    self.vocab[s as usize].as_str(),
                    self.vocab[t as usize].as_str(),
                    p,
                )
            })
            .collect();
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }

    /// Sum of stored probabilities for each source token.
    pub fn row_sums(&self) -> BTreeMap<&str, f64> {
        let mut sums = BTreeMap::new();
        for (s, _, p) in self.entries() {
            *sums.entry(s).or_insert(0.0) += p;
        }
        sums
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// `model1.tsv` rows: `source\ttarget\tprob`.
    pub fn to_tsv(&self) -> String {
        self.entries()
            .into_iter()
            .map(|(s, t, p)| format!("{s}\t{t}\t{p}\n"))
            .collect()
    }

    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut table = TranslationTable {
            vocab: Vec::new(),
            ids: HashMap::new(),
            probs: HashMap::new(),
        };
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let fields: Vec<&str> = line.split('\t').collect();
            let [s, t, p] = fields[..] else {
                return Err(Error::malformed(i + 1, "expected source, target, prob"));
            };
            let p: f64 = p
                .parse()
                .map_err(|_| Error::malformed(i + 1, "bad probability"))?;
            let (s, t) = (table.intern(s), table.intern(t));
            table.probs.insert((s, t), p);
        }
        Ok(table)
    }
}

struct IdPair {
    source: Vec<u32>,
    target: Vec<u32>,
}

fn intern_corpus(table: &mut TranslationTable, corpus: &[(Phrase, Phrase)]) -> Vec<IdPair> {
    let null = table.intern(NULL_TOKEN);
    corpus
        .iter()
        .map(|(f, e)| {
            let mut source = vec![null];
            source.extend(f.words().map(|w| table.intern(w)));
            let target = e.words().map(|w| table.intern(w)).collect();
            IdPair { source, target }
        })
        .collect()
}

fn uniform_init(table: &mut TranslationTable, pairs: &[IdPair]) {
    let mut cooc: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for pair in pairs {
        for &s in &pair.source {
            cooc.entry(s)
                .or_default()
                .extend(pair.target.iter().copied());
        }
    }
    for (s, targets) in cooc {
        let p = 1.0 / targets.len() as f64;
        for t in targets {
            table.probs.insert((s, t), p);
        }
    }
}

fn log_likelihood_ids(table: &TranslationTable, pairs: &[IdPair]) -> f64 {
    let mut ll = 0.0;
    for pair in pairs {
        let norm = (pair.source.len() as f64).ln();
        for &t in &pair.target {
            let z: f64 = pair.source.iter().map(|&s| table.probs[&(s, t)]).sum();
            ll += z.ln() - norm;
        }
    }
    ll
}

fn em_step(table: &mut TranslationTable, pairs: &[IdPair]) {
    // Counts are accumulated in corpus order so runs are bit-identical.
    let mut counts: HashMap<(u32, u32), f64> = HashMap::with_capacity(table.probs.len());
    let mut totals: HashMap<u32, f64> = HashMap::new();
    for pair in pairs {
        for &t in &pair.target {
            let z: f64 = pair.source.iter().map(|&s| table.probs[&(s, t)]).sum();
            for &s in &pair.source {
                let c = table.probs[&(s, t)] / z;
                *counts.entry((s, t)).or_insert(0.0) += c;
                *totals.entry(s).or_insert(0.0) += c;
            }
        }
    }
    for (key, p) in table.probs.iter_mut() {
        let total = totals.get(&key.0).copied().unwrap_or(0.0);
        *p = if total > 0.0 {
            counts.get(key).copied().unwrap_or(0.0) / total
        } else {
            0.0
        };
    }
}

/// Trains `t(target | source)` on `(source, target)` phrase pairs.
pub fn train_model1(corpus: &[(Phrase, Phrase)], iterations: usize) -> Result<TranslationTable> {
    train_model1_traced(corpus, iterations).map(|(table, _)| table)
}

/// As [`train_model1`], also returning the corpus log-likelihood before the
/// first iteration and after each one.
pub fn train_model1_traced(
    corpus: &[(Phrase, Phrase)],
    iterations: usize,
) -> Result<(TranslationTable, Vec<f64>)> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if iterations == 0 {
        return Err(Error::InvalidArgument(
            "EM needs at least one iteration".into(),
        ));
    }
    let mut table = TranslationTable {
        vocab: Vec::new(),
        ids: HashMap::new(),
        probs: HashMap::new(),
    };
    let pairs = intern_corpus(&mut table, corpus);
    uniform_init(&mut table, &pairs);
    let mut trace = vec![log_likelihood_ids(&table, &pairs)];
    for _ in 0..iterations {
        em_step(&mut table, &pairs);
        trace.push(log_likelihood_ids(&table, &pairs));
    }
    Ok((table, trace))
}

/// Model 1 log-likelihood of the corpus, up to the constant length term.
pub fn log_likelihood(table: &TranslationTable, corpus: &[(Phrase, Phrase)]) -> f64 {
    let null = table.id(NULL_TOKEN);
    let mut ll = 0.0;
    for (f, e) in corpus {
        let source: Vec<Option<u32>> = std::iter::once(null)
            .chain(f.words().map(|w| table.id(w)))
            .collect();
        let norm = (source.len() as f64).ln();
        for w in e.words() {
            let t = table.id(w);
            let z: f64 = source.iter().map(|&s| table.prob_ids(s, t)).sum();
            ll += z.ln() - norm;
        }
    }
    ll
}

/// Word links `(source_index, target_index)` for one sentence pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    source_len: usize,
    target_len: usize,
    links: BTreeSet<(usize, usize)>,
}

impl Alignment {
    pub fn new(
        source_len: usize,
        target_len: usize,
        links: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let links: BTreeSet<_> = links.into_iter().collect();
        for &(i, j) in &links {
            if i >= source_len || j >= target_len {
                return Err(Error::IndexOutOfBounds {
                    source_index: i,
                    target_index: j,
                    source_len,
                    target_len,
                });
            }
        }
        Ok(Alignment {
            source_len,
            target_len,
            links,
        })
    }

    pub fn source_len(&self) -> usize {
        self.source_len
    }

    pub fn target_len(&self) -> usize {
        self.target_len
    }

    pub fn links(&self) -> &BTreeSet<(usize, usize)> {
        &self.links
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.links.contains(&(i, j))
    }

    /// Same links seen from the other side.
    pub fn transposed(&self) -> Alignment {
        Alignment {
            source_len: self.target_len,
            target_len: self.source_len,
            links: self.links.iter().map(|&(i, j)| (j, i)).collect(),
        }
    }
}

/// Links each target word to its most probable source word, or leaves it
/// unlinked when NULL is strictly more probable. Ties go to the smaller
/// source index.
pub fn viterbi_align(source: &Phrase, target: &Phrase, table: &TranslationTable) -> Alignment {
    let src: Vec<&str> = source.words().collect();
    let mut links = BTreeSet::new();
    for (j, e) in target.words().enumerate() {
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, f) in src.iter().enumerate() {
            let p = table.prob(e, f);
            if p > best.1 {
                best = (i, p);
            }
        }
        if table.prob(e, NULL_TOKEN) > best.1 {
            continue;
        }
        links.insert((best.0, j));
    }
    Alignment {
        source_len: src.len(),
        target_len: target.len(),
        links,
    }
}

const NEIGHBOURS: [(isize, isize); 8] = [
    (-1, 0),
    (0, -1),
    (1, 0),
    (0, 1),
    (-1, -1),
    (-1, 1),
    (1, -1),
    (1, 1),
];

/// Grow-diag symmetrisation of a source-to-target alignment with a
/// target-to-source one.
///
/// Starts from the intersection and repeatedly scans the union in row-major
/// order, adding any link that neighbours (including diagonally) an accepted
/// link while its source or target word is still uncovered.
pub fn symmetrize(forward: &Alignment, backward: &Alignment) -> Result<Alignment> {
    let backward = backward.transposed();
    if backward.source_len != forward.source_len || backward.target_len != forward.target_len {
        return Err(Error::IndexOutOfBounds {
            source_index: backward.source_len,
            target_index: backward.target_len,
            source_len: forward.source_len,
            target_len: forward.target_len,
        });
    }
    let union: BTreeSet<(usize, usize)> = forward.links.union(&backward.links).copied().collect();
    let mut links: BTreeSet<(usize, usize)> = forward
        .links
        .intersection(&backward.links)
        .copied()
        .collect();
    let mut src_covered = vec![false; forward.source_len];
    let mut tgt_covered = vec![false; forward.target_len];
    for &(i, j) in &links {
        src_covered[i] = true;
        tgt_covered[j] = true;
    }
    loop {
        let mut added = false;
        for &(i, j) in &union {
            if links.contains(&(i, j)) || (src_covered[i] && tgt_covered[j]) {
                continue;
            }
            let adjacent = NEIGHBOURS.iter().any(|&(di, dj)| {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                ni >= 0 && nj >= 0 && links.contains(&(ni as usize, nj as usize))
            });
            if adjacent {
                links.insert((i, j));
                src_covered[i] = true;
                tgt_covered[j] = true;
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    Ok(Alignment {
        source_len: forward.source_len,
        target_len: forward.target_len,
        links,
    })
}

/// Model 1 tables for both directions.
#[derive(Debug, Clone)]
pub struct BidirectionalModel {
    /// `t(medical | social)`
    pub forward: TranslationTable,
    /// `t(social | medical)`
    pub backward: TranslationTable,
}

impl BidirectionalModel {
    pub fn train(corpus: &[(Phrase, Phrase)], iterations: usize) -> Result<Self> {
        let reversed: Vec<(Phrase, Phrase)> =
            corpus.iter().map(|(f, e)| (e.clone(), f.clone())).collect();
        Ok(BidirectionalModel {
            forward: train_model1(corpus, iterations)?,
            backward: train_model1(&reversed, iterations)?,
        })
    }

    /// Symmetrised alignment of a `(source, target)` pair.
    pub fn align(&self, source: &Phrase, target: &Phrase) -> Alignment {
        let fwd = viterbi_align(source, target, &self.forward);
        let bwd = viterbi_align(target, source, &self.backward);
        symmetrize(&fwd, &bwd).expect("both directions cover the same pair")
    }
}
