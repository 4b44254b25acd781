//! Phrase-pair extraction and the relative-frequency phrase table.

use std::collections::BTreeMap;
use std::ops::Range;

use crate::align::{Alignment, BidirectionalModel};
use crate::error::{Error, Result};
use crate::text::Phrase;

pub const DEFAULT_MAX_PHRASE_LEN: usize = 4;

/// Source and target token ranges of one extracted pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpanPair {
    pub source: Range<usize>,
    pub target: Range<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PhrasePair {
    pub source: Vec<String>,
    pub target: Vec<String>,
}

/// All span pairs of length at most `max_len` consistent with `alignment`.
///
/// A pair is consistent when it contains at least one link and no link
/// leaves it on either side. Unaligned target words at the edges of a
/// minimal target span are included in every combination.
pub fn extract_spans(alignment: &Alignment, max_len: usize) -> Vec<SpanPair> {
    let (src_len, tgt_len) = (alignment.source_len(), alignment.target_len());
    let mut tgt_aligned = vec![false; tgt_len];
    for &(_, j) in alignment.links() {
        tgt_aligned[j] = true;
    }
    let mut out = Vec::new();
    for s_start in 0..src_len {
        for s_end in s_start + 1..=(s_start + max_len).min(src_len) {
            let mut t_min = usize::MAX;
            let mut t_max = 0;
            for &(i, j) in alignment.links() {
                if (s_start..s_end).contains(&i) {
                    t_min = t_min.min(j);
                    t_max = t_max.max(j);
                }
            }
            if t_min == usize::MAX || t_max - t_min + 1 > max_len {
                continue;
            }
            let escapes = alignment
                .links()
                .iter()
                .any(|&(i, j)| (t_min..=t_max).contains(&j) && !(s_start..s_end).contains(&i));
            if escapes {
                continue;
            }
            let mut t_start = t_min;
            loop {
                let mut t_end = t_max + 1;
                while t_end - t_start <= max_len {
                    out.push(SpanPair {
                        source: s_start..s_end,
                        target: t_start..t_end,
                    });
                    if t_end == tgt_len || tgt_aligned[t_end] {
                        break;
                    }
                    t_end += 1;
                }
                if t_start == 0 || tgt_aligned[t_start - 1] {
                    break;
                }
                t_start -= 1;
            }
        }
    }
    out.sort_by(|a, b| {
        (a.source.start, a.source.end, a.target.start, a.target.end).cmp(&(
            b.source.start,
            b.source.end,
            b.target.start,
            b.target.end,
        ))
    });
    out
}

/// Consistent phrase pairs as token spans, sorted lexicographically.
pub fn extract_phrases(
    source: &Phrase,
    target: &Phrase,
    alignment: &Alignment,
    max_len: usize,
) -> Vec<PhrasePair> {
    let src = source.to_words();
    let tgt = target.to_words();
    let mut pairs: Vec<PhrasePair> = extract_spans(alignment, max_len)
        .into_iter()
        .map(|sp| PhrasePair {
            source: src[sp.source].to_vec(),
            target: tgt[sp.target].to_vec(),
        })
        .collect();
    pairs.sort();
    pairs
}

/// `phi(target | source)` by relative frequency of extracted pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseTable {
    entries: BTreeMap<Vec<String>, Vec<(Vec<String>, f64)>>,
    max_phrase_len: usize,
}

impl PhraseTable {
    /// Builds the table from raw pair counts.
    pub fn from_pairs(pairs: impl IntoIterator<Item = PhrasePair>, max_phrase_len: usize) -> Self {
        let mut counts: BTreeMap<Vec<String>, BTreeMap<Vec<String>, u64>> = BTreeMap::new();
        for pair in pairs {
            *counts
                .entry(pair.source)
                .or_default()
                .entry(pair.target)
                .or_default() += 1;
        }
        let entries = counts
            .into_iter()
            .map(|(src, targets)| {
                let total: u64 = targets.values().sum();
                let row = targets
                    .into_iter()
                    .map(|(tgt, c)| (tgt, c as f64 / total as f64))
                    .collect();
                (src, row)
            })
            .collect();
        PhraseTable {
            entries,
            max_phrase_len,
        }
    }

    pub fn max_phrase_len(&self) -> usize {
        self.max_phrase_len
    }

    /// Translations of a source span, sorted by target.
    pub fn translations<S: AsRef<str>>(&self, source: &[S]) -> Option<&[(Vec<String>, f64)]> {
        let key: Vec<String> = source.iter().map(|s| s.as_ref().to_owned()).collect();
        self.entries.get(&key).map(Vec::as_slice)
    }

    pub fn phi<S: AsRef<str>>(&self, source: &[S], target: &[S]) -> Option<f64> {
        self.translations(source)?
            .iter()
            .find(|(t, _)| {
                t.iter()
                    .map(String::as_str)
                    .eq(target.iter().map(AsRef::as_ref))
            })
            .map(|&(_, p)| p)
    }

    pub fn sources(&self) -> impl Iterator<Item = &[String]> + '_ {
        self.entries.keys().map(Vec::as_slice)
    }

    pub fn len(&self) -> usize {
        self.entries.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `phrases.tsv` rows: `source span\ttarget span\tphi`, sorted.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (src, row) in &self.entries {
            for (tgt, phi) in row {
                out.push_str(&format!("{}\t{}\t{}\n", src.join(" "), tgt.join(" "), phi));
            }
        }
        out
    }

    pub fn from_tsv(text: &str, max_phrase_len: usize) -> Result<Self> {
        let mut entries: BTreeMap<Vec<String>, Vec<(Vec<String>, f64)>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
            let fields: Vec<&str> = line.split('\t').collect();
            let [s, t, phi] = fields[..] else {
                return Err(Error::malformed(i + 1, "expected source, target, phi"));
            };
            let phi: f64 = phi
                .parse()
                .map_err(|_| Error::malformed(i + 1, "bad phi"))?;
            if !(phi > 0.0 && phi <= 1.0) {
                return Err(Error::malformed(i + 1, "phi outside (0, 1]"));
            }
            let split = |x: &str| x.split(' ').map(str::to_owned).collect::<Vec<_>>();
            entries.entry(split(s)).or_default().push((split(t), phi));
        }
        for row in entries.values_mut() {
            row.sort_by(|a, b| a.0.cmp(&b.0));
        }
        Ok(PhraseTable {
            entries,
            max_phrase_len,
        })
    }
}

/// Aligns each `(source, target)` pair in both directions, symmetrises,
/// extracts phrase pairs and scores them by relative frequency.
pub fn build_phrase_table(
    corpus: &[(Phrase, Phrase)],
    model: &BidirectionalModel,
    max_len: usize,
) -> Result<PhraseTable> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    if max_len == 0 {
        return Err(Error::InvalidArgument(
            "max phrase length must be >= 1".into(),
        ));
    }
    let pairs = corpus.iter().flat_map(|(src, tgt)| {
        let alignment = model.align(src, tgt);
        extract_phrases(src, tgt, &alignment, max_len)
    });
    Ok(PhraseTable::from_pairs(pairs, max_len))
}
