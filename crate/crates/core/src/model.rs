//! The trained translation model and its on-disk directory layout.
//!
//! ```text
//! model1.tsv     source \t target \t t(target|source)
//! phrases.tsv    source span \t target span \t phi
//! lm.tsv         ngram \t count
//! manifest.tsv   key \t value
//! ```

use std::fs;
use std::path::Path;

use crate::align::{BidirectionalModel, TranslationTable, DEFAULT_EM_ITERATIONS};
use crate::content_hash;
use crate::decoder::{decode_topk, DecoderConfig, TranslationHypothesis};
use crate::error::{Error, Result};
use crate::lexicon::{ConceptDictionary, ParallelCorpus};
use crate::lm::{LanguageModel, DEFAULT_ORDER};
use crate::ptable::{build_phrase_table, PhraseTable, DEFAULT_MAX_PHRASE_LEN};
use crate::text::Phrase;

pub const MODEL1_FILE: &str = "model1.tsv";
pub const PHRASES_FILE: &str = "phrases.tsv";
pub const LM_FILE: &str = "lm.tsv";
pub const MANIFEST_FILE: &str = "manifest.tsv";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrainingSettings {
    pub em_iterations: usize,
    pub max_phrase_len: usize,
    pub lm_order: usize,
}

impl Default for TrainingSettings {
    fn default() -> Self {
        TrainingSettings {
            em_iterations: DEFAULT_EM_ITERATIONS,
            max_phrase_len: DEFAULT_MAX_PHRASE_LEN,
            lm_order: DEFAULT_ORDER,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TrainedModel {
    /// `t(medical | social)`
    pub lexical: TranslationTable,
    pub phrases: PhraseTable,
    pub lm: LanguageModel,
    pub settings: TrainingSettings,
    /// Hash of the index-tagged training pairs the model saw.
    pub train_hash: String,
    pub train_pairs: usize,
}

/// Hash of `(corpus index, source, description)` rows in the given order.
pub fn training_hash(rows: &[(usize, Phrase, Phrase)]) -> String {
    let mut buf = String::new();
    for (i, src, tgt) in rows {
        buf.push_str(&format!("{i}\t{src}\t{tgt}\n"));
    }
    content_hash(buf.as_bytes())
}

impl TrainedModel {
    /// Trains on the corpus pairs at `indices`, pairing each social phrase
    /// with its concept's description.
    pub fn train(
        corpus: &ParallelCorpus,
        dict: &ConceptDictionary,
        indices: &[usize],
        settings: TrainingSettings,
    ) -> Result<Self> {
        let rows: Vec<(usize, Phrase, Phrase)> = indices
            .iter()
            .zip(corpus.training_pairs(dict, indices.iter().copied()))
            .map(|(&i, (s, t))| (i, s, t))
            .collect();
        let pairs: Vec<(Phrase, Phrase)> = rows
            .iter()
            .map(|(_, s, t)| (s.clone(), t.clone()))
            .collect();
        if pairs.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let alignment = BidirectionalModel::train(&pairs, settings.em_iterations)?;
        let phrases = build_phrase_table(&pairs, &alignment, settings.max_phrase_len)?;
        let medical: Vec<Phrase> = pairs.iter().map(|(_, t)| t.clone()).collect();
        let lm = LanguageModel::train(&medical, settings.lm_order)?;
        Ok(TrainedModel {
            lexical: alignment.forward,
            phrases,
            lm,
            settings,
            train_hash: training_hash(&rows),
            train_pairs: rows.len(),
        })
    }

    pub fn decode(
        &self,
        phrase: &Phrase,
        k: usize,
        config: &DecoderConfig,
    ) -> Result<Vec<TranslationHypothesis>> {
        decode_topk(phrase, &self.phrases, &self.lm, k, config)
    }

    fn manifest(&self, extra: &[(String, String)]) -> String {
        let mut rows = vec![
            ("format".to_owned(), "1".to_owned()),
            (
                "em_iterations".to_owned(),
                self.settings.em_iterations.to_string(),
            ),
            (
                "max_phrase_len".to_owned(),
                self.settings.max_phrase_len.to_string(),
            ),
            ("lm_order".to_owned(), self.settings.lm_order.to_string()),
            ("train_pairs".to_owned(), self.train_pairs.to_string()),
            ("train_hash".to_owned(), self.train_hash.clone()),
        ];
        rows.extend(extra.iter().cloned());
        rows.into_iter()
            .map(|(k, v)| format!("{k}\t{v}\n"))
            .collect()
    }

    /// Writes the four model files into `dir`, creating it if needed.
    pub fn save(&self, dir: impl AsRef<Path>, extra_manifest: &[(String, String)]) -> Result<()> {
        let dir = dir.as_ref();
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let write = |name: &str, body: String| {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(path, e))
        };
        write(MODEL1_FILE, self.lexical.to_tsv())?;
        write(PHRASES_FILE, self.phrases.to_tsv())?;
        write(LM_FILE, self.lm.to_tsv())?;
        write(MANIFEST_FILE, self.manifest(extra_manifest))
    }

    pub fn load(dir: impl AsRef<Path>) -> Result<Self> {
        let dir = dir.as_ref();
        let read = |name: &str| {
            let path = dir.join(name);
            fs::read_to_string(&path).map_err(|e| Error::io(path, e))
        };
        let manifest = read(MANIFEST_FILE)?;
        let get = |key: &str| -> Result<String> {
            manifest
                .lines()
                .filter_map(|l| l.split_once('\t'))
                .find(|(k, _)| *k == key)
                .map(|(_, v)| v.to_owned())
                .ok_or_else(|| Error::InvalidArgument(format!("manifest lacks `{key}`")))
        };
        let num = |key: &str| -> Result<usize> {
            get(key)?
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("manifest `{key}` is not a number")))
        };
        let settings = TrainingSettings {
            em_iterations: num("em_iterations")?,
            max_phrase_len: num("max_phrase_len")?,
            lm_order: num("lm_order")?,
        };
        Ok(TrainedModel {
            lexical: TranslationTable::from_tsv(&read(MODEL1_FILE)?)?,
            phrases: PhraseTable::from_tsv(&read(PHRASES_FILE)?, settings.max_phrase_len)?,
            lm: LanguageModel::from_tsv(&read(LM_FILE)?)?,
            settings,
            train_hash: get("train_hash")?,
            train_pairs: num("train_pairs")?,
        })
    }
}
