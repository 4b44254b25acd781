//! Concept dictionaries and parallel phrase/concept corpora.
//!
//! Both files are UTF-8 TSV with LF line endings; blank lines and lines
//! starting with `#` are skipped.
//!
//! ```text
//! concepts.tsv   <id>\t<description>
//! corpus.tsv     <phrase>\t<concept_id>
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::rng::SeededRng;
use crate::text::{tokenize, Anonymizer, Phrase, Register, Token};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Concept {
    pub id: String,
    pub description: Phrase,
}

/// Concepts in file order with lookup by id.
#[derive(Debug, Clone, Default)]
pub struct ConceptDictionary {
    concepts: Vec<Concept>,
    index: HashMap<String, usize>,
}

impl ConceptDictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, concept: Concept) -> Result<()> {
        if concept.id.is_empty() {
            return Err(Error::InvalidArgument("empty concept id".into()));
        }
        if self.index.contains_key(&concept.id) {
            return Err(Error::DuplicateId {
                id: concept.id,
                line: self.concepts.len() + 1,
            });
        }
        self.index.insert(concept.id.clone(), self.concepts.len());
        self.concepts.push(concept);
        Ok(())
    }

    pub fn from_concepts(concepts: impl IntoIterator<Item = Concept>) -> Result<Self> {
        let mut dict = Self::new();
        for c in concepts {
            dict.push(c)?;
        }
        Ok(dict)
    }

    pub fn get(&self, id: &str) -> Option<&Concept> {
        self.index.get(id).map(|&i| &self.concepts[i])
    }

    /// File position of `id`.
    pub fn position(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn concepts(&self) -> &[Concept] {
        &self.concepts
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Concept> {
        self.concepts.iter()
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.concepts.is_empty()
    }

    pub fn to_tsv(&self) -> String {
        self.concepts
            .iter()
            .map(|c| format!("{}\t{}\n", c.id, c.description))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusPair {
    pub source: Phrase,
    pub concept_id: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParallelCorpus {
    pub pairs: Vec<CorpusPair>,
}

impl ParallelCorpus {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn to_tsv(&self) -> String {
        self.pairs
            .iter()
            .map(|p| format!("{}\t{}\n", p.source, p.concept_id))
            .collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_tsv()).map_err(|e| Error::io(path, e))
    }

    /// `(source phrase, concept description)` pairs for the given indices.
    pub fn training_pairs(
        &self,
        dict: &ConceptDictionary,
        indices: impl IntoIterator<Item = usize>,
    ) -> Vec<(Phrase, Phrase)> {
        indices
            .into_iter()
            .map(|i| {
                let pair = &self.pairs[i];
                let concept = dict
                    .get(&pair.concept_id)
                    .expect("corpus ids are resolved at load time");
                (pair.source.clone(), concept.description.clone())
            })
            .collect()
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.strip_suffix('\r').unwrap_or(l)))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
}

fn split_two(line_no: usize, line: &str) -> Result<(&str, &str)> {
    let mut fields = line.split('\t');
    match (fields.next(), fields.next(), fields.next()) {
        (Some(a), Some(b), None) => Ok((a.trim(), b.trim())),
        _ => Err(Error::malformed(
            line_no,
            "expected exactly two tab-separated fields",
        )),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn load_concepts(path: impl AsRef<Path>) -> Result<ConceptDictionary> {
    parse_concepts(&read(path.as_ref())?)
}

pub fn parse_concepts(text: &str) -> Result<ConceptDictionary> {
    let mut dict = ConceptDictionary::new();
    for (line_no, line) in data_lines(text) {
        let (id, desc) = split_two(line_no, line)?;
        if id.is_empty() {
            return Err(Error::malformed(line_no, "empty concept id"));
        }
        if dict.get(id).is_some() {
            return Err(Error::DuplicateId {
                id: id.to_owned(),
                line: line_no,
            });
        }
        let description = tokenize(desc, Register::Medical)?;
        dict.push(Concept {
            id: id.to_owned(),
            description,
        })?;
    }
    Ok(dict)
}

pub fn load_corpus(
    path: impl AsRef<Path>,
    dict: &ConceptDictionary,
    anonymizer: &Anonymizer,
) -> Result<ParallelCorpus> {
    parse_corpus(&read(path.as_ref())?, dict, anonymizer)
}

pub fn parse_corpus(
    text: &str,
    dict: &ConceptDictionary,
    anonymizer: &Anonymizer,
) -> Result<ParallelCorpus> {
    let mut pairs = Vec::new();
    for (line_no, line) in data_lines(text) {
        let (raw, id) = split_two(line_no, line)?;
        if dict.get(id).is_none() {
            return Err(Error::UnknownConcept {
                id: id.to_owned(),
                line: line_no,
            });
        }
        let source = tokenize(raw, Register::Social).map_err(|e| match e {
            Error::EmptyPhrase => Error::malformed(line_no, "phrase has no tokens"),
            e => e,
        })?;
        pairs.push(CorpusPair {
            source: anonymizer.anonymize(&source),
            concept_id: id.to_owned(),
        });
    }
    Ok(ParallelCorpus { pairs })
}

/// Lay substitutes for common medical words, used by the synthetic generator.
const LAY_SYNONYMS: &[(&str, &[&str])] = &[
    ("insomnia", &["no sleep", "cant sleep", "sleepless"]),
    ("headache", &["head hurts", "head pounding", "migraine"]),
    ("nausea", &["queasy", "feel sick", "sick stomach"]),
    ("vomiting", &["throwing up", "puking", "threw up"]),
    ("dizziness", &["dizzy", "lightheaded", "room spinning"]),
    ("fatigue", &["tired", "exhausted", "wiped out"]),
    ("drowsiness", &["sleepy", "zonked", "groggy"]),
    ("anxiety", &["anxious", "on edge", "nervous"]),
    ("depression", &["depressed", "down", "feel low"]),
    ("pain", &["hurts", "ache", "aching"]),
    ("weight", &["pounds", "lbs"]),
    ("gain", &["put on", "gaining"]),
    ("loss", &["losing", "lost"]),
    ("appetite", &["hunger", "hungry"]),
    ("mouth", &["gob"]),
    ("dry", &["parched"]),
    ("vision", &["eyesight", "seeing"]),
    ("blurred", &["blurry", "fuzzy"]),
    ("tremor", &["shaking", "shaky", "the shakes"]),
    ("palpitations", &["heart racing", "heart pounding"]),
    ("sweating", &["sweaty", "sweats"]),
    ("rash", &["spots", "itchy skin"]),
    ("diarrhea", &["the runs", "runny tummy"]),
    ("constipation", &["cant poop", "blocked up"]),
    ("memory", &["remembering", "brain"]),
    ("impairment", &["fog", "useless"]),
    ("irritability", &["cranky", "snappy"]),
    ("agitation", &["wound up", "restless"]),
    ("seizure", &["fit", "convulsing"]),
    ("abdominal", &["tummy", "belly"]),
    ("muscle", &["muscles"]),
    ("hair", &["hairs"]),
    ("night", &["nighttime"]),
    ("suicidal", &["wanna die", "end it"]),
    ("thoughts", &["thinking"]),
    ("sexual", &["sex"]),
    ("dysfunction", &["problems", "issues"]),
    ("libido", &["sex drive"]),
    ("decreased", &["low", "less"]),
    ("increased", &["more", "extra"]),
    ("difficulty", &["trouble", "cant"]),
    ("concentrating", &["focus", "focusing"]),
    ("heart", &["ticker"]),
    ("rate", &["beat"]),
];

/// Chatter inserted around and inside synthetic phrases. Words that appear in
/// the dictionary are filtered out before use.
const FILLERS: &[&str] = &[
    "ugh",
    "so",
    "lol",
    "omg",
    "really",
    "today",
    "again",
    "im",
    "got",
    "this",
    "is",
    "killing",
    "me",
    "af",
    "tbh",
    "smh",
    "literally",
    "since",
    "the",
    "new",
    "meds",
    "all",
    "day",
    "now",
    "why",
    "just",
    "like",
    "kinda",
    "sooo",
    "haha",
];

/// Short openers prepended to every synthetic phrase; built from `FILLERS`.
const OPENERS: &[&[&str]] = &[
    &[],
    &["ugh"],
    &["so", "much"],
    &["omg", "the"],
    &["im", "literally"],
    &["this", "is", "killing", "me"],
    &["since", "the", "new", "meds"],
    &["tbh"],
];

fn respell(word: &str, variant: usize) -> String {
    let chars: Vec<char> = word.chars().collect();
    match variant % 3 {
        // drop interior vowels
        0 if chars.len() > 3 => {
            let mut out: String = chars[..1].iter().collect();
            out.extend(chars[1..].iter().filter(|c| !"aeiou".contains(**c)));
            if out.len() < 2 {
                word.to_owned()
            } else {
                out
            }
        }
        // stretch the last letter
        1 => {
            let mut out = word.to_owned();
            if let Some(&c) = chars.last() {
                out.push(c);
                out.push(c);
            }
            out
        }
        // truncate
        _ if chars.len() > 4 => chars[..chars.len() - 2].iter().collect(),
        _ => format!("{word}z"),
    }
}

/// Builds a synthetic parallel corpus from the concept descriptions.
///
/// Every source starts with an opener of filler words followed by the
/// description. With probability `noise` per description word the word is
/// replaced by a lay synonym or a respelling, a filler is inserted after it,
/// and it is swapped with its right neighbour.
pub fn generate_synthetic(
    dict: &ConceptDictionary,
    n_per_concept: usize,
    noise: f64,
    seed: u64,
) -> Result<ParallelCorpus> {
    if dict.is_empty() {
        return Err(Error::EmptyDictionary);
    }
    if !(0.0..=1.0).contains(&noise) {
        return Err(Error::InvalidArgument(format!(
            "noise {noise} outside [0, 1]"
        )));
    }
    let dict_vocab: BTreeSet<&str> = dict.iter().flat_map(|c| c.description.words()).collect();
    let fillers: Vec<&str> = FILLERS
        .iter()
        .copied()
        .filter(|f| !dict_vocab.contains(f))
        .collect();
    let openers: Vec<Vec<&str>> = OPENERS
        .iter()
        .map(|o| {
            o.iter()
                .copied()
                .filter(|w| !dict_vocab.contains(w))
                .collect()
        })
        .collect();
    let synonyms: HashMap<&str, &[&str]> = LAY_SYNONYMS.iter().copied().collect();

    let mut rng = SeededRng::new(seed);
    let mut pairs = Vec::with_capacity(dict.len() * n_per_concept);
    for concept in dict.iter() {
        for _ in 0..n_per_concept {
            let mut words: Vec<String> = rng.pick(&openers).iter().map(|w| w.to_string()).collect();
            let start = words.len();
            for word in concept.description.words() {
                if rng.chance(noise) {
                    match synonyms.get(word) {
                        Some(alts) if rng.chance(0.7) => {
                            words.extend(rng.pick(alts).split(' ').map(str::to_owned))
                        }
                        _ => words.push(respell(word, rng.below(3))),
                    }
                } else {
                    words.push(word.to_owned());
                }
                if !fillers.is_empty() && rng.chance(noise) {
                    words.push(rng.pick(&fillers).to_string());
                }
            }
            for i in start..words.len().saturating_sub(1) {
                if rng.chance(noise) {
                    words.swap(i, i + 1);
                }
            }
            let tokens = words
                .into_iter()
                .map(Token::new)
                .collect::<Result<Vec<_>>>()?;
            pairs.push(CorpusPair {
                source: Phrase::new(tokens, Register::Social)?,
                concept_id: concept.id.clone(),
            });
        }
    }
    Ok(ParallelCorpus { pairs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dict() -> ConceptDictionary {
        parse_concepts("193462001\tinsomnia\n25064002\theadache\n").unwrap()
    }

    #[test]
    fn parses_single_concept() {
        let d = parse_concepts("193462001\tInsomnia\n").unwrap();
        assert_eq!(d.len(), 1);
        let c = d.get("193462001").unwrap();
        assert_eq!(c.description.to_string(), "insomnia");
        assert_eq!(c.description.register(), Register::Medical);
    }

    #[test]
    fn duplicate_ids_rejected() {
        let err = parse_concepts("1\ta\n1\tb\n").unwrap_err();
        assert!(matches!(err, Error::DuplicateId { ref id, line: 2 } if id == "1"));
    }

    #[test]
    fn empty_file_is_empty_dictionary() {
        assert!(parse_concepts("").unwrap().is_empty());
        assert!(parse_concepts("# only a comment\n\n").unwrap().is_empty());
    }

    #[test]
    fn malformed_lines() {
        assert!(matches!(
            parse_concepts("no tab here\n"),
            Err(Error::MalformedLine { line: 1, .. })
        ));
        assert!(matches!(
            parse_concepts("# c\n1\ta\tb\n"),
            Err(Error::MalformedLine { line: 2, .. })
        ));
        assert!(matches!(parse_concepts("1\t!!\n"), Err(Error::EmptyPhrase)));
    }

    #[test]
    fn corpus_line_maps_to_concept() {
        let c = parse_corpus(
            "no way i'm gettin any sleep 2nite\t193462001\n",
            &dict(),
            &Anonymizer::new(),
        )
        .unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.pairs[0].concept_id, "193462001");
        assert_eq!(c.pairs[0].source.len(), 7);
    }

    #[test]
    fn corpus_is_anonymised() {
        let anon = Anonymizer::new().with_drugs(["prozac"]);
        let c = parse_corpus("Prozac gave me 2 headaches\t25064002\n", &dict(), &anon).unwrap();
        assert_eq!(
            c.pairs[0].source.to_string(),
            "_DRUG_ gave me _NUMBER_ headaches"
        );
    }

    #[test]
    fn unknown_concept_names_line() {
        let err = parse_corpus("# header\nfoo\t999\n", &dict(), &Anonymizer::new()).unwrap_err();
        assert!(matches!(err, Error::UnknownConcept { ref id, line: 2 } if id == "999"));
    }

    #[test]
    fn corpus_of_201_lines() {
        let text: String = (0..201)
            .map(|i| format!("phrase number{i}\t193462001\n"))
            .collect();
        assert_eq!(
            parse_corpus(&text, &dict(), &Anonymizer::new())
                .unwrap()
                .len(),
            201
        );
    }

    #[test]
    fn well_formed_corpus_round_trips() {
        let text = "ugh no sleep again\t193462001\nhead hurts\t25064002\n";
        let c = parse_corpus(text, &dict(), &Anonymizer::new()).unwrap();
        assert_eq!(c.to_tsv(), text);
        let d = parse_concepts("1\tweight gain\n2\tdry mouth\n").unwrap();
        assert_eq!(d.to_tsv(), "1\tweight gain\n2\tdry mouth\n");
    }

    #[test]
    fn synthetic_zero_noise_contains_description() {
        let d = parse_concepts("1\tweight gain\n").unwrap();
        let c = generate_synthetic(&d, 2, 0.0, 7).unwrap();
        assert_eq!(c.len(), 2);
        for p in &c.pairs {
            let s = p.source.to_string();
            assert!(s.ends_with("weight gain"), "{s}");
        }
    }

    #[test]
    fn synthetic_is_deterministic() {
        let d = dict();
        assert_eq!(
            generate_synthetic(&d, 5, 0.5, 7).unwrap(),
            generate_synthetic(&d, 5, 0.5, 7).unwrap()
        );
        assert_ne!(
            generate_synthetic(&d, 5, 0.5, 7).unwrap(),
            generate_synthetic(&d, 5, 0.5, 8).unwrap()
        );
    }

    #[test]
    fn synthetic_counts_per_concept() {
        let text: String = (0..10)
            .map(|i| format!("c{i}\tsymptom{i} pain\n"))
            .collect();
        let d = parse_concepts(&text).unwrap();
        let c = generate_synthetic(&d, 20, 0.3, 1).unwrap();
        assert_eq!(c.len(), 200);
        for concept in d.iter() {
            let n = c
                .pairs
                .iter()
                .filter(|p| p.concept_id == concept.id)
                .count();
            assert_eq!(n, 20);
        }
    }

    #[test]
    fn synthetic_rejects_empty_dictionary() {
        assert!(matches!(
            generate_synthetic(&ConceptDictionary::new(), 2, 0.0, 1),
            Err(Error::EmptyDictionary)
        ));
    }

    #[test]
    fn respellings_are_tokens() {
        for w in ["insomnia", "rash", "gain", "a"] {
            for v in 0..3 {
                let r = respell(w, v);
                assert!(!r.is_empty() && !r.contains(' '));
            }
        }
    }
}
