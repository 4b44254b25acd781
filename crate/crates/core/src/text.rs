//! Tokenisation and anonymisation of raw phrases.

use std::collections::HashSet;
use std::fmt;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Anonymisation placeholders. Tokens equal to one of these keep their case.
pub const PLACEHOLDERS: [&str; 7] = [
    "_NUMBER_", "_USER_", "_URL_", "_LOC_", "_EMAIL_", "_DATE_", "_DRUG_",
];

pub fn is_placeholder(s: &str) -> bool {
    PLACEHOLDERS.contains(&s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Register {
    Social,
    Medical,
}

/// A single lowercase, whitespace-free text unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Token(String);

impl Token {
    /// Builds a token, rejecting empty strings and strings with whitespace.
    pub fn new(surface: impl Into<String>) -> Result<Self> {
        let surface = surface.into();
        if surface.is_empty() || surface.chars().any(char::is_whitespace) {
            return Err(Error::InvalidArgument(format!(
                "`{surface}` is not a valid token"
            )));
        }
        Ok(Token(surface))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_placeholder(&self) -> bool {
        is_placeholder(&self.0)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

/// A non-empty token sequence in one register.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Phrase {
    tokens: Vec<Token>,
    register: Register,
}

impl Phrase {
    pub fn new(tokens: Vec<Token>, register: Register) -> Result<Self> {
        if tokens.is_empty() {
            return Err(Error::EmptyPhrase);
        }
        Ok(Phrase { tokens, register })
    }

    /// Builds a phrase from already-normalised words.
    pub fn from_words<S: AsRef<str>>(words: &[S], register: Register) -> Result<Self> {
        let tokens = words
            .iter()
            .map(|w| Token::new(w.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Phrase::new(tokens, register)
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn register(&self) -> Register {
        self.register
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    /// Always false; a phrase holds at least one token.
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> impl Iterator<Item = &str> + '_ {
        self.tokens.iter().map(Token::as_str)
    }

    pub fn to_words(&self) -> Vec<String> {
        self.words().map(str::to_owned).collect()
    }
}

impl fmt::Display for Phrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, t) in self.tokens.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(t.as_str())?;
        }
        Ok(())
    }
}

fn normalise_chunk(chunk: &str) -> Option<String> {
    let outer = chunk.trim_matches(|c: char| c.is_ascii_punctuation() && c != '_');
    if is_placeholder(outer) {
        return Some(outer.to_owned());
    }
    let inner = outer.trim_matches(|c: char| c.is_ascii_punctuation());
    if inner.is_empty() {
        None
    } else {
        Some(inner.to_lowercase())
    }
}

/// Lowercases, splits on whitespace and strips leading/trailing ASCII
/// punctuation from each token. Placeholders survive verbatim.
pub fn tokenize(raw: &str, register: Register) -> Result<Phrase> {
    let tokens = raw
        .split_whitespace()
        .filter_map(normalise_chunk)
        .map(Token)
        .collect();
    Phrase::new(tokens, register)
}

/// Token-level replacement rules for user names, URLs, emails, dates,
/// numbers, drug names and (with a gazetteer) locations.
#[derive(Debug, Clone, Default)]
pub struct Anonymizer {
    drugs: HashSet<String>,
    locations: HashSet<String>,
}

impl Anonymizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_drugs<I, S>(mut self, drugs: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.drugs
            .extend(drugs.into_iter().map(|d| d.as_ref().to_lowercase()));
        self
    }

    pub fn with_locations<I, S>(mut self, locations: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        self.locations
            .extend(locations.into_iter().map(|d| d.as_ref().to_lowercase()));
        self
    }

    fn placeholder_for(&self, token: &str) -> Option<&'static str> {
        if is_placeholder(token) {
            return None;
        }
        if token.starts_with("http") || token.starts_with("www") {
            Some("_URL_")
        } else if token.starts_with('@') {
            Some("_USER_")
        } else if is_email(token) {
            Some("_EMAIL_")
        } else if is_date(token) {
            Some("_DATE_")
        } else if is_numeric(token) {
            Some("_NUMBER_")
        } else if self.drugs.contains(token) {
            Some("_DRUG_")
        } else if self.locations.contains(token) {
            Some("_LOC_")
        } else {
            None
        }
    }

    /// Replaces each matching token by its placeholder; length is preserved.
    pub fn anonymize(&self, phrase: &Phrase) -> Phrase {
        let tokens = phrase
            .tokens()
            .iter()
            .map(|t| match self.placeholder_for(t.as_str()) {
                Some(p) => Token(p.to_owned()),
                None => t.clone(),
            })
            .collect();
        Phrase {
            tokens,
            register: phrase.register(),
        }
    }
}

/// Anonymises with a drug lexicon only.
pub fn anonymize<S: AsRef<str>>(phrase: &Phrase, drug_lexicon: &[S]) -> Phrase {
    Anonymizer::new().with_drugs(drug_lexicon).anonymize(phrase)
}

fn is_email(token: &str) -> bool {
    match token.find('@') {
        Some(at) if at > 0 => token[at + 1..].contains('.'),
        _ => false,
    }
}

fn is_numeric(token: &str) -> bool {
    token.chars().any(|c| c.is_ascii_digit())
        && token
            .chars()
            .all(|c| c.is_ascii_digit() || c.is_ascii_punctuation())
}

// dd/dd/dddd or dd-dd-dddd with a single separator kind.
fn is_date(token: &str) -> bool {
    let sep = if token.contains('/') { '/' } else { '-' };
    let parts: Vec<&str> = token.split(sep).collect();
    let digits = |s: &str, lo: usize, hi: usize| {
        (lo..=hi).contains(&s.len()) && s.chars().all(|c| c.is_ascii_digit())
    };
    parts.len() == 3 && digits(parts[0], 1, 2) && digits(parts[1], 1, 2) && digits(parts[2], 4, 4)
}

/// Reads a one-term-per-line lexicon; blank lines and `#` comments are skipped.
pub fn load_lexicon(path: impl AsRef<Path>) -> Result<Vec<String>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_lexicon(&text))
}

pub fn parse_lexicon(text: &str) -> Vec<String> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(str::to_lowercase)
        .collect()
}
