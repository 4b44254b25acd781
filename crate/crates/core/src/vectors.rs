//! Word vectors, phrase composition by element-wise sum, and cosine.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::text::Phrase;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorKind {
    OneHot,
    Dense,
}

/// What to do with phrase tokens missing from the table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OovPolicy {
    /// Absent tokens contribute nothing.
    Skip,
    /// Any absent token is an error.
    ZeroFail,
}

impl OovPolicy {
    pub fn default_for(kind: VectorKind) -> Self {
        match kind {
            VectorKind::OneHot => OovPolicy::ZeroFail,
            VectorKind::Dense => OovPolicy::Skip,
        }
    }
}

impl std::str::FromStr for OovPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "skip" => Ok(OovPolicy::Skip),
            "zero_fail" => Ok(OovPolicy::ZeroFail),
            _ => Err(Error::InvalidArgument(format!("unknown oov policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
enum Storage<T> {
    /// Row `i` is the unit vector `e_i`.
    OneHot,
    /// Row-major, `rows * dimension` values.
    Dense(Vec<T>),
}

/// Token to vector table. Immutable once built.
#[derive(Debug, Clone)]
pub struct WordVectors<T> {
    dimension: usize,
    index: HashMap<String, usize>,
    storage: Storage<T>,
}

impl<T: Scalar> WordVectors<T> {
    /// One-hot table over the distinct tokens of `phrases`, indexed in
    /// lexicographic order.
    pub fn one_hot<'a>(phrases: impl IntoIterator<Item = &'a Phrase>) -> Self {
        let vocab: BTreeSet<&str> = phrases.into_iter().flat_map(|p| p.words()).collect();
        let index: HashMap<String, usize> = vocab
            .into_iter()
            .enumerate()
            .map(|(i, w)| (w.to_owned(), i))
            .collect();
        WordVectors {
            dimension: index.len(),
            index,
            storage: Storage::OneHot,
        }
    }

    /// Dense table from `(token, vector)` rows. Later duplicates of a token
    /// are ignored.
    pub fn dense<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, Vec<T>)>,
    {
        let mut dimension = None;
        let mut index = HashMap::new();
        let mut data = Vec::new();
        for (i, (token, values)) in rows.into_iter().enumerate() {
            let dim = *dimension.get_or_insert(values.len());
            if values.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: values.len(),
                    line: i + 1,
                });
            }
            if index.contains_key(&token) {
                continue;
            }
            index.insert(token, index.len());
            data.extend(values);
        }
        let dimension = dimension.unwrap_or(0);
        if dimension == 0 {
            return Err(Error::InvalidArgument("no vector rows".into()));
        }
        Ok(WordVectors {
            dimension,
            index,
            storage: Storage::Dense(data),
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn kind(&self) -> VectorKind {
        match self.storage {
            Storage::OneHot => VectorKind::OneHot,
            Storage::Dense(_) => VectorKind::Dense,
        }
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    /// Hot index of `token` in a one-hot table.
    pub fn hot_index(&self, token: &str) -> Option<usize> {
        match self.storage {
            Storage::OneHot => self.index.get(token).copied(),
            Storage::Dense(_) => None,
        }
    }

    pub fn vector(&self, token: &str) -> Option<Vec<T>> {
        let mut out = vec![T::zero(); self.dimension];
        self.add_into(token, &mut out).then_some(out)
    }

    fn add_into(&self, token: &str, acc: &mut [T]) -> bool {
        let Some(&row) = self.index.get(token) else {
            return false;
        };
        match &self.storage {
            Storage::OneHot => acc[row] = acc[row] + T::one(),
            Storage::Dense(data) => {
                let v = &data[row * self.dimension..(row + 1) * self.dimension];
                for (a, &x) in acc.iter_mut().zip(v) {
                    *a = *a + x;
                }
            }
        }
        true
    }

    /// Every vector multiplied by `factor`. The result is always dense.
    pub fn scaled(&self, factor: T) -> Self {
        let mut rows: Vec<(&String, usize)> = self.index.iter().map(|(t, &i)| (t, i)).collect();
        rows.sort_by_key(|&(_, i)| i);
        let mut data = vec![T::zero(); rows.len() * self.dimension];
        for &(token, i) in &rows {
            let slot = &mut data[i * self.dimension..(i + 1) * self.dimension];
            self.add_into(token, slot);
            for x in slot.iter_mut() {
                *x = *x * factor;
            }
        }
        WordVectors {
            dimension: self.dimension,
            index: self.index.clone(),
            storage: Storage::Dense(data),
        }
    }
}

/// Reads word2vec/GloVe text vectors: `token v1 ... vd` per line, with an
/// optional `count dim` header line.
pub fn load_dense<T: Scalar>(path: impl AsRef<Path>) -> Result<WordVectors<T>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_dense(&text)
}

pub fn parse_dense<T: Scalar>(text: &str) -> Result<WordVectors<T>> {
    let mut header_dim = None;
    let mut rows = Vec::new();
    let mut dimension = None;
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else {
            continue;
        };
        let rest: Vec<&str> = fields.collect();
        if line_no == 1 && rest.len() == 1 {
            if let (Ok(_), Ok(dim)) = (token.parse::<usize>(), rest[0].parse::<usize>()) {
                header_dim = Some(dim);
                continue;
            }
        }
        let values = rest
            .iter()
            .map(|v| v.parse::<T>())
            .collect::<std::result::Result<Vec<T>, _>>()
            .map_err(|_| Error::malformed(line_no, "non-numeric vector component"))?;
        if values.is_empty() {
            return Err(Error::malformed(line_no, "token without vector"));
        }
        let expected = *dimension.get_or_insert(header_dim.unwrap_or(values.len()));
        if values.len() != expected {
            return Err(Error::DimensionMismatch {
                expected,
                found: values.len(),
                line: line_no,
            });
        }
        rows.push((token.to_owned(), values));
    }
    WordVectors::dense(rows)
}

/// Element-wise sum of a phrase's token vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct PhraseVector<T>(pub Vec<T>);

impl<T: Scalar> PhraseVector<T> {
    pub fn dimension(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[T] {
        &self.0
    }

    pub fn norm(&self) -> T {
        self.0.iter().fold(T::zero(), |s, &x| s + x * x).sqrt()
    }
}

pub fn phrase_vector<T: Scalar>(
    phrase: &Phrase,
    wv: &WordVectors<T>,
    oov: OovPolicy,
) -> Result<PhraseVector<T>> {
    let mut acc = vec![T::zero(); wv.dimension()];
    let mut found = 0usize;
    for token in phrase.words() {
        if wv.add_into(token, &mut acc) {
            found += 1;
        } else if oov == OovPolicy::ZeroFail {
            return Err(Error::OovToken(token.to_owned()));
        }
    }
    if found == 0 {
        return Err(Error::AllTokensOov);
    }
    Ok(PhraseVector(acc))
}

pub fn cosine<T: Scalar>(u: &PhraseVector<T>, v: &PhraseVector<T>) -> Result<T> {
    if u.dimension() != v.dimension() {
        return Err(Error::DimensionMismatch {
            expected: u.dimension(),
            found: v.dimension(),
            line: 0,
        });
    }
    let (nu, nv) = (u.norm(), v.norm());
    if nu == T::zero() || nv == T::zero() {
        return Err(Error::ZeroVector);
    }
    let dot =
        u.0.iter()
            .zip(&v.0)
            .fold(T::zero(), |s, (&a, &b)| s + a * b);
    Ok(dot / (nu * nv))
}
