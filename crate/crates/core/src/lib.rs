//! Normalisation of informal social-media health phrases to formal medical
//! concepts.
//!
//! A social phrase is translated into the medical register with a small
//! phrase-based statistical MT system (IBM Model 1 alignments, a
//! relative-frequency phrase table, an add-one n-gram LM and a monotone beam
//! decoder). Candidate concepts are then ranked by the cosine similarity of
//! summed word vectors, optionally discounted by translation rank and fused
//! with the direct phrase/description similarity.
//!
//! Vector and ranking code is generic over the floating-point scalar; the
//! aliases at the crate root fix it to `f64` or `f32`.

pub mod align;
pub mod decoder;
pub mod error;
pub mod eval;
pub mod lexicon;
pub mod lm;
pub mod model;
pub mod ptable;
pub mod ranker;
pub mod rng;
pub mod scalar;
pub mod text;
pub mod vectors;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type WordVectorsF64 = vectors::WordVectors<f64>;
pub type WordVectorsF32 = vectors::WordVectors<f32>;
pub type PhraseVectorF64 = vectors::PhraseVector<f64>;
pub type PhraseVectorF32 = vectors::PhraseVector<f32>;
pub type RankedConceptsF64 = ranker::RankedConcepts<f64>;
pub type RankedConceptsF32 = ranker::RankedConcepts<f32>;
pub type RankerF64<'a> = ranker::Ranker<'a, f64>;
pub type RankerF32<'a> = ranker::Ranker<'a, f32>;

/// Hex-encoded SHA-256 of `bytes`.
pub fn content_hash(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(bytes))
}
