//! Deterministic hashed term-frequency sentence embeddings.

use serde::{Deserialize, Serialize};

/// Dimension of [`HashedTf`] vectors.
pub const DIMENSION: usize = 256;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// An embedding: either all zeros or unit length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UtteranceVector(Vec<f64>);

impl UtteranceVector {
    /// L2-normalizes `values`; an all-zero input stays zero.
    pub fn normalized(mut values: Vec<f64>) -> Self {
        let norm = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            values.iter_mut().for_each(|v| *v /= norm);
        }
        UtteranceVector(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|v| *v == 0.0)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Cosine similarity in `[-1, 1]`; 0 when either side is zero.
    pub fn cosine(&self, other: &UtteranceVector) -> f64 {
        let dot: f64 = self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum();
        let denom = self.norm() * other.norm();
        if denom == 0.0 {
            0.0
        } else {
            (dot / denom).clamp(-1.0, 1.0)
        }
    }
}

/// Maps an utterance to a vector. Swap in a learned encoder by
/// implementing this.
pub trait Embedder: Send + Sync {
    fn embed(&self, text: &str) -> UtteranceVector;
}

/// Lowercased alphanumeric tokens, FNV-1a hashed into 256 buckets,
/// counted, then L2-normalized.
#[derive(Debug, Clone, Copy, Default)]
pub struct HashedTf;

impl Embedder for HashedTf {
    fn embed(&self, text: &str) -> UtteranceVector {
        let mut counts = vec![0.0; DIMENSION];
        for token in tokenize(text) {
            counts[bucket(&token)] += 1.0;
        }
        UtteranceVector::normalized(counts)
    }
}

pub fn embed(text: &str) -> UtteranceVector {
    HashedTf.embed(text)
}

pub fn cosine(a: &UtteranceVector, b: &UtteranceVector) -> f64 {
    a.cosine(b)
}

pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_lowercase)
}

pub fn fnv1a(bytes: &[u8]) -> u64 {
    bytes.iter().fold(FNV_OFFSET, |hash, &b| {
        (hash ^ u64::from(b)).wrapping_mul(FNV_PRIME)
    })
}

fn bucket(token: &str) -> usize {
    (fnv1a(token.as_bytes()) % DIMENSION as u64) as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn fnv_reference_values() {
        // Published FNV-1a 64-bit test vectors.
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn empty_text_is_zero() {
        let v = embed("");
        assert_eq!(v.dim(), DIMENSION);
        assert!(v.is_zero());
        assert!(embed(" ,.!? ").is_zero());
    }

    #[test]
    fn deterministic_and_case_insensitive() {
        assert_eq!(embed("Open an Account"), embed("open an account"));
        let a = embed("hello there");
        let b = embed("hello there");
        let bits = |v: &UtteranceVector| v.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn tokenizer_splits_on_non_alphanumeric() {
        let toks: Vec<String> = tokenize("Hi, I'd like a café-latte!").collect();
        assert_eq!(toks, ["hi", "i", "d", "like", "a", "café", "latte"]);
    }

    proptest! {
        #[test]
        fn unit_or_zero(text in ".{0,60}") {
            let v = embed(&text);
            prop_assert!(v.is_zero() || (v.norm() - 1.0).abs() < 1e-9);
        }

        #[test]
        fn cosine_symmetric_and_bounded(a in "[a-z ]{0,40}", b in "[a-z ]{0,40}") {
            let (va, vb) = (embed(&a), embed(&b));
            let ab = va.cosine(&vb);
            prop_assert!((-1.0..=1.0).contains(&ab));
            prop_assert_eq!(ab, vb.cosine(&va));
            if !va.is_zero() {
                prop_assert!((va.cosine(&va) - 1.0).abs() < 1e-12);
            }
        }
    }
}
