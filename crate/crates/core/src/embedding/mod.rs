//! Word-vector similarity metrics and cosine over precomputed sentence vectors.
//!
//! Out-of-vocabulary tokens are skipped. A sentence with no in-vocabulary token at all is
//! an error for the pair; corpus pipelines record such pairs as missing.

mod load;

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

pub use load::{load_embeddings, load_sentence_embeddings, parse_embeddings, parse_sentence_embeddings};

/// Immutable token → vector table with a fixed dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable<T> {
    dimension: usize,
    entries: HashMap<String, Vec<T>>,
}

impl<T: Scalar> EmbeddingTable<T> {
    /// Builds a table; the first occurrence of a duplicated token wins.
    pub fn from_entries(dimension: usize, entries: impl IntoIterator<Item = (String, Vec<T>)>) -> Result<Self> {
        if dimension == 0 {
            return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
        }
        let mut map = HashMap::new();
        for (token, vector) in entries {
            if vector.len() != dimension {
                return Err(Error::Validation(format!(
                    "vector for '{token}' has {} components, expected {dimension}",
                    vector.len()
                )));
            }
            map.entry(token).or_insert(vector);
        }
        Ok(EmbeddingTable {
            dimension,
            entries: map,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, token: &str) -> Option<&[T]> {
        self.entries.get(token).map(Vec::as_slice)
    }

    /// Vectors of the in-vocabulary tokens, in order.
    fn lookup<'a>(&'a self, tokens: &[String]) -> Result<Vec<&'a [T]>> {
        let vectors: Vec<_> = tokens.iter().filter_map(|t| self.get(t)).collect();
        if vectors.is_empty() {
            return Err(Error::AllOutOfVocabulary(tokens.join(" ")));
        }
        Ok(vectors)
    }
}

/// Precomputed sentence vectors keyed by the exact raw utterance text.
#[derive(Debug, Clone, PartialEq)]
pub struct SentenceEmbeddings<T> {
    dimension: usize,
    entries: HashMap<String, Vec<T>>,
}

impl<T: Scalar> SentenceEmbeddings<T> {
    pub fn from_entries(entries: impl IntoIterator<Item = (String, Vec<T>)>) -> Result<Self> {
        let mut map = HashMap::new();
        let mut dimension = None;
        for (text, vector) in entries {
            let dim = *dimension.get_or_insert(vector.len());
            if vector.len() != dim || dim == 0 {
                return Err(Error::Validation(format!(
                    "sentence vector for {text:?} has {} components, expected {dim}",
                    vector.len()
                )));
            }
            map.entry(text).or_insert(vector);
        }
        let dimension = dimension.ok_or_else(|| Error::Validation("no sentence embeddings".into()))?;
        Ok(SentenceEmbeddings {
            dimension,
            entries: map,
        })
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, text: &str) -> Result<&[T]> {
        self.entries
            .get(text)
            .map(Vec::as_slice)
            .ok_or_else(|| Error::MissingSentenceEmbedding(text.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SentenceVectorKind {
    Average,
    Extrema,
}

/// Cosine similarity; 0 when either vector has zero norm.
pub fn cosine<T: Scalar>(u: &[T], v: &[T]) -> T {
    let dot: T = u.iter().zip(v).map(|(&a, &b)| a * b).sum();
    let nu: T = u.iter().map(|&a| a * a).sum::<T>().sqrt();
    let nv: T = v.iter().map(|&b| b * b).sum::<T>().sqrt();
    if nu == T::zero() || nv == T::zero() {
        return T::zero();
    }
    // Rounding can push |cos| a hair past 1.
    (dot / (nu * nv)).max(-T::one()).min(T::one())
}

/// Componentwise mean (`Average`) or per-dimension value of largest magnitude
/// (`Extrema`, positive on a ±v tie) of the in-vocabulary token vectors.
pub fn sentence_vector<T: Scalar>(
    tokens: &[String],
    table: &EmbeddingTable<T>,
    kind: SentenceVectorKind,
) -> Result<Vec<T>> {
    let vectors = table.lookup(tokens)?;
    let dim = table.dimension();
    let out = match kind {
        SentenceVectorKind::Average => {
            let n = T::of_usize(vectors.len());
            (0..dim).map(|d| vectors.iter().map(|v| v[d]).sum::<T>() / n).collect()
        }
        SentenceVectorKind::Extrema => (0..dim)
            .map(|d| {
                vectors.iter().map(|v| v[d]).fold(T::zero(), |best, x| {
                    let (ax, ab) = (x.abs(), best.abs());
                    if ax > ab || (ax == ab && x > best) {
                        x
                    } else {
                        best
                    }
                })
            })
            .collect(),
    };
    Ok(out)
}

/// Embedding Average or Vector Extrema: cosine of the two sentence vectors.
pub fn embedding_metric<T: Scalar>(
    hyp: &[String],
    reference: &[String],
    table: &EmbeddingTable<T>,
    kind: SentenceVectorKind,
) -> Result<T> {
    let h = sentence_vector(hyp, table, kind)?;
    let r = sentence_vector(reference, table, kind)?;
    Ok(cosine(&h, &r))
}

/// Greedy Matching: each token takes its best cosine against the other sentence; the two
/// directional means are averaged.
pub fn greedy_matching<T: Scalar>(hyp: &[String], reference: &[String], table: &EmbeddingTable<T>) -> Result<T> {
    let h = table.lookup(hyp)?;
    let r = table.lookup(reference)?;
    let directed = |from: &[&[T]], to: &[&[T]]| {
        let total: T = from
            .iter()
            .map(|x| to.iter().map(|z| cosine(x, z)).fold(T::neg_infinity(), T::max))
            .sum();
        total / T::of_usize(from.len())
    };
    Ok((directed(&h, &r) + directed(&r, &h)) / T::of_usize(2))
}

/// Cosine of the stored vectors of two raw texts.
pub fn sentence_embedding_cosine<T: Scalar>(
    hyp_text: &str,
    ref_text: &str,
    provider: &SentenceEmbeddings<T>,
) -> Result<T> {
    Ok(cosine(provider.get(hyp_text)?, provider.get(ref_text)?))
}
