use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{EmbeddingTable, SentenceEmbeddings};
use crate::error::{Error, Result};
use crate::Scalar;

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads word vectors in word2vec text format: an optional `count dim` header, then
/// `token v1 ... vd` per line.
pub fn load_embeddings<T: Scalar>(path: impl AsRef<Path>) -> Result<EmbeddingTable<T>> {
    let path = path.as_ref();
    parse_embeddings(&read(path)?, path)
}

pub fn parse_embeddings<T: Scalar>(text: &str, origin: &Path) -> Result<EmbeddingTable<T>> {
    let mut dimension: Option<usize> = None;
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let mut fields = line.split_whitespace();
        let Some(token) = fields.next() else { continue };
        let rest: Vec<&str> = fields.collect();

        if entries.is_empty() && dimension.is_none() && rest.len() == 1 {
            if let (Ok(_), Ok(dim)) = (token.parse::<usize>(), rest[0].parse::<usize>()) {
                if dim == 0 {
                    return Err(Error::parse(origin, line_no, "header declares dimension 0"));
                }
                dimension = Some(dim);
                continue;
            }
        }

        let vector = rest
            .iter()
            .map(|s| {
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .map(T::of_f64)
                    .ok_or_else(|| Error::parse(origin, line_no, format!("non-numeric component '{s}'")))
            })
            .collect::<Result<Vec<T>>>()?;
        let expected = *dimension.get_or_insert(vector.len());
        if vector.is_empty() || vector.len() != expected {
            return Err(Error::parse(
                origin,
                line_no,
                format!("'{token}' has {} components, expected {expected}", vector.len()),
            ));
        }
        entries.push((token.to_string(), vector));
    }
    match dimension {
        Some(dim) if !entries.is_empty() => EmbeddingTable::from_entries(dim, entries),
        _ => Err(Error::Validation(format!("{}: no embedding vectors", origin.display()))),
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SentenceLine {
    text: String,
    vector: Vec<f64>,
}

/// Loads `{"text": ..., "vector": [...]}` lines.
pub fn load_sentence_embeddings<T: Scalar>(path: impl AsRef<Path>) -> Result<SentenceEmbeddings<T>> {
    let path = path.as_ref();
    parse_sentence_embeddings(&read(path)?, path)
}

pub fn parse_sentence_embeddings<T: Scalar>(text: &str, origin: &Path) -> Result<SentenceEmbeddings<T>> {
    let mut entries = Vec::new();
    let mut dim = None;
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: SentenceLine =
            serde_json::from_str(line).map_err(|e| Error::parse(origin, i + 1, e.to_string()))?;
        let expected = *dim.get_or_insert(parsed.vector.len());
        if parsed.vector.is_empty() || parsed.vector.len() != expected {
            return Err(Error::parse(
                origin,
                i + 1,
                format!("vector has {} components, expected {expected}", parsed.vector.len()),
            ));
        }
        entries.push((parsed.text, parsed.vector.into_iter().map(T::of_f64).collect()));
    }
    if entries.is_empty() {
        return Err(Error::Validation(format!(
            "{}: no sentence embeddings",
            origin.display()
        )));
    }
    SentenceEmbeddings::from_entries(entries)
}
