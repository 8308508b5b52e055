use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::Utterance;
use crate::embedding::{
    embedding_metric, greedy_matching, sentence_embedding_cosine, EmbeddingTable, SentenceEmbeddings,
    SentenceVectorKind,
};
use crate::error::{Error, Result};
use crate::overlap::{meteor, rouge_l, sentence_bleu, BleuParams, MeteorParams, RougeParams};
use crate::Scalar;

/// A pairwise similarity metric `d(hypothesis, reference)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum MetricId {
    /// Sentence BLEU up to the given order (1..=4).
    Bleu(u8),
    Meteor,
    RougeL,
    EmbeddingAverage,
    VectorExtrema,
    GreedyMatching,
    /// Cosine over precomputed sentence vectors.
    SentenceEmbedding,
}

impl MetricId {
    pub const ALL: [MetricId; 10] = [
        MetricId::Bleu(1),
        MetricId::Bleu(2),
        MetricId::Bleu(3),
        MetricId::Bleu(4),
        MetricId::Meteor,
        MetricId::RougeL,
        MetricId::EmbeddingAverage,
        MetricId::VectorExtrema,
        MetricId::GreedyMatching,
        MetricId::SentenceEmbedding,
    ];

    pub fn needs_word_embeddings(self) -> bool {
        matches!(
            self,
            MetricId::EmbeddingAverage | MetricId::VectorExtrema | MetricId::GreedyMatching
        )
    }

    pub fn needs_sentence_embeddings(self) -> bool {
        self == MetricId::SentenceEmbedding
    }

    /// Cosine-valued metrics range over [-1, 1]; the rest over [0, 1].
    pub fn is_cosine(self) -> bool {
        self.needs_word_embeddings() || self.needs_sentence_embeddings()
    }
}

impl fmt::Display for MetricId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricId::Bleu(n) => write!(f, "bleu{n}"),
            MetricId::Meteor => f.write_str("meteor"),
            MetricId::RougeL => f.write_str("rouge_l"),
            MetricId::EmbeddingAverage => f.write_str("emb_average"),
            MetricId::VectorExtrema => f.write_str("vector_extrema"),
            MetricId::GreedyMatching => f.write_str("greedy_matching"),
            MetricId::SentenceEmbedding => f.write_str("sent_embedding"),
        }
    }
}

impl FromStr for MetricId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| format!("unknown metric '{s}'"))
    }
}

impl From<MetricId> for String {
    fn from(m: MetricId) -> String {
        m.to_string()
    }
}

impl TryFrom<String> for MetricId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

/// Metric parameters plus the resources the embedding metrics read from.
#[derive(Debug, Clone)]
pub struct Scorer<'a, T> {
    /// `max_n` is overridden by the order of each `MetricId::Bleu`.
    pub bleu: BleuParams<T>,
    pub meteor: MeteorParams<T>,
    pub rouge: RougeParams<T>,
    pub embeddings: Option<&'a EmbeddingTable<T>>,
    pub sentence_embeddings: Option<&'a SentenceEmbeddings<T>>,
}

impl<T: Scalar> Default for Scorer<'_, T> {
    fn default() -> Self {
        Scorer {
            bleu: BleuParams::default(),
            meteor: MeteorParams::default(),
            rouge: RougeParams::default(),
            embeddings: None,
            sentence_embeddings: None,
        }
    }
}

impl<'a, T: Scalar> Scorer<'a, T> {
    pub fn with_embeddings(mut self, table: &'a EmbeddingTable<T>) -> Self {
        self.embeddings = Some(table);
        self
    }

    pub fn with_sentence_embeddings(mut self, provider: &'a SentenceEmbeddings<T>) -> Self {
        self.sentence_embeddings = Some(provider);
        self
    }

    /// Fails if a metric's parameters are invalid or its resources are not loaded.
    pub fn check(&self, metric: MetricId) -> Result<()> {
        match metric {
            MetricId::Bleu(n) => BleuParams {
                max_n: n as usize,
                ..self.bleu
            }
            .validate(),
            MetricId::Meteor => self.meteor.validate(),
            MetricId::RougeL => self.rouge.validate(),
            m if m.needs_word_embeddings() && self.embeddings.is_none() => {
                Err(Error::InvalidArgument(format!("metric '{m}' requires word embeddings")))
            }
            m if m.needs_sentence_embeddings() && self.sentence_embeddings.is_none() => Err(Error::InvalidArgument(
                format!("metric '{m}' requires sentence embeddings"),
            )),
            _ => Ok(()),
        }
    }

    pub fn pair_score(&self, metric: MetricId, hyp: &Utterance, reference: &Utterance) -> Result<T> {
        let (h, r) = (&hyp.tokens, &reference.tokens);
        match metric {
            MetricId::Bleu(n) => {
                let params = BleuParams {
                    max_n: n as usize,
                    ..self.bleu
                };
                sentence_bleu(h, std::slice::from_ref(r), &params)
            }
            MetricId::Meteor => meteor(h, r, &self.meteor),
            MetricId::RougeL => rouge_l(h, r, &self.rouge),
            MetricId::EmbeddingAverage => embedding_metric(h, r, self.table(metric)?, SentenceVectorKind::Average),
            MetricId::VectorExtrema => embedding_metric(h, r, self.table(metric)?, SentenceVectorKind::Extrema),
            MetricId::GreedyMatching => greedy_matching(h, r, self.table(metric)?),
            MetricId::SentenceEmbedding => {
                let provider = self
                    .sentence_embeddings
                    .ok_or_else(|| Error::InvalidArgument(format!("metric '{metric}' requires sentence embeddings")))?;
                sentence_embedding_cosine(&hyp.raw, &reference.raw, provider)
            }
        }
    }

    /// Pair score mapped into [0, 1]: cosine metrics are clamped at zero.
    pub fn normalized_pair_score(&self, metric: MetricId, hyp: &Utterance, reference: &Utterance) -> Result<T> {
        let s = self.pair_score(metric, hyp, reference)?;
        Ok(s.max(T::zero()).min(T::one()))
    }

    /// Best pair score over the references. References the metric cannot score
    /// (no in-vocabulary token, no stored sentence vector) are skipped; the first such
    /// error is returned if none remain.
    pub fn multi_ref_score<'r>(
        &self,
        metric: MetricId,
        hyp: &Utterance,
        refs: impl IntoIterator<Item = &'r Utterance>,
    ) -> Result<T> {
        let mut best: Option<T> = None;
        let mut first_err = None;
        let mut any = false;
        for r in refs {
            any = true;
            match self.pair_score(metric, hyp, r) {
                Ok(s) => best = Some(best.map_or(s, |b| b.max(s))),
                Err(e) if is_unusable_pair(&e) => {
                    first_err.get_or_insert(e);
                }
                Err(e) => return Err(e),
            }
        }
        if !any {
            return Err(Error::InvalidArgument("reference set is empty".into()));
        }
        best.ok_or_else(|| first_err.expect("an error for every skipped reference"))
    }

    fn table(&self, metric: MetricId) -> Result<&'a EmbeddingTable<T>> {
        self.embeddings
            .ok_or_else(|| Error::InvalidArgument(format!("metric '{metric}' requires word embeddings")))
    }
}

/// Errors that mean "this pair has no score" rather than "the run is misconfigured".
pub fn is_unusable_pair(e: &Error) -> bool {
    matches!(e, Error::AllOutOfVocabulary(_) | Error::MissingSentenceEmbedding(_))
}
