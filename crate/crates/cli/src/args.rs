use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use multiref_eval::corpus::{RatingKind, TokenizerMode};
use multiref_eval::evaluation::{DistinctDenominator, MetricId, ScoringMode};
use multiref_eval::stats::{AblationPolicy, KappaWeights};

#[derive(Debug, Parser)]
#[command(
    name = "multiref",
    version,
    about = "Multi-reference evaluation of dialogue responses"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check input files without scoring anything.
    Validate(ValidateArgs),
    /// Score hypotheses against the original or all references.
    Score(ScoreArgs),
    /// Recall diversity against the references plus Distinct-n and Self-BLEU.
    Diversity(DiversityArgs),
    /// Correlate metric scores with human ratings.
    Correlate(CorrelateArgs),
    /// Correlation as a function of the number of references.
    Ablate(AblateArgs),
    /// Inter-rater agreement and rater filtering.
    Kappa(KappaArgs),
    /// Unique n-gram statistics and Gt-BLEU of a multi-reference dataset.
    Stats(StatsArgs),
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub hyps: Option<PathBuf>,
    #[arg(long)]
    pub ratings: Option<PathBuf>,
    #[arg(long, default_value = "pretokenized", value_parser = parse_tokenizer)]
    pub tokenizer: TokenizerMode,
}

#[derive(Debug, Args)]
pub struct CorpusInputs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub hyps: PathBuf,
    #[arg(long, default_value = "pretokenized", value_parser = parse_tokenizer)]
    pub tokenizer: TokenizerMode,
}

#[derive(Debug, Args)]
pub struct MetricArgs {
    /// Comma-separated: bleu1..bleu4, meteor, rouge_l, emb_average, vector_extrema,
    /// greedy_matching, sent_embedding.
    #[arg(long, value_delimiter = ',', required = true, value_parser = parse_metric)]
    pub metrics: Vec<MetricId>,
    #[arg(long, default_value_t = 0.1)]
    pub bleu_epsilon: f64,
    /// Highest order reported for Self-BLEU and Gt-BLEU.
    #[arg(long, default_value_t = 4)]
    pub bleu_max_n: usize,
    #[arg(long, default_value_t = 0.9)]
    pub meteor_alpha: f64,
    #[arg(long, default_value_t = 3.0)]
    pub meteor_beta: f64,
    #[arg(long, default_value_t = 0.5)]
    pub meteor_gamma: f64,
    #[arg(long, default_value_t = 1.2)]
    pub rouge_beta: f64,
    /// Word vectors in word2vec text format.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Sentence vectors, JSONL {"text", "vector"}.
    #[arg(long)]
    pub sentence_embeddings: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// JSON report path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RaterFilterArgs {
    #[arg(long, default_value_t = 0.2)]
    pub kappa_threshold: f64,
    #[arg(long, default_value = "quadratic", value_parser = parse_weights)]
    pub kappa_weights: KappaWeights,
    /// Use every rater instead of filtering by agreement.
    #[arg(long)]
    pub no_rater_filter: bool,
}

#[derive(Debug, Args)]
pub struct ScoreArgs {
    #[command(flatten)]
    pub inputs: CorpusInputs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long, default_value = "multi", value_parser = parse_mode)]
    pub mode: ScoringMode,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct DiversityArgs {
    #[command(flatten)]
    pub inputs: CorpusInputs,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long, default_value = "multi", value_parser = parse_mode)]
    pub mode: ScoringMode,
    #[arg(long, default_value = "ngrams", value_parser = parse_denominator)]
    pub distinct_denominator: DistinctDenominator,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    Utterance,
    System,
}

#[derive(Debug, Args)]
pub struct CorrelateArgs {
    #[command(flatten)]
    pub inputs: CorpusInputs,
    #[arg(long)]
    pub ratings: PathBuf,
    #[command(flatten)]
    pub metrics: MetricArgs,
    #[arg(long, value_enum, default_value = "utterance")]
    pub level: Level,
    #[arg(long, default_value = "appropriateness", value_parser = parse_kind)]
    pub kind: RatingKind,
    #[command(flatten)]
    pub filter: RaterFilterArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub inputs: CorpusInputs,
    #[arg(long)]
    pub ratings: PathBuf,
    #[command(flatten)]
    pub metrics: MetricArgs,
    /// Comma-separated reference counts; defaults to 1..=smallest reference set.
    #[arg(long, value_delimiter = ',')]
    pub k_values: Vec<usize>,
    #[arg(long, default_value = "original_first", value_parser = parse_policy)]
    pub policy: AblationPolicy,
    #[arg(long, default_value_t = 10)]
    pub resamples: usize,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    #[command(flatten)]
    pub filter: RaterFilterArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct KappaArgs {
    #[arg(long)]
    pub ratings: PathBuf,
    #[arg(long, default_value = "appropriateness", value_parser = parse_kind)]
    pub kind: RatingKind,
    #[arg(long, default_value_t = 0.2)]
    pub threshold: f64,
    #[arg(long, default_value = "quadratic", value_parser = parse_weights)]
    pub weights: KappaWeights,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct StatsArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value = "pretokenized", value_parser = parse_tokenizer)]
    pub tokenizer: TokenizerMode,
    #[arg(long, default_value_t = 0.1)]
    pub bleu_epsilon: f64,
    #[arg(long, default_value_t = 4)]
    pub bleu_max_n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

fn parse_metric(s: &str) -> Result<MetricId, String> {
    s.parse()
}

fn parse_tokenizer(s: &str) -> Result<TokenizerMode, String> {
    s.parse()
}

fn parse_mode(s: &str) -> Result<ScoringMode, String> {
    s.parse()
}

fn parse_denominator(s: &str) -> Result<DistinctDenominator, String> {
    s.parse()
}

fn parse_kind(s: &str) -> Result<RatingKind, String> {
    s.parse()
}

fn parse_weights(s: &str) -> Result<KappaWeights, String> {
    s.parse()
}

fn parse_policy(s: &str) -> Result<AblationPolicy, String> {
    s.parse()
}
