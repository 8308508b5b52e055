//! Word-overlap similarity between a hypothesis and reference token sequences.

mod bleu;
mod lcs;
mod meteor;
mod rouge;
mod stem;

pub use bleu::{sentence_bleu, BleuParams};
pub use lcs::lcs_length;
pub use meteor::{meteor, meteor_alignment, MeteorAlignment, MeteorParams, MeteorStage};
pub use rouge::{rouge_l, RougeParams};
pub use stem::porter_stem;
