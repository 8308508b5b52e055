use serde::{Deserialize, Serialize};

use super::lcs::lcs_length;
use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RougeParams<T> {
    /// Recall weight of the F-measure.
    pub beta: T,
}

impl<T: Scalar> Default for RougeParams<T> {
    fn default() -> Self {
        RougeParams { beta: T::of_f64(1.2) }
    }
}

impl<T: Scalar> RougeParams<T> {
    pub fn validate(&self) -> Result<()> {
        if !self.beta.is_finite() || self.beta <= T::zero() {
            return Err(Error::InvalidArgument(format!(
                "ROUGE-L beta must be positive, got {}",
                self.beta
            )));
        }
        Ok(())
    }
}

/// ROUGE-L F-measure `(1 + β²)PR / (R + β²P)` over the LCS of the two sequences.
pub fn rouge_l<T: Scalar>(hyp: &[String], reference: &[String], params: &RougeParams<T>) -> Result<T> {
    params.validate()?;
    if hyp.is_empty() || reference.is_empty() {
        return Err(Error::InvalidArgument(
            "ROUGE-L needs non-empty hypothesis and reference".into(),
        ));
    }
    let lcs = lcs_length(hyp, reference);
    if lcs == 0 {
        return Ok(T::zero());
    }
    let lcs = T::of_usize(lcs);
    let precision = lcs / T::of_usize(hyp.len());
    let recall = lcs / T::of_usize(reference.len());
    let beta2 = params.beta * params.beta;
    Ok((T::one() + beta2) * precision * recall / (recall + beta2 * precision))
}
