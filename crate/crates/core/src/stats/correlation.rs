use serde::Serialize;

use super::dist::student_t_two_sided;
use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CorrelationResult<T> {
    pub coefficient: T,
    /// Two-sided.
    pub p_value: T,
    pub n: usize,
}

/// Ranks 1..n, tied values sharing the mean of the ranks they cover.
pub fn fractional_ranks<T: Scalar>(values: &[T]) -> Vec<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(std::cmp::Ordering::Equal));
    let mut ranks = vec![T::zero(); values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start..end hold ranks start+1..=end.
        let rank = T::of_usize(start + 1 + end) / T::of_f64(2.0);
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn check_inputs<T: Scalar>(x: &[T], y: &[T]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument(format!(
            "correlation inputs differ in length ({} vs {})",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 3 {
        return Err(Error::Undefined(format!(
            "correlation needs at least 3 samples, got {}",
            x.len()
        )));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("correlation inputs must be finite".into()));
    }
    Ok(())
}

fn sample_r<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    let n = T::of_usize(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let (mut sxy, mut sxx, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy = sxy + dx * dy;
        sxx = sxx + dx * dx;
        syy = syy + dy * dy;
    }
    if sxx == T::zero() || syy == T::zero() {
        return Err(Error::Undefined("correlation undefined for a constant sequence".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).max(-T::one()).min(T::one()))
}

/// Two-sided p-value of `r` from `t = r √((n − 2) / (1 − r²))` with n − 2 degrees of freedom.
pub fn correlation_p_value<T: Scalar>(r: T, n: usize) -> T {
    if r.abs() >= T::one() {
        return T::zero();
    }
    let dof = T::of_usize(n - 2);
    let t = r * (dof / (T::one() - r * r)).sqrt();
    student_t_two_sided(t, dof)
}

pub fn pearson<T: Scalar>(x: &[T], y: &[T]) -> Result<CorrelationResult<T>> {
    check_inputs(x, y)?;
    let r = sample_r(x, y)?;
    Ok(CorrelationResult {
        coefficient: r,
        p_value: correlation_p_value(r, x.len()),
        n: x.len(),
    })
}

/// Pearson correlation of the fractional ranks.
pub fn spearman<T: Scalar>(x: &[T], y: &[T]) -> Result<CorrelationResult<T>> {
    check_inputs(x, y)?;
    pearson(&fractional_ranks(x), &fractional_ranks(y))
}

/// Spearman with a two-sided p-value from the exact permutation distribution of ρ.
/// Limited to n ≤ 10.
pub fn spearman_exact<T: Scalar>(x: &[T], y: &[T]) -> Result<CorrelationResult<T>> {
    let base = spearman(x, y)?;
    let n = x.len();
    if n > 10 {
        return Err(Error::InvalidArgument(format!(
            "exact Spearman test limited to n <= 10, got {n}"
        )));
    }
    let rx = fractional_ranks(x);
    let mut ry = fractional_ranks(y);
    let observed = base.coefficient.abs();
    let slack = T::of_f64(1e-12);
    let (mut hits, mut total) = (0u64, 0u64);
    for_each_permutation(&mut ry, |perm| {
        total += 1;
        // Constant rank vectors were rejected above, so every permutation has a defined r.
        if let Ok(r) = sample_r(&rx, perm) {
            if r.abs() >= observed - slack {
                hits += 1;
            }
        }
    });
    Ok(CorrelationResult {
        p_value: T::of_f64(hits as f64 / total as f64),
        ..base
    })
}

/// Heap's algorithm; visits every ordering of `items` once.
fn for_each_permutation<T, F: FnMut(&[T])>(items: &mut [T], mut visit: F) {
    let n = items.len();
    let mut c = vec![0usize; n];
    visit(items);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                items.swap(0, i);
            } else {
                items.swap(c[i], i);
            }
            visit(items);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}
