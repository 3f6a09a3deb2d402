//! Normalized mutual information between two labelings.

use alloc::collections::BTreeMap;

use crate::math;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("labelings have different lengths: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("labelings are empty")]
    Empty,
}

/// Normalized mutual information: mutual information (natural log) divided
/// by the arithmetic mean of the two label entropies, clamped to `[0, 1]`.
///
/// Label values are arbitrary ids — only the induced partitions matter. If
/// both partitions are a single cluster they are identical, and the score
/// is 1; if exactly one is, the mutual information (hence the score) is 0.
pub fn nmi(a: &[u32], b: &[u32]) -> Result<f64, MetricError> {
    if a.len() != b.len() {
        return Err(MetricError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(MetricError::Empty);
    }
    let n = a.len() as f64;

    let mut joint: BTreeMap<(u32, u32), u64> = BTreeMap::new();
    let mut count_a: BTreeMap<u32, u64> = BTreeMap::new();
    let mut count_b: BTreeMap<u32, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b.iter()) {
        *joint.entry((x, y)).or_insert(0) += 1;
        *count_a.entry(x).or_insert(0) += 1;
        *count_b.entry(y).or_insert(0) += 1;
    }

    let entropy = |counts: &BTreeMap<u32, u64>| -> f64 {
        counts
            .values()
            .map(|&c| {
                let p = c as f64 / n;
                -p * math::ln(p)
            })
            .sum()
    };
    let h_a = entropy(&count_a);
    let h_b = entropy(&count_b);
    if h_a == 0.0 && h_b == 0.0 {
        return Ok(1.0);
    }

    let mut mi = 0.0;
    for (&(x, y), &c) in &joint {
        let p_xy = c as f64 / n;
        let p_x = count_a[&x] as f64 / n;
        let p_y = count_b[&y] as f64 / n;
        mi += p_xy * math::ln(p_xy / (p_x * p_y));
    }

    let denom = 0.5 * (h_a + h_b);
    Ok((mi / denom).clamp(0.0, 1.0))
}
