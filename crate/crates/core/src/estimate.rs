use crate::geometry::Ball;

/// Result of a density approximation.
///
/// For an `f`-approximation of a set whose true density is λ,
/// `⌈λ/f⌉ ≤ value ≤ λ`. The exact oracle reports `factor == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DensityEstimate {
    pub value: u32,
    pub factor: u32,
    /// A ball meeting exactly `value` admissible segments.
    pub witness: Option<Ball>,
    /// The segment whose cover produced the witness.
    pub witness_segment_id: Option<u32>,
}

impl DensityEstimate {
    pub const fn empty(factor: u32) -> Self {
        DensityEstimate {
            value: 0,
            factor,
            witness: None,
            witness_segment_id: None,
        }
    }

    /// Smallest density compatible with this estimate's guarantee.
    pub fn lower_bound_for(lambda: u32, factor: u32) -> u32 {
        lambda.div_ceil(factor)
    }

    /// Whether `value` satisfies the factor sandwich for true density `lambda`.
    pub fn within_sandwich(&self, lambda: u32) -> bool {
        Self::lower_bound_for(lambda, self.factor) <= self.value && self.value <= lambda
    }
}
