//! Numerical rank by relative singular-value thresholding.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub const DEFAULT_RANK_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankInfo {
    pub rank: usize,
    /// Singular values in descending order.
    pub singular_values: Vec<f64>,
}

impl RankInfo {
    /// σ_k / σ₁ for one-based k, or 0 when σ₁ = 0 or k is out of range.
    pub fn relative_singular_value(&self, k: usize) -> f64 {
        match (self.singular_values.first(), k.checked_sub(1).and_then(|i| self.singular_values.get(i))) {
            (Some(&s1), Some(&sk)) if s1 > 0.0 => sk / s1,
            _ => 0.0,
        }
    }
}

/// rank = #{σᵢ > τ·σ₁}; a zero matrix has rank 0.
pub fn numerical_rank(matrix: &DMatrix<f64>, threshold: f64) -> RankInfo {
    numerical_rank_with_floor(matrix, threshold, 0.0)
}

/// rank = #{σᵢ > max(τ·σ₁, floor)}. The absolute floor discards singular
/// values at the noise level of an approximate stationary point.
pub fn numerical_rank_with_floor(matrix: &DMatrix<f64>, threshold: f64, floor: f64) -> RankInfo {
    if matrix.is_empty() {
        return RankInfo {
            rank: 0,
            singular_values: Vec::new(),
        };
    }
    let mut singular_values: Vec<f64> = matrix.singular_values().iter().copied().collect();
    singular_values.sort_by(|a, b| b.total_cmp(a));
    let s1 = singular_values[0];
    let cut = (threshold * s1).max(floor);
    let rank = if s1 > 0.0 {
        singular_values.iter().filter(|&&s| s > cut).count()
    } else {
        0
    };
    RankInfo {
        rank,
        singular_values,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_has_rank_zero() {
        assert_eq!(numerical_rank(&DMatrix::zeros(2, 1), 1e-8).rank, 0);
    }

    #[test]
    fn example1_jacobian_at_e1_rank_two() {
        let j = DMatrix::from_row_slice(3, 3, &[0.0, 0.0, 0.0, 2.0, -2.0, 0.0, 2.0, 0.0, -2.0]);
        let r = numerical_rank(&j, 1e-8);
        assert_eq!(r.rank, 2);
        assert!(r.singular_values.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn threshold_is_relative() {
        let j = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1e6, 1e-1, 1e-12]));
        assert_eq!(numerical_rank(&j, 1e-8).rank, 2);
        assert_eq!(numerical_rank(&(j * 1e-9), 1e-8).rank, 2);
    }

    #[test]
    fn floor_discards_noise() {
        let g = DMatrix::from_row_slice(1, 3, &[1e-12, -2e-12, 0.0]);
        assert_eq!(numerical_rank(&g, 1e-8).rank, 1);
        assert_eq!(numerical_rank_with_floor(&g, 1e-8, 1e-9).rank, 0);
    }

    #[test]
    fn wide_and_tall() {
        let tall = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        assert_eq!(numerical_rank(&tall, 1e-8).rank, 1);
        let wide = DMatrix::from_row_slice(1, 3, &[0.0, 3.0, 4.0]);
        let r = numerical_rank(&wide, 1e-8);
        assert_eq!(r.rank, 1);
        assert!((r.singular_values[0] - 5.0).abs() < 1e-12);
    }
}
