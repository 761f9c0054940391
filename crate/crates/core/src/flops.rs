//! Analytic floating-point operation counts for one prediction.
//!
//! Per-prediction costs, with `n` active features and latent size `k`:
//!
//! ```text
//! linear terms           2 per feature (multiply + accumulate)
//! interaction pairs      n(n-1)/2 pairs, each 2k + 2:
//!                          k multiplies + (k-1) adds for the dot product,
//!                          2 multiplies for the x_a * x_b scaling,
//!                          1 accumulate
//! sigmoid                4
//! ```

/// FLOPs of one field-aware FM prediction.
pub fn count_flops(n_active: u64, k: u64) -> u64 {
    let pairs = n_active * n_active.saturating_sub(1) / 2;
    2 * n_active + pairs * (2 * k + 2) + 4
}

/// FLOPs of a linear-only (logistic regression) prediction.
pub fn count_flops_linear(n_active: u64) -> u64 {
    2 * n_active + 4
}

/// Signed percentage change of `variant` relative to `baseline`.
///
/// Returns `None` when the baseline is zero.
pub fn flops_change(variant: f64, baseline: f64) -> Option<f64> {
    if baseline > 0.0 {
        Some(100.0 * (variant - baseline) / baseline)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_feature_has_no_pairs() {
        for k in 1..10 {
            assert_eq!(count_flops(1, k), 6);
        }
    }

    #[test]
    fn three_features_k4() {
        assert_eq!(count_flops(3, 4), 40);
    }

    #[test]
    fn ten_versus_seven_features() {
        assert_eq!(count_flops(10, 4), 474);
        assert_eq!(count_flops(7, 4), 228);
        assert_eq!(count_flops(11, 4), 576);
        let replace = flops_change(228.0, 474.0).unwrap();
        assert!((replace - (-51.898734)).abs() < 1e-5, "{replace}");
        let add = flops_change(576.0, 474.0).unwrap();
        assert!((add - 21.518987).abs() < 1e-5, "{add}");
        assert_eq!(flops_change(474.0, 474.0), Some(0.0));
        assert_eq!(flops_change(1.0, 0.0), None);
    }

    #[test]
    fn monotone_in_features_and_latent_size() {
        for k in 1..8 {
            for n in 1..40 {
                assert!(count_flops(n + 1, k) > count_flops(n, k));
            }
        }
        for n in 2..40 {
            for k in 1..16 {
                assert!(count_flops(n, k + 1) > count_flops(n, k));
            }
        }
    }
}
