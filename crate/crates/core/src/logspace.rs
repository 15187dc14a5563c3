//! Log-domain accumulation helpers.
//!
//! Mixture weights and grid messages routinely span hundreds of orders of
//! magnitude, so sums of probabilities are always formed through these
//! functions rather than in linear domain.

/// Computes `ln(exp(a) + exp(b))` without intermediate overflow.
///
/// `NEG_INFINITY` inputs behave as exact zeros.
#[inline]
pub fn log_sum_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY && b == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if a >= b {
        a + (b - a).exp().ln_1p()
    } else {
        b + (a - b).exp().ln_1p()
    }
}

/// Computes `ln(Σ exp(xs[i]))` with a max shift.
///
/// Returns `NEG_INFINITY` for an empty slice or a slice of `NEG_INFINITY`s.
pub fn log_sum_exp_slice(xs: &[f64]) -> f64 {
    let mx = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = xs.iter().map(|&x| (x - mx).exp()).sum();
    mx + sum.ln()
}

/// Numerically stable `ln(1 + exp(x))`.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_naive_in_safe_range() {
        let cases: [(f64, f64); 4] = [(0.5, 2.0), (12.0, 5.0), (-3.0, -3.0), (0.0, 0.0)];
        for &(a, b) in &cases {
            let naive = (a.exp() + b.exp()).ln();
            assert!((log_sum_exp(a, b) - naive).abs() < 1e-14);
        }
    }

    #[test]
    fn pairwise_survives_large_magnitudes() {
        // naive evaluation overflows (or underflows) here
        let r = log_sum_exp(1234.0, 1232.0);
        let expected = 1234.0 + (-2.0_f64).exp().ln_1p();
        assert!((r - expected).abs() < 1e-12);
        let r = log_sum_exp(-1234.0, -1232.0);
        let expected = -1232.0 + (-2.0_f64).exp().ln_1p();
        assert!((r - expected).abs() < 1e-12);
    }

    #[test]
    fn neg_infinity_is_additive_zero() {
        assert_eq!(log_sum_exp(f64::NEG_INFINITY, 2.0), 2.0);
        assert_eq!(log_sum_exp(2.0, f64::NEG_INFINITY), 2.0);
        assert_eq!(
            log_sum_exp(f64::NEG_INFINITY, f64::NEG_INFINITY),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn slice_spanning_300_orders_of_magnitude() {
        // weights e^0, e^-300, e^-600 ... the big one dominates
        let xs = [0.0, -300.0_f64 * std::f64::consts::LN_10, -600.0 * std::f64::consts::LN_10];
        let r = log_sum_exp_slice(&xs);
        assert!(r.is_finite());
        assert!((r - (1.0 + 1e-300_f64).ln()).abs() < 1e-15);
    }

    #[test]
    fn slice_empty_and_degenerate() {
        assert_eq!(log_sum_exp_slice(&[]), f64::NEG_INFINITY);
        assert_eq!(
            log_sum_exp_slice(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            f64::NEG_INFINITY
        );
    }

    #[test]
    fn softplus_limits() {
        assert!((softplus(0.0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((softplus(800.0) - 800.0).abs() < 1e-12);
        assert!(softplus(-800.0).abs() < 1e-300);
        assert_eq!(softplus(f64::NEG_INFINITY), 0.0);
    }
}
