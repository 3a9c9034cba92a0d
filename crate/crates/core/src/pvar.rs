//! Exact `p`-variation of a finite scalar path.
//!
//! The variation of a sampled path is the supremum over all increasing
//! subsets of sample points of the sum of `p`-th powers of increments.
//! Over a finite grid the supremum is attained and computable by an
//! `O(n^2)` dynamic program: `best[j]` is the largest increment sum over
//! chains ending at point `j`, so
//! `best[j] = max_{i<j} (best[i] + |v_j - v_i|^p)`.
//! Appending points never hurts (increments are nonnegative), hence the
//! answer is `best[n-1]`.
//!
//! The dynamic program evaluates candidate chains with the same
//! left-to-right addition order a direct enumeration would use, so for
//! small `n` the two agree bit for bit.

use num_complex::Complex64;

/// Largest increment-power sum over all chains through `values`
/// (the `p`-th power of the variation seminorm).
pub fn variation_power_sum(values: &[Complex64], p: f64) -> f64 {
    debug_assert!(p >= 1.0);
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    let mut best = vec![0.0f64; n];
    for j in 1..n {
        let mut b = 0.0f64;
        for i in 0..j {
            let cand = best[i] + (values[j] - values[i]).norm().powf(p);
            if cand > b {
                b = cand;
            }
        }
        best[j] = b;
    }
    best[n - 1]
}

/// The `p`-variation seminorm itself (`p`-th root of the power sum).
pub fn variation(values: &[Complex64], p: f64) -> f64 {
    variation_power_sum(values, p).powf(1.0 / p)
}

/// Brute-force reference: enumerate every increasing chain of at least two
/// points and take the maximal increment-power sum. Exponential in the
/// path length; intended for cross-checking the dynamic program on short
/// paths.
pub fn variation_power_sum_enumerated(values: &[Complex64], p: f64) -> f64 {
    let n = values.len();
    if n < 2 {
        return 0.0;
    }
    assert!(n <= 20, "enumeration oracle limited to short paths");
    let mut bestsum = 0.0f64;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() < 2 {
            continue;
        }
        let mut sum = 0.0f64;
        let mut prev: Option<usize> = None;
        for j in 0..n {
            if mask & (1 << j) != 0 {
                if let Some(i) = prev {
                    sum += (values[j] - values[i]).norm().powf(p);
                }
                prev = Some(j);
            }
        }
        if sum > bestsum {
            bestsum = sum;
        }
    }
    bestsum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{CounterRng, StreamKey};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn trivial_paths_have_zero_variation() {
        assert_eq!(variation_power_sum(&[], 2.0), 0.0);
        assert_eq!(variation_power_sum(&[c(3.0, 1.0)], 2.0), 0.0);
        assert_eq!(variation_power_sum(&[c(1.0, 0.0); 5], 2.0), 0.0);
    }

    #[test]
    fn zigzag_beats_endpoints_for_square_variation() {
        // [0, 1, 0]: the full chain gives 1 + 1 = 2; endpoints give 0.
        let v = [c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)];
        assert_eq!(variation_power_sum(&v, 2.0), 2.0);
        assert!((variation(&v, 2.0) - 2.0_f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn monotone_real_path_has_total_variation_equal_to_range() {
        let v: Vec<_> = [0.0, 0.3, 0.9, 1.4, 2.0]
            .iter()
            .map(|&x| c(x, 0.0))
            .collect();
        assert!((variation(&v, 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn skipping_strictly_helps_when_p_is_large() {
        // With p=3 the single big jump beats the two small ones:
        // |2|^3 = 8 > 1 + 1.
        let v = [c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)];
        assert_eq!(variation_power_sum(&v, 3.0), 8.0);
    }

    #[test]
    fn dp_matches_enumeration_bit_for_bit() {
        let mut rng = CounterRng::new(StreamKey::from_seed(77));
        for case in 0..200 {
            let n = 2 + rng.index(11); // 2..=12 points
            let vals: Vec<Complex64> = (0..n)
                .map(|_| {
                    let (a, b) = rng.normal_pair();
                    c(a, b)
                })
                .collect();
            for p in [1.0, 2.0, 2.5, 3.0] {
                let dp = variation_power_sum(&vals, p);
                let brute = variation_power_sum_enumerated(&vals, p);
                assert_eq!(dp, brute, "case {case} n={n} p={p}");
            }
        }
    }

    #[test]
    fn variation_is_nonincreasing_in_p() {
        let mut rng = CounterRng::new(StreamKey::from_seed(78));
        for _ in 0..50 {
            let vals: Vec<Complex64> = (0..8)
                .map(|_| {
                    let (a, b) = rng.normal_pair();
                    c(a, b)
                })
                .collect();
            let v1 = variation(&vals, 1.0);
            let v2 = variation(&vals, 2.0);
            let v3 = variation(&vals, 3.0);
            assert!(v1 >= v2 - 1e-12);
            assert!(v2 >= v3 - 1e-12);
        }
    }
}
