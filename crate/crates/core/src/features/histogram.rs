use crate::error::{Error, Result};

/// Bins `values` uniformly over `[lo, hi]` and returns bin probabilities.
/// A value equal to `hi` lands in the last bin; values outside the range are
/// clamped into the first or last bin.
pub fn normalized_histogram<I>(values: I, bins: usize, lo: f64, hi: f64) -> Result<Vec<f64>>
where
    I: IntoIterator<Item = f64>,
{
    if bins == 0 {
        return Err(Error::params("histogram needs at least one bin"));
    }
    if !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(Error::params(format!(
            "histogram range [{lo}, {hi}] is empty"
        )));
    }
    let mut counts = vec![0u64; bins];
    let scale = bins as f64 / (hi - lo);
    let mut n = 0u64;
    for v in values {
        counts[bin_index(v, lo, scale, bins)] += 1;
        n += 1;
    }
    if n == 0 {
        return Err(Error::EmptyInput("histogram values"));
    }
    Ok(probabilities(&counts, n))
}

#[inline]
pub(crate) fn bin_index(v: f64, lo: f64, scale: f64, bins: usize) -> usize {
    let b = ((v - lo) * scale).floor();
    if b <= 0.0 {
        0
    } else {
        (b as usize).min(bins - 1)
    }
}

pub(crate) fn probabilities(counts: &[u64], total: u64) -> Vec<f64> {
    let n = total as f64;
    counts.iter().map(|&c| c as f64 / n).collect()
}

/// Sum of squared bin probabilities.
pub fn hist_energy(h: &[f64]) -> f64 {
    h.iter().map(|p| p * p).sum()
}

/// Shannon entropy in bits.
pub fn hist_entropy(h: &[f64]) -> f64 {
    let e: f64 = h.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
    // -0.0 for a one-hot histogram
    e.max(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_values_one_hot() {
        let h = normalized_histogram([3.0; 10], 8, 0.0, 256.0).unwrap();
        assert_eq!(h.iter().filter(|&&p| p == 1.0).count(), 1);
        assert_eq!(hist_energy(&h), 1.0);
        assert_eq!(hist_entropy(&h), 0.0);
    }

    #[test]
    fn uniform_fill() {
        let values = (0..256).map(|v| v as f64);
        let h = normalized_histogram(values, 8, 0.0, 256.0).unwrap();
        assert!(h.iter().all(|&p| p == 0.125));
        assert_eq!(hist_energy(&h), 0.125);
        assert_eq!(hist_entropy(&h), 3.0);
    }

    #[test]
    fn extremes_of_lbp_range() {
        let h = normalized_histogram([0.0, 255.0, 0.0, 255.0], 8, 0.0, 256.0).unwrap();
        assert_eq!(h, vec![0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.5]);
    }

    #[test]
    fn upper_edge_in_last_bin() {
        let h = normalized_histogram([1.0], 4, 0.0, 1.0).unwrap();
        assert_eq!(h, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn two_bin_half_half() {
        let h = [0.5, 0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0];
        assert_eq!(hist_energy(&h), 0.5);
        assert_eq!(hist_entropy(&h), 1.0);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            normalized_histogram(std::iter::empty(), 8, 0.0, 1.0),
            Err(Error::EmptyInput(_))
        ));
        assert!(normalized_histogram([1.0], 8, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn sums_to_one_and_bounded(values in prop::collection::vec(-10.0f64..300.0, 1..400), bins in 2usize..32) {
            let h = normalized_histogram(values, bins, 0.0, 256.0).unwrap();
            let sum: f64 = h.iter().sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
            let e = hist_energy(&h);
            let s = hist_entropy(&h);
            prop_assert!(e >= 1.0 / bins as f64 - 1e-12 && e <= 1.0 + 1e-12);
            prop_assert!(s >= 0.0 && s <= (bins as f64).log2() + 1e-12);
        }
    }
}
