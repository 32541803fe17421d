//! Small order statistics used to summarize ensembles and sweeps.

use statrs::distribution::{Binomial, DiscreteCDF};

/// Inverse-ECDF quantile: the smallest sample `x` with `F(x) ≥ q`.
/// Returns `None` for an empty slice.
pub fn quantile(values: &[f64], q: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let idx = ((q.clamp(0.0, 1.0) * v.len() as f64).ceil() as usize).clamp(1, v.len()) - 1;
    Some(v[idx])
}

pub fn median(values: &[f64]) -> Option<f64> {
    quantile(values, 0.5)
}

/// Median of right-censored samples (`None` = still running at the end).
/// Censored values sort above every observed one, so the median exists
/// whenever at most half of the samples are censored.
pub fn median_censored(values: &[Option<f64>]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut observed: Vec<f64> = values.iter().flatten().copied().collect();
    observed.sort_by(f64::total_cmp);
    let idx = (values.len() as f64 * 0.5).ceil() as usize - 1;
    observed.get(idx).copied()
}

/// Two-sided exact sign test on paired differences. Zeros are dropped.
/// Returns `(positives, negatives, p_value)`.
pub fn sign_test(diffs: &[f64]) -> (usize, usize, f64) {
    let pos = diffs.iter().filter(|d| **d > 0.0).count();
    let neg = diffs.iter().filter(|d| **d < 0.0).count();
    let n = (pos + neg) as u64;
    if n == 0 {
        return (0, 0, 1.0);
    }
    let b = Binomial::new(0.5, n).expect("valid binomial");
    let k = pos.min(neg) as u64;
    (pos, neg, (2.0 * b.cdf(k)).min(1.0))
}

/// One-sided exact sign test for `diffs` being predominantly positive.
pub fn sign_test_greater(diffs: &[f64]) -> f64 {
    let pos = diffs.iter().filter(|d| **d > 0.0).count() as u64;
    let neg = diffs.iter().filter(|d| **d < 0.0).count() as u64;
    let n = pos + neg;
    if n == 0 {
        return 1.0;
    }
    let b = Binomial::new(0.5, n).expect("valid binomial");
    // P(X >= pos)
    if pos == 0 { 1.0 } else { 1.0 - b.cdf(pos - 1) }
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}

/// Mean and standard error of the mean.
pub fn mean_sem(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    if values.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quantiles() {
        let v = [5.0, 1.0, 4.0, 2.0, 3.0];
        assert_eq!(median(&v), Some(3.0));
        assert_eq!(median(&[1.0, 2.0, 3.0, 4.0]), Some(2.0));
        assert_eq!(quantile(&v, 0.0), Some(1.0));
        assert_eq!(quantile(&v, 1.0), Some(5.0));
        assert_eq!(median(&[]), None);
    }

    #[test]
    fn censored_median() {
        assert_eq!(median_censored(&[Some(2.0), None, Some(1.0)]), Some(2.0));
        assert_eq!(median_censored(&[Some(2.0), None, None]), None);
        assert_eq!(median_censored(&[Some(2.0), None]), Some(2.0));
        assert_eq!(median_censored(&[Some(7.0)]), Some(7.0));
    }

    #[test]
    fn sign_tests() {
        let all_pos = [1.0; 10];
        let (p, n, pv) = sign_test(&all_pos);
        assert_eq!((p, n), (10, 0));
        assert!((pv - 2.0 / 1024.0).abs() < 1e-12);
        assert!((sign_test_greater(&all_pos) - 1.0 / 1024.0).abs() < 1e-12);
        assert_eq!(sign_test(&[0.0, 0.0]).2, 1.0);
        let mixed = [1.0, -1.0, 1.0, -1.0];
        assert!(sign_test(&mixed).2 > 0.99);
    }

    #[test]
    fn spearman_basics() {
        let x = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(spearman(&x, &[10.0, 20.0, 30.0, 40.0]), Some(1.0));
        assert_eq!(spearman(&x, &[4.0, 3.0, 2.0, 1.0]), Some(-1.0));
        assert_eq!(spearman(&x, &[1.0, 1.0, 1.0, 1.0]), None);
        // ties get average ranks
        let r = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((r - 0.9486832980505138).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn spearman_is_invariant_under_monotone_maps(v in prop::collection::vec(-1e3f64..1e3, 3..30)) {
            let y: Vec<f64> = v.iter().map(|a| a.powi(3) + 2.0 * a).collect();
            if let Some(r) = spearman(&v, &y) {
                prop_assert!((r - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn median_lies_between_extremes(v in prop::collection::vec(-1e6f64..1e6, 1..50)) {
            let m = median(&v).unwrap();
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= m && m <= hi);
        }
    }
}
