// SPDX-License-Identifier: Apache-2.0

//! Flat-kernel mean shift on the real line.

const TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 500;

/// Clusters `values` and returns one cluster id per input, numbered by
/// ascending cluster position.
///
/// Every distinct value seeds a mode search: the window mean of all values
/// within `bandwidth` is iterated until it moves less than 1e-9 (or 500
/// steps). Modes closer than `bandwidth / 2` are merged. A cluster never
/// spans more than `2 * bandwidth`; wider ones are split at the first value
/// that would exceed it.
pub fn cluster_1d(values: &[f64], bandwidth: f64) -> Vec<usize> {
    assert!(bandwidth > 0.0, "bandwidth must be positive");
    if values.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let sorted: Vec<f64> = order.iter().map(|&i| values[i]).collect();
    let mut prefix = Vec::with_capacity(sorted.len() + 1);
    prefix.push(0.0);
    for &x in &sorted {
        prefix.push(prefix.last().unwrap() + x);
    }
    let window_mean = |m: f64| -> f64 {
        let lo = sorted.partition_point(|&x| x < m - bandwidth);
        let hi = sorted.partition_point(|&x| x <= m + bandwidth);
        if hi <= lo {
            return m;
        }
        (prefix[hi] - prefix[lo]) / (hi - lo) as f64
    };

    // Mode reached from each sorted position; equal values share a seed.
    let mut modes = vec![0.0; sorted.len()];
    let mut i = 0;
    while i < sorted.len() {
        let mut m = sorted[i];
        for _ in 0..MAX_ITERATIONS {
            let next = window_mean(m);
            let step = (next - m).abs();
            m = next;
            if step < TOLERANCE {
                break;
            }
        }
        let mut j = i;
        while j < sorted.len() && sorted[j] == sorted[i] {
            modes[j] = m;
            j += 1;
        }
        i = j;
    }

    // The window-mean map is monotone, so modes are non-decreasing along the
    // sorted values and every cluster is a contiguous run.
    let mut ids_sorted = vec![0usize; sorted.len()];
    let mut cluster = 0usize;
    let mut span_start = sorted[0];
    for k in 1..sorted.len() {
        let new_mode = modes[k] - modes[k - 1] >= bandwidth / 2.0;
        let too_wide = sorted[k] - span_start > 2.0 * bandwidth;
        if new_mode || too_wide {
            cluster += 1;
            span_start = sorted[k];
        }
        ids_sorted[k] = cluster;
    }
    let mut out = vec![0usize; values.len()];
    for (pos, &orig) in order.iter().enumerate() {
        out[orig] = ids_sorted[pos];
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_close_one_far() {
        assert_eq!(cluster_1d(&[0.10, 0.101, 0.50], 0.01), vec![0, 0, 1]);
    }

    #[test]
    fn identical_values_form_one_cluster() {
        assert_eq!(cluster_1d(&[0.3; 5], 0.001), vec![0; 5]);
    }

    #[test]
    fn far_apart_values_split() {
        let h = 0.01;
        let c = cluster_1d(&[0.2, 0.2 + 10.0 * h], h);
        assert_ne!(c[0], c[1]);
    }

    #[test]
    fn order_of_input_does_not_matter() {
        let a = cluster_1d(&[0.5, 0.1, 0.101], 0.01);
        assert_eq!(a, vec![1, 0, 0]);
    }

    #[test]
    fn long_dense_chain_is_split_by_span() {
        let values: Vec<f64> = (0..100).map(|i| i as f64 * 0.004).collect();
        let h = 0.01;
        let ids = cluster_1d(&values, h);
        for i in 0..values.len() {
            for j in 0..values.len() {
                if ids[i] == ids[j] {
                    assert!((values[i] - values[j]).abs() <= 2.0 * h + 1e-15);
                }
            }
        }
    }

    proptest! {
        #[test]
        fn clusters_never_span_more_than_twice_bandwidth(
            values in proptest::collection::vec(0.0f64..1.0, 1..60),
            h in 0.001f64..0.2,
        ) {
            let ids = cluster_1d(&values, h);
            for i in 0..values.len() {
                for j in 0..values.len() {
                    if ids[i] == ids[j] {
                        prop_assert!((values[i] - values[j]).abs() <= 2.0 * h);
                    }
                }
            }
        }

        #[test]
        fn clusters_are_contiguous_and_deterministic(
            values in proptest::collection::vec(0.0f64..1.0, 1..60),
            h in 0.001f64..0.2,
        ) {
            let ids = cluster_1d(&values, h);
            prop_assert_eq!(&ids, &cluster_1d(&values, h));
            let mut pairs: Vec<(f64, usize)> = values.iter().copied().zip(ids).collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            for w in pairs.windows(2) {
                prop_assert!(w[0].1 <= w[1].1);
            }
        }
    }
}
