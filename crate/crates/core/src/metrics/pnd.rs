use serde::{Deserialize, Serialize};

use super::{check_same_len, sq_dist};
use crate::error::{Error, Result};
use crate::series::znormalize_values;

/// Smallest segment length for which a standard deviation is meaningful.
pub const DEFAULT_MIN_SEGMENT: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitResult {
    pub distance: f64,
    /// Last index of the left segment.
    pub split_index: usize,
}

fn segment_ssd(a: &[f64], b: &[f64]) -> f64 {
    sq_dist(&znormalize_values(a), &znormalize_values(b))
}

/// Piecewise normalized distance: both series are cut at the same index,
/// each side is z-normalized on its own, and the split minimizing
/// `sqrt(ssd_left + ssd_right)` is returned (ties to the smallest index).
pub fn pnd(a: &[f64], b: &[f64], min_seg: usize) -> Result<SplitResult> {
    check_same_len(a, b)?;
    let len = a.len();
    if min_seg < 2 {
        return Err(Error::invalid(format!(
            "minimum segment length must be at least 2, got {min_seg}"
        )));
    }
    if len < 2 * min_seg {
        return Err(Error::TooShort {
            needed: 2 * min_seg,
            got: len,
        });
    }
    let mut best = SplitResult {
        distance: f64::INFINITY,
        split_index: min_seg - 1,
    };
    for split in (min_seg - 1)..=(len - min_seg - 1) {
        let cut = split + 1;
        let d = (segment_ssd(&a[..cut], &b[..cut]) + segment_ssd(&a[cut..], &b[cut..])).sqrt();
        if d < best.distance {
            best = SplitResult {
                distance: d,
                split_index: split,
            };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::znorm_euclidean;

    fn wave(len: usize) -> Vec<f64> {
        (0..len)
            .map(|i| (i as f64 * 0.7).sin() + 0.4 * (i as f64 * 1.9).cos())
            .collect()
    }

    #[test]
    fn identical_is_zero() {
        let s = wave(20);
        assert_eq!(pnd(&s, &s, 2).unwrap().distance, 0.0);
    }

    #[test]
    fn level_shift_is_removed_at_true_split() {
        let a = wave(24);
        let mut b = a.clone();
        b[12..].iter_mut().for_each(|x| *x += 5.0);
        let r = pnd(&a, &b, 3).unwrap();
        assert_eq!(r.split_index, 11);
        assert!(r.distance < 1e-9);
    }

    #[test]
    fn reduces_to_ed_with_matching_piecewise_moments() {
        // Each half of each series is a permutation of the same values, so
        // per-half mean and std coincide with the whole-series moments.
        let base = [1.0, -1.0, 2.0, -2.0, 0.5, -0.5];
        let perm = [-0.5, 2.0, 1.0, -2.0, -1.0, 0.5];
        let a: Vec<f64> = base.iter().chain(base.iter()).copied().collect();
        let b: Vec<f64> = perm.iter().chain(base.iter().rev()).copied().collect();
        let ed = znorm_euclidean(&a, &b).unwrap();
        let cut = 6;
        let at_half = (segment_ssd(&a[..cut], &b[..cut]) + segment_ssd(&a[cut..], &b[cut..])).sqrt();
        assert!((at_half - ed).abs() < 1e-9);
        assert!(pnd(&a, &b, 3).unwrap().distance <= ed + 1e-9);
    }

    #[test]
    fn rejects_bad_preconditions() {
        let s = wave(10);
        assert!(pnd(&s, &s, 1).is_err());
        assert!(pnd(&s, &s, 6).is_err());
        assert!(pnd(&s, &s[..9], 3).is_err());
    }
}
