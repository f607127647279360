//! Distance measures the operators are ranked against.
//!
//! Every measure here is computed with a fixed summation order, so that
//! accelerated paths (early abandoning, cached normalized windows, parallel
//! scans) return results bit-identical to a plain double loop.

mod dtw;
mod occlusion;
mod pnd;
mod search;

pub use dtw::{default_band, dtw, WarpResult};
pub use occlusion::{occlusion_scale, oed, oed_surface, OcclusionResult, OcclusionSurface};
pub use pnd::{pnd, SplitResult, DEFAULT_MIN_SEGMENT};
pub use search::{nn_search, NeighborMatch};

pub(crate) use search::{scan_min, ZWindows};

use crate::error::{Error, Result};
use crate::series::znormalize_values;

/// Sum of squared pointwise differences, accumulated left to right.
#[inline]
pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc
}

/// Like [`sq_dist`] but gives up once the partial sum exceeds `limit`.
/// When it does return, the value is bit-identical to [`sq_dist`].
#[inline]
pub(crate) fn sq_dist_bounded(a: &[f64], b: &[f64], limit: f64) -> Option<f64> {
    let mut acc = 0.0;
    for (ca, cb) in a.chunks(8).zip(b.chunks(8)) {
        for (x, y) in ca.iter().zip(cb) {
            let d = x - y;
            acc += d * d;
        }
        if acc > limit {
            return None;
        }
    }
    Some(acc)
}

fn check_same_len(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Plain L2 distance on raw values.
pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_same_len(a, b)?;
    Ok(sq_dist(a, b).sqrt())
}

/// Euclidean distance between the z-normalized forms of `a` and `b`.
pub fn znorm_euclidean(a: &[f64], b: &[f64]) -> Result<f64> {
    check_same_len(a, b)?;
    if a.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: a.len(),
        });
    }
    Ok(sq_dist(&znormalize_values(a), &znormalize_values(b)).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn euclidean_basics() {
        let s = [1.0, -2.0, 3.5];
        assert_eq!(euclidean(&s, &s).unwrap(), 0.0);
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert!(matches!(
            euclidean(&[1.0], &[1.0, 2.0]),
            Err(Error::LengthMismatch { left: 1, right: 2 })
        ));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..100 {
            let a: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert_eq!(euclidean(&a, &b).unwrap(), euclidean(&b, &a).unwrap());
        }
    }

    #[test]
    fn znorm_euclidean_invariance_and_bounds() {
        let s = [0.3, 1.9, -0.4, 2.2, 0.0, 1.1];
        let t: Vec<f64> = s.iter().map(|x| 3.7 * x + 40.0).collect();
        assert!(znorm_euclidean(&s, &t).unwrap() < 1e-12);

        // a series and its negation are antipodal unit vectors scaled by sqrt(L)
        let a = [1.0, 3.0, 2.0, 6.0];
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((znorm_euclidean(&a, &neg).unwrap() - 4.0).abs() < 1e-12);

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let bound = 2.0 * 16f64.sqrt();
        for _ in 0..2000 {
            let a: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..16).map(|_| rng.random_range(-1.0..1.0)).collect();
            assert!(znorm_euclidean(&a, &b).unwrap() <= bound + 1e-12);
        }
        assert!(znorm_euclidean(&[1.0], &[2.0]).is_err());
    }

    #[test]
    fn bounded_distance_matches_unbounded() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        for len in [1, 7, 8, 9, 33] {
            let a: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let b: Vec<f64> = (0..len).map(|_| rng.random_range(-1.0..1.0)).collect();
            let full = sq_dist(&a, &b);
            assert_eq!(sq_dist_bounded(&a, &b, f64::INFINITY), Some(full));
            assert_eq!(sq_dist_bounded(&a, &b, full), Some(full));
        }
    }
}
