//! Occlusion Euclidean distance: the distance between two series when one
//! contiguous region is ignored, with a penalty that grows with the length
//! of the ignored region.

use serde::{Deserialize, Serialize};

use super::{check_same_len, sq_dist};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OcclusionResult {
    pub distance: f64,
    /// 0-based start of the occluded region.
    pub location: usize,
    /// Occluded length; 0 means nothing was ignored.
    pub length: usize,
}

/// Score of every `(length, location)` cell. Cells that do not exist are
/// `+inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct OcclusionSurface {
    /// `scores[length][location]`, `length` in `0..=L/2`, `location` in `0..L`.
    pub scores: Vec<Vec<f64>>,
}

/// Length penalty for occluding `olen` samples out of `len`: the `olen`-th of
/// `len/2` evenly spaced values from 0 to 2.
pub fn occlusion_scale(len: usize, olen: usize) -> f64 {
    let steps = len / 2;
    debug_assert!(olen >= 1 && olen <= steps && steps >= 2);
    2.0 * (olen - 1) as f64 / (steps - 1) as f64
}

fn mean_diff(t: &[f64], a: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in t.iter().zip(a) {
        acc += x - y;
    }
    acc / t.len() as f64
}

/// Score of occluding `t[loc..loc+olen]` (olen >= 1).
///
/// An empty prefix or suffix contributes a zero norm and borrows the other
/// side's mean difference.
fn cell_score(t: &[f64], a: &[f64], loc: usize, olen: usize) -> f64 {
    let len = t.len();
    let end = loc + olen;
    let before = sq_dist(&t[..loc], &a[..loc]).sqrt();
    let after = sq_dist(&t[end..], &a[end..]).sqrt();
    let pre = (loc > 0).then(|| mean_diff(&t[..loc], &a[..loc]));
    let post = (end < len).then(|| mean_diff(&t[end..], &a[end..]));
    let (o1, o2) = match (pre, post) {
        (Some(p), Some(q)) => (p.abs(), q.abs()),
        (Some(p), None) => (p.abs(), p.abs()),
        (None, Some(q)) => (q.abs(), q.abs()),
        (None, None) => (0.0, 0.0),
    };
    let penalty = ((o1 + o2) * 0.5) * olen as f64;
    before + after + penalty + occlusion_scale(len, olen)
}

fn check(t: &[f64], a: &[f64]) -> Result<()> {
    check_same_len(t, a)?;
    if t.len() < 4 {
        return Err(Error::TooShort {
            needed: 4,
            got: t.len(),
        });
    }
    Ok(())
}

/// Grid search over occlusion length `0..=L/2` and start. Inputs are expected
/// to be z-normalized already. Ties go to the smallest `(length, location)`.
pub fn oed(t: &[f64], a: &[f64]) -> Result<OcclusionResult> {
    check(t, a)?;
    let len = t.len();
    let mut best = OcclusionResult {
        distance: sq_dist(t, a).sqrt(),
        location: 0,
        length: 0,
    };
    for olen in 1..=len / 2 {
        for loc in 0..=len - olen {
            let score = cell_score(t, a, loc, olen);
            if score < best.distance {
                best = OcclusionResult {
                    distance: score,
                    location: loc,
                    length: olen,
                };
            }
        }
    }
    Ok(best)
}

/// The full score surface searched by [`oed`]. The length-0 row holds the
/// plain Euclidean distance at location 0 only.
pub fn oed_surface(t: &[f64], a: &[f64]) -> Result<OcclusionSurface> {
    check(t, a)?;
    let len = t.len();
    let mut scores = vec![vec![f64::INFINITY; len]; len / 2 + 1];
    scores[0][0] = sq_dist(t, a).sqrt();
    for (olen, row) in scores.iter_mut().enumerate().skip(1) {
        for (loc, cell) in row.iter_mut().enumerate().take(len - olen + 1) {
            *cell = cell_score(t, a, loc, olen);
        }
    }
    Ok(OcclusionSurface { scores })
}
