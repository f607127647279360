use serde::{Deserialize, Serialize};

use super::check_same_len;
use crate::error::{Error, Result};
use crate::series::znormalize_values;

/// Constrained DTW alignment between two z-normalized series.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarpResult {
    pub distance: f64,
    /// Aligned `(i, j)` index pairs from `(0, 0)` to `(L-1, L-1)`.
    pub path: Vec<(usize, usize)>,
    /// Number of cells on the path; equals `L` only for the pure diagonal.
    pub path_length: usize,
    /// Largest `|i - j|` along the path.
    pub max_deviation: usize,
}

/// `ceil(fraction * len)`.
pub fn default_band(len: usize, fraction: f64) -> usize {
    (fraction * len as f64).ceil() as usize
}

/// DTW with a Sakoe-Chiba band of half-width `band`. Inputs are z-normalized
/// first; the distance is the square root of the accumulated squared
/// differences along the optimal path.
///
/// Backtracking prefers the diagonal predecessor, then `(i-1, j)`, then
/// `(i, j-1)` when costs tie.
pub fn dtw(a: &[f64], b: &[f64], band: usize) -> Result<WarpResult> {
    check_same_len(a, b)?;
    let len = a.len();
    if len < 2 {
        return Err(Error::TooShort { needed: 2, got: len });
    }
    if band > len {
        return Err(Error::invalid(format!(
            "band {band} exceeds series length {len}"
        )));
    }
    let za = znormalize_values(a);
    let zb = znormalize_values(b);

    let inf = f64::INFINITY;
    let mut acc = vec![inf; len * len];
    let at = |i: usize, j: usize| i * len + j;
    for i in 0..len {
        let lo = i.saturating_sub(band);
        let hi = (i + band).min(len - 1);
        for j in lo..=hi {
            let d = za[i] - zb[j];
            let cost = d * d;
            let prev = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 { acc[at(i - 1, j - 1)] } else { inf };
                let up = if i > 0 { acc[at(i - 1, j)] } else { inf };
                let left = if j > 0 { acc[at(i, j - 1)] } else { inf };
                diag.min(up).min(left)
            };
            acc[at(i, j)] = cost + prev;
        }
    }

    let mut path = vec![(len - 1, len - 1)];
    let (mut i, mut j) = (len - 1, len - 1);
    while i > 0 || j > 0 {
        let diag = if i > 0 && j > 0 { acc[at(i - 1, j - 1)] } else { inf };
        let up = if i > 0 { acc[at(i - 1, j)] } else { inf };
        let left = if j > 0 { acc[at(i, j - 1)] } else { inf };
        if diag <= up && diag <= left {
            i -= 1;
            j -= 1;
        } else if up <= left {
            i -= 1;
        } else {
            j -= 1;
        }
        path.push((i, j));
    }
    path.reverse();

    let max_deviation = path.iter().map(|&(i, j)| i.abs_diff(j)).max().unwrap_or(0);
    Ok(WarpResult {
        distance: acc[at(len - 1, len - 1)].sqrt(),
        path_length: path.len(),
        path,
        max_deviation,
    })
}
