use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sq_dist_bounded;
use crate::error::{Error, Result};
use crate::series::znormalize_into;

/// Best-matching window start and its z-normalized Euclidean distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborMatch {
    pub location: usize,
    pub distance: f64,
}

/// Every length-`m` window of a series, z-normalized once, stored
/// contiguously.
pub(crate) struct ZWindows {
    m: usize,
    data: Vec<f64>,
}

impl ZWindows {
    pub(crate) fn new(xs: &[f64], m: usize) -> Self {
        let count = xs.len() + 1 - m;
        let mut data = vec![0.0; count * m];
        data.par_chunks_mut(m)
            .enumerate()
            .for_each(|(i, out)| znormalize_into(&xs[i..i + m], out));
        ZWindows { m, data }
    }

    pub(crate) fn count(&self) -> usize {
        self.data.len() / self.m
    }

    #[inline]
    pub(crate) fn get(&self, i: usize) -> &[f64] {
        &self.data[i * self.m..(i + 1) * self.m]
    }
}

/// Partial sums above this have a square root strictly above `sqrt(sq)`,
/// so abandoning them cannot drop a candidate that ties after rounding.
#[inline]
fn abandon_limit(sq: f64) -> f64 {
    sq * (1.0 + 1e-12)
}

/// Minimum over `candidates` (ascending) of the distance between `query` and
/// each window, ties to the smallest index. `hint` is evaluated first to
/// tighten the abandoning bound; it never changes the answer.
pub(crate) fn scan_min(
    query: &[f64],
    windows: &ZWindows,
    candidates: impl Iterator<Item = usize>,
    hint: Option<usize>,
) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut limit = f64::INFINITY;
    if let Some(h) = hint {
        let sq = super::sq_dist(query, windows.get(h));
        best = Some((h, sq.sqrt()));
        limit = abandon_limit(sq);
    }
    for j in candidates {
        let Some(sq) = sq_dist_bounded(query, windows.get(j), limit) else {
            continue;
        };
        let d = sq.sqrt();
        let better = match best {
            None => true,
            Some((bj, bd)) => d < bd || (d == bd && j < bj),
        };
        if better {
            best = Some((j, d));
            limit = abandon_limit(sq);
        }
    }
    best
}

/// Location in `train` of the window closest to `query` under z-normalized
/// Euclidean distance. Ties go to the smallest start index.
pub fn nn_search(query: &[f64], train: &[f64]) -> Result<NeighborMatch> {
    let m = query.len();
    if m < 2 {
        return Err(Error::TooShort { needed: 2, got: m });
    }
    if train.len() < m {
        return Err(Error::TooShort {
            needed: m,
            got: train.len(),
        });
    }
    let mut zq = vec![0.0; m];
    znormalize_into(query, &mut zq);
    let windows = ZWindows::new(train, m);
    let (location, distance) =
        scan_min(&zq, &windows, 0..windows.count(), None).expect("at least one window");
    Ok(NeighborMatch { location, distance })
}
