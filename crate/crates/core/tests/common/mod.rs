//! Naive reference implementations. Each is a direct double loop with no
//! shared code from the library, and sums left to right so results can be
//! compared bit for bit.

#![allow(dead_code)]

pub fn znorm(xs: &[f64]) -> Vec<f64> {
    let n = xs.len() as f64;
    let mut sum = 0.0;
    for &x in xs {
        sum += x;
    }
    let mu = sum / n;
    let mut ss = 0.0;
    for &x in xs {
        ss += (x - mu) * (x - mu);
    }
    let sd = (ss / n).sqrt();
    let mut peak: f64 = 0.0;
    for &x in xs {
        peak = peak.max(x.abs());
    }
    if sd <= peak * 1e-12 {
        return vec![0.0; xs.len()];
    }
    xs.iter().map(|&x| (x - mu) / sd).collect()
}

pub fn sq(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..a.len() {
        let d = a[i] - b[i];
        acc += d * d;
    }
    acc
}

pub fn zed(a: &[f64], b: &[f64]) -> f64 {
    sq(&znorm(a), &znorm(b)).sqrt()
}

/// `(location, distance)` of the best window, first index on ties.
pub fn nn(query: &[f64], train: &[f64]) -> (usize, f64) {
    let m = query.len();
    let mut best = (usize::MAX, f64::INFINITY);
    for i in 0..=train.len() - m {
        let d = zed(query, &train[i..i + m]);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

pub fn left_profile(s: &[f64], m: usize, excl: usize) -> Vec<(f64, Option<usize>)> {
    let count = s.len() - m + 1;
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let mut best = (f64::INFINITY, None);
        for j in 0..count {
            if j + excl > i {
                break;
            }
            let d = zed(&s[i..i + m], &s[j..j + m]);
            if d < best.0 {
                best = (d, Some(j));
            }
        }
        out.push(best);
    }
    out
}

pub struct Dtw {
    pub distance: f64,
    pub path: Vec<(usize, usize)>,
}

pub fn dtw(a: &[f64], b: &[f64], band: usize) -> Dtw {
    let za = znorm(a);
    let zb = znorm(b);
    let n = za.len();
    let inf = f64::INFINITY;
    let mut d = vec![vec![inf; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i.abs_diff(j) > band {
                continue;
            }
            let c = (za[i] - zb[j]) * (za[i] - zb[j]);
            if i == 0 && j == 0 {
                d[i][j] = c;
                continue;
            }
            let mut m = inf;
            if i > 0 && j > 0 && d[i - 1][j - 1] < m {
                m = d[i - 1][j - 1];
            }
            if i > 0 && d[i - 1][j] < m {
                m = d[i - 1][j];
            }
            if j > 0 && d[i][j - 1] < m {
                m = d[i][j - 1];
            }
            d[i][j] = c + m;
        }
    }
    let (mut i, mut j) = (n - 1, n - 1);
    let mut path = vec![(i, j)];
    while (i, j) != (0, 0) {
        let diag = if i > 0 && j > 0 { d[i - 1][j - 1] } else { inf };
        let up = if i > 0 { d[i - 1][j] } else { inf };
        let left = if j > 0 { d[i][j - 1] } else { inf };
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
    Dtw {
        distance: d[n - 1][n - 1].sqrt(),
        path,
    }
}

/// `(distance, split_index)` over every admissible split.
pub fn pnd(a: &[f64], b: &[f64], min_seg: usize) -> (f64, usize) {
    let n = a.len();
    let mut best = (f64::INFINITY, 0);
    for split in 0..n {
        let left = split + 1;
        if left < min_seg || n - left < min_seg {
            continue;
        }
        let l = sq(&znorm(&a[..left]), &znorm(&b[..left]));
        let r = sq(&znorm(&a[left..]), &znorm(&b[left..]));
        let d = (l + r).sqrt();
        if d < best.0 {
            best = (d, split);
        }
    }
    best
}

fn mean_diff(t: &[f64], a: &[f64]) -> f64 {
    let mut s = 0.0;
    for i in 0..t.len() {
        s += t[i] - a[i];
    }
    s / t.len() as f64
}

/// Literal loop over 1-based `oloc`: `(distance, location,
/// length)`, 0-based location, smallest `(length, location)` on ties.
pub fn oed(t: &[f64], a: &[f64]) -> (f64, usize, usize) {
    let l = t.len();
    let steps = l / 2;
    let mut best = (sq(t, a).sqrt(), 0, 0);
    for olen in 1..=steps {
        for oloc in 1..=l {
            if olen + oloc - 1 > l {
                break;
            }
            let b = oloc - 1; // samples before the occlusion
            let e = oloc - 1 + olen; // first sample after it
            let before = sq(&t[..b], &a[..b]).sqrt();
            let after = sq(&t[e..], &a[e..]).sqrt();
            let o1 = if b > 0 { Some(mean_diff(&t[..b], &a[..b]).abs()) } else { None };
            let o2 = if e < l { Some(mean_diff(&t[e..], &a[e..]).abs()) } else { None };
            let (o1, o2) = match (o1, o2) {
                (Some(x), Some(y)) => (x, y),
                (Some(x), None) => (x, x),
                (None, Some(y)) => (y, y),
                (None, None) => (0.0, 0.0),
            };
            let o = ((o1 + o2) * 0.5) * olen as f64;
            let scale = 2.0 * (olen - 1) as f64 / (steps - 1) as f64;
            let score = before + after + o + scale;
            if score < best.0 {
                best = (score, oloc - 1, olen);
            }
        }
    }
    best
}

/// Random walk with occasional flat stretches and repeats, so ties and the
/// flat-window convention get exercised.
pub fn random_series(rng: &mut impl rand::Rng, n: usize) -> Vec<f64> {
    let mut v = Vec::with_capacity(n);
    let mut x = 0.0;
    while v.len() < n {
        match rng.random_range(0..20) {
            0 => {
                let run = rng.random_range(2..8);
                for _ in 0..run {
                    v.push(x);
                }
            }
            1 if v.len() > 8 => {
                let start = rng.random_range(0..v.len() - 4);
                let len = rng.random_range(2..=4);
                for k in 0..len {
                    v.push(v[start + k]);
                }
            }
            _ => {
                x += rng.random_range(-1.0..1.0);
                v.push(x);
            }
        }
    }
    v.truncate(n);
    v
}
