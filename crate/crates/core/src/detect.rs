//! Discord-based detection: an exact left matrix profile, thresholds learned
//! from anomaly-free training data, and extraction of candidate windows.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{nn_search, scan_min, ZWindows};
use crate::series::{mean_std, TimeSeries};

/// Windows per parallel work unit. Each unit runs sequentially so the
/// previous window's match can seed the next search.
const CHUNK: usize = 64;

/// Minimum number of finite training distances a threshold is fit on.
pub const MIN_THRESHOLD_WINDOWS: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixProfile {
    /// Distance to the nearest admissible window; `+inf` when there is none.
    pub distances: Vec<f64>,
    /// Start of that window, `None` where the distance is infinite.
    pub indices: Vec<Option<usize>>,
    pub window: usize,
    pub exclusion: usize,
}

impl MatrixProfile {
    pub fn len(&self) -> usize {
        self.distances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.distances.is_empty()
    }

    /// Start of the window with the largest finite distance (ties to the
    /// earliest).
    pub fn discord(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, &d) in self.distances.iter().enumerate() {
            if d.is_finite() && best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        best
    }
}

fn check_window(n: usize, m: usize) -> Result<()> {
    if m < 4 {
        return Err(Error::invalid(format!("window must be at least 4, got {m}")));
    }
    if n < 2 * m {
        return Err(Error::TooShort {
            needed: 2 * m,
            got: n,
        });
    }
    Ok(())
}

/// Profile entries for window starts in `starts`. `admissible(i)` yields the
/// candidate starts for window `i` in ascending order and `allows(i, j)`
/// says whether `j` is among them.
fn profile_entries<I>(
    windows: &ZWindows,
    starts: std::ops::Range<usize>,
    admissible: impl Fn(usize) -> I + Sync,
    allows: impl Fn(usize, usize) -> bool + Sync,
) -> Vec<(f64, Option<usize>)>
where
    I: Iterator<Item = usize>,
{
    let starts: Vec<usize> = starts.collect();
    starts
        .par_chunks(CHUNK)
        .flat_map_iter(|chunk| {
            let mut prev: Option<usize> = None;
            chunk
                .iter()
                .map(|&i| {
                    let mut cands = admissible(i).peekable();
                    if cands.peek().is_none() {
                        prev = None;
                        return (f64::INFINITY, None);
                    }
                    // the successor of the previous match is usually close
                    let hint = prev.map(|p| p + 1).filter(|&h| allows(i, h));
                    let (j, d) = scan_min(windows.get(i), windows, cands, hint)
                        .expect("non-empty candidate set");
                    prev = Some(j);
                    (d, Some(j))
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn assemble(entries: Vec<(f64, Option<usize>)>, window: usize, exclusion: usize) -> MatrixProfile {
    let (distances, indices) = entries.into_iter().unzip();
    MatrixProfile {
        distances,
        indices,
        window,
        exclusion,
    }
}

/// For every window, the z-normalized distance to its nearest neighbor among
/// windows starting at least `exclusion` samples earlier.
pub fn left_matrix_profile(s: &[f64], m: usize, exclusion: usize) -> Result<MatrixProfile> {
    check_window(s.len(), m)?;
    let windows = ZWindows::new(s, m);
    let entries = left_entries(&windows, 0..windows.count(), exclusion);
    Ok(assemble(entries, m, exclusion))
}

fn left_entries(
    windows: &ZWindows,
    starts: std::ops::Range<usize>,
    exclusion: usize,
) -> Vec<(f64, Option<usize>)> {
    profile_entries(
        windows,
        starts,
        |i| 0..(i + 1).saturating_sub(exclusion),
        |i, j| j + exclusion <= i,
    )
}

/// Two-sided profile: nearest neighbor at distance at least `exclusion` in
/// either direction.
pub fn self_join_profile(s: &[f64], m: usize, exclusion: usize) -> Result<MatrixProfile> {
    check_window(s.len(), m)?;
    let windows = ZWindows::new(s, m);
    let count = windows.count();
    let entries = profile_entries(
        &windows,
        0..count,
        |i| (0..(i + 1).saturating_sub(exclusion)).chain((i + exclusion).min(count)..count),
        |i, j| j < count && i.abs_diff(j) >= exclusion,
    );
    Ok(assemble(entries, m, exclusion))
}

/// How a threshold is derived from the training distance distribution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdMode {
    /// Mean plus three standard deviations.
    MuSigma,
    /// Largest training distance plus one standard deviation.
    #[default]
    MaxPlusSigma,
}

impl fmt::Display for ThresholdMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdMode::MuSigma => "mu-sigma",
            ThresholdMode::MaxPlusSigma => "max-plus-sigma",
        })
    }
}

impl FromStr for ThresholdMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mu-sigma" => Ok(ThresholdMode::MuSigma),
            "max-plus-sigma" => Ok(ThresholdMode::MaxPlusSigma),
            _ => Err(Error::invalid(format!(
                "unknown threshold mode {s:?} (expected mu-sigma or max-plus-sigma)"
            ))),
        }
    }
}

/// Threshold over a population of nearest-neighbor distances. Infinite
/// entries are ignored.
pub fn threshold_from_distances(distances: &[f64], mode: ThresholdMode) -> Result<f64> {
    let finite: Vec<f64> = distances.iter().copied().filter(|d| d.is_finite()).collect();
    if finite.len() < MIN_THRESHOLD_WINDOWS {
        return Err(Error::TooShort {
            needed: MIN_THRESHOLD_WINDOWS,
            got: finite.len(),
        });
    }
    let (mu, sigma) = mean_std(&finite);
    Ok(match mode {
        ThresholdMode::MuSigma => mu + 3.0 * sigma,
        ThresholdMode::MaxPlusSigma => finite.iter().copied().fold(f64::MIN, f64::max) + sigma,
    })
}

/// Threshold fit on the training series' own self-join profile, with an
/// exclusion zone of one window.
pub fn train_threshold(train: &[f64], m: usize, mode: ThresholdMode) -> Result<f64> {
    let profile = self_join_profile(train, m, m)?;
    threshold_from_distances(&profile.distances, mode)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnomalyCandidate {
    /// Start index in the test series.
    pub location: usize,
    pub window: TimeSeries,
    /// Left-profile distance that admitted the window.
    pub score: f64,
    pub neighbor_location: usize,
    pub neighbor_distance: f64,
}

/// Left-profile scores of every test window, with training data and the
/// preceding test data as context. Entry `k` is the window starting at test
/// index `k`.
pub fn test_scores(test: &[f64], train: &[f64], m: usize) -> Result<Vec<f64>> {
    if test.len() < m {
        return Err(Error::TooShort {
            needed: m,
            got: test.len(),
        });
    }
    check_window(train.len(), m)?;
    let joined: Vec<f64> = train.iter().chain(test).copied().collect();
    let windows = ZWindows::new(&joined, m);
    let first = train.len();
    Ok(left_entries(&windows, first..windows.count(), m)
        .into_iter()
        .map(|(d, _)| d)
        .collect())
}

/// Greedy peak picking: repeatedly take the highest score above
/// `threshold` and drop every start within `2m - 1` of it, so one injected
/// region of length `m` yields at most one pick. Ties go to the earliest
/// start. Windows are only ever removed by higher-scoring picks, so raising
/// the threshold can only shrink the result.
pub fn pick_peaks(scores: &[f64], m: usize, threshold: f64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scores.len())
        .filter(|&i| scores[i].is_finite() && scores[i] > threshold)
        .collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    let radius = 2 * m - 1;
    let mut picked: Vec<usize> = Vec::new();
    for i in order {
        if picked.iter().all(|&p| p.abs_diff(i) >= radius) {
            picked.push(i);
        }
    }
    picked.sort_unstable();
    picked
}

/// Windows of `test` whose left-profile distance exceeds `threshold`,
/// one per excursion, each paired with its nearest training window.
pub fn find_anomalies(
    test: &TimeSeries,
    train: &TimeSeries,
    m: usize,
    threshold: f64,
) -> Result<Vec<AnomalyCandidate>> {
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::invalid(format!("threshold must be non-negative, got {threshold}")));
    }
    let scores = test_scores(test, train, m)?;
    pick_peaks(&scores, m, threshold)
        .into_iter()
        .map(|location| {
            let window = test.slice(location..location + m)?;
            let nn = nn_search(&window, train)?;
            Ok(AnomalyCandidate {
                location,
                window,
                score: scores[location],
                neighbor_location: nn.location,
                neighbor_distance: nn.distance,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::znorm_euclidean;
    use rand::{Rng, SeedableRng};

    fn naive_left(s: &[f64], m: usize, excl: usize) -> Vec<(f64, Option<usize>)> {
        (0..=s.len() - m)
            .map(|i| {
                let mut best = (f64::INFINITY, None);
                for j in 0..=i {
                    if i - j < excl {
                        break;
                    }
                    let d = znorm_euclidean(&s[i..i + m], &s[j..j + m]).unwrap();
                    if d < best.0 {
                        best = (d, Some(j));
                    }
                }
                best
            })
            .collect()
    }

    fn wave(n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| {
                let p = std::f64::consts::TAU * i as f64 / 23.0;
                p.sin() + 0.5 * (2.0 * p + 0.4).sin()
            })
            .collect()
    }

    #[test]
    fn matches_naive_loop() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let n = rng.random_range(40..200);
            let m = rng.random_range(4..=12);
            let excl = rng.random_range(1..=m);
            let s: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mp = left_matrix_profile(&s, m, excl).unwrap();
            let oracle = naive_left(&s, m, excl);
            for (i, (d, j)) in oracle.into_iter().enumerate() {
                assert_eq!(mp.distances[i].to_bits(), d.to_bits(), "i={i}");
                assert_eq!(mp.indices[i], j, "i={i}");
            }
        }
    }

    #[test]
    fn early_windows_have_no_left_neighbor() {
        let mp = left_matrix_profile(&wave(100), 10, 10).unwrap();
        assert!(mp.distances[..10].iter().all(|d| d.is_infinite()));
        assert!(mp.indices[..10].iter().all(Option::is_none));
        assert!(mp.distances[10].is_finite());
    }

    #[test]
    fn spike_is_the_discord() {
        // window = period, so every admissible window has an exact match
        let mut s = wave(400);
        s[300] += 5.0;
        let mp = left_matrix_profile(&s, 23, 23).unwrap();
        let (i, _) = mp.discord().unwrap();
        assert!(i <= 300 && 300 < i + 23, "discord at {i}");
    }

    #[test]
    fn repeated_half_is_near_zero() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let half: Vec<f64> = (0..150).map(|_| rng.random_range(-1.0..1.0)).collect();
        let s: Vec<f64> = half.iter().chain(&half).copied().collect();
        let mp = left_matrix_profile(&s, 16, 16).unwrap();
        for i in 150..=s.len() - 16 {
            assert!(mp.distances[i] < 1e-6, "i={i}: {}", mp.distances[i]);
        }
    }

    #[test]
    fn window_preconditions() {
        assert!(left_matrix_profile(&wave(20), 3, 3).is_err());
        assert!(left_matrix_profile(&wave(15), 8, 8).is_err());
    }

    #[test]
    fn self_join_matches_naive() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let s: Vec<f64> = (0..120).map(|_| rng.random_range(-1.0..1.0)).collect();
        let m = 8;
        let mp = self_join_profile(&s, m, m).unwrap();
        for i in 0..=s.len() - m {
            let mut best = (f64::INFINITY, None);
            for j in 0..=s.len() - m {
                if i.abs_diff(j) >= m {
                    let d = znorm_euclidean(&s[i..i + m], &s[j..j + m]).unwrap();
                    if d < best.0 {
                        best = (d, Some(j));
                    }
                }
            }
            assert_eq!(mp.distances[i].to_bits(), best.0.to_bits());
            assert_eq!(mp.indices[i], best.1);
        }
    }

    #[test]
    fn threshold_modes() {
        let d = [2.0, 2.2, 2.1, 2.3, 1.9, 2.0, 2.2, 2.1, 2.0, 2.2, f64::INFINITY];
        let finite = &d[..10];
        let mu = finite.iter().sum::<f64>() / 10.0;
        let sd = (finite.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / 10.0).sqrt();
        let t = threshold_from_distances(&d, ThresholdMode::MuSigma).unwrap();
        assert!((t - (mu + 3.0 * sd)).abs() < 1e-12);
        let t = threshold_from_distances(&d, ThresholdMode::MaxPlusSigma).unwrap();
        assert!((t - (2.3 + sd)).abs() < 1e-12);
        assert_eq!(
            threshold_from_distances(&[1.5; 12], ThresholdMode::MaxPlusSigma).unwrap(),
            1.5
        );
        assert!(threshold_from_distances(&d[..9], ThresholdMode::MuSigma).is_err());
    }

    #[test]
    fn threshold_separates_a_spiked_window() {
        let train = wave(50 * 23);
        let m = 46;
        let t = train_threshold(&train, m, ThresholdMode::MaxPlusSigma).unwrap();
        let mut test = wave(10 * 23);
        let sd = mean_std(&test).1;
        let scores = test_scores(&test, &train, m).unwrap();
        assert!(scores.iter().all(|&s| s < t));
        test[100] += 5.0 * sd;
        let scores = test_scores(&test, &train, m).unwrap();
        assert!(scores[80] > t);
    }

    #[test]
    fn peaks_are_monotone_in_threshold() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let scores: Vec<f64> = (0..300).map(|_| rng.random_range(0.0..5.0)).collect();
            let mut last = usize::MAX;
            for t in [0.5, 1.0, 2.0, 3.0, 4.0, 4.9] {
                let n = pick_peaks(&scores, 10, t).len();
                assert!(n <= last);
                last = n;
            }
        }
    }

    #[test]
    fn two_anomalies_two_candidates() {
        let train = TimeSeries::new(wave(1000)).unwrap();
        let mut test = wave(1000);
        test[300] += 6.0;
        test[700] -= 6.0;
        let test = TimeSeries::new(test).unwrap();
        let m = 46;
        let t = train_threshold(&train, m, ThresholdMode::MaxPlusSigma).unwrap();
        let found = find_anomalies(&test, &train, m, t).unwrap();
        assert_eq!(found.len(), 2, "{found:?}");
        assert!(found[0].location <= 300 && 300 < found[0].location + m);
        assert!(found[1].location <= 700 && 700 < found[1].location + m);
        assert!(found.iter().all(|c| c.score > t && c.neighbor_distance > 0.0));
    }
}
