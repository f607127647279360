//! Synthetic corruptions with known ground truth.
//!
//! Every kind acts on the region `[location, location + length)` of a host
//! series and is scaled by the region's standard deviation (falling back to
//! the host's, then to 1 when both are flat). Random choices come from a
//! ChaCha8 stream keyed by the spec's seed, so `corrupt` is a pure function
//! of `(host, spec)`.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{OcclusionSubkind, OperatorKind};
use crate::series::{is_flat, mean, mean_std, resample_values, TimeSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CorruptionKind {
    /// One sample at the region's center raised by `magnitude` sigmas.
    Spike,
    /// The region lowered by `magnitude` sigmas.
    Dropout,
    /// Gaussian noise of std `magnitude` sigmas over a local region.
    NoisyRegion,
    /// Gaussian noise of std `magnitude` sigmas over a whole window.
    NoisyGlobal,
    LRFlip,
    /// Reflection about the region mean.
    UDFlip,
    /// Content played 5 to 15% faster or slower, spliced back in place.
    UniformScale,
    /// Offset of `magnitude` sigmas from the region's midpoint to the end of
    /// the host.
    Step,
    /// A ramp rising `magnitude` sigmas across the region, held afterwards.
    LinearTrend,
    /// Smooth monotone time remap with peak displacement `magnitude`
    /// samples.
    Warp,
}

impl CorruptionKind {
    pub const ALL: [CorruptionKind; 10] = [
        CorruptionKind::Spike,
        CorruptionKind::Dropout,
        CorruptionKind::NoisyRegion,
        CorruptionKind::NoisyGlobal,
        CorruptionKind::LRFlip,
        CorruptionKind::UDFlip,
        CorruptionKind::UniformScale,
        CorruptionKind::Step,
        CorruptionKind::LinearTrend,
        CorruptionKind::Warp,
    ];

    /// The operator whose inverse undoes this corruption.
    pub fn expected_operator(self) -> OperatorKind {
        match self {
            CorruptionKind::Spike | CorruptionKind::Dropout | CorruptionKind::NoisyRegion => {
                OperatorKind::Occlusion
            }
            CorruptionKind::NoisyGlobal => OperatorKind::Smoothing,
            CorruptionKind::LRFlip => OperatorKind::LRFlip,
            CorruptionKind::UDFlip => OperatorKind::UDFlip,
            CorruptionKind::UniformScale => OperatorKind::UniformScaling,
            CorruptionKind::Step => OperatorKind::PiecewiseNorm,
            CorruptionKind::LinearTrend => OperatorKind::LinearTrend,
            CorruptionKind::Warp => OperatorKind::Warping,
        }
    }

    pub fn expected_subkind(self) -> Option<OcclusionSubkind> {
        match self {
            CorruptionKind::Spike => Some(OcclusionSubkind::Spike),
            CorruptionKind::Dropout => Some(OcclusionSubkind::Dropout),
            CorruptionKind::NoisyRegion => Some(OcclusionSubkind::Noise),
            _ => None,
        }
    }

    pub fn uses_magnitude(self) -> bool {
        !matches!(
            self,
            CorruptionKind::LRFlip | CorruptionKind::UDFlip | CorruptionKind::UniformScale
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            CorruptionKind::Spike => "Spike",
            CorruptionKind::Dropout => "Dropout",
            CorruptionKind::NoisyRegion => "NoisyRegion",
            CorruptionKind::NoisyGlobal => "NoisyGlobal",
            CorruptionKind::LRFlip => "LRFlip",
            CorruptionKind::UDFlip => "UDFlip",
            CorruptionKind::UniformScale => "UniformScale",
            CorruptionKind::Step => "Step",
            CorruptionKind::LinearTrend => "LinearTrend",
            CorruptionKind::Warp => "Warp",
        }
    }
}

impl fmt::Display for CorruptionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CorruptionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        CorruptionKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown corruption kind {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub kind: CorruptionKind,
    pub location: usize,
    pub length: usize,
    /// Sigma units for amplitude kinds, samples for `Warp`, unused by flips
    /// and `UniformScale`.
    pub magnitude: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: CorruptionSpec,
    pub expected_operator: OperatorKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_subkind: Option<OcclusionSubkind>,
    /// Standard deviation the magnitude was measured in.
    pub sigma: f64,
    /// Playback speed of a `UniformScale` region (above 1 is faster).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub speed: Option<f64>,
    /// Signed peak displacement of a `Warp`, in samples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub displacement: Option<f64>,
    /// Index of the single corrupted sample of a `Spike`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spike_index: Option<usize>,
    /// Length of the corrupted series, which `UniformScale` can change.
    pub output_length: usize,
}

/// Standard deviation used to scale magnitudes.
fn scale_sigma(host: &[f64], region: &[f64]) -> f64 {
    let (_, s) = mean_std(region);
    if !is_flat(region, s) {
        return s;
    }
    let (_, s) = mean_std(host);
    if !is_flat(host, s) {
        return s;
    }
    1.0
}

fn interpolate(xs: &[f64], pos: f64) -> f64 {
    let i0 = pos.floor() as usize;
    if i0 + 1 >= xs.len() {
        return xs[xs.len() - 1];
    }
    let frac = pos - i0 as f64;
    xs[i0] + frac * (xs[i0 + 1] - xs[i0])
}

/// Largest peak displacement for which the warp stays strictly monotone.
pub fn max_warp_displacement(length: usize) -> f64 {
    (length as f64 - 1.0) / std::f64::consts::PI
}

pub fn corrupt(host: &TimeSeries, spec: &CorruptionSpec) -> Result<(TimeSeries, GroundTruth)> {
    let n = host.len();
    let (p, len) = (spec.location, spec.length);
    if len < 2 || p + len > n {
        return Err(Error::OutOfBounds(format!(
            "region {p}..{} in a series of length {n}",
            p + len
        )));
    }
    if !(spec.magnitude.is_finite() && spec.magnitude >= 0.0) {
        return Err(Error::OutOfBounds(format!(
            "magnitude must be finite and non-negative, got {}",
            spec.magnitude
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let sigma = scale_sigma(host, &host[p..p + len]);
    let amount = spec.magnitude * sigma;
    let mut out = host.values().to_vec();
    let mut truth = GroundTruth {
        spec: spec.clone(),
        expected_operator: spec.kind.expected_operator(),
        expected_subkind: spec.kind.expected_subkind(),
        sigma,
        speed: None,
        displacement: None,
        spike_index: None,
        output_length: n,
    };

    match spec.kind {
        CorruptionKind::Spike => {
            let at = p + len / 2;
            out[at] += amount;
            truth.spike_index = Some(at);
        }
        CorruptionKind::Dropout => out[p..p + len].iter_mut().for_each(|v| *v -= amount),
        CorruptionKind::NoisyRegion | CorruptionKind::NoisyGlobal => {
            if amount > 0.0 {
                let noise = Normal::new(0.0, amount).expect("positive std");
                out[p..p + len]
                    .iter_mut()
                    .for_each(|v| *v += noise.sample(&mut rng));
            }
        }
        CorruptionKind::LRFlip => out[p..p + len].reverse(),
        CorruptionKind::UDFlip => {
            let mu = mean(&host[p..p + len]);
            out[p..p + len].iter_mut().for_each(|v| *v = 2.0 * mu - *v);
        }
        CorruptionKind::UniformScale => {
            let delta = rng.random_range(0.05..=0.15);
            let speed = if rng.random::<bool>() { 1.0 + delta } else { 1.0 - delta };
            // `consumed` source samples are played back in `len` samples
            let consumed = (len as f64 * speed).round() as usize;
            if p + consumed > n {
                return Err(Error::OutOfBounds(format!(
                    "uniform scaling at {p} needs {consumed} samples, {} available",
                    n - p
                )));
            }
            let played = resample_values(&host[p..p + consumed], len);
            out.truncate(p);
            out.extend(played);
            out.extend_from_slice(&host[p + consumed..]);
            // a slowdown pushes the tail past the end; a speedup leaves the
            // series shorter
            out.truncate(n);
            truth.speed = Some(speed);
            truth.output_length = out.len();
        }
        // level changes persist past the region so they leave one edge
        CorruptionKind::Step => out[p + len / 2..].iter_mut().for_each(|v| *v += amount),
        CorruptionKind::LinearTrend => {
            let denom = (len - 1) as f64;
            out[p..]
                .iter_mut()
                .enumerate()
                .for_each(|(i, v)| *v += amount * (i as f64 / denom).min(1.0));
        }
        CorruptionKind::Warp => {
            let d = spec.magnitude;
            if d >= max_warp_displacement(len) {
                return Err(Error::OutOfBounds(format!(
                    "warp displacement {d} is not monotone over {len} samples"
                )));
            }
            let d = if rng.random::<bool>() { d } else { -d };
            let denom = (len - 1) as f64;
            for (t, v) in out[p..p + len].iter_mut().enumerate() {
                let pos = t as f64 + d * (std::f64::consts::PI * t as f64 / denom).sin();
                let src = p as f64 + pos;
                if src < 0.0 || src > (n - 1) as f64 {
                    return Err(Error::OutOfBounds(format!(
                        "warp at {p} reads outside the series"
                    )));
                }
                *v = interpolate(host, src);
            }
            truth.displacement = Some(d);
        }
    }

    let series = TimeSeries::new(out)?;
    let series = match (host.explicit_sample_period(), host.start_time()) {
        (Some(period), start) => {
            let s = series.with_sample_period(period)?;
            match start {
                Some(t) => s.with_start_time(t),
                None => s,
            }
        }
        (None, Some(t)) => series.with_start_time(t),
        (None, None) => series,
    };
    Ok((series, truth))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{apply_operator, OperatorSettings};

    fn host(n: usize) -> TimeSeries {
        TimeSeries::new(
            (0..n)
                .map(|i| {
                    let p = std::f64::consts::TAU * i as f64 / 37.0;
                    p.sin() + 0.5 * (2.0 * p + 0.8).sin()
                })
                .collect(),
        )
        .unwrap()
    }

    fn spec(kind: CorruptionKind, location: usize, length: usize, magnitude: f64) -> CorruptionSpec {
        CorruptionSpec {
            kind,
            location,
            length,
            magnitude,
            seed: 11,
        }
    }

    #[test]
    fn zero_spike_is_identity() {
        let h = host(300);
        let (out, _) = corrupt(&h, &spec(CorruptionKind::Spike, 100, 50, 0.0)).unwrap();
        assert_eq!(out, h);
    }

    #[test]
    fn lr_flip_twice_restores() {
        let h = host(300);
        let s = spec(CorruptionKind::LRFlip, 40, 100, 0.0);
        let (once, _) = corrupt(&h, &s).unwrap();
        assert_ne!(once, h);
        let (twice, _) = corrupt(&once, &s).unwrap();
        assert_eq!(twice, h);
    }

    #[test]
    fn step_on_flat_window() {
        let mut v = host(300).into_values();
        v[100..150].iter_mut().for_each(|x| *x = 0.25);
        let h = TimeSeries::new(v).unwrap();
        let sd = mean_std(&h).1;
        let (out, truth) = corrupt(&h, &spec(CorruptionKind::Step, 100, 50, 4.0)).unwrap();
        assert_eq!(truth.sigma, sd);
        assert!(out[100..125].iter().all(|&x| x == 0.25));
        for &x in &out[125..150] {
            assert!((x - (0.25 + 4.0 * sd)).abs() < 1e-12);
        }
        for (x, y) in out[150..].iter().zip(&h[150..]) {
            assert!((x - (y + 4.0 * sd)).abs() < 1e-12);
        }
        assert_eq!(&out[..100], &h[..100]);
    }

    #[test]
    fn trend_rises_then_holds() {
        let h = host(300);
        let (out, truth) = corrupt(&h, &spec(CorruptionKind::LinearTrend, 100, 51, 2.0)).unwrap();
        let rise = 2.0 * truth.sigma;
        assert_eq!(&out[..101], &h[..101]);
        assert!((out[125] - h[125] - rise / 2.0).abs() < 1e-12);
        for i in 150..300 {
            assert!((out[i] - h[i] - rise).abs() < 1e-12);
        }
    }

    #[test]
    fn flat_host_uses_unit_sigma() {
        let h = TimeSeries::new(vec![2.0; 40]).unwrap();
        let (out, truth) = corrupt(&h, &spec(CorruptionKind::Dropout, 10, 5, 3.0)).unwrap();
        assert_eq!(truth.sigma, 1.0);
        assert_eq!(out[12], -1.0);
    }

    #[test]
    fn seed_determinism() {
        let h = host(400);
        for kind in CorruptionKind::ALL {
            let magnitude = if kind == CorruptionKind::Warp { 5.0 } else { 3.0 };
            let s = spec(kind, 100, 100, magnitude);
            let (a, ta) = corrupt(&h, &s).unwrap();
            let (b, tb) = corrupt(&h, &s).unwrap();
            assert_eq!(a, b);
            assert_eq!(ta, tb);
        }
    }

    #[test]
    fn noise_differs_by_seed() {
        let h = host(300);
        let mut s = spec(CorruptionKind::NoisyGlobal, 50, 100, 1.0);
        let (a, _) = corrupt(&h, &s).unwrap();
        s.seed += 1;
        let (b, _) = corrupt(&h, &s).unwrap();
        assert_ne!(a, b);
        assert_eq!(&a[..50], &h[..50]);
        assert_eq!(&a[150..], &h[150..]);
    }

    #[test]
    fn uniform_scale_speed_and_length() {
        let h = host(500);
        for seed in 0..20 {
            let s = CorruptionSpec {
                seed,
                ..spec(CorruptionKind::UniformScale, 100, 100, 0.0)
            };
            let (out, truth) = corrupt(&h, &s).unwrap();
            let speed = truth.speed.unwrap();
            let delta = (speed - 1.0).abs();
            assert!((0.05..=0.15).contains(&delta), "{speed}");
            let consumed = (100.0 * speed).round() as usize;
            assert_eq!(out.len(), 500usize.min(500 - consumed + 100));
            assert_eq!(out[100], h[100]);
            assert_eq!(&out[200..out.len().min(300)], &h[100 + consumed..(100 + consumed + out.len().min(300) - 200)]);
        }
    }

    #[test]
    fn warp_is_bounded_and_monotone() {
        let h = host(400);
        let s = spec(CorruptionKind::Warp, 100, 100, 8.0);
        let (out, truth) = corrupt(&h, &s).unwrap();
        assert_eq!(truth.displacement.unwrap().abs(), 8.0);
        assert_eq!(out[100], h[100]);
        assert_eq!(out[199], h[199]);
        assert_ne!(out[150], h[150]);
        assert!(corrupt(&h, &spec(CorruptionKind::Warp, 100, 100, 40.0)).is_err());
    }

    #[test]
    fn bounds_are_checked() {
        let h = host(100);
        assert!(corrupt(&h, &spec(CorruptionKind::Spike, 90, 20, 1.0)).is_err());
        assert!(corrupt(&h, &spec(CorruptionKind::Spike, 10, 20, f64::NAN)).is_err());
    }

    #[test]
    fn flips_are_undone_exactly() {
        let h = host(400);
        let clean = &h[100..200];
        for kind in [CorruptionKind::LRFlip, CorruptionKind::UDFlip] {
            let (out, truth) = corrupt(&h, &spec(kind, 100, 100, 0.0)).unwrap();
            let r = apply_operator(truth.expected_operator, &out[100..200], clean, &OperatorSettings::default())
                .unwrap();
            assert!(r.distance < 1e-6, "{kind}: {}", r.distance);
        }
    }
}
