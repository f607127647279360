//! Synthetic anomaly-free sources: quasi-periodic signals with per-cycle
//! period and amplitude jitter, slow baseline wander and white noise, plus a
//! family of near-identical exemplars for the occlusion study.

use std::fmt;
use std::f64::consts::TAU;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceFamily {
    /// Sharp beat followed by a smaller reflected wave, like a pulse trace.
    Pulse,
    /// Smooth asymmetric stride cycle.
    Gait,
    /// Harmonic-rich sawtooth, like a load's current signature.
    Fingerprint,
    /// Saturated square wave with ripple, like a belt passing sensors.
    Conveyor,
}

impl SourceFamily {
    pub const ALL: [SourceFamily; 4] = [
        SourceFamily::Pulse,
        SourceFamily::Gait,
        SourceFamily::Fingerprint,
        SourceFamily::Conveyor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SourceFamily::Pulse => "pulse",
            SourceFamily::Gait => "gait",
            SourceFamily::Fingerprint => "fingerprint",
            SourceFamily::Conveyor => "conveyor",
        }
    }

    /// One cycle's shape at phase `f` in `[0, 1)`. Periodic in `f`.
    fn shape(self, f: f64) -> f64 {
        let bump = |c: f64, w: f64| {
            // wrapped distance keeps the shape periodic
            let d = (f - c + 0.5).rem_euclid(1.0) - 0.5;
            (-(d / w).powi(2)).exp()
        };
        match self {
            SourceFamily::Pulse => bump(0.15, 0.05) + 0.45 * bump(0.42, 0.08),
            SourceFamily::Gait => {
                (TAU * f).sin() + 0.5 * (2.0 * TAU * f + 0.7).sin() + 0.2 * (3.0 * TAU * f + 2.0).sin()
            }
            SourceFamily::Fingerprint => (1..=6)
                .map(|k| (k as f64 * TAU * f).sin() / k as f64 * 0.9f64.powi(k - 1))
                .sum(),
            SourceFamily::Conveyor => (6.0 * (TAU * f).sin()).tanh() + 0.25 * (3.0 * TAU * f).sin(),
        }
    }
}

impl fmt::Display for SourceFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SourceFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SourceFamily::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::invalid(format!("unknown source family {s:?}")))
    }
}

/// Generator settings shared by all families. Amplitudes are relative to a
/// unit cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceSettings {
    pub min_period: f64,
    pub max_period: f64,
    /// Relative std of each cycle's period around the series' base period.
    pub period_jitter: f64,
    pub amplitude_jitter: f64,
    pub noise: f64,
    pub wander: f64,
}

impl Default for SourceSettings {
    fn default() -> Self {
        SourceSettings {
            min_period: 40.0,
            max_period: 56.0,
            period_jitter: 0.02,
            amplitude_jitter: 0.03,
            noise: 0.02,
            wander: 0.1,
        }
    }
}

/// An anomaly-free series of `n` samples.
pub fn generate<R: Rng + ?Sized>(
    family: SourceFamily,
    n: usize,
    settings: &SourceSettings,
    rng: &mut R,
) -> Vec<f64> {
    let base = rng.random_range(settings.min_period..=settings.max_period);
    let jitter = Normal::new(0.0, settings.period_jitter.max(0.0)).expect("finite std");
    let amp = Normal::new(1.0, settings.amplitude_jitter.max(0.0)).expect("finite std");
    let noise = Normal::new(0.0, settings.noise.max(0.0)).expect("finite std");
    let wander_period = rng.random_range(600.0..1500.0);
    let wander_phase = rng.random_range(0.0..TAU);

    let next_period = |rng: &mut R| (base * (1.0 + jitter.sample(rng))).clamp(0.7 * base, 1.3 * base);
    let mut phase = rng.random_range(0.0..1.0);
    let mut period = next_period(rng);
    let (mut a_prev, mut a_next) = (amp.sample(rng), amp.sample(rng));
    (0..n)
        .map(|i| {
            // amplitude moves linearly across a cycle so cycles join smoothly
            let a = a_prev + (a_next - a_prev) * phase;
            let wander = settings.wander * (TAU * i as f64 / wander_period + wander_phase).sin();
            let v = a * family.shape(phase) + wander + noise.sample(rng);
            phase += 1.0 / period;
            if phase >= 1.0 {
                phase -= 1.0;
                period = next_period(rng);
                a_prev = a_next;
                a_next = amp.sample(rng);
            }
            v
        })
        .collect()
}

/// `count` exemplars of length `m`: the same two-harmonic sinusoid with
/// small per-member changes of period, phase and noise.
pub fn sinusoid_exemplars<R: Rng + ?Sized>(count: usize, m: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let period = rng.random_range(0.4..0.6) * m as f64;
    let second = rng.random_range(0.0..TAU);
    let noise = Normal::new(0.0, 0.01).expect("finite std");
    (0..count)
        .map(|_| {
            let p = period * rng.random_range(0.98..1.02);
            let shift = rng.random_range(-0.03..0.03) * TAU;
            (0..m)
                .map(|t| {
                    let x = TAU * t as f64 / p + shift;
                    x.sin() + 0.4 * (2.0 * x + second).sin() + noise.sample(rng)
                })
                .collect()
        })
        .collect()
}
