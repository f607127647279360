//! Series representation and the elementary transforms every other module
//! builds on: z-normalization, resampling, smoothing and line fitting.

use std::ops::{Deref, Range};

use chrono::{Duration, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An immutable sequence of finite samples with optional time metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    sample_period: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    start_time: Option<NaiveDateTime>,
}

impl TimeSeries {
    /// Validates that the series is non-empty and every sample is finite.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::degenerate("empty series"));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(TimeSeries {
            values,
            sample_period: None,
            start_time: None,
        })
    }

    /// Seconds per sample. Must be positive and finite.
    pub fn with_sample_period(mut self, seconds: f64) -> Result<Self> {
        if !(seconds.is_finite() && seconds > 0.0) {
            return Err(Error::invalid(format!(
                "sample period must be positive, got {seconds}"
            )));
        }
        self.sample_period = Some(seconds);
        Ok(self)
    }

    pub fn with_start_time(mut self, start: NaiveDateTime) -> Self {
        self.start_time = Some(start);
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Seconds per sample, 1.0 when the series carries no explicit period.
    pub fn sample_period(&self) -> f64 {
        self.sample_period.unwrap_or(1.0)
    }

    /// The period only if it was set explicitly.
    pub fn explicit_sample_period(&self) -> Option<f64> {
        self.sample_period
    }

    pub fn start_time(&self) -> Option<NaiveDateTime> {
        self.start_time
    }

    /// Sub-series over `range`, with the start time shifted accordingly.
    pub fn slice(&self, range: Range<usize>) -> Result<TimeSeries> {
        if range.start >= range.end || range.end > self.values.len() {
            return Err(Error::OutOfBounds(format!(
                "slice {}..{} of a series of length {}",
                range.start,
                range.end,
                self.values.len()
            )));
        }
        let start_time = self
            .start_time
            .map(|t| t + offset_duration(range.start, self.sample_period()));
        Ok(TimeSeries {
            values: self.values[range].to_vec(),
            sample_period: self.sample_period,
            start_time,
        })
    }

    /// Same metadata, new samples. The samples are validated.
    pub fn with_values(&self, values: Vec<f64>) -> Result<TimeSeries> {
        let mut out = TimeSeries::new(values)?;
        out.sample_period = self.sample_period;
        out.start_time = self.start_time;
        Ok(out)
    }
}

impl Deref for TimeSeries {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.values
    }
}

impl AsRef<[f64]> for TimeSeries {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

pub(crate) fn offset_duration(samples: usize, period: f64) -> Duration {
    Duration::nanoseconds((samples as f64 * period * 1e9).round() as i64)
}

/// Least-squares line over `(index, value)` pairs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
}

impl LineFit {
    pub fn at(&self, index: f64) -> f64 {
        self.intercept + self.slope * index
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population mean and standard deviation.
pub(crate) fn mean_std(xs: &[f64]) -> (f64, f64) {
    let mu = mean(xs);
    let var = xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / xs.len() as f64;
    (mu, var.sqrt())
}

/// True when the spread is indistinguishable from rounding noise on the
/// sample magnitudes.
pub(crate) fn is_flat(xs: &[f64], std: f64) -> bool {
    let scale = xs.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    std <= scale * 1e-12
}

/// Z-normalizes into `out`. Flat input produces all zeros.
pub(crate) fn znormalize_into(xs: &[f64], out: &mut [f64]) {
    let (mu, sd) = mean_std(xs);
    if is_flat(xs, sd) {
        out.iter_mut().for_each(|o| *o = 0.0);
    } else {
        for (o, x) in out.iter_mut().zip(xs) {
            *o = (x - mu) / sd;
        }
    }
}

pub fn znormalize_values(xs: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; xs.len()];
    znormalize_into(xs, &mut out);
    out
}

/// Zero mean, unit population standard deviation. A flat series maps to
/// all zeros.
pub fn znormalize(s: &TimeSeries) -> Result<TimeSeries> {
    if s.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: s.len(),
        });
    }
    s.with_values(znormalize_values(s))
}

pub(crate) fn resample_values(xs: &[f64], target_len: usize) -> Vec<f64> {
    let len = xs.len();
    if target_len == len {
        return xs.to_vec();
    }
    let last = len - 1;
    let step_den = (target_len - 1) as f64;
    (0..target_len)
        .map(|k| {
            let pos = (k * last) as f64 / step_den;
            let i0 = pos.floor() as usize;
            if i0 >= last {
                xs[last]
            } else {
                let frac = pos - i0 as f64;
                xs[i0] + frac * (xs[i0 + 1] - xs[i0])
            }
        })
        .collect()
}

/// Linear interpolation onto `target_len` evenly spaced positions spanning
/// the original index range. Endpoints are preserved.
pub fn resample(s: &TimeSeries, target_len: usize) -> Result<TimeSeries> {
    if s.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: s.len(),
        });
    }
    if target_len < 2 {
        return Err(Error::degenerate(format!(
            "resample target length must be at least 2, got {target_len}"
        )));
    }
    s.with_values(resample_values(s, target_len))
}

pub(crate) fn moving_mean_values(xs: &[f64], w: usize) -> Vec<f64> {
    let half = w / 2;
    let last = xs.len() - 1;
    (0..xs.len())
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(last);
            // incremental form so a constant window averages to itself exactly
            xs[lo..=hi]
                .iter()
                .enumerate()
                .fold(0.0, |m, (k, x)| m + (x - m) / (k + 1) as f64)
        })
        .collect()
}

/// Centered moving mean; the window is truncated at the edges rather than
/// padded, so the output keeps the input length.
pub fn moving_mean(s: &TimeSeries, w: usize) -> Result<TimeSeries> {
    if w == 0 || w > s.len() {
        return Err(Error::degenerate(format!(
            "moving mean window {w} not in 1..={}",
            s.len()
        )));
    }
    s.with_values(moving_mean_values(s, w))
}

pub(crate) fn fit_line_values(ys: &[f64]) -> LineFit {
    let n = ys.len() as f64;
    let x_mean = (n - 1.0) / 2.0;
    let y_mean = mean(ys);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    let slope = sxy / sxx;
    LineFit {
        slope,
        intercept: y_mean - slope * x_mean,
    }
}

/// Ordinary least squares over `(index, value)`.
pub fn fit_line(s: &TimeSeries) -> Result<LineFit> {
    if s.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: s.len(),
        });
    }
    Ok(fit_line_values(s))
}
