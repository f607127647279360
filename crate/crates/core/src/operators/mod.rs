//! The counterfactual operators. Each one searches its own parameter space
//! for the edit that brings the anomaly closest to its nearest neighbor and
//! reports the improvement score: post-operator distance over the original
//! z-normalized distance.

mod occlusion;
mod pointwise;
mod scaling;
mod trend;
mod warping;

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{sq_dist, DEFAULT_MIN_SEGMENT};
use crate::series::znormalize_values;

pub use occlusion::{classify_occlusion, OcclusionOperator};
pub use pointwise::{LrFlipOperator, PiecewiseNormOperator, SmoothingOperator, UdFlipOperator};
pub use scaling::UniformScalingOperator;
pub use trend::LinearTrendOperator;
pub use warping::WarpingOperator;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OperatorKind {
    UniformScaling,
    Occlusion,
    Warping,
    Smoothing,
    LRFlip,
    UDFlip,
    LinearTrend,
    PiecewiseNorm,
}

impl OperatorKind {
    pub const ALL: [OperatorKind; 8] = [
        OperatorKind::UniformScaling,
        OperatorKind::Occlusion,
        OperatorKind::Warping,
        OperatorKind::Smoothing,
        OperatorKind::LRFlip,
        OperatorKind::UDFlip,
        OperatorKind::LinearTrend,
        OperatorKind::PiecewiseNorm,
    ];

    /// Tie-break rank when two operators reach the same improvement; local,
    /// specific edits come before global ones.
    pub fn priority(self) -> u8 {
        match self {
            OperatorKind::Occlusion => 0,
            OperatorKind::UniformScaling => 1,
            OperatorKind::Warping => 2,
            OperatorKind::PiecewiseNorm => 3,
            OperatorKind::LinearTrend => 4,
            OperatorKind::Smoothing => 5,
            OperatorKind::LRFlip => 6,
            OperatorKind::UDFlip => 7,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::UniformScaling => "UniformScaling",
            OperatorKind::Occlusion => "Occlusion",
            OperatorKind::Warping => "Warping",
            OperatorKind::Smoothing => "Smoothing",
            OperatorKind::LRFlip => "LRFlip",
            OperatorKind::UDFlip => "UDFlip",
            OperatorKind::LinearTrend => "LinearTrend",
            OperatorKind::PiecewiseNorm => "PiecewiseNorm",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OperatorKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::invalid(format!("unknown operator {s:?}")))
    }
}

/// What the occluded region looks like relative to the rest of the anomaly.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OcclusionSubkind {
    Noise,
    Spike,
    Dropout,
}

impl fmt::Display for OcclusionSubkind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OcclusionSubkind::Noise => "Noise",
            OcclusionSubkind::Spike => "Spike",
            OcclusionSubkind::Dropout => "Dropout",
        })
    }
}

/// The winning parameterization of one operator. All values are invariant
/// to positive scaling and offsetting of the inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "operator")]
pub enum OperatorParams {
    UniformScaling {
        /// Positive: the anomaly matches when lengthened by this percent.
        /// Negative: it matches when shortened.
        percent: i32,
    },
    Occlusion {
        location: usize,
        length: usize,
        subkind: OcclusionSubkind,
    },
    Warping {
        band: usize,
        max_deviation: usize,
        path_length: usize,
    },
    Smoothing {
        window: usize,
    },
    LRFlip,
    UDFlip,
    LinearTrend {
        /// Slope added to the anomaly, in anomaly standard deviations per
        /// sample.
        slope_sigmas: f64,
        /// Total rise of the trend the anomaly carries (the negation of the
        /// correction) over the window, in standard deviations.
        rise_sigmas: f64,
    },
    PiecewiseNorm {
        /// Last index of the left segment.
        split_index: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorResult {
    pub operator_kind: OperatorKind,
    /// Post-operator distance divided by the original distance.
    pub improvement: f64,
    /// The post-operator distance (numerator of `improvement`).
    pub distance: f64,
    pub params: OperatorParams,
    /// Z-normalized post-operator anomaly, absent for operators that change
    /// the distance rather than the series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub transformed: Option<Vec<f64>>,
}

/// Search bounds and switches for the built-in operators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperatorSettings {
    pub enabled: Vec<OperatorKind>,
    pub scaling_min: f64,
    pub scaling_max: f64,
    pub dtw_band_fraction: f64,
    pub smoothing_window: usize,
    pub pnd_min_seg: usize,
    /// Largest trend searched, as total drift in standard deviations.
    pub trend_max_sigmas: f64,
    /// Odd number of evenly spaced slopes searched.
    pub trend_grid_points: usize,
}

impl Default for OperatorSettings {
    fn default() -> Self {
        OperatorSettings {
            enabled: OperatorKind::ALL.to_vec(),
            scaling_min: 0.80,
            scaling_max: 1.20,
            dtw_band_fraction: 0.10,
            smoothing_window: 3,
            pnd_min_seg: DEFAULT_MIN_SEGMENT,
            trend_max_sigmas: 4.0,
            trend_grid_points: 201,
        }
    }
}

impl OperatorSettings {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(0.5..=1.0).contains(&self.scaling_min) {
            return bad(format!("scaling_min {} not in [0.5, 1.0]", self.scaling_min));
        }
        if !(1.0..=2.0).contains(&self.scaling_max) {
            return bad(format!("scaling_max {} not in [1.0, 2.0]", self.scaling_max));
        }
        if !(0.0..=1.0).contains(&self.dtw_band_fraction) {
            return bad(format!(
                "dtw_band_fraction {} not in [0, 1]",
                self.dtw_band_fraction
            ));
        }
        if self.smoothing_window == 0 {
            return bad("smoothing_window must be positive".into());
        }
        if self.pnd_min_seg < 2 {
            return bad(format!("pnd_min_seg {} must be at least 2", self.pnd_min_seg));
        }
        if !(self.trend_max_sigmas.is_finite() && self.trend_max_sigmas >= 0.0) {
            return bad(format!(
                "trend_max_sigmas {} must be non-negative",
                self.trend_max_sigmas
            ));
        }
        if self.trend_grid_points < 3 || self.trend_grid_points % 2 == 0 {
            return bad(format!(
                "trend_grid_points {} must be odd and at least 3",
                self.trend_grid_points
            ));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = self.enabled.iter().find(|k| !seen.insert(**k)) {
            return bad(format!("operator {dup} enabled twice"));
        }
        Ok(())
    }
}

/// Inputs shared by every operator: the anomaly, its fixed nearest neighbor
/// and the original distance between them.
#[derive(Debug, Clone)]
pub struct OperatorContext {
    pub anomaly: Vec<f64>,
    pub neighbor: Vec<f64>,
    pub z_anomaly: Vec<f64>,
    pub z_neighbor: Vec<f64>,
    /// Z-normalized Euclidean distance between anomaly and neighbor.
    pub base_distance: f64,
}

impl OperatorContext {
    pub fn new(anomaly: &[f64], neighbor: &[f64]) -> Result<Self> {
        if anomaly.len() != neighbor.len() {
            return Err(Error::LengthMismatch {
                left: anomaly.len(),
                right: neighbor.len(),
            });
        }
        if anomaly.len() < 4 {
            return Err(Error::TooShort {
                needed: 4,
                got: anomaly.len(),
            });
        }
        if let Some(index) = anomaly.iter().chain(neighbor).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: index % anomaly.len(),
            });
        }
        let z_anomaly = znormalize_values(anomaly);
        let z_neighbor = znormalize_values(neighbor);
        let base_distance = sq_dist(&z_anomaly, &z_neighbor).sqrt();
        Ok(OperatorContext {
            anomaly: anomaly.to_vec(),
            neighbor: neighbor.to_vec(),
            z_anomaly,
            z_neighbor,
            base_distance,
        })
    }

    pub fn len(&self) -> usize {
        self.anomaly.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anomaly.is_empty()
    }

    /// `distance / base_distance`; a zero base only arises for an anomaly
    /// identical to its neighbor, where a zero distance means no change.
    pub fn improvement(&self, distance: f64) -> f64 {
        if self.base_distance > 0.0 {
            distance / self.base_distance
        } else if distance == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    /// Distance from a z-normalized candidate to the z-normalized neighbor.
    pub(crate) fn distance_to_neighbor(&self, z_candidate: &[f64]) -> f64 {
        sq_dist(z_candidate, &self.z_neighbor).sqrt()
    }
}

/// One counterfactual edit family. New operators implement this and can be
/// run alongside the built-ins.
pub trait Operator: Send + Sync {
    fn kind(&self) -> OperatorKind;
    fn apply(&self, ctx: &OperatorContext, settings: &OperatorSettings) -> Result<OperatorResult>;
}

pub fn builtin(kind: OperatorKind) -> &'static dyn Operator {
    match kind {
        OperatorKind::UniformScaling => &UniformScalingOperator,
        OperatorKind::Occlusion => &OcclusionOperator,
        OperatorKind::Warping => &WarpingOperator,
        OperatorKind::Smoothing => &SmoothingOperator,
        OperatorKind::LRFlip => &LrFlipOperator,
        OperatorKind::UDFlip => &UdFlipOperator,
        OperatorKind::LinearTrend => &LinearTrendOperator,
        OperatorKind::PiecewiseNorm => &PiecewiseNormOperator,
    }
}

/// Runs a single built-in operator.
pub fn apply_operator(
    kind: OperatorKind,
    anomaly: &[f64],
    neighbor: &[f64],
    settings: &OperatorSettings,
) -> Result<OperatorResult> {
    let ctx = OperatorContext::new(anomaly, neighbor)?;
    builtin(kind).apply(&ctx, settings)
}

/// Evaluates every enabled operator. Results come back in the order of
/// `settings.enabled` whatever the evaluation order.
pub fn run_suite(ctx: &OperatorContext, settings: &OperatorSettings) -> Result<Vec<OperatorResult>> {
    if settings.enabled.is_empty() {
        return Err(Error::NoOperators);
    }
    settings
        .enabled
        .par_iter()
        .map(|&k| builtin(k).apply(ctx, settings))
        .collect()
}

/// Smallest improvement, ties broken by [`OperatorKind::priority`].
pub fn select_best(results: &[OperatorResult]) -> Option<&OperatorResult> {
    results.iter().min_by(|a, b| {
        a.improvement
            .total_cmp(&b.improvement)
            .then(a.operator_kind.priority().cmp(&b.operator_kind.priority()))
    })
}

#[cfg(test)]
pub(crate) mod test_support {
    /// A smooth, asymmetric periodic exemplar.
    pub fn exemplar(len: usize, period: f64) -> Vec<f64> {
        (0..len)
            .map(|i| {
                let p = std::f64::consts::TAU * i as f64 / period;
                p.sin() + 0.6 * (2.0 * p + 0.9).sin() + 0.3 * (3.0 * p + 2.1).sin()
            })
            .collect()
    }

    pub fn std(xs: &[f64]) -> f64 {
        crate::series::mean_std(xs).1
    }
}
