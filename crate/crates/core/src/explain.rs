//! Pick the operator whose inverse best explains an anomaly and render the
//! result as a sentence.

use chrono::{NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::nn_search;
use crate::operators::{
    run_suite, select_best, OperatorContext, OperatorKind, OperatorParams, OperatorResult,
    OperatorSettings,
};
use crate::series::{offset_duration, TimeSeries};

pub const DEFAULT_WEAK_THRESHOLD: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExplainConfig {
    pub operators: OperatorSettings,
    /// Best improvement above this marks the explanation as weak.
    pub weak_threshold: f64,
    /// Anomaly threshold on the nearest-neighbor distance, if known.
    pub threshold: Option<f64>,
    /// Refuse windows at or below `threshold` instead of logging a warning.
    pub strict_threshold: bool,
}

impl Default for ExplainConfig {
    fn default() -> Self {
        ExplainConfig {
            operators: OperatorSettings::default(),
            weak_threshold: DEFAULT_WEAK_THRESHOLD,
            threshold: None,
            strict_threshold: true,
        }
    }
}

impl ExplainConfig {
    pub fn validate(&self) -> Result<()> {
        self.operators.validate()?;
        if !(self.weak_threshold.is_finite() && self.weak_threshold > 0.0) {
            return Err(Error::invalid(format!(
                "weak_threshold must be positive, got {}",
                self.weak_threshold
            )));
        }
        if let Some(t) = self.threshold {
            if !(t.is_finite() && t >= 0.0) {
                return Err(Error::invalid(format!("threshold must be non-negative, got {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Explanation {
    pub best: OperatorResult,
    /// One entry per enabled operator, in evaluation order.
    pub all_results: Vec<OperatorResult>,
    pub neighbor_location: usize,
    pub neighbor_distance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub neighbor_timestamp: Option<NaiveDateTime>,
    pub anomaly_location: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anomaly_timestamp: Option<NaiveDateTime>,
    pub window_length: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_period: Option<f64>,
    pub weak: bool,
    pub text: String,
}

/// Absolute time of sample `i`, when `s` carries both a start time and an
/// explicit sample period.
pub fn index_to_timestamp(i: usize, s: &TimeSeries) -> Option<NaiveDateTime> {
    let start = s.start_time()?;
    let period = s.explicit_sample_period()?;
    Some(start + offset_duration(i, period))
}

/// Inverse of [`index_to_timestamp`], rounding to the nearest sample.
pub fn timestamp_to_index(t: NaiveDateTime, s: &TimeSeries) -> Option<usize> {
    let start = s.start_time()?;
    let period = s.explicit_sample_period()?;
    let nanos = (t - start).num_nanoseconds()?;
    let i = (nanos as f64 / (period * 1e9)).round();
    (i >= 0.0).then_some(i as usize)
}

/// Explain a window that stands on its own (location 0 of itself).
pub fn explain(anomaly: &TimeSeries, train: &TimeSeries, cfg: &ExplainConfig) -> Result<Explanation> {
    explain_inner(anomaly, 0, anomaly.start_time(), train, cfg)
}

/// Explain the window `test[location..location + m]`.
pub fn explain_window(
    test: &TimeSeries,
    location: usize,
    m: usize,
    train: &TimeSeries,
    cfg: &ExplainConfig,
) -> Result<Explanation> {
    let window = test.slice(location..location + m)?;
    explain_inner(&window, location, index_to_timestamp(location, test), train, cfg)
}

fn explain_inner(
    anomaly: &TimeSeries,
    anomaly_location: usize,
    anomaly_timestamp: Option<NaiveDateTime>,
    train: &TimeSeries,
    cfg: &ExplainConfig,
) -> Result<Explanation> {
    cfg.validate()?;
    let m = anomaly.len();
    let nn = nn_search(anomaly, train)?;
    let threshold = cfg.threshold.unwrap_or(0.0);
    if nn.distance == 0.0 {
        return Err(Error::NotAnomalous {
            distance: 0.0,
            threshold,
        });
    }
    if cfg.threshold.is_some() && nn.distance <= threshold {
        if cfg.strict_threshold {
            return Err(Error::NotAnomalous {
                distance: nn.distance,
                threshold,
            });
        }
        log::warn!(
            "window at {anomaly_location} has neighbor distance {:.4}, not above threshold {threshold:.4}",
            nn.distance
        );
    }

    let neighbor = &train[nn.location..nn.location + m];
    let ctx = OperatorContext::new(anomaly, neighbor)?;
    let all_results = run_suite(&ctx, &cfg.operators)?;
    let best = select_best(&all_results).ok_or(Error::NoOperators)?.clone();
    let weak = best.improvement > cfg.weak_threshold;

    let mut e = Explanation {
        best,
        all_results,
        neighbor_location: nn.location,
        neighbor_distance: nn.distance,
        neighbor_timestamp: index_to_timestamp(nn.location, train),
        anomaly_location,
        anomaly_timestamp,
        window_length: m,
        sample_period: anomaly.explicit_sample_period(),
        weak,
        text: String::new(),
    };
    e.text = render_text(&e);
    Ok(e)
}

fn clock(t: NaiveDateTime) -> String {
    if t.second() == 0 && t.nanosecond() == 0 {
        t.format("%H:%M").to_string()
    } else {
        t.format("%H:%M:%S").to_string()
    }
}

fn moment(t: NaiveDateTime) -> String {
    format!("{} on {}", clock(t), t.format("%Y-%m-%d"))
}

fn reference(t: NaiveDateTime) -> String {
    if t.time() == chrono::NaiveTime::MIN {
        t.format("%Y-%m-%d").to_string()
    } else {
        format!("{} {}", t.format("%Y-%m-%d"), clock(t))
    }
}

/// Decimal with at most `digits` places and no trailing zeros.
fn trim(x: f64, digits: usize) -> String {
    let s = format!("{x:.digits$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Time of an offset inside the anomaly window, if the window is timed.
fn offset_time(e: &Explanation, offset: usize) -> Option<NaiveDateTime> {
    Some(e.anomaly_timestamp? + offset_duration(offset, e.sample_period?))
}

/// Deterministic sentence for an explanation.
pub fn render_text(e: &Explanation) -> String {
    let like = match e.neighbor_timestamp {
        Some(t) => reference(t),
        None => format!("training index {}", e.neighbor_location),
    };
    let cause = match &e.best.params {
        OperatorParams::UniformScaling { percent } => format!("{percent:+}% uniform scaling"),
        OperatorParams::Occlusion {
            location,
            length,
            subkind,
        } => match offset_time(e, *location) {
            Some(t) => format!("{subkind} at {}, length {length}", moment(t)),
            None => format!(
                "{subkind} of length {length}, from {}",
                e.anomaly_location + location
            ),
        },
        OperatorParams::Warping { max_deviation, .. } => match e.sample_period {
            Some(p) => format!("warping of up to {} seconds", trim(*max_deviation as f64 * p, 3)),
            None => format!(
                "warping of up to {}% of the window",
                trim(100.0 * *max_deviation as f64 / e.window_length as f64, 1)
            ),
        },
        OperatorParams::Smoothing { .. } => "noise (global)".to_string(),
        OperatorParams::LRFlip => "horizontal reversal".to_string(),
        OperatorParams::UDFlip => "vertical reversal".to_string(),
        OperatorParams::LinearTrend { rise_sigmas, .. } => {
            format!("a linear trend of {rise_sigmas:+.2}\u{3c3} over the window")
        }
        OperatorParams::PiecewiseNorm { split_index } => {
            let at = match offset_time(e, split_index + 1) {
                Some(t) => moment(t),
                None => (e.anomaly_location + split_index + 1).to_string(),
            };
            format!("a level/scale shift at {at}")
        }
    };
    let mut text = format!("Would be like {like}, except for {cause}");
    if e.weak {
        text.push_str(&format!(
            " (weak explanation, I = {})",
            trim(e.best.improvement, 3)
        ));
    }
    text
}

/// Kinds that tie with the best improvement, in priority order.
pub fn runners_up(e: &Explanation) -> Vec<OperatorKind> {
    let mut kinds: Vec<OperatorKind> = e
        .all_results
        .iter()
        .filter(|r| r.improvement == e.best.improvement && r.operator_kind != e.best.operator_kind)
        .map(|r| r.operator_kind)
        .collect();
    kinds.sort_by_key(|k| k.priority());
    kinds
}
