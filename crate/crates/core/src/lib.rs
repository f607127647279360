//! Counterfactual explanations for time series anomalies.
//!
//! An anomalous window is compared with its nearest neighbor in anomaly-free
//! training data, then each of eight operators (uniform scaling, occlusion,
//! warping, smoothing, reversal, negation, linear trend and piecewise
//! normalization) searches for the edit that brings the two closest. The
//! operator with the lowest ratio of new to original distance names the
//! likely cause: "would be like <neighbor>, except for <edit>".
//!
//! The crate also ships the discord detector that finds such windows,
//! corruption generators with known ground truth, and the benchmark
//! harnesses that score the whole pipeline.

pub mod bench;
pub mod config;
pub mod corrupt;
pub mod detect;
pub mod error;
pub mod explain;
pub mod io;
pub mod metrics;
pub mod operators;
pub mod series;
pub mod synth;

pub use config::Config;
pub use corrupt::{corrupt, CorruptionKind, CorruptionSpec, GroundTruth};
pub use detect::{find_anomalies, AnomalyCandidate, MatrixProfile, ThresholdMode};
pub use error::{Error, Result};
pub use explain::{explain, explain_window, render_text, ExplainConfig, Explanation};
pub use metrics::{NeighborMatch, OcclusionResult, SplitResult, WarpResult};
pub use operators::{OcclusionSubkind, OperatorKind, OperatorParams, OperatorResult, OperatorSettings};
pub use series::TimeSeries;
