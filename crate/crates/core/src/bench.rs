//! Benchmark harnesses: occlusion recovery on an exemplar collection, and
//! the end-to-end detect-then-explain confusion matrix.
//!
//! Trial `k` draws from `ChaCha8Rng::seed_from_u64(seed)` on stream `k`, and
//! trials are tallied in index order, so reports do not depend on how many
//! threads ran them.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corrupt::{corrupt, CorruptionKind, CorruptionSpec};
use crate::detect::{find_anomalies, train_threshold, ThresholdMode};
use crate::error::{Error, Result};
use crate::explain::{explain_window, ExplainConfig};
use crate::metrics::{oed, znorm_euclidean};
use crate::operators::{OcclusionSubkind, OperatorKind};
use crate::series::{znormalize_values, TimeSeries};
use crate::synth::{generate, SourceFamily, SourceSettings};

fn trial_rng(seed: u64, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    rng
}

// ---------------------------------------------------------------------------
// Occlusion recovery

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryConfig {
    pub trials: usize,
    pub seed: u64,
    pub kinds: Vec<OcclusionSubkind>,
    /// Injection magnitude range in standard deviations of the z-normalized
    /// exemplar.
    pub magnitude: (f64, f64),
    /// Inclusive range of injected lengths; `None` means `0..=m/4`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lengths: Option<(usize, usize)>,
    /// Errors within this many samples count as recovered.
    pub tolerance: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        RecoveryConfig {
            trials: 200,
            seed: 0,
            kinds: vec![OcclusionSubkind::Noise, OcclusionSubkind::Spike, OcclusionSubkind::Dropout],
            magnitude: (4.0, 6.0),
            lengths: None,
            tolerance: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryTrial {
    pub exemplar: usize,
    pub neighbor: usize,
    pub kind: OcclusionSubkind,
    pub magnitude: f64,
    pub location: usize,
    pub length: usize,
    pub found_location: usize,
    pub found_length: usize,
}

impl RecoveryTrial {
    pub fn location_error(&self) -> i64 {
        self.found_location as i64 - self.location as i64
    }

    pub fn length_error(&self) -> i64 {
        self.found_length as i64 - self.length as i64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    pub trials: Vec<RecoveryTrial>,
    /// Location error counts over trials with a non-empty injection.
    pub location_errors: BTreeMap<i64, usize>,
    pub length_errors: BTreeMap<i64, usize>,
    pub tolerance: usize,
    /// Fraction of non-empty injections located within `tolerance`.
    pub location_within: f64,
    /// Fraction of all trials whose length is within `tolerance`.
    pub length_within: f64,
    pub zero_length_trials: usize,
    /// Fraction of empty injections recovered as length at most 2.
    pub zero_length_recovered: f64,
}

fn fraction(hits: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        hits as f64 / total as f64
    }
}

/// For each trial: corrupt a z-normalized exemplar, then ask `oed` where the
/// damage is, measured against the exemplar's nearest other member.
pub fn occlusion_recovery_bench(exemplars: &[Vec<f64>], cfg: &RecoveryConfig) -> Result<RecoveryReport> {
    if exemplars.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: exemplars.len(),
        });
    }
    let m = exemplars[0].len();
    if exemplars.iter().any(|e| e.len() != m) {
        return Err(Error::invalid("exemplars must share one length"));
    }
    if m < 8 {
        return Err(Error::invalid(format!("exemplar length must be at least 8, got {m}")));
    }
    if cfg.trials == 0 || cfg.kinds.is_empty() {
        return Err(Error::invalid("need at least one trial and one kind"));
    }
    let (lo, hi) = cfg.magnitude;
    if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo <= hi) {
        return Err(Error::invalid(format!("bad magnitude range {lo}..{hi}")));
    }
    let (len_lo, len_hi) = cfg.lengths.unwrap_or((0, m / 4));
    if len_lo > len_hi || m / 2 + len_hi > m {
        return Err(Error::invalid(format!("bad length range {len_lo}..={len_hi}")));
    }

    let z: Vec<Vec<f64>> = exemplars.iter().map(|e| znormalize_values(e)).collect();
    let neighbors: Vec<usize> = (0..z.len())
        .into_par_iter()
        .map(|i| {
            let mut best = (f64::INFINITY, usize::MAX);
            for (j, other) in z.iter().enumerate() {
                if j != i {
                    let d = znorm_euclidean(&z[i], other).expect("equal lengths");
                    if d < best.0 {
                        best = (d, j);
                    }
                }
            }
            best.1
        })
        .collect();

    let trials: Vec<RecoveryTrial> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = trial_rng(cfg.seed, k);
            let exemplar = rng.random_range(0..z.len());
            let kind = cfg.kinds[rng.random_range(0..cfg.kinds.len())];
            let location = rng.random_range(0..m / 2);
            let length = rng.random_range(len_lo..=len_hi);
            let magnitude = if lo == hi { lo } else { rng.random_range(lo..hi) };
            let mut a = z[exemplar].clone();
            let region = &mut a[location..location + length];
            match kind {
                OcclusionSubkind::Spike => region.iter_mut().for_each(|v| *v += magnitude),
                OcclusionSubkind::Dropout => region.iter_mut().for_each(|v| *v -= magnitude),
                OcclusionSubkind::Noise => {
                    if magnitude > 0.0 {
                        let noise = Normal::new(0.0, magnitude).expect("positive std");
                        region.iter_mut().for_each(|v| *v += noise.sample(&mut rng));
                    }
                }
            }
            let neighbor = neighbors[exemplar];
            let found = oed(&z[neighbor], &a)?;
            Ok(RecoveryTrial {
                exemplar,
                neighbor,
                kind,
                magnitude,
                location,
                length,
                found_location: found.location,
                found_length: found.length,
            })
        })
        .collect::<Result<_>>()?;

    let tol = cfg.tolerance as i64;
    let mut location_errors = BTreeMap::new();
    let mut length_errors = BTreeMap::new();
    let (mut located, mut nonzero, mut sized, mut zero, mut zero_ok) = (0, 0, 0, 0, 0);
    for t in &trials {
        *length_errors.entry(t.length_error()).or_insert(0) += 1;
        sized += usize::from(t.length_error().abs() <= tol);
        if t.length == 0 {
            zero += 1;
            zero_ok += usize::from(t.found_length <= 2);
        } else {
            nonzero += 1;
            *location_errors.entry(t.location_error()).or_insert(0) += 1;
            located += usize::from(t.location_error().abs() <= tol);
        }
    }
    Ok(RecoveryReport {
        location_within: fraction(located, nonzero),
        length_within: fraction(sized, trials.len()),
        zero_length_trials: zero,
        zero_length_recovered: fraction(zero_ok, zero),
        location_errors,
        length_errors,
        tolerance: cfg.tolerance,
        trials,
    })
}

fn histogram_text(out: &mut String, title: &str, h: &BTreeMap<i64, usize>) {
    let _ = writeln!(out, "{title}");
    let peak = h.values().copied().max().unwrap_or(1).max(1);
    for (err, count) in h {
        let bar = "#".repeat((count * 40).div_ceil(peak));
        let _ = writeln!(out, "  {err:>+4} {count:>5} {bar}");
    }
}

impl RecoveryReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "trials: {}", self.trials.len());
        let _ = writeln!(
            out,
            "location within +/-{}: {:.1}%",
            self.tolerance,
            100.0 * self.location_within
        );
        let _ = writeln!(
            out,
            "length within +/-{}: {:.1}%",
            self.tolerance,
            100.0 * self.length_within
        );
        let _ = writeln!(
            out,
            "empty injections recovered as length <= 2: {:.1}% of {}",
            100.0 * self.zero_length_recovered,
            self.zero_length_trials
        );
        histogram_text(&mut out, "location error (found - true):", &self.location_errors);
        histogram_text(&mut out, "length error (found - true):", &self.length_errors);
        out
    }
}

// ---------------------------------------------------------------------------
// Detect-then-explain benchmark

/// Where anomaly-free series come from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Synthetic(SourceFamily),
    /// A recorded series; each trial takes a random stretch of it.
    Recorded { name: String, values: Arc<Vec<f64>> },
}

impl Source {
    pub fn name(&self) -> &str {
        match self {
            Source::Synthetic(f) => f.name(),
            Source::Recorded { name, .. } => name,
        }
    }
}

/// Which window of a detected trial gets explained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExplainTarget {
    /// The highest-scoring detected window that overlaps the injection.
    #[default]
    Candidate,
    /// The window of length m aligned with the injected region.
    Injected,
}

/// Magnitude range drawn uniformly for one class. Units follow
/// [`CorruptionSpec::magnitude`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeRange {
    pub min: f64,
    pub max: f64,
}

impl MagnitudeRange {
    pub const fn new(min: f64, max: f64) -> Self {
        MagnitudeRange { min, max }
    }
}

/// Default magnitude for each class, for a region of `region` samples.
pub fn default_magnitude(kind: CorruptionKind, region: usize) -> MagnitudeRange {
    let r = region as f64;
    match kind {
        CorruptionKind::Spike => MagnitudeRange::new(4.0, 8.0),
        CorruptionKind::Dropout | CorruptionKind::NoisyRegion => MagnitudeRange::new(3.0, 5.0),
        CorruptionKind::NoisyGlobal => MagnitudeRange::new(0.3, 0.6),
        CorruptionKind::Step | CorruptionKind::LinearTrend => MagnitudeRange::new(2.0, 4.0),
        CorruptionKind::Warp => MagnitudeRange::new(0.05 * r, 0.15 * r),
        CorruptionKind::LRFlip | CorruptionKind::UDFlip | CorruptionKind::UniformScale => {
            MagnitudeRange::new(0.0, 0.0)
        }
    }
}

/// The eight classes of the published confusion table, in its row order.
pub const TABLE_CLASSES: [CorruptionKind; 8] = [
    CorruptionKind::LRFlip,
    CorruptionKind::LinearTrend,
    CorruptionKind::UniformScale,
    CorruptionKind::NoisyGlobal,
    CorruptionKind::UDFlip,
    CorruptionKind::Step,
    CorruptionKind::Warp,
    CorruptionKind::Spike,
];

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub classes: Vec<CorruptionKind>,
    pub trials_per_class: usize,
    pub n: usize,
    pub n_train: usize,
    pub window: usize,
    /// Injected region length; `None` means `window`.
    pub region_length: Option<usize>,
    pub seed: u64,
    pub threshold_mode: ThresholdMode,
    /// Fixed detection threshold instead of one fit per trial.
    pub threshold: Option<f64>,
    pub explain: ExplainConfig,
    pub target: ExplainTarget,
    pub sources: Vec<Source>,
    pub source_settings: SourceSettings,
    /// Per-class overrides of [`default_magnitude`].
    pub magnitudes: BTreeMap<CorruptionKind, MagnitudeRange>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            classes: TABLE_CLASSES.to_vec(),
            trials_per_class: 50,
            n: 4000,
            n_train: 1500,
            window: 100,
            region_length: None,
            seed: 0,
            threshold_mode: ThresholdMode::default(),
            threshold: None,
            explain: ExplainConfig::default(),
            target: ExplainTarget::default(),
            sources: SourceFamily::ALL.into_iter().map(Source::Synthetic).collect(),
            source_settings: SourceSettings::default(),
            magnitudes: BTreeMap::new(),
        }
    }
}

impl BenchConfig {
    pub fn region(&self) -> usize {
        self.region_length.unwrap_or(self.window)
    }

    pub fn magnitude(&self, kind: CorruptionKind) -> MagnitudeRange {
        self.magnitudes
            .get(&kind)
            .copied()
            .unwrap_or_else(|| default_magnitude(kind, self.region()))
    }

    /// Samples kept free after an injected region, so that uniform scaling
    /// and warping have data to draw on.
    fn tail_slack(&self) -> usize {
        self.region().div_ceil(4)
    }

    /// Largest admissible injection start.
    fn last_location(&self) -> usize {
        self.n - self.region() - self.tail_slack()
    }

    pub fn validate(&self) -> Result<()> {
        self.explain.validate()?;
        let m = self.window;
        if self.classes.is_empty() || self.trials_per_class == 0 {
            return Err(Error::Config("need at least one class and one trial".into()));
        }
        if self.sources.is_empty() {
            return Err(Error::Config("need at least one source".into()));
        }
        if m < 4 || self.n_train < 2 * m {
            return Err(Error::Config(format!(
                "training part ({}) must hold at least two windows of {m}",
                self.n_train
            )));
        }
        let region = self.region();
        if region < 2 || region > self.n {
            return Err(Error::Config(format!("region length {region} out of range")));
        }
        if self.n < self.n_train + region + self.tail_slack() + 2 || self.n - self.n_train < m {
            return Err(Error::Config(format!(
                "n = {} leaves no room to inject {region} samples after n_train = {}",
                self.n, self.n_train
            )));
        }
        if self.last_location() <= self.n_train {
            return Err(Error::Config("no admissible injection location".into()));
        }
        for &kind in &self.classes {
            let r = self.magnitude(kind);
            if !(r.min.is_finite() && r.max.is_finite() && 0.0 <= r.min && r.min <= r.max) {
                return Err(Error::Config(format!("bad magnitude range for {kind}")));
            }
            if kind.uses_magnitude() && r.max <= 0.0 {
                return Err(Error::Config(format!("{kind} needs a positive magnitude")));
            }
            if kind == CorruptionKind::Warp && r.max >= crate::corrupt::max_warp_displacement(region) {
                return Err(Error::Config(format!(
                    "warp displacement {} is not monotone over {region} samples",
                    r.max
                )));
            }
        }
        for s in &self.sources {
            if let Source::Recorded { name, values } = s {
                if values.len() < self.n {
                    return Err(Error::Config(format!(
                        "source {name} has {} samples, need {}",
                        values.len(),
                        self.n
                    )));
                }
            }
        }
        if let Some(t) = self.threshold {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("threshold must be positive, got {t}")));
            }
        }
        Ok(())
    }

    /// Confusion-table columns: the classes' operators in row order, then any
    /// other enabled operator.
    pub fn columns(&self) -> Vec<OperatorKind> {
        let mut cols: Vec<OperatorKind> = Vec::new();
        let extra = self.explain.operators.enabled.iter().copied();
        for op in self.classes.iter().map(|c| c.expected_operator()).chain(extra) {
            if !cols.contains(&op) {
                cols.push(op);
            }
        }
        cols
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub class: CorruptionKind,
    pub source: String,
    /// Injection start in the full series.
    pub location: usize,
    pub magnitude: f64,
    pub threshold: f64,
    pub detected: bool,
    /// Start of the explained window in the full series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explained_location: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub explained: Option<OperatorKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub improvement: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub trials_per_class: usize,
    pub classes: Vec<CorruptionKind>,
    pub columns: Vec<OperatorKind>,
    /// `confusion[class][column]` counts detected trials.
    pub confusion: Vec<Vec<usize>>,
    pub missed_per_class: Vec<usize>,
    pub detected: usize,
    pub missed: usize,
    pub per_class_accuracy: Vec<f64>,
    /// Correct explanations over detected trials.
    pub overall_accuracy: f64,
    pub detection_rate: f64,
    pub trials: Vec<TrialRecord>,
}

impl BenchReport {
    /// Off-diagonal cells with a non-zero count, largest first (ties in
    /// table order).
    pub fn top_confusions(&self) -> Vec<(CorruptionKind, OperatorKind, usize)> {
        let mut cells = Vec::new();
        for (r, &class) in self.classes.iter().enumerate() {
            for (c, &op) in self.columns.iter().enumerate() {
                let count = self.confusion[r][c];
                if count > 0 && op != class.expected_operator() {
                    cells.push((class, op, count));
                }
            }
        }
        cells.sort_by_key(|c| std::cmp::Reverse(c.2));
        cells
    }

    /// Plain-text table with one row per injected class and one column per
    /// explaining operator.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let w = 15;
        let _ = write!(out, "{:<w$}", "injected");
        for c in &self.columns {
            let _ = write!(out, "{:>w$}", c.name());
        }
        let _ = writeln!(out, "{:>8}{:>10}", "missed", "accuracy");
        for (r, class) in self.classes.iter().enumerate() {
            let _ = write!(out, "{:<w$}", class.name());
            for count in &self.confusion[r] {
                let _ = write!(out, "{count:>w$}");
            }
            let _ = writeln!(
                out,
                "{:>8}{:>9.1}%",
                self.missed_per_class[r],
                100.0 * self.per_class_accuracy[r]
            );
        }
        let total = self.detected + self.missed;
        let _ = writeln!(
            out,
            "detected {}/{} ({:.1}%), explained correctly {:.2}%",
            self.detected,
            total,
            100.0 * self.detection_rate,
            100.0 * self.overall_accuracy
        );
        out
    }
}

fn draw_source(cfg: &BenchConfig, rng: &mut ChaCha8Rng) -> (String, Vec<f64>) {
    let source = &cfg.sources[rng.random_range(0..cfg.sources.len())];
    let values = match source {
        Source::Synthetic(fam) => generate(*fam, cfg.n, &cfg.source_settings, rng),
        Source::Recorded { values, .. } => {
            let start = rng.random_range(0..=values.len() - cfg.n);
            values[start..start + cfg.n].to_vec()
        }
    };
    (source.name().to_string(), values)
}

fn run_trial(cfg: &BenchConfig, class: CorruptionKind, trial: usize) -> Result<TrialRecord> {
    let mut rng = trial_rng(cfg.seed, trial);
    let (source, values) = draw_source(cfg, &mut rng);
    let m = cfg.window;
    let region = cfg.region();
    let location = rng.random_range(cfg.n_train + 1..=cfg.last_location());
    let range = cfg.magnitude(class);
    let magnitude = if range.min == range.max {
        range.min
    } else {
        rng.random_range(range.min..range.max)
    };
    let spec = CorruptionSpec {
        kind: class,
        location,
        length: region,
        magnitude,
        seed: rng.random(),
    };
    let host = TimeSeries::new(values)?;
    let (series, _) = corrupt(&host, &spec)?;
    let train = series.slice(0..cfg.n_train)?;
    let test = series.slice(cfg.n_train..series.len())?;
    let threshold = match cfg.threshold {
        Some(t) => t,
        None => train_threshold(&train, m, cfg.threshold_mode)?,
    };

    let mut record = TrialRecord {
        class,
        source,
        location,
        magnitude,
        threshold,
        detected: false,
        explained_location: None,
        explained: None,
        improvement: None,
        error: None,
    };
    let r0 = location - cfg.n_train;
    let overlapping = find_anomalies(&test, &train, m, threshold)?
        .into_iter()
        .filter(|c| c.location < r0 + region && r0 < c.location + m)
        .max_by(|a, b| a.score.total_cmp(&b.score).then(b.location.cmp(&a.location)));
    let Some(candidate) = overlapping else {
        return Ok(record);
    };
    record.detected = true;
    let start = match cfg.target {
        ExplainTarget::Candidate => candidate.location,
        ExplainTarget::Injected => (r0 + region / 2).saturating_sub(m / 2).min(test.len() - m),
    };
    record.explained_location = Some(start + cfg.n_train);
    match explain_window(&test, start, m, &train, &cfg.explain) {
        Ok(e) => {
            record.explained = Some(e.best.operator_kind);
            record.improvement = Some(e.best.improvement);
        }
        Err(e) => record.error = Some(e.to_string()),
    }
    Ok(record)
}

/// Inject, detect and explain `trials_per_class` corruptions of each class.
/// Trials whose injection is not detected, or whose explanation fails,
/// count as missed.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchReport> {
    cfg.validate()?;
    let per = cfg.trials_per_class;
    let trials: Vec<TrialRecord> = (0..cfg.classes.len() * per)
        .into_par_iter()
        .map(|k| run_trial(cfg, cfg.classes[k / per], k))
        .collect::<Result<_>>()?;

    let columns = cfg.columns();
    let k = cfg.classes.len();
    let mut confusion = vec![vec![0usize; columns.len()]; k];
    let mut missed_per_class = vec![0usize; k];
    for (i, t) in trials.iter().enumerate() {
        let row = i / per;
        match t.explained {
            Some(op) => {
                let col = columns.iter().position(|&c| c == op).expect("enabled operator");
                confusion[row][col] += 1;
            }
            None => missed_per_class[row] += 1,
        }
    }
    let mut correct = 0;
    let per_class_accuracy = cfg
        .classes
        .iter()
        .enumerate()
        .map(|(r, class)| {
            let col = columns.iter().position(|&c| c == class.expected_operator());
            let hits = col.map_or(0, |c| confusion[r][c]);
            correct += hits;
            fraction(hits, confusion[r].iter().sum())
        })
        .collect();
    let missed: usize = missed_per_class.iter().sum();
    let detected = trials.len() - missed;
    Ok(BenchReport {
        seed: cfg.seed,
        trials_per_class: per,
        classes: cfg.classes.clone(),
        columns,
        confusion,
        missed_per_class,
        detected,
        missed,
        per_class_accuracy,
        overall_accuracy: fraction(correct, detected),
        detection_rate: fraction(detected, trials.len()),
        trials,
    })
}
