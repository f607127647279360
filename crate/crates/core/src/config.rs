//! Flat TOML configuration. Every key is optional; unknown keys are an
//! error.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bench::{BenchConfig, ExplainTarget, Source, TABLE_CLASSES};
use crate::corrupt::CorruptionKind;
use crate::detect::ThresholdMode;
use crate::error::{Error, Result};
use crate::explain::{ExplainConfig, DEFAULT_WEAK_THRESHOLD};
use crate::operators::{OperatorKind, OperatorSettings};
use crate::synth::SourceFamily;

pub const DEFAULT_WINDOW: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    /// Subsequence length m.
    pub window: usize,
    pub threshold_mode: ThresholdMode,
    /// Fixed detection threshold; overrides `threshold_mode` when set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    pub operators: Vec<OperatorKind>,
    pub scaling_min: f64,
    pub scaling_max: f64,
    pub dtw_band_fraction: f64,
    pub smoothing_window: usize,
    pub pnd_min_seg: usize,
    pub trend_max_sigmas: f64,
    pub trend_grid_points: usize,
    pub weak_threshold: f64,
    pub seed: u64,

    pub bench_n: usize,
    pub bench_n_train: usize,
    pub bench_trials_per_class: usize,
    pub bench_classes: Vec<CorruptionKind>,
    pub bench_sources: Vec<SourceFamily>,
    /// CSV files used as additional anomaly-free sources, relative to the
    /// config file.
    pub bench_source_files: Vec<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bench_region_length: Option<usize>,
    pub bench_explain_target: ExplainTarget,
}

impl Default for Config {
    fn default() -> Self {
        let ops = OperatorSettings::default();
        let bench = BenchConfig::default();
        Config {
            window: DEFAULT_WINDOW,
            threshold_mode: ThresholdMode::default(),
            threshold: None,
            operators: ops.enabled,
            scaling_min: ops.scaling_min,
            scaling_max: ops.scaling_max,
            dtw_band_fraction: ops.dtw_band_fraction,
            smoothing_window: ops.smoothing_window,
            pnd_min_seg: ops.pnd_min_seg,
            trend_max_sigmas: ops.trend_max_sigmas,
            trend_grid_points: ops.trend_grid_points,
            weak_threshold: DEFAULT_WEAK_THRESHOLD,
            seed: 0,
            bench_n: bench.n,
            bench_n_train: bench.n_train,
            bench_trials_per_class: bench.trials_per_class,
            bench_classes: TABLE_CLASSES.to_vec(),
            bench_sources: SourceFamily::ALL.to_vec(),
            bench_source_files: Vec::new(),
            bench_region_length: None,
            bench_explain_target: ExplainTarget::default(),
        }
    }
}

impl Config {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Load and validate a config file. Relative source files are resolved
    /// against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Config::from_toml_str(&text)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for f in &mut cfg.bench_source_files {
            if f.is_relative() {
                *f = base.join(&*f);
            }
        }
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        if self.window < 4 {
            return Err(Error::Config(format!("window {} must be at least 4", self.window)));
        }
        if let Some(t) = self.threshold {
            if !(t.is_finite() && t > 0.0) {
                return Err(Error::Config(format!("threshold {t} must be positive")));
            }
        }
        if self.operators.is_empty() {
            return Err(Error::Config("operators must name at least one operator".into()));
        }
        self.explain_config().validate().map_err(|e| match e {
            Error::Config(_) => e,
            other => Error::Config(other.to_string()),
        })?;
        if self.bench_classes.is_empty() {
            return Err(Error::Config("bench_classes must not be empty".into()));
        }
        if self.bench_sources.is_empty() && self.bench_source_files.is_empty() {
            return Err(Error::Config("no benchmark sources".into()));
        }
        Ok(())
    }

    pub fn operator_settings(&self) -> OperatorSettings {
        OperatorSettings {
            enabled: self.operators.clone(),
            scaling_min: self.scaling_min,
            scaling_max: self.scaling_max,
            dtw_band_fraction: self.dtw_band_fraction,
            smoothing_window: self.smoothing_window,
            pnd_min_seg: self.pnd_min_seg,
            trend_max_sigmas: self.trend_max_sigmas,
            trend_grid_points: self.trend_grid_points,
        }
    }

    pub fn explain_config(&self) -> ExplainConfig {
        ExplainConfig {
            operators: self.operator_settings(),
            weak_threshold: self.weak_threshold,
            ..ExplainConfig::default()
        }
    }

    /// Benchmark settings; CSV sources are read through `load`.
    pub fn bench_config(
        &self,
        mut load: impl FnMut(&Path) -> Result<Vec<f64>>,
    ) -> Result<BenchConfig> {
        let mut sources: Vec<Source> = self.bench_sources.iter().map(|&f| Source::Synthetic(f)).collect();
        for path in &self.bench_source_files {
            sources.push(Source::Recorded {
                name: path.display().to_string(),
                values: Arc::new(load(path)?),
            });
        }
        let cfg = BenchConfig {
            classes: self.bench_classes.clone(),
            trials_per_class: self.bench_trials_per_class,
            n: self.bench_n,
            n_train: self.bench_n_train,
            window: self.window,
            region_length: self.bench_region_length,
            seed: self.seed,
            threshold_mode: self.threshold_mode,
            threshold: self.threshold,
            explain: self.explain_config(),
            target: self.bench_explain_target,
            sources,
            ..BenchConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_default() {
        assert_eq!(Config::from_toml_str("").unwrap(), Config::default());
    }

    #[test]
    fn round_trip() {
        let cfg = Config {
            threshold: Some(2.5),
            operators: vec![OperatorKind::Occlusion, OperatorKind::LRFlip],
            bench_region_length: Some(80),
            ..Config::default()
        };
        let back = Config::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = Config::from_toml_str("windw = 50\n").unwrap_err();
        assert!(err.to_string().contains("windw"), "{err}");
    }

    #[test]
    fn parses_names() {
        let cfg = Config::from_toml_str(
            "window = 64\nthreshold_mode = \"mu-sigma\"\noperators = [\"Occlusion\", \"Warping\"]\n\
             bench_classes = [\"Step\"]\nbench_sources = [\"gait\"]\nbench_explain_target = \"injected\"\n",
        )
        .unwrap();
        assert_eq!(cfg.window, 64);
        assert_eq!(cfg.threshold_mode, ThresholdMode::MuSigma);
        assert_eq!(cfg.operators, vec![OperatorKind::Occlusion, OperatorKind::Warping]);
        assert_eq!(cfg.bench_classes, vec![CorruptionKind::Step]);
        assert_eq!(cfg.bench_explain_target, ExplainTarget::Injected);
    }

    #[test]
    fn bounds_are_checked() {
        for bad in [
            "window = 2",
            "scaling_min = 0.2",
            "scaling_max = 3.0",
            "dtw_band_fraction = 1.5",
            "smoothing_window = 0",
            "pnd_min_seg = 1",
            "trend_grid_points = 200",
            "weak_threshold = -1.0",
            "threshold = 0.0",
            "operators = []",
            "operators = [\"Occlusion\", \"Occlusion\"]",
        ] {
            let err = Config::from_toml_str(bad).unwrap_err();
            assert!(matches!(err, Error::Config(_)), "{bad}: {err}");
        }
    }

    #[test]
    fn bench_config_resolves_sources() {
        let mut cfg = Config {
            bench_source_files: vec![PathBuf::from("x.csv")],
            ..Config::default()
        };
        let bench = cfg.bench_config(|_| Ok(vec![0.5; 5000])).unwrap();
        assert_eq!(bench.sources.len(), 5);
        assert_eq!(bench.sources[4].name(), "x.csv");
        cfg.bench_n_train = 50;
        assert!(cfg.bench_config(|_| Ok(vec![0.5; 5000])).is_err());
    }
}
