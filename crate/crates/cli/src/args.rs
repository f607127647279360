use std::path::PathBuf;

use anomex_core::corrupt::CorruptionKind;
use anomex_core::detect::ThresholdMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "anomex",
    version,
    about = "Detect anomalies in a time series and explain each one as a simple \
             transformation of its nearest neighbor in the training data",
    after_help = "Exit status: 0 on success, 1 on a usage or configuration error, 2 on a data error.\n\
                  Set RUST_LOG=info for progress messages."
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML configuration file. Flags override its values
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Master random seed [default: 0, or `seed` from the config file]
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    /// Worker threads, 0 for one per core. Results do not depend on it
    #[arg(long, global = true, value_name = "N", default_value_t = 0)]
    pub workers: usize,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write output to this file instead of standard output
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List test windows whose distance to the nearest training window
    /// exceeds the threshold
    Detect(DataArgs),
    /// Explain detected anomalies (or one chosen window)
    Explain(ExplainArgs),
    /// Run a synthetic benchmark
    Bench(BenchArgs),
    /// Inject a known corruption into a series
    Corrupt(CorruptArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Anomaly-free training series (CSV: value, or timestamp,value)
    #[arg(long, value_name = "FILE")]
    pub train: PathBuf,

    /// Series to search for anomalies (same CSV layout as --train)
    #[arg(long, value_name = "FILE")]
    pub test: PathBuf,

    /// Subsequence length m [default: 100]
    #[arg(long, value_name = "M")]
    pub window: Option<usize>,

    /// Fixed anomaly threshold on the nearest-neighbor distance. Without it
    /// the threshold is fit on the training series
    #[arg(long, value_name = "DIST")]
    pub threshold: Option<f64>,

    /// How the threshold is fit on training distances: max-plus-sigma
    /// (largest distance plus one standard deviation) or mu-sigma (mean plus
    /// three standard deviations) [default: max-plus-sigma]
    #[arg(long, value_name = "MODE", value_parser = parse_mode)]
    pub threshold_mode: Option<ThresholdMode>,
}

#[derive(Debug, Args)]
pub struct ExplainArgs {
    #[command(flatten)]
    pub data: DataArgs,

    /// Explain the window starting at this test index instead of the
    /// detected candidates
    #[arg(long, value_name = "INDEX")]
    pub location: Option<usize>,

    /// Directory for one tab-separated overlay file per explanation
    /// (anomaly, neighbor, transformed anomaly; z-normalized)
    #[arg(long, value_name = "DIR")]
    pub emit_plot_data: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    /// Injected-corruption confusion table over the explanation classes
    Confusion,
    /// Location and length recovery of occlusions on exemplar pairs
    Occlusion,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Which benchmark to run
    #[arg(long, value_enum, default_value_t = Suite::Confusion)]
    pub suite: Suite,

    /// Trials per class for the confusion suite [default: 50], or total
    /// trials for the occlusion suite [default: 200]
    #[arg(long, value_name = "N")]
    pub trials: Option<usize>,

    /// Number of synthetic exemplars for the occlusion suite
    #[arg(long, value_name = "N", default_value_t = 30)]
    pub exemplars: usize,

    /// Window and exemplar length m [default: 100]
    #[arg(long, value_name = "M")]
    pub window: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CorruptArgs {
    /// Series to corrupt (CSV)
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,

    /// Corruption: spike, dropout, noisy-region, noisy-global, lr-flip,
    /// ud-flip, uniform-scale, step, linear-trend or warp
    #[arg(long, value_parser = parse_kind)]
    pub kind: CorruptionKind,

    /// Start index of the corrupted region
    #[arg(long, value_name = "INDEX")]
    pub location: usize,

    /// Length of the corrupted region
    #[arg(long, value_name = "N")]
    pub length: usize,

    /// Size in standard deviations of the region, or peak displacement in
    /// samples for warp. Not used by flips and uniform-scale [default: 0]
    #[arg(long, value_name = "X")]
    pub magnitude: Option<f64>,

    /// Ground-truth JSON path [default: the output path with .truth.json]
    #[arg(long, value_name = "FILE")]
    pub truth: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<ThresholdMode, String> {
    s.parse().map_err(|e: anomex_core::Error| e.to_string())
}

fn parse_kind(s: &str) -> Result<CorruptionKind, String> {
    let squashed: String = s.chars().filter(|c| *c != '-' && *c != '_').collect();
    squashed.parse().map_err(|e: anomex_core::Error| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn kinds_accept_kebab_case() {
        assert_eq!(parse_kind("lr-flip").unwrap(), CorruptionKind::LRFlip);
        assert_eq!(parse_kind("noisy_global").unwrap(), CorruptionKind::NoisyGlobal);
        assert_eq!(parse_kind("UniformScale").unwrap(), CorruptionKind::UniformScale);
        assert!(parse_kind("teleport").is_err());
    }
}
