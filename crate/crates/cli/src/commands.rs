use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anomex_core::bench::{occlusion_recovery_bench, run_benchmark, RecoveryConfig};
use anomex_core::corrupt::{corrupt, CorruptionSpec};
use anomex_core::detect::{find_anomalies, train_threshold, AnomalyCandidate};
use anomex_core::explain::{explain_window, index_to_timestamp};
use anomex_core::io::{load_csv, write_csv, write_plot_data, CandidateRecord, CsvOptions, ExplanationDocument, Provenance, SCHEMA_VERSION};
use anomex_core::synth::sinusoid_exemplars;
use anomex_core::{Config, Error, TimeSeries};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::args::{BenchArgs, Cli, Command, CorruptArgs, DataArgs, ExplainArgs, Format, Suite};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(Error),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => f.write_str(m),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(Error::Io(e))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Core(Error::Json(e))
    }
}

type Result<T> = std::result::Result<T, CliError>;

pub fn run(cli: &Cli) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers)
        .build_global()
        .map_err(|e| CliError::Usage(format!("cannot start {} workers: {e}", cli.workers)))?;

    let mut config = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    match &cli.command {
        Command::Detect(a) => detect(cli, &mut config, a),
        Command::Explain(a) => explain(cli, &mut config, a),
        Command::Bench(a) => bench(cli, &mut config, a),
        Command::Corrupt(a) => corrupt_cmd(cli, &config, a),
    }
}

/// Standard output or the `--out` file.
fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(std::io::stdout().lock())),
    })
}

fn emit_json(cli: &Cli, value: &impl Serialize) -> Result<()> {
    let mut w = sink(cli.out.as_deref())?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

fn emit_text(cli: &Cli, text: &str) -> Result<()> {
    let mut w = sink(cli.out.as_deref())?;
    w.write_all(text.as_bytes())?;
    if !text.ends_with('\n') {
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

fn apply_data_flags(config: &mut Config, a: &DataArgs) -> Result<()> {
    if let Some(m) = a.window {
        config.window = m;
    }
    if let Some(t) = a.threshold {
        config.threshold = Some(t);
    }
    if let Some(mode) = a.threshold_mode {
        config.threshold_mode = mode;
    }
    config.validate()?;
    Ok(())
}

struct Loaded {
    train: TimeSeries,
    test: TimeSeries,
    threshold: f64,
}

fn load_inputs(config: &Config, a: &DataArgs) -> Result<Loaded> {
    let opts = CsvOptions::default();
    let train = load_csv(&a.train, &opts)?;
    let test = load_csv(&a.test, &opts)?;
    let m = config.window;
    for s in [&train, &test] {
        if s.len() < m {
            return Err(Error::TooShort { needed: m, got: s.len() }.into());
        }
    }
    let threshold = match config.threshold {
        Some(t) => t,
        None => train_threshold(train.values(), m, config.threshold_mode)?,
    };
    log::info!("window {m}, threshold {threshold:.4}");
    Ok(Loaded { train, test, threshold })
}

#[derive(Serialize)]
struct DetectDocument {
    schema_version: u32,
    train_file: String,
    test_file: String,
    window: usize,
    threshold: f64,
    candidates: Vec<CandidateRecord>,
}

fn when(i: usize, s: &TimeSeries) -> String {
    match index_to_timestamp(i, s) {
        Some(t) => format!("{i} ({})", t.format("%Y-%m-%d %H:%M:%S")),
        None => i.to_string(),
    }
}

fn detect(cli: &Cli, config: &mut Config, a: &DataArgs) -> Result<()> {
    apply_data_flags(config, a)?;
    let inputs = load_inputs(config, a)?;
    let candidates = find_anomalies(&inputs.test, &inputs.train, config.window, inputs.threshold)?;
    match cli.format {
        Format::Json => emit_json(
            cli,
            &DetectDocument {
                schema_version: SCHEMA_VERSION,
                train_file: a.train.display().to_string(),
                test_file: a.test.display().to_string(),
                window: config.window,
                threshold: inputs.threshold,
                candidates: candidates.iter().map(CandidateRecord::from).collect(),
            },
        ),
        Format::Text => {
            let mut text = format!(
                "{} candidate(s) above threshold {:.4} (window {})\n",
                candidates.len(),
                inputs.threshold,
                config.window
            );
            for c in &candidates {
                text.push_str(&format!(
                    "test {}: distance {:.4}, nearest training window {}\n",
                    when(c.location, &inputs.test),
                    c.score,
                    when(c.neighbor_location, &inputs.train)
                ));
            }
            emit_text(cli, &text)
        }
    }
}

fn explain(cli: &Cli, config: &mut Config, a: &ExplainArgs) -> Result<()> {
    apply_data_flags(config, &a.data)?;
    let inputs = load_inputs(config, &a.data)?;
    let m = config.window;
    let mut cfg = config.explain_config();
    cfg.threshold = Some(inputs.threshold);

    let candidates: Vec<AnomalyCandidate> = match a.location {
        Some(location) => {
            if location + m > inputs.test.len() {
                return Err(CliError::Usage(format!(
                    "--location {location} with window {m} runs past the end of the test series ({} samples)",
                    inputs.test.len()
                )));
            }
            // an explicitly chosen window is explained even below threshold
            cfg.strict_threshold = false;
            let window = inputs.test.slice(location..location + m)?;
            let nn = anomex_core::metrics::nn_search(&window, &inputs.train)?;
            vec![AnomalyCandidate {
                location,
                window,
                score: nn.distance,
                neighbor_location: nn.location,
                neighbor_distance: nn.distance,
            }]
        }
        None => find_anomalies(&inputs.test, &inputs.train, m, inputs.threshold)?,
    };
    if candidates.is_empty() {
        log::warn!("no window exceeds threshold {:.4}", inputs.threshold);
    }

    let mut docs = Vec::with_capacity(candidates.len());
    for c in &candidates {
        let e = explain_window(&inputs.test, c.location, m, &inputs.train, &cfg)?;
        if let Some(dir) = &a.emit_plot_data {
            std::fs::create_dir_all(dir)?;
            let path = dir.join(format!("window-{}.tsv", c.location));
            let neighbor = &inputs.train.values()[e.neighbor_location..e.neighbor_location + m];
            let out = BufWriter::new(File::create(&path)?);
            write_plot_data(out, c.window.values(), neighbor, e.best.transformed.as_deref())?;
            log::info!("wrote {}", path.display());
        }
        let input = Provenance {
            train_file: a.data.train.display().to_string(),
            test_file: a.data.test.display().to_string(),
            test_offset: c.location,
            train_offset: e.neighbor_location,
            window: m,
        };
        docs.push(ExplanationDocument::new(input, CandidateRecord::from(c), e));
    }

    match cli.format {
        Format::Json => emit_json(cli, &docs),
        Format::Text => {
            let mut text = String::new();
            if docs.is_empty() {
                text.push_str(&format!("no window exceeds threshold {:.4}\n", inputs.threshold));
            }
            for d in &docs {
                text.push_str(&format!("test {}: {}\n", when(d.input.test_offset, &inputs.test), d.text));
            }
            emit_text(cli, &text)
        }
    }
}

fn bench(cli: &Cli, config: &mut Config, a: &BenchArgs) -> Result<()> {
    if let Some(m) = a.window {
        config.window = m;
    }
    match a.suite {
        Suite::Confusion => {
            if let Some(t) = a.trials {
                config.bench_trials_per_class = t;
            }
            config.validate()?;
            let opts = CsvOptions::default();
            let bench = config.bench_config(|p| Ok(load_csv(p, &opts)?.into_values()))?;
            let report = run_benchmark(&bench)?;
            match cli.format {
                Format::Json => emit_json(cli, &report),
                Format::Text => emit_text(cli, &report.to_text()),
            }
        }
        Suite::Occlusion => {
            let rc = RecoveryConfig {
                trials: a.trials.unwrap_or(RecoveryConfig::default().trials),
                seed: config.seed,
                ..RecoveryConfig::default()
            };
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            let exemplars = sinusoid_exemplars(a.exemplars, config.window, &mut rng);
            let report = occlusion_recovery_bench(&exemplars, &rc)?;
            match cli.format {
                Format::Json => emit_json(cli, &report),
                Format::Text => emit_text(cli, &report.to_text()),
            }
        }
    }
}

fn truth_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.truth.json"))
}

fn corrupt_cmd(cli: &Cli, config: &Config, a: &CorruptArgs) -> Result<()> {
    let Some(out) = &cli.out else {
        return Err(CliError::Usage("corrupt needs --out for the corrupted series".into()));
    };
    let magnitude = match a.magnitude {
        Some(x) => x,
        None if a.kind.uses_magnitude() => {
            return Err(CliError::Usage(format!("--magnitude is required for {}", a.kind)));
        }
        None => 0.0,
    };
    let host = load_csv(&a.input, &CsvOptions::default())?;
    let spec = CorruptionSpec {
        kind: a.kind,
        location: a.location,
        length: a.length,
        magnitude,
        seed: config.seed,
    };
    let (series, truth) = corrupt(&host, &spec).map_err(|e| match e {
        Error::OutOfBounds(_) | Error::InvalidParameter(_) => CliError::Usage(e.to_string()),
        other => CliError::Core(other),
    })?;
    let mut w = BufWriter::new(File::create(out)?);
    write_csv(&mut w, &series)?;
    w.flush()?;
    let truth_file = a.truth.clone().unwrap_or_else(|| truth_path(out));
    let mut w = BufWriter::new(File::create(&truth_file)?);
    serde_json::to_writer_pretty(&mut w, &truth)?;
    writeln!(w)?;
    w.flush()?;
    log::info!("wrote {} and {}", out.display(), truth_file.display());
    if cli.format == Format::Text {
        eprintln!(
            "{} at {}..{} ({}), expected explanation {}",
            a.kind,
            a.location,
            a.location + a.length,
            out.display(),
            truth.expected_operator
        );
    }
    Ok(())
}
