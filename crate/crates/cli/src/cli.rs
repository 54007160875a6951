//! The `esr` command line: corpus generation, training, evaluation,
//! recognition of single traces, the HTTP service and gradient checks.
//!
//! Exit codes: 0 on success, 1 on a usage error, 2 on a data or model error.
//! Errors go to standard error as `error: <Name>: <message>`.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use esr_core::corpus::{generate_corpus, load_corpus, save_corpus, split, CorpusError, GeneratorConfig, BENCHMARK_SENTENCES};
use esr_core::net::{
    class_of, classify, gradient_check, init_random, save_model, ModelFileError, NetError, ALPHABET,
};
use esr_core::recognizer::{evaluate, glyph_features, recognize_sentence_detailed, RecognizeError};
use esr_core::stroke::validate_trace;
use esr_core::{FeatureVector, SegmentationParams, StrokeTrace, TrainConfig, TrainReport};

use crate::service::{self, sidecar_path, AppState, LoadedModel};

/// Largest gradient-check error `gradcheck` accepts.
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "esr", version, about = "Mouse-gesture sentence recognizer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic corpus of glyph and sentence traces.
    Gen(GenArgs),
    /// Train a model on a corpus and write it to disk.
    Train(TrainArgs),
    /// Score a model on the labeled sentences of a corpus.
    Eval(EvalArgs),
    /// Recognize trace files and print their text.
    Recognize(RecognizeArgs),
    /// Run the HTTP recognition service.
    Serve(ServeArgs),
    /// Compare analytic and numeric gradients on random networks.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Args)]
struct ModelArg {
    /// Model file.
    #[arg(long, env = "ESR_MODEL")]
    model: PathBuf,
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    /// Render templates without any jitter.
    #[arg(long)]
    clean: bool,
    /// Sentence to render; repeat for several. Defaults to the five built-in evaluation sentences.
    #[arg(long = "sentence")]
    sentences: Vec<String>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    model: ModelArg,
    /// Seed for weight initialization, sample order and the train/test split.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 4000)]
    epochs: usize,
    #[arg(long, default_value_t = 0.10)]
    lr: f64,
    #[arg(long, default_value_t = 0.10)]
    momentum: f64,
    /// Fraction of each class used for training; the rest is held out.
    #[arg(long, default_value_t = 0.8)]
    split: f64,
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[command(flatten)]
    model: ModelArg,
    /// Also write the report as JSON to this file.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RecognizeArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Print each character's thinned bitmap and feature vector.
    #[arg(long)]
    debug: bool,
    #[arg(required = true)]
    traces: Vec<PathBuf>,
}

#[derive(Debug, Args)]
struct ServeArgs {
    /// Model file; without one the service starts unloaded and answers 503.
    #[arg(long, env = "ESR_MODEL")]
    model: Option<PathBuf>,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8080)]
    port: u16,
}

#[derive(Debug, Args)]
struct GradcheckArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Number of random networks to check.
    #[arg(long, default_value_t = 10)]
    count: u64,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error("{path}: {source}")]
    Model { path: PathBuf, source: ModelFileError },
    #[error(transparent)]
    Net(#[from] NetError),
    #[error(transparent)]
    Recognize(#[from] RecognizeError),
    #[error("{path}: {message}")]
    BadTrace { path: PathBuf, name: &'static str, message: String },
    #[error("glyph {index} has no ink")]
    EmptyGlyph { index: usize },
    #[error("corpus has no {0}")]
    NothingToDo(&'static str),
    #[error("worst relative error {worst:e} exceeds {GRADCHECK_TOLERANCE:e}")]
    GradientMismatch { worst: f64 },
    #[error("{context}: {source}")]
    Io { context: String, source: io::Error },
}

impl CliError {
    pub fn name(&self) -> &'static str {
        match self {
            CliError::Corpus(e) => e.name(),
            CliError::Model { source, .. } => source.name(),
            CliError::Net(e) => e.name(),
            CliError::Recognize(e) => e.name(),
            CliError::BadTrace { name, .. } => name,
            CliError::EmptyGlyph { .. } => "EmptyImage",
            CliError::NothingToDo(_) => "EmptyCorpus",
            CliError::GradientMismatch { .. } => "GradientMismatch",
            CliError::Io { .. } => "Io",
        }
    }
}

fn io_err(context: impl Into<String>) -> impl FnOnce(io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}

fn load_model(path: &Path) -> Result<LoadedModel, CliError> {
    LoadedModel::load(path).map_err(|source| CliError::Model {
        path: path.to_path_buf(),
        source,
    })
}

fn read_trace(path: &Path) -> Result<StrokeTrace, CliError> {
    let text = fs::read_to_string(path).map_err(io_err(path.display().to_string()))?;
    let trace = StrokeTrace::from_json(&text).map_err(|e| CliError::BadTrace {
        path: path.to_path_buf(),
        name: "SchemaViolation",
        message: e.to_string(),
    })?;
    validate_trace(trace).map_err(|e| CliError::BadTrace {
        path: path.to_path_buf(),
        name: e.name(),
        message: e.to_string(),
    })
}

/// Feature vectors and class indices of labeled glyph traces.
pub fn glyph_dataset(glyphs: &[(StrokeTrace, char)]) -> Result<Vec<(FeatureVector, usize)>, CliError> {
    glyphs
        .iter()
        .enumerate()
        .map(|(index, (trace, tag))| {
            let f = glyph_features(trace).map_err(|_| CliError::EmptyGlyph { index })?;
            let class = class_of(*tag).ok_or(CorpusError::BadManifest(format!("bad tag {tag:?}")))?;
            Ok((f, class))
        })
        .collect()
}

/// Training record stored next to the model file.
#[derive(Debug, Serialize)]
pub struct TrainingSummary {
    pub config: TrainConfig,
    pub train_fraction: f64,
    pub train_samples: usize,
    pub held_out_samples: usize,
    pub held_out_accuracy: Option<f64>,
    pub epochs_run: usize,
    pub final_sse: f64,
    pub stopped_early: bool,
}

fn gen(args: GenArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = GeneratorConfig {
        samples_per_class: args.samples,
        seed: args.seed,
        ..GeneratorConfig::default()
    };
    if args.clean {
        cfg = cfg.clean();
    }
    let sentences: Vec<&str> = if args.sentences.is_empty() {
        BENCHMARK_SENTENCES.to_vec()
    } else {
        args.sentences.iter().map(String::as_str).collect()
    };
    let corpus = generate_corpus(&cfg, &sentences)?;
    save_corpus(&corpus, &args.corpus)?;
    writeln!(
        out,
        "wrote {} glyphs and {} sentences to {}",
        corpus.glyphs.len(),
        corpus.sentences.len(),
        args.corpus.display()
    )
    .map_err(io_err("stdout"))
}

fn train(args: TrainArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = TrainConfig {
        learning_rate: args.lr,
        momentum: args.momentum,
        max_epochs: args.epochs,
        seed: args.seed,
        ..TrainConfig::default()
    };
    cfg.validate()?;
    let corpus = load_corpus(&args.corpus)?;
    if corpus.glyphs.is_empty() {
        return Err(CliError::NothingToDo("glyphs"));
    }
    let (train_half, test_half) = split(&corpus, args.split, args.seed)?;
    let train_set = glyph_dataset(&train_half.glyphs)?;
    let test_set = glyph_dataset(&test_half.glyphs)?;

    let (model, report) = esr_core::net::train_backprop(&init_random(&cfg), &train_set, &cfg)?;
    let correct = test_set
        .iter()
        .filter(|(x, c)| classify(&model, x).0 == ALPHABET[*c] as char)
        .count();
    let accuracy = (!test_set.is_empty()).then(|| correct as f64 / test_set.len() as f64);

    let path = &args.model.model;
    save_model(&model, path).map_err(|source| CliError::Model {
        path: path.clone(),
        source,
    })?;
    let summary = TrainingSummary {
        config: cfg,
        train_fraction: args.split,
        train_samples: train_set.len(),
        held_out_samples: test_set.len(),
        held_out_accuracy: accuracy,
        epochs_run: report.epochs_run,
        final_sse: report.final_sse,
        stopped_early: report.stopped_early,
    };
    let mut sidecar = serde_json::to_string_pretty(&summary).expect("summaries always serialize");
    sidecar.push('\n');
    let sidecar_file = sidecar_path(path);
    fs::write(&sidecar_file, sidecar).map_err(io_err(sidecar_file.display().to_string()))?;

    print_report(out, &report, train_set.len(), accuracy.map(|a| (a, correct, test_set.len())))
        .map_err(io_err("stdout"))?;
    writeln!(out, "model written to {}", path.display()).map_err(io_err("stdout"))
}

fn print_report(
    out: &mut dyn Write,
    r: &TrainReport,
    samples: usize,
    held_out: Option<(f64, usize, usize)>,
) -> io::Result<()> {
    writeln!(out, "training samples: {samples}")?;
    writeln!(out, "epochs run: {}", r.epochs_run)?;
    writeln!(out, "final SSE: {}", r.final_sse)?;
    writeln!(out, "stopped early: {}", r.stopped_early)?;
    if let Some((acc, correct, total)) = held_out {
        writeln!(out, "held-out accuracy: {:.1}% ({correct}/{total})", 100.0 * acc)?;
    }
    Ok(())
}

fn eval(args: EvalArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let corpus = load_corpus(&args.corpus)?;
    let loaded = load_model(&args.model.model)?;
    let report = evaluate(&corpus.sentences, &loaded.model, &SegmentationParams::default())?;
    out.write_all(report.to_table().as_bytes()).map_err(io_err("stdout"))?;
    if let Some(path) = args.json {
        fs::write(&path, report.to_json()).map_err(io_err(path.display().to_string()))?;
    }
    Ok(())
}

fn recognize(args: RecognizeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let loaded = load_model(&args.model.model)?;
    let params = SegmentationParams::default();
    for path in &args.traces {
        let trace = read_trace(path)?;
        let (result, glyphs) = recognize_sentence_detailed(&trace, &loaded.model, &params)?;
        writeln!(out, "{}", result.text).map_err(io_err("stdout"))?;
        for w in &result.warnings {
            writeln!(out, "warning: {w}").map_err(io_err("stdout"))?;
        }
        if args.debug {
            for (c, g) in result.words.iter().flatten().zip(&glyphs) {
                writeln!(out, "{} {:.4} [{}]", c.tag, c.confidence, g.features).map_err(io_err("stdout"))?;
                out.write_all(g.thinned.to_pbm().as_bytes()).map_err(io_err("stdout"))?;
            }
        }
    }
    Ok(())
}

fn serve(args: ServeArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let loaded = args.model.as_deref().map(load_model).transpose()?;
    let state = Arc::new(AppState::new(loaded, SegmentationParams::default()));
    let runtime = tokio::runtime::Runtime::new().map_err(io_err("runtime"))?;
    let addr = format!("{}:{}", args.host, args.port);
    let listener = runtime
        .block_on(tokio::net::TcpListener::bind(&addr))
        .map_err(io_err(format!("bind {addr}")))?;
    let local: SocketAddr = listener.local_addr().map_err(io_err("local address"))?;
    writeln!(out, "listening on http://{local}").map_err(io_err("stdout"))?;
    out.flush().map_err(io_err("stdout"))?;
    if state.current().is_none() {
        writeln!(err, "warning: no model loaded; recognize requests get 503").map_err(io_err("stderr"))?;
    }

    #[cfg(unix)]
    if let Some(path) = args.model.clone() {
        let state = Arc::clone(&state);
        runtime.spawn(async move {
            use tokio::signal::unix::{signal, SignalKind};
            let Ok(mut hangups) = signal(SignalKind::hangup()) else {
                return;
            };
            while hangups.recv().await.is_some() {
                match state.reload(&path) {
                    Ok(()) => eprintln!("reloaded model from {}", path.display()),
                    Err(e) => eprintln!("error: {}: reload failed, keeping the old model: {e}", e.name()),
                }
            }
        });
    }

    let shutdown = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    runtime
        .block_on(service::serve(listener, state, shutdown))
        .map_err(io_err("serve"))
}

fn random_sample(rng: &mut ChaCha8Rng) -> (FeatureVector, usize) {
    let raw: [f64; 12] = std::array::from_fn(|_| rng.gen::<f64>());
    let total: f64 = raw.iter().sum();
    (FeatureVector(raw.map(|v| v / total)), rng.gen_range(0..26))
}

fn gradcheck(args: GradcheckArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut worst = 0.0f64;
    for k in 0..args.count {
        let cfg = TrainConfig {
            seed: args.seed.wrapping_add(k),
            ..TrainConfig::default()
        };
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x9e37_79b9);
        let model = init_random(&cfg);
        let err = gradient_check(&model, &random_sample(&mut rng), args.eps, &cfg);
        writeln!(out, "seed {}: max relative error {err:e}", cfg.seed).map_err(io_err("stdout"))?;
        worst = worst.max(err);
    }
    writeln!(out, "worst: {worst:e}").map_err(io_err("stdout"))?;
    if worst < GRADCHECK_TOLERANCE {
        Ok(())
    } else {
        Err(CliError::GradientMismatch { worst })
    }
}

/// Runs the CLI with `argv` (program name first) and returns the exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    let result = match cli.command {
        Command::Gen(a) => gen(a, out),
        Command::Train(a) => train(a, out),
        Command::Eval(a) => eval(a, out),
        Command::Recognize(a) => recognize(a, out),
        Command::Serve(a) => serve(a, out, err),
        Command::Gradcheck(a) => gradcheck(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", e.name());
            2
        }
    }
}
