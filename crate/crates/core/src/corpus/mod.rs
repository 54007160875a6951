//! Synthetic labeled glyph and sentence traces, their on-disk layout, and
//! stratified train/test splitting.
//!
//! A corpus directory holds `manifest.json`, one trace per glyph under
//! `glyphs/<tag>_<index>.json` and one per sentence under
//! `sentences/<index>.json`. Trace files use the wire format from
//! [`crate::stroke`].

mod templates;

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::FeatureVector;
use crate::stroke::{validate_trace, Point, Stroke, StrokeTrace};

pub use templates::{template, templates, GlyphTemplate};

/// Pixel height of a rendered glyph (the template unit square).
pub const GLYPH_SIZE: f64 = 60.0;
/// Margin around a single glyph on its canvas.
pub const GLYPH_MARGIN: f64 = 20.0;
pub const GLYPH_CANVAS: u32 = 100;
const SENTENCE_TOP: f64 = 30.0;
const SENTENCE_CANVAS_H: u32 = 120;
/// Gap between letters of a word, in glyph widths.
pub const INTRA_WORD_GAP: f64 = 0.4;
/// Gap between words, in glyph widths.
pub const INTER_WORD_GAP: f64 = 1.4;
const POINT_MS: u64 = 8;
const PEN_UP_MS: u64 = 100;

/// The five evaluation sentences.
pub const BENCHMARK_SENTENCES: [&str; 5] = [
    "India is a big country",
    "Where heritage can be a great unifier as well as divider",
    "Sport which were traditionally considered a hobby",
    "At the school level, sport and fitness are being taken seriously",
    "Sports as a field of study is underdeveloped in India",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub samples_per_class: usize,
    /// Maximum rotation either way, degrees.
    pub jitter_rotation: f64,
    /// Maximum relative scale change either way.
    pub jitter_scale: f64,
    /// Maximum per-point displacement per axis, as a fraction of glyph size.
    pub jitter_noise: f64,
    pub seed: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            samples_per_class: 50,
            jitter_rotation: 8.0,
            jitter_scale: 0.10,
            jitter_noise: 0.03,
            seed: 42,
        }
    }
}

impl GeneratorConfig {
    /// Same seed and sample count, no jitter at all.
    pub fn clean(&self) -> Self {
        Self {
            jitter_rotation: 0.0,
            jitter_scale: 0.0,
            jitter_noise: 0.0,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let jitters = [self.jitter_rotation, self.jitter_scale, self.jitter_noise];
        if self.samples_per_class == 0 || jitters.iter().any(|j| !(j.is_finite() && *j >= 0.0)) {
            return Err(CorpusError::InvalidConfig);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Corpus {
    pub glyphs: Vec<(StrokeTrace, char)>,
    pub sentences: Vec<(StrokeTrace, String)>,
    /// Generator settings, echoed into the manifest.
    pub config: Option<GeneratorConfig>,
}

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("unsupported character {0:?}")]
    UnsupportedCharacter(char),
    #[error("text has no letters")]
    EmptyText,
    #[error("invalid generator configuration")]
    InvalidConfig,
    #[error("train fraction must be strictly between 0 and 1, got {0}")]
    InvalidFraction(f64),
    #[error("no manifest.json in {0}")]
    MissingManifest(PathBuf),
    #[error("manifest is malformed: {0}")]
    BadManifest(String),
    #[error("trace file {file} is missing or corrupt: {reason}")]
    CorruptTrace { file: String, reason: String },
    #[error("feature cache line {line}: {reason}")]
    BadFeatureCache { line: usize, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl CorpusError {
    pub fn name(&self) -> &'static str {
        match self {
            CorpusError::UnsupportedCharacter(_) => "UnsupportedCharacter",
            CorpusError::EmptyText => "EmptyText",
            CorpusError::InvalidConfig => "InvalidConfig",
            CorpusError::InvalidFraction(_) => "InvalidFraction",
            CorpusError::MissingManifest(_) => "MissingManifest",
            CorpusError::BadManifest(_) => "BadManifest",
            CorpusError::CorruptTrace { .. } => "CorruptTrace",
            CorpusError::BadFeatureCache { .. } => "BadFeatureCache",
            CorpusError::Io(_) => "Io",
        }
    }
}

/// Uppercases, drops ASCII punctuation and collapses whitespace to single spaces.
pub fn normalize_text(text: &str) -> Result<String, CorpusError> {
    let mut words = Vec::new();
    for raw in text.split_whitespace() {
        let mut word = String::new();
        for c in raw.chars() {
            if c.is_ascii_alphabetic() {
                word.push(c.to_ascii_uppercase());
            } else if !c.is_ascii_punctuation() {
                return Err(CorpusError::UnsupportedCharacter(c));
            }
        }
        if !word.is_empty() {
            words.push(word);
        }
    }
    if words.is_empty() {
        return Err(CorpusError::EmptyText);
    }
    Ok(words.join(" "))
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// Jitter drawn once per glyph.
struct Jitter {
    cos: f64,
    sin: f64,
    scale: f64,
}

impl Jitter {
    fn draw(rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Self {
        let angle = (rng.gen::<f64>() * 2.0 - 1.0) * cfg.jitter_rotation;
        let scale = 1.0 + (rng.gen::<f64>() * 2.0 - 1.0) * cfg.jitter_scale;
        let rad = angle.to_radians();
        Self {
            cos: rad.cos(),
            sin: rad.sin(),
            scale,
        }
    }
}

/// Strokes of one glyph as polylines.
type Polylines = Vec<Vec<(f64, f64)>>;

/// Jittered template strokes in pixel units, relative to the unit square's origin.
fn jittered(t: &GlyphTemplate, rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Polylines {
    let j = Jitter::draw(rng, cfg);
    t.strokes
        .iter()
        .map(|s| {
            s.iter()
                .map(|&(x, y)| {
                    let (dx, dy) = (x - 0.5, y - 0.5);
                    let rx = j.scale * (j.cos * dx - j.sin * dy);
                    let ry = j.scale * (j.sin * dx + j.cos * dy);
                    let nx = (rng.gen::<f64>() * 2.0 - 1.0) * cfg.jitter_noise;
                    let ny = (rng.gen::<f64>() * 2.0 - 1.0) * cfg.jitter_noise;
                    ((0.5 + rx + nx) * GLYPH_SIZE, (0.5 + ry + ny) * GLYPH_SIZE)
                })
                .collect()
        })
        .collect()
}

/// Turns pixel polylines into timestamped strokes, clamped to the canvas.
fn to_strokes(polys: &[Vec<(f64, f64)>], dx: f64, dy: f64, w: u32, h: u32, clock: &mut u64) -> Vec<Stroke> {
    polys
        .iter()
        .map(|poly| {
            let pts = poly
                .iter()
                .map(|&(x, y)| {
                    let p = Point::new(
                        round3((x + dx).clamp(0.0, w as f64)),
                        round3((y + dy).clamp(0.0, h as f64)),
                        *clock,
                    );
                    *clock += POINT_MS;
                    p
                })
                .collect();
            *clock += PEN_UP_MS;
            Stroke::new(pts)
        })
        .collect()
}

fn glyph_trace(t: &GlyphTemplate, rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> StrokeTrace {
    let polys = jittered(t, rng, cfg);
    let mut clock = 0;
    let strokes = to_strokes(&polys, GLYPH_MARGIN, GLYPH_MARGIN, GLYPH_CANVAS, GLYPH_CANVAS, &mut clock);
    StrokeTrace::new(strokes, GLYPH_CANVAS, GLYPH_CANVAS)
}

/// `samples_per_class` jittered traces of every letter, class by class.
pub fn generate_glyphs(cfg: &GeneratorConfig) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut glyphs = Vec::with_capacity(26 * cfg.samples_per_class);
    for t in templates() {
        for _ in 0..cfg.samples_per_class {
            glyphs.push((glyph_trace(&t, &mut rng, cfg), t.tag));
        }
    }
    Corpus {
        glyphs,
        sentences: Vec::new(),
        config: Some(cfg.clone()),
    }
}

fn sentence_trace(text: &str, rng: &mut ChaCha8Rng, cfg: &GeneratorConfig) -> Result<StrokeTrace, CorpusError> {
    let text = normalize_text(text)?;
    let mut placed: Vec<(Polylines, f64)> = Vec::new();
    let mut cursor = GLYPH_MARGIN;
    let mut right = cursor;
    for (wi, word) in text.split(' ').enumerate() {
        if wi > 0 {
            cursor += (INTER_WORD_GAP - INTRA_WORD_GAP) * GLYPH_SIZE;
        }
        for c in word.chars() {
            let t = template(c).ok_or(CorpusError::UnsupportedCharacter(c))?;
            let polys = jittered(&t, rng, cfg);
            let xs = polys.iter().flatten().map(|p| p.0);
            let (min_x, max_x) = xs.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
            let shift = cursor - min_x;
            placed.push((polys, shift));
            right = max_x + shift;
            cursor = right + INTRA_WORD_GAP * GLYPH_SIZE;
        }
    }
    let width = (right + GLYPH_MARGIN).ceil() as u32;
    let mut clock = 0;
    let mut strokes = Vec::new();
    for (polys, shift) in &placed {
        strokes.extend(to_strokes(polys, *shift, SENTENCE_TOP, width, SENTENCE_CANVAS_H, &mut clock));
    }
    Ok(StrokeTrace::new(strokes, width, SENTENCE_CANVAS_H))
}

/// Lays jittered glyphs out left to right: letters of a word sit
/// `INTRA_WORD_GAP` glyph widths apart, words `INTER_WORD_GAP` apart.
pub fn generate_sentence(text: &str, cfg: &GeneratorConfig) -> Result<StrokeTrace, CorpusError> {
    sentence_trace(text, &mut ChaCha8Rng::seed_from_u64(cfg.seed), cfg)
}

/// Glyphs per [`generate_glyphs`] plus one trace per sentence, each sentence
/// drawn from its own continuation of a seeded stream.
pub fn generate_corpus(cfg: &GeneratorConfig, sentences: &[&str]) -> Result<Corpus, CorpusError> {
    cfg.validate()?;
    let mut corpus = generate_glyphs(cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0x5e17_e9ce));
    for text in sentences {
        corpus.sentences.push((sentence_trace(text, &mut rng, cfg)?, text.to_string()));
    }
    Ok(corpus)
}

#[derive(Serialize, Deserialize)]
struct Manifest {
    format: u32,
    seed: Option<u64>,
    config: Option<GeneratorConfig>,
    glyphs: Vec<GlyphEntry>,
    sentences: Vec<SentenceEntry>,
}

#[derive(Serialize, Deserialize)]
struct GlyphEntry {
    file: String,
    tag: char,
}

#[derive(Serialize, Deserialize)]
struct SentenceEntry {
    file: String,
    text: String,
}

pub fn save_corpus(c: &Corpus, dir: impl AsRef<Path>) -> Result<(), CorpusError> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir.join("glyphs"))?;
    fs::create_dir_all(dir.join("sentences"))?;
    let mut per_class: BTreeMap<char, usize> = BTreeMap::new();
    let mut glyphs = Vec::with_capacity(c.glyphs.len());
    for (trace, tag) in &c.glyphs {
        let idx = per_class.entry(*tag).or_default();
        let file = format!("glyphs/{tag}_{idx}.json");
        *idx += 1;
        fs::write(dir.join(&file), trace.to_json())?;
        glyphs.push(GlyphEntry { file, tag: *tag });
    }
    let mut sentences = Vec::with_capacity(c.sentences.len());
    for (i, (trace, text)) in c.sentences.iter().enumerate() {
        let file = format!("sentences/{i}.json");
        fs::write(dir.join(&file), trace.to_json())?;
        sentences.push(SentenceEntry { file, text: text.clone() });
    }
    let manifest = Manifest {
        format: 1,
        seed: c.config.as_ref().map(|cfg| cfg.seed),
        config: c.config.clone(),
        glyphs,
        sentences,
    };
    let mut text = serde_json::to_string_pretty(&manifest).map_err(|e| CorpusError::BadManifest(e.to_string()))?;
    text.push('\n');
    fs::write(dir.join("manifest.json"), text)?;
    Ok(())
}

fn load_trace(dir: &Path, file: &str) -> Result<StrokeTrace, CorpusError> {
    let corrupt = |reason: String| CorpusError::CorruptTrace {
        file: file.to_string(),
        reason,
    };
    let text = fs::read_to_string(dir.join(file)).map_err(|e| corrupt(e.to_string()))?;
    let trace = StrokeTrace::from_json(&text).map_err(|e| corrupt(e.to_string()))?;
    validate_trace(trace).map_err(|e| corrupt(e.to_string()))
}

pub fn load_corpus(dir: impl AsRef<Path>) -> Result<Corpus, CorpusError> {
    let dir = dir.as_ref();
    let path = dir.join("manifest.json");
    if !path.is_file() {
        return Err(CorpusError::MissingManifest(dir.to_path_buf()));
    }
    let manifest: Manifest =
        serde_json::from_str(&fs::read_to_string(&path)?).map_err(|e| CorpusError::BadManifest(e.to_string()))?;
    let mut corpus = Corpus {
        config: manifest.config,
        ..Corpus::default()
    };
    for g in &manifest.glyphs {
        if !g.tag.is_ascii_uppercase() {
            return Err(CorpusError::BadManifest(format!("bad tag {:?}", g.tag)));
        }
        corpus.glyphs.push((load_trace(dir, &g.file)?, g.tag));
    }
    for s in &manifest.sentences {
        if s.text.trim().is_empty() {
            return Err(CorpusError::BadManifest("empty sentence text".into()));
        }
        corpus.sentences.push((load_trace(dir, &s.file)?, s.text.clone()));
    }
    Ok(corpus)
}

/// Seeded stratified split: each class contributes `round(n × train_fraction)`
/// of its glyphs to the training half. Sentences all go to the test half.
/// Both halves keep the original item order.
pub fn split(c: &Corpus, train_fraction: f64, seed: u64) -> Result<(Corpus, Corpus), CorpusError> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(CorpusError::InvalidFraction(train_fraction));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut by_class: BTreeMap<char, Vec<usize>> = BTreeMap::new();
    for (i, (_, tag)) in c.glyphs.iter().enumerate() {
        by_class.entry(*tag).or_default().push(i);
    }
    let mut in_train = vec![false; c.glyphs.len()];
    for idx in by_class.values_mut() {
        idx.shuffle(&mut rng);
        let k = (idx.len() as f64 * train_fraction).round() as usize;
        for &i in &idx[..k] {
            in_train[i] = true;
        }
    }
    let pick = |want: bool| -> Vec<(StrokeTrace, char)> {
        c.glyphs
            .iter()
            .zip(&in_train)
            .filter(|(_, &t)| t == want)
            .map(|(g, _)| g.clone())
            .collect()
    };
    let train = Corpus {
        glyphs: pick(true),
        sentences: Vec::new(),
        config: c.config.clone(),
    };
    let test = Corpus {
        glyphs: pick(false),
        sentences: c.sentences.clone(),
        config: c.config.clone(),
    };
    Ok((train, test))
}

/// One `TAG,f0,...,f11` line per glyph.
pub fn write_feature_cache(path: impl AsRef<Path>, items: &[(char, FeatureVector)]) -> Result<(), CorpusError> {
    let text: String = items.iter().map(|(tag, f)| format!("{tag},{f}\n")).collect();
    fs::write(path, text)?;
    Ok(())
}

pub fn read_feature_cache(path: impl AsRef<Path>) -> Result<Vec<(char, FeatureVector)>, CorpusError> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let bad = |reason: String| CorpusError::BadFeatureCache { line: n + 1, reason };
            let (tag, rest) = line.split_once(',').ok_or_else(|| bad("missing tag".into()))?;
            let mut chars = tag.chars();
            let tag = match (chars.next(), chars.next()) {
                (Some(c), None) if c.is_ascii_uppercase() => c,
                _ => return Err(bad(format!("bad tag {tag:?}"))),
            };
            let f = rest.parse::<FeatureVector>().map_err(|e| bad(e.to_string()))?;
            Ok((tag, f))
        })
        .collect()
}

#[cfg(test)]
mod tests;
