//! Sentence recognition: split a trace into character groups and words, run
//! each group through the glyph pipeline, and score recognized sentences.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::features::{extract_features, FeatureVector};
use crate::image::{BinaryImage, ImageError};
use crate::net::{classify, MlpModel};
use crate::preprocess::{normalize, thin, NORM_EXTENT};
use crate::stroke::{rasterize, validate_trace, Bounds, Point, Stroke, StrokeTrace, TraceError};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentationParams {
    /// Adjacent groups closer than this many median widths are one character.
    pub char_gap_ratio: f64,
    /// Gaps wider than this many median widths separate words.
    pub word_gap_ratio: f64,
    /// Strokes overlapping horizontally by more than this fraction of the
    /// narrower one belong to the same character.
    pub overlap_merge_ratio: f64,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            char_gap_ratio: 0.35,
            word_gap_ratio: 1.0,
            overlap_merge_ratio: 0.3,
        }
    }
}

impl SegmentationParams {
    pub fn validate(&self) -> Result<(), RecognizeError> {
        let ok = self.char_gap_ratio > 0.0
            && self.char_gap_ratio < self.word_gap_ratio
            && self.word_gap_ratio.is_finite()
            && self.overlap_merge_ratio.is_finite()
            && self.overlap_merge_ratio >= 0.0;
        if ok {
            Ok(())
        } else {
            Err(RecognizeError::InvalidParams)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharResult {
    pub tag: char,
    pub confidence: f64,
    pub bbox: Bounds,
    pub stroke_ids: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceResult {
    pub words: Vec<Vec<CharResult>>,
    pub text: String,
    pub warnings: Vec<String>,
}

impl SentenceResult {
    pub fn char_count(&self) -> usize {
        self.words.iter().map(Vec::len).sum()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("sentence results always serialize")
    }
}

/// Intermediate products for one recognized character.
#[derive(Debug, Clone, PartialEq)]
pub struct GlyphDebug {
    pub thinned: BinaryImage,
    pub features: FeatureVector,
}

#[derive(Debug, Error)]
pub enum RecognizeError {
    #[error(transparent)]
    Trace(#[from] TraceError),
    #[error("segmentation parameters need 0 < char_gap_ratio < word_gap_ratio")]
    InvalidParams,
    #[error("no sentences to evaluate")]
    EmptyCorpus,
}

impl RecognizeError {
    pub fn name(&self) -> &'static str {
        match self {
            RecognizeError::Trace(e) => e.name(),
            RecognizeError::InvalidParams => "InvalidParams",
            RecognizeError::EmptyCorpus => "EmptyCorpus",
        }
    }
}

/// Strokes of one character, in original stroke order.
#[derive(Debug, Clone, PartialEq)]
pub struct CharGroup {
    pub stroke_ids: Vec<usize>,
    pub bounds: Bounds,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn overlaps(a: &Bounds, b: &Bounds, ratio: f64) -> bool {
    let overlap = a.max_x.min(b.max_x) - a.min_x.max(b.min_x);
    let narrow = a.width().min(b.width());
    overlap >= 0.0 && (overlap > ratio * narrow || narrow <= f64::EPSILON)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

fn merge(a: CharGroup, b: CharGroup) -> CharGroup {
    let mut stroke_ids = a.stroke_ids;
    stroke_ids.extend(b.stroke_ids);
    stroke_ids.sort_unstable();
    CharGroup {
        stroke_ids,
        bounds: a.bounds.union(&b.bounds),
    }
}

/// Groups strokes into characters ordered by left edge.
///
/// Strokes whose x-extents overlap by more than `overlap_merge_ratio` of the
/// narrower extent are joined (transitively); then neighbours separated by
/// less than `char_gap_ratio` median widths of whitespace are joined too.
pub fn segment_characters(t: &StrokeTrace, p: &SegmentationParams) -> Vec<CharGroup> {
    let bounds: Vec<Option<Bounds>> = t.strokes.iter().map(Stroke::bounds).collect();
    let ids: Vec<usize> = (0..t.strokes.len()).filter(|&i| bounds[i].is_some()).collect();
    let mut parent: Vec<usize> = (0..t.strokes.len()).collect();
    for (k, &i) in ids.iter().enumerate() {
        for &j in &ids[k + 1..] {
            if overlaps(&bounds[i].unwrap(), &bounds[j].unwrap(), p.overlap_merge_ratio) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut groups: Vec<CharGroup> = Vec::new();
    for &i in &ids {
        let root = find(&mut parent, i);
        let b = bounds[i].unwrap();
        match groups.iter_mut().find(|g| g.stroke_ids[0] == root) {
            Some(g) => {
                g.stroke_ids.push(i);
                g.bounds = g.bounds.union(&b);
            }
            None => groups.push(CharGroup {
                stroke_ids: vec![i],
                bounds: b,
            }),
        }
    }
    groups.sort_by(|a, b| a.bounds.min_x.total_cmp(&b.bounds.min_x).then(a.stroke_ids[0].cmp(&b.stroke_ids[0])));

    let limit = p.char_gap_ratio * median(groups.iter().map(|g| g.bounds.width()).collect());
    let mut out: Vec<CharGroup> = Vec::with_capacity(groups.len());
    for g in groups {
        match out.last_mut() {
            Some(prev) if g.bounds.min_x - prev.bounds.max_x < limit => {
                let joined = merge(prev.clone(), g);
                *prev = joined;
            }
            _ => out.push(g),
        }
    }
    out
}

/// The strokes of `ids` moved so their bounding box starts at the origin, on
/// the smallest whole-pixel canvas that holds them.
pub fn crop_trace(t: &StrokeTrace, ids: &[usize]) -> StrokeTrace {
    let strokes: Vec<&Stroke> = ids.iter().map(|&i| &t.strokes[i]).collect();
    let b = Bounds::of_points(strokes.iter().flat_map(|s| s.points.iter())).expect("cropped strokes have points");
    let moved = strokes
        .iter()
        .map(|s| Stroke::new(s.points.iter().map(|p| Point::new(p.x - b.min_x, p.y - b.min_y, p.t)).collect()))
        .collect();
    let side = |extent: f64| (extent.floor() as u32).saturating_add(1);
    StrokeTrace::new(moved, side(b.width()), side(b.height()))
}

/// Rasterizes a single glyph so its longer side spans the normalized extent,
/// then normalizes it. Only the glyph's own bounding box matters, not its
/// position on the canvas.
pub fn glyph_image(t: &StrokeTrace) -> Result<BinaryImage, ImageError> {
    let ids: Vec<usize> = (0..t.strokes.len()).filter(|&i| !t.strokes[i].points.is_empty()).collect();
    if ids.is_empty() {
        return Err(ImageError::EmptyImage);
    }
    let crop = crop_trace(t, &ids);
    let long = crop.canvas_width.max(crop.canvas_height) as f64;
    let grid = |side: u32| ((NORM_EXTENT as f64 * side as f64 / long).round() as u32).max(1);
    let img = rasterize(&crop, grid(crop.canvas_width), grid(crop.canvas_height))
        .expect("grid sides are at least one cell");
    normalize(&img)
}

/// Thinned glyph and its feature vector; the same path is used for training
/// samples and for characters cut out of sentences.
pub fn glyph_debug(t: &StrokeTrace) -> Result<GlyphDebug, ImageError> {
    let thinned = thin(&glyph_image(t)?);
    let features = extract_features(&thinned)?;
    Ok(GlyphDebug { thinned, features })
}

pub fn glyph_features(t: &StrokeTrace) -> Result<FeatureVector, ImageError> {
    glyph_debug(t).map(|d| d.features)
}

/// Like [`recognize_sentence`], also returning the thinned bitmap and
/// features of every recognized character in reading order.
pub fn recognize_sentence_detailed(
    t: &StrokeTrace,
    m: &MlpModel,
    p: &SegmentationParams,
) -> Result<(SentenceResult, Vec<GlyphDebug>), RecognizeError> {
    p.validate()?;
    let t = validate_trace(t.clone())?;
    let groups = segment_characters(&t, p);
    let mut chars = Vec::with_capacity(groups.len());
    let mut debug = Vec::with_capacity(groups.len());
    let mut warnings = Vec::new();
    for (gi, g) in groups.iter().enumerate() {
        match glyph_debug(&crop_trace(&t, &g.stroke_ids)) {
            Ok(d) => {
                let (tag, confidence) = classify(m, &d.features);
                chars.push(CharResult {
                    tag,
                    confidence,
                    bbox: g.bounds,
                    stroke_ids: g.stroke_ids.clone(),
                });
                debug.push(d);
            }
            Err(e) => warnings.push(format!("group {gi} skipped: {e}")),
        }
    }

    let limit = p.word_gap_ratio * median(chars.iter().map(|c| c.bbox.width()).collect());
    let mut words: Vec<Vec<CharResult>> = Vec::new();
    let mut prev_right = f64::NEG_INFINITY;
    for c in chars {
        let gap = c.bbox.min_x - prev_right;
        prev_right = c.bbox.max_x;
        match words.last_mut() {
            Some(w) if gap <= limit => w.push(c),
            _ => words.push(vec![c]),
        }
    }
    let text = words
        .iter()
        .map(|w| w.iter().map(|c| c.tag).collect::<String>())
        .collect::<Vec<_>>()
        .join(" ");
    Ok((SentenceResult { words, text, warnings }, debug))
}

pub fn recognize_sentence(t: &StrokeTrace, m: &MlpModel, p: &SegmentationParams) -> Result<SentenceResult, RecognizeError> {
    recognize_sentence_detailed(t, m, p).map(|(r, _)| r)
}

/// Letters of `text`, uppercased, with everything else dropped.
pub fn scoring_letters(text: &str) -> Vec<char> {
    text.chars()
        .filter(char::is_ascii_alphabetic)
        .map(|c| c.to_ascii_uppercase())
        .collect()
}

pub fn levenshtein(a: &[char], b: &[char]) -> usize {
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, cb) in b.iter().enumerate() {
            let next = (diag + usize::from(ca != cb)).min(row[j] + 1).min(row[j + 1] + 1);
            diag = row[j + 1];
            row[j + 1] = next;
        }
    }
    row[b.len()]
}

/// Percentage of ground-truth letters recognized correctly: the letter count
/// minus the edit distance to the recognized letters, floored at zero.
pub fn recognition_rate(truth: &str, recognized: &str) -> f64 {
    let t = scoring_letters(truth);
    if t.is_empty() {
        return 0.0;
    }
    let r = scoring_letters(recognized);
    let correct = t.len().saturating_sub(levenshtein(&t, &r));
    100.0 * correct as f64 / t.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub text: String,
    pub rate: f64,
    pub recognized: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub sentences: Vec<SentenceScore>,
    pub average: f64,
}

impl MetricsReport {
    /// One `sentence → rate%` row per sentence, then the average.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        for s in &self.sentences {
            let _ = writeln!(out, "{} → {:.1}%", s.text, s.rate);
        }
        let _ = writeln!(out, "Average → {:.1}%", self.average);
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metrics always serialize")
    }
}

/// Scores every labeled sentence trace. A trace that fails recognition
/// scores zero.
pub fn evaluate(
    sentences: &[(StrokeTrace, String)],
    m: &MlpModel,
    p: &SegmentationParams,
) -> Result<MetricsReport, RecognizeError> {
    if sentences.is_empty() {
        return Err(RecognizeError::EmptyCorpus);
    }
    p.validate()?;
    let scores: Vec<SentenceScore> = sentences
        .iter()
        .map(|(trace, text)| {
            let recognized = recognize_sentence(trace, m, p).map(|r| r.text).unwrap_or_default();
            SentenceScore {
                text: text.clone(),
                rate: recognition_rate(text, &recognized),
                recognized,
            }
        })
        .collect();
    let average = scores.iter().map(|s| s.rate).sum::<f64>() / scores.len() as f64;
    Ok(MetricsReport {
        sentences: scores,
        average,
    })
}

#[cfg(test)]
mod tests;
