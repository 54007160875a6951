use super::*;
use crate::corpus::{generate_sentence, GeneratorConfig, BENCHMARK_SENTENCES};
use crate::net::{HIDDEN, OUTPUTS};
use proptest::prelude::*;

fn stroke(pts: &[(f64, f64)]) -> Stroke {
    Stroke::new(pts.iter().enumerate().map(|(i, &(x, y))| Point::new(x, y, i as u64)).collect())
}

fn trace(strokes: Vec<Stroke>) -> StrokeTrace {
    StrokeTrace::new(strokes, 1000, 200)
}

fn clean() -> GeneratorConfig {
    GeneratorConfig::default().clean()
}

/// Answers `tag` for every input.
fn constant_model(tag: char) -> MlpModel {
    let mut m = MlpModel::zeros();
    assert_eq!(m.w2.len(), OUTPUTS * HIDDEN);
    m.b2[(tag as u8 - b'A') as usize] = 4.0;
    m
}

#[test]
fn default_params() {
    let p = SegmentationParams::default();
    assert_eq!((p.char_gap_ratio, p.word_gap_ratio, p.overlap_merge_ratio), (0.35, 1.0, 0.3));
    p.validate().unwrap();
    let bad = SegmentationParams {
        char_gap_ratio: 1.0,
        ..p
    };
    assert!(matches!(bad.validate(), Err(RecognizeError::InvalidParams)));
}

#[test]
fn single_stroke_is_one_group() {
    let g = segment_characters(&trace(vec![stroke(&[(10.0, 10.0), (40.0, 80.0)])]), &SegmentationParams::default());
    assert_eq!(g.len(), 1);
    assert_eq!(g[0].stroke_ids, vec![0]);
}

#[test]
fn two_stroke_t_merges() {
    let t = trace(vec![
        stroke(&[(10.0, 10.0), (50.0, 10.0)]),
        stroke(&[(30.0, 10.0), (30.0, 70.0)]),
        stroke(&[(100.0, 10.0), (140.0, 10.0)]),
        stroke(&[(104.0, 10.0), (140.0, 70.0)]),
    ]);
    let g = segment_characters(&t, &SegmentationParams::default());
    assert_eq!(g.iter().map(|g| g.stroke_ids.clone()).collect::<Vec<_>>(), vec![vec![0, 1], vec![2, 3]]);
    assert_eq!(g[0].bounds.max_x, 50.0);
}

#[test]
fn overlap_rule() {
    let b = |a: f64, z: f64| Bounds { min_x: a, min_y: 0.0, max_x: z, max_y: 10.0 };
    assert!(overlaps(&b(0.0, 40.0), &b(20.0, 60.0), 0.3));
    assert!(!overlaps(&b(0.0, 40.0), &b(36.0, 76.0), 0.3));
    assert!(!overlaps(&b(0.0, 40.0), &b(41.0, 76.0), 0.3));
    // A vertical line counts as overlapping anything it touches.
    assert!(overlaps(&b(5.0, 5.0), &b(5.0, 30.0), 0.3));
    assert!(!overlaps(&b(4.0, 4.0), &b(5.0, 30.0), 0.3));
}

#[test]
fn negative_whitespace_is_below_the_char_gap() {
    let t = trace(vec![stroke(&[(10.0, 10.0), (50.0, 60.0)]), stroke(&[(46.0, 10.0), (86.0, 60.0)])]);
    assert_eq!(segment_characters(&t, &SegmentationParams::default()).len(), 1);
}

/// Brute-force clustering of character boxes: two boxes share a cluster when
/// the whitespace between them is under the limit, closed transitively.
fn interval_oracle(boxes: &[(f64, f64)], limit: f64) -> Vec<Vec<usize>> {
    let n = boxes.len();
    let mut label: Vec<usize> = (0..n).collect();
    loop {
        let mut changed = false;
        for i in 0..n {
            for j in 0..n {
                let gap = boxes[j].0 - boxes[i].1;
                if i != j && gap >= 0.0 && gap < limit && label[j] != label[i] {
                    let (a, b) = (label[i].min(label[j]), label[i].max(label[j]));
                    label.iter_mut().filter(|l| **l == b).for_each(|l| *l = a);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    for l in 0..n {
        let members: Vec<usize> = (0..n).filter(|&i| label[i] == l).collect();
        if !members.is_empty() {
            out.push(members);
        }
    }
    out
}

#[test]
fn four_glyphs_at_known_offsets() {
    // Boxes 40 wide; gaps of 0.5 and 1.5 median widths.
    let lefts = [10.0, 70.0, 170.0, 230.0];
    let t = trace(
        lefts
            .iter()
            .map(|&x| stroke(&[(x, 20.0), (x + 20.0, 80.0), (x + 40.0, 20.0)]))
            .collect(),
    );
    let p = SegmentationParams::default();
    let groups = segment_characters(&t, &p);
    let boxes: Vec<(f64, f64)> = lefts.iter().map(|&x| (x, x + 40.0)).collect();
    let oracle = interval_oracle(&boxes, p.char_gap_ratio * 40.0);
    assert_eq!(groups.iter().map(|g| g.stroke_ids.clone()).collect::<Vec<_>>(), oracle);
    assert_eq!(groups.len(), 4);

    let r = recognize_sentence(&t, &constant_model('V'), &p).unwrap();
    assert_eq!(r.text, "VV VV");
    assert_eq!(r.words.len(), 2);
}

#[test]
fn empty_trace_propagates() {
    let e = recognize_sentence(&trace(vec![]), &constant_model('A'), &SegmentationParams::default()).unwrap_err();
    assert!(matches!(e, RecognizeError::Trace(TraceError::EmptyTrace)));
    assert_eq!(e.name(), "EmptyTrace");
}

#[test]
fn crop_moves_to_origin() {
    let t = trace(vec![stroke(&[(10.5, 20.0), (30.0, 22.0)]), stroke(&[(500.0, 1.0)])]);
    let c = crop_trace(&t, &[0]);
    assert_eq!((c.canvas_width, c.canvas_height), (20, 3));
    assert_eq!(c.strokes[0].points[0], Point::new(0.0, 0.0, 0));
    assert_eq!(c.strokes[0].points[1], Point::new(19.5, 2.0, 1));
}

#[test]
fn glyph_image_ignores_position() {
    let a = trace(vec![stroke(&[(10.0, 10.0), (40.0, 80.0), (70.0, 10.0)])]);
    let b = trace(vec![stroke(&[(510.0, 110.0), (540.0, 180.0), (570.0, 110.0)])]);
    let ia = glyph_image(&a).unwrap();
    assert_eq!(ia, glyph_image(&b).unwrap());
    let (x0, y0, x1, y1) = ia.bbox().unwrap();
    assert_eq!(y1 - y0 + 1, 56);
    assert!(x1 - x0 + 1 <= 56);
}

#[test]
fn result_structure() {
    let t = generate_sentence("India is", &clean()).unwrap();
    let r = recognize_sentence(&t, &constant_model('Q'), &SegmentationParams::default()).unwrap();
    assert_eq!(r.text, "QQQQQ QQ");
    assert_eq!(r.char_count(), 7);
    assert!(r.warnings.is_empty());
    let ids: Vec<usize> = r.words.iter().flatten().flat_map(|c| c.stroke_ids.clone()).collect();
    assert_eq!(ids, (0..t.strokes.len()).collect::<Vec<_>>());
    let lefts: Vec<f64> = r.words.iter().flatten().map(|c| c.bbox.min_x).collect();
    assert!(lefts.windows(2).all(|w| w[0] < w[1]));
    for c in r.words.iter().flatten() {
        assert!(c.confidence > 0.0 && c.confidence < 1.0);
    }
    let again: Vec<String> = r.words.iter().map(|w| w.iter().map(|c| c.tag).collect()).collect();
    assert_eq!(again.join(" "), r.text);
    let json = r.to_json();
    assert!(json.starts_with("{\"words\":[[{\"tag\":\"Q\",\"confidence\":"));
    assert_eq!(serde_json::from_str::<SentenceResult>(&json).unwrap(), r);
}

#[test]
fn template_sentences_segment_into_their_letters() {
    let p = SegmentationParams::default();
    for text in BENCHMARK_SENTENCES {
        let t = generate_sentence(text, &clean()).unwrap();
        let letters = scoring_letters(text).len();
        assert_eq!(segment_characters(&t, &p).len(), letters, "{text}");
        let words = text.split_whitespace().count();
        let r = recognize_sentence(&t, &constant_model('E'), &p).unwrap();
        assert_eq!(r.words.len(), words, "{text}");
    }
}

#[test]
fn jittered_sentences_segment_into_their_letters() {
    let p = SegmentationParams::default();
    for seed in 0..20 {
        let cfg = GeneratorConfig {
            seed,
            ..GeneratorConfig::default()
        };
        for text in BENCHMARK_SENTENCES {
            let t = generate_sentence(text, &cfg).unwrap();
            assert_eq!(segment_characters(&t, &p).len(), scoring_letters(text).len(), "{text} seed {seed}");
        }
    }
}

fn transform(t: &StrokeTrace, k: f64, dx: f64, dy: f64) -> StrokeTrace {
    let strokes: Vec<Stroke> = t
        .strokes
        .iter()
        .map(|s| Stroke::new(s.points.iter().map(|p| Point::new(p.x * k + dx, p.y * k + dy, p.t)).collect()))
        .collect();
    let w = (t.canvas_width as f64 * k + dx).ceil() as u32 + 1;
    let h = (t.canvas_height as f64 * k + dy).ceil() as u32 + 1;
    StrokeTrace::new(strokes, w, h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn scaling_keeps_group_count(k in 0.5f64..2.0, which in 0usize..5, seed in 0u64..1000) {
        let cfg = GeneratorConfig { seed, ..GeneratorConfig::default() };
        let t = generate_sentence(BENCHMARK_SENTENCES[which], &cfg).unwrap();
        let p = SegmentationParams::default();
        prop_assert_eq!(segment_characters(&transform(&t, k, 0.0, 0.0), &p).len(), segment_characters(&t, &p).len());
    }

    #[test]
    fn translation_keeps_text(dx in 0u32..300, dy in 0u32..300, which in 0usize..5) {
        let t = generate_sentence(BENCHMARK_SENTENCES[which], &GeneratorConfig::default()).unwrap();
        // Ties the answer to the geometry: the class is whatever sector holds
        // the most ink, so any pixel shift would show up.
        let mut m = MlpModel::zeros();
        for k in 0..12 {
            m.w1[k * 12 + k] = 8.0;
            m.w2[k * HIDDEN + k] = 8.0;
        }
        let p = SegmentationParams::default();
        let a = recognize_sentence(&t, &m, &p).unwrap();
        let b = recognize_sentence(&transform(&t, 1.0, dx as f64, dy as f64), &m, &p).unwrap();
        prop_assert_eq!(a.text, b.text);
    }

    #[test]
    fn levenshtein_bounds(a in "[A-D]{0,12}", b in "[A-D]{0,12}") {
        let (a, b): (Vec<char>, Vec<char>) = (a.chars().collect(), b.chars().collect());
        let d = levenshtein(&a, &b);
        prop_assert_eq!(d, levenshtein(&b, &a));
        prop_assert!(d <= a.len().max(b.len()));
        prop_assert!(d >= a.len().abs_diff(b.len()));
        prop_assert_eq!(d == 0, a == b);
    }
}

#[test]
fn levenshtein_examples() {
    let c = |s: &str| s.chars().collect::<Vec<_>>();
    assert_eq!(levenshtein(&c("KITTEN"), &c("SITTING")), 3);
    assert_eq!(levenshtein(&c(""), &c("ABC")), 3);
    assert_eq!(levenshtein(&c("FLAW"), &c("LAWN")), 2);
}

#[test]
fn rates() {
    assert_eq!(recognition_rate("India is", "INDIA IS"), 100.0);
    assert_eq!(recognition_rate("At the school level, sport", "ATTHESCHOOLLEVELSPORT"), 100.0);
    assert_eq!(recognition_rate("abcd", "ABXD"), 75.0);
    assert_eq!(recognition_rate("abcd", "ABD"), 75.0);
    assert_eq!(recognition_rate("ab", "QQQQQQ"), 0.0);
}

#[test]
fn evaluate_reports() {
    let p = SegmentationParams::default();
    let m = constant_model('A');
    assert!(matches!(evaluate(&[], &m, &p), Err(RecognizeError::EmptyCorpus)));

    let corpus: Vec<(StrokeTrace, String)> = ["a A", "Aa, a", "AB"]
        .iter()
        .map(|s| (generate_sentence(s, &clean()).unwrap(), s.to_string()))
        .collect();
    let r = evaluate(&corpus, &m, &p).unwrap();
    let rates: Vec<f64> = r.sentences.iter().map(|s| s.rate).collect();
    assert_eq!(rates, vec![100.0, 100.0, 50.0]);
    assert!((r.average - 250.0 / 3.0).abs() < 1e-12);
    assert_eq!(r.sentences[1].recognized, "AA A");
    assert_eq!(r.to_table(), "a A → 100.0%\nAa, a → 100.0%\nAB → 50.0%\nAverage → 83.3%\n");
    assert!(r.to_json().starts_with("{\"sentences\":[{\"text\":\"a A\",\"rate\":100.0,"));
    assert_eq!(evaluate(&corpus, &m, &p).unwrap(), r);
}
