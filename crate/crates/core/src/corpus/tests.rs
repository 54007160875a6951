use super::*;
use crate::stroke::validate_trace;

fn small() -> GeneratorConfig {
    GeneratorConfig {
        samples_per_class: 3,
        ..GeneratorConfig::default()
    }
}

#[test]
fn text_normalization() {
    assert_eq!(normalize_text("At the school level, sport").unwrap(), "AT THE SCHOOL LEVEL SPORT");
    assert_eq!(normalize_text("  a   b ").unwrap(), "A B");
    assert_eq!(normalize_text("x , y").unwrap(), "X Y");
    assert!(matches!(normalize_text("route 66"), Err(CorpusError::UnsupportedCharacter('6'))));
    assert!(matches!(normalize_text("café"), Err(CorpusError::UnsupportedCharacter('é'))));
    assert!(matches!(normalize_text(" ,. "), Err(CorpusError::EmptyText)));
}

#[test]
fn glyph_corpus_shape_and_validity() {
    let c = generate_glyphs(&small());
    assert_eq!(c.glyphs.len(), 26 * 3);
    for (i, (trace, tag)) in c.glyphs.iter().enumerate() {
        assert_eq!(*tag, (b'A' + (i / 3) as u8) as char);
        assert_eq!(trace.canvas_width, GLYPH_CANVAS);
        assert_eq!(trace.strokes.len(), template(*tag).unwrap().strokes.len());
        validate_trace(trace.clone()).unwrap();
    }
}

#[test]
fn generation_is_seeded() {
    assert_eq!(generate_glyphs(&small()), generate_glyphs(&small()));
    let other = GeneratorConfig { seed: 7, ..small() };
    assert_ne!(generate_glyphs(&small()).glyphs, generate_glyphs(&other).glyphs);
}

#[test]
fn zero_jitter_reproduces_templates() {
    let c = generate_glyphs(&small().clean());
    for (trace, tag) in &c.glyphs {
        let t = template(*tag).unwrap();
        for (s, poly) in trace.strokes.iter().zip(&t.strokes) {
            assert_eq!(s.points.len(), poly.len());
            for (p, &(x, y)) in s.points.iter().zip(poly) {
                assert!((p.x - (20.0 + 60.0 * x)).abs() <= 5e-4, "{tag}");
                assert!((p.y - (20.0 + 60.0 * y)).abs() <= 5e-4, "{tag}");
            }
        }
    }
}

#[test]
fn jitter_stays_within_its_envelope() {
    // Rotation by at most 8° about the centre moves a unit-square point by at
    // most 2·sin(4°)·0.71 ≈ 0.099; scale adds up to 0.071 and noise 0.03 per axis.
    let c = generate_glyphs(&GeneratorConfig::default());
    let bound = 60.0 * (0.099 * 1.1 + 0.071 + 0.03 * 2f64.sqrt()) + 0.001;
    let clean = generate_glyphs(&GeneratorConfig::default().clean());
    for ((a, _), (b, _)) in c.glyphs.iter().zip(&clean.glyphs) {
        for (sa, sb) in a.strokes.iter().zip(&b.strokes) {
            for (pa, pb) in sa.points.iter().zip(&sb.points) {
                assert!((pa.x - pb.x).hypot(pa.y - pb.y) <= bound);
            }
        }
    }
}

#[test]
fn timestamps_follow_the_pen() {
    let t = &generate_glyphs(&small()).glyphs[0].0;
    let times: Vec<u64> = t.strokes.iter().flat_map(|s| s.points.iter().map(|p| p.t)).collect();
    assert_eq!(times[0], 0);
    assert!(times.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn clean_sentence_layout() {
    let cfg = small().clean();
    let t = generate_sentence("Ab, c", &cfg).unwrap();
    validate_trace(t.clone()).unwrap();
    let counts = [2, 2, 1];
    assert_eq!(t.strokes.len(), counts.iter().sum::<usize>());
    let mut boxes = Vec::new();
    let mut start = 0;
    for n in counts {
        let b = t.strokes[start..start + n]
            .iter()
            .map(|s| s.bounds().unwrap())
            .reduce(|a, b| a.union(&b))
            .unwrap();
        boxes.push(b);
        start += n;
    }
    assert!((boxes[0].min_x - GLYPH_MARGIN).abs() < 1e-3);
    assert!((boxes[1].min_x - boxes[0].max_x - 24.0).abs() < 2e-3);
    assert!((boxes[2].min_x - boxes[1].max_x - 84.0).abs() < 2e-3);
    assert!((boxes[0].min_y - 30.0).abs() < 1e-3 && (boxes[0].max_y - 90.0).abs() < 1e-3);
    assert_eq!(t.canvas_height, 120);
    assert_eq!(t.canvas_width, (boxes[2].max_x + 20.0).ceil() as u32);
}

#[test]
fn sentence_errors() {
    assert!(matches!(generate_sentence("abc1", &small()), Err(CorpusError::UnsupportedCharacter('1'))));
    assert!(matches!(generate_sentence("", &small()), Err(CorpusError::EmptyText)));
}

#[test]
fn invalid_configs() {
    let bad = [
        GeneratorConfig { samples_per_class: 0, ..small() },
        GeneratorConfig { jitter_noise: -0.1, ..small() },
        GeneratorConfig { jitter_rotation: f64::NAN, ..small() },
    ];
    for cfg in bad {
        assert!(matches!(generate_corpus(&cfg, &[]), Err(CorpusError::InvalidConfig)));
    }
}

#[test]
fn save_and_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let c = generate_corpus(&small(), &BENCHMARK_SENTENCES[..2]).unwrap();
    save_corpus(&c, dir.path()).unwrap();
    assert!(dir.path().join("glyphs/A_0.json").is_file());
    assert!(dir.path().join("glyphs/Z_2.json").is_file());
    assert!(dir.path().join("sentences/1.json").is_file());
    assert_eq!(load_corpus(dir.path()).unwrap(), c);
}

#[test]
fn load_errors() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(load_corpus(dir.path()), Err(CorpusError::MissingManifest(_))));

    let c = generate_corpus(&small(), &BENCHMARK_SENTENCES[..1]).unwrap();
    save_corpus(&c, dir.path()).unwrap();
    fs::write(dir.path().join("glyphs/B_1.json"), "{\"canvas\":").unwrap();
    match load_corpus(dir.path()) {
        Err(CorpusError::CorruptTrace { file, .. }) => assert_eq!(file, "glyphs/B_1.json"),
        other => panic!("{other:?}"),
    }
    fs::remove_file(dir.path().join("glyphs/B_1.json")).unwrap();
    assert!(matches!(load_corpus(dir.path()), Err(CorpusError::CorruptTrace { .. })));

    fs::write(dir.path().join("manifest.json"), "[1,2]").unwrap();
    assert!(matches!(load_corpus(dir.path()), Err(CorpusError::BadManifest(_))));
}

#[test]
fn stratified_split() {
    let c = generate_corpus(&GeneratorConfig { samples_per_class: 10, ..small() }, &BENCHMARK_SENTENCES).unwrap();
    let (train, test) = split(&c, 0.8, 3).unwrap();
    assert_eq!(train.glyphs.len(), 26 * 8);
    assert_eq!(test.glyphs.len(), 26 * 2);
    assert!(train.sentences.is_empty());
    assert_eq!(test.sentences.len(), 5);
    for tag in 'A'..='Z' {
        assert_eq!(train.glyphs.iter().filter(|g| g.1 == tag).count(), 8);
    }
    // Every original glyph lands in exactly one half, order preserved.
    let pos = |g: &(StrokeTrace, char)| c.glyphs.iter().position(|o| o == g).unwrap();
    let tp: Vec<usize> = train.glyphs.iter().map(pos).collect();
    let sp: Vec<usize> = test.glyphs.iter().map(pos).collect();
    assert!(tp.windows(2).all(|w| w[0] < w[1]) && sp.windows(2).all(|w| w[0] < w[1]));
    let mut all: Vec<usize> = tp.into_iter().chain(sp).collect();
    all.sort_unstable();
    assert_eq!(all, (0..c.glyphs.len()).collect::<Vec<_>>());

    assert_eq!(split(&c, 0.8, 3).unwrap(), (train.clone(), test));
    assert_ne!(split(&c, 0.8, 4).unwrap().0, train);
    for f in [0.0, 1.0, f64::NAN] {
        assert!(matches!(split(&c, f, 3), Err(CorpusError::InvalidFraction(_))));
    }
}

#[test]
fn feature_cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("features.csv");
    let mut f = [0.0; 12];
    f[0] = 0.25;
    f[7] = 0.75;
    let items = vec![('A', FeatureVector(f)), ('Q', FeatureVector([1.0 / 12.0; 12]))];
    write_feature_cache(&path, &items).unwrap();
    assert!(fs::read_to_string(&path).unwrap().starts_with("A,0.25,0,0,0,0,0,0,0.75,0,0,0,0\n"));
    assert_eq!(read_feature_cache(&path).unwrap(), items);

    fs::write(&path, "A,1,2\n").unwrap();
    assert!(matches!(read_feature_cache(&path), Err(CorpusError::BadFeatureCache { line: 1, .. })));
    fs::write(&path, "ab,1,1,1,1,1,1,1,1,1,1,1,1\n").unwrap();
    assert!(matches!(read_feature_cache(&path), Err(CorpusError::BadFeatureCache { .. })));
}
