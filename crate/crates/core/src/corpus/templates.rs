//! Built-in stroke templates for the 26 uppercase letters.
//!
//! Coordinates live in the unit square with y pointing down, the same
//! orientation as screen and canvas coordinates. Strokes follow the order and
//! direction a person would usually draw them with a mouse.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct GlyphTemplate {
    pub tag: char,
    pub strokes: Vec<Vec<(f64, f64)>>,
}

/// Elliptical arc from `from` to `to` degrees, measured counter-clockwise as
/// seen on screen, sampled at `n + 1` points.
fn arc(cx: f64, cy: f64, rx: f64, ry: f64, from: f64, to: f64, n: usize) -> Vec<(f64, f64)> {
    (0..=n)
        .map(|i| {
            let a = (from + (to - from) * i as f64 / n as f64) * PI / 180.0;
            (cx + rx * a.cos(), cy - ry * a.sin())
        })
        .collect()
}

fn strokes(tag: char) -> Vec<Vec<(f64, f64)>> {
    let line = |pts: &[(f64, f64)]| pts.to_vec();
    match tag {
        'A' => vec![line(&[(0.15, 1.0), (0.5, 0.0), (0.85, 1.0)]), line(&[(0.3, 0.62), (0.7, 0.62)])],
        'B' => vec![
            line(&[(0.2, 1.0), (0.2, 0.0), (0.6, 0.0), (0.75, 0.1), (0.75, 0.4), (0.6, 0.5), (0.2, 0.5)]),
            line(&[(0.2, 0.5), (0.65, 0.5), (0.8, 0.6), (0.8, 0.9), (0.65, 1.0), (0.2, 1.0)]),
        ],
        'C' => vec![arc(0.5, 0.5, 0.32, 0.5, 45.0, 315.0, 14)],
        'D' => vec![line(&[
            (0.2, 1.0),
            (0.2, 0.0),
            (0.5, 0.0),
            (0.72, 0.15),
            (0.8, 0.5),
            (0.72, 0.85),
            (0.5, 1.0),
            (0.2, 1.0),
        ])],
        'E' => vec![
            line(&[(0.75, 0.0), (0.2, 0.0), (0.2, 1.0), (0.75, 1.0)]),
            line(&[(0.2, 0.5), (0.65, 0.5)]),
        ],
        'F' => vec![line(&[(0.75, 0.0), (0.2, 0.0), (0.2, 1.0)]), line(&[(0.2, 0.5), (0.65, 0.5)])],
        'G' => {
            let mut s = arc(0.5, 0.5, 0.32, 0.5, 45.0, 320.0, 14);
            s.extend([(0.82, 0.7), (0.82, 0.55), (0.55, 0.55)]);
            vec![s]
        }
        'H' => vec![
            line(&[(0.2, 0.0), (0.2, 1.0)]),
            line(&[(0.8, 0.0), (0.8, 1.0)]),
            line(&[(0.2, 0.5), (0.8, 0.5)]),
        ],
        'I' => vec![
            line(&[(0.3, 0.0), (0.7, 0.0)]),
            line(&[(0.5, 0.0), (0.5, 1.0)]),
            line(&[(0.3, 1.0), (0.7, 1.0)]),
        ],
        'J' => vec![
            line(&[(0.3, 0.0), (0.8, 0.0)]),
            line(&[(0.65, 0.0), (0.65, 0.8), (0.55, 0.96), (0.4, 1.0), (0.25, 0.9), (0.2, 0.75)]),
        ],
        'K' => vec![line(&[(0.2, 0.0), (0.2, 1.0)]), line(&[(0.75, 0.0), (0.2, 0.55), (0.8, 1.0)])],
        'L' => vec![line(&[(0.25, 0.0), (0.25, 1.0), (0.75, 1.0)])],
        'M' => vec![line(&[(0.12, 1.0), (0.12, 0.0), (0.5, 0.6), (0.88, 0.0), (0.88, 1.0)])],
        'N' => vec![line(&[(0.2, 1.0), (0.2, 0.0), (0.8, 1.0), (0.8, 0.0)])],
        'O' => vec![arc(0.5, 0.5, 0.34, 0.5, 90.0, 450.0, 16)],
        'P' => vec![line(&[(0.2, 1.0), (0.2, 0.0), (0.6, 0.0), (0.78, 0.12), (0.78, 0.38), (0.6, 0.5), (0.2, 0.5)])],
        'Q' => vec![arc(0.5, 0.5, 0.34, 0.5, 90.0, 450.0, 16), line(&[(0.55, 0.7), (0.88, 1.0)])],
        'R' => vec![line(&[
            (0.2, 1.0),
            (0.2, 0.0),
            (0.6, 0.0),
            (0.78, 0.12),
            (0.78, 0.38),
            (0.6, 0.5),
            (0.35, 0.5),
            (0.8, 1.0),
        ])],
        'S' => vec![line(&[
            (0.78, 0.12),
            (0.6, 0.0),
            (0.35, 0.0),
            (0.2, 0.12),
            (0.2, 0.35),
            (0.35, 0.47),
            (0.65, 0.53),
            (0.8, 0.65),
            (0.8, 0.88),
            (0.65, 1.0),
            (0.35, 1.0),
            (0.2, 0.88),
        ])],
        'T' => vec![line(&[(0.15, 0.0), (0.85, 0.0)]), line(&[(0.5, 0.0), (0.5, 1.0)])],
        'U' => vec![line(&[
            (0.2, 0.0),
            (0.2, 0.75),
            (0.3, 0.95),
            (0.5, 1.0),
            (0.7, 0.95),
            (0.8, 0.75),
            (0.8, 0.0),
        ])],
        'V' => vec![line(&[(0.15, 0.0), (0.5, 1.0), (0.85, 0.0)])],
        'W' => vec![line(&[(0.1, 0.0), (0.3, 1.0), (0.5, 0.4), (0.7, 1.0), (0.9, 0.0)])],
        'X' => vec![line(&[(0.2, 0.0), (0.8, 1.0)]), line(&[(0.8, 0.0), (0.2, 1.0)])],
        'Y' => vec![line(&[(0.15, 0.0), (0.5, 0.5), (0.85, 0.0)]), line(&[(0.5, 0.5), (0.5, 1.0)])],
        'Z' => vec![line(&[(0.2, 0.0), (0.8, 0.0), (0.2, 1.0), (0.8, 1.0)])],
        _ => Vec::new(),
    }
}

/// Template for an uppercase ASCII letter.
pub fn template(tag: char) -> Option<GlyphTemplate> {
    let strokes = strokes(tag);
    (!strokes.is_empty()).then_some(GlyphTemplate { tag, strokes })
}

pub fn templates() -> Vec<GlyphTemplate> {
    ('A'..='Z').filter_map(template).collect()
}
