//! Gesture data model: points, strokes and traces, plus validation,
//! arc-length resampling and rasterization onto a pixel grid.
//!
//! Traces travel as UTF-8 JSON:
//! `{"canvas":{"w":W,"h":H},"strokes":[{"points":[[x,y,t],...]},...]}`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::image::BinaryImage;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    /// Milliseconds since the start of the trace.
    pub t: u64,
}

impl Point {
    pub fn new(x: f64, y: f64, t: u64) -> Self {
        Self { x, y, t }
    }

    fn dist(&self, other: &Point) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }
}

/// One continuous pen-down segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Stroke {
    pub points: Vec<Point>,
}

impl Stroke {
    pub fn new(points: Vec<Point>) -> Self {
        Self { points }
    }

    /// Polyline length in pixels.
    pub fn length(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].dist(&w[1])).sum()
    }

    pub fn reversed(&self) -> Stroke {
        Stroke::new(self.points.iter().rev().copied().collect())
    }

    /// `None` for a stroke with no points.
    pub fn bounds(&self) -> Option<Bounds> {
        Bounds::of_points(self.points.iter())
    }
}

/// Axis-aligned bounding box in trace coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Bounds {
    pub fn of_points<'a>(mut points: impl Iterator<Item = &'a Point>) -> Option<Bounds> {
        let first = points.next()?;
        let mut b = Bounds {
            min_x: first.x,
            min_y: first.y,
            max_x: first.x,
            max_y: first.y,
        };
        for p in points {
            b.min_x = b.min_x.min(p.x);
            b.min_y = b.min_y.min(p.y);
            b.max_x = b.max_x.max(p.x);
            b.max_y = b.max_y.max(p.y);
        }
        Some(b)
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn union(&self, other: &Bounds) -> Bounds {
        Bounds {
            min_x: self.min_x.min(other.min_x),
            min_y: self.min_y.min(other.min_y),
            max_x: self.max_x.max(other.max_x),
            max_y: self.max_y.max(other.max_y),
        }
    }
}

/// An ordered set of strokes drawn on a canvas of `canvas_width` × `canvas_height` pixels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(from = "WireTrace", into = "WireTrace")]
pub struct StrokeTrace {
    pub strokes: Vec<Stroke>,
    pub canvas_width: u32,
    pub canvas_height: u32,
}

impl StrokeTrace {
    pub fn new(strokes: Vec<Stroke>, canvas_width: u32, canvas_height: u32) -> Self {
        Self {
            strokes,
            canvas_width,
            canvas_height,
        }
    }

    pub fn bounds(&self) -> Option<Bounds> {
        Bounds::of_points(self.strokes.iter().flat_map(|s| s.points.iter()))
    }

    pub fn point_count(&self) -> usize {
        self.strokes.iter().map(|s| s.points.len()).sum()
    }

    pub fn from_json(text: &str) -> Result<StrokeTrace, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("trace serialization is infallible")
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireCanvas {
    w: u32,
    h: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireStroke {
    points: Vec<(f64, f64, u64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WireTrace {
    canvas: WireCanvas,
    strokes: Vec<WireStroke>,
}

impl From<WireTrace> for StrokeTrace {
    fn from(w: WireTrace) -> Self {
        let strokes = w
            .strokes
            .into_iter()
            .map(|s| Stroke::new(s.points.into_iter().map(|(x, y, t)| Point::new(x, y, t)).collect()))
            .collect();
        StrokeTrace::new(strokes, w.canvas.w, w.canvas.h)
    }
}

impl From<StrokeTrace> for WireTrace {
    fn from(t: StrokeTrace) -> Self {
        WireTrace {
            canvas: WireCanvas {
                w: t.canvas_width,
                h: t.canvas_height,
            },
            strokes: t
                .strokes
                .into_iter()
                .map(|s| WireStroke {
                    points: s.points.into_iter().map(|p| (p.x, p.y, p.t)).collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TraceError {
    #[error("trace has no strokes")]
    EmptyTrace,
    #[error("canvas dimensions must be positive, got {width}x{height}")]
    InvalidCanvas { width: u32, height: u32 },
    #[error("stroke {stroke} has no points")]
    EmptyStroke { stroke: usize },
    #[error("stroke {stroke} point {point} lies outside the canvas")]
    OutOfBounds { stroke: usize, point: usize },
    #[error("stroke {stroke} point {point} goes back in time")]
    NonMonotoneTime { stroke: usize, point: usize },
    #[error("stroke {stroke} point {point} has a non-finite coordinate")]
    NonFiniteCoordinate { stroke: usize, point: usize },
}

impl TraceError {
    /// Stable error name used on the wire and in CLI diagnostics.
    pub fn name(&self) -> &'static str {
        match self {
            TraceError::EmptyTrace => "EmptyTrace",
            TraceError::InvalidCanvas { .. } => "InvalidCanvas",
            TraceError::EmptyStroke { .. } => "EmptyStroke",
            TraceError::OutOfBounds { .. } => "OutOfBounds",
            TraceError::NonMonotoneTime { .. } => "NonMonotoneTime",
            TraceError::NonFiniteCoordinate { .. } => "NonFiniteCoordinate",
        }
    }
}

/// Checks every trace invariant and hands the trace back untouched when they hold.
pub fn validate_trace(raw: StrokeTrace) -> Result<StrokeTrace, TraceError> {
    if raw.strokes.is_empty() {
        return Err(TraceError::EmptyTrace);
    }
    if raw.canvas_width == 0 || raw.canvas_height == 0 {
        return Err(TraceError::InvalidCanvas {
            width: raw.canvas_width,
            height: raw.canvas_height,
        });
    }
    let (w, h) = (raw.canvas_width as f64, raw.canvas_height as f64);
    for (si, stroke) in raw.strokes.iter().enumerate() {
        if stroke.points.is_empty() {
            return Err(TraceError::EmptyStroke { stroke: si });
        }
        for (pi, p) in stroke.points.iter().enumerate() {
            if !p.x.is_finite() || !p.y.is_finite() {
                return Err(TraceError::NonFiniteCoordinate { stroke: si, point: pi });
            }
            if p.x < 0.0 || p.y < 0.0 || p.x > w || p.y > h {
                return Err(TraceError::OutOfBounds { stroke: si, point: pi });
            }
            if pi > 0 && p.t < stroke.points[pi - 1].t {
                return Err(TraceError::NonMonotoneTime { stroke: si, point: pi });
            }
        }
    }
    Ok(raw)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RasterError {
    #[error("spacing must be positive and finite, got {0}")]
    InvalidSpacing(f64),
    #[error("grid dimensions must be positive, got {width}x{height}")]
    InvalidGrid { width: u32, height: u32 },
}

/// Re-samples a stroke at uniform arc-length steps of `spacing`.
///
/// The first and last input points are always kept; timestamps are linearly
/// interpolated along each segment.
pub fn resample_stroke(s: &Stroke, spacing: f64) -> Result<Stroke, RasterError> {
    if !(spacing.is_finite() && spacing > 0.0) {
        return Err(RasterError::InvalidSpacing(spacing));
    }
    let Some(first) = s.points.first() else {
        return Ok(s.clone());
    };
    let last = *s.points.last().unwrap();
    let total = s.length();
    let mut out = vec![*first];
    if total == 0.0 {
        return Ok(Stroke::new(out));
    }

    // Arc-length position of the next sample and of the current segment start.
    let mut target = spacing;
    let mut seg_start = 0.0;
    let end_slack = spacing * 1e-9;
    for w in s.points.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = a.dist(&b);
        while len > 0.0 && target <= seg_start + len && target < total - end_slack {
            let u = (target - seg_start) / len;
            let t = a.t as f64 + u * (b.t as f64 - a.t as f64);
            out.push(Point::new(
                a.x + u * (b.x - a.x),
                a.y + u * (b.y - a.y),
                t.round() as u64,
            ));
            target += spacing;
        }
        seg_start += len;
    }
    out.push(last);
    Ok(Stroke::new(out))
}

/// Pixels of the 8-connected integer line between two grid cells.
///
/// The walk always starts from the lexicographically smaller endpoint, so the
/// pixel set does not depend on the drawing direction. The minor coordinate at
/// major step `i` of `n` is `i * d / n` rounded half up.
pub fn line_pixels(a: (i64, i64), b: (i64, i64)) -> Vec<(i64, i64)> {
    let (a, b) = if b < a { (b, a) } else { (a, b) };
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let x_major = dx.abs() >= dy.abs();
    let (d_major, d_minor) = if x_major { (dx, dy) } else { (dy, dx) };
    let n = d_major.abs();
    if n == 0 {
        return vec![a];
    }
    let step = d_major.signum();
    let two_n = 2 * n;
    // Invariant: 2*i*d_minor + n == two_n * q + r, with 0 <= r < two_n.
    let (mut q, mut r) = (0i64, n);
    let mut out = Vec::with_capacity(n as usize + 1);
    for i in 0..=n {
        let (major, minor) = (i * step, q);
        out.push(if x_major {
            (a.0 + major, a.1 + minor)
        } else {
            (a.0 + minor, a.1 + major)
        });
        r += 2 * d_minor;
        if r >= two_n {
            r -= two_n;
            q += 1;
        } else if r < 0 {
            r += two_n;
            q -= 1;
        }
    }
    out
}

fn to_cell(v: f64, canvas: u32, grid: u32) -> i64 {
    let c = (v * grid as f64 / canvas as f64).floor() as i64;
    c.clamp(0, grid as i64 - 1)
}

/// Draws every stroke as 1-pixel-wide 8-connected segments on a `grid_w` × `grid_h` image.
///
/// Canvas coordinates are scaled onto the grid independently per axis. Only the
/// geometry matters: timestamps and stroke direction do not affect the result.
pub fn rasterize(t: &StrokeTrace, grid_w: u32, grid_h: u32) -> Result<BinaryImage, RasterError> {
    if grid_w == 0 || grid_h == 0 {
        return Err(RasterError::InvalidGrid {
            width: grid_w,
            height: grid_h,
        });
    }
    let mut img = BinaryImage::new(grid_w as usize, grid_h as usize);
    let cw = t.canvas_width.max(1);
    let ch = t.canvas_height.max(1);
    for stroke in &t.strokes {
        let cells: Vec<(i64, i64)> = stroke
            .points
            .iter()
            .map(|p| (to_cell(p.x, cw, grid_w), to_cell(p.y, ch, grid_h)))
            .collect();
        if let [only] = cells.as_slice() {
            img.set(only.0 as usize, only.1 as usize, true);
        }
        for w in cells.windows(2) {
            for (x, y) in line_pixels(w[0], w[1]) {
                img.set(x as usize, y as usize, true);
            }
        }
    }
    Ok(img)
}
