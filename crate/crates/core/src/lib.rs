//! Mouse-gesture sentence recognition.
//!
//! The pipeline turns a drawn [`StrokeTrace`] into text:
//! segmentation into character groups, rasterization, size normalization,
//! directional thinning, 12-sector pixel-distribution features, and a
//! 12-200-26 sigmoid network trained with online backpropagation and
//! momentum.

pub mod corpus;
pub mod features;
pub mod image;
pub mod net;
pub mod preprocess;
pub mod recognizer;
pub mod stroke;

pub use features::{extract_features, Centroid, FeatureVector, SECTORS};
pub use image::BinaryImage;
pub use net::{MlpModel, TrainConfig, TrainReport};
pub use recognizer::{recognize_sentence, SegmentationParams, SentenceResult};
pub use stroke::{Point, Stroke, StrokeTrace, TraceError};
