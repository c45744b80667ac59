//! Observation and lane-segmentation pipeline: grayscale, resize, Canny,
//! Hough, slope partition, rasterization and 4-frame stacking.

pub mod canny;
pub mod frame;
pub mod hough;
pub mod lanes;
pub mod stack;
pub mod transform;

use thiserror::Error;

pub use canny::canny;
pub use frame::{decode_pnm, read_pnm, Frame, PnmImage, RgbFrame};
pub use hough::{hough_segments, LineSegment};
pub use lanes::{partition_filter_lines, rasterize_lines, segment_lanes, LanePair, SegmentParams, Segmentation};
pub use stack::ObservationStack;
pub use transform::{resize_area, resize_bilinear, rgb_to_grayscale, to_grayscale};

#[derive(Debug, Error, PartialEq)]
pub enum VisionError {
    #[error("pixel buffer has {actual} entries, expected {expected}")]
    SizeMismatch { expected: usize, actual: usize },
    #[error("color channel planes differ in size")]
    ChannelMismatch,
    #[error("image has zero size")]
    EmptyImage,
    #[error("canny thresholds must satisfy 0 < low < high <= 255 (got {low}, {high})")]
    Thresholds { low: f32, high: f32 },
    #[error("pnm: {0}")]
    Pnm(String),
}
