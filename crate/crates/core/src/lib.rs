//! Marker-based recognition toolkit.
//!
//! The detection path runs a grayscale frame through thresholding, contour
//! tracing, quad extraction and perspective rectification, then identifies each
//! rectified patch either by decoding a Golay-coded marker or by correlating it
//! against a template library. A second path classifies free-form silhouettes
//! from radial flag vectors with a small multilayer perceptron. The [`service`]
//! module exposes both over a binary TCP protocol so a thin client can offload
//! recognition.

pub mod geometry;
pub mod golay;
pub mod imaging;
pub mod pipeline;
pub mod segmentation;
pub mod service;
pub mod shape;
pub mod synth;
pub mod template;

pub use geometry::{homography_from_points, warp_patch, Homography, Point2};
pub use golay::{
    golay_decode, golay_encode, read_canonical, render_marker, Codeword24, Decoded, MarkerId,
    MarkerRead,
};
pub use imaging::{pgm_read, pgm_write, BinaryImage, GrayImage, RgbImage};
pub use pipeline::{
    detect_markers, recognize_shapes, DetectConfig, MarkerDetection, ShapeDetection,
    ThresholdMethod,
};
pub use segmentation::{find_quads, trace_contours, QuadCandidate, RegionNode};
pub use shape::{FlagVector, MlpModel, TrainConfig};
pub use template::{ncc, TemplateLibrary};
