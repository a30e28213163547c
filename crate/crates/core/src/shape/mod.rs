//! Shape classification: radial flag vectors fed to a multilayer perceptron.

mod flag;
mod mlp;

pub use flag::{canonicalize, extract_flag_vector, FlagVector, DEFAULT_RAYS};
pub use mlp::{
    sigmoid, Classification, Gradients, LabeledDataset, Layer, MlpModel, SplitMix64, TrainConfig,
    TrainOutcome,
};

use crate::imaging::{pgm_read, threshold_global, BinaryImage, ImageError};
use crate::segmentation::{trace_contours, RegionNode};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ShapeError {
    #[error("region has no pixels")]
    EmptyRegion,
    #[error("ray count must be positive")]
    ZeroRays,
    #[error("invalid layer dimensions {0:?}")]
    InvalidDims(Vec<usize>),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("class index {0} out of range")]
    ClassIndex(usize),
    #[error("{labels} labels for {classes} output classes")]
    LabelCount { labels: usize, classes: usize },
    #[error("invalid label {0:?} (must be unique, non-empty, without whitespace)")]
    BadLabel(String),
    #[error("learning rate must be positive, got {0}")]
    LearningRate(f64),
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Image { path: String, source: ImageError },
    #[error("{0}: no foreground region")]
    NoRegion(String),
}

/// Gray level below which a training mask pixel counts as foreground.
pub const MASK_THRESHOLD: u8 = 128;

/// Largest top-level region of a mask, by pixel count (first wins ties).
pub fn largest_region(mask: &BinaryImage) -> Option<RegionNode> {
    trace_contours(mask)
        .into_iter()
        .fold(None, |best: Option<RegionNode>, n| match best {
            Some(b) if b.pixel_count >= n.pixel_count => Some(b),
            _ => Some(n),
        })
}

/// Canonicalized flag vector of the largest region in a mask.
pub fn mask_descriptor(mask: &BinaryImage, rays: usize) -> Result<Option<FlagVector>, ShapeError> {
    match largest_region(mask) {
        Some(node) => Ok(Some(canonicalize(&extract_flag_vector(mask, &node, rays)?))),
        None => Ok(None),
    }
}

/// Load a training set laid out as one subdirectory of PGM masks per class.
///
/// Classes are the subdirectory names in lexicographic order; files within a
/// class are read in name order.
pub fn load_dataset_dir(dir: &Path, rays: usize) -> Result<LabeledDataset, ShapeError> {
    let io = |p: &Path| {
        let path = p.display().to_string();
        move |source| ShapeError::Io { path, source }
    };
    let mut classes: Vec<_> = std::fs::read_dir(dir)
        .map_err(io(dir))?
        .collect::<Result<Vec<_>, _>>()
        .map_err(io(dir))?
        .into_iter()
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    classes.sort();
    let mut labels = Vec::new();
    let mut samples = Vec::new();
    for (ci, class_dir) in classes.iter().enumerate() {
        labels.push(
            class_dir
                .file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned(),
        );
        let mut files: Vec<_> = std::fs::read_dir(class_dir)
            .map_err(io(class_dir))?
            .collect::<Result<Vec<_>, _>>()
            .map_err(io(class_dir))?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
            .collect();
        files.sort();
        for f in files {
            let bytes = std::fs::read(&f).map_err(io(&f))?;
            let img = pgm_read(&bytes).map_err(|source| ShapeError::Image {
                path: f.display().to_string(),
                source,
            })?;
            let mask = threshold_global(&img, MASK_THRESHOLD);
            let v = mask_descriptor(&mask, rays)?
                .ok_or_else(|| ShapeError::NoRegion(f.display().to_string()))?;
            samples.push((v.0, ci));
        }
    }
    LabeledDataset::new(samples, labels)
}
