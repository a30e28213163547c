//! Correlation-based identification against a library of canonical patches.

use crate::imaging::{pgm_read, GrayImage, ImageError};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("image sizes differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),
    #[error("image has zero variance")]
    ZeroVariance,
    #[error("template library is empty")]
    EmptyLibrary,
    #[error("duplicate template label {0:?}")]
    DuplicateLabel(String),
    #[error("template {0:?} has zero variance")]
    FlatTemplate(String),
    #[error("template {label:?} is {got:?}, library size is {want:?}")]
    TemplateSize {
        label: String,
        got: (u32, u32),
        want: (u32, u32),
    },
    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("decoding {path}: {source}")]
    Decode { path: String, source: ImageError },
}

fn zero_mean(img: &GrayImage) -> (Vec<f64>, f64) {
    let n = img.pixels().len() as f64;
    let mean = img.pixels().iter().map(|&p| f64::from(p)).sum::<f64>() / n;
    let centred: Vec<f64> = img.pixels().iter().map(|&p| f64::from(p) - mean).collect();
    let energy = centred.iter().map(|v| v * v).sum();
    (centred, energy)
}

/// Zero-mean normalized cross-correlation, in `[-1, 1]`.
pub fn ncc(a: &GrayImage, b: &GrayImage) -> Result<f64, TemplateError> {
    if (a.width(), a.height()) != (b.width(), b.height()) {
        return Err(TemplateError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    let (ca, ea) = zero_mean(a);
    let (cb, eb) = zero_mean(b);
    if ea == 0.0 || eb == 0.0 {
        return Err(TemplateError::ZeroVariance);
    }
    let cross: f64 = ca.iter().zip(&cb).map(|(x, y)| x * y).sum();
    Ok((cross / (ea * eb).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    pub label: String,
    pub image: GrayImage,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Match {
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone)]
pub struct TemplateLibrary {
    templates: Vec<Template>,
    pub min_score: f64,
}

impl TemplateLibrary {
    pub const DEFAULT_MIN_SCORE: f64 = 0.7;

    /// Labels must be unique, every template non-flat and all of one size.
    pub fn new(templates: Vec<Template>, min_score: f64) -> Result<Self, TemplateError> {
        let first = templates.first().ok_or(TemplateError::EmptyLibrary)?;
        let want = (first.image.width(), first.image.height());
        for (i, t) in templates.iter().enumerate() {
            if templates[..i].iter().any(|o| o.label == t.label) {
                return Err(TemplateError::DuplicateLabel(t.label.clone()));
            }
            let got = (t.image.width(), t.image.height());
            if got != want {
                return Err(TemplateError::TemplateSize {
                    label: t.label.clone(),
                    got,
                    want,
                });
            }
            if zero_mean(&t.image).1 == 0.0 {
                return Err(TemplateError::FlatTemplate(t.label.clone()));
            }
        }
        Ok(Self {
            templates,
            min_score,
        })
    }

    /// Load every `*.pgm` in `dir`, sorted by file name; the label is the file stem.
    pub fn load_dir(dir: &Path, min_score: f64) -> Result<Self, TemplateError> {
        let io_err = |source| TemplateError::Io {
            path: dir.display().to_string(),
            source,
        };
        let mut paths: Vec<_> = std::fs::read_dir(dir)
            .map_err(io_err)?
            .collect::<Result<Vec<_>, _>>()
            .map_err(io_err)?
            .into_iter()
            .map(|e| e.path())
            .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
            .collect();
        paths.sort();
        let mut templates = Vec::with_capacity(paths.len());
        for path in paths {
            let bytes = std::fs::read(&path).map_err(|source| TemplateError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let image = pgm_read(&bytes).map_err(|source| TemplateError::Decode {
                path: path.display().to_string(),
                source,
            })?;
            let label = path
                .file_stem()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned();
            templates.push(Template { label, image });
        }
        Self::new(templates, min_score)
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    /// Size every template shares.
    pub fn patch_size(&self) -> (u32, u32) {
        let img = &self.templates[0].image;
        (img.width(), img.height())
    }

    /// Highest-scoring template, if it clears `min_score`. Earlier templates win ties.
    pub fn best_match(&self, patch: &GrayImage) -> Result<Option<Match>, TemplateError> {
        let mut best: Option<(usize, f64)> = None;
        for (i, t) in self.templates.iter().enumerate() {
            let score = ncc(patch, &t.image)?;
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((i, score));
            }
        }
        Ok(best
            .filter(|&(_, s)| s >= self.min_score)
            .map(|(i, score)| Match {
                label: self.templates[i].label.clone(),
                score,
            }))
    }
}
