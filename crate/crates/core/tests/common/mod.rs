#![allow(dead_code)]

use armark_core::geometry::Point2;
use armark_core::imaging::{BinaryImage, GrayImage};
use armark_core::shape::{
    canonicalize, extract_flag_vector, largest_region, LabeledDataset, MlpModel, TrainConfig,
};
use armark_core::synth::{render_shape, ShapeKind};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_gray(rng: &mut impl Rng, w: u32, h: u32) -> GrayImage {
    GrayImage::from_fn(w, h, |_, _| rng.random())
}

/// Straight windowed mean over the clipped window, no integral image.
pub fn adaptive_oracle(img: &GrayImage, window: u32, c: i32) -> BinaryImage {
    let r = i64::from(window / 2);
    let (w, h) = (i64::from(img.width()), i64::from(img.height()));
    BinaryImage::from_fn(img.width(), img.height(), |x, y| {
        let (x, y) = (i64::from(x), i64::from(y));
        let mut sum = 0.0;
        let mut n = 0.0;
        for yy in (y - r).max(0)..=(y + r).min(h - 1) {
            for xx in (x - r).max(0)..=(x + r).min(w - 1) {
                sum += f64::from(img.get(xx as u32, yy as u32));
                n += 1.0;
            }
        }
        f64::from(img.get(x as u32, y as u32)) < sum / n - f64::from(c)
    })
}

/// Dark square blobs under a left-to-right 40..220 illumination ramp.
/// Blob pixels keep 35% of the local illumination. Returns the image and truth mask.
pub fn ramp_scene() -> (GrayImage, BinaryImage) {
    let (w, h) = (160u32, 64u32);
    let blobs: Vec<(u32, u32)> = (0..8)
        .map(|i| (8 + i * 19, if i % 2 == 0 { 14 } else { 40 }))
        .collect();
    let in_blob = |x: u32, y: u32| {
        blobs
            .iter()
            .any(|&(bx, by)| (bx..bx + 7).contains(&x) && (by..by + 7).contains(&y))
    };
    let light = |x: u32| 40.0 + 180.0 * f64::from(x) / f64::from(w - 1);
    let img = GrayImage::from_fn(w, h, |x, y| {
        let l = light(x);
        (if in_blob(x, y) { 0.35 * l } else { l }).round() as u8
    });
    let truth = BinaryImage::from_fn(w, h, in_blob);
    (img, truth)
}

pub fn add_noise(img: &GrayImage, sigma: f64, rng: &mut impl Rng) -> GrayImage {
    let normal = Normal::new(0.0, sigma).unwrap();
    let mut out = img.clone();
    for p in out.pixels_mut() {
        *p = (f64::from(*p) + normal.sample(rng))
            .round()
            .clamp(0.0, 255.0) as u8;
    }
    out
}

/// Four mild perspective distortions of an axis-aligned square: each corner moves by
/// at most 15% of the side.
pub fn mild_warps(x: f64, y: f64, side: f64) -> [[Point2; 4]; 4] {
    let d = |fx: f64, fy: f64| (fx * side, fy * side);
    let offsets = [
        [d(0.12, 0.05), d(-0.12, 0.05), d(0.0, 0.0), d(0.0, 0.0)],
        [d(0.0, 0.0), d(-0.06, 0.10), d(-0.06, -0.10), d(0.0, 0.0)],
        [d(0.10, 0.0), d(0.0, 0.10), d(-0.10, 0.0), d(0.0, -0.10)],
        [
            d(-0.05, -0.08),
            d(0.08, 0.04),
            d(0.02, 0.09),
            d(-0.09, 0.03),
        ],
    ];
    let base = [(x, y), (x + side, y), (x + side, y + side), (x, y + side)];
    offsets.map(|o| std::array::from_fn(|i| Point2::new(base[i].0 + o[i].0, base[i].1 + o[i].1)))
}

pub fn max_corner_error(found: &[Point2; 4], truth: &[Point2; 4]) -> f64 {
    found
        .iter()
        .zip(truth)
        .map(|(a, b)| a.dist(*b))
        .fold(0.0, f64::max)
}

pub const FIVE_SHAPE_DIMS: [usize; 3] = [70, 32, 5];

/// Canonical flag vector of a freshly rendered silhouette with random rotation and size.
pub fn shape_sample(kind: ShapeKind, rng: &mut impl Rng) -> Vec<f64> {
    let size = rng.random_range(16.0..=64.0);
    let angle = rng.random_range(0.0..std::f64::consts::TAU);
    let mask = render_shape(kind, size, angle);
    let node = largest_region(&mask).expect("rendered shape is never empty");
    canonicalize(&extract_flag_vector(&mask, &node, FIVE_SHAPE_DIMS[0]).unwrap()).0
}

pub fn five_shape_set(per_class: usize, rng: &mut impl Rng) -> LabeledDataset {
    let mut samples = Vec::new();
    for (ci, &kind) in ShapeKind::ALL.iter().enumerate() {
        for _ in 0..per_class {
            samples.push((shape_sample(kind, rng), ci));
        }
    }
    let labels = ShapeKind::ALL
        .iter()
        .map(|k| k.name().to_string())
        .collect();
    LabeledDataset::new(samples, labels).unwrap()
}

/// 70-32-5 model trained on 50 samples per class. Returns the model and a 20-per-class
/// held-out set drawn from the same generator.
pub fn five_shape_model(seed: u64) -> (MlpModel, LabeledDataset) {
    let mut rng = rng(seed);
    let train = five_shape_set(50, &mut rng);
    let held_out = five_shape_set(20, &mut rng);
    let model = MlpModel::init(&FIVE_SHAPE_DIMS, seed)
        .unwrap()
        .with_labels(train.labels().to_vec())
        .unwrap();
    let cfg = TrainConfig {
        learning_rate: 0.1,
        epochs: 400,
        seed,
        shuffle: true,
    };
    (model.train(&train, &cfg).unwrap().model, held_out)
}
