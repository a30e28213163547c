mod common;

use armark_core::imaging::pgm_write;
use armark_core::shape::{canonicalize, load_dataset_dir, FlagVector, MlpModel, TrainConfig};
use armark_core::synth::{render_shape, ShapeKind};
use proptest::prelude::*;

#[test]
fn five_shape_model_generalizes() {
    let (model, held_out) = common::five_shape_model(3);
    assert!(model.accuracy(&held_out).unwrap() >= 0.95);
}

#[test]
fn flag_vectors_stay_in_unit_range() {
    let mut rng = common::rng(50);
    for kind in ShapeKind::ALL {
        for _ in 0..5 {
            let v = common::shape_sample(kind, &mut rng);
            assert!(v.iter().all(|x| (0.0..=1.0).contains(x)));
            let max = v.iter().cloned().fold(0.0, f64::max);
            if kind == ShapeKind::Ring {
                // centre sits in the hole: arms stop at the inner edge, half the extent
                assert!((max - 0.5).abs() < 0.1, "ring max {max}");
            } else {
                assert!(max > 0.99, "{kind:?}: max {max}");
            }
        }
    }
}

#[test]
fn dataset_dir_round_trip_through_training() {
    let dir = tempfile::tempdir().unwrap();
    let mut rng = common::rng(51);
    for kind in [ShapeKind::Disc, ShapeKind::Cross] {
        let class_dir = dir.path().join(kind.name());
        std::fs::create_dir(&class_dir).unwrap();
        for i in 0..6 {
            use rand::Rng;
            let mask = render_shape(
                kind,
                rng.random_range(20.0..50.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let gray =
                armark_core::imaging::GrayImage::from_fn(mask.width(), mask.height(), |x, y| {
                    if mask.get(x, y) {
                        0
                    } else {
                        255
                    }
                });
            std::fs::write(class_dir.join(format!("{i:02}.pgm")), pgm_write(&gray)).unwrap();
        }
    }
    let data = load_dataset_dir(dir.path(), 70).unwrap();
    assert_eq!(data.labels(), ["cross", "disc"]);
    assert_eq!(data.len(), 12);
    let model = MlpModel::init(&[70, 8, 2], 1)
        .unwrap()
        .with_labels(data.labels().to_vec())
        .unwrap();
    let trained = model.train(&data, &TrainConfig::default()).unwrap();
    assert_eq!(trained.model.accuracy(&data).unwrap(), 1.0);
    let reloaded = MlpModel::load(&trained.model.save()).unwrap();
    assert_eq!(reloaded, trained.model);
}

#[test]
fn training_is_deterministic() {
    let mut rng = common::rng(52);
    let data = common::five_shape_set(4, &mut rng);
    let run = || {
        MlpModel::init(&[70, 6, 5], 9)
            .unwrap()
            .train(
                &data,
                &TrainConfig {
                    epochs: 20,
                    ..TrainConfig::default()
                },
            )
            .unwrap()
    };
    let (a, b) = (run(), run());
    assert_eq!(a.model, b.model);
    assert_eq!(a.loss_trace, b.loss_trace);
}

proptest! {
    #[test]
    fn canonicalize_is_shift_invariant(v in prop::collection::vec(0.0f64..=1.0, 1..40), k in 0usize..80) {
        let f = FlagVector(v);
        prop_assert_eq!(canonicalize(&f.shifted(k)), canonicalize(&f));
    }

    #[test]
    fn canonical_form_is_a_rotation(v in prop::collection::vec(0.0f64..=1.0, 1..40)) {
        let f = FlagVector(v);
        let c = canonicalize(&f);
        prop_assert!((0..f.len()).any(|k| f.shifted(k) == c));
    }
}
