mod common;

use armark_core::geometry::Point2;
use armark_core::golay::{MarkerId, CELL_PX, PATCH_SIZE};
use armark_core::imaging::BinaryImage;
use armark_core::imaging::GrayImage;
use armark_core::pipeline::{detect_markers, recognize_shapes, DetectConfig, ThresholdMethod};
use armark_core::segmentation::QuadCandidate;
use armark_core::synth::{draw_shape, place_marker, place_marker_aligned, ShapeKind};

fn id(v: u32) -> MarkerId {
    MarkerId::new(v).unwrap()
}

#[test]
fn blank_image_has_no_markers() {
    assert!(detect_markers(&GrayImage::filled(200, 150, 255), &DetectConfig::default()).is_empty());
}

#[test]
fn three_aligned_markers() {
    let mut scene = GrayImage::filled(320, 200, 255);
    let truth: Vec<(u32, [Point2; 4])> = [(0u32, 10u32, 20u32), (1000, 110, 60), (4095, 220, 100)]
        .into_iter()
        .map(|(v, x, y)| {
            (
                v,
                place_marker_aligned(&mut scene, id(v), CELL_PX, x, y, 0).unwrap(),
            )
        })
        .collect();
    let dets = detect_markers(&scene, &DetectConfig::default());
    assert_eq!(dets.len(), 3);
    for ((v, corners), d) in truth.iter().zip(&dets) {
        assert_eq!((d.id, d.corrected_bits), (id(*v), 0));
        assert!(
            common::max_corner_error(&d.corners, corners) <= 1.5,
            "{d:?}"
        );
    }
}

#[test]
fn perspective_warps_recovered() {
    let side = f64::from(PATCH_SIZE);
    for corners in common::mild_warps(30.0, 30.0, side) {
        let mut scene = GrayImage::filled(120, 120, 255);
        place_marker(&mut scene, id(1234), CELL_PX, corners).unwrap();
        let dets = detect_markers(&scene, &DetectConfig::default());
        assert_eq!(dets.len(), 1);
        assert_eq!(dets[0].id, id(1234));
        let truth = QuadCandidate::from_corners(corners).corners;
        assert!(common::max_corner_error(&dets[0].corners, &truth) <= 1.5);
    }
}

#[test]
fn translation_equivariant() {
    let render = |dx: u32, dy: u32| {
        let mut scene = GrayImage::filled(200, 160, 255);
        place_marker(
            &mut scene,
            id(321),
            CELL_PX,
            common::mild_warps(30.0 + f64::from(dx), 25.0 + f64::from(dy), 60.0)[3],
        )
        .unwrap();
        detect_markers(&scene, &DetectConfig::default())
    };
    let base = render(0, 0);
    assert_eq!(base.len(), 1);
    for (dx, dy) in [(1, 0), (0, 3), (17, 29), (50, 41)] {
        let moved = render(dx, dy);
        assert_eq!(moved.len(), 1);
        assert_eq!(moved[0].id, base[0].id);
        for (a, b) in base[0].corners.iter().zip(&moved[0].corners) {
            let shifted = Point2::new(a.x + f64::from(dx), a.y + f64::from(dy));
            assert!(
                shifted.dist(*b) <= 0.75,
                "shift ({dx},{dy}): {shifted:?} vs {b:?}"
            );
        }
    }
}

#[test]
fn deterministic_and_bounded_corrections() {
    let mut rng = common::rng(40);
    let mut scene = GrayImage::filled(400, 300, 255);
    for (i, v) in [17u32, 900, 2500, 4000].into_iter().enumerate() {
        place_marker_aligned(
            &mut scene,
            id(v),
            CELL_PX,
            20 + 95 * i as u32,
            40 + 30 * i as u32,
            i as u8,
        )
        .unwrap();
    }
    let noisy = common::add_noise(&scene, 8.0, &mut rng);
    let first = detect_markers(&noisy, &DetectConfig::default());
    assert_eq!(first.len(), 4);
    assert!(first.iter().all(|d| d.corrected_bits <= 3));
    assert_eq!(first, detect_markers(&noisy, &DetectConfig::default()));
}

#[test]
fn global_threshold_config_also_works() {
    let mut scene = GrayImage::filled(120, 120, 255);
    place_marker_aligned(&mut scene, id(2048), CELL_PX, 20, 20, 2).unwrap();
    let cfg = DetectConfig {
        threshold: ThresholdMethod::Global(128),
        ..DetectConfig::default()
    };
    let dets = detect_markers(&scene, &cfg);
    assert_eq!(dets.len(), 1);
    assert_eq!(dets[0].id, id(2048));
}

#[test]
fn disc_and_square_scene_classified() {
    let (model, _) = common::five_shape_model(11);
    let mut mask = BinaryImage::empty(220, 120);
    draw_shape(&mut mask, ShapeKind::Disc, 55.0, 60.0, 70.0, 0.0);
    draw_shape(&mut mask, ShapeKind::Square, 160.0, 60.0, 50.0, 0.4);
    // tiny speck below min_area
    draw_shape(&mut mask, ShapeKind::Disc, 110.0, 110.0, 4.0, 0.0);
    let img = GrayImage::from_fn(220, 120, |x, y| if mask.get(x, y) { 0 } else { 255 });
    let cfg = DetectConfig {
        threshold: ThresholdMethod::Global(128),
        ..DetectConfig::default()
    };
    let found = recognize_shapes(&img, &cfg, &model).unwrap();
    let labels: Vec<&str> = found.iter().map(|s| s.label.as_str()).collect();
    assert_eq!(labels, ["disc", "square"]);
    assert!(found.iter().all(|s| (0.0..=1.0).contains(&s.confidence)));
    assert!((found[0].centroid.x - 55.0).abs() < 1.0 && (found[0].centroid.y - 60.0).abs() < 1.0);
    assert!(
        recognize_shapes(&GrayImage::filled(50, 50, 255), &cfg, &model)
            .unwrap()
            .is_empty()
    );
}

#[test]
fn shape_model_dimension_checked() {
    let (model, _) = common::five_shape_model(11);
    let cfg = DetectConfig {
        rays: 36,
        ..DetectConfig::default()
    };
    assert!(recognize_shapes(&GrayImage::filled(10, 10, 255), &cfg, &model).is_err());
}
