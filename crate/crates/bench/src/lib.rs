//! Fixtures shared by the criterion benches.

use armark_core::golay::{render_marker, MarkerId, CELL_PX, PATCH_SIZE};
use armark_core::imaging::GrayImage;
use armark_core::synth::place_marker_aligned;
use armark_core::template::{Template, TemplateLibrary};

/// 640x480 frame with six axis-aligned markers in assorted orientations.
pub fn marker_scene() -> GrayImage {
    let mut scene = GrayImage::filled(640, 480, 255);
    for (i, v) in [7u32, 1000, 2047, 4095, 3333, 512].into_iter().enumerate() {
        let (col, row) = (i as u32 % 3, i as u32 / 3);
        let id = MarkerId::new(v).expect("ids are in range");
        place_marker_aligned(
            &mut scene,
            id,
            CELL_PX,
            40 + 200 * col,
            60 + 200 * row,
            i as u8,
        )
        .expect("valid placement");
    }
    scene
}

/// Deterministic textured frame for threshold benches.
pub fn textured(width: u32, height: u32) -> GrayImage {
    GrayImage::from_fn(width, height, |x, y| {
        (x.wrapping_mul(31) ^ y.wrapping_mul(17)).wrapping_mul(2_654_435_761) as u8
    })
}

pub fn marker_patch(v: u32) -> GrayImage {
    render_marker(MarkerId::new(v).expect("ids are in range"), CELL_PX)
        .expect("valid cell size")
        .crop(CELL_PX, CELL_PX, PATCH_SIZE, PATCH_SIZE)
}

pub fn template_library(count: u32) -> TemplateLibrary {
    let templates = (0..count)
        .map(|i| Template {
            label: format!("t{i}"),
            image: marker_patch(i * 397 % 4096),
        })
        .collect();
    TemplateLibrary::new(templates, TemplateLibrary::DEFAULT_MIN_SCORE).expect("distinct templates")
}
