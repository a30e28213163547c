//! Raster types, PGM I/O, grayscale conversion and thresholding.
//!
//! Polarity is fixed crate-wide: in a [`BinaryImage`] a set pixel is
//! foreground, and foreground means *dark* (ink on paper).

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ImageError {
    #[error("image dimensions must be at least 1x1 (got {0}x{1})")]
    ZeroSize(u32, u32),
    #[error("pixel buffer has {actual} bytes, expected {expected}")]
    BufferSize { expected: usize, actual: usize },
    #[error("malformed PGM header: {0}")]
    MalformedHeader(&'static str),
    #[error("unsupported PGM maxval {0} (only 1..=255)")]
    UnsupportedMaxval(u32),
    #[error("truncated PGM pixel data: expected {expected} bytes, got {actual}")]
    Truncated { expected: usize, actual: usize },
}

fn check_dims(width: u32, height: u32, len: usize, channels: usize) -> Result<(), ImageError> {
    if width == 0 || height == 0 {
        return Err(ImageError::ZeroSize(width, height));
    }
    let expected = width as usize * height as usize * channels;
    if len != expected {
        return Err(ImageError::BufferSize {
            expected,
            actual: len,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl RgbImage {
    /// `pixels` holds row-major `(r, g, b)` triples.
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height, pixels.len(), 3)?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }
}

/// 8-bit luminance raster, row-major, 0 = black.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GrayImage {
    width: u32,
    height: u32,
    pixels: Vec<u8>,
}

impl GrayImage {
    pub fn new(width: u32, height: u32, pixels: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height, pixels.len(), 1)?;
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// Image filled with a single gray level.
    ///
    /// # Panics
    /// If either dimension is zero.
    pub fn filled(width: u32, height: u32, value: u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        Self {
            width,
            height,
            pixels: vec![value; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> u8) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        let mut pixels = Vec::with_capacity(width as usize * height as usize);
        for y in 0..height {
            for x in 0..width {
                pixels.push(f(x, y));
            }
        }
        Self {
            width,
            height,
            pixels,
        }
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    pub fn into_pixels(self) -> Vec<u8> {
        self.pixels
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> u8 {
        self.pixels[y as usize * self.width as usize + x as usize]
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: u8) {
        let w = self.width as usize;
        self.pixels[y as usize * w + x as usize] = value;
    }

    /// Copy of the rectangle `[x0, x0+w) x [y0, y0+h)`; the rectangle must lie inside the image.
    pub fn crop(&self, x0: u32, y0: u32, w: u32, h: u32) -> GrayImage {
        assert!(
            x0 + w <= self.width && y0 + h <= self.height,
            "crop out of bounds"
        );
        GrayImage::from_fn(w, h, |x, y| self.get(x0 + x, y0 + y))
    }

    /// Rotate by 90 degrees clockwise.
    pub fn rotate90(&self) -> GrayImage {
        let (w, h) = (self.width, self.height);
        GrayImage::from_fn(h, w, |x, y| self.get(y, h - 1 - x))
    }
}

/// Foreground mask, one byte per pixel holding 0 or 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    width: u32,
    height: u32,
    mask: Vec<u8>,
}

impl BinaryImage {
    pub fn new(width: u32, height: u32, mask: Vec<u8>) -> Result<Self, ImageError> {
        check_dims(width, height, mask.len(), 1)?;
        let mask = mask.into_iter().map(|v| u8::from(v != 0)).collect();
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    pub fn empty(width: u32, height: u32) -> Self {
        assert!(width > 0 && height > 0, "image dimensions must be non-zero");
        Self {
            width,
            height,
            mask: vec![0; width as usize * height as usize],
        }
    }

    pub fn from_fn(width: u32, height: u32, mut f: impl FnMut(u32, u32) -> bool) -> Self {
        let mut img = Self::empty(width, height);
        for y in 0..height {
            for x in 0..width {
                if f(x, y) {
                    img.set(x, y, true);
                }
            }
        }
        img
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn mask(&self) -> &[u8] {
        &self.mask
    }

    #[inline]
    pub fn get(&self, x: u32, y: u32) -> bool {
        self.mask[y as usize * self.width as usize + x as usize] != 0
    }

    /// Bounds-checked lookup; everything outside the raster is background.
    #[inline]
    pub fn get_signed(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && x < self.width as i64
            && y < self.height as i64
            && self.get(x as u32, y as u32)
    }

    #[inline]
    pub fn set(&mut self, x: u32, y: u32, value: bool) {
        let w = self.width as usize;
        self.mask[y as usize * w + x as usize] = u8::from(value);
    }

    pub fn count_foreground(&self) -> usize {
        self.mask.iter().filter(|&&v| v != 0).count()
    }

    /// Render as a gray image, foreground black on white.
    pub fn to_gray(&self) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self
                .mask
                .iter()
                .map(|&v| if v != 0 { 0 } else { 255 })
                .collect(),
        }
    }
}

/// Summed-area table with a zero first row and column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegralImage {
    width: u32,
    height: u32,
    sums: Vec<u64>,
}

impl IntegralImage {
    /// Width of the source image (the table is one wider).
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    /// Sum of the source pixels in `[0, x) x [0, y)`.
    #[inline]
    pub fn at(&self, x: u32, y: u32) -> u64 {
        self.sums[y as usize * (self.width as usize + 1) + x as usize]
    }

    /// Sum over the half-open rectangle `[x0, x1) x [y0, y1)`.
    #[inline]
    pub fn window_sum(&self, x0: u32, y0: u32, x1: u32, y1: u32) -> u64 {
        debug_assert!(x0 <= x1 && y0 <= y1);
        self.at(x1, y1) + self.at(x0, y0) - self.at(x1, y0) - self.at(x0, y1)
    }
}

pub fn integral(img: &GrayImage) -> IntegralImage {
    let (w, h) = (img.width as usize, img.height as usize);
    let stride = w + 1;
    let mut sums = vec![0u64; stride * (h + 1)];
    for y in 0..h {
        let mut row = 0u64;
        for x in 0..w {
            row += u64::from(img.pixels[y * w + x]);
            sums[(y + 1) * stride + x + 1] = sums[y * stride + x + 1] + row;
        }
    }
    IntegralImage {
        width: img.width,
        height: img.height,
        sums,
    }
}

/// Luma with weights 0.299/0.587/0.114, rounded half up.
pub fn to_grayscale(img: &RgbImage) -> GrayImage {
    // Integer form of the weighted sum keeps the rounding exact.
    let pixels = img
        .pixels
        .chunks_exact(3)
        .map(|p| {
            let acc = 299 * u32::from(p[0]) + 587 * u32::from(p[1]) + 114 * u32::from(p[2]);
            ((acc + 500) / 1000) as u8
        })
        .collect();
    GrayImage {
        width: img.width,
        height: img.height,
        pixels,
    }
}

/// Foreground where `pixel < t`.
pub fn threshold_global(img: &GrayImage, t: u8) -> BinaryImage {
    BinaryImage {
        width: img.width,
        height: img.height,
        mask: img.pixels.iter().map(|&p| u8::from(p < t)).collect(),
    }
}

/// Local-mean thresholding.
///
/// A pixel is foreground when it is darker than the mean of the `window x window`
/// neighbourhood centred on it by more than `c` gray levels. Windows are clipped at
/// the image border and the mean is taken over the in-bounds pixels only.
///
/// # Panics
/// If `window` is even or smaller than 3.
pub fn threshold_adaptive(img: &GrayImage, window: u32, c: i32) -> BinaryImage {
    assert!(
        window >= 3 && window % 2 == 1,
        "window must be odd and >= 3, got {window}"
    );
    let table = integral(img);
    let r = window / 2;
    let (w, h) = (img.width, img.height);
    let mut mask = Vec::with_capacity(img.pixels.len());
    for y in 0..h {
        let y0 = y.saturating_sub(r);
        let y1 = (y + r + 1).min(h);
        for x in 0..w {
            let x0 = x.saturating_sub(r);
            let x1 = (x + r + 1).min(w);
            let count = i64::from((x1 - x0) * (y1 - y0));
            let sum = table.window_sum(x0, y0, x1, y1) as i64;
            // pixel < sum/count - c, multiplied through by count
            let p = i64::from(img.get(x, y));
            mask.push(u8::from((p + i64::from(c)) * count < sum));
        }
    }
    BinaryImage {
        width: w,
        height: h,
        mask,
    }
}

fn skip_ws_and_comments(bytes: &[u8], pos: &mut usize) {
    while *pos < bytes.len() {
        match bytes[*pos] {
            b'#' => {
                while *pos < bytes.len() && bytes[*pos] != b'\n' {
                    *pos += 1;
                }
            }
            b' ' | b'\t' | b'\n' | b'\r' | 0x0b | 0x0c => *pos += 1,
            _ => break,
        }
    }
}

fn read_header_uint(bytes: &[u8], pos: &mut usize, what: &'static str) -> Result<u32, ImageError> {
    skip_ws_and_comments(bytes, pos);
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if start == *pos {
        return Err(ImageError::MalformedHeader(what));
    }
    std::str::from_utf8(&bytes[start..*pos])
        .ok()
        .and_then(|s| s.parse().ok())
        .ok_or(ImageError::MalformedHeader(what))
}

/// Decode a binary (P5) graymap with maxval at most 255.
///
/// Pixel values are taken verbatim; a maxval below 255 is not rescaled.
pub fn pgm_read(bytes: &[u8]) -> Result<GrayImage, ImageError> {
    if bytes.len() < 2 || &bytes[..2] != b"P5" {
        return Err(ImageError::MalformedHeader("missing P5 magic"));
    }
    let mut pos = 2;
    let width = read_header_uint(bytes, &mut pos, "width")?;
    let height = read_header_uint(bytes, &mut pos, "height")?;
    let maxval = read_header_uint(bytes, &mut pos, "maxval")?;
    if width == 0 || height == 0 {
        return Err(ImageError::ZeroSize(width, height));
    }
    if maxval == 0 {
        return Err(ImageError::MalformedHeader("maxval must be positive"));
    }
    if maxval > 255 {
        return Err(ImageError::UnsupportedMaxval(maxval));
    }
    // exactly one whitespace byte separates the header from the raster
    match bytes.get(pos) {
        Some(b) if b.is_ascii_whitespace() => pos += 1,
        _ => {
            return Err(ImageError::MalformedHeader(
                "expected whitespace after maxval",
            ))
        }
    }
    let expected = width as usize * height as usize;
    let data = &bytes[pos..];
    if data.len() < expected {
        return Err(ImageError::Truncated {
            expected,
            actual: data.len(),
        });
    }
    Ok(GrayImage {
        width,
        height,
        pixels: data[..expected].to_vec(),
    })
}

pub fn pgm_write(img: &GrayImage) -> Vec<u8> {
    let header = format!("P5\n{} {}\n255\n", img.width, img.height);
    let mut out = Vec::with_capacity(header.len() + img.pixels.len());
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&img.pixels);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_gray(rng: &mut impl Rng, w: u32, h: u32) -> GrayImage {
        GrayImage::from_fn(w, h, |_, _| rng.random())
    }

    /// Deliberately naive tokenizer: strip comments line by line, split on whitespace.
    fn naive_pgm(bytes: &[u8]) -> (u32, u32, Vec<u8>) {
        let mut tokens = Vec::new();
        let mut i = 0;
        while tokens.len() < 4 {
            let line_end = bytes[i..].iter().position(|&b| b == b'\n').unwrap() + i;
            let line = String::from_utf8_lossy(&bytes[i..line_end]).to_string();
            let line = line.split('#').next().unwrap().to_string();
            tokens.extend(line.split_whitespace().map(str::to_string));
            i = line_end + 1;
        }
        let w: u32 = tokens[1].parse().unwrap();
        let h: u32 = tokens[2].parse().unwrap();
        (w, h, bytes[i..i + (w * h) as usize].to_vec())
    }

    #[test]
    fn pgm_minimal_file() {
        let img = pgm_read(b"P5\n1 1\n255\n\x00").unwrap();
        assert_eq!((img.width(), img.height()), (1, 1));
        assert_eq!(img.pixels(), &[0]);
        assert_eq!(pgm_write(&img), b"P5\n1 1\n255\n\x00".to_vec());
        assert_eq!(pgm_write(&img).len(), 12);
    }

    #[test]
    fn pgm_comments_match_naive_parser() {
        let file = b"P5\n# created by hand\n3 2\n# another\n255\n\x01\x02\x03\x04\x05\x06";
        let img = pgm_read(file).unwrap();
        let (w, h, px) = naive_pgm(file);
        assert_eq!((img.width(), img.height()), (w, h));
        assert_eq!(img.pixels(), px.as_slice());
        let plain = pgm_read(b"P5\n3 2\n255\n\x01\x02\x03\x04\x05\x06").unwrap();
        assert_eq!(img, plain);
    }

    #[test]
    fn pgm_errors() {
        assert_eq!(
            pgm_read(b"P5\n2 2\n65535\n\0\0\0\0\0\0\0\0"),
            Err(ImageError::UnsupportedMaxval(65535))
        );
        assert!(matches!(
            pgm_read(b"P2\n1 1\n255\n0"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert!(matches!(
            pgm_read(b"P5\n1\n"),
            Err(ImageError::MalformedHeader(_))
        ));
        assert_eq!(
            pgm_read(b"P5\n2 2\n255\n\x01\x02"),
            Err(ImageError::Truncated {
                expected: 4,
                actual: 2
            })
        );
        assert!(matches!(
            pgm_read(b"P5\n0 2\n255\n"),
            Err(ImageError::ZeroSize(0, 2))
        ));
    }

    #[test]
    fn pgm_write_golden() {
        let img = GrayImage::new(2, 1, vec![7, 9]).unwrap();
        let mut expected = b"P5\n2 1\n255\n".to_vec();
        expected.extend_from_slice(&[7, 9]);
        assert_eq!(pgm_write(&img), expected);
    }

    #[test]
    fn pgm_round_trip_64x48() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let img = random_gray(&mut rng, 64, 48);
        assert_eq!(pgm_read(&pgm_write(&img)).unwrap(), img);
    }

    proptest! {
        #[test]
        fn pgm_round_trip(w in 1u32..40, h in 1u32..40, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let img = random_gray(&mut rng, w, h);
            prop_assert_eq!(pgm_read(&pgm_write(&img)).unwrap(), img);
        }

        #[test]
        fn gray_of_gray_is_identity(v in any::<u8>()) {
            let rgb = RgbImage::new(1, 1, vec![v, v, v]).unwrap();
            prop_assert_eq!(to_grayscale(&rgb).pixels()[0], v);
        }
    }

    #[test]
    fn grayscale_values() {
        let rgb = RgbImage::new(3, 1, vec![0, 0, 0, 255, 255, 255, 255, 0, 0]).unwrap();
        assert_eq!(to_grayscale(&rgb).pixels(), &[0, 255, 76]);
    }

    #[test]
    fn global_threshold() {
        let img = GrayImage::new(2, 1, vec![127, 128]).unwrap();
        assert_eq!(threshold_global(&img, 128).mask(), &[1, 0]);
        assert_eq!(threshold_global(&img, 0).count_foreground(), 0);
        let zeros = GrayImage::filled(4, 3, 0);
        assert_eq!(threshold_global(&zeros, 1).count_foreground(), 12);
    }

    #[test]
    fn integral_basics() {
        let ones = GrayImage::filled(3, 3, 1);
        let t = integral(&ones);
        assert_eq!(t.at(3, 3), 9);
        for i in 0..=3 {
            assert_eq!(t.at(i, 0), 0);
            assert_eq!(t.at(0, i), 0);
        }
    }

    #[test]
    fn integral_windows_match_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let img = random_gray(&mut rng, 16, 16);
        let t = integral(&img);
        for y0 in 0..=16 {
            for y1 in y0..=16 {
                for x0 in 0..=16 {
                    for x1 in x0..=16 {
                        let mut direct = 0u64;
                        for y in y0..y1 {
                            for x in x0..x1 {
                                direct += u64::from(img.get(x, y));
                            }
                        }
                        assert_eq!(t.window_sum(x0, y0, x1, y1), direct);
                    }
                }
            }
        }
    }

    #[test]
    fn adaptive_constant_image_is_empty() {
        for v in [0u8, 90, 255] {
            let img = GrayImage::filled(20, 11, v);
            for c in [0, 7, 30] {
                assert_eq!(threshold_adaptive(&img, 15, c).count_foreground(), 0);
            }
        }
    }

    #[test]
    #[should_panic]
    fn adaptive_rejects_even_window() {
        threshold_adaptive(&GrayImage::filled(5, 5, 0), 4, 7);
    }

    #[test]
    fn rotate90_moves_corners() {
        let img = GrayImage::new(2, 1, vec![1, 2]).unwrap();
        let r = img.rotate90();
        assert_eq!((r.width(), r.height()), (1, 2));
        assert_eq!(r.pixels(), &[1, 2]);
        let sq = GrayImage::new(2, 2, vec![1, 2, 3, 4]).unwrap();
        assert_eq!(sq.rotate90().pixels(), &[3, 1, 4, 2]);
    }
}
