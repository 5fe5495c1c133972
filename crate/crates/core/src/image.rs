//! Brightness fields and their global statistics.
//!
//! Pixels are addressed `(row, col)` with zero-based indices; `row` runs over
//! the image height and `col` over the width. Storage is row-major.

use std::fmt::Debug;
use std::io::Cursor;
use std::path::Path;

use image::{DynamicImage, ImageReader};

use crate::config::Threshold;
use crate::error::{Error, Result};

/// A pixel type the coherence engine can run on.
///
/// `Sum` accumulates brightness along a ray and over the whole image. The
/// relative-deviation test is delegated to the pixel type so that integer
/// images can be compared exactly.
pub trait Brightness: Copy + Send + Sync + Debug + 'static {
    type Sum: Copy + Send + Sync + Debug + PartialEq;

    const ZERO: Self::Sum;

    fn accumulate(sum: Self::Sum, value: Self) -> Self::Sum;

    fn is_valid(self) -> bool;

    fn sum_is_zero(sum: Self::Sum) -> bool;

    fn sum_to_f64(sum: Self::Sum) -> f64;

    /// Tests `|sample_sum / divisor - total / count| <= tau * total / count`
    /// in cross-multiplied form.
    fn within(sample_sum: Self::Sum, divisor: u64, total: Self::Sum, count: u64, tau: Threshold) -> bool;
}

impl Brightness for u8 {
    type Sum = u64;

    const ZERO: u64 = 0;

    #[inline]
    fn accumulate(sum: u64, value: u8) -> u64 {
        sum + u64::from(value)
    }

    fn is_valid(self) -> bool {
        true
    }

    fn sum_is_zero(sum: u64) -> bool {
        sum == 0
    }

    fn sum_to_f64(sum: u64) -> f64 {
        sum as f64
    }

    #[inline]
    fn within(sample_sum: u64, divisor: u64, total: u64, count: u64, tau: Threshold) -> bool {
        let lhs = u128::from(sample_sum) * u128::from(count);
        let scaled = u128::from(total) * u128::from(divisor);
        tau.admits_exact(lhs.abs_diff(scaled), scaled)
    }
}

impl Brightness for f64 {
    type Sum = f64;

    const ZERO: f64 = 0.0;

    #[inline]
    fn accumulate(sum: f64, value: f64) -> f64 {
        sum + value
    }

    fn is_valid(self) -> bool {
        self.is_finite() && self >= 0.0
    }

    fn sum_is_zero(sum: f64) -> bool {
        sum == 0.0
    }

    fn sum_to_f64(sum: f64) -> f64 {
        sum
    }

    #[inline]
    fn within(sample_sum: f64, divisor: u64, total: f64, count: u64, tau: Threshold) -> bool {
        let scaled = total * divisor as f64;
        let diff = (sample_sum * count as f64 - scaled).abs();
        diff <= tau.value() * scaled
    }
}

/// A rectangular brightness field.
#[derive(Clone, Debug, PartialEq)]
pub struct Image<P> {
    height: usize,
    width: usize,
    pixels: Vec<P>,
}

/// 8-bit grayscale image, brightness in `0..=255`.
pub type GrayImage = Image<u8>;

/// Non-negative real-valued brightness field.
pub type RealImage = Image<f64>;

impl<P: Brightness> Image<P> {
    pub fn new(height: usize, width: usize, pixels: Vec<P>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Dimension { height, width });
        }
        if pixels.len() != height * width {
            return Err(Error::Config(format!(
                "pixel buffer holds {} values, expected {}",
                pixels.len(),
                height * width
            )));
        }
        if let Some(bad) = pixels.iter().find(|p| !p.is_valid()) {
            return Err(Error::Config(format!("invalid brightness value {bad:?}")));
        }
        Ok(Self { height, width, pixels })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> P) -> Result<Self> {
        let mut pixels = Vec::with_capacity(height * width);
        for row in 0..height {
            for col in 0..width {
                pixels.push(f(row, col));
            }
        }
        Self::new(height, width, pixels)
    }

    pub fn constant(height: usize, width: usize, value: P) -> Result<Self> {
        Self::new(height, width, vec![value; height * width])
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dimensions(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn pixels(&self) -> &[P] {
        &self.pixels
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> P {
        self.pixels[row * self.width + col]
    }

    pub fn contains(&self, row: isize, col: isize) -> bool {
        row >= 0 && col >= 0 && (row as usize) < self.height && (col as usize) < self.width
    }

    pub fn map<Q: Brightness>(&self, f: impl FnMut(P) -> Q) -> Result<Image<Q>> {
        Image::new(self.height, self.width, self.pixels.iter().copied().map(f).collect())
    }

    /// Rotates a quarter turn so that a ray offset `(di, dj)` in this image
    /// becomes `(-dj, di)` in the result. The pixel at `(row, col)` moves to
    /// `(width - 1 - col, row)`.
    pub fn rotate_quarter(&self) -> Self {
        let (h, w) = (self.height, self.width);
        let mut pixels = Vec::with_capacity(h * w);
        for new_row in 0..w {
            for new_col in 0..h {
                pixels.push(self.get(new_col, w - 1 - new_row));
            }
        }
        Self {
            height: w,
            width: h,
            pixels,
        }
    }

    /// Mean brightness over the whole image, kept as an exact sum and count.
    pub fn global_mean(&self) -> GlobalMean<P> {
        let total = self.pixels.iter().fold(P::ZERO, |acc, &p| P::accumulate(acc, p));
        GlobalMean {
            total,
            count: self.pixels.len() as u64,
        }
    }
}

impl GrayImage {
    pub fn to_real(&self) -> RealImage {
        Image {
            height: self.height,
            width: self.width,
            pixels: self.pixels.iter().map(|&p| f64::from(p)).collect(),
        }
    }

    pub fn to_luma8(&self) -> image::GrayImage {
        image::GrayImage::from_raw(self.width as u32, self.height as u32, self.pixels.clone())
            .expect("buffer length matches dimensions")
    }
}

/// The average brightness `total / count`, kept unevaluated.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GlobalMean<P: Brightness> {
    pub total: P::Sum,
    pub count: u64,
}

impl<P: Brightness> GlobalMean<P> {
    pub fn value(&self) -> f64 {
        P::sum_to_f64(self.total) / self.count as f64
    }

    pub fn is_zero(&self) -> bool {
        P::sum_is_zero(self.total)
    }
}

/// Rounds half away from zero to the nearest integer of `num / den` for
/// non-negative `num` and positive `den`.
pub(crate) fn div_round_half_away(num: u64, den: u64) -> u64 {
    (2 * num + den) / (2 * den)
}

/// Luma of an 8-bit RGB triple with weights 0.299, 0.587, 0.114.
pub fn rgb_to_gray(r: u8, g: u8, b: u8) -> u8 {
    let weighted = 299 * u64::from(r) + 587 * u64::from(g) + 114 * u64::from(b);
    div_round_half_away(weighted, 1000) as u8
}

fn narrow16(v: u16) -> u8 {
    (v / 257) as u8
}

/// Reads a PNG or PGM file into an 8-bit grayscale image.
pub fn load_image(path: impl AsRef<Path>) -> Result<GrayImage> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|source| Error::Input {
        path: path.to_path_buf(),
        source,
    })?;
    decode_image(&bytes)
}

/// Decodes an in-memory PNG or PGM into an 8-bit grayscale image.
///
/// 8-bit gray passes through, RGB(A) is reduced with the luma weights of
/// [`rgb_to_gray`] (alpha ignored) and 16-bit samples are divided by 257.
pub fn decode_image(bytes: &[u8]) -> Result<GrayImage> {
    let reader = ImageReader::new(Cursor::new(bytes))
        .with_guessed_format()
        .map_err(|e| Error::Format(e.to_string()))?;
    match reader.format() {
        Some(image::ImageFormat::Png | image::ImageFormat::Pnm) => {}
        other => return Err(Error::Format(format!("expected PNG or PGM, found {other:?}"))),
    }
    let decoded = reader.decode().map_err(|e| Error::Format(e.to_string()))?;
    let (width, height) = (decoded.width() as usize, decoded.height() as usize);
    if width == 0 || height == 0 {
        return Err(Error::Dimension { height, width });
    }
    let pixels: Vec<u8> = match decoded {
        DynamicImage::ImageLuma8(buf) => buf.into_raw(),
        DynamicImage::ImageLumaA8(buf) => buf.pixels().map(|p| p.0[0]).collect(),
        DynamicImage::ImageLuma16(buf) => buf.pixels().map(|p| narrow16(p.0[0])).collect(),
        DynamicImage::ImageLumaA16(buf) => buf.pixels().map(|p| narrow16(p.0[0])).collect(),
        DynamicImage::ImageRgb8(buf) => buf.pixels().map(|p| rgb_to_gray(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgba8(buf) => buf.pixels().map(|p| rgb_to_gray(p.0[0], p.0[1], p.0[2])).collect(),
        DynamicImage::ImageRgb16(buf) => buf
            .pixels()
            .map(|p| rgb_to_gray(narrow16(p.0[0]), narrow16(p.0[1]), narrow16(p.0[2])))
            .collect(),
        DynamicImage::ImageRgba16(buf) => buf
            .pixels()
            .map(|p| rgb_to_gray(narrow16(p.0[0]), narrow16(p.0[1]), narrow16(p.0[2])))
            .collect(),
        other => return Err(Error::Format(format!("unsupported pixel layout {:?}", other.color()))),
    };
    GrayImage::new(height, width, pixels)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn encode_png<P, C>(buf: image::ImageBuffer<P, C>) -> Vec<u8>
    where
        P: image::PixelWithColorType,
        [P::Subpixel]: image::EncodableLayout,
        C: std::ops::Deref<Target = [P::Subpixel]>,
    {
        let mut out = Cursor::new(Vec::new());
        buf.write_to(&mut out, image::ImageFormat::Png).unwrap();
        out.into_inner()
    }

    #[test]
    fn ascii_pgm_single_pixel() {
        let img = decode_image(b"P2\n1 1\n255\n100\n").unwrap();
        assert_eq!(img.dimensions(), (1, 1));
        assert_eq!(img.pixels(), &[100]);
    }

    #[test]
    fn binary_pgm_passes_through() {
        let mut bytes = b"P5\n3 2\n255\n".to_vec();
        bytes.extend_from_slice(&[0, 1, 2, 250, 254, 255]);
        let img = decode_image(&bytes).unwrap();
        assert_eq!(img.dimensions(), (2, 3));
        assert_eq!(img.pixels(), &[0, 1, 2, 250, 254, 255]);
    }

    #[test]
    fn rgb_weights() {
        assert_eq!(rgb_to_gray(255, 255, 255), 255);
        assert_eq!(rgb_to_gray(255, 0, 0), 76);
        assert_eq!(rgb_to_gray(0, 255, 0), 150);
        assert_eq!(rgb_to_gray(0, 0, 255), 29);
        assert_eq!(rgb_to_gray(0, 0, 0), 0);
    }

    #[test]
    fn rgba_png_ignores_alpha() {
        let buf = image::RgbaImage::from_raw(2, 1, vec![255, 0, 0, 0, 255, 255, 255, 17]).unwrap();
        let img = decode_image(&encode_png(buf)).unwrap();
        assert_eq!(img.pixels(), &[76, 255]);
    }

    #[test]
    fn sixteen_bit_png_divides_by_257() {
        let buf = image::ImageBuffer::<image::Luma<u16>, _>::from_raw(3, 1, vec![65535u16, 257, 256]).unwrap();
        let img = decode_image(&encode_png(buf)).unwrap();
        assert_eq!(img.pixels(), &[255, 1, 0]);
    }

    #[test]
    fn garbage_is_format_error() {
        assert!(matches!(decode_image(b"not an image"), Err(Error::Format(_))));
    }

    #[test]
    fn missing_file_is_input_error() {
        let err = load_image("/nonexistent/definitely/missing.png").unwrap_err();
        assert!(matches!(err, Error::Input { .. }));
    }

    #[test]
    fn zero_dimensions_rejected() {
        assert!(matches!(GrayImage::new(0, 4, vec![]), Err(Error::Dimension { .. })));
        assert!(decode_image(b"P2\n0 0\n255\n").is_err());
    }

    #[test]
    fn global_mean_examples() {
        let img = GrayImage::new(2, 2, vec![0, 255, 255, 0]).unwrap();
        assert_eq!(img.global_mean().value(), 127.5);
        let img = GrayImage::constant(5, 7, 42).unwrap();
        assert_eq!(img.global_mean().value(), 42.0);
        let img = GrayImage::new(3, 3, (1..=9).collect()).unwrap();
        assert_eq!(img.global_mean().value(), 5.0);
        assert_eq!(img.global_mean().total, 45);
    }

    #[test]
    fn real_image_rejects_negative() {
        assert!(RealImage::new(1, 2, vec![1.0, -0.5]).is_err());
        assert!(RealImage::new(1, 1, vec![f64::NAN]).is_err());
    }

    #[test]
    fn rotation_maps_pixels() {
        let img = GrayImage::new(2, 3, vec![1, 2, 3, 4, 5, 6]).unwrap();
        let rot = img.rotate_quarter();
        assert_eq!(rot.dimensions(), (3, 2));
        for row in 0..2 {
            for col in 0..3 {
                assert_eq!(rot.get(3 - 1 - col, row), img.get(row, col));
            }
        }
        let back = rot.rotate_quarter().rotate_quarter().rotate_quarter();
        assert_eq!(back, img);
    }

    #[test]
    fn exact_within_boundary() {
        // constant image 10, literal divisor 4, sample sum 50: |50*N - 10N*4| = 10N <= 0.25*40N
        let tau = Threshold::new(0.25).unwrap();
        assert!(u8::within(50, 4, 160, 16, tau));
        let tau = Threshold::new(0.2499).unwrap();
        assert!(!u8::within(50, 4, 160, 16, tau));
    }
}
