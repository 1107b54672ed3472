//! Image loading, saving, resizing, and tensor conversion.
//!
//! Pixels live in two forms: `ImageBuf` (interleaved RGB u8, the on-disk
//! view) and `ndarray` tensors of shape (channels, height, width) with
//! values in [0, 1] (the numeric view). All interpolation is bilinear with
//! half-pixel-centered sampling, so resizing to the same size is an exact
//! identity.

use std::path::Path;

use ndarray::{Array2, Array3, ArrayView2};

use crate::error::{CoreError, Result};

/// An 8-bit RGB image, rows top to bottom, channels interleaved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImageBuf {
    pub width: usize,
    pub height: usize,
    /// `3 * width * height` bytes, RGBRGB...
    pub pixels: Vec<u8>,
}

impl ImageBuf {
    pub fn new(width: usize, height: usize) -> Self {
        ImageBuf { width, height, pixels: vec![0; 3 * width * height] }
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    pub fn set(&mut self, x: usize, y: usize, rgb: [u8; 3]) {
        let i = 3 * (y * self.width + x);
        self.pixels[i] = rgb[0];
        self.pixels[i + 1] = rgb[1];
        self.pixels[i + 2] = rgb[2];
    }

    /// Converts to a (3, H, W) tensor scaled to [0, 1].
    pub fn to_tensor(&self) -> Array3<f64> {
        let (w, h) = (self.width, self.height);
        let mut out = Array3::zeros((3, h, w));
        for y in 0..h {
            for x in 0..w {
                let p = self.get(x, y);
                for c in 0..3 {
                    out[[c, y, x]] = f64::from(p[c]) / 255.0;
                }
            }
        }
        out
    }

    /// Builds an image from a (3, H, W) tensor in [0, 1]; values are clamped
    /// and rounded to the nearest byte.
    pub fn from_tensor(t: &Array3<f64>) -> Result<Self> {
        let shape = t.shape();
        if shape[0] != 3 {
            return Err(CoreError::ShapeMismatch {
                expected: "(3, H, W)".into(),
                actual: format!("({}, {}, {})", shape[0], shape[1], shape[2]),
            });
        }
        let (h, w) = (shape[1], shape[2]);
        let mut img = ImageBuf::new(w, h);
        for y in 0..h {
            for x in 0..w {
                let mut rgb = [0u8; 3];
                for c in 0..3 {
                    rgb[c] = (t[[c, y, x]].clamp(0.0, 1.0) * 255.0).round() as u8;
                }
                img.set(x, y, rgb);
            }
        }
        Ok(img)
    }
}

/// Reads only the header of an image file to get its dimensions.
pub fn read_dimensions(path: &Path) -> Result<(u32, u32)> {
    image::image_dimensions(path)
        .map_err(|e| CoreError::ImageDecode { path: path.to_path_buf(), reason: e.to_string() })
}

/// Decodes an image file into RGB.
pub fn load_rgb(path: &Path) -> Result<ImageBuf> {
    let img = image::open(path)
        .map_err(|e| CoreError::ImageDecode { path: path.to_path_buf(), reason: e.to_string() })?
        .to_rgb8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    Ok(ImageBuf { width: w, height: h, pixels: img.into_raw() })
}

/// Writes an image as PNG.
pub fn save_png(path: &Path, img: &ImageBuf) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| CoreError::io(dir, e))?;
    }
    let buf: image::RgbImage =
        image::ImageBuffer::from_raw(img.width as u32, img.height as u32, img.pixels.clone())
            .ok_or_else(|| CoreError::InvalidArgument("pixel buffer size mismatch".into()))?;
    buf.save(path)
        .map_err(|e| CoreError::ImageDecode { path: path.to_path_buf(), reason: e.to_string() })
}

/// Bilinear sample of a single plane at real coordinates, clamped to the
/// image rectangle (border pixels replicate outward).
#[inline]
pub fn sample_bilinear(plane: &ArrayView2<'_, f64>, x: f64, y: f64) -> f64 {
    let (h, w) = plane.dim();
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(w - 1);
    let y1 = (y0 + 1).min(h - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let top = plane[[y0, x0]] * (1.0 - fx) + plane[[y0, x1]] * fx;
    let bot = plane[[y1, x0]] * (1.0 - fx) + plane[[y1, x1]] * fx;
    top * (1.0 - fy) + bot * fy
}

/// Resizes one plane to (new_h, new_w) with half-pixel-centered bilinear
/// interpolation. Identity dimensions reproduce the input exactly.
pub fn resize_plane(plane: &ArrayView2<'_, f64>, new_h: usize, new_w: usize) -> Array2<f64> {
    assert!(new_h >= 1 && new_w >= 1, "target dimensions must be >= 1");
    let (h, w) = plane.dim();
    let sx = w as f64 / new_w as f64;
    let sy = h as f64 / new_h as f64;
    let mut out = Array2::zeros((new_h, new_w));
    for oy in 0..new_h {
        let src_y = (oy as f64 + 0.5) * sy - 0.5;
        for ox in 0..new_w {
            let src_x = (ox as f64 + 0.5) * sx - 0.5;
            out[[oy, ox]] = sample_bilinear(plane, src_x, src_y);
        }
    }
    out
}

/// Resizes a (C, H, W) tensor to (C, new_h, new_w).
pub fn resize_tensor(t: &Array3<f64>, new_h: usize, new_w: usize) -> Array3<f64> {
    let (c, _, _) = t.dim();
    let mut out = Array3::zeros((c, new_h, new_w));
    for ch in 0..c {
        let plane = resize_plane(&t.index_axis(ndarray::Axis(0), ch), new_h, new_w);
        out.index_axis_mut(ndarray::Axis(0), ch).assign(&plane);
    }
    out
}

/// Resizes an RGB image to exactly (target_w, target_h) without preserving
/// aspect ratio. This is the preprocessing resize: every image is mapped to
/// one fixed encoder input size.
pub fn resize_image(img: &ImageBuf, target_w: usize, target_h: usize) -> Result<ImageBuf> {
    if target_w == 0 || target_h == 0 {
        return Err(CoreError::InvalidArgument(format!(
            "resize target must be >= 1, got {target_w}x{target_h}"
        )));
    }
    if target_w == img.width && target_h == img.height {
        return Ok(img.clone());
    }
    let t = img.to_tensor();
    let resized = resize_tensor(&t, target_h, target_w);
    ImageBuf::from_tensor(&resized)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn checkerboard(size: usize, square: usize) -> ImageBuf {
        let mut img = ImageBuf::new(size, size);
        for y in 0..size {
            for x in 0..size {
                let on = ((x / square) + (y / square)) % 2 == 0;
                let v = if on { 255 } else { 0 };
                img.set(x, y, [v, v, v]);
            }
        }
        img
    }

    #[test]
    fn identity_resize_is_exact() {
        let img = checkerboard(16, 3);
        let out = resize_image(&img, 16, 16).unwrap();
        assert_eq!(img, out);
    }

    #[test]
    fn resize_hits_target_dimensions() {
        let img = checkerboard(37, 5);
        let out = resize_image(&img, 110, 110).unwrap();
        assert_eq!((out.width, out.height), (110, 110));
        let out2 = resize_image(&img, 8, 23).unwrap();
        assert_eq!((out2.width, out2.height), (8, 23));
    }

    #[test]
    fn downsample_matches_reference_oracle() {
        // 220x220 checkerboard with 2 px squares, halved. With half-pixel
        // centers the sample point for output (ox, oy) is (2ox + 0.5,
        // 2oy + 0.5): the average of one aligned 2x2 block, which is a
        // uniform square of the board. Expected output: a 1 px checkerboard.
        let img = checkerboard(220, 2);
        let out = resize_image(&img, 110, 110).unwrap();
        // Check a 10x10 crop against the hand-computed expectation.
        for y in 0..10 {
            for x in 0..10 {
                let expected = if (x + y) % 2 == 0 { 255 } else { 0 };
                assert_eq!(out.get(x, y)[0], expected, "at ({x},{y})");
            }
        }
    }

    #[test]
    fn resize_plane_interpolates_linearly() {
        // A 2x2 ramp upsampled to 4x4: interior samples must be convex
        // combinations computed by hand for the half-pixel grid.
        let plane = array![[0.0, 1.0], [2.0, 3.0]];
        let out = resize_plane(&plane.view(), 4, 4);
        // Sample point for output x=1 is src_x = (1.5 * 0.5) - 0.5 = 0.25.
        let expected_01 = 0.25;
        assert!((out[[0, 1]] - expected_01).abs() < 1e-12);
        // Corners clamp to the source corners.
        assert!((out[[0, 0]] - 0.0).abs() < 1e-12);
        assert!((out[[3, 3]] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn tensor_round_trip() {
        let img = checkerboard(9, 2);
        let t = img.to_tensor();
        let back = ImageBuf::from_tensor(&t).unwrap();
        assert_eq!(img, back);
    }

    #[test]
    fn zero_target_rejected() {
        let img = checkerboard(4, 1);
        assert!(resize_image(&img, 0, 10).is_err());
    }
}
