//! Synthetic five-class shape dataset for fast end-to-end runs.
//!
//! Each image is a bright geometric figure on a dark noisy background. The
//! five figures (triangle, cross, ring, disc, square) are assigned to the
//! five class labels in canonical order, so the whole pipeline — ingestion,
//! splitting, training, evaluation, explanation — can run on data generated
//! in milliseconds. The figures differ in both silhouette and fill area,
//! which keeps them separable by a small encoder within a few epochs.

use std::path::Path;

use ndarray::Array3;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::dataset::image::{save_png, ImageBuf};
use crate::dataset::types::ClassLabel;
use crate::error::{CoreError, Result};
use crate::ioutil::fnv1a64;

/// Geometry of the generated figures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToyShapeSpec {
    /// Square image side in pixels.
    pub size: usize,
    /// Nominal figure radius in pixels.
    pub radius: i64,
    /// Radius jitter: the actual radius is radius ± jitter (uniform).
    /// Larger jitter makes the ring and disc classes overlap in area,
    /// which is useful for imbalance experiments.
    pub radius_jitter: i64,
}

impl Default for ToyShapeSpec {
    fn default() -> Self {
        ToyShapeSpec { size: 110, radius: 24, radius_jitter: 1 }
    }
}

impl ToyShapeSpec {
    fn validate(&self) -> Result<()> {
        if self.size < 69 {
            return Err(CoreError::InvalidArgument(format!(
                "toy image side must be >= 69 px to fit the figures, got {}",
                self.size
            )));
        }
        if self.radius < 4 || self.radius + self.radius_jitter > 34 {
            return Err(CoreError::InvalidArgument(
                "toy radius must satisfy 4 <= radius and radius + jitter <= 34".into(),
            ));
        }
        Ok(())
    }
}

/// Renders one toy image for `class_idx` (0..5). Deterministic in
/// (class_idx, spec, seed). Output is a (3, size, size) tensor in [0, 1]
/// with identical channels.
pub fn toy_image(class_idx: usize, spec: &ToyShapeSpec, seed: u64) -> Result<Array3<f64>> {
    spec.validate()?;
    if class_idx >= ClassLabel::COUNT {
        return Err(CoreError::InvalidArgument(format!("toy class index {class_idx} out of range")));
    }
    let size = spec.size;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);

    let lo = 34i64;
    let hi = size as i64 - 34;
    let cx = rng.gen_range(lo..hi);
    let cy = rng.gen_range(lo..hi);
    let r = spec.radius + rng.gen_range(-spec.radius_jitter..=spec.radius_jitter);

    let mut plane = Array3::zeros((1, size, size));
    for y in 0..size {
        for x in 0..size {
            let inside = in_shape(class_idx, x as i64, y as i64, cx, cy, r);
            let noise: f64 = StandardNormal.sample(&mut rng);
            let v = if inside { 0.9 + 0.02 * noise } else { 0.08 + 0.02 * noise };
            plane[[0, y, x]] = v.clamp(0.0, 1.0);
        }
    }

    let mut img = Array3::zeros((3, size, size));
    for c in 0..3 {
        img.index_axis_mut(ndarray::Axis(0), c)
            .assign(&plane.index_axis(ndarray::Axis(0), 0));
    }
    Ok(img)
}

fn in_shape(class_idx: usize, x: i64, y: i64, cx: i64, cy: i64, r: i64) -> bool {
    let dx = x - cx;
    let dy = y - cy;
    match class_idx {
        // Triangle with the apex at the top: width grows linearly downward.
        0 => {
            let t = y - (cy - r);
            t >= 0 && t <= 2 * r && 2 * dx.abs() <= t
        }
        // Plus sign with arm half-width max(3, r/5).
        1 => {
            let t = (r / 5).max(3);
            (dx.abs() <= t && dy.abs() <= r) || (dy.abs() <= t && dx.abs() <= r)
        }
        // Annulus with inner radius 0.55 r.
        2 => {
            let d2 = dx * dx + dy * dy;
            let inner = 0.55 * r as f64;
            d2 as f64 >= inner * inner && d2 <= r * r
        }
        // Filled disc.
        3 => dx * dx + dy * dy <= r * r,
        // Filled square (Chebyshev ball).
        4 => dx.abs() <= r && dy.abs() <= r,
        _ => unreachable!("class index checked by caller"),
    }
}

/// Writes a class-per-folder PNG tree under `root`: `per_class[i]` images
/// for class label `i`. Returns the total number of images written.
pub fn write_toy_dataset(
    root: &Path,
    per_class: [usize; ClassLabel::COUNT],
    spec: &ToyShapeSpec,
    seed: u64,
) -> Result<usize> {
    spec.validate()?;
    let mut total = 0;
    for (ci, &count) in per_class.iter().enumerate() {
        let label = ClassLabel::from_index(ci)?;
        let dir = root.join(label.name());
        std::fs::create_dir_all(&dir).map_err(|e| CoreError::io(&dir, e))?;
        for i in 0..count {
            let img_seed = fnv1a64(&[
                &seed.to_le_bytes(),
                label.name().as_bytes(),
                &(i as u64).to_le_bytes(),
            ]);
            let tensor = toy_image(ci, spec, img_seed)?;
            let img = ImageBuf::from_tensor(&tensor)?;
            save_png(&dir.join(format!("toy_{i:04}.png")), &img)?;
            total += 1;
        }
    }
    Ok(total)
}

/// Generates an in-memory labeled set: `per_class[i]` tensors per class.
/// Returns (images, labels) with deterministic ordering.
pub fn toy_tensors(
    per_class: [usize; ClassLabel::COUNT],
    spec: &ToyShapeSpec,
    seed: u64,
) -> Result<(Vec<Array3<f64>>, Vec<usize>)> {
    let mut images = Vec::new();
    let mut labels = Vec::new();
    for (ci, &count) in per_class.iter().enumerate() {
        let label = ClassLabel::from_index(ci)?;
        for i in 0..count {
            let img_seed = fnv1a64(&[
                &seed.to_le_bytes(),
                label.name().as_bytes(),
                &(i as u64).to_le_bytes(),
            ]);
            images.push(toy_image(ci, spec, img_seed)?);
            labels.push(ci);
        }
    }
    Ok((images, labels))
}
