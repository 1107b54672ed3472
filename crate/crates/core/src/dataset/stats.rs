//! Image-size statistics: per-axis histograms, a joint 2D histogram, and
//! the modal size used to pick the preprocessing target.

use serde::{Deserialize, Serialize};

use crate::dataset::types::ImageRecord;
use crate::error::{CoreError, Result};

pub const DEFAULT_BIN_WIDTH: u32 = 5;

/// One 1D histogram bin: sizes in `[start, start + bin_width)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistBin {
    pub start: u32,
    pub count: usize,
}

/// One joint bin over (width, height), with the centroid of the samples
/// that fell into it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointBin {
    pub width_start: u32,
    pub height_start: u32,
    pub count: usize,
    pub mean_width: f64,
    pub mean_height: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeStats {
    pub bin_width: u32,
    pub min_size: (u32, u32),
    pub max_size: (u32, u32),
    pub mean_size: (f64, f64),
    /// Centroid of the samples inside the most populated joint bin. Using
    /// the sample centroid rather than the geometric bin center keeps the
    /// value meaningful for degenerate histograms (a dataset of identical
    /// 64x64 images reports exactly (64, 64)).
    pub modal_size: (f64, f64),
    pub modal_bin_count: usize,
    pub width_histogram: Vec<HistBin>,
    pub height_histogram: Vec<HistBin>,
    /// Non-empty joint bins, sorted by (width_start, height_start).
    pub joint_histogram: Vec<JointBin>,
}

impl SizeStats {
    /// The squared input side the preprocessing step should use: the larger
    /// modal component rounded up to the next multiple of 10. The published
    /// corpus has modal size near (98.5, 108.9), giving a 110x110 target.
    pub fn suggested_target(&self) -> (u32, u32) {
        let m = self.modal_size.0.max(self.modal_size.1);
        let side = ((m / 10.0).ceil() * 10.0).max(10.0) as u32;
        (side, side)
    }
}

/// Computes size statistics over the original-image dimensions of `records`.
pub fn compute_size_stats(records: &[ImageRecord], bin_width: u32) -> Result<SizeStats> {
    if records.is_empty() {
        return Err(CoreError::InvalidArgument("size stats require at least one record".into()));
    }
    if bin_width == 0 {
        return Err(CoreError::InvalidArgument("bin width must be >= 1".into()));
    }

    let mut min_w = u32::MAX;
    let mut min_h = u32::MAX;
    let mut max_w = 0u32;
    let mut max_h = 0u32;
    let mut sum_w = 0f64;
    let mut sum_h = 0f64;

    use std::collections::BTreeMap;
    let mut wbins: BTreeMap<u32, usize> = BTreeMap::new();
    let mut hbins: BTreeMap<u32, usize> = BTreeMap::new();
    // (width bin, height bin) -> (count, sum width, sum height)
    let mut joint: BTreeMap<(u32, u32), (usize, f64, f64)> = BTreeMap::new();

    for rec in records {
        let (w, h) = (rec.width, rec.height);
        min_w = min_w.min(w);
        min_h = min_h.min(h);
        max_w = max_w.max(w);
        max_h = max_h.max(h);
        sum_w += f64::from(w);
        sum_h += f64::from(h);
        let wb = (w / bin_width) * bin_width;
        let hb = (h / bin_width) * bin_width;
        *wbins.entry(wb).or_insert(0) += 1;
        *hbins.entry(hb).or_insert(0) += 1;
        let cell = joint.entry((wb, hb)).or_insert((0, 0.0, 0.0));
        cell.0 += 1;
        cell.1 += f64::from(w);
        cell.2 += f64::from(h);
    }

    let joint_histogram: Vec<JointBin> = joint
        .iter()
        .map(|(&(wb, hb), &(count, sw, sh))| JointBin {
            width_start: wb,
            height_start: hb,
            count,
            mean_width: sw / count as f64,
            mean_height: sh / count as f64,
        })
        .collect();

    // Most populated bin; ties broken toward the smaller centroid area,
    // then lexicographically by bin start for full determinism.
    let modal = joint_histogram
        .iter()
        .max_by(|a, b| {
            a.count
                .cmp(&b.count)
                .then_with(|| {
                    let area_a = a.mean_width * a.mean_height;
                    let area_b = b.mean_width * b.mean_height;
                    // Smaller area wins, so compare reversed.
                    area_b.partial_cmp(&area_a).unwrap_or(std::cmp::Ordering::Equal)
                })
                .then_with(|| (b.width_start, b.height_start).cmp(&(a.width_start, a.height_start)))
        })
        .expect("non-empty by construction");

    let n = records.len() as f64;
    Ok(SizeStats {
        bin_width,
        min_size: (min_w, min_h),
        max_size: (max_w, max_h),
        mean_size: (sum_w / n, sum_h / n),
        modal_size: (modal.mean_width, modal.mean_height),
        modal_bin_count: modal.count,
        width_histogram: wbins.into_iter().map(|(start, count)| HistBin { start, count }).collect(),
        height_histogram: hbins.into_iter().map(|(start, count)| HistBin { start, count }).collect(),
        joint_histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::types::ClassLabel;

    fn rec(w: u32, h: u32, i: usize) -> ImageRecord {
        ImageRecord::original(format!("r{i}"), format!("/x/r{i}.png"), ClassLabel::Parabasal, w, h)
    }

    #[test]
    fn degenerate_histogram_reports_exact_size() {
        let records: Vec<_> = (0..7).map(|i| rec(64, 64, i)).collect();
        let stats = compute_size_stats(&records, DEFAULT_BIN_WIDTH).unwrap();
        assert_eq!(stats.modal_size, (64.0, 64.0));
        assert_eq!(stats.min_size, (64, 64));
        assert_eq!(stats.max_size, (64, 64));
        assert_eq!(stats.modal_bin_count, 7);
    }

    #[test]
    fn majority_bin_wins() {
        let mut records = vec![rec(100, 100, 0), rec(100, 100, 1), rec(100, 100, 2)];
        records.push(rec(200, 200, 3));
        let stats = compute_size_stats(&records, DEFAULT_BIN_WIDTH).unwrap();
        assert_eq!(stats.modal_size, (100.0, 100.0));
        assert_eq!(stats.modal_bin_count, 3);
    }

    #[test]
    fn ties_break_toward_smaller_area() {
        let records = vec![rec(200, 200, 0), rec(200, 200, 1), rec(50, 50, 2), rec(50, 50, 3)];
        let stats = compute_size_stats(&records, DEFAULT_BIN_WIDTH).unwrap();
        assert_eq!(stats.modal_size, (50.0, 50.0));
    }

    #[test]
    fn modal_within_min_max_componentwise() {
        let records: Vec<_> = (0..50)
            .map(|i| rec(60 + (i % 9) as u32 * 13, 48 + (i % 7) as u32 * 17, i))
            .collect();
        let stats = compute_size_stats(&records, DEFAULT_BIN_WIDTH).unwrap();
        assert!(f64::from(stats.min_size.0) <= stats.modal_size.0);
        assert!(f64::from(stats.min_size.1) <= stats.modal_size.1);
        assert!(stats.modal_size.0 <= f64::from(stats.max_size.0));
        assert!(stats.modal_size.1 <= f64::from(stats.max_size.1));
    }

    #[test]
    fn modal_bin_count_is_maximal() {
        let records: Vec<_> = (0..200)
            .map(|i| rec(60 + (i * 37 % 90) as u32, 48 + (i * 53 % 110) as u32, i))
            .collect();
        let stats = compute_size_stats(&records, DEFAULT_BIN_WIDTH).unwrap();
        for bin in &stats.joint_histogram {
            assert!(bin.count <= stats.modal_bin_count);
        }
        let total: usize = stats.joint_histogram.iter().map(|b| b.count).sum();
        assert_eq!(total, records.len());
    }

    #[test]
    fn target_size_rounds_up_to_tens() {
        let records = vec![rec(98, 109, 0), rec(99, 109, 1)];
        let stats = compute_size_stats(&records, DEFAULT_BIN_WIDTH).unwrap();
        assert_eq!(stats.suggested_target(), (110, 110));
        let records = vec![rec(64, 64, 0)];
        let stats = compute_size_stats(&records, DEFAULT_BIN_WIDTH).unwrap();
        assert_eq!(stats.suggested_target(), (70, 70));
    }

    #[test]
    fn empty_input_rejected() {
        assert!(compute_size_stats(&[], DEFAULT_BIN_WIDTH).is_err());
    }
}
