//! Stratified three-way splitting and training-set augmentation planning.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::types::{AugmentKind, ClassLabel, ImageRecord, Provenance, Split};
use crate::error::{CoreError, Result};
use crate::ioutil::fnv1a64;

/// Global (train, val, test) fractions. The default corresponds to the
/// two-stage 80/20-then-80/20 procedure: 64% train, 16% val, 20% test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        SplitRatios { train: 0.64, val: 0.16, test: 0.20 }
    }
}

impl SplitRatios {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("train", self.train), ("val", self.val), ("test", self.test)] {
            if !(0.0..1.0).contains(&v) || v <= 0.0 {
                return Err(CoreError::InvalidArgument(format!(
                    "{name} ratio must be in (0, 1), got {v}"
                )));
            }
        }
        let sum = self.train + self.val + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CoreError::InvalidArgument(format!(
                "split ratios must sum to 1 (got {sum})"
            )));
        }
        Ok(())
    }

    /// The validation fraction of the second stage, i.e. val share within
    /// the train+val pool remaining after the test cut.
    fn stage2_val_frac(&self) -> f64 {
        self.val / (1.0 - self.test)
    }
}

/// Per-class (train, val, test) counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClassSplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// A fully assigned dataset: records with splits, plus the parameters that
/// produced the assignment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitManifest {
    pub records: Vec<ImageRecord>,
    pub ratios: SplitRatios,
    pub seed: u64,
    pub augmentation_factor: u32,
    pub per_class_counts: BTreeMap<ClassLabel, ClassSplitCounts>,
}

impl SplitManifest {
    pub fn split_records(&self, split: Split) -> Vec<&ImageRecord> {
        self.records.iter().filter(|r| r.split == split).collect()
    }

    pub fn counts(&self) -> (usize, usize, usize) {
        let mut c = (0, 0, 0);
        for r in &self.records {
            match r.split {
                Split::Train => c.0 += 1,
                Split::Val => c.1 += 1,
                Split::Test => c.2 += 1,
                Split::Unassigned => {}
            }
        }
        c
    }

    /// Recomputes per-class counts from the records (used after reading a
    /// manifest back from disk).
    pub fn tally_per_class(records: &[ImageRecord]) -> BTreeMap<ClassLabel, ClassSplitCounts> {
        let mut map: BTreeMap<ClassLabel, ClassSplitCounts> = BTreeMap::new();
        for r in records {
            let entry = map.entry(r.class_label).or_default();
            match r.split {
                Split::Train => entry.train += 1,
                Split::Val => entry.val += 1,
                Split::Test => entry.test += 1,
                Split::Unassigned => {}
            }
        }
        map
    }
}

/// Stage sizing: how many of `n` go to the cut governed by `frac`, clamped
/// so that both sides stay non-empty (and the remainder keeps at least
/// `min_rest` elements).
fn stage_take(n: usize, frac: f64, min_rest: usize) -> usize {
    let raw = (frac * n as f64).round() as usize;
    raw.clamp(1, n.saturating_sub(min_rest))
}

/// Splits records into train/val/test, stratified per class, with the
/// two-stage procedure: first test vs (train+val) at the test ratio, then
/// val vs train inside the remainder. Deterministic in (records, ratios,
/// seed); the class shuffles use independent streams derived from the seed
/// and the class name, so class iteration order is irrelevant.
pub fn stratified_split(
    records: &[ImageRecord],
    ratios: SplitRatios,
    seed: u64,
) -> Result<SplitManifest> {
    ratios.validate()?;

    let mut by_class: BTreeMap<ClassLabel, Vec<usize>> = BTreeMap::new();
    for (i, rec) in records.iter().enumerate() {
        by_class.entry(rec.class_label).or_default().push(i);
    }
    for (label, idxs) in &by_class {
        if idxs.len() < 3 {
            return Err(CoreError::Config(format!(
                "class {label} has only {} record(s); at least 3 are required to fill all splits",
                idxs.len()
            )));
        }
    }

    let mut out: Vec<ImageRecord> = records.to_vec();
    let stage2 = ratios.stage2_val_frac();
    let mut per_class: BTreeMap<ClassLabel, ClassSplitCounts> = BTreeMap::new();

    for (label, mut idxs) in by_class {
        let class_seed = fnv1a64(&[&seed.to_le_bytes(), label.name().as_bytes(), b"split"]);
        let mut rng = ChaCha12Rng::seed_from_u64(class_seed);
        idxs.shuffle(&mut rng);

        let n = idxs.len();
        let n_test = stage_take(n, ratios.test, 2);
        let trainval = n - n_test;
        let n_val = stage_take(trainval, stage2, 1);
        let n_train = trainval - n_val;

        for (pos, &rec_idx) in idxs.iter().enumerate() {
            out[rec_idx].split = if pos < n_test {
                Split::Test
            } else if pos < n_test + n_val {
                Split::Val
            } else {
                Split::Train
            };
        }
        per_class.insert(label, ClassSplitCounts { train: n_train, val: n_val, test: n_test });
    }

    Ok(SplitManifest {
        records: out,
        ratios,
        seed,
        augmentation_factor: 0,
        per_class_counts: per_class,
    })
}

/// Expands the train split: every original train record gains exactly
/// `factor` augmented children with pairwise distinct kinds drawn from
/// `kinds`. Augmented records reference their parent and carry the seed
/// that regenerates their pixels. Validation and test splits are untouched.
pub fn augment_training_set(
    manifest: &SplitManifest,
    factor: u32,
    kinds: &[AugmentKind],
    seed: u64,
) -> Result<SplitManifest> {
    if factor as usize > kinds.len() {
        return Err(CoreError::InvalidArgument(format!(
            "augmentation factor {factor} exceeds the {} configured kinds; \
             duplicate kinds per record are not supported",
            kinds.len()
        )));
    }
    let mut out = manifest.clone();
    out.augmentation_factor = factor;
    if factor == 0 {
        return Ok(out);
    }

    let mut children = Vec::new();
    for rec in &manifest.records {
        if rec.split != Split::Train || !rec.provenance.is_original() {
            continue;
        }
        // Deterministic per-record kind selection: shuffle the configured
        // list with a stream derived from (seed, record id).
        let kind_seed = fnv1a64(&[&seed.to_le_bytes(), rec.id.as_bytes(), b"kinds"]);
        let mut rng = ChaCha12Rng::seed_from_u64(kind_seed);
        let mut pool: Vec<AugmentKind> = kinds.to_vec();
        pool.shuffle(&mut rng);

        for (i, &kind) in pool.iter().take(factor as usize).enumerate() {
            let aug_seed = crate::dataset::augment::record_seed(seed, &rec.id, kind);
            children.push(ImageRecord {
                id: format!("{}#aug{}-{}", rec.id, i, kind.name()),
                path: rec.path.clone(),
                class_label: rec.class_label,
                split: Split::Train,
                width: rec.width,
                height: rec.height,
                provenance: Provenance::Augmented {
                    kind,
                    seed: aug_seed,
                    parent_id: rec.id.clone(),
                },
            });
        }
    }

    for child in &children {
        out.per_class_counts
            .get_mut(&child.class_label)
            .expect("parent class present")
            .train += 1;
    }
    out.records.extend(children);
    Ok(out)
}
