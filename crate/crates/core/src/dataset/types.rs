//! Core dataset vocabulary: class labels, split assignments, provenance.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};

/// The five cervical cell categories of the isolated-cell corpus.
///
/// The declaration order is the canonical label order used everywhere:
/// class indices, weight vectors, confusion-matrix axes, and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClassLabel {
    Dyskeratotic,
    Koilocytotic,
    Metaplastic,
    Parabasal,
    SuperficialIntermediate,
}

impl ClassLabel {
    pub const ALL: [ClassLabel; 5] = [
        ClassLabel::Dyskeratotic,
        ClassLabel::Koilocytotic,
        ClassLabel::Metaplastic,
        ClassLabel::Parabasal,
        ClassLabel::SuperficialIntermediate,
    ];

    pub const COUNT: usize = 5;

    pub fn index(self) -> usize {
        match self {
            ClassLabel::Dyskeratotic => 0,
            ClassLabel::Koilocytotic => 1,
            ClassLabel::Metaplastic => 2,
            ClassLabel::Parabasal => 3,
            ClassLabel::SuperficialIntermediate => 4,
        }
    }

    pub fn from_index(idx: usize) -> Result<Self> {
        Self::ALL
            .get(idx)
            .copied()
            .ok_or_else(|| CoreError::InvalidArgument(format!("class index {idx} out of range 0..5")))
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassLabel::Dyskeratotic => "Dyskeratotic",
            ClassLabel::Koilocytotic => "Koilocytotic",
            ClassLabel::Metaplastic => "Metaplastic",
            ClassLabel::Parabasal => "Parabasal",
            ClassLabel::SuperficialIntermediate => "SuperficialIntermediate",
        }
    }

    /// Parses a class directory name. Accepts the canonical names plus the
    /// common on-disk variants: an optional `im_` prefix, any mix of case,
    /// and `-`/`_`/space separators (e.g. `im_Superficial-Intermediate`).
    pub fn from_dir_name(name: &str) -> Option<Self> {
        let mut key: String = name
            .chars()
            .filter(|c| !matches!(c, '-' | '_' | ' '))
            .collect::<String>()
            .to_ascii_lowercase();
        if let Some(stripped) = key.strip_prefix("im") {
            // `im_Parabasal` normalizes to `imparabasal`; strip the prefix
            // only when the remainder is a known label so that a class
            // actually named `im...` would not be misread.
            if Self::from_key(stripped).is_some() {
                key = stripped.to_string();
            }
        }
        Self::from_key(&key)
    }

    fn from_key(key: &str) -> Option<Self> {
        match key {
            "dyskeratotic" => Some(ClassLabel::Dyskeratotic),
            "koilocytotic" => Some(ClassLabel::Koilocytotic),
            "metaplastic" => Some(ClassLabel::Metaplastic),
            "parabasal" => Some(ClassLabel::Parabasal),
            "superficialintermediate" => Some(ClassLabel::SuperficialIntermediate),
            _ => None,
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ClassLabel {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        ClassLabel::from_dir_name(s)
            .ok_or_else(|| CoreError::InvalidArgument(format!("unknown class label `{s}`")))
    }
}

/// Split membership of a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
    Unassigned,
}

impl fmt::Display for Split {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
            Split::Unassigned => "unassigned",
        };
        f.write_str(s)
    }
}

impl FromStr for Split {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "val" => Ok(Split::Val),
            "test" => Ok(Split::Test),
            "unassigned" => Ok(Split::Unassigned),
            other => Err(CoreError::InvalidArgument(format!("unknown split `{other}`"))),
        }
    }
}

/// The supported augmentation transforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentKind {
    Rotate,
    Translate,
    Scale,
    Shear,
    Zoom,
    Flip,
    Pad,
    Noise,
    Contrast,
    Brightness,
    PixelShift,
}

impl AugmentKind {
    pub const ALL: [AugmentKind; 11] = [
        AugmentKind::Rotate,
        AugmentKind::Translate,
        AugmentKind::Scale,
        AugmentKind::Shear,
        AugmentKind::Zoom,
        AugmentKind::Flip,
        AugmentKind::Pad,
        AugmentKind::Noise,
        AugmentKind::Contrast,
        AugmentKind::Brightness,
        AugmentKind::PixelShift,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AugmentKind::Rotate => "rotate",
            AugmentKind::Translate => "translate",
            AugmentKind::Scale => "scale",
            AugmentKind::Shear => "shear",
            AugmentKind::Zoom => "zoom",
            AugmentKind::Flip => "flip",
            AugmentKind::Pad => "pad",
            AugmentKind::Noise => "noise",
            AugmentKind::Contrast => "contrast",
            AugmentKind::Brightness => "brightness",
            AugmentKind::PixelShift => "pixel_shift",
        }
    }
}

impl fmt::Display for AugmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AugmentKind {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        AugmentKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| CoreError::InvalidArgument(format!("unknown augmentation kind `{s}`")))
    }
}

/// Where a record's pixels come from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Original,
    /// An augmented child of a train-split original. Pixels are regenerated
    /// on demand from the parent image, the kind, and the seed.
    Augmented {
        kind: AugmentKind,
        seed: u64,
        parent_id: String,
    },
}

impl Provenance {
    pub fn is_original(&self) -> bool {
        matches!(self, Provenance::Original)
    }
}

/// One dataset row: an image on disk (or a deterministic augmentation of
/// one) together with its label, split, and lineage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImageRecord {
    pub id: String,
    pub path: PathBuf,
    pub class_label: ClassLabel,
    pub split: Split,
    pub width: u32,
    pub height: u32,
    pub provenance: Provenance,
}

impl ImageRecord {
    pub fn original(
        id: impl Into<String>,
        path: impl Into<PathBuf>,
        class_label: ClassLabel,
        width: u32,
        height: u32,
    ) -> Self {
        ImageRecord {
            id: id.into(),
            path: path.into(),
            class_label,
            split: Split::Unassigned,
            width,
            height,
            provenance: Provenance::Original,
        }
    }
}

/// A file that could not be ingested, with the reason. Collected instead of
/// aborting the scan.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RejectedFile {
    pub path: PathBuf,
    pub reason: String,
}
