//! Manifest persistence: line-delimited JSON with a header object followed
//! by one record object per line.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::split::{SplitManifest, SplitRatios};
use crate::dataset::types::{AugmentKind, ClassLabel, ImageRecord, Provenance, Split};
use crate::error::{CoreError, Result};
use crate::ioutil::atomic_write;

pub const MANIFEST_SCHEMA: &str = "cytoclass/manifest";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    schema: String,
    version: u32,
    tool_version: String,
    ratios: SplitRatios,
    seed: u64,
    augmentation_factor: u32,
    n_records: usize,
}

/// Flat row form of an `ImageRecord`, the on-disk schema.
#[derive(Debug, Serialize, Deserialize)]
struct Row {
    id: String,
    path: String,
    label: String,
    split: String,
    provenance: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    parent_id: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    seed: Option<u64>,
    width: u32,
    height: u32,
}

impl Row {
    fn from_record(rec: &ImageRecord) -> Row {
        let (provenance, parent_id, kind, seed) = match &rec.provenance {
            Provenance::Original => ("original".to_string(), None, None, None),
            Provenance::Augmented { kind, seed, parent_id } => (
                "augmented".to_string(),
                Some(parent_id.clone()),
                Some(kind.name().to_string()),
                Some(*seed),
            ),
        };
        Row {
            id: rec.id.clone(),
            path: rec.path.to_string_lossy().to_string(),
            label: rec.class_label.name().to_string(),
            split: rec.split.to_string(),
            provenance,
            parent_id,
            kind,
            seed,
            width: rec.width,
            height: rec.height,
        }
    }

    fn into_record(self, path: &Path, line: usize) -> Result<ImageRecord> {
        let class_label = ClassLabel::from_str(&self.label)
            .map_err(|_| CoreError::format(path, format!("line {line}: unknown label `{}`", self.label)))?;
        let split = Split::from_str(&self.split)
            .map_err(|_| CoreError::format(path, format!("line {line}: unknown split `{}`", self.split)))?;
        let provenance = match self.provenance.as_str() {
            "original" => Provenance::Original,
            "augmented" => {
                let kind_name = self.kind.ok_or_else(|| {
                    CoreError::format(path, format!("line {line}: augmented row missing kind"))
                })?;
                let kind = AugmentKind::from_str(&kind_name).map_err(|_| {
                    CoreError::format(path, format!("line {line}: unknown kind `{kind_name}`"))
                })?;
                Provenance::Augmented {
                    kind,
                    seed: self.seed.ok_or_else(|| {
                        CoreError::format(path, format!("line {line}: augmented row missing seed"))
                    })?,
                    parent_id: self.parent_id.ok_or_else(|| {
                        CoreError::format(path, format!("line {line}: augmented row missing parent_id"))
                    })?,
                }
            }
            other => {
                return Err(CoreError::format(
                    path,
                    format!("line {line}: unknown provenance `{other}`"),
                ))
            }
        };
        Ok(ImageRecord {
            id: self.id,
            path: PathBuf::from(self.path),
            class_label,
            split,
            width: self.width,
            height: self.height,
            provenance,
        })
    }
}

/// Serializes a manifest to its line-delimited form.
pub fn manifest_to_string(manifest: &SplitManifest) -> Result<String> {
    let header = Header {
        schema: MANIFEST_SCHEMA.to_string(),
        version: MANIFEST_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        ratios: manifest.ratios,
        seed: manifest.seed,
        augmentation_factor: manifest.augmentation_factor,
        n_records: manifest.records.len(),
    };
    let mut out = serde_json::to_string(&header)
        .map_err(|e| CoreError::InvalidArgument(format!("manifest header serialization: {e}")))?;
    out.push('\n');
    for rec in &manifest.records {
        let row = Row::from_record(rec);
        out.push_str(
            &serde_json::to_string(&row)
                .map_err(|e| CoreError::InvalidArgument(format!("manifest row serialization: {e}")))?,
        );
        out.push('\n');
    }
    Ok(out)
}

/// Writes a manifest atomically.
pub fn write_manifest(path: &Path, manifest: &SplitManifest) -> Result<()> {
    atomic_write(path, manifest_to_string(manifest)?.as_bytes())
}

/// Reads a manifest file, validating schema and version.
pub fn read_manifest(path: &Path) -> Result<SplitManifest> {
    let text = std::fs::read_to_string(path).map_err(|e| CoreError::io(path, e))?;
    parse_manifest(&text, path)
}

fn parse_manifest(text: &str, path: &Path) -> Result<SplitManifest> {
    let mut lines = text.lines().enumerate();
    let (_, header_line) = lines
        .next()
        .ok_or_else(|| CoreError::format(path, "empty manifest"))?;
    let header: Header = serde_json::from_str(header_line)
        .map_err(|e| CoreError::format(path, format!("header: {e}")))?;
    if header.schema != MANIFEST_SCHEMA {
        return Err(CoreError::format(
            path,
            format!("schema `{}` is not `{MANIFEST_SCHEMA}`", header.schema),
        ));
    }
    if header.version != MANIFEST_VERSION {
        return Err(CoreError::format(
            path,
            format!("unsupported manifest version {}", header.version),
        ));
    }

    let mut records = Vec::with_capacity(header.n_records);
    for (i, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let row: Row = serde_json::from_str(line)
            .map_err(|e| CoreError::format(path, format!("line {}: {e}", i + 1)))?;
        records.push(row.into_record(path, i + 1)?);
    }
    if records.len() != header.n_records {
        return Err(CoreError::format(
            path,
            format!("header declares {} records, found {}", header.n_records, records.len()),
        ));
    }

    let per_class_counts = SplitManifest::tally_per_class(&records);
    Ok(SplitManifest {
        records,
        ratios: header.ratios,
        seed: header.seed,
        augmentation_factor: header.augmentation_factor,
        per_class_counts,
    })
}
