//! Directory-tree ingestion: one subdirectory per class, images inside.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use crate::dataset::image::read_dimensions;
use crate::dataset::types::{ClassLabel, ImageRecord, RejectedFile};
use crate::error::{CoreError, Result};

/// File extensions treated as images during a scan.
pub const IMAGE_EXTENSIONS: [&str; 4] = ["bmp", "png", "jpg", "jpeg"];

/// Result of scanning a dataset root.
#[derive(Debug)]
pub struct IngestReport {
    /// One record per decodable image, provenance original, split unassigned.
    pub records: Vec<ImageRecord>,
    /// Files that could not be ingested, with reasons. Never a crash.
    pub rejects: Vec<RejectedFile>,
    /// Image counts per class, in canonical label order.
    pub per_class: [usize; ClassLabel::COUNT],
}

impl IngestReport {
    pub fn total(&self) -> usize {
        self.records.len()
    }
}

/// Scans `root`, which must contain exactly one subdirectory per class
/// label (canonical names or common variants such as `im_Parabasal`).
/// Images are discovered recursively inside each class directory in sorted
/// order, so two scans of the same tree produce identical record lists.
///
/// Undecodable files are collected into the rejects list; layout problems
/// (missing class directory, unrecognized extra directory) are hard errors.
pub fn ingest_dataset(root: &Path) -> Result<IngestReport> {
    let expected: Vec<&str> = ClassLabel::ALL.iter().map(|l| l.name()).collect();
    if !root.is_dir() {
        return Err(CoreError::Config(format!(
            "dataset root {} is not a directory; expected one subdirectory per class: {}",
            root.display(),
            expected.join(", ")
        )));
    }

    let mut class_dirs: BTreeMap<ClassLabel, PathBuf> = BTreeMap::new();
    let mut entries: Vec<PathBuf> = fs::read_dir(root)
        .map_err(|e| CoreError::io(root, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();

    let mut rejects = Vec::new();
    for entry in entries {
        if entry.is_dir() {
            let name = entry.file_name().unwrap_or_default().to_string_lossy().to_string();
            match ClassLabel::from_dir_name(&name) {
                Some(label) => {
                    if let Some(prev) = class_dirs.insert(label, entry.clone()) {
                        return Err(CoreError::Config(format!(
                            "duplicate directories for class {label}: {} and {}",
                            prev.display(),
                            entry.display()
                        )));
                    }
                }
                None => {
                    return Err(CoreError::Config(format!(
                        "unrecognized directory `{name}` in dataset root; expected exactly these classes: {}",
                        expected.join(", ")
                    )));
                }
            }
        } else {
            rejects.push(RejectedFile {
                path: entry.clone(),
                reason: "file outside any class directory".into(),
            });
        }
    }

    let missing: Vec<&str> = ClassLabel::ALL
        .iter()
        .filter(|l| !class_dirs.contains_key(l))
        .map(|l| l.name())
        .collect();
    if !missing.is_empty() {
        return Err(CoreError::Config(format!(
            "missing class directories: {}; expected exactly these classes: {}",
            missing.join(", "),
            expected.join(", ")
        )));
    }

    let mut records = Vec::new();
    let mut per_class = [0usize; ClassLabel::COUNT];
    for (&label, dir) in &class_dirs {
        let mut files = Vec::new();
        collect_image_files(dir, &mut files, &mut rejects)?;
        files.sort();
        for file in files {
            let rel = file.strip_prefix(root).unwrap_or(&file);
            let id = rel.to_string_lossy().replace('\\', "/");
            match read_dimensions(&file) {
                Ok((w, h)) if w >= 1 && h >= 1 => {
                    per_class[label.index()] += 1;
                    records.push(ImageRecord::original(id, &file, label, w, h));
                }
                Ok((w, h)) => rejects.push(RejectedFile {
                    path: file,
                    reason: format!("degenerate dimensions {w}x{h}"),
                }),
                Err(e) => rejects.push(RejectedFile { path: file, reason: e.to_string() }),
            }
        }
    }

    Ok(IngestReport { records, rejects, per_class })
}

fn collect_image_files(
    dir: &Path,
    out: &mut Vec<PathBuf>,
    rejects: &mut Vec<RejectedFile>,
) -> Result<()> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CoreError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .collect();
    entries.sort();
    for entry in entries {
        if entry.is_dir() {
            collect_image_files(&entry, out, rejects)?;
        } else if has_image_extension(&entry) {
            out.push(entry);
        } else {
            // Non-image files (annotations, notes) are silently skipped;
            // only image-like files that fail to decode become rejects.
            let _ = rejects;
        }
    }
    Ok(())
}

fn has_image_extension(path: &Path) -> bool {
    path.extension()
        .and_then(|e| e.to_str())
        .map(|e| {
            let lower = e.to_ascii_lowercase();
            IMAGE_EXTENSIONS.contains(&lower.as_str())
        })
        .unwrap_or(false)
}
