//! Manifest-driven batch editing. Entries run independently on a fixed-size
//! thread pool and a failing entry never aborts the others.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::colorspace::Rgb;
use crate::error::{Error, Result};
use crate::io::{load_image, save_image, save_json};
use crate::pipeline::{edit_primary_colour, EditReport, EditRequest};

/// One `input,target,output` row.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub input: PathBuf,
    pub target: String,
    pub output: PathBuf,
}

/// Reads a CSV manifest with header `input,target,output`. Relative paths are
/// resolved against the manifest's directory.
pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>> {
    let manifest_err = |source| Error::Manifest {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(manifest_err)?;
    let base = path.parent().unwrap_or(Path::new(""));
    reader
        .deserialize::<ManifestEntry>()
        .map(|row| {
            let row = row.map_err(manifest_err)?;
            Ok(ManifestEntry {
                input: base.join(row.input),
                target: row.target,
                output: base.join(row.output),
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct BatchOptions {
    /// Defaults for every entry; the target colour comes from the manifest.
    pub request: EditRequest<f64>,
    /// Worker threads; 0 uses all available cores.
    pub jobs: usize,
    /// When set, `<output stem>.json` reports are written here.
    pub report_dir: Option<PathBuf>,
}

#[derive(Debug)]
pub struct BatchRecord {
    pub entry: ManifestEntry,
    pub outcome: Result<EditReport<f64>>,
}

impl BatchRecord {
    pub fn is_ok(&self) -> bool {
        self.outcome.is_ok()
    }
}

pub fn report_path_for(report_dir: &Path, output: &Path) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_os_string()).unwrap_or_else(|| "report".into());
    report_dir.join(stem).with_extension("json")
}

/// Runs a single manifest entry: decode, edit, write output (and report).
pub fn run_entry(entry: &ManifestEntry, options: &BatchOptions) -> Result<EditReport<f64>> {
    let target = Rgb::from_hex(&entry.target).ok_or_else(|| Error::InvalidHex(entry.target.clone()))?;
    let img = load_image::<f64>(&entry.input)?;
    let request = EditRequest {
        target,
        ..options.request
    };
    let (out, report) = edit_primary_colour(&img, &request)?;
    save_image(&entry.output, &out)?;
    if let Some(dir) = &options.report_dir {
        save_json(&report_path_for(dir, &entry.output), &report)?;
    }
    Ok(report)
}

/// Processes every entry; records come back in manifest order.
pub fn edit_batch(entries: &[ManifestEntry], options: &BatchOptions) -> Result<Vec<BatchRecord>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| Error::InvalidParams(format!("thread pool: {e}")))?;
    Ok(pool.install(|| {
        entries
            .par_iter()
            .map(|entry| {
                let outcome = run_entry(entry, options);
                if let Err(e) = &outcome {
                    log::warn!("{}: {e}", entry.input.display());
                }
                BatchRecord {
                    entry: entry.clone(),
                    outcome,
                }
            })
            .collect()
    }))
}
