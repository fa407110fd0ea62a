//! Input discovery: monitor files, CSV files and synth manifests.

use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use circaphase_core::{LightSchedule, TraceGroup};
use serde::{Deserialize, Serialize};

use crate::csv_io::{parse_csv, CsvLayout};
use crate::dam::{parse_dam, Gap};
use crate::error::{AppError, AppResult};
use crate::output::read_json;
use crate::scenario::{Role, Truth};

/// A loaded input file.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub path: PathBuf,
    pub group: TraceGroup,
    pub schedule: Option<LightSchedule>,
    pub gaps: Vec<Gap>,
    pub warnings: Vec<String>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "input".into())
}

/// Loads a `.csv` file as columns, anything else as a monitor file. The
/// group label is the file stem.
pub fn load_input(path: &Path, layout: &CsvLayout) -> AppResult<Loaded> {
    let file = File::open(path).map_err(|e| AppError::io(path, e))?;
    let reader = BufReader::new(file);
    let label = stem(path);
    let source = path.display().to_string();
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        Ok(Loaded {
            path: path.to_path_buf(),
            group: parse_csv(reader, layout, &label, &source)?,
            schedule: None,
            gaps: Vec::new(),
            warnings: Vec::new(),
        })
    } else {
        let dam = parse_dam(reader, &label, &source)?;
        for w in &dam.warnings {
            log::warn!("{w}");
        }
        for g in &dam.gaps {
            log::warn!("{source}: {} missing reading(s) from {} zero-filled", g.missing_bins, g.start);
        }
        Ok(Loaded {
            path: path.to_path_buf(),
            group: dam.group,
            schedule: Some(dam.schedule),
            gaps: dam.gaps,
            warnings: dam.warnings,
        })
    }
}

/// Index of a generated scenario directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub scenario: String,
    pub seed: u64,
    pub reference_control: String,
    pub incubators: Vec<ManifestEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub label: String,
    pub role: Role,
    pub cp_h: Option<f64>,
    /// Monitor file, relative to the manifest.
    pub file: String,
    pub truth: String,
    /// Channels that hold flies; the rest of the monitor is empty.
    pub channels: Vec<String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

impl Manifest {
    pub fn read(path: &Path) -> AppResult<(Self, PathBuf)> {
        let m: Manifest = read_json(path)?;
        let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((m, dir))
    }
}

/// Loads one manifest entry restricted to its populated channels.
pub fn load_entry(dir: &Path, entry: &ManifestEntry) -> AppResult<(TraceGroup, Truth)> {
    let loaded = load_input(&dir.join(&entry.file), &CsvLayout::default())?;
    let group = loaded.group.select(&entry.channels)?;
    let truth: Truth = read_json(&dir.join(&entry.truth))?;
    Ok((group, truth))
}
