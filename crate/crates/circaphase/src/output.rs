//! CSV outputs with JSON metadata sidecars.
//!
//! Every CSV written here gets a `<stem>.meta.json` next to it holding the
//! parameters, seeds and inputs needed to reproduce it.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use circaphase_core::anf::{Detrend, PhaseSeries};
use circaphase_core::cosinor::Actogram;
use circaphase_core::periodogram::PeriodogramResult;
use circaphase_core::prc::{PrcCurve, PrcMethod, PrcPoint};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub parameters: Value,
    pub seeds: Vec<u64>,
    pub inputs: Vec<String>,
    /// Output-specific details (e.g. detrend line, screening counts).
    #[serde(default)]
    pub extra: Value,
}

impl Metadata {
    pub fn new(command: &str, parameters: impl Serialize) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            parameters: serde_json::to_value(parameters).unwrap_or(Value::Null),
            seeds: Vec::new(),
            inputs: Vec::new(),
            extra: Value::Null,
        }
    }

    pub fn with_seeds(mut self, seeds: impl IntoIterator<Item = u64>) -> Self {
        self.seeds = seeds.into_iter().collect();
        self
    }

    pub fn with_inputs(mut self, inputs: impl IntoIterator<Item = String>) -> Self {
        self.inputs = inputs.into_iter().collect();
        self
    }

    pub fn with_extra(mut self, extra: impl Serialize) -> Self {
        self.extra = serde_json::to_value(extra).unwrap_or(Value::Null);
        self
    }
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    path.with_extension("meta.json")
}

fn create(path: &Path) -> AppResult<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| AppError::io(path, e))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> AppResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n").map_err(|e| AppError::io(path, e))?;
    w.flush().map_err(|e| AppError::io(path, e))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> AppResult<T> {
    let f = File::open(path).map_err(|e| AppError::io(path, e))?;
    Ok(serde_json::from_reader(BufReader::new(f))?)
}

fn write_table(path: &Path, header: &[&str], rows: impl Iterator<Item = Vec<String>>, meta: &Metadata) -> AppResult<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| AppError::io(path, e))?;
    write_json(&sidecar_path(path), meta)
}

fn read_rows(path: &Path) -> AppResult<(csv::StringRecord, Vec<csv::StringRecord>)> {
    let mut r = csv::Reader::from_path(path).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))?;
    let header = r.headers()?.clone();
    let rows = r.records().collect::<Result<Vec<_>, _>>()?;
    Ok((header, rows))
}

fn cell(path: &Path, row: &csv::StringRecord, line: usize, col: usize) -> AppResult<f64> {
    let text = row.get(col).unwrap_or_default();
    text.trim().parse().map_err(|_| AppError::Parse {
        path: path.display().to_string(),
        line,
        message: format!("`{text}` is not a number"),
    })
}

const SERIES_HEADER: [&str; 6] = ["time_h", "argument_rad", "omega_rad_per_h", "phase_h", "period_h", "amplitude"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct SeriesInfo {
    phase_defined: bool,
    detrend: Option<Detrend>,
    held_samples: usize,
}

/// Writes a phase series; the sidecar's `extra` holds the detrend line and
/// flags so that [`read_phase_series`] restores the full value.
pub fn write_phase_series(path: &Path, s: &PhaseSeries, meta: Metadata) -> AppResult<()> {
    let info = SeriesInfo {
        phase_defined: s.phase_defined,
        detrend: s.detrend,
        held_samples: s.held_samples,
    };
    let meta = meta.with_extra(info);
    let rows = (0..s.len()).map(|i| {
        [s.times_h[i], s.argument_rad[i], s.omega_rad_per_h[i], s.phase_h[i], s.period_h[i], s.amplitude[i]]
            .iter()
            .map(|v| format!("{v:e}"))
            .collect()
    });
    write_table(path, &SERIES_HEADER, rows, &meta)
}

pub fn read_phase_series(path: &Path) -> AppResult<PhaseSeries> {
    let meta: Metadata = read_json(&sidecar_path(path))?;
    let info: SeriesInfo = serde_json::from_value(meta.extra)?;
    let (_, rows) = read_rows(path)?;
    let mut cols: [Vec<f64>; 6] = Default::default();
    for (i, row) in rows.iter().enumerate() {
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(cell(path, row, i + 2, c)?);
        }
    }
    let [times_h, argument_rad, omega_rad_per_h, phase_h, period_h, amplitude] = cols;
    Ok(PhaseSeries {
        times_h,
        argument_rad,
        omega_rad_per_h,
        phase_h,
        period_h,
        amplitude,
        phase_defined: info.phase_defined,
        detrend: info.detrend,
        held_samples: info.held_samples,
    })
}

pub fn write_periodogram(path: &Path, r: &PeriodogramResult, meta: Metadata) -> AppResult<()> {
    let meta = meta.with_extra(serde_json::json!({
        "dominant_period_h": r.dominant_period_h,
        "power_ratio": r.power_ratio,
        "rhythmic": r.rhythmic,
        "inactive": r.inactive,
    }));
    let rows = r
        .periods_h
        .iter()
        .zip(&r.power)
        .map(|(p, w)| vec![format!("{p}"), format!("{w:e}")]);
    write_table(path, &["period_h", "power"], rows, &meta)
}

const PRC_HEADER: [&str; 6] = ["cp_h", "shift_h", "sd_h", "method", "n_target", "n_control"];

pub fn write_prc(path: &Path, curve: &PrcCurve, meta: Metadata) -> AppResult<()> {
    let meta = meta.with_extra(serde_json::json!({
        "eval_day": curve.eval_day,
        "sign_convention": "advance positive, circadian hours, wrapped to (-12, 12]",
        "warnings": curve.warnings,
    }));
    let rows = curve.points.iter().map(|p| {
        vec![
            format!("{}", p.cp_h),
            format!("{}", p.shift_h),
            format!("{}", p.sd_h),
            curve.method.as_str().to_string(),
            p.n_target.to_string(),
            p.n_control.to_string(),
        ]
    });
    write_table(path, &PRC_HEADER, rows, &meta)
}

/// Reads a PRC CSV. The method defaults to `anf` for an empty file and the
/// evaluation day comes from the sidecar when one exists.
pub fn read_prc(path: &Path) -> AppResult<PrcCurve> {
    let (_, rows) = read_rows(path)?;
    let mut method = PrcMethod::Anf;
    let mut points = Vec::with_capacity(rows.len());
    for (i, row) in rows.iter().enumerate() {
        let line = i + 2;
        method = match row.get(3).map(str::trim) {
            Some("acrophase") => PrcMethod::Acrophase,
            Some("anf") | None | Some("") => PrcMethod::Anf,
            Some(other) => {
                return Err(AppError::Parse {
                    path: path.display().to_string(),
                    line,
                    message: format!("unknown method `{other}`"),
                })
            }
        };
        let count = |c: usize| cell(path, row, line, c).map(|v| v as usize).unwrap_or(0);
        points.push(PrcPoint {
            cp_h: cell(path, row, line, 0)?,
            shift_h: cell(path, row, line, 1)?,
            sd_h: cell(path, row, line, 2).unwrap_or(0.0),
            n_target: count(4),
            n_control: count(5),
        });
    }
    let eval_day = read_json::<Metadata>(&sidecar_path(path))
        .ok()
        .and_then(|m| m.extra.get("eval_day").and_then(Value::as_u64))
        .unwrap_or(0) as u32;
    Ok(PrcCurve {
        method,
        eval_day,
        points,
        warnings: Vec::new(),
    })
}

/// Rows are days; the first column is the 1-based row number.
pub fn write_actogram(path: &Path, a: &Actogram, meta: Metadata) -> AppResult<()> {
    let meta = meta.with_extra(serde_json::json!({
        "fold_period_h": a.fold_period_h,
        "bins_per_fold": a.bins_per_fold,
        "padded": a.padded,
    }));
    let header: Vec<String> = std::iter::once("row".to_string())
        .chain((0..2 * a.bins_per_fold).map(|i| format!("b{i}")))
        .collect();
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let rows = a.rows.iter().enumerate().map(|(r, row)| {
        std::iter::once((r + 1).to_string())
            .chain(row.iter().map(|v| format!("{v}")))
            .collect()
    });
    write_table(path, &header_refs, rows, &meta)
}

/// Writes arbitrary rows under a header, with a sidecar.
pub fn write_rows(path: &Path, header: &[&str], rows: Vec<Vec<String>>, meta: &Metadata) -> AppResult<()> {
    write_table(path, header, rows.into_iter(), meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use circaphase_core::{anf_run, extract_phase, ActivityTrace, AnfParams};

    #[test]
    fn phase_series_round_trip() {
        let values = (0..3 * 1440).map(|i| 3.0 + (i as f64 / 60.0 * 0.26).sin()).collect();
        let t = ActivityTrace::new("a", "2024-01-01T00:00:00", 1, values).unwrap();
        let s = extract_phase(&anf_run(&t, &AnfParams::default()).unwrap(), (24.0, 72.0)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        write_phase_series(&p, &s, Metadata::new("estimate", AnfParams::default())).unwrap();
        assert_eq!(read_phase_series(&p).unwrap(), s);
        let meta: Metadata = read_json(&sidecar_path(&p)).unwrap();
        assert_eq!(meta.parameters, serde_json::to_value(AnfParams::default()).unwrap());
    }

    #[test]
    fn empty_prc_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("prc.csv");
        let curve = PrcCurve {
            method: PrcMethod::Acrophase,
            eval_day: 10,
            points: vec![],
            warnings: vec![],
        };
        write_prc(&p, &curve, Metadata::new("prc", ())).unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap().lines().count(), 1);
        assert_eq!(read_prc(&p).unwrap().points, vec![]);
    }
}
