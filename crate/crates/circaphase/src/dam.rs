//! DAM-style monitor files.
//!
//! One reading per line, tab separated:
//!
//! ```text
//! index  date  time  status  light_flag  c1 … c32
//! 1      1 Jan 24  00:00:00  1  0  0 3 0 …
//! ```
//!
//! `date` is `D Mon YY`, `time` is `HH:MM:SS`. Columns after the 32nd count
//! are ignored with a warning. `light_flag` carries the light intensity in
//! lux, rounded to an integer; 0 is dark.

use std::io::{BufRead, Write};

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime};
use circaphase_core::{light_at, ActivityTrace, LightInterval, LightSchedule, TraceGroup};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

pub const DAM_CHANNELS: usize = 32;
const FIXED_COLUMNS: usize = 5;
const DATE_FORMAT: &str = "%-d %b %y";
const TIME_FORMAT: &str = "%H:%M:%S";
pub const ISO_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";
pub const DAM_WAVELENGTH: &str = "dam";

/// One parsed line.
#[derive(Debug, Clone, PartialEq)]
pub struct DamRecord {
    pub reading_index: u64,
    pub timestamp: NaiveDateTime,
    pub status_code: i64,
    pub light_flag: i64,
    pub channel_counts: [u32; DAM_CHANNELS],
}

/// A run of readings missing from the file, filled with zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gap {
    /// Bin index of the first filled reading.
    pub first_bin: usize,
    pub start: String,
    pub missing_bins: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DamFile {
    pub group: TraceGroup,
    pub schedule: LightSchedule,
    pub gaps: Vec<Gap>,
    pub warnings: Vec<String>,
}

fn parse_err(source: &str, line: usize, message: impl Into<String>) -> AppError {
    AppError::Parse {
        path: source.to_string(),
        line,
        message: message.into(),
    }
}

/// Parses one line; `extras` receives the count of ignored trailing columns.
pub fn parse_record(text: &str, source: &str, line: usize) -> AppResult<(DamRecord, usize)> {
    let cols: Vec<&str> = text.trim_end_matches(['\r', '\n']).split('\t').collect();
    let need = FIXED_COLUMNS + DAM_CHANNELS;
    if cols.len() < need {
        return Err(parse_err(
            source,
            line,
            format!("expected {need} tab-separated columns, found {}", cols.len()),
        ));
    }
    let int = |i: usize, what: &str| -> AppResult<i64> {
        cols[i]
            .trim()
            .parse::<i64>()
            .map_err(|_| parse_err(source, line, format!("{what} `{}` is not an integer", cols[i])))
    };
    let date = NaiveDate::parse_from_str(cols[1].trim(), DATE_FORMAT)
        .map_err(|e| parse_err(source, line, format!("bad date `{}`: {e}", cols[1])))?;
    let time = NaiveTime::parse_from_str(cols[2].trim(), TIME_FORMAT)
        .map_err(|e| parse_err(source, line, format!("bad time `{}`: {e}", cols[2])))?;
    let reading_index = u64::try_from(int(0, "index")?)
        .map_err(|_| parse_err(source, line, "negative reading index"))?;
    let mut channel_counts = [0u32; DAM_CHANNELS];
    for (c, slot) in channel_counts.iter_mut().enumerate() {
        let v = int(FIXED_COLUMNS + c, "count")?;
        *slot = u32::try_from(v)
            .map_err(|_| parse_err(source, line, format!("count {v} in channel {} out of range", c + 1)))?;
    }
    Ok((
        DamRecord {
            reading_index,
            timestamp: date.and_time(time),
            status_code: int(3, "status")?,
            light_flag: int(4, "light flag")?,
            channel_counts,
        },
        cols.len() - need,
    ))
}

/// Converts per-bin light flags into intervals of constant intensity.
fn schedule_from_flags(flags: &[i64], bin_h: f64) -> LightSchedule {
    let mut intervals = Vec::new();
    let mut i = 0;
    while i < flags.len() {
        let flag = flags[i];
        let start = i;
        while i < flags.len() && flags[i] == flag {
            i += 1;
        }
        if flag > 0 {
            intervals.push(LightInterval {
                start_h: start as f64 * bin_h,
                end_h: i as f64 * bin_h,
                intensity_lux: flag as f64,
                wavelength: DAM_WAVELENGTH.to_string(),
            });
        }
    }
    LightSchedule { intervals }
}

/// Reads a monitor file. Channels are named `<label>-01` … `<label>-32`.
///
/// The bin width is taken from the first two readings (1 minute for a
/// single-line file). Missing readings are zero-filled and listed in
/// [`DamFile::gaps`].
pub fn parse_dam(reader: impl BufRead, label: &str, source: &str) -> AppResult<DamFile> {
    let mut records: Vec<(usize, DamRecord)> = Vec::new();
    let mut warnings = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let text = line.map_err(|e| AppError::io(source, e))?;
        if text.trim().is_empty() {
            warnings.push(format!("{source}:{line_no}: blank line skipped"));
            continue;
        }
        let (rec, extras) = parse_record(&text, source, line_no)?;
        if extras > 0 {
            warnings.push(format!("{source}:{line_no}: {extras} extra column(s) ignored"));
        }
        records.push((line_no, rec));
    }
    let first = records
        .first()
        .ok_or_else(|| AppError::Data(format!("{source}: no readings")))?
        .1
        .timestamp;
    let bin = match records.get(1) {
        Some((line, r)) => {
            let d = r.timestamp - first;
            if d <= Duration::zero() || d.num_seconds() % 60 != 0 {
                return Err(parse_err(source, *line, "timestamps must increase by whole minutes"));
            }
            d
        }
        None => Duration::minutes(1),
    };
    let bin_minutes = bin.num_minutes();

    let mut counts: Vec<Vec<f64>> = (0..DAM_CHANNELS).map(|_| Vec::with_capacity(records.len())).collect();
    let mut flags = Vec::with_capacity(records.len());
    let mut gaps = Vec::new();
    let mut expected = first;
    for (line, rec) in &records {
        if rec.timestamp < expected {
            return Err(parse_err(source, *line, "timestamp is not after the previous reading"));
        }
        let ahead = rec.timestamp - expected;
        if ahead.num_seconds() % bin.num_seconds() != 0 {
            return Err(parse_err(source, *line, "timestamp is off the bin grid"));
        }
        let missing = (ahead.num_seconds() / bin.num_seconds()) as usize;
        if missing > 0 {
            gaps.push(Gap {
                first_bin: flags.len(),
                start: expected.format(ISO_FORMAT).to_string(),
                missing_bins: missing,
            });
            for c in &mut counts {
                c.extend(std::iter::repeat_n(0.0, missing));
            }
            // light state across a gap is unknown; keep the last one
            let last = flags.last().copied().unwrap_or(0);
            flags.extend(std::iter::repeat_n(last, missing));
        }
        for (c, v) in counts.iter_mut().zip(rec.channel_counts) {
            c.push(v as f64);
        }
        flags.push(rec.light_flag);
        expected = rec.timestamp + bin;
    }
    let t0 = first.format(ISO_FORMAT).to_string();
    let traces = counts
        .into_iter()
        .enumerate()
        .map(|(c, values)| ActivityTrace::new(format!("{label}-{:02}", c + 1), t0.clone(), bin_minutes as u32, values))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DamFile {
        group: TraceGroup::new(label, traces)?,
        schedule: schedule_from_flags(&flags, bin_minutes as f64 / 60.0),
        gaps,
        warnings,
    })
}

/// Writes up to 32 traces as a monitor file; unused channels are zero.
///
/// Values are rounded to whole counts, so only count-valued traces round
/// trip exactly.
pub fn write_dam(mut out: impl Write, group: &TraceGroup, schedule: &LightSchedule) -> AppResult<()> {
    if group.len() > DAM_CHANNELS {
        return Err(AppError::Data(format!(
            "a monitor holds {DAM_CHANNELS} channels, group {} has {}",
            group.label,
            group.len()
        )));
    }
    group.validate()?;
    let first = &group.traces[0];
    let t0 = NaiveDateTime::parse_from_str(&first.t0, ISO_FORMAT)
        .map_err(|e| AppError::Data(format!("trace origin `{}`: {e}", first.t0)))?;
    let bin = Duration::minutes(first.bin_minutes as i64);
    let bin_h = first.bin_hours();
    let mut line = String::with_capacity(128);
    for i in 0..first.len() {
        let ts = t0 + bin * i as i32;
        let flag = light_at(schedule, (i as f64 + 0.5) * bin_h).round() as i64;
        line.clear();
        line.push_str(&format!(
            "{}\t{}\t{}\t1\t{}",
            i + 1,
            ts.format(DATE_FORMAT),
            ts.format(TIME_FORMAT),
            flag
        ));
        for c in 0..DAM_CHANNELS {
            let v = group.traces.get(c).map_or(0.0, |t| t.values[i]);
            line.push('\t');
            line.push_str(&format!("{}", v.round().max(0.0) as u64));
        }
        line.push('\n');
        out.write_all(line.as_bytes())
            .map_err(|e| AppError::io("<dam output>", e))?;
    }
    Ok(())
}
