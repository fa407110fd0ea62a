//! Column-per-channel CSV traces.
//!
//! The header names the channels. An optional leading `time_h` column is
//! skipped on input and always written on output.

use std::io::{Read, Write};

use circaphase_core::{ActivityTrace, TraceGroup};

use crate::error::{AppError, AppResult};

pub const TIME_COLUMN: &str = "time_h";

/// Grid metadata that a CSV file does not carry itself.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvLayout {
    pub bin_minutes: u32,
    pub t0: String,
}

impl Default for CsvLayout {
    fn default() -> Self {
        Self {
            bin_minutes: 1,
            t0: circaphase_core::synth::SYNTH_T0.to_string(),
        }
    }
}

pub fn parse_csv(reader: impl Read, layout: &CsvLayout, label: &str, source: &str) -> AppResult<TraceGroup> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers()?.clone();
    let skip = usize::from(headers.get(0) == Some(TIME_COLUMN));
    let names: Vec<String> = headers.iter().skip(skip).map(str::to_string).collect();
    if names.is_empty() {
        return Err(AppError::Data(format!("{source}: no channel columns")));
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for (row, record) in rdr.records().enumerate() {
        // header is line 1
        let line = row + 2;
        let record = record.map_err(|e| AppError::Parse {
            path: source.to_string(),
            line,
            message: e.to_string(),
        })?;
        for (c, col) in columns.iter_mut().enumerate() {
            let cell = record.get(c + skip).unwrap_or_default();
            let v: f64 = cell.parse().map_err(|_| AppError::Parse {
                path: source.to_string(),
                line,
                message: format!("column {} value `{cell}` is not a number", names[c]),
            })?;
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(AppError::Core(circaphase_core::Error::EmptyGroup));
    }
    let traces = names
        .into_iter()
        .zip(columns)
        .map(|(name, values)| ActivityTrace::new(name, layout.t0.clone(), layout.bin_minutes, values))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TraceGroup::new(label, traces)?)
}

pub fn write_csv(out: impl Write, group: &TraceGroup) -> AppResult<()> {
    group.validate()?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![TIME_COLUMN.to_string()];
    header.extend(group.channel_ids());
    w.write_record(&header)?;
    let first = &group.traces[0];
    let mut row = Vec::with_capacity(group.len() + 1);
    for i in 0..first.len() {
        row.clear();
        row.push(format!("{}", first.time_h(i)));
        row.extend(group.traces.iter().map(|t| format!("{:e}", t.values[i])));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| AppError::io("<csv output>", e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_only_is_empty_group() {
        let err = parse_csv("a,b\n".as_bytes(), &CsvLayout::default(), "g", "mem").unwrap_err();
        assert!(matches!(err, AppError::Core(circaphase_core::Error::EmptyGroup)));
    }

    #[test]
    fn one_channel_ten_rows() {
        let text: String = std::iter::once("c1\n".to_string())
            .chain((0..10).map(|i| format!("{i}\n")))
            .collect();
        let g = parse_csv(text.as_bytes(), &CsvLayout::default(), "g", "mem").unwrap();
        assert_eq!(g.traces[0].len(), 10);
        assert_eq!(g.traces[0].channel_id, "c1");
    }

    #[test]
    fn scientific_notation_and_round_trip() {
        let g = parse_csv("time_h,a\n0,1.5e0\n0.0167,-2.25E-1\n".as_bytes(), &CsvLayout::default(), "g", "m").unwrap();
        assert_eq!(g.traces[0].values, vec![1.5, -0.225]);
        let mut buf = Vec::new();
        write_csv(&mut buf, &g).unwrap();
        let back = parse_csv(buf.as_slice(), &CsvLayout::default(), "g", "m").unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn ragged_and_non_numeric_rejected() {
        assert!(parse_csv("a,b\n1,2\n3\n".as_bytes(), &CsvLayout::default(), "g", "m").is_err());
        assert!(parse_csv("a\nfoo\n".as_bytes(), &CsvLayout::default(), "g", "m").is_err());
    }
}
