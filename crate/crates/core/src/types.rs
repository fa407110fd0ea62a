//! Shared domain types: binned activity traces, light schedules and groups
//! of traces recorded on a common grid.
//!
//! Time downstream of ingestion is measured in hours from the trace origin
//! `t0`; bin `i` covers `[i * bin_h, (i + 1) * bin_h)`.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One channel's binned locomotor counts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityTrace {
    pub channel_id: String,
    /// ISO-8601 timestamp of the first bin.
    pub t0: String,
    pub bin_minutes: u32,
    pub values: Vec<f64>,
}

impl ActivityTrace {
    pub fn new(
        channel_id: impl Into<String>,
        t0: impl Into<String>,
        bin_minutes: u32,
        values: Vec<f64>,
    ) -> Result<Self> {
        let trace = Self {
            channel_id: channel_id.into(),
            t0: t0.into(),
            bin_minutes,
            values,
        };
        trace.validate()?;
        Ok(trace)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bin_minutes == 0 {
            return Err(Error::InvalidTrace("bin_minutes must be >= 1".to_string()));
        }
        if self.values.is_empty() {
            return Err(Error::InvalidTrace(alloc::format!(
                "channel {} has no bins",
                self.channel_id
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn bin_hours(&self) -> f64 {
        self.bin_minutes as f64 / 60.0
    }

    pub fn duration_hours(&self) -> f64 {
        self.values.len() as f64 * self.bin_hours()
    }

    /// Start time of bin `i` in hours from `t0`.
    pub fn time_h(&self, i: usize) -> f64 {
        i as f64 * self.bin_hours()
    }

    /// Bins whose start time lies in `[start_h, end_h)`, clipped to the trace.
    pub fn bin_range(&self, start_h: f64, end_h: f64) -> Range<usize> {
        let per_hour = 60.0 / self.bin_minutes as f64;
        let lo = libm::ceil(start_h * per_hour - 1e-9).max(0.0) as usize;
        let hi = libm::ceil(end_h * per_hour - 1e-9).max(0.0) as usize;
        let n = self.values.len();
        lo.min(n)..hi.min(n)
    }

    /// True when every value is a non-negative integer (uncorrupted counts).
    pub fn is_count_valued(&self) -> bool {
        self.values
            .iter()
            .all(|v| *v >= 0.0 && libm::floor(*v) == *v)
    }

    pub(crate) fn same_grid(&self, other: &ActivityTrace) -> bool {
        self.t0 == other.t0
            && self.bin_minutes == other.bin_minutes
            && self.values.len() == other.values.len()
    }
}

/// A half-open light interval `[start_h, end_h)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LightInterval {
    pub start_h: f64,
    pub end_h: f64,
    pub intensity_lux: f64,
    pub wavelength: String,
}

/// Piecewise-constant light program; darkness outside every interval.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct LightSchedule {
    pub intervals: Vec<LightInterval>,
}

impl LightSchedule {
    pub fn new(intervals: Vec<LightInterval>) -> Result<Self> {
        let schedule = Self { intervals };
        schedule.validate()?;
        Ok(schedule)
    }

    pub fn dark() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<()> {
        let mut prev_end = f64::NEG_INFINITY;
        for iv in &self.intervals {
            if !(iv.start_h < iv.end_h) {
                return Err(Error::InvalidSchedule(alloc::format!(
                    "interval [{}, {}) is empty",
                    iv.start_h, iv.end_h
                )));
            }
            if !(iv.intensity_lux >= 0.0) {
                return Err(Error::InvalidSchedule("negative intensity".to_string()));
            }
            if iv.start_h < prev_end {
                return Err(Error::InvalidSchedule(alloc::format!(
                    "interval starting at {} h overlaps or is out of order",
                    iv.start_h
                )));
            }
            prev_end = iv.end_h;
        }
        Ok(())
    }

    /// Appends an interval, keeping the schedule sorted and non-overlapping.
    pub fn push(&mut self, interval: LightInterval) -> Result<()> {
        let mut intervals = self.intervals.clone();
        intervals.push(interval);
        intervals.sort_by(|a, b| a.start_h.total_cmp(&b.start_h));
        *self = LightSchedule::new(intervals)?;
        Ok(())
    }

    /// Every on/off transition time, in ascending order.
    pub fn edges(&self) -> Vec<f64> {
        let mut edges = Vec::with_capacity(self.intervals.len() * 2);
        for iv in &self.intervals {
            // back-to-back intervals share one edge
            if edges.last() != Some(&iv.start_h) {
                edges.push(iv.start_h);
            }
            edges.push(iv.end_h);
        }
        edges
    }
}

/// Light intensity at `t_h` hours; zero when no interval covers `t_h`.
pub fn light_at(schedule: &LightSchedule, t_h: f64) -> f64 {
    // intervals are sorted: find the last one starting at or before t_h
    let idx = schedule
        .intervals
        .partition_point(|iv| iv.start_h <= t_h);
    if idx == 0 {
        return 0.0;
    }
    let iv = &schedule.intervals[idx - 1];
    if t_h < iv.end_h {
        iv.intensity_lux
    } else {
        0.0
    }
}

/// Traces sharing `t0`, bin width and length (e.g. one incubator).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceGroup {
    pub label: String,
    pub traces: Vec<ActivityTrace>,
}

impl TraceGroup {
    pub fn new(label: impl Into<String>, traces: Vec<ActivityTrace>) -> Result<Self> {
        let group = Self {
            label: label.into(),
            traces,
        };
        group.validate()?;
        Ok(group)
    }

    pub fn validate(&self) -> Result<()> {
        let first = self.traces.first().ok_or(Error::EmptyGroup)?;
        let offenders: Vec<String> = self
            .traces
            .iter()
            .filter(|t| !t.same_grid(first))
            .map(|t| t.channel_id.clone())
            .collect();
        if !offenders.is_empty() {
            return Err(Error::IncommensurateGroup {
                channels: offenders,
            });
        }
        for t in &self.traces {
            t.validate()?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.traces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.traces.is_empty()
    }

    pub fn channel_ids(&self) -> Vec<String> {
        self.traces.iter().map(|t| t.channel_id.clone()).collect()
    }

    /// Sub-group of the traces whose channel id is in `ids`.
    pub fn select(&self, ids: &[String]) -> Result<TraceGroup> {
        let traces: Vec<ActivityTrace> = self
            .traces
            .iter()
            .filter(|t| ids.contains(&t.channel_id))
            .cloned()
            .collect();
        TraceGroup::new(self.label.clone(), traces)
    }
}

/// Pointwise mean and population standard deviation of a group.
///
/// The mean trace keeps the group's grid and is labelled `<label>:mean`.
pub fn average_traces(group: &TraceGroup) -> Result<(ActivityTrace, ActivityTrace)> {
    group.validate()?;
    let first = &group.traces[0];
    let n = first.len();
    let k = group.traces.len() as f64;
    let mut mean = alloc::vec![0.0; n];
    for t in &group.traces {
        for (m, v) in mean.iter_mut().zip(&t.values) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= k);
    let mut var = alloc::vec![0.0; n];
    for t in &group.traces {
        for ((s, v), m) in var.iter_mut().zip(&t.values).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    let std: Vec<f64> = var.iter().map(|s| libm::sqrt(s / k)).collect();
    let mk = |suffix: &str, values| ActivityTrace {
        channel_id: alloc::format!("{}:{}", group.label, suffix),
        t0: first.t0.clone(),
        bin_minutes: first.bin_minutes,
        values,
    };
    Ok((mk("mean", mean), mk("std", std)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn trace(id: &str, values: Vec<f64>) -> ActivityTrace {
        ActivityTrace::new(id, "2024-01-01T00:00:00", 1, values).unwrap()
    }

    #[test]
    fn average_constant_traces() {
        let g = TraceGroup::new(
            "m1",
            vec![trace("a", vec![2.0; 3]), trace("b", vec![4.0; 3])],
        )
        .unwrap();
        let (m, s) = average_traces(&g).unwrap();
        assert_eq!(m.values, vec![3.0; 3]);
        assert_eq!(s.values, vec![1.0; 3]);
        assert_eq!(m.bin_minutes, 1);
    }

    #[test]
    fn average_single_trace_is_identity() {
        let g = TraceGroup::new("m1", vec![trace("a", vec![1.0, 5.0, 0.0])]).unwrap();
        let (m, s) = average_traces(&g).unwrap();
        assert_eq!(m.values, vec![1.0, 5.0, 0.0]);
        assert!(s.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn empty_and_incommensurate_groups_rejected() {
        assert_eq!(TraceGroup::new("x", vec![]).unwrap_err(), Error::EmptyGroup);
        let err = TraceGroup::new(
            "x",
            vec![trace("a", vec![0.0; 3]), trace("b", vec![0.0; 4])],
        )
        .unwrap_err();
        assert_eq!(
            err,
            Error::IncommensurateGroup {
                channels: vec!["b".into()]
            }
        );
    }

    #[test]
    fn light_lookup() {
        let s = LightSchedule::new(vec![LightInterval {
            start_h: 12.0,
            end_h: 13.0,
            intensity_lux: 4.0,
            wavelength: "470nm".into(),
        }])
        .unwrap();
        assert_eq!(light_at(&s, 12.5), 4.0);
        assert_eq!(light_at(&s, 12.0), 4.0);
        assert_eq!(light_at(&s, 13.0), 0.0);
        assert_eq!(light_at(&s, 0.0), 0.0);
        assert_eq!(light_at(&LightSchedule::dark(), 7.0), 0.0);
    }

    #[test]
    fn overlapping_schedule_rejected() {
        let iv = |a, b| LightInterval {
            start_h: a,
            end_h: b,
            intensity_lux: 1.0,
            wavelength: "white".into(),
        };
        assert!(LightSchedule::new(vec![iv(0.0, 2.0), iv(1.0, 3.0)]).is_err());
        assert!(LightSchedule::new(vec![iv(2.0, 2.0)]).is_err());
    }

    #[test]
    fn bin_range_half_open() {
        let t = trace("a", vec![0.0; 120]);
        assert_eq!(t.bin_range(0.0, 1.0), 0..60);
        assert_eq!(t.bin_range(0.5, 5.0), 30..120);
    }
}
