//! Rhythmicity screening with an FFT periodogram.
//!
//! The analysis segment is mean-removed and zero-padded to a power of two at
//! least `pad_factor` times its length. Power is `|X_k|² / M` for an
//! `M`-point transform, so the bins over the full spectrum sum to the
//! segment energy. The circadian band is refined around the coarse peak by
//! direct evaluation of the transform on a fine period grid.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft::fft_in_place;
use crate::stats::{mean, median};
use crate::types::{ActivityTrace, TraceGroup};

/// Shortest analysis window: three cycles of a 24 h rhythm.
pub const MIN_WINDOW_H: f64 = 72.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PeriodogramConfig {
    pub min_period_h: f64,
    pub max_period_h: f64,
    /// Dominant / median band power needed to call a channel rhythmic.
    pub threshold: f64,
    pub pad_factor: usize,
    /// Spacing of the refined period grid around the coarse peak.
    pub zoom_step_h: f64,
}

impl Default for PeriodogramConfig {
    fn default() -> Self {
        Self {
            min_period_h: 18.0,
            max_period_h: 30.0,
            threshold: 15.0,
            pad_factor: 8,
            zoom_step_h: 0.02,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodogramResult {
    /// Evaluated periods in the circadian band, ascending.
    pub periods_h: Vec<f64>,
    pub power: Vec<f64>,
    pub dominant_period_h: f64,
    pub power_ratio: f64,
    pub rhythmic: bool,
    /// True when the segment carries no activity at all.
    pub inactive: bool,
    /// Energy of the mean-removed segment.
    pub energy: f64,
    /// Sum of the power over every FFT bin (equals `energy`).
    pub spectrum_total: f64,
}

/// Power spectrum `|X_k|² / M` of `segment` zero-padded to `m` points.
pub fn power_spectrum(segment: &[f64], m: usize) -> Vec<f64> {
    let mut re = alloc::vec![0.0; m];
    let mut im = alloc::vec![0.0; m];
    re[..segment.len()].copy_from_slice(segment);
    fft_in_place(&mut re, &mut im);
    re.iter()
        .zip(&im)
        .map(|(r, i)| (r * r + i * i) / m as f64)
        .collect()
}

/// Power at an arbitrary frequency with the same normalisation as
/// [`power_spectrum`].
fn power_at(segment: &[f64], freq_per_bin: f64, m: usize) -> f64 {
    // rotate a phasor instead of calling sin/cos per sample
    let (ds, dc) = (libm::sin(-TAU * freq_per_bin), libm::cos(-TAU * freq_per_bin));
    let (mut c, mut s) = (1.0, 0.0);
    let (mut acc_re, mut acc_im) = (0.0, 0.0);
    for (n, x) in segment.iter().enumerate() {
        acc_re += x * c;
        acc_im += x * s;
        let nc = c * dc - s * ds;
        s = c * ds + s * dc;
        c = nc;
        if n % 1024 == 1023 {
            // renormalise to keep the phasor on the unit circle
            let r = libm::hypot(c, s);
            c /= r;
            s /= r;
        }
    }
    (acc_re * acc_re + acc_im * acc_im) / m as f64
}

/// FFT periodogram of `trace` over the window `[start_h, end_h)`.
pub fn periodogram(
    trace: &ActivityTrace,
    window: (f64, f64),
    config: &PeriodogramConfig,
) -> Result<PeriodogramResult> {
    let (start_h, end_h) = window;
    if !(end_h - start_h >= MIN_WINDOW_H) {
        return Err(Error::InvalidWindow {
            start_h,
            end_h,
            reason: "periodogram window shorter than 72 h",
        });
    }
    if start_h < 0.0 || end_h > trace.duration_hours() + 1e-9 {
        return Err(Error::InvalidWindow {
            start_h,
            end_h,
            reason: "window extends beyond the trace",
        });
    }
    let raw = &trace.values[trace.bin_range(start_h, end_h)];
    let bin_h = trace.bin_hours();
    let n = raw.len();
    let inactive = raw.iter().all(|v| *v == 0.0);
    let mu = mean(raw);
    let segment: Vec<f64> = raw.iter().map(|v| v - mu).collect();
    let energy: f64 = segment.iter().map(|v| v * v).sum();

    let m = (n * config.pad_factor.max(1)).next_power_of_two();
    let spectrum = power_spectrum(&segment, m);
    let spectrum_total: f64 = spectrum.iter().sum();

    // coarse band from the FFT bins, ascending in period
    let mut band: Vec<(f64, f64)> = (1..m / 2)
        .rev()
        .map(|k| (m as f64 * bin_h / k as f64, spectrum[k]))
        .filter(|(p, _)| *p >= config.min_period_h && *p <= config.max_period_h)
        .collect();
    if band.is_empty() {
        return Err(Error::InvalidWindow {
            start_h,
            end_h,
            reason: "no frequency bins inside the circadian band",
        });
    }
    let reference = median(&band.iter().map(|(_, p)| *p).collect::<Vec<_>>());

    // refine around the coarse peak
    let peak = band
        .iter()
        .enumerate()
        .max_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let lo = band[peak.saturating_sub(1)].0;
    let hi = band[(peak + 1).min(band.len() - 1)].0;
    let step = config.zoom_step_h.max(1e-3);
    let mut p = lo + step;
    while p < hi {
        let freq_per_bin = bin_h / p;
        band.push((p, power_at(&segment, freq_per_bin, m)));
        p += step;
    }
    band.sort_by(|a, b| a.0.total_cmp(&b.0));

    let (dominant_period_h, peak_power) = band
        .iter()
        .copied()
        .max_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap_or((f64::NAN, 0.0));
    let power_ratio = if peak_power <= 0.0 {
        0.0
    } else if reference > 0.0 {
        peak_power / reference
    } else {
        f64::INFINITY
    };
    let (periods_h, power) = band.into_iter().unzip();
    Ok(PeriodogramResult {
        periods_h,
        power,
        dominant_period_h,
        power_ratio,
        rhythmic: !inactive && power_ratio >= config.threshold,
        inactive,
        energy,
        spectrum_total,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExclusionReason {
    Arrhythmic,
    Inactive,
}

/// Per-channel screening statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelScreen {
    pub channel_id: String,
    pub mean_activity: f64,
    pub power_ratio: f64,
    pub dominant_period_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScreeningReport {
    pub included: Vec<String>,
    pub excluded: Vec<(String, ExclusionReason)>,
    pub inclusion_ratio: f64,
    pub channels: Vec<ChannelScreen>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScreeningConfig {
    /// Minimum mean counts per bin over the window.
    pub activity_floor: f64,
    pub periodogram: PeriodogramConfig,
}

impl Default for ScreeningConfig {
    fn default() -> Self {
        Self {
            activity_floor: 0.05,
            periodogram: PeriodogramConfig::default(),
        }
    }
}

/// Classifies one channel; `None` means included.
pub fn screen_channel(
    trace: &ActivityTrace,
    window: (f64, f64),
    config: &ScreeningConfig,
) -> Result<(ChannelScreen, Option<ExclusionReason>)> {
    let range = trace.bin_range(window.0, window.1);
    let mean_activity = mean(&trace.values[range]);
    let result = periodogram(trace, window, &config.periodogram)?;
    let screen = ChannelScreen {
        channel_id: trace.channel_id.clone(),
        mean_activity,
        power_ratio: result.power_ratio,
        dominant_period_h: result.dominant_period_h,
    };
    let reason = if result.inactive || mean_activity < config.activity_floor {
        Some(ExclusionReason::Inactive)
    } else if !result.rhythmic {
        Some(ExclusionReason::Arrhythmic)
    } else {
        None
    };
    Ok((screen, reason))
}

/// Assembles a report from per-channel outcomes, in input order.
pub fn screening_report(
    outcomes: Vec<(ChannelScreen, Option<ExclusionReason>)>,
) -> ScreeningReport {
    let total = outcomes.len();
    let mut included = Vec::new();
    let mut excluded = Vec::new();
    let mut channels = Vec::with_capacity(total);
    for (screen, reason) in outcomes {
        match reason {
            None => included.push(screen.channel_id.clone()),
            Some(r) => excluded.push((screen.channel_id.clone(), r)),
        }
        channels.push(screen);
    }
    let inclusion_ratio = if total == 0 {
        0.0
    } else {
        included.len() as f64 / total as f64
    };
    ScreeningReport {
        included,
        excluded,
        inclusion_ratio,
        channels,
    }
}

/// Excludes inactive channels (mean below the floor) and arrhythmic ones
/// (periodogram not rhythmic).
pub fn screen_flies(
    group: &TraceGroup,
    window: (f64, f64),
    config: &ScreeningConfig,
) -> Result<ScreeningReport> {
    if group.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let outcomes = group
        .traces
        .iter()
        .map(|t| screen_channel(t, window, config))
        .collect::<Result<Vec<_>>>()?;
    Ok(screening_report(outcomes))
}

/// Inclusion ratio the report would have at another rhythmicity threshold.
pub fn inclusion_at_threshold(report: &ScreeningReport, activity_floor: f64, threshold: f64) -> f64 {
    if report.channels.is_empty() {
        return 0.0;
    }
    let kept = report
        .channels
        .iter()
        .filter(|c| c.mean_activity >= activity_floor && c.mean_activity > 0.0 && c.power_ratio >= threshold)
        .count();
    kept as f64 / report.channels.len() as f64
}
