//! Cosinor fitting, daily acrophase tracking and double-plotted actograms.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{fit_line, wrap_centered, wrap_positive, Line};
use crate::types::ActivityTrace;

/// `y ≈ mesor + amplitude · cos(2π (t − acrophase_h) / period_h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosinorFit {
    pub mesor: f64,
    pub amplitude: f64,
    /// Peak time in `[0, period_h)`, in hours from the trace origin.
    pub acrophase_h: f64,
    pub period_h: f64,
    pub rss: f64,
    /// Coefficient of `cos(2πt/period)`.
    pub beta: f64,
    /// Coefficient of `sin(2πt/period)`.
    pub gamma: f64,
    /// False when the amplitude vanishes and the peak time is meaningless.
    pub acrophase_defined: bool,
}

/// Residual sum of squares of `(mesor, beta, gamma)` on the samples.
pub fn cosinor_rss(times_h: &[f64], values: &[f64], period_h: f64, coef: [f64; 3]) -> f64 {
    times_h
        .iter()
        .zip(values)
        .map(|(t, y)| {
            let th = TAU * t / period_h;
            let r = y - coef[0] - coef[1] * libm::cos(th) - coef[2] * libm::sin(th);
            r * r
        })
        .sum()
}

/// Solves a 3×3 system by Gaussian elimination with partial pivoting.
#[allow(clippy::needless_range_loop)]
fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let pivot = (col..3).max_by(|i, j| a[*i][col].abs().total_cmp(&a[*j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..3 {
            let f = a[row][col] / a[col][col];
            for k in col..3 {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

/// Least-squares cosinor on raw samples.
pub fn cosinor_fit_samples(times_h: &[f64], values: &[f64], period_h: f64) -> Result<CosinorFit> {
    if times_h.len() != values.len() || times_h.len() < 3 {
        return Err(Error::InvalidTrace("cosinor needs at least three samples".into()));
    }
    if !(period_h > 0.0) {
        return Err(Error::InvalidParams("period must be > 0".into()));
    }
    // centre values so the normal equations stay well conditioned
    let shift = values.iter().sum::<f64>() / values.len() as f64;
    let mut ata = [[0.0; 3]; 3];
    let mut aty = [0.0; 3];
    for (t, y) in times_h.iter().zip(values) {
        let th = TAU * t / period_h;
        let row = [1.0, libm::cos(th), libm::sin(th)];
        for i in 0..3 {
            for j in 0..3 {
                ata[i][j] += row[i] * row[j];
            }
            aty[i] += row[i] * (y - shift);
        }
    }
    let coef = solve3(ata, aty).ok_or(Error::InvalidWindow {
        start_h: times_h[0],
        end_h: times_h[times_h.len() - 1],
        reason: "cosinor design matrix is singular",
    })?;
    let (mesor, beta, gamma) = (coef[0] + shift, coef[1], coef[2]);
    let amplitude = libm::hypot(beta, gamma);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let acrophase_defined = amplitude > 1e-12 * scale.max(1e-300);
    let acrophase_h = if acrophase_defined {
        wrap_positive(libm::atan2(gamma, beta) / TAU * period_h, period_h)
    } else {
        0.0
    };
    let rss = cosinor_rss(times_h, values, period_h, [mesor, beta, gamma]);
    Ok(CosinorFit {
        mesor,
        amplitude: if acrophase_defined { amplitude } else { 0.0 },
        acrophase_h,
        period_h,
        rss,
        beta,
        gamma,
        acrophase_defined,
    })
}

/// Cosinor fit over bins starting in `[start_h, end_h)`, timed at bin starts.
pub fn cosinor_fit(trace: &ActivityTrace, window: (f64, f64), period_h: f64) -> Result<CosinorFit> {
    let (start_h, end_h) = window;
    if !(end_h - start_h >= period_h - 1e-9) {
        return Err(Error::InvalidWindow {
            start_h,
            end_h,
            reason: "cosinor window shorter than one period",
        });
    }
    if start_h < 0.0 || end_h > trace.duration_hours() + 1e-9 {
        return Err(Error::InvalidWindow {
            start_h,
            end_h,
            reason: "window extends beyond the trace",
        });
    }
    fit_range(trace, start_h, end_h, period_h)
}

fn fit_range(trace: &ActivityTrace, start_h: f64, end_h: f64, period_h: f64) -> Result<CosinorFit> {
    let range = trace.bin_range(start_h, end_h);
    let times: Vec<f64> = range.clone().map(|i| trace.time_h(i)).collect();
    cosinor_fit_samples(&times, &trace.values[range], period_h)
}

/// Daily peak times and the regression line through them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcrophaseTrack {
    /// 1-based day numbers; day `k` covers `[24(k−1), 24k)`.
    pub day_index: Vec<u32>,
    pub acrophase_abs_h: Vec<f64>,
    pub slope_h_per_day: f64,
    pub tau_h: f64,
    pub intercept_h: f64,
    /// True when `tau_h` lies in the circadian band `[18, 30]`.
    pub valid: bool,
}

impl AcrophaseTrack {
    fn line(&self) -> Line {
        Line {
            intercept: self.intercept_h,
            slope: self.tau_h,
        }
    }

    /// Regression-predicted absolute peak time on `day`.
    pub fn predicted_acrophase_h(&self, day: u32) -> f64 {
        self.line().at(day as f64)
    }
}

pub const MIN_TRACK_DAYS: usize = 3;

/// Fits a cosine of `nominal_period_h` to every whole day inside `window`,
/// unwraps the peak times across days and regresses them on the day number.
///
/// Days whose peak time is undefined are dropped.
pub fn daily_acrophases(
    trace: &ActivityTrace,
    nominal_period_h: f64,
    window: (f64, f64),
) -> Result<AcrophaseTrack> {
    if !(nominal_period_h > 0.0) {
        return Err(Error::InvalidParams("nominal period must be > 0".into()));
    }
    let end = window.1.min(trace.duration_hours());
    let first_day = libm::ceil(window.0.max(0.0) / 24.0 - 1e-9) as u32 + 1;
    let last_day = libm::floor(end / 24.0 + 1e-9) as u32;
    let mut days = Vec::new();
    let mut rel = Vec::new();
    for day in first_day..=last_day {
        let start = 24.0 * (day - 1) as f64;
        let fit = fit_range(trace, start, start + 24.0, nominal_period_h)?;
        if !fit.acrophase_defined {
            continue;
        }
        // peak time relative to the day start, continued from the previous day
        let raw = wrap_positive(fit.acrophase_h - start, nominal_period_h);
        let value = match rel.last() {
            Some(prev) => prev + wrap_centered(raw - prev, nominal_period_h),
            None => raw,
        };
        days.push(day);
        rel.push(value);
    }
    if days.len() < MIN_TRACK_DAYS {
        return Err(Error::TooFewDays {
            valid: days.len(),
            required: MIN_TRACK_DAYS,
        });
    }
    let acrophase_abs_h: Vec<f64> = days
        .iter()
        .zip(&rel)
        .map(|(d, r)| 24.0 * (*d - 1) as f64 + r)
        .collect();
    let x: Vec<f64> = days.iter().map(|d| *d as f64).collect();
    let line = fit_line(&x, &acrophase_abs_h).ok_or(Error::TooFewDays {
        valid: days.len(),
        required: MIN_TRACK_DAYS,
    })?;
    let tau_h = line.slope;
    Ok(AcrophaseTrack {
        day_index: days,
        acrophase_abs_h,
        slope_h_per_day: tau_h - 24.0,
        tau_h,
        intercept_h: line.intercept,
        valid: (18.0..=30.0).contains(&tau_h),
    })
}

/// Double-plotted actogram: row `r` holds folds `r` and `r + 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Actogram {
    pub fold_period_h: f64,
    pub bins_per_fold: usize,
    pub rows: Vec<Vec<f64>>,
    /// Set when the trace does not fill its last fold; the gap is zeros.
    pub padded: bool,
}

pub fn actogram(trace: &ActivityTrace, fold_period_h: f64) -> Result<Actogram> {
    if !(fold_period_h > 0.0) {
        return Err(Error::InvalidParams("fold period must be > 0".into()));
    }
    let bins_per_fold = libm::round(fold_period_h / trace.bin_hours()) as usize;
    if bins_per_fold == 0 {
        return Err(Error::InvalidParams("fold period shorter than one bin".into()));
    }
    let n = trace.len();
    let n_rows = n.div_ceil(bins_per_fold);
    let at = |i: usize| trace.values.get(i).copied().unwrap_or(0.0);
    let rows = (0..n_rows)
        .map(|r| (r * bins_per_fold..(r + 2) * bins_per_fold).map(at).collect())
        .collect();
    Ok(Actogram {
        fold_period_h,
        bins_per_fold,
        rows,
        padded: !n.is_multiple_of(bins_per_fold),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::SYNTH_T0;

    fn trace(f: impl Fn(f64) -> f64, hours: usize) -> ActivityTrace {
        let values = (0..hours * 60).map(|i| f(i as f64 / 60.0)).collect();
        ActivityTrace::new("c", SYNTH_T0, 1, values).unwrap()
    }

    #[test]
    fn exact_cosine_recovered() {
        let t = trace(|h| 5.0 + 3.0 * libm::cos(TAU * (h - 7.0) / 24.0), 48);
        let f = cosinor_fit(&t, (0.0, 48.0), 24.0).unwrap();
        assert!((f.mesor - 5.0).abs() < 1e-9);
        assert!((f.amplitude - 3.0).abs() < 1e-9);
        assert!((f.acrophase_h - 7.0).abs() < 1e-9);
        assert!(f.rss < 1e-15);
    }

    #[test]
    fn constant_is_undefined() {
        let t = trace(|_| 2.5, 48);
        let f = cosinor_fit(&t, (0.0, 24.0), 24.0).unwrap();
        assert_eq!(f.amplitude, 0.0);
        assert!(!f.acrophase_defined);
        assert!(f.rss < 1e-20);
    }

    #[test]
    fn short_window_rejected() {
        let t = trace(|h| h, 48);
        assert!(cosinor_fit(&t, (0.0, 12.0), 24.0).is_err());
    }

    #[test]
    fn flat_days_are_dropped() {
        let t = trace(|h| if h < 48.0 { 0.0 } else { 1.0 + libm::cos(TAU * h / 24.0) }, 24 * 5);
        let track = daily_acrophases(&t, 24.0, (0.0, 120.0)).unwrap();
        assert_eq!(track.day_index, [3, 4, 5]);
        assert!(track.slope_h_per_day.abs() < 1e-9);
        let short = daily_acrophases(&t, 24.0, (0.0, 96.0)).unwrap_err();
        assert_eq!(short, Error::TooFewDays { valid: 2, required: 3 });
    }

    #[test]
    fn actogram_double_plot() {
        let t = trace(|h| h, 48);
        let a = actogram(&t, 24.0).unwrap();
        assert_eq!(a.rows.len(), 2);
        assert_eq!(a.rows[0].len(), 2880);
        assert_eq!(a.rows[0][1440..], a.rows[1][..1440]);
        assert!(!a.padded);
        let b = actogram(&trace(|h| h, 30), 24.0).unwrap();
        assert!(b.padded);
        assert_eq!(b.rows[1][360..].iter().filter(|v| **v != 0.0).count(), 0);
    }
}
