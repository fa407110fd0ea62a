//! Small numeric helpers shared across the analysis modules.

use alloc::vec::Vec;
use core::f64::consts::{PI, TAU};

pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population variance (divides by n).
pub fn variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64
}

pub fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted: Vec<f64> = values.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

/// Ordinary least-squares line `y = intercept + slope * x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Line {
    pub intercept: f64,
    pub slope: f64,
}

impl Line {
    pub fn at(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

/// Fits a line through `(x, y)` pairs. Returns `None` with fewer than two
/// points or when all `x` coincide.
pub fn fit_line(x: &[f64], y: &[f64]) -> Option<Line> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    // Centre on the means to keep the normal equations well conditioned
    // for large absolute times.
    let mx = mean(&x[..n]);
    let my = mean(&y[..n]);
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..n {
        let dx = x[i] - mx;
        sxx += dx * dx;
        sxy += dx * (y[i] - my);
    }
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(Line {
        intercept: my - slope * mx,
        slope,
    })
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_pi(angle: f64) -> f64 {
    let mut a = angle - TAU * libm::floor(angle / TAU);
    // a in [0, 2π)
    if a > PI {
        a -= TAU;
    }
    a
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_tau(angle: f64) -> f64 {
    let a = angle - TAU * libm::floor(angle / TAU);
    if a >= TAU {
        0.0
    } else {
        a
    }
}

/// Wraps `value` into `(-period/2, period/2]`.
pub fn wrap_centered(value: f64, period: f64) -> f64 {
    wrap_pi(value * TAU / period) * period / TAU
}

/// Wraps `value` into `[0, period)`.
pub fn wrap_positive(value: f64, period: f64) -> f64 {
    let v = value - period * libm::floor(value / period);
    if v >= period {
        0.0
    } else {
        v
    }
}

/// Circular mean of a set of angles, in `(-π, π]`.
pub fn circular_mean(angles: impl Iterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for a in angles {
        s += libm::sin(a);
        c += libm::cos(a);
    }
    libm::atan2(s, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_ranges() {
        assert_eq!(wrap_pi(PI), PI);
        assert!((wrap_pi(-PI) - PI).abs() < 1e-15);
        assert!((wrap_pi(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
        assert!((wrap_centered(13.0, 24.0) + 11.0).abs() < 1e-12);
        assert!((wrap_centered(-11.5, 24.0) + 11.5).abs() < 1e-12);
        assert!((wrap_positive(-1.0, 24.0) - 23.0).abs() < 1e-12);
    }

    #[test]
    fn line_fit_exact() {
        let x = [1.0, 2.0, 3.0, 4.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let l = fit_line(&x, &y).unwrap();
        assert!((l.slope + 0.5).abs() < 1e-12);
        assert!((l.intercept - 2.0).abs() < 1e-12);
        assert!(fit_line(&[1.0, 1.0], &[0.0, 1.0]).is_none());
    }

    #[test]
    fn median_even_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
