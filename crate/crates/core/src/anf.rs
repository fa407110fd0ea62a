//! Adaptive notch filter for online circadian phase estimation.
//!
//! The filter is a bank of second-order resonators tuned to the fundamental
//! frequency `ω` and its first few harmonics `kω`, plus a first-order bias
//! estimator. All sections share the notch error
//!
//! ```text
//! e      = y − d̂ − Σ_k x2_k
//! ẋ1_k   = x2_k
//! ẋ2_k   = −(kω)² x1_k + 2ζ(kω) e
//! ḋ̂      = γ_d e
//! ω̇      = −γ_ω ω x1_1 e / P
//! ```
//!
//! where `P` is a running mean of `(y − d̂)²` with a 24 h time constant, so
//! the adaptation speed does not depend on the signal amplitude. `ω` is
//! projected onto `[omega_min, omega_max]` after every integration step.
//!
//! The fundamental section locks onto `a₁ sin(ω* t + φ₁)` with
//! `x2_1 = a₁ sin(ω* t + φ₁)` and `x1_1 = −a₁ cos(ω* t + φ₁) / ω*`, so the
//! argument of the fundamental is read out as `atan2(x2_1, −ω x1_1)` and
//! unwrapped continuously.
//!
//! With `harmonics = 1` this reduces to the plain damped notch.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ode::rk4_step;
use crate::stats::{fit_line, wrap_pi};
use crate::types::ActivityTrace;

/// Largest number of resonator sections (fundamental included).
pub const MAX_HARMONICS: usize = 4;

const STATE_LEN: usize = 2 * MAX_HARMONICS + 3;
const IDX_D: usize = 2 * MAX_HARMONICS;
const IDX_OMEGA: usize = 2 * MAX_HARMONICS + 1;
const IDX_POWER: usize = 2 * MAX_HARMONICS + 2;

/// Largest rotation of the fastest section per integration step, in radians.
pub const MAX_ROTATION_PER_STEP: f64 = 0.5;

/// Minimum trace length accepted by [`anf_run`].
pub const MIN_RUN_HOURS: f64 = 48.0;

/// Tuning of the adaptive notch filter. Frequencies are in rad/h.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnfParams {
    /// Damping of every resonator section.
    pub zeta: f64,
    /// Frequency adaptation gain (rad/h²).
    pub gamma_omega: f64,
    /// Bias estimator gain (1/h).
    pub gamma_d: f64,
    pub omega_init: f64,
    pub omega_min: f64,
    pub omega_max: f64,
    pub substeps_per_bin: u32,
    /// Number of resonator sections, fundamental included (1..=4).
    pub harmonics: usize,
    /// Time constant of the power normalisation (h).
    pub power_tau_h: f64,
}

impl Default for AnfParams {
    fn default() -> Self {
        Self {
            zeta: 0.3,
            gamma_omega: 0.003,
            gamma_d: 0.1,
            omega_init: TAU / 24.0,
            omega_min: TAU / 30.0,
            omega_max: TAU / 18.0,
            substeps_per_bin: 1,
            harmonics: 3,
            power_tau_h: 24.0,
        }
    }
}

impl AnfParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.into()));
        if !(self.zeta > 0.0) {
            return bad("zeta must be > 0");
        }
        if !(self.gamma_omega > 0.0) {
            return bad("gamma_omega must be > 0");
        }
        if !(self.gamma_d >= 0.0) {
            return bad("gamma_d must be >= 0");
        }
        if !(self.omega_min > 0.0
            && self.omega_min <= self.omega_init
            && self.omega_init <= self.omega_max)
        {
            return bad("require 0 < omega_min <= omega_init <= omega_max");
        }
        if self.substeps_per_bin == 0 {
            return bad("substeps_per_bin must be >= 1");
        }
        if self.harmonics == 0 || self.harmonics > MAX_HARMONICS {
            return bad("harmonics must be in 1..=4");
        }
        if !(self.power_tau_h > 0.0) {
            return bad("power_tau_h must be > 0");
        }
        Ok(())
    }

    /// Substeps needed so the fastest section rotates less than
    /// [`MAX_ROTATION_PER_STEP`] per step over an interval `dt_h`.
    pub fn required_substeps(&self, dt_h: f64) -> u32 {
        let rotation = self.harmonics as f64 * self.omega_max * dt_h;
        libm::floor(rotation / MAX_ROTATION_PER_STEP) as u32 + 1
    }
}

/// Filter state. `x1`/`x2` entries beyond `params.harmonics` stay zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnfState {
    pub x1: [f64; MAX_HARMONICS],
    pub x2: [f64; MAX_HARMONICS],
    pub d_hat: f64,
    pub omega: f64,
    /// Uncorrected running mean of `(y − d̂)²`.
    pub power: f64,
    pub psi_unwrapped: f64,
    pub t_h: f64,
}

impl AnfState {
    pub fn new(params: &AnfParams, d_hat: f64) -> Self {
        Self {
            x1: [0.0; MAX_HARMONICS],
            x2: [0.0; MAX_HARMONICS],
            d_hat,
            omega: params.omega_init,
            power: 0.0,
            psi_unwrapped: 0.0,
            t_h: 0.0,
        }
    }

    /// Wrapped argument of the fundamental, in `(-π, π]`.
    pub fn psi_wrapped(&self) -> f64 {
        libm::atan2(self.x2[0], -self.omega * self.x1[0])
    }

    /// Instantaneous amplitude of the fundamental.
    pub fn amplitude(&self) -> f64 {
        libm::hypot(self.x2[0], self.omega * self.x1[0])
    }

    fn to_vec(self) -> [f64; STATE_LEN] {
        let mut z = [0.0; STATE_LEN];
        z[..MAX_HARMONICS].copy_from_slice(&self.x1);
        z[MAX_HARMONICS..2 * MAX_HARMONICS].copy_from_slice(&self.x2);
        z[IDX_D] = self.d_hat;
        z[IDX_OMEGA] = self.omega;
        z[IDX_POWER] = self.power;
        z
    }
}

fn derivative(t: f64, z: &[f64; STATE_LEN], y: f64, p: &AnfParams) -> [f64; STATE_LEN] {
    let k_max = p.harmonics;
    let omega = z[IDX_OMEGA];
    let d_hat = z[IDX_D];
    let fitted: f64 = z[MAX_HARMONICS..MAX_HARMONICS + k_max].iter().sum();
    let e = y - d_hat - fitted;

    let mut dz = [0.0; STATE_LEN];
    for k in 0..k_max {
        let wk = (k + 1) as f64 * omega;
        dz[k] = z[MAX_HARMONICS + k];
        dz[MAX_HARMONICS + k] = -wk * wk * z[k] + 2.0 * p.zeta * wk * e;
    }
    dz[IDX_D] = p.gamma_d * e;

    let centred = y - d_hat;
    dz[IDX_POWER] = (centred * centred - z[IDX_POWER]) / p.power_tau_h;

    // bias-corrected running power: early on it is the mean since start
    let warm = 1.0 - libm::exp(-t / p.power_tau_h);
    let power = if warm > 0.0 { z[IDX_POWER] / warm } else { 0.0 };
    if power > f64::MIN_POSITIVE {
        dz[IDX_OMEGA] = -p.gamma_omega * omega * z[0] * e / power;
    }
    dz
}

/// Advances the filter by one integration step of `dt_h` hours with the
/// input held at `y`.
pub fn anf_step(state: &AnfState, y: f64, params: &AnfParams, dt_h: f64) -> Result<AnfState> {
    if !y.is_finite() {
        return Err(Error::NonFiniteSample { index: 0 });
    }
    if !(dt_h > 0.0) {
        return Err(Error::InvalidParams("dt_h must be > 0".into()));
    }
    let required = params.required_substeps(dt_h);
    if required > 1 {
        return Err(Error::StepTooLarge {
            required_substeps: required,
        });
    }
    Ok(step_unchecked(state, y, params, dt_h))
}

fn step_unchecked(state: &AnfState, y: f64, params: &AnfParams, dt_h: f64) -> AnfState {
    let z = rk4_step(
        |t, z| derivative(t, z, y, params),
        state.t_h,
        &state.to_vec(),
        dt_h,
    );
    let mut next = AnfState {
        x1: [0.0; MAX_HARMONICS],
        x2: [0.0; MAX_HARMONICS],
        d_hat: z[IDX_D],
        omega: z[IDX_OMEGA].clamp(params.omega_min, params.omega_max),
        power: z[IDX_POWER],
        psi_unwrapped: state.psi_unwrapped,
        t_h: state.t_h + dt_h,
    };
    next.x1.copy_from_slice(&z[..MAX_HARMONICS]);
    next.x2.copy_from_slice(&z[MAX_HARMONICS..2 * MAX_HARMONICS]);
    // the argument is undefined while the fundamental is exactly at rest
    if next.amplitude() > 0.0 {
        let psi = next.psi_wrapped();
        next.psi_unwrapped += wrap_pi(psi - state.psi_unwrapped);
    }
    next
}

/// Linear trend `alpha + beta * t` removed from the argument.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detrend {
    pub alpha: f64,
    /// Mean phase rate over the fit window (rad/h).
    pub beta: f64,
    pub window_start_h: f64,
    pub window_end_h: f64,
}

/// Per-bin output of the filter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSeries {
    pub times_h: Vec<f64>,
    pub argument_rad: Vec<f64>,
    pub omega_rad_per_h: Vec<f64>,
    /// Detrended circadian phase in hours; zero until detrended.
    pub phase_h: Vec<f64>,
    pub period_h: Vec<f64>,
    /// Amplitude of the tracked fundamental.
    pub amplitude: Vec<f64>,
    /// False when the input carried no oscillation to lock onto.
    pub phase_defined: bool,
    pub detrend: Option<Detrend>,
    /// Non-finite input samples replaced by the previous valid value.
    pub held_samples: usize,
}

impl PhaseSeries {
    pub fn len(&self) -> usize {
        self.times_h.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times_h.is_empty()
    }

    /// Index range of samples with `start_h <= t < end_h`.
    pub fn index_range(&self, start_h: f64, end_h: f64) -> core::ops::Range<usize> {
        let lo = self.times_h.partition_point(|t| *t < start_h);
        let hi = self.times_h.partition_point(|t| *t < end_h);
        lo..hi
    }

    /// Mean instantaneous period over `[start_h, end_h)`.
    pub fn mean_period(&self, start_h: f64, end_h: f64) -> Option<f64> {
        let r = self.index_range(start_h, end_h);
        if r.is_empty() {
            return None;
        }
        let n = r.len() as f64;
        Some(self.period_h[r].iter().sum::<f64>() / n)
    }

    /// Earliest time after which the period stays within `tol_h` of its
    /// final value.
    pub fn settling_time_h(&self, tol_h: f64) -> Option<f64> {
        let last = *self.period_h.last()?;
        let idx = self
            .period_h
            .iter()
            .rposition(|p| (p - last).abs() > tol_h);
        match idx {
            None => self.times_h.first().copied(),
            Some(i) if i + 1 < self.times_h.len() => Some(self.times_h[i + 1]),
            Some(_) => None,
        }
    }
}

/// Runs the filter over a whole trace.
///
/// The input is held constant over each bin and integrated with
/// `substeps_per_bin` RK4 steps. Sample `i` of the output is the state at
/// the end of bin `i`. The bias estimate starts at the first sample. When the
/// trace has at least `MIN_RUN_HOURS + 24` hours the phase is detrended over
/// everything after the first [`MIN_RUN_HOURS`].
pub fn anf_run(trace: &ActivityTrace, params: &AnfParams) -> Result<PhaseSeries> {
    params.validate()?;
    trace.validate()?;
    let hours = trace.duration_hours();
    if hours < MIN_RUN_HOURS {
        return Err(Error::TraceTooShort {
            hours,
            required: MIN_RUN_HOURS,
        });
    }
    let bin_h = trace.bin_hours();
    let dt = bin_h / params.substeps_per_bin as f64;
    let required = params.required_substeps(dt);
    if required > 1 {
        return Err(Error::StepTooLarge {
            required_substeps: params.substeps_per_bin * required,
        });
    }

    let first = trace
        .values
        .iter()
        .copied()
        .find(|v| v.is_finite())
        .unwrap_or(0.0);
    let mut state = warm_start(trace, params, first);
    let n = trace.len();
    let mut series = PhaseSeries {
        times_h: Vec::with_capacity(n),
        argument_rad: Vec::with_capacity(n),
        omega_rad_per_h: Vec::with_capacity(n),
        phase_h: alloc::vec![0.0; n],
        period_h: Vec::with_capacity(n),
        amplitude: Vec::with_capacity(n),
        phase_defined: false,
        detrend: None,
        held_samples: 0,
    };

    let scale = trace
        .values
        .iter()
        .filter(|v| v.is_finite())
        .fold(1.0f64, |m, v| m.max(v.abs()));
    let mut held = first;
    let mut max_amp = 0.0f64;
    for (i, &raw) in trace.values.iter().enumerate() {
        let y = if raw.is_finite() {
            held = raw;
            raw
        } else {
            series.held_samples += 1;
            held
        };
        for _ in 0..params.substeps_per_bin {
            state = step_unchecked(&state, y, params, dt);
        }
        // accumulate on the bin grid to avoid drift from repeated addition
        state.t_h = (i + 1) as f64 * bin_h;
        let amp = state.amplitude();
        max_amp = max_amp.max(amp);
        series.times_h.push(state.t_h);
        series.argument_rad.push(state.psi_unwrapped);
        series.omega_rad_per_h.push(state.omega);
        series.period_h.push(TAU / state.omega);
        series.amplitude.push(amp);
    }

    series.phase_defined = max_amp > 1e-12 * scale;
    if series.phase_defined && hours >= MIN_RUN_HOURS + 24.0 {
        if let Ok(d) = fit_detrend(&series, MIN_RUN_HOURS, f64::INFINITY) {
            apply_detrend(&mut series, d);
        }
    }
    Ok(series)
}

/// Initial state with the bias at the mean of the first day.
fn warm_start(trace: &ActivityTrace, params: &AnfParams, fallback: f64) -> AnfState {
    let lead = ((24.0 / trace.bin_hours()) as usize).clamp(1, trace.len());
    let (mut n, mut sum) = (0usize, 0.0);
    for v in trace.values[..lead].iter().filter(|v| v.is_finite()) {
        n += 1;
        sum += v;
    }
    AnfState::new(params, if n == 0 { fallback } else { sum / n as f64 })
}

fn fit_detrend(series: &PhaseSeries, start_h: f64, end_h: f64) -> Result<Detrend> {
    let r = series.index_range(start_h, end_h);
    let (lo, hi) = match (series.times_h.get(r.start), r.end.checked_sub(1)) {
        (Some(_), Some(last)) if !r.is_empty() => (series.times_h[r.start], series.times_h[last]),
        _ => {
            return Err(Error::InvalidWindow {
                start_h,
                end_h,
                reason: "window does not overlap the series",
            })
        }
    };
    if hi - lo < 24.0 - 1e-9 {
        return Err(Error::InvalidWindow {
            start_h,
            end_h,
            reason: "window shorter than 24 h",
        });
    }
    let line = fit_line(&series.times_h[r.clone()], &series.argument_rad[r])
        .ok_or(Error::NonAdvancingArgument { rate: 0.0 })?;
    if !(line.slope > 0.0) {
        return Err(Error::NonAdvancingArgument { rate: line.slope });
    }
    Ok(Detrend {
        alpha: line.intercept,
        beta: line.slope,
        window_start_h: lo,
        window_end_h: hi,
    })
}

/// Recomputes `phase_h` with a given trend, e.g. one fitted on a control
/// series so that several series share a time base.
pub fn apply_detrend(series: &mut PhaseSeries, detrend: Detrend) {
    for ((ph, t), arg) in series
        .phase_h
        .iter_mut()
        .zip(&series.times_h)
        .zip(&series.argument_rad)
    {
        *ph = (arg - detrend.beta * t - detrend.alpha) / detrend.beta;
    }
    series.detrend = Some(detrend);
}

/// Fits `alpha + beta t` to the argument over `[start_h, end_h)` and returns
/// the series with `phase_h = (argument − beta t − alpha) / beta` everywhere.
pub fn extract_phase(series: &PhaseSeries, window: (f64, f64)) -> Result<PhaseSeries> {
    let (start_h, end_h) = window;
    if !(end_h - start_h >= 24.0) {
        return Err(Error::InvalidWindow {
            start_h,
            end_h,
            reason: "window shorter than 24 h",
        });
    }
    let first = series.times_h.first().copied().unwrap_or(0.0);
    let last = series.times_h.last().copied().unwrap_or(0.0);
    // one bin of slack at either end for the end-of-bin time stamps
    let slack = match series.times_h.get(1) {
        Some(t1) => t1 - first,
        None => 0.0,
    };
    if start_h < first - slack - 1e-9 || end_h > last + slack + 1e-9 {
        return Err(Error::InvalidWindow {
            start_h,
            end_h,
            reason: "window extends beyond the series",
        });
    }
    let detrend = fit_detrend(series, start_h, end_h)?;
    let mut out = series.clone();
    apply_detrend(&mut out, detrend);
    Ok(out)
}
