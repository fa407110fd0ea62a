//! Phase-response curves from stimulated groups against a free-running
//! control.
//!
//! Shifts are expressed in circadian hours (a full cycle is 24 h), advances
//! positive, wrapped into `(−12, 12]`.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::anf::{anf_run, apply_detrend, extract_phase, AnfParams, PhaseSeries};
use crate::cosinor::{daily_acrophases, AcrophaseTrack};
use crate::error::{Error, Result};
use crate::stats::{circular_mean, wrap_centered};
use crate::types::{average_traces, ActivityTrace, TraceGroup};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PrcMethod {
    Anf,
    Acrophase,
}

impl PrcMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            PrcMethod::Anf => "anf",
            PrcMethod::Acrophase => "acrophase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrcPoint {
    pub cp_h: f64,
    pub shift_h: f64,
    pub sd_h: f64,
    pub n_target: usize,
    pub n_control: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrcCurve {
    pub method: PrcMethod,
    pub eval_day: u32,
    pub points: Vec<PrcPoint>,
    /// Stimulus times left out of the curve, with the reason.
    pub warnings: Vec<String>,
}

impl PrcCurve {
    /// RMS distance of the shifts from `reference(cp_h)`, wrap-aware.
    pub fn rms_against(&self, reference: impl Fn(f64) -> f64) -> f64 {
        if self.points.is_empty() {
            return 0.0;
        }
        let ss: f64 = self
            .points
            .iter()
            .map(|p| wrap_centered(p.shift_h - reference(p.cp_h), 24.0).powi(2))
            .sum();
        libm::sqrt(ss / self.points.len() as f64)
    }
}

/// Per-stimulus differences `a − b` between two curves on the same grid.
pub fn curve_differences(a: &PrcCurve, b: &PrcCurve) -> Result<Vec<f64>> {
    let same_grid = a.points.len() == b.points.len()
        && a.points.iter().zip(&b.points).all(|(p, q)| (p.cp_h - q.cp_h).abs() < 1e-9);
    if !same_grid {
        return Err(Error::InvalidSpec("curves are defined on different CP grids".into()));
    }
    Ok(a.points
        .iter()
        .zip(&b.points)
        .map(|(p, q)| wrap_centered(p.shift_h - q.shift_h, 24.0))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PrcConfig {
    pub eval_day: u32,
    pub anf: AnfParams,
    /// Window for the phase trend and for the acrophase regression.
    pub analysis_window_h: (f64, f64),
    /// Cosine period used by the daily acrophase fits.
    pub nominal_period_h: f64,
}

impl Default for PrcConfig {
    fn default() -> Self {
        Self {
            eval_day: 10,
            anf: AnfParams::default(),
            analysis_window_h: (120.0, 288.0),
            nominal_period_h: 24.0,
        }
    }
}

impl PrcConfig {
    /// The hour range of the evaluation day.
    pub fn eval_window_h(&self) -> (f64, f64) {
        let start = 24.0 * (self.eval_day.max(1) - 1) as f64;
        (start, start + 24.0)
    }
}

/// Shift of `target` relative to `control` on `eval_day`.
///
/// The target is re-detrended with the control's trend so both phases share
/// one time base; the per-sample phase difference is averaged on the circle.
pub fn phase_shift_anf(target: &PhaseSeries, control: &PhaseSeries, eval_day: u32) -> Result<f64> {
    let detrend = control.detrend.ok_or(Error::InvalidParams(
        "control series has not been detrended".into(),
    ))?;
    let mut aligned = target.clone();
    apply_detrend(&mut aligned, detrend);
    let start = 24.0 * (eval_day.max(1) - 1) as f64;
    let (rt, rc) = (
        aligned.index_range(start, start + 24.0),
        control.index_range(start, start + 24.0),
    );
    // require (almost) a full day from both series
    let full = |r: &core::ops::Range<usize>, s: &PhaseSeries| {
        !r.is_empty() && s.times_h[r.end - 1] - s.times_h[r.start] >= 23.0
    };
    if eval_day == 0 || !full(&rt, &aligned) || !full(&rc, control) || rt.len() != rc.len() {
        return Err(Error::DayNotCovered { day: eval_day });
    }
    let beta = detrend.beta;
    let mean = circular_mean(
        aligned.phase_h[rt]
            .iter()
            .zip(&control.phase_h[rc])
            .map(|(pt, pc)| (pt - pc) * beta),
    );
    Ok(wrap_centered(mean * 24.0 / TAU, 24.0))
}

/// Shift from the regression-predicted acrophases on `eval_day`.
pub fn phase_shift_acrophase(target: &AcrophaseTrack, control: &AcrophaseTrack, eval_day: u32) -> Result<f64> {
    if eval_day == 0 {
        return Err(Error::DayNotCovered { day: 0 });
    }
    let tau = control.tau_h;
    if !(tau > 0.0) {
        return Err(Error::InvalidParams("control period must be positive".into()));
    }
    let diff = control.predicted_acrophase_h(eval_day) - target.predicted_acrophase_h(eval_day);
    Ok(wrap_centered(wrap_centered(diff, tau) * 24.0 / tau, 24.0))
}

/// Output of one estimator on one trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Estimate {
    Anf(PhaseSeries),
    Acrophase(AcrophaseTrack),
}

pub fn estimate_trace(trace: &ActivityTrace, method: PrcMethod, config: &PrcConfig) -> Result<Estimate> {
    match method {
        PrcMethod::Anf => {
            let raw = anf_run(trace, &config.anf)?;
            Ok(Estimate::Anf(extract_phase(&raw, config.analysis_window_h)?))
        }
        PrcMethod::Acrophase => Ok(Estimate::Acrophase(daily_acrophases(
            trace,
            config.nominal_period_h,
            config.analysis_window_h,
        )?)),
    }
}

pub fn shift_between(target: &Estimate, control: &Estimate, eval_day: u32) -> Result<f64> {
    match (target, control) {
        (Estimate::Anf(t), Estimate::Anf(c)) => phase_shift_anf(t, c, eval_day),
        (Estimate::Acrophase(t), Estimate::Acrophase(c)) => phase_shift_acrophase(t, c, eval_day),
        _ => Err(Error::InvalidParams("estimates come from different methods".into())),
    }
}

/// Estimates for a screened group: the group mean and each fly.
///
/// A fly whose estimate fails (e.g. too few days with a defined acrophase)
/// is recorded as `None` and left out of the dispersion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEstimates {
    pub label: String,
    pub mean: Estimate,
    pub flies: Vec<Option<Estimate>>,
}

pub fn estimate_group(group: &TraceGroup, method: PrcMethod, config: &PrcConfig) -> Result<GroupEstimates> {
    let (mean_trace, _) = average_traces(group)?;
    let mean = estimate_trace(&mean_trace, method, config)?;
    let flies = group
        .traces
        .iter()
        .map(|t| estimate_trace(t, method, config).ok())
        .collect();
    Ok(GroupEstimates {
        label: group.label.clone(),
        mean,
        flies,
    })
}

/// Wrap-aware population variance of shifts in hours.
fn shift_variance(shifts: &[f64]) -> f64 {
    if shifts.is_empty() {
        return 0.0;
    }
    let centre = circular_mean(shifts.iter().map(|s| s * TAU / 24.0)) * 24.0 / TAU;
    shifts
        .iter()
        .map(|s| wrap_centered(s - centre, 24.0).powi(2))
        .sum::<f64>()
        / shifts.len() as f64
}

fn fly_shifts(group: &GroupEstimates, control: &GroupEstimates, eval_day: u32) -> Vec<f64> {
    group
        .flies
        .iter()
        .flatten()
        .filter_map(|e| shift_between(e, &control.mean, eval_day).ok())
        .collect()
}

/// Assembles the curve from precomputed estimates. Groups without any fly
/// estimate are omitted and reported in `warnings`.
pub fn prc_from_estimates(
    targets: &[(f64, GroupEstimates)],
    control: &GroupEstimates,
    method: PrcMethod,
    eval_day: u32,
) -> Result<PrcCurve> {
    let control_shifts = fly_shifts(control, control, eval_day);
    if control.flies.is_empty() {
        return Err(Error::EmptyGroup);
    }
    let var_control = shift_variance(&control_shifts);
    let mut points = Vec::with_capacity(targets.len());
    let mut warnings = Vec::new();
    for (cp_h, group) in targets {
        let target_shifts = fly_shifts(group, control, eval_day);
        if target_shifts.is_empty() {
            warnings.push(alloc::format!(
                "CP {cp_h}: group {} has no usable flies; point omitted",
                group.label
            ));
            continue;
        }
        let shift_h = match shift_between(&group.mean, &control.mean, eval_day) {
            Ok(s) => s,
            Err(e) => {
                warnings.push(alloc::format!("CP {cp_h}: group {}: {e}; point omitted", group.label));
                continue;
            }
        };
        points.push(PrcPoint {
            cp_h: *cp_h,
            shift_h,
            sd_h: libm::sqrt(shift_variance(&target_shifts) + var_control),
            n_target: target_shifts.len(),
            n_control: control_shifts.len(),
        });
    }
    points.sort_by(|a, b| a.cp_h.total_cmp(&b.cp_h));
    if points.windows(2).any(|w| w[0].cp_h == w[1].cp_h) {
        return Err(Error::InvalidSpec("duplicate stimulus CP in PRC".into()));
    }
    if let Some(p) = points.iter().find(|p| !(0.0..24.0).contains(&p.cp_h)) {
        return Err(Error::InvalidSpec(alloc::format!("CP {} outside [0, 24)", p.cp_h)));
    }
    Ok(PrcCurve {
        method,
        eval_day,
        points,
        warnings,
    })
}

/// Full sequential pipeline over already-screened groups keyed by CP.
/// Empty target groups are skipped with a warning.
pub fn build_prc(
    targets: &[(f64, TraceGroup)],
    control: &TraceGroup,
    method: PrcMethod,
    config: &PrcConfig,
) -> Result<PrcCurve> {
    let control_est = estimate_group(control, method, config)?;
    let mut estimates = Vec::with_capacity(targets.len());
    let mut skipped = Vec::new();
    for (cp, group) in targets {
        if group.is_empty() {
            skipped.push(alloc::format!("CP {cp}: group {} is empty; point omitted", group.label));
            continue;
        }
        estimates.push((*cp, estimate_group(group, method, config)?));
    }
    let mut curve = prc_from_estimates(&estimates, &control_est, method, config.eval_day)?;
    curve.warnings.extend(skipped);
    Ok(curve)
}
