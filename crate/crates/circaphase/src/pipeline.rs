//! Parallel drivers over channels and groups.
//!
//! Work is split per channel and gathered back in input order, so results do
//! not depend on the worker count.

use circaphase_core::periodogram::{screen_channel, screening_report, ScreeningConfig, ScreeningReport};
use circaphase_core::prc::{estimate_trace, prc_from_estimates, Estimate, GroupEstimates, PrcConfig, PrcCurve, PrcMethod};
use circaphase_core::synth::corrupt;
use circaphase_core::{average_traces, ActivityTrace, TraceGroup};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};
use crate::scenario::Role;

/// Runs `f` on a pool with `workers` threads (all cores when `None`).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> AppResult<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(AppError::Usage("--workers must be at least 1".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| AppError::Usage(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

/// Screens every group, one task per channel.
pub fn screen_groups(groups: &[TraceGroup], window: (f64, f64), config: &ScreeningConfig) -> AppResult<Vec<ScreeningReport>> {
    if let Some(g) = groups.iter().find(|g| g.is_empty()) {
        return Err(AppError::Data(format!("group {} is empty", g.label)));
    }
    let outcomes: Vec<_> = groups
        .iter()
        .flat_map(|g| g.traces.iter())
        .collect::<Vec<_>>()
        .par_iter()
        .map(|t| screen_channel(t, window, config))
        .collect::<Result<_, _>>()?;
    let mut it = outcomes.into_iter();
    Ok(groups
        .iter()
        .map(|g| screening_report(it.by_ref().take(g.len()).collect()))
        .collect())
}

/// Adds Gaussian noise to every trace with a per-channel seed.
pub fn corrupt_group(group: &TraceGroup, variance: f64, seed: u64) -> AppResult<TraceGroup> {
    let traces = group
        .traces
        .par_iter()
        .enumerate()
        .map(|(i, t)| corrupt(t, variance, seed.wrapping_mul(0xD1B5_4A32_D192_ED03).wrapping_add(i as u64)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(TraceGroup {
        label: group.label.clone(),
        traces,
    })
}

/// An incubator's screened traces ready for PRC analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrcGroup {
    pub label: String,
    pub role: Role,
    pub cp_h: Option<f64>,
    /// Included flies only; may be empty.
    pub traces: Vec<ActivityTrace>,
}

/// Estimates every group mean and every fly in parallel.
fn estimate_all(groups: &[&PrcGroup], method: PrcMethod, config: &PrcConfig) -> AppResult<Vec<GroupEstimates>> {
    let means: Vec<Option<ActivityTrace>> = groups
        .iter()
        .map(|g| {
            if g.traces.is_empty() {
                return Ok(None);
            }
            let group = TraceGroup::new(g.label.clone(), g.traces.clone())?;
            Ok(Some(average_traces(&group)?.0))
        })
        .collect::<AppResult<_>>()?;
    // one job per group mean and per fly
    let jobs: Vec<(usize, Option<usize>, &ActivityTrace)> = groups
        .iter()
        .enumerate()
        .flat_map(|(gi, g)| {
            means[gi]
                .iter()
                .map(move |m| (gi, None, m))
                .chain(g.traces.iter().enumerate().map(move |(fi, t)| (gi, Some(fi), t)))
        })
        .collect();
    let results: Vec<(usize, Option<usize>, circaphase_core::Result<Estimate>)> = jobs
        .par_iter()
        .map(|(gi, fi, t)| (*gi, *fi, estimate_trace(t, method, config)))
        .collect();
    let mut mean_est: Vec<Option<Estimate>> = vec![None; groups.len()];
    let mut flies: Vec<Vec<Option<Estimate>>> = groups.iter().map(|g| vec![None; g.traces.len()]).collect();
    for (gi, fi, r) in results {
        match fi {
            None => mean_est[gi] = Some(r?),
            Some(fi) => flies[gi][fi] = r.ok(),
        }
    }
    groups
        .iter()
        .zip(mean_est.into_iter().zip(flies))
        .filter_map(|(g, (mean, flies))| {
            mean.map(|mean| {
                Ok(GroupEstimates {
                    label: g.label.clone(),
                    mean,
                    flies,
                })
            })
        })
        .collect()
}

/// PRC of every pulse group against `control`. Pulse groups without
/// included flies are left out with a warning.
pub fn run_prc(groups: &[PrcGroup], control: &str, method: PrcMethod, config: &PrcConfig) -> AppResult<PrcCurve> {
    let ctrl = groups
        .iter()
        .find(|g| g.label == control)
        .ok_or_else(|| AppError::Data(format!("control group `{control}` not found")))?;
    if ctrl.traces.is_empty() {
        return Err(AppError::Data(format!("control group `{control}` has no included flies")));
    }
    let targets: Vec<&PrcGroup> = groups.iter().filter(|g| g.role == Role::Pulse).collect();
    let mut warnings = Vec::new();
    let usable: Vec<&PrcGroup> = targets
        .iter()
        .copied()
        .filter(|g| {
            let ok = !g.traces.is_empty();
            if !ok {
                warnings.push(format!("CP {}: group {} has no included flies; point omitted", g.cp_h.unwrap_or(f64::NAN), g.label));
            }
            ok
        })
        .collect();
    let mut all = vec![ctrl];
    all.extend(&usable);
    let mut estimates = estimate_all(&all, method, config)?.into_iter();
    let control_est = estimates.next().expect("control estimate");
    let target_est: Vec<(f64, GroupEstimates)> = usable
        .iter()
        .map(|g| g.cp_h.unwrap_or(0.0))
        .zip(estimates)
        .collect();
    let mut curve = prc_from_estimates(&target_est, &control_est, method, config.eval_day)?;
    curve.warnings.extend(warnings);
    for w in &curve.warnings {
        log::warn!("{w}");
    }
    Ok(curve)
}
