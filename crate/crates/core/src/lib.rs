//! Online circadian phase estimation from actigraphy.
//!
//! An adaptive notch filter tracks the fundamental of a biased, non-sinusoidal,
//! noisy activity signal and yields a continuous phase estimate. Around it sit
//! the classical tools used to screen and benchmark it: an FFT periodogram for
//! rhythmicity screening, cosinor/acrophase fitting, phase-response-curve
//! construction and a synthetic activity generator with exact ground truth.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod anf;
pub mod cosinor;
pub mod error;
mod fft;
pub mod ode;
pub mod periodogram;
pub mod prc;
pub mod stats;
pub mod synth;
pub mod types;

pub use anf::{anf_run, anf_step, apply_detrend, extract_phase, AnfParams, AnfState, Detrend, PhaseSeries};
pub use cosinor::{actogram, cosinor_fit, daily_acrophases, AcrophaseTrack, Actogram, CosinorFit};
pub use error::{Error, Result};
pub use periodogram::{periodogram, screen_flies, PeriodogramConfig, PeriodogramResult, ScreeningConfig, ScreeningReport};
pub use prc::{build_prc, phase_shift_acrophase, phase_shift_anf, PrcConfig, PrcCurve, PrcMethod, PrcPoint};
pub use types::{average_traces, light_at, ActivityTrace, LightInterval, LightSchedule, TraceGroup};
