use alloc::string::String;
use alloc::vec::Vec;

/// Errors produced by the estimation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("trace group is empty")]
    EmptyGroup,
    #[error("traces do not share a common grid: {channels:?}")]
    IncommensurateGroup { channels: Vec<String> },
    #[error("invalid trace: {0}")]
    InvalidTrace(String),
    #[error("invalid light schedule: {0}")]
    InvalidSchedule(String),
    #[error("invalid filter parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite sample at index {index}")]
    NonFiniteSample { index: usize },
    #[error("integration step too large: use at least {required_substeps} substeps per bin")]
    StepTooLarge { required_substeps: u32 },
    #[error("trace too short: {hours:.2} h available, {required:.2} h required")]
    TraceTooShort { hours: f64, required: f64 },
    #[error("analysis window [{start_h}, {end_h}) h is invalid: {reason}")]
    InvalidWindow {
        start_h: f64,
        end_h: f64,
        reason: &'static str,
    },
    #[error("argument does not advance over the detrend window (rate {rate})")]
    NonAdvancingArgument { rate: f64 },
    #[error("too few days with a defined acrophase: {valid} (need {required})")]
    TooFewDays { valid: usize, required: usize },
    #[error("series does not cover day {day}")]
    DayNotCovered { day: u32 },
    #[error("variance must be non-negative, got {0}")]
    NegativeVariance(f64),
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
}

pub type Result<T> = core::result::Result<T, Error>;
