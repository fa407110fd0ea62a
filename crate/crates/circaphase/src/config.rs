//! Run configuration: defaults, overridden by a JSON file, overridden by
//! command-line flags.

use std::path::{Path, PathBuf};

use circaphase_core::periodogram::ScreeningConfig;
use circaphase_core::prc::PrcConfig;
use circaphase_core::AnfParams;
use serde::{Deserialize, Serialize};

use crate::error::AppResult;
use crate::output::read_json;

/// Environment variable that overrides the output directory.
pub const OUT_DIR_ENV: &str = "CIRCAPHASE_OUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub anf: AnfParams,
    pub screening: ScreeningConfig,
    /// Window used for screening, trend fitting and acrophase regression.
    pub window_h: (f64, f64),
    pub eval_day: u32,
    /// Cosine period of the daily acrophase fits.
    pub nominal_period_h: f64,
    pub seed: u64,
    pub workers: Option<usize>,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let prc = PrcConfig::default();
        Self {
            anf: prc.anf,
            screening: ScreeningConfig::default(),
            window_h: prc.analysis_window_h,
            eval_day: prc.eval_day,
            nominal_period_h: prc.nominal_period_h,
            seed: 0,
            workers: None,
            out_dir: PathBuf::from("out"),
        }
    }
}

impl RunConfig {
    /// Defaults, then the file (if any); missing keys keep their defaults.
    pub fn load(path: Option<&Path>) -> AppResult<Self> {
        match path {
            Some(p) => read_json(p),
            None => Ok(Self::default()),
        }
    }

    pub fn prc(&self) -> PrcConfig {
        PrcConfig {
            eval_day: self.eval_day,
            anf: self.anf,
            analysis_window_h: self.window_h,
            nominal_period_h: self.nominal_period_h,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_module_defaults() {
        let c = RunConfig::default();
        assert_eq!(c.anf, AnfParams::default());
        assert_eq!(c.screening, ScreeningConfig::default());
        assert_eq!(c.prc(), PrcConfig::default());
    }

    #[test]
    fn partial_file_overrides_only_given_keys() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"eval_day": 9, "anf": {"zeta": 0.4}}"#).unwrap();
        let c = RunConfig::load(Some(&p)).unwrap();
        assert_eq!(c.eval_day, 9);
        assert_eq!(c.anf.zeta, 0.4);
        assert_eq!(c.anf.gamma_omega, AnfParams::default().gamma_omega);
        assert_eq!(c.screening, ScreeningConfig::default());
    }
}
