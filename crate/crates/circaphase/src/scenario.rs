//! Scenario files: a set of incubators sharing one protocol, each either a
//! free-running control or stimulated by one light pulse at a given CP.

use circaphase_core::synth::{
    generate_cohort, Cohort, FlyLabel, Jitter, LabeledGroup, PrcProgram, Protocol, SynthSpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{AppError, AppResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Control,
    Pulse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incubator {
    pub label: String,
    pub role: Role,
    /// Stimulus time for pulse incubators.
    #[serde(default)]
    pub cp_h: Option<f64>,
    /// Overrides the scenario's fly period.
    #[serde(default)]
    pub period_h: Option<f64>,
    pub n_flies: usize,
    pub rhythmic_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub duration_h: f64,
    pub intensity_lux: f64,
    pub wavelength: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub days: u32,
    pub bin_minutes: u32,
    pub ld_days: u32,
    pub ld_lux: f64,
    pub pulse: Pulse,
    /// Period used to place a pulse at a circadian time after entrainment.
    pub nominal_period_h: f64,
    pub fly: SynthSpec,
    #[serde(default)]
    pub jitter: Jitter,
    /// Label of the control the PRC is measured against.
    pub reference_control: String,
    pub incubators: Vec<Incubator>,
}

pub const TABLE1_CPS: [f64; 7] = [0.0, 3.0, 6.0, 9.0, 12.0, 15.0, 20.0];

impl Scenario {
    /// Nine incubators of 21 flies: two DD controls (τ 24.45 h and 24.3 h)
    /// and 1 h, 4 lux, 470 nm pulses at CP 0, 3, 6, 9, 12, 15 and 20, after
    /// three days of LD 12:12, recorded for 12 days at 1 min bins. Flies
    /// follow a sinusoidal programmed PRC of amplitude 2 h.
    pub fn table1(seed: u64) -> Self {
        let mut incubators = vec![
            Incubator {
                label: "ctrl-a".into(),
                role: Role::Control,
                cp_h: None,
                period_h: None,
                n_flies: 21,
                rhythmic_fraction: 0.45,
            },
            Incubator {
                label: "ctrl-b".into(),
                role: Role::Control,
                cp_h: None,
                period_h: Some(24.3),
                n_flies: 21,
                rhythmic_fraction: 0.45,
            },
        ];
        incubators.extend(TABLE1_CPS.iter().map(|cp| Incubator {
            label: format!("cp{cp:02}"),
            role: Role::Pulse,
            cp_h: Some(*cp),
            period_h: None,
            n_flies: 21,
            rhythmic_fraction: 0.45,
        }));
        Self {
            name: "table1".into(),
            seed,
            days: 12,
            bin_minutes: 1,
            ld_days: 3,
            ld_lux: 100.0,
            pulse: Pulse {
                duration_h: 1.0,
                intensity_lux: 4.0,
                wavelength: "470nm".into(),
            },
            nominal_period_h: 24.0,
            fly: SynthSpec {
                period_h: 24.45,
                prc_program: PrcProgram::sinusoid(2.0, 0.0, 96),
                ..SynthSpec::default()
            },
            jitter: Jitter::default(),
            reference_control: "ctrl-a".into(),
            incubators,
        }
    }

    pub fn validate(&self) -> AppResult<()> {
        if self.incubators.is_empty() {
            return Err(AppError::Usage("scenario has no incubators".into()));
        }
        let mut labels: Vec<&str> = self.incubators.iter().map(|i| i.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(AppError::Data("incubator labels must be unique".into()));
        }
        for inc in &self.incubators {
            if inc.role == Role::Pulse && inc.cp_h.is_none() {
                return Err(AppError::Data(format!("pulse incubator {} has no cp_h", inc.label)));
            }
            if inc.n_flies == 0 || inc.n_flies > crate::dam::DAM_CHANNELS {
                return Err(AppError::Data(format!(
                    "incubator {} must hold 1..=32 flies",
                    inc.label
                )));
            }
        }
        if !self
            .incubators
            .iter()
            .any(|i| i.label == self.reference_control && i.role == Role::Control)
        {
            return Err(AppError::Data(format!(
                "reference control `{}` is not a control incubator",
                self.reference_control
            )));
        }
        self.fly.validate()?;
        Ok(())
    }

    /// Recording protocol of one incubator.
    pub fn protocol(&self, inc: &Incubator) -> AppResult<Protocol> {
        let mut p = Protocol::ld_dd(self.ld_days, self.days, self.bin_minutes, self.ld_lux);
        if let (Role::Pulse, Some(cp)) = (inc.role, inc.cp_h) {
            p.add_pulse_at_cp(
                cp,
                self.pulse.duration_h,
                self.pulse.intensity_lux,
                &self.pulse.wavelength,
                self.nominal_period_h,
            )?;
        }
        p.validate()?;
        Ok(p)
    }

    /// Seed of incubator `index`, decorrelated from its neighbours.
    pub fn incubator_seed(&self, index: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(index as u64 + 1)
    }
}

/// One generated incubator with its ground truth.
#[derive(Debug, Clone)]
pub struct Generated {
    pub incubator: Incubator,
    pub protocol: Protocol,
    pub seed: u64,
    pub cohort: LabeledGroup,
}

/// Truth record written next to each generated monitor file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub label: String,
    pub role: Role,
    pub cp_h: Option<f64>,
    pub period_h: f64,
    pub seed: u64,
    pub programmed_shift_h: f64,
    pub flies: Vec<FlyLabel>,
}

impl Generated {
    pub fn truth(&self, scenario: &Scenario) -> Truth {
        let period_h = self.incubator.period_h.unwrap_or(scenario.fly.period_h);
        Truth {
            label: self.incubator.label.clone(),
            role: self.incubator.role,
            cp_h: self.incubator.cp_h,
            period_h,
            seed: self.seed,
            programmed_shift_h: self
                .incubator
                .cp_h
                .map_or(0.0, |cp| scenario.fly.prc_program.eval(cp)),
            flies: self.cohort.labels.clone(),
        }
    }
}

/// Generates every incubator in parallel; output order follows the scenario.
pub fn generate(scenario: &Scenario) -> AppResult<Vec<Generated>> {
    scenario.validate()?;
    scenario
        .incubators
        .par_iter()
        .enumerate()
        .map(|(i, inc)| {
            let protocol = scenario.protocol(inc)?;
            let seed = scenario.incubator_seed(i);
            let spec = SynthSpec {
                period_h: inc.period_h.unwrap_or(scenario.fly.period_h),
                seed,
                ..scenario.fly.clone()
            };
            let cohort = Cohort {
                jitter: scenario.jitter,
                ..Cohort::new(inc.label.clone(), inc.n_flies, inc.rhythmic_fraction)
            };
            Ok(Generated {
                incubator: inc.clone(),
                cohort: generate_cohort(&cohort, &spec, &protocol)?,
                protocol,
                seed,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_shape() {
        let s = Scenario::table1(7);
        s.validate().unwrap();
        assert_eq!(s.incubators.len(), 9);
        assert_eq!(s.incubators.iter().filter(|i| i.role == Role::Control).count(), 2);
        assert_eq!(s.incubators.iter().map(|i| i.n_flies).sum::<usize>(), 189);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(serde_json::from_str::<Scenario>(&json).unwrap(), s);
    }

    #[test]
    fn empty_scenario_is_usage_error() {
        let s = Scenario {
            incubators: vec![],
            ..Scenario::table1(0)
        };
        assert!(matches!(s.validate(), Err(AppError::Usage(_))));
    }

    #[test]
    fn pulse_lands_after_entrainment() {
        let s = Scenario::table1(0);
        let inc = s.incubators.iter().find(|i| i.cp_h == Some(3.0)).unwrap();
        let p = s.protocol(inc).unwrap();
        let pulse = p.schedule.intervals.last().unwrap();
        assert_eq!(pulse.intensity_lux, 4.0);
        assert!((pulse.start_h - 87.0).abs() < 1e-9);
    }
}
