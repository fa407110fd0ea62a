//! Synthetic fly locomotor activity with known ground truth.
//!
//! The oscillator phase `ψ` (radians, `ψ ≡ 0` at CP 0) is pinned to the
//! light-dark cycle during entrainment, then free-runs at `2π/τ`. Light
//! pulses in constant darkness step the phase instantaneously by the
//! programmed phase response. The activity rate is
//!
//! ```text
//! λ(t) = d + Σ_k a_k sin(k ψ(t) + φ_k) + m · Σ_edges exp(−(t − t_edge) / 0.25 h)
//! ```
//!
//! clamped at zero and optionally drawn through a Poisson count model.
//! Random streams are counter-based (ChaCha, one stream per fly) so a
//! cohort is identical however its flies are scheduled.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::anf::PhaseSeries;
use crate::error::{Error, Result};
use crate::stats::{wrap_positive, wrap_tau};
use crate::types::{ActivityTrace, LightInterval, LightSchedule, TraceGroup};

/// Decay constant of the light-edge masking response.
pub const MASKING_TAU_H: f64 = 0.25;

/// Origin used for synthetic traces.
pub const SYNTH_T0: &str = "2024-01-01T00:00:00";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Harmonic {
    pub k: u32,
    pub amplitude: f64,
    pub phase_rad: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CountModel {
    Poisson,
    None,
}

/// Tabulated phase response (circadian hours → shift in circadian hours),
/// interpolated piecewise-linearly and periodic over 24 h.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PrcProgram {
    pub points: Vec<(f64, f64)>,
}

impl PrcProgram {
    pub fn zero() -> Self {
        Self::default()
    }

    /// `amplitude_h * sin(2π (cp − offset_h) / 24)` tabulated every
    /// `24 / samples` hours.
    pub fn sinusoid(amplitude_h: f64, offset_h: f64, samples: usize) -> Self {
        let samples = samples.max(4);
        let points = (0..samples)
            .map(|i| {
                let cp = 24.0 * i as f64 / samples as f64;
                (cp, amplitude_h * libm::sin(TAU * (cp - offset_h) / 24.0))
            })
            .collect();
        Self { points }
    }

    pub fn eval(&self, cp_h: f64) -> f64 {
        let n = self.points.len();
        match n {
            0 => 0.0,
            1 => self.points[0].1,
            _ => {
                let cp = wrap_positive(cp_h, 24.0);
                let mut pts = self.points.clone();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                // find the bracketing pair, wrapping around 24 h
                let idx = pts.partition_point(|p| p.0 <= cp);
                let (a, b) = if idx == 0 {
                    let last = pts[n - 1];
                    ((last.0 - 24.0, last.1), pts[0])
                } else if idx == n {
                    let first = pts[0];
                    (pts[n - 1], (first.0 + 24.0, first.1))
                } else {
                    (pts[idx - 1], pts[idx])
                };
                if b.0 == a.0 {
                    return a.1;
                }
                a.1 + (b.1 - a.1) * (cp - a.0) / (b.0 - a.0)
            }
        }
    }
}

/// Generating parameters for one fly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub period_h: f64,
    /// Circadian time at `t = 0` when there is no entrainment.
    pub phase0_h: f64,
    pub harmonics: Vec<Harmonic>,
    pub bias_d: f64,
    pub prc_program: PrcProgram,
    pub masking_gain: f64,
    pub count_model: CountModel,
    pub seed: u64,
}

impl Default for SynthSpec {
    /// Bimodal (morning/evening) fly with the evening peak an hour before
    /// lights-off, in a 2–4 counts/bin regime.
    fn default() -> Self {
        Self {
            period_h: 24.0,
            phase0_h: 0.0,
            harmonics: alloc::vec![
                Harmonic {
                    k: 1,
                    amplitude: 2.0,
                    phase_rad: core::f64::consts::FRAC_PI_2 + TAU / 24.0,
                },
                Harmonic {
                    k: 2,
                    amplitude: 1.0,
                    phase_rad: core::f64::consts::FRAC_PI_2,
                },
            ],
            bias_d: 3.0,
            prc_program: PrcProgram::zero(),
            masking_gain: 2.0,
            count_model: CountModel::Poisson,
            seed: 0,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if !(18.0..=30.0).contains(&self.period_h) {
            return Err(Error::InvalidSpec(alloc::format!(
                "period_h {} outside [18, 30]",
                self.period_h
            )));
        }
        if !(self.bias_d >= 0.0) || !(self.masking_gain >= 0.0) {
            return Err(Error::InvalidSpec(
                "bias_d and masking_gain must be >= 0".into(),
            ));
        }
        if self.harmonics.iter().any(|h| h.k == 0 || !h.amplitude.is_finite()) {
            return Err(Error::InvalidSpec("harmonic order must be >= 1".into()));
        }
        Ok(())
    }

    fn fundamental_phase(&self) -> f64 {
        self.harmonics
            .iter()
            .find(|h| h.k == 1)
            .map_or(0.0, |h| h.phase_rad)
    }

    fn fundamental_amplitude(&self) -> f64 {
        self.harmonics
            .iter()
            .find(|h| h.k == 1)
            .map_or(0.0, |h| h.amplitude)
    }
}

/// Light-dark entrainment at the start of a protocol: lights on at the
/// start of each day for `light_h` hours. Lights-off is CP 0.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Entrainment {
    pub days: u32,
    pub light_h: f64,
    pub intensity_lux: f64,
}

impl Entrainment {
    pub fn end_h(&self) -> f64 {
        self.days as f64 * 24.0
    }

    /// Pinned oscillator phase during entrainment (rad).
    fn pinned_phase(&self, t_h: f64) -> f64 {
        TAU * (t_h - self.light_h) / 24.0
    }
}

/// Light program plus recording grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Protocol {
    pub schedule: LightSchedule,
    pub days: u32,
    pub bin_minutes: u32,
    pub entrainment: Option<Entrainment>,
}

impl Protocol {
    /// `ld_days` of LD (lights on `[24d, 24d + 12)`) followed by darkness.
    pub fn ld_dd(ld_days: u32, days: u32, bin_minutes: u32, ld_lux: f64) -> Self {
        let intervals = (0..ld_days)
            .map(|d| LightInterval {
                start_h: 24.0 * d as f64,
                end_h: 24.0 * d as f64 + 12.0,
                intensity_lux: ld_lux,
                wavelength: String::from("white"),
            })
            .collect();
        Self {
            schedule: LightSchedule { intervals },
            days,
            bin_minutes,
            entrainment: (ld_days > 0).then_some(Entrainment {
                days: ld_days,
                light_h: 12.0,
                intensity_lux: ld_lux,
            }),
        }
    }

    /// Constant darkness from the start.
    pub fn dd(days: u32, bin_minutes: u32) -> Self {
        Self {
            schedule: LightSchedule::dark(),
            days,
            bin_minutes,
            entrainment: None,
        }
    }

    /// Onset time of the first moment after entrainment at which an
    /// oscillator of period `nominal_period_h` reaches circadian time `cp_h`.
    pub fn cp_onset_h(&self, cp_h: f64, nominal_period_h: f64) -> f64 {
        let (start, cp_start) = match self.entrainment {
            Some(e) => (e.end_h(), wrap_positive(e.end_h() - e.light_h, 24.0)),
            None => (0.0, 0.0),
        };
        start + wrap_positive(cp_h - cp_start, 24.0) * nominal_period_h / 24.0
    }

    /// Adds a light pulse starting at circadian time `cp_h`.
    pub fn add_pulse_at_cp(
        &mut self,
        cp_h: f64,
        duration_h: f64,
        intensity_lux: f64,
        wavelength: &str,
        nominal_period_h: f64,
    ) -> Result<f64> {
        let onset = self.cp_onset_h(cp_h, nominal_period_h);
        self.schedule.push(LightInterval {
            start_h: onset,
            end_h: onset + duration_h,
            intensity_lux,
            wavelength: String::from(wavelength),
        })?;
        Ok(onset)
    }

    pub fn n_bins(&self) -> usize {
        (self.days as usize * 24 * 60) / self.bin_minutes.max(1) as usize
    }

    pub fn validate(&self) -> Result<()> {
        if self.days == 0 {
            return Err(Error::InvalidSpec("days must be >= 1".into()));
        }
        if self.bin_minutes == 0 {
            return Err(Error::InvalidSpec("bin_minutes must be >= 1".into()));
        }
        self.schedule.validate()
    }
}

struct PhaseStep {
    onset_h: f64,
    shift_rad: f64,
}

/// Oscillator phase model for one fly under one protocol.
struct PhaseModel {
    entrainment: Option<Entrainment>,
    free_start_h: f64,
    free_start_phase: f64,
    omega: f64,
    period_h: f64,
    steps: Vec<PhaseStep>,
}

impl PhaseModel {
    fn new(spec: &SynthSpec, protocol: &Protocol) -> Self {
        let omega = TAU / spec.period_h;
        let (free_start_h, free_start_phase) = match protocol.entrainment {
            Some(e) => (e.end_h(), e.pinned_phase(e.end_h())),
            None => (0.0, TAU * spec.phase0_h / 24.0),
        };
        let mut model = Self {
            entrainment: protocol.entrainment,
            free_start_h,
            free_start_phase,
            omega,
            period_h: spec.period_h,
            steps: Vec::new(),
        };
        for iv in &protocol.schedule.intervals {
            if iv.start_h < free_start_h {
                continue;
            }
            let psi = model.phase(iv.start_h);
            let cp = 24.0 * wrap_tau(psi) / TAU;
            let shift_h = spec.prc_program.eval(cp);
            model.steps.push(PhaseStep {
                onset_h: iv.start_h,
                shift_rad: TAU * shift_h / 24.0,
            });
        }
        model
    }

    fn phase(&self, t_h: f64) -> f64 {
        if let Some(e) = self.entrainment {
            if t_h < e.end_h() {
                return e.pinned_phase(t_h);
            }
        }
        let shifted: f64 = self
            .steps
            .iter()
            .filter(|s| s.onset_h <= t_h)
            .map(|s| s.shift_rad)
            .sum();
        self.free_start_phase + self.omega * (t_h - self.free_start_h) + shifted
    }

    fn shift_h(&self, t_h: f64) -> f64 {
        self.steps
            .iter()
            .filter(|s| s.onset_h <= t_h)
            .map(|s| s.shift_rad * 24.0 / TAU)
            .sum()
    }

    fn period_at(&self, t_h: f64) -> f64 {
        match self.entrainment {
            Some(e) if t_h < e.end_h() => 24.0,
            _ => self.period_h,
        }
    }
}

fn masking(edges: &[f64], t_h: f64) -> f64 {
    // only edges within ~12 time constants contribute measurably
    let lo = edges.partition_point(|e| *e < t_h - 12.0 * MASKING_TAU_H);
    edges[lo..]
        .iter()
        .take_while(|e| **e <= t_h)
        .map(|e| libm::exp(-(t_h - e) / MASKING_TAU_H))
        .sum()
}

/// Per-fly random streams: even streams for parameter jitter, odd streams
/// for count noise.
fn fly_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Synthesises one channel and its ground-truth phase series.
///
/// The ground truth is sampled at bin starts; its `argument_rad` is the
/// argument of the fundamental (`ψ + φ₁`) and its `phase_h` is the
/// accumulated programmed shift in circadian hours.
pub fn generate_activity(
    spec: &SynthSpec,
    protocol: &Protocol,
    channel_id: &str,
) -> Result<(ActivityTrace, PhaseSeries)> {
    generate_with_stream(spec, protocol, channel_id, 1)
}

fn generate_with_stream(
    spec: &SynthSpec,
    protocol: &Protocol,
    channel_id: &str,
    stream: u64,
) -> Result<(ActivityTrace, PhaseSeries)> {
    spec.validate()?;
    protocol.validate()?;
    let model = PhaseModel::new(spec, protocol);
    let edges = protocol.schedule.edges();
    let n = protocol.n_bins();
    let bin_h = protocol.bin_minutes as f64 / 60.0;
    let phi1 = spec.fundamental_phase();
    let a1 = spec.fundamental_amplitude();
    let mut rng = fly_rng(spec.seed, stream);

    let mut values = Vec::with_capacity(n);
    let mut truth = PhaseSeries {
        times_h: Vec::with_capacity(n),
        argument_rad: Vec::with_capacity(n),
        omega_rad_per_h: Vec::with_capacity(n),
        phase_h: Vec::with_capacity(n),
        period_h: Vec::with_capacity(n),
        amplitude: alloc::vec![a1; n],
        phase_defined: a1 > 0.0,
        detrend: None,
        held_samples: 0,
    };
    for i in 0..n {
        let t = i as f64 * bin_h;
        let psi = model.phase(t);
        let mut rate = spec.bias_d;
        for h in &spec.harmonics {
            rate += h.amplitude * libm::sin(h.k as f64 * psi + h.phase_rad);
        }
        if spec.masking_gain > 0.0 {
            rate += spec.masking_gain * masking(&edges, t);
        }
        let rate = rate.max(0.0);
        let value = match spec.count_model {
            CountModel::None => rate,
            CountModel::Poisson if rate > 0.0 => Poisson::new(rate)
                .map_err(|_| Error::InvalidSpec("invalid Poisson rate".into()))?
                .sample(&mut rng),
            CountModel::Poisson => 0.0,
        };
        values.push(value);
        let period = model.period_at(t);
        truth.times_h.push(t);
        truth.argument_rad.push(psi + phi1);
        truth.omega_rad_per_h.push(TAU / period);
        truth.period_h.push(period);
        truth.phase_h.push(model.shift_h(t));
    }
    let trace = ActivityTrace::new(channel_id, SYNTH_T0, protocol.bin_minutes, values)?;
    Ok((trace, truth))
}

/// Per-fly parameter spread within a cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Jitter {
    pub period_sd_h: f64,
    pub amplitude_cv: f64,
    pub bias_cv: f64,
}

impl Default for Jitter {
    fn default() -> Self {
        Self {
            period_sd_h: 0.05,
            amplitude_cv: 0.2,
            bias_cv: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cohort {
    pub label: String,
    pub n_flies: usize,
    pub rhythmic_fraction: f64,
    /// Share of arrhythmic flies that are nearly motionless.
    pub inactive_fraction: f64,
    pub jitter: Jitter,
}

impl Cohort {
    pub fn new(label: impl Into<String>, n_flies: usize, rhythmic_fraction: f64) -> Self {
        Self {
            label: label.into(),
            n_flies,
            rhythmic_fraction,
            inactive_fraction: 0.3,
            jitter: Jitter::default(),
        }
    }

    pub fn rhythmic_count(&self) -> usize {
        libm::round(self.rhythmic_fraction.clamp(0.0, 1.0) * self.n_flies as f64) as usize
    }
}

/// Ground-truth label of one synthetic fly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlyLabel {
    pub channel_id: String,
    pub rhythmic: bool,
    pub inactive: bool,
    pub period_h: f64,
    /// Programmed shift accumulated by the end of the recording (circadian h).
    pub programmed_shift_h: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledGroup {
    pub group: TraceGroup,
    pub labels: Vec<FlyLabel>,
}

/// Rate of an inactive fly, well under the default screening floor.
const INACTIVE_RATE: f64 = 0.01;

/// Generates a labelled cohort. Channel ids are `<label>-<index>` with
/// 1-based indices.
pub fn generate_cohort(
    cohort: &Cohort,
    spec: &SynthSpec,
    protocol: &Protocol,
) -> Result<LabeledGroup> {
    if cohort.n_flies == 0 {
        return Err(Error::InvalidSpec("cohort needs at least one fly".into()));
    }
    spec.validate()?;
    let n = cohort.n_flies;
    // which flies are rhythmic: seeded Fisher–Yates on a dedicated stream
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = fly_rng(spec.seed, u64::MAX);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        order.swap(i, j);
    }
    let mut rhythmic = alloc::vec![false; n];
    for &i in order.iter().take(cohort.rhythmic_count()) {
        rhythmic[i] = true;
    }

    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut traces = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for (i, &is_rhythmic) in rhythmic.iter().enumerate() {
        let id = alloc::format!("{}-{:02}", cohort.label, i + 1);
        let mut jrng = fly_rng(spec.seed, 2 * i as u64);
        let mut fly = spec.clone();
        let bias_scale = (1.0 + cohort.jitter.bias_cv * normal.sample(&mut jrng)).max(0.1);
        fly.bias_d *= bias_scale;
        let mut inactive = false;
        if is_rhythmic {
            fly.period_h = (spec.period_h
                + cohort.jitter.period_sd_h * normal.sample(&mut jrng))
            .clamp(18.0, 30.0);
            for h in &mut fly.harmonics {
                h.amplitude *=
                    (1.0 + cohort.jitter.amplitude_cv * normal.sample(&mut jrng)).max(0.0);
            }
        } else {
            fly.harmonics.clear();
            fly.masking_gain = 0.0;
            inactive = jrng.random::<f64>() < cohort.inactive_fraction;
            if inactive {
                fly.bias_d = INACTIVE_RATE;
            }
        }
        let (trace, truth) = generate_with_stream(&fly, protocol, &id, 2 * i as u64 + 1)?;
        labels.push(FlyLabel {
            channel_id: id,
            rhythmic: is_rhythmic,
            inactive,
            period_h: fly.period_h,
            programmed_shift_h: truth.phase_h.last().copied().unwrap_or(0.0),
        });
        traces.push(trace);
    }
    Ok(LabeledGroup {
        group: TraceGroup::new(cohort.label.clone(), traces)?,
        labels,
    })
}

/// Adds i.i.d. zero-mean Gaussian noise of the given variance to every bin.
/// The result is not clipped.
pub fn corrupt(trace: &ActivityTrace, variance: f64, seed: u64) -> Result<ActivityTrace> {
    if !(variance >= 0.0) {
        return Err(Error::NegativeVariance(variance));
    }
    let mut out = trace.clone();
    if variance == 0.0 {
        return Ok(out);
    }
    let normal = Normal::new(0.0, libm::sqrt(variance))
        .map_err(|_| Error::NegativeVariance(variance))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for v in &mut out.values {
        *v += normal.sample(&mut rng);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, variance};

    fn clean_spec() -> SynthSpec {
        SynthSpec {
            harmonics: alloc::vec![Harmonic {
                k: 1,
                amplitude: 2.0,
                phase_rad: 0.3
            }],
            masking_gain: 0.0,
            count_model: CountModel::None,
            ..SynthSpec::default()
        }
    }

    #[test]
    fn deterministic_mode_matches_waveform() {
        let spec = SynthSpec {
            period_h: 25.0,
            phase0_h: 5.0,
            bias_d: 1.0,
            ..clean_spec()
        };
        let protocol = Protocol::dd(2, 1);
        let (trace, _) = generate_activity(&spec, &protocol, "a").unwrap();
        for (i, v) in trace.values.iter().enumerate() {
            let t = i as f64 / 60.0;
            let psi = TAU * 5.0 / 24.0 + TAU * t / 25.0;
            let expect = (1.0 + 2.0 * libm::sin(psi + 0.3)).max(0.0);
            assert!((*v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn programmed_step_at_pulse_onset() {
        let spec = SynthSpec {
            prc_program: PrcProgram {
                points: alloc::vec![(0.0, 1.0)],
            },
            ..clean_spec()
        };
        let mut protocol = Protocol::ld_dd(3, 6, 1, 100.0);
        let onset = protocol
            .add_pulse_at_cp(0.0, 1.0, 4.0, "470nm", 24.0)
            .unwrap();
        assert!((onset - 84.0).abs() < 1e-9);
        let (_, truth) = generate_activity(&spec, &protocol, "a").unwrap();
        let i = (onset * 60.0) as usize;
        assert_eq!(truth.phase_h[i - 1], 0.0);
        assert!((truth.phase_h[i] - 1.0).abs() < 1e-12);
        let jump = truth.argument_rad[i] - truth.argument_rad[i - 1];
        assert!((jump - TAU / 24.0 - TAU / (24.0 * 60.0)).abs() < 1e-9);
    }

    #[test]
    fn protocol_length_matches_recording() {
        let protocol = Protocol::ld_dd(3, 12, 1, 100.0);
        let (trace, truth) =
            generate_activity(&SynthSpec::default(), &protocol, "a").unwrap();
        assert_eq!(trace.len(), 17280);
        assert_eq!(truth.len(), 17280);
        assert!(trace.is_count_valued());
    }

    #[test]
    fn truth_period_exact_between_pulses() {
        let spec = SynthSpec {
            period_h: 24.45,
            ..clean_spec()
        };
        let protocol = Protocol::ld_dd(3, 8, 1, 100.0);
        let (_, truth) = generate_activity(&spec, &protocol, "a").unwrap();
        assert!(truth.period_h[..72 * 60].iter().all(|p| *p == 24.0));
        assert!(truth.period_h[72 * 60..].iter().all(|p| *p == 24.45));
    }

    #[test]
    fn entrainment_pins_cp_zero_at_lights_off() {
        let spec = clean_spec();
        let protocol = Protocol::ld_dd(3, 4, 1, 100.0);
        let model = PhaseModel::new(&spec, &protocol);
        for day in 0..3 {
            let psi = model.phase(24.0 * day as f64 + 12.0);
            assert!(wrap_tau(psi + 1e-12) < 1e-9);
        }
    }

    #[test]
    fn prc_program_interpolates_periodically() {
        let p = PrcProgram {
            points: alloc::vec![(0.0, 0.0), (12.0, 2.0)],
        };
        assert!((p.eval(6.0) - 1.0).abs() < 1e-12);
        assert!((p.eval(18.0) - 1.0).abs() < 1e-12);
        assert!((p.eval(-6.0) - 1.0).abs() < 1e-12);
        let s = PrcProgram::sinusoid(2.0, 0.0, 96);
        assert!((s.eval(6.0) - 2.0).abs() < 1e-12);
        assert!((s.eval(7.0) - 2.0 * libm::sin(TAU * 7.0 / 24.0)).abs() < 0.01);
    }

    #[test]
    fn cohort_labels_and_determinism() {
        let protocol = Protocol::ld_dd(3, 4, 1, 100.0);
        let cohort = Cohort::new("m1", 21, 0.45);
        let a = generate_cohort(&cohort, &SynthSpec::default(), &protocol).unwrap();
        let n_rhythmic = a.labels.iter().filter(|l| l.rhythmic).count();
        assert!((9..=10).contains(&n_rhythmic));
        let b = generate_cohort(&cohort, &SynthSpec::default(), &protocol).unwrap();
        assert_eq!(a, b);

        let all = generate_cohort(
            &Cohort::new("m2", 5, 1.0),
            &SynthSpec::default(),
            &protocol,
        )
        .unwrap();
        assert!(all.labels.iter().all(|l| l.rhythmic));
    }

    #[test]
    fn corrupt_identity_and_variance() {
        let t = ActivityTrace::new("z", SYNTH_T0, 1, alloc::vec![0.0; 17280]).unwrap();
        assert_eq!(corrupt(&t, 0.0, 1).unwrap(), t);
        let c = corrupt(&t, 10.0, 7).unwrap();
        let v = variance(&c.values);
        assert!((v - 10.0).abs() < 0.5, "variance {v}");
        let d = corrupt(&t, 10.0, 8).unwrap();
        assert_ne!(c.values, d.values);
        assert!((mean(&c.values) - mean(&d.values)).abs() < 0.1);
        assert!((variance(&d.values) - v).abs() < 0.6);
        assert_eq!(corrupt(&t, -1.0, 1), Err(Error::NegativeVariance(-1.0)));
    }
}
