//! Baseband-equivalent SNR pipeline: synthesise tones, add thermal noise,
//! amplify, estimate spectra and read off the noise figure.

mod measure;
mod signal;
mod spectrum;

pub use measure::{measure_nf, NfMeasurement, NfPoint, NfSettings};
pub use signal::{add_thermal_noise, amplify, synth_tones, AmplifierSim, EnvelopeSignal, SynthSettings};
pub use spectrum::{dbm_to_watts, psd, snr, watts_to_dbm, SpectrumEstimate, WelchSettings, SNR_CEILING_DB};

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, Error, Result};
use crate::rf::T0_KELVIN;

/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380649e-23;

/// One end-to-end NF simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrExperiment {
    pub tone_offsets_hz: Vec<f64>,
    pub tone_powers_dbm: Vec<f64>,
    pub amplifier: AmplifierSim,
    /// Temperature of the noise riding on the input [K].
    pub input_temperature_k: f64,
    pub carrier_hz: f64,
    pub step_s: f64,
    pub z0: f64,
    pub segment_len: usize,
    /// Number of Welch segments; the record length follows from it.
    pub averages: usize,
    pub seed: u64,
}

impl SnrExperiment {
    pub fn one_tone(offset_hz: f64, power_dbm: f64, amplifier: AmplifierSim, averages: usize, seed: u64) -> Self {
        Self {
            tone_offsets_hz: vec![offset_hz],
            tone_powers_dbm: vec![power_dbm],
            amplifier,
            input_temperature_k: T0_KELVIN,
            carrier_hz: 1.6e9,
            step_s: 100e-9,
            z0: 50.0,
            segment_len: 256,
            averages,
            seed,
        }
    }

    /// Record duration giving exactly `averages` half-overlapped segments.
    pub fn duration_s(&self) -> f64 {
        (self.averages + 1) as f64 * (self.segment_len / 2) as f64 * self.step_s
    }

    pub fn validate(&self) -> Result<()> {
        self.amplifier.validate()?;
        require_non_negative("input_temperature_k", self.input_temperature_k)?;
        if self.averages == 0 {
            return Err(Error::invalid("averages", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnrRun {
    pub input: EnvelopeSignal,
    pub output: EnvelopeSignal,
    pub measurement: NfMeasurement,
}

/// Input noise and amplifier noise use independent streams derived from
/// the experiment seed.
pub fn run_experiment(exp: &SnrExperiment) -> Result<SnrRun> {
    exp.validate()?;
    let synth = SynthSettings {
        carrier_hz: exp.carrier_hz,
        duration_s: exp.duration_s(),
        step_s: exp.step_s,
        z0: exp.z0,
        phase_seed: Some(exp.seed),
    };
    let clean = synth_tones(&exp.tone_offsets_hz, &exp.tone_powers_dbm, &synth)?;
    let input = add_thermal_noise(&clean, exp.input_temperature_k, exp.seed.wrapping_add(1))?;
    let output = amplify(&input, &exp.amplifier, exp.seed.wrapping_add(2))?;
    let settings = NfSettings::new(exp.tone_offsets_hz.clone(), exp.segment_len);
    let measurement = measure_nf(&input, &output, &settings)?;
    Ok(SnrRun { input, output, measurement })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinear::PolynomialAmp;

    #[test]
    fn duration_matches_segment_count() {
        let amp = AmplifierSim { amp: PolynomialAmp::linear(1.0, 50.0), t_e: 0.0 };
        let exp = SnrExperiment::one_tone(1e6, -90.0, amp, 64, 1);
        let run = run_experiment(&exp).unwrap();
        assert_eq!(run.measurement.input_spectrum.segments, 64);
    }

    #[test]
    fn thermal_power_matches_ktb() {
        let s = synth_tones(&[0.0], &[-400.0], &SynthSettings::default()).unwrap();
        let n = add_thermal_noise(&s, 290.0, 5).unwrap();
        let expected = BOLTZMANN * 290.0 * 1e7;
        let db = 10.0 * (n.mean_power() / expected).log10();
        assert!(db.abs() < 0.2, "{db}");
    }
}
