use serde::{Deserialize, Serialize};

use super::spectrum::{psd, snr, SpectrumEstimate, WelchSettings};
use super::EnvelopeSignal;
use crate::error::{Error, Result};

/// Bin conventions for NF measurement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfSettings {
    pub welch: WelchSettings,
    /// Detunings of the test tones [Hz].
    pub tone_offsets_hz: Vec<f64>,
    /// Signal bins extend this many bins either side of each tone.
    pub signal_half_width: usize,
    /// Floor bins keep at least this many bins from any tone or
    /// third/fifth-order product.
    pub guard_bins: usize,
}

impl NfSettings {
    pub fn new(tone_offsets_hz: Vec<f64>, segment_len: usize) -> Self {
        Self {
            welch: WelchSettings { segment_len },
            tone_offsets_hz,
            signal_half_width: 3,
            guard_bins: 6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NfPoint {
    pub detuning_hz: f64,
    pub snr_in_db: f64,
    pub snr_out_db: f64,
    pub nf_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NfMeasurement {
    /// One point per test tone, integrating the tone's signal bins.
    pub tones: Vec<NfPoint>,
    /// Bin-by-bin NF inside the signal windows where both SNRs are
    /// positive.
    pub per_bin: Vec<NfPoint>,
    pub settings: NfSettings,
    pub floor_in_w: f64,
    pub floor_out_w: f64,
    pub input_spectrum: SpectrumEstimate,
    pub output_spectrum: SpectrumEstimate,
}

/// Frequencies to keep out of the floor estimate: the tones and their
/// third- and fifth-order products.
fn product_frequencies(tones: &[f64]) -> Vec<f64> {
    let mut out = tones.to_vec();
    for &a in tones {
        for &b in tones {
            if a != b {
                out.push(2.0 * a - b);
                out.push(3.0 * a - 2.0 * b);
            }
        }
    }
    out
}

/// Noise figure from the SNR degradation between an input record and the
/// amplifier's output record: `F = SNR_in / SNR_out`. The input noise
/// reference is whatever noise the input record carries.
pub fn measure_nf(input: &EnvelopeSignal, output: &EnvelopeSignal, settings: &NfSettings) -> Result<NfMeasurement> {
    if input.dt != output.dt || input.samples.len() != output.samples.len() {
        return Err(Error::invalid("output", "input and output records do not share a time base"));
    }
    if settings.tone_offsets_hz.is_empty() {
        return Err(Error::Empty("no tone offsets to measure at"));
    }
    let spec_in = psd(input, &settings.welch)?;
    let spec_out = psd(output, &settings.welch)?;
    let n = spec_in.len();

    let excluded: Vec<usize> = product_frequencies(&settings.tone_offsets_hz)
        .into_iter()
        .filter(|f| f.abs() < 0.5 * input.sample_rate())
        .map(|f| spec_in.bin_of(f))
        .collect();
    let floor_bins: Vec<usize> = (0..n)
        .filter(|&k| excluded.iter().all(|&e| k.abs_diff(e) > settings.guard_bins))
        .collect();
    if floor_bins.is_empty() {
        return Err(Error::invalid("guard_bins", "no bins left for the noise floor"));
    }
    let mean_floor = |s: &SpectrumEstimate| floor_bins.iter().map(|&k| s.power_w[k]).sum::<f64>() / floor_bins.len() as f64;

    let hw = settings.signal_half_width;
    let mut tones = Vec::with_capacity(settings.tone_offsets_hz.len());
    let mut per_bin = Vec::new();
    for &f in &settings.tone_offsets_hz {
        let centre = spec_in.bin_of(f);
        let bins: Vec<usize> = (centre.saturating_sub(hw)..=(centre + hw).min(n - 1)).collect();
        let snr_in = snr(&spec_in, &bins, &floor_bins)?;
        let snr_out = snr(&spec_out, &bins, &floor_bins)?;
        if snr_in == f64::NEG_INFINITY {
            return Err(Error::Degenerate(format!("zero input SNR at {f} Hz")));
        }
        tones.push(NfPoint {
            detuning_hz: f,
            snr_in_db: snr_in,
            snr_out_db: snr_out,
            nf_db: snr_in - snr_out,
        });
        for &k in &bins {
            let si = snr(&spec_in, &[k], &floor_bins)?;
            let so = snr(&spec_out, &[k], &floor_bins)?;
            if si > 0.0 && so > 0.0 && si.is_finite() && so.is_finite() {
                per_bin.push(NfPoint {
                    detuning_hz: spec_in.detuning_hz[k],
                    snr_in_db: si,
                    snr_out_db: so,
                    nf_db: si - so,
                });
            }
        }
    }
    per_bin.sort_by(|a, b| a.detuning_hz.total_cmp(&b.detuning_hz));
    per_bin.dedup_by(|a, b| a.detuning_hz == b.detuning_hz);
    Ok(NfMeasurement {
        tones,
        per_bin,
        settings: settings.clone(),
        floor_in_w: mean_floor(&spec_in),
        floor_out_w: mean_floor(&spec_out),
        input_spectrum: spec_in,
        output_spectrum: spec_out,
    })
}
