use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::EnvelopeSignal;
use crate::error::{Error, Result};

/// Reported SNR when the noise floor is exactly zero [dB].
pub const SNR_CEILING_DB: f64 = 300.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchSettings {
    /// FFT length, a power of two.
    pub segment_len: usize,
}

impl Default for WelchSettings {
    fn default() -> Self {
        Self { segment_len: 256 }
    }
}

/// Welch estimate over detuning from the carrier.
///
/// `power_w[k]` is the noise-calibrated power in bin `k` (Parseval: the bins
/// sum to the mean signal power, and a white floor reads its density times
/// the bin width). A tone concentrated at one bin spreads over the window's
/// main lobe; [`SpectrumEstimate::tone_power_dbm`] rescales a single bin by
/// the equivalent noise bandwidth so a bin-centred tone reads its true
/// power.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEstimate {
    pub detuning_hz: Vec<f64>,
    pub power_w: Vec<f64>,
    pub bin_width_hz: f64,
    pub window: String,
    pub overlap: f64,
    pub segment_len: usize,
    pub segments: usize,
    /// Equivalent noise bandwidth of the window [bins].
    pub enbw_bins: f64,
}

impl SpectrumEstimate {
    pub fn len(&self) -> usize {
        self.power_w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power_w.is_empty()
    }

    pub fn dbm(&self, bin: usize) -> f64 {
        watts_to_dbm(self.power_w[bin])
    }

    pub fn tone_power_dbm(&self, bin: usize) -> f64 {
        watts_to_dbm(self.power_w[bin] * self.enbw_bins)
    }

    /// Index of the bin nearest to `detuning_hz`.
    pub fn bin_of(&self, detuning_hz: f64) -> usize {
        let n = self.power_w.len() as f64;
        let k = (detuning_hz / self.bin_width_hz).round() + (n / 2.0);
        k.clamp(0.0, n - 1.0) as usize
    }

    pub fn total_power(&self) -> f64 {
        self.power_w.iter().sum()
    }

    /// CSV with columns `detuning_hz,dbm`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("detuning_hz,dbm\n");
        for (f, p) in self.detuning_hz.iter().zip(&self.power_w) {
            out.push_str(&format!("{f},{:.6}\n", watts_to_dbm(*p)));
        }
        out
    }
}

pub fn watts_to_dbm(w: f64) -> f64 {
    10.0 * (w / 1e-3).log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    1e-3 * 10f64.powf(dbm / 10.0)
}

fn hann(n: usize) -> Vec<f64> {
    // Periodic form: exact 1/4, 1/2, 1/4 main-lobe split for bin-centred tones.
    (0..n).map(|k| 0.5 - 0.5 * (2.0 * PI * k as f64 / n as f64).cos()).collect()
}

/// Hann-windowed Welch average with 50 % overlap.
pub fn psd(sig: &EnvelopeSignal, settings: &WelchSettings) -> Result<SpectrumEstimate> {
    let n = settings.segment_len;
    if n < 2 || !n.is_power_of_two() {
        return Err(Error::invalid("segment_len", format!("{n} is not a power of two >= 2")));
    }
    if sig.samples.len() < n {
        return Err(Error::invalid(
            "segment_len",
            format!("record has {} samples, shorter than one segment of {n}", sig.samples.len()),
        ));
    }
    let window = hann(n);
    let sum_w: f64 = window.iter().sum();
    let sum_w2: f64 = window.iter().map(|w| w * w).sum();
    let hop = n / 2;
    let segments = (sig.samples.len() - n) / hop + 1;

    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut acc = vec![0.0_f64; n];
    for s in 0..segments {
        let seg = &sig.samples[s * hop..s * hop + n];
        for ((b, x), w) in buf.iter_mut().zip(seg).zip(&window) {
            *b = x * w;
        }
        fft.process(&mut buf);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let scale = 1.0 / (segments as f64 * n as f64 * sum_w2 * 2.0 * sig.z0);
    let bin_width_hz = 1.0 / (n as f64 * sig.dt);
    // Reorder so detuning runs from −fs/2 upwards.
    let half = n / 2;
    let power_w = (0..n).map(|k| acc[(k + half) % n] * scale).collect();
    let detuning_hz = (0..n).map(|k| (k as f64 - half as f64) * bin_width_hz).collect();
    Ok(SpectrumEstimate {
        detuning_hz,
        power_w,
        bin_width_hz,
        window: "hann".into(),
        overlap: 0.5,
        segment_len: n,
        segments,
        enbw_bins: n as f64 * sum_w2 / (sum_w * sum_w),
    })
}

/// Signal-to-noise ratio [dB] from a spectrum.
///
/// The floor is the mean power per bin over `floor_bins`. Signal power is
/// the sum over `signal_bins` minus the floor's share of those bins, and
/// noise is the floor scaled to the same number of bins. A vanishing floor
/// reads [`SNR_CEILING_DB`]; a signal that does not rise above the floor
/// reads `-∞`.
pub fn snr(spec: &SpectrumEstimate, signal_bins: &[usize], floor_bins: &[usize]) -> Result<f64> {
    if signal_bins.is_empty() || floor_bins.is_empty() {
        return Err(Error::Empty("signal and floor bin sets must be non-empty"));
    }
    let n = spec.power_w.len();
    if let Some(&b) = signal_bins.iter().chain(floor_bins).find(|&&b| b >= n) {
        return Err(Error::invalid("bins", format!("bin {b} out of range for {n} bins")));
    }
    if signal_bins.iter().any(|b| floor_bins.contains(b)) {
        return Err(Error::invalid("bins", "signal and floor bin sets overlap"));
    }
    let floor = floor_bins.iter().map(|&b| spec.power_w[b]).sum::<f64>() / floor_bins.len() as f64;
    let total: f64 = signal_bins.iter().map(|&b| spec.power_w[b]).sum();
    let noise = floor * signal_bins.len() as f64;
    let signal = total - noise;
    if noise <= 0.0 {
        return Ok(if signal > 0.0 { SNR_CEILING_DB } else { f64::NEG_INFINITY });
    }
    if signal <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    Ok((10.0 * (signal / noise).log10()).min(SNR_CEILING_DB))
}
