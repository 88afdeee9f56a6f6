use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::BOLTZMANN;
use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::nonlinear::{dbm_to_amplitude, PolynomialAmp};

/// Complex envelope of a narrowband signal around `carrier_hz`.
///
/// A passband tone of peak amplitude `A` has envelope magnitude `A`, so the
/// mean passband power is `mean(|x|²)/(2·z0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSignal {
    pub carrier_hz: f64,
    /// Sample period [s].
    pub dt: f64,
    pub z0: f64,
    pub samples: Vec<Complex64>,
    pub seed: Option<u64>,
    pub description: String,
}

impl EnvelopeSignal {
    pub fn sample_rate(&self) -> f64 {
        1.0 / self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean passband power [W].
    pub fn mean_power(&self) -> f64 {
        let sum: f64 = self.samples.iter().map(|z| z.norm_sqr()).sum();
        sum / self.samples.len() as f64 / (2.0 * self.z0)
    }

    /// CSV with columns `t,re,im`.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.samples.len() * 48);
        out.push_str("t,re,im\n");
        for (k, z) in self.samples.iter().enumerate() {
            out.push_str(&format!("{:e},{:e},{:e}\n", k as f64 * self.dt, z.re, z.im));
        }
        out
    }
}

/// Time grid and carrier for [`synth_tones`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSettings {
    pub carrier_hz: f64,
    pub duration_s: f64,
    pub step_s: f64,
    pub z0: f64,
    /// Seed for random tone phases; `None` starts every tone at zero phase.
    pub phase_seed: Option<u64>,
}

impl Default for SynthSettings {
    fn default() -> Self {
        Self {
            carrier_hz: 1.6e9,
            duration_s: 1e-3,
            step_s: 100e-9,
            z0: 50.0,
            phase_seed: None,
        }
    }
}

/// Sum of complex exponentials at `offsets_hz` from the carrier, each
/// carrying the matching power in `powers_dbm`.
pub fn synth_tones(offsets_hz: &[f64], powers_dbm: &[f64], settings: &SynthSettings) -> Result<EnvelopeSignal> {
    require_positive("carrier_hz", settings.carrier_hz)?;
    require_positive("duration_s", settings.duration_s)?;
    require_positive("step_s", settings.step_s)?;
    require_positive("z0", settings.z0)?;
    if offsets_hz.len() != powers_dbm.len() {
        return Err(Error::invalid(
            "powers_dbm",
            format!("{} powers for {} tone offsets", powers_dbm.len(), offsets_hz.len()),
        ));
    }
    let nyquist = 0.5 / settings.step_s;
    if let Some(&bad) = offsets_hz.iter().find(|f| !(f.abs() < nyquist)) {
        return Err(Error::invalid(
            "offsets_hz",
            format!("offset {bad} Hz exceeds the envelope Nyquist limit of ±{nyquist} Hz"),
        ));
    }
    let n = (settings.duration_s / settings.step_s).round() as usize;
    if n == 0 {
        return Err(Error::invalid("duration_s", "shorter than one sample"));
    }
    let mut rng = settings.phase_seed.map(ChaCha8Rng::seed_from_u64);
    let tones: Vec<(f64, Complex64)> = offsets_hz
        .iter()
        .zip(powers_dbm)
        .map(|(&f, &p)| {
            let phase = rng.as_mut().map_or(0.0, |r| r.random::<f64>() * 2.0 * PI);
            (f, Complex64::from_polar(dbm_to_amplitude(p, settings.z0), phase))
        })
        .collect();
    let samples = (0..n)
        .map(|k| {
            let t = k as f64 * settings.step_s;
            tones
                .iter()
                .map(|&(f, a)| a * Complex64::from_polar(1.0, 2.0 * PI * f * t))
                .sum()
        })
        .collect();
    Ok(EnvelopeSignal {
        carrier_hz: settings.carrier_hz,
        dt: settings.step_s,
        z0: settings.z0,
        samples,
        seed: settings.phase_seed,
        description: format!("{} tone(s) at {:?} Hz, {:?} dBm", offsets_hz.len(), offsets_hz, powers_dbm),
    })
}

/// Circular white Gaussian noise with one-sided density `k_B·T` over the
/// envelope bandwidth `1/dt`.
pub fn add_thermal_noise(sig: &EnvelopeSignal, temperature_k: f64, seed: u64) -> Result<EnvelopeSignal> {
    require_non_negative("temperature_k", temperature_k)?;
    let mut out = sig.clone();
    if temperature_k == 0.0 {
        return Ok(out);
    }
    let power = BOLTZMANN * temperature_k / sig.dt;
    let sigma = (sig.z0 * power).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for z in &mut out.samples {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *z += Complex64::new(sigma * re, sigma * im);
    }
    out.seed = Some(seed);
    out.description = format!("{} + thermal noise at {temperature_k} K", sig.description);
    Ok(out)
}

/// Amplifier with input-referred noise temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplifierSim {
    pub amp: PolynomialAmp,
    /// Equivalent input noise temperature [K].
    pub t_e: f64,
}

impl AmplifierSim {
    pub fn validate(&self) -> Result<()> {
        self.amp.validate()?;
        require_non_negative("t_e", self.t_e)
    }

    /// Baseband-equivalent transfer of the odd-order polynomial: the
    /// in-zone part of `a3·x³` is `(3/4)·a3·|x|²·x`, of `a5·x⁵` it is
    /// `(5/8)·a5·|x|⁴·x`.
    pub fn envelope_transfer(&self, x: Complex64) -> Complex64 {
        let p = x.norm_sqr();
        x * (self.amp.a1 + 0.75 * self.amp.a3 * p + 0.625 * self.amp.a5 * p * p)
    }
}

/// Adds the amplifier's own noise at the input, then applies the envelope
/// nonlinearity.
pub fn amplify(sig: &EnvelopeSignal, amp: &AmplifierSim, seed: u64) -> Result<EnvelopeSignal> {
    amp.validate()?;
    let mut out = add_thermal_noise(sig, amp.t_e, seed)?;
    for z in &mut out.samples {
        *z = amp.envelope_transfer(*z);
    }
    out.seed = Some(seed);
    out.description = format!("{} amplified (a1 = {}, T_e = {} K)", sig.description, amp.amp.a1, amp.t_e);
    Ok(out)
}
