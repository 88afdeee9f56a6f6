//! Memoryless odd-order polynomial amplifier `y = a1·x + a3·x³ + a5·x⁵`:
//! intercept point, gain compression and two-tone intermodulation.
//!
//! Powers are dBm into the reference impedance, with a sinusoid of peak
//! amplitude `A` carrying `A²/(2·Z0)` watts.

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolynomialAmp {
    pub a1: f64,
    pub a3: f64,
    pub a5: f64,
    pub z0: f64,
}

impl PolynomialAmp {
    pub fn linear(a1: f64, z0: f64) -> Self {
        Self { a1, a3: 0.0, a5: 0.0, z0 }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("a1", self.a1)?;
        require_finite("a3", self.a3)?;
        require_finite("a5", self.a5)?;
        require_positive("z0", self.z0)
    }

    pub fn small_signal_gain_db(&self) -> f64 {
        20.0 * self.a1.log10()
    }

    /// Instantaneous transfer `y(x)`.
    pub fn eval(&self, x: f64) -> f64 {
        let x2 = x * x;
        x * (self.a1 + x2 * (self.a3 + x2 * self.a5))
    }

    fn coefficients(&self) -> [(u32, f64); 3] {
        [(1, self.a1), (3, self.a3), (5, self.a5)]
    }
}

/// Peak amplitude [V] of a sinusoid carrying `dbm` into `z0`.
pub fn dbm_to_amplitude(dbm: f64, z0: f64) -> f64 {
    (2.0 * z0 * 1e-3 * 10f64.powf(dbm / 10.0)).sqrt()
}

/// Power [dBm] of a sinusoid of peak amplitude `amplitude` into `z0`.
pub fn amplitude_to_dbm(amplitude: f64, z0: f64) -> f64 {
    10.0 * (amplitude * amplitude / (2.0 * z0) / 1e-3).log10()
}

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

/// Amplitude of `cos(p·a + q·b)` in the expansion of `(cos a + cos b)^n`.
///
/// Counts the ways of picking `e^{±ia}`, `e^{±ib}` from the `n` factors of
/// `((e^{ia}+e^{-ia}+e^{ib}+e^{-ib})/2)^n` that land on the requested
/// frequency.
pub fn two_tone_coefficient(n: u32, p: i32, q: i32) -> f64 {
    let mut ways = 0.0;
    for k1 in 0..=n {
        for k2 in 0..=(n - k1) {
            if k1 as i32 - k2 as i32 != p {
                continue;
            }
            let rest = n - k1 - k2;
            for k3 in 0..=rest {
                let k4 = rest - k3;
                if k3 as i32 - k4 as i32 != q {
                    continue;
                }
                ways += factorial(n) / (factorial(k1) * factorial(k2) * factorial(k3) * factorial(k4));
            }
        }
    }
    let c = ways / 2f64.powi(n as i32);
    if p == 0 && q == 0 {
        c
    } else {
        2.0 * c
    }
}

/// Amplitude of `cos(p·a)` in `cos^n a`.
pub fn single_tone_coefficient(n: u32, p: i32) -> f64 {
    let mut ways = 0.0;
    for k1 in 0..=n {
        let k2 = n - k1;
        if k1 as i32 - k2 as i32 == p {
            ways += factorial(n) / (factorial(k1) * factorial(k2));
        }
    }
    let c = ways / 2f64.powi(n as i32);
    if p == 0 {
        c
    } else {
        2.0 * c
    }
}

/// Cubic coefficient for a given gain and input intercept; `a5 = 0`.
pub fn fit_from_specs(gain_db: f64, iip3_dbm: f64, z0: f64) -> Result<PolynomialAmp> {
    require_finite("gain_db", gain_db)?;
    require_finite("iip3_dbm", iip3_dbm)?;
    require_positive("z0", z0)?;
    let a1 = 10f64.powf(gain_db / 20.0);
    let a_ip = dbm_to_amplitude(iip3_dbm, z0);
    let a3 = -4.0 * a1 / (3.0 * a_ip * a_ip);
    Ok(PolynomialAmp { a1, a3, a5: 0.0, z0 })
}

/// Peak input amplitude at the third-order intercept; `None` when the
/// cubic term vanishes and the intercept is unbounded.
pub fn iip3_amplitude(amp: &PolynomialAmp) -> Result<Option<f64>> {
    amp.validate()?;
    if amp.a3 == 0.0 {
        return Ok(None);
    }
    Ok(Some((4.0 * amp.a1 / (3.0 * amp.a3.abs())).sqrt()))
}

/// Input-referred third-order intercept [dBm].
pub fn iip3(amp: &PolynomialAmp) -> Result<Option<f64>> {
    Ok(iip3_amplitude(amp)?.map(|a| amplitude_to_dbm(a, amp.z0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoToneSpec {
    pub center_hz: f64,
    /// Each tone sits this far from the center [Hz].
    pub detuning_hz: f64,
    /// Input power of each tone [dBm].
    pub tone_power_dbm: f64,
}

impl TwoToneSpec {
    pub fn validate(&self) -> Result<()> {
        require_positive("center_hz", self.center_hz)?;
        require_positive("detuning_hz", self.detuning_hz)?;
        if self.detuning_hz >= self.center_hz {
            return Err(Error::invalid("detuning_hz", "must be smaller than the center frequency"));
        }
        require_finite("tone_power_dbm", self.tone_power_dbm)
    }

    pub fn tones_hz(&self) -> (f64, f64) {
        (self.center_hz - self.detuning_hz, self.center_hz + self.detuning_hz)
    }
}

/// Output spectrum of a two-tone test. Absent products (zero coefficient)
/// are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoToneResponse {
    pub input_dbm: f64,
    pub fundamental_dbm: Option<f64>,
    pub im3_dbm: Option<f64>,
    pub im5_dbm: Option<f64>,
    /// Fundamental minus IM3 [dB].
    pub imd3_db: Option<f64>,
    /// Fundamental minus IM5 [dB].
    pub imd5_db: Option<f64>,
    /// Lower third- and fifth-order product frequencies `2f1−f2`, `3f1−2f2`.
    pub im3_hz: f64,
    pub im5_hz: f64,
    pub fundamental_amplitude: f64,
    pub im3_amplitude: f64,
    pub im5_amplitude: f64,
}

/// Output amplitude at `cos(p·ω1 t + q·ω2 t)` for input `A(cos ω1t + cos ω2t)`.
pub fn two_tone_product(amp: &PolynomialAmp, amplitude: f64, p: i32, q: i32) -> f64 {
    amp.coefficients()
        .iter()
        .map(|&(n, a)| a * amplitude.powi(n as i32) * two_tone_coefficient(n, p, q))
        .sum()
}

pub fn two_tone_response(amp: &PolynomialAmp, spec: &TwoToneSpec) -> Result<TwoToneResponse> {
    amp.validate()?;
    spec.validate()?;
    let a = dbm_to_amplitude(spec.tone_power_dbm, amp.z0);
    let fund = two_tone_product(amp, a, 1, 0);
    let im3 = two_tone_product(amp, a, 2, -1);
    let im5 = two_tone_product(amp, a, 3, -2);
    let dbm = |x: f64| (x != 0.0).then(|| amplitude_to_dbm(x.abs(), amp.z0));
    let (p_f, p3, p5) = (dbm(fund), dbm(im3), dbm(im5));
    let diff = |a: Option<f64>, b: Option<f64>| a.zip(b).map(|(a, b)| a - b);
    let (f1, f2) = spec.tones_hz();
    Ok(TwoToneResponse {
        input_dbm: spec.tone_power_dbm,
        fundamental_dbm: p_f,
        im3_dbm: p3,
        im5_dbm: p5,
        imd3_db: diff(p_f, p3),
        imd5_db: diff(p_f, p5),
        im3_hz: 2.0 * f1 - f2,
        im5_hz: 3.0 * f1 - 2.0 * f2,
        fundamental_amplitude: fund,
        im3_amplitude: im3,
        im5_amplitude: im5,
    })
}

/// One row of a swept two-tone table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoToneRow {
    pub pin_dbm: f64,
    pub gain_db: f64,
    pub response: TwoToneResponse,
}

pub fn two_tone_sweep(amp: &PolynomialAmp, spec: &TwoToneSpec, pins_dbm: &[f64]) -> Result<Vec<TwoToneRow>> {
    if pins_dbm.is_empty() {
        return Err(Error::Empty("input power range is empty"));
    }
    pins_dbm
        .iter()
        .map(|&pin| {
            let response = two_tone_response(amp, &TwoToneSpec { tone_power_dbm: pin, ..*spec })?;
            Ok(TwoToneRow {
                pin_dbm: pin,
                gain_db: single_tone_gain_db(amp, pin),
                response,
            })
        })
        .collect()
}

/// CSV with columns `Pin,gain,P_fund,P_IM3,P_IM5,IMD3,IMD5`; absent
/// products are left empty.
pub fn two_tone_csv(rows: &[TwoToneRow]) -> String {
    let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
    let mut out = String::from("Pin,gain,P_fund,P_IM3,P_IM5,IMD3,IMD5\n");
    for r in rows {
        let t = &r.response;
        out.push_str(&format!(
            "{:.6},{:.6},{},{},{},{},{}\n",
            r.pin_dbm,
            r.gain_db,
            opt(t.fundamental_dbm),
            opt(t.im3_dbm),
            opt(t.im5_dbm),
            opt(t.imd3_db),
            opt(t.imd5_db)
        ));
    }
    out
}

/// Large-signal gain [dB] from the first-harmonic output of `y(A cos ωt)`.
pub fn single_tone_gain_db(amp: &PolynomialAmp, pin_dbm: f64) -> f64 {
    let a = dbm_to_amplitude(pin_dbm, amp.z0);
    let fund: f64 = amp
        .coefficients()
        .iter()
        .map(|&(n, c)| c * a.powi(n as i32 - 1) * single_tone_coefficient(n, 1))
        .sum();
    20.0 * fund.abs().log10()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompressionCurve {
    /// `(Pin [dBm], gain [dB])`
    pub points: Vec<(f64, f64)>,
    pub small_signal_gain_db: f64,
    /// Input power at 1 dB compression, when the range brackets it.
    pub p1db_dbm: Option<f64>,
}

pub fn compression_curve(amp: &PolynomialAmp, pins_dbm: &[f64]) -> Result<CompressionCurve> {
    amp.validate()?;
    if pins_dbm.is_empty() {
        return Err(Error::Empty("input power range is empty"));
    }
    let g0 = amp.small_signal_gain_db();
    let points: Vec<(f64, f64)> = pins_dbm.iter().map(|&p| (p, single_tone_gain_db(amp, p))).collect();
    let deficit = |p: f64| g0 - single_tone_gain_db(amp, p) - 1.0;
    let p1db = points.windows(2).find_map(|w| {
        let (lo, hi) = (w[0].0, w[1].0);
        if deficit(lo) < 0.0 && deficit(hi) >= 0.0 {
            Some(bisect(deficit, lo, hi))
        } else {
            None
        }
    });
    Ok(CompressionCurve {
        points,
        small_signal_gain_db: g0,
        p1db_dbm: p1db,
    })
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-12 {
            break;
        }
    }
    0.5 * (lo + hi)
}
