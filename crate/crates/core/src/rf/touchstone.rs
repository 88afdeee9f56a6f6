//! Touchstone v1 two-port (`.s2p`) reader and writer.
//!
//! Data rows carry the frequency followed by the pairs for
//! `S11 S21 S12 S22`, in the order the format defines. An optional noise
//! block follows, one row per frequency:
//! `freq  NFmin[dB]  |Γopt|  ∠Γopt[deg]  r_n`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::noise::{db_to_linear, linear_to_db, NoiseParameters};
use super::TwoPortRecord;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoisePoint {
    pub freq_hz: f64,
    pub params: NoiseParameters,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Touchstone {
    pub z0: f64,
    pub records: Vec<TwoPortRecord>,
    pub noise: Vec<NoisePoint>,
}

impl Touchstone {
    /// Noise parameters at exactly `freq_hz`, if present.
    pub fn noise_at(&self, freq_hz: f64) -> Option<&NoiseParameters> {
        self.noise.iter().find(|p| p.freq_hz == freq_hz).map(|p| &p.params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Format {
    Ma,
    Db,
    Ri,
}

#[derive(Debug, Clone, Copy)]
struct Options {
    freq_scale: f64,
    format: Format,
    z0: f64,
}

impl Default for Options {
    fn default() -> Self {
        Self {
            freq_scale: 1e9,
            format: Format::Ma,
            z0: 50.0,
        }
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_options(body: &str, line: usize) -> Result<Options> {
    let mut opts = Options::default();
    let mut tokens = body.split_whitespace();
    while let Some(tok) = tokens.next() {
        match tok.to_ascii_uppercase().as_str() {
            "HZ" => opts.freq_scale = 1.0,
            "KHZ" => opts.freq_scale = 1e3,
            "MHZ" => opts.freq_scale = 1e6,
            "GHZ" => opts.freq_scale = 1e9,
            "S" => {}
            "Y" | "Z" | "H" | "G" => {
                return Err(parse_error(line, format!("parameter type `{tok}` is not supported, only S")));
            }
            "MA" => opts.format = Format::Ma,
            "DB" => opts.format = Format::Db,
            "RI" => opts.format = Format::Ri,
            "R" => {
                let value = tokens
                    .next()
                    .ok_or_else(|| parse_error(line, "option `R` needs a reference impedance"))?;
                opts.z0 = value
                    .parse::<f64>()
                    .ok()
                    .filter(|z| z.is_finite() && *z > 0.0)
                    .ok_or_else(|| parse_error(line, format!("invalid reference impedance `{value}`")))?;
            }
            _ => return Err(parse_error(line, format!("unrecognised option `{tok}`"))),
        }
    }
    Ok(opts)
}

fn pair(a: f64, b: f64, format: Format) -> Complex64 {
    match format {
        Format::Ri => Complex64::new(a, b),
        Format::Ma => Complex64::from_polar(a, b.to_radians()),
        Format::Db => Complex64::from_polar(10f64.powf(a / 20.0), b.to_radians()),
    }
}

pub fn parse_touchstone(text: &str) -> Result<Touchstone> {
    let mut opts: Option<Options> = None;
    let mut records: Vec<TwoPortRecord> = Vec::new();
    let mut noise: Vec<NoisePoint> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('!').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(body) = content.strip_prefix('#') {
            if opts.is_some() {
                return Err(parse_error(line, "duplicate option line"));
            }
            if !records.is_empty() || !noise.is_empty() {
                return Err(parse_error(line, "option line after data"));
            }
            opts = Some(parse_options(body, line)?);
            continue;
        }
        let o = *opts.get_or_insert_with(Options::default);
        let values = content
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| parse_error(line, format!("not a number: `{t}`"))))
            .collect::<Result<Vec<f64>>>()?;
        if values.iter().any(|v| !v.is_finite()) {
            return Err(parse_error(line, "non-finite value"));
        }
        let freq = values[0] * o.freq_scale;
        if !(freq > 0.0) {
            return Err(parse_error(line, format!("frequency must be positive, got {}", values[0])));
        }
        match values.len() {
            9 => {
                if !noise.is_empty() {
                    return Err(parse_error(line, "S-parameter row after the noise block"));
                }
                if let Some(last) = records.last() {
                    if freq <= last.freq_hz {
                        return Err(parse_error(line, "frequencies must be strictly increasing"));
                    }
                }
                let v = &values;
                records.push(TwoPortRecord {
                    freq_hz: freq,
                    s11: pair(v[1], v[2], o.format),
                    s21: pair(v[3], v[4], o.format),
                    s12: pair(v[5], v[6], o.format),
                    s22: pair(v[7], v[8], o.format),
                    z0: o.z0,
                });
            }
            5 => {
                if let Some(last) = noise.last() {
                    if freq <= last.freq_hz {
                        return Err(parse_error(line, "noise frequencies must be strictly increasing"));
                    }
                }
                let params = NoiseParameters::new(
                    db_to_linear(values[1]),
                    values[4],
                    Complex64::from_polar(values[2], values[3].to_radians()),
                )
                .map_err(|e| parse_error(line, e.to_string()))?;
                noise.push(NoisePoint { freq_hz: freq, params });
            }
            n => {
                return Err(parse_error(
                    line,
                    format!("expected 9 columns (S-parameters) or 5 (noise), found {n}"),
                ));
            }
        }
    }
    if records.is_empty() {
        return Err(Error::Empty("touchstone input has no S-parameter rows"));
    }
    Ok(Touchstone {
        z0: opts.unwrap_or_default().z0,
        records,
        noise,
    })
}

/// Emits canonical `Hz S RI` text. Numbers use the shortest representation
/// that parses back to the same `f64`.
pub fn write_touchstone(ts: &Touchstone) -> Result<String> {
    if ts.records.is_empty() {
        return Err(Error::Empty("cannot write touchstone without records"));
    }
    if !(ts.z0 > 0.0 && ts.z0.is_finite()) {
        return Err(Error::invalid("z0", format!("{} must be > 0", ts.z0)));
    }
    for w in ts.records.windows(2) {
        if w[1].freq_hz <= w[0].freq_hz {
            return Err(Error::invalid("records", "frequencies must be strictly increasing"));
        }
    }
    for w in ts.noise.windows(2) {
        if w[1].freq_hz <= w[0].freq_hz {
            return Err(Error::invalid("noise", "frequencies must be strictly increasing"));
        }
    }
    if let Some(r) = ts.records.iter().find(|r| r.z0 != ts.z0) {
        return Err(Error::invalid(
            "z0",
            format!("record at {} Hz uses {} Ω, file uses {} Ω", r.freq_hz, r.z0, ts.z0),
        ));
    }
    let mut out = String::from("! two-port S-parameters, real/imaginary\n");
    out.push_str(&format!("# Hz S RI R {}\n", ts.z0));
    for r in &ts.records {
        r.validate()?;
        out.push_str(&format!(
            "{} {} {} {} {} {} {} {} {}\n",
            r.freq_hz, r.s11.re, r.s11.im, r.s21.re, r.s21.im, r.s12.re, r.s12.im, r.s22.re, r.s22.im
        ));
    }
    if !ts.noise.is_empty() {
        out.push_str("! noise parameters: freq NFmin[dB] |Gopt| ang(Gopt)[deg] rn\n");
        for p in &ts.noise {
            let g = p.params.gamma_opt;
            out.push_str(&format!(
                "{} {} {} {} {}\n",
                p.freq_hz,
                linear_to_db(p.params.f_min),
                g.norm(),
                g.arg().to_degrees(),
                p.params.r_n
            ));
        }
    }
    Ok(out)
}
