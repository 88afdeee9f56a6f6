use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::ReflectionCoefficient;
use crate::error::{require_non_negative, Error, Result};

/// Standard reference temperature for noise figure [K].
pub const T0_KELVIN: f64 = 290.0;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Device noise parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParameters {
    /// Minimum noise factor, linear.
    pub f_min: f64,
    /// Equivalent noise resistance normalised to the reference impedance.
    pub r_n: f64,
    pub gamma_opt: Complex64,
}

impl NoiseParameters {
    pub fn new(f_min: f64, r_n: f64, gamma_opt: Complex64) -> Result<Self> {
        let np = Self { f_min, r_n, gamma_opt };
        np.validate()?;
        Ok(np)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_min.is_finite() && self.f_min >= 1.0) {
            return Err(Error::invalid("f_min", format!("noise factor must be >= 1, got {}", self.f_min)));
        }
        require_non_negative("r_n", self.r_n)?;
        if !(self.gamma_opt.norm() < 1.0) {
            return Err(Error::invalid("gamma_opt", format!("|Γ_opt| = {} must be < 1", self.gamma_opt.norm())));
        }
        Ok(())
    }

    pub fn nf_min_db(&self) -> f64 {
        linear_to_db(self.f_min)
    }
}

/// Denominator convention of the mismatch noise formula.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NfVariant {
    /// `(1 − |Γ_s|²)(1 + |Γ_opt|²)`
    #[default]
    Paper,
    /// `(1 − |Γ_s|²)·|1 + Γ_opt|²`
    Textbook,
}

impl std::str::FromStr for NfVariant {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "paper" => Ok(NfVariant::Paper),
            "textbook" => Ok(NfVariant::Textbook),
            other => Err(format!("unknown variant `{other}` (expected paper|textbook)")),
        }
    }
}

/// Noise factor (linear) for source reflection `gamma_s`:
/// `F = F_min + 4 r_n |Γ_s − Γ_opt|² / D`.
pub fn noise_factor_from_match(np: &NoiseParameters, gamma_s: ReflectionCoefficient, variant: NfVariant) -> Result<f64> {
    let gs = gamma_s.0;
    let mag = gs.norm();
    if !(mag < 1.0) {
        return Err(Error::OutsideUnitDisk { magnitude: mag });
    }
    let go = np.gamma_opt;
    let d = match variant {
        NfVariant::Paper => (1.0 - gs.norm_sqr()) * (1.0 + go.norm_sqr()),
        NfVariant::Textbook => (1.0 - gs.norm_sqr()) * (Complex64::new(1.0, 0.0) + go).norm_sqr(),
    };
    Ok(np.f_min + 4.0 * np.r_n * (gs - go).norm_sqr() / d)
}

/// Noise figure [dB] for source reflection `gamma_s`.
pub fn nf_from_match(np: &NoiseParameters, gamma_s: ReflectionCoefficient, variant: NfVariant) -> Result<f64> {
    noise_factor_from_match(np, gamma_s, variant).map(linear_to_db)
}

/// Equivalent input noise temperature [K] of a noise figure [dB].
pub fn noise_temperature(nf_db: f64) -> f64 {
    T0_KELVIN * (db_to_linear(nf_db) - 1.0)
}

/// Noise figure [dB] of an equivalent input noise temperature [K].
pub fn nf_of_temperature(t_e: f64) -> f64 {
    linear_to_db(1.0 + t_e / T0_KELVIN)
}

/// Cascaded noise factor of `(F, G)` stages, both linear.
pub fn friis_cascade(stages: &[(f64, f64)]) -> Result<f64> {
    let (&(f1, g1), rest) = stages.split_first().ok_or(Error::Empty("friis cascade needs at least one stage"))?;
    for &(f, g) in stages {
        if !(f >= 1.0 && f.is_finite()) {
            return Err(Error::invalid("stage noise factor", format!("{f} < 1")));
        }
        if !(g > 0.0 && g.is_finite()) {
            return Err(Error::invalid("stage gain", format!("{g} must be > 0")));
        }
    }
    let mut total = f1;
    let mut gain = g1;
    for &(f, g) in rest {
        total += (f - 1.0) / gain;
        gain *= g;
    }
    Ok(total)
}
