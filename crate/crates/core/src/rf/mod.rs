//! Classical two-port machinery: records, Touchstone I/O, stability,
//! mismatch noise figure and the nodal solution of the small-signal model.

mod nodal;
mod noise;
mod stability;
mod touchstone;

pub use nodal::{nodal_transfer, sparams_of_model, ModelSweep, NodalTransfer};
pub use noise::{
    db_to_linear, friis_cascade, linear_to_db, nf_from_match, nf_of_temperature, noise_factor_from_match,
    noise_temperature, NfVariant, NoiseParameters, T0_KELVIN,
};
pub use stability::{rollett_k, StabilityReport};
pub use touchstone::{parse_touchstone, write_touchstone, NoisePoint, Touchstone};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, Result};

/// S-parameters of a two-port at one frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoPortRecord {
    pub freq_hz: f64,
    pub s11: Complex64,
    pub s12: Complex64,
    pub s21: Complex64,
    pub s22: Complex64,
    /// Reference impedance [Ω].
    pub z0: f64,
}

impl TwoPortRecord {
    pub fn new(freq_hz: f64, s11: Complex64, s12: Complex64, s21: Complex64, s22: Complex64) -> Self {
        Self { freq_hz, s11, s12, s21, s22, z0: 50.0 }
    }

    pub fn validate(&self) -> Result<()> {
        require_positive("frequency", self.freq_hz)?;
        require_positive("z0", self.z0)
    }

    pub fn s21_db(&self) -> f64 {
        20.0 * self.s21.norm().log10()
    }

    /// Transducer gain with source reflection `gamma_s` and a matched load.
    pub fn transducer_gain(&self, gamma_s: Complex64) -> f64 {
        let num = self.s21.norm_sqr() * (1.0 - gamma_s.norm_sqr());
        num / (Complex64::new(1.0, 0.0) - self.s11 * gamma_s).norm_sqr()
    }
}

/// A source (or load) reflection coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReflectionCoefficient(pub Complex64);

impl ReflectionCoefficient {
    pub fn new(re: f64, im: f64) -> Self {
        Self(Complex64::new(re, im))
    }

    pub fn from_polar(mag: f64, angle_deg: f64) -> Self {
        Self(Complex64::from_polar(mag, angle_deg.to_radians()))
    }

    /// Reflection of impedance `z` against a real reference `z0`.
    pub fn from_impedance(z: Complex64, z0: f64) -> Self {
        Self((z - z0) / (z + z0))
    }

    pub fn magnitude(&self) -> f64 {
        self.0.norm()
    }

    pub fn is_passive(&self) -> bool {
        self.0.norm() < 1.0
    }
}
