//! Thermal-state fluctuations of the input node voltage and output current,
//! and their ratio, the transconductance fluctuation `ΔG_m²`.
//!
//! Each node is treated as a harmonic oscillator with impedance `Z_i` and
//! mean photon number `n_i`. With ħ = 1 a thermal state has zero means and
//! `⟨φ²⟩ = Z(2n+1)/2`, `⟨Q²⟩ = (2n+1)/(2Z)`, so every variance below is a
//! weighted sum of those two quantities.

use serde::{Deserialize, Serialize};

use crate::circuit::{inverse_for, InverseCapacitanceMatrix, SmallSignalModel};
use crate::error::{require_non_negative, require_positive, Error, Result};

/// Per-node photon numbers and oscillator impedances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorSpec {
    pub n: [f64; 3],
    /// Oscillator impedances [Ω].
    pub z: [f64; 3],
}

impl OscillatorSpec {
    pub fn new(n: [f64; 3], z: [f64; 3]) -> Result<Self> {
        let spec = Self { n, z };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        for &n in &self.n {
            require_non_negative("n", n)?;
        }
        for &z in &self.z {
            require_positive("z", z)?;
        }
        Ok(())
    }

    /// `2n_i + 1`, the thermal enhancement of each mode.
    pub fn occupation_factors(&self) -> [f64; 3] {
        self.n.map(|n| 2.0 * n + 1.0)
    }
}

/// Photon numbers used for the published transconductance landscape.
pub const REFERENCE_PHOTON_NUMBERS: [f64; 3] = [0.1, 0.56, 76.0];

/// Rule mapping a model to the three oscillator impedances.
pub trait ImpedanceRule {
    fn impedances(&self, model: &SmallSignalModel, inv: &InverseCapacitanceMatrix) -> [f64; 3];
}

/// `Z_i = sqrt(L_i · C_ii)` with `C_ii` the inverse-capacitance diagonal.
/// This is the default.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct InverseDiagonalRule;

impl ImpedanceRule for InverseDiagonalRule {
    fn impedances(&self, model: &SmallSignalModel, inv: &InverseCapacitanceMatrix) -> [f64; 3] {
        let l = model.inductances();
        let c = inv.diagonals();
        [0, 1, 2].map(|i| (l[i] * c[i]).sqrt())
    }
}

/// `Z_i = ω L_i` at a fixed analysis frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InductiveReactanceRule {
    pub freq_hz: f64,
}

impl ImpedanceRule for InductiveReactanceRule {
    fn impedances(&self, model: &SmallSignalModel, _inv: &InverseCapacitanceMatrix) -> [f64; 3] {
        let w = 2.0 * std::f64::consts::PI * self.freq_hz;
        model.inductances().map(|l| w * l)
    }
}

/// Impedances fixed independently of the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedImpedances(pub [f64; 3]);

impl ImpedanceRule for FixedImpedances {
    fn impedances(&self, _model: &SmallSignalModel, _inv: &InverseCapacitanceMatrix) -> [f64; 3] {
        self.0
    }
}

/// Impedances under the default rule.
pub fn derive_impedances(model: &SmallSignalModel, inv: &InverseCapacitanceMatrix) -> Result<[f64; 3]> {
    model.validate()?;
    let z = InverseDiagonalRule.impedances(model, inv);
    for v in z {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::Degenerate(format!("oscillator impedance {v} is not positive")));
        }
    }
    Ok(z)
}

/// `(⟨φ²⟩, ⟨Q²⟩)` of a thermal oscillator, ħ = 1.
pub fn thermal_variances(n: f64, z: f64) -> Result<(f64, f64)> {
    require_non_negative("n", n)?;
    require_positive("z", z)?;
    let occ = 2.0 * n + 1.0;
    Ok((z * occ / 2.0, occ / (2.0 * z)))
}

fn mode_variances(spec: &OscillatorSpec) -> Result<([f64; 3], [f64; 3])> {
    spec.validate()?;
    let mut var_phi = [0.0; 3];
    let mut var_q = [0.0; 3];
    for i in 0..3 {
        (var_phi[i], var_q[i]) = thermal_variances(spec.n[i], spec.z[i])?;
    }
    Ok((var_phi, var_q))
}

/// `ΔV_in²`. The input voltage is
/// `C_11 Q_1 + (C_12+C_21)/2 Q_2 + (C_13+C_31)/2 Q_3 + C_11 g_m1 φ_2 + C_12 g_m2 φ_3 + const`,
/// and the modes are uncorrelated, so the variance is the weighted sum of
/// the mode variances. The drive term is constant and drops out.
pub fn input_voltage_variance(
    model: &SmallSignalModel,
    inv: &InverseCapacitanceMatrix,
    spec: &OscillatorSpec,
) -> Result<f64> {
    model.validate()?;
    let (var_phi, var_q) = mode_variances(spec)?;
    let c = |i, j| inv.get(i, j);
    let q_weights = [c(0, 0), (c(0, 1) + c(1, 0)) / 2.0, (c(0, 2) + c(2, 0)) / 2.0];
    let phi_weights = [0.0, c(0, 0) * model.g_m1, c(0, 1) * model.g_m2];
    Ok((0..3)
        .map(|i| q_weights[i].powi(2) * var_q[i] + phi_weights[i].powi(2) * var_phi[i])
        .sum())
}

/// `ΔI_out²` for `I_out = −g_m2 (C_12 Q_1 + C_22 Q_2 + C_32 Q_3) − φ_3/L_d3`.
pub fn output_current_variance(
    model: &SmallSignalModel,
    inv: &InverseCapacitanceMatrix,
    spec: &OscillatorSpec,
) -> Result<f64> {
    model.validate()?;
    let (var_phi, var_q) = mode_variances(spec)?;
    let g2 = model.g_m2;
    let q_weights = [inv.get(0, 1) * g2, inv.get(1, 1) * g2, inv.get(2, 1) * g2];
    let phi_weights = [0.0, 0.0, 1.0 / model.l_d3];
    Ok((0..3)
        .map(|i| q_weights[i].powi(2) * var_q[i] + phi_weights[i].powi(2) * var_phi[i])
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluctuationResult {
    /// Output current variance [A²].
    pub delta_iout2: f64,
    /// Input voltage variance [V²].
    pub delta_vin2: f64,
    /// `ΔI_out² / ΔV_in²` [S²].
    pub delta_gm2: f64,
}

pub fn transconductance_fluctuation(
    model: &SmallSignalModel,
    inv: &InverseCapacitanceMatrix,
    spec: &OscillatorSpec,
) -> Result<FluctuationResult> {
    let delta_iout2 = output_current_variance(model, inv, spec)?;
    let delta_vin2 = input_voltage_variance(model, inv, spec)?;
    if !(delta_vin2 > 0.0) {
        return Err(Error::Degenerate("input voltage variance vanished".into()));
    }
    Ok(FluctuationResult {
        delta_iout2,
        delta_vin2,
        delta_gm2: delta_iout2 / delta_vin2,
    })
}

/// How the inverse capacitance matrix is obtained at each grid point.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InverseRule {
    /// Use the supplied inverse for every point.
    #[default]
    Fixed,
    /// Rebuild and invert the capacitance matrix from the model at each
    /// point. The matrix has no `g_m` dependence, so this only matters when
    /// studying sensitivity to that assumption.
    PerPoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub g_m1: f64,
    pub g_m2: f64,
    #[serde(flatten)]
    pub result: FluctuationResult,
}

/// `ΔG_m²` over a rectangular `(g_m1, g_m2)` grid, stored row-major with
/// `g_m1` as the row index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GmSurface {
    pub g_m1: Vec<f64>,
    pub g_m2: Vec<f64>,
    pub points: Vec<SweepPoint>,
    /// Grid indices `(i, j)` of the maximum `ΔG_m²`.
    pub argmax: (usize, usize),
    pub argmax_g_m1: f64,
    pub argmax_g_m2: f64,
    pub max_delta_gm2: f64,
}

impl GmSurface {
    pub fn at(&self, i: usize, j: usize) -> &SweepPoint {
        &self.points[i * self.g_m2.len() + j]
    }

    /// CSV with columns `g_m1,g_m2,delta_Iout2,delta_Vin2,delta_Gm2`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("g_m1,g_m2,delta_Iout2,delta_Vin2,delta_Gm2\n");
        for p in &self.points {
            out.push_str(&format!(
                "{:e},{:e},{:e},{:e},{:e}\n",
                p.g_m1, p.g_m2, p.result.delta_iout2, p.result.delta_vin2, p.result.delta_gm2
            ));
        }
        out
    }
}

pub fn gm_sweep(
    model: &SmallSignalModel,
    inv: &InverseCapacitanceMatrix,
    rule: InverseRule,
    spec: &OscillatorSpec,
    g_m1: &[f64],
    g_m2: &[f64],
) -> Result<GmSurface> {
    if g_m1.is_empty() || g_m2.is_empty() {
        return Err(Error::Empty("g_m sweep grids must be non-empty"));
    }
    for &g in g_m1.iter().chain(g_m2) {
        require_non_negative("g_m grid", g)?;
    }
    let mut points = Vec::with_capacity(g_m1.len() * g_m2.len());
    let mut best = (0, 0, f64::NEG_INFINITY);
    for (i, &g1) in g_m1.iter().enumerate() {
        for (j, &g2) in g_m2.iter().enumerate() {
            let m = SmallSignalModel { g_m1: g1, g_m2: g2, ..*model };
            let result = match rule {
                InverseRule::Fixed => transconductance_fluctuation(&m, inv, spec)?,
                InverseRule::PerPoint => transconductance_fluctuation(&m, &inverse_for(&m)?, spec)?,
            };
            if result.delta_gm2 > best.2 {
                best = (i, j, result.delta_gm2);
            }
            points.push(SweepPoint { g_m1: g1, g_m2: g2, result });
        }
    }
    Ok(GmSurface {
        g_m1: g_m1.to_vec(),
        g_m2: g_m2.to_vec(),
        points,
        argmax: (best.0, best.1),
        argmax_g_m1: g_m1[best.0],
        argmax_g_m2: g_m2[best.1],
        max_delta_gm2: best.2,
    })
}

/// `n` evenly spaced values from `start` to `stop` inclusive.
pub fn linear_grid(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                start * (1.0 - t) + stop * t
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::inverse_for;
    use approx::assert_relative_eq;

    fn reference() -> (SmallSignalModel, InverseCapacitanceMatrix, OscillatorSpec) {
        let model = SmallSignalModel::reference_design(1e-12, 1e-12, 0.02, 0.05);
        let inv = inverse_for(&model).unwrap();
        let z = derive_impedances(&model, &inv).unwrap();
        (model, inv, OscillatorSpec::new(REFERENCE_PHOTON_NUMBERS, z).unwrap())
    }

    #[test]
    fn impedance_of_unit_lc() {
        let inv = InverseCapacitanceMatrix {
            entries: [[1e12, 0.0, 0.0], [0.0, 1e12, 0.0], [0.0, 0.0, 1e12]],
        };
        let mut model = SmallSignalModel::reference_design(1e-12, 1e-12, 0.0, 0.0);
        model.l_g1 = 1e-9;
        let z = derive_impedances(&model, &inv).unwrap();
        assert_relative_eq!(z[0], 31.622776601683793, max_relative = 1e-14);
        model.l_g1 = 2e-9;
        let z2 = derive_impedances(&model, &inv).unwrap();
        assert_relative_eq!(z2[0] / z[0], 2f64.sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn thermal_variance_values() {
        assert_eq!(thermal_variances(0.0, 1.0).unwrap(), (0.5, 0.5));
        assert_eq!(thermal_variances(0.5, 2.0).unwrap(), (2.0, 0.5));
        assert!(thermal_variances(-0.1, 1.0).is_err());
        assert!(thermal_variances(0.0, 0.0).is_err());
    }

    #[test]
    fn decoupled_closed_form() {
        let mut model = SmallSignalModel::reference_design(1e-12, 1e-12, 0.0, 0.0);
        model.c_gd1 = 0.0;
        model.c_gd2 = 0.0;
        let inv = inverse_for(&model).unwrap();
        let spec = OscillatorSpec::new([0.3, 1.0, 2.0], [10.0, 20.0, 5.0]).unwrap();
        let r = transconductance_fluctuation(&model, &inv, &spec).unwrap();
        let num = spec.z[2] * (2.0 * 2.0 + 1.0) / (2.0 * model.l_d3 * model.l_d3);
        let den = inv.get(0, 0).powi(2) * (2.0 * 0.3 + 1.0) / (2.0 * spec.z[0]);
        assert_relative_eq!(r.delta_iout2, num, max_relative = 1e-14);
        assert_relative_eq!(r.delta_vin2, den, max_relative = 1e-14);
        assert_relative_eq!(r.delta_gm2, num / den, max_relative = 1e-14);
    }

    #[test]
    fn ratio_is_exact_quotient() {
        let (model, inv, spec) = reference();
        let r = transconductance_fluctuation(&model, &inv, &spec).unwrap();
        assert_eq!(r.delta_gm2, r.delta_iout2 / r.delta_vin2);
    }

    #[test]
    fn output_variance_ignores_g_m1() {
        let (model, inv, spec) = reference();
        let a = output_current_variance(&model, &inv, &spec).unwrap();
        let b = output_current_variance(&SmallSignalModel { g_m1: 0.09, ..model }, &inv, &spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn occupation_rescaling_leaves_ratio_unchanged() {
        let (model, inv, spec) = reference();
        let base = transconductance_fluctuation(&model, &inv, &spec).unwrap();
        let c = 3.7;
        let scaled = OscillatorSpec {
            n: spec.n.map(|n| (c * (2.0 * n + 1.0) - 1.0) / 2.0),
            ..spec
        };
        let r = transconductance_fluctuation(&model, &inv, &scaled).unwrap();
        assert_relative_eq!(r.delta_gm2, base.delta_gm2, max_relative = 1e-13);
    }

    #[test]
    fn single_point_sweep_matches_direct_evaluation() {
        let (model, inv, spec) = reference();
        let s = gm_sweep(&model, &inv, InverseRule::Fixed, &spec, &[0.02], &[0.05]).unwrap();
        let direct = transconductance_fluctuation(&model, &inv, &spec).unwrap();
        assert_eq!(s.points.len(), 1);
        assert_eq!(s.points[0].result, direct);
        assert_eq!(s.argmax, (0, 0));
    }

    #[test]
    fn per_point_inverse_agrees_with_fixed() {
        let (model, inv, spec) = reference();
        let grid = linear_grid(1e-3, 0.1, 5);
        let a = gm_sweep(&model, &inv, InverseRule::Fixed, &spec, &grid, &grid).unwrap();
        let b = gm_sweep(&model, &inv, InverseRule::PerPoint, &spec, &grid, &grid).unwrap();
        for (p, q) in a.points.iter().zip(&b.points) {
            assert_relative_eq!(p.result.delta_gm2, q.result.delta_gm2, max_relative = 1e-12);
        }
    }

    #[test]
    fn empty_grid_is_rejected() {
        let (model, inv, spec) = reference();
        assert!(gm_sweep(&model, &inv, InverseRule::Fixed, &spec, &[], &[0.1]).is_err());
    }

    #[test]
    fn csv_header_and_rows() {
        let (model, inv, spec) = reference();
        let s = gm_sweep(&model, &inv, InverseRule::Fixed, &spec, &[0.01, 0.02], &[0.03]).unwrap();
        let csv = s.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines[0], "g_m1,g_m2,delta_Iout2,delta_Vin2,delta_Gm2");
        assert_eq!(lines.len(), 3);
    }
}
