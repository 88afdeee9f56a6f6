//! Frequency-domain nodal solution of the three-node small-signal model.
//!
//! Each node has its shunt capacitor and inductor to ground (`C_gs1/L_g1`,
//! `C_gs2/L_d2`, `C_ds3/L_d3`). `C_gd1` couples nodes 1–2 and `C_gd2`
//! couples nodes 2–3. The transistors are voltage-controlled current
//! sources in the common-source orientation: `g_m1·V_1` is drawn from
//! node 2 to ground and `g_m2·V_2` from node 3 to ground. The input
//! reaches node 1 through `C_in`; the output current is the current in
//! `L_d3`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{ReflectionCoefficient, TwoPortRecord};
use crate::circuit::SmallSignalModel;
use crate::error::{require_positive, Error, Result};
use crate::linalg::solve_complex;

const PIVOT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodalTransfer {
    /// `V_3 / V_source` for an ideal source behind `C_in`.
    pub voltage_gain: Complex64,
    /// `I_out / V_1`, the classical circuit transconductance [S].
    pub transconductance: Complex64,
    /// Input reflection against 50 Ω.
    pub gamma_in: Complex64,
    pub node_voltages: [Complex64; 3],
}

fn j() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// Admittance matrix of the three internal nodes, without the input
/// capacitor's connection to the outside world (its shunt part to the
/// source is added by the callers).
fn internal_admittance(model: &SmallSignalModel, omega: f64) -> Vec<Vec<Complex64>> {
    let jw = j() * omega;
    let tank = |c: f64, l: f64| jw * c + 1.0 / (jw * l);
    let y1 = tank(model.c_gs1, model.l_g1);
    let y2 = tank(model.c_gs2, model.l_d2);
    let y3 = tank(model.c_ds3, model.l_d3);
    let g12 = jw * model.c_gd1;
    let g23 = jw * model.c_gd2;
    let gm1 = Complex64::new(model.g_m1, 0.0);
    let gm2 = Complex64::new(model.g_m2, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    vec![
        vec![y1 + g12, -g12, zero],
        vec![-g12 + gm1, y2 + g12 + g23, -g23],
        vec![zero, -g23 + gm2, y3 + g23],
    ]
}

pub fn nodal_transfer(model: &SmallSignalModel, omega: f64) -> Result<NodalTransfer> {
    model.validate()?;
    require_positive("omega", omega)?;
    let jw = j() * omega;
    let y_in = jw * model.c_in;
    let mut y = internal_admittance(model, omega);
    y[0][0] += y_in;
    let source = Complex64::new(1.0, 0.0);
    let rhs = vec![y_in * source, Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)];
    let freq_hz = omega / (2.0 * std::f64::consts::PI);
    let v = solve_complex(y, rhs, PIVOT_TOL).ok_or(Error::SingularFrequency { freq_hz })?;

    let i_out = v[2] / (jw * model.l_d3);
    let transconductance = if v[0].norm() > 0.0 { i_out / v[0] } else { Complex64::new(0.0, 0.0) };
    let i_source = y_in * (source - v[0]);
    let gamma_in = if i_source.norm() > 0.0 {
        ReflectionCoefficient::from_impedance(source / i_source, 50.0).0
    } else {
        Complex64::new(1.0, 0.0)
    };
    Ok(NodalTransfer {
        voltage_gain: v[2] / source,
        transconductance,
        gamma_in,
        node_voltages: [v[0], v[1], v[2]],
    })
}

/// S-parameters of the model over a frequency grid. Frequencies at which
/// the terminated system is singular are listed in `singular`; the others
/// are still computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSweep {
    pub records: Vec<TwoPortRecord>,
    pub singular: Vec<f64>,
}

/// Port 1 is the source side of `C_in`, port 2 is node 3. Each column of S
/// comes from one solve with the other port terminated in `z0`.
pub fn sparams_of_model(model: &SmallSignalModel, freqs_hz: &[f64], z0: f64) -> Result<ModelSweep> {
    model.validate()?;
    require_positive("z0", z0)?;
    let mut records = Vec::with_capacity(freqs_hz.len());
    let mut singular = Vec::new();
    for &f in freqs_hz {
        require_positive("frequency", f)?;
        match two_port_at(model, f, z0) {
            Some(rec) => records.push(rec),
            None => singular.push(f),
        }
    }
    Ok(ModelSweep { records, singular })
}

fn two_port_at(model: &SmallSignalModel, freq_hz: f64, z0: f64) -> Option<TwoPortRecord> {
    let omega = 2.0 * std::f64::consts::PI * freq_hz;
    let y_in = j() * omega * model.c_in;
    let g0 = Complex64::new(1.0 / z0, 0.0);
    let zero = Complex64::new(0.0, 0.0);

    // Node 0 is the external input terminal, nodes 1..3 the model.
    let inner = internal_admittance(model, omega);
    let mut y = vec![vec![zero; 4]; 4];
    for r in 0..3 {
        for c in 0..3 {
            y[r + 1][c + 1] = inner[r][c];
        }
    }
    y[0][0] += y_in + g0;
    y[0][1] -= y_in;
    y[1][0] -= y_in;
    y[1][1] += y_in;
    y[3][3] += g0;

    // A 2 V source behind z0 launches a 1 V incident wave.
    let drive = Complex64::new(2.0, 0.0) * g0;
    let mut rhs1 = vec![zero; 4];
    rhs1[0] = drive;
    let v1 = solve_complex(y.clone(), rhs1, PIVOT_TOL)?;
    let mut rhs2 = vec![zero; 4];
    rhs2[3] = drive;
    let v2 = solve_complex(y, rhs2, PIVOT_TOL)?;
    let one = Complex64::new(1.0, 0.0);
    Some(TwoPortRecord {
        freq_hz,
        s11: v1[0] - one,
        s21: v1[3],
        s12: v2[0],
        s22: v2[3] - one,
        z0,
    })
}
