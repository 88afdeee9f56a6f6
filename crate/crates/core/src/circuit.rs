//! Small-signal model of the two-stage amplifier and its canonical
//! (flux/charge) description.
//!
//! The topology is fixed: three nodes, each with a shunt capacitor and a
//! shunt inductor, coupled by the gate-drain capacitances, driven through
//! the input coupling capacitor and carrying two transconductance terms.
//! Node fluxes `φ_i` are the coordinates; `Q_i = ∂L/∂φ̇_i` are the
//! conjugate charges.
//!
//! Two Hamiltonians are available. [`HamiltonianMode::AsPrinted`] is the
//! closed form used by the fluctuation analysis, term for term.
//! [`HamiltonianMode::Derived`] is the exact Legendre transform of the
//! Lagrangian, which [`legendre_oracle`] reproduces numerically. The two
//! differ in the sign of the linear charge terms and in the terms quadratic
//! in the velocity offset; [`hamiltonian_discrepancy`] reports the
//! difference per term instead of picking one.

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_non_negative, require_positive, Error, Result};
use crate::linalg;

/// Component values of the three-node two-stage model, in SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmallSignalModel {
    /// Input coupling capacitor between source and node 1 [F].
    pub c_in: f64,
    pub c_gs1: f64,
    pub c_gd1: f64,
    pub c_gs2: f64,
    pub c_gd2: f64,
    pub c_ds3: f64,
    /// Gate inductance of the first stage [H].
    pub l_g1: f64,
    /// Interstage inductance [H].
    pub l_d2: f64,
    /// Output drain inductance [H].
    pub l_d3: f64,
    pub g_m1: f64,
    pub g_m2: f64,
    /// Drive amplitude [V].
    pub v_rf: f64,
    /// Input-referred noise term entering linearly in φ_1 [A²].
    pub i_n2: f64,
}

impl SmallSignalModel {
    /// Published component values (2.6 pF gate-source, 0.12 pF gate-drain,
    /// 1.1/2.2/0.1 nH). The coupling and output capacitors are not
    /// published and must be supplied.
    pub fn reference_design(c_in: f64, c_ds3: f64, g_m1: f64, g_m2: f64) -> Self {
        Self {
            c_in,
            c_gs1: 2.6e-12,
            c_gd1: 0.12e-12,
            c_gs2: 2.6e-12,
            c_gd2: 0.12e-12,
            c_ds3,
            l_g1: 1.1e-9,
            l_d2: 2.2e-9,
            l_d3: 0.1e-9,
            g_m1,
            g_m2,
            v_rf: 0.0,
            i_n2: 0.0,
        }
    }

    /// Shunt capacitors and inductors must be strictly positive. The coupling
    /// capacitors (`c_in`, `c_gd1`, `c_gd2`) may be zero, which disconnects
    /// the corresponding branch; the capacitance matrix stays positive
    /// definite either way.
    pub fn validate(&self) -> Result<()> {
        require_positive("c_gs1", self.c_gs1)?;
        require_positive("c_gs2", self.c_gs2)?;
        require_positive("c_ds3", self.c_ds3)?;
        require_non_negative("c_in", self.c_in)?;
        require_non_negative("c_gd1", self.c_gd1)?;
        require_non_negative("c_gd2", self.c_gd2)?;
        require_positive("l_g1", self.l_g1)?;
        require_positive("l_d2", self.l_d2)?;
        require_positive("l_d3", self.l_d3)?;
        require_non_negative("g_m1", self.g_m1)?;
        require_non_negative("g_m2", self.g_m2)?;
        require_finite("v_rf", self.v_rf)?;
        require_finite("i_n2", self.i_n2)?;
        Ok(())
    }

    /// Shunt inductances `[L_g1, L_d2, L_d3]` ordered by node.
    pub fn inductances(&self) -> [f64; 3] {
        [self.l_g1, self.l_d2, self.l_d3]
    }

    /// Node-diagonal capacitances `[C_1, C_2, C_3]`.
    pub fn node_capacitances(&self) -> [f64; 3] {
        [
            self.c_in + self.c_gs1 + self.c_gd1,
            self.c_gd2 + self.c_gs2 + self.c_gd1,
            self.c_ds3 + self.c_gd2,
        ]
    }

    /// Velocity-independent part of the conjugate charges:
    /// `Q = C·φ̇ + offset(φ)`. Row 2 carries `g_m2`, as forced by the
    /// `g_m2 φ̇_2 φ_3` term of the Lagrangian.
    pub fn charge_offset(&self, phi: &[f64; 3]) -> [f64; 3] {
        [-self.c_in * self.v_rf + self.g_m1 * phi[1], self.g_m2 * phi[2], 0.0]
    }
}

/// Symmetric node capacitance matrix [F].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CapacitanceMatrix {
    pub entries: [[f64; 3]; 3],
}

impl CapacitanceMatrix {
    pub fn diagonals(&self) -> [f64; 3] {
        [self.entries[0][0], self.entries[1][1], self.entries[2][2]]
    }

    /// Leading principal minors, in order of size.
    pub fn leading_minors(&self) -> [f64; 3] {
        let m = &self.entries;
        let d1 = m[0][0];
        let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        let d3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        [d1, d2, d3]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..3).all(|i| (0..3).all(|j| self.entries[i][j] == self.entries[j][i]))
    }
}

/// Inverse of the capacitance matrix [1/F]. These are the coefficients
/// `C_ij` weighting every term of the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InverseCapacitanceMatrix {
    pub entries: [[f64; 3]; 3],
}

impl InverseCapacitanceMatrix {
    /// Zero-based access: `get(0, 1)` is `C_12`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn diagonals(&self) -> [f64; 3] {
        [self.entries[0][0], self.entries[1][1], self.entries[2][2]]
    }

    fn apply(&self, v: &[f64; 3]) -> [f64; 3] {
        let m = &self.entries;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }
}

/// Canonical coordinates: node fluxes [V·s] and conjugate charges [C].
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CircuitState {
    pub phi: [f64; 3],
    pub q: [f64; 3],
}

impl CircuitState {
    pub fn validate(&self) -> Result<()> {
        for v in self.phi {
            require_finite("phi", v)?;
        }
        for v in self.q {
            require_finite("q", v)?;
        }
        Ok(())
    }
}

pub fn build_capacitance_matrix(model: &SmallSignalModel) -> Result<CapacitanceMatrix> {
    model.validate()?;
    let [c1, c2, c3] = model.node_capacitances();
    Ok(CapacitanceMatrix {
        entries: [
            [c1, -model.c_gd1, 0.0],
            [-model.c_gd1, c2, -model.c_gd2],
            [0.0, -model.c_gd2, c3],
        ],
    })
}

/// Inverts through a Cholesky factorisation, which doubles as the
/// positive-definiteness check. The result is symmetrised so that
/// `C_ij == C_ji` holds bit for bit.
pub fn invert_capacitance_matrix(m: &CapacitanceMatrix) -> Result<InverseCapacitanceMatrix> {
    let a = &m.entries;
    if !a.iter().flatten().all(|v| v.is_finite()) {
        return Err(Error::Degenerate("capacitance matrix has non-finite entries".into()));
    }
    if !m.is_symmetric() {
        return Err(Error::Degenerate("capacitance matrix is not symmetric".into()));
    }
    let scale = a.iter().flatten().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    let mut l = [[0.0_f64; 3]; 3];
    for i in 0..3 {
        for j in 0..=i {
            let s: f64 = (0..j).map(|k| l[i][k] * l[j][k]).sum();
            if i == j {
                let d = a[i][i] - s;
                if !(d > 1e-14 * scale) {
                    return Err(Error::Degenerate(format!(
                        "capacitance matrix is singular or not positive definite (pivot {i} = {d:e})"
                    )));
                }
                l[i][i] = d.sqrt();
            } else {
                l[i][j] = (a[i][j] - s) / l[j][j];
            }
        }
    }
    // L⁻¹ by forward substitution, then A⁻¹ = L⁻ᵀ L⁻¹.
    let mut linv = [[0.0_f64; 3]; 3];
    for col in 0..3 {
        for i in col..3 {
            let rhs = if i == col { 1.0 } else { 0.0 };
            let s: f64 = (col..i).map(|k| l[i][k] * linv[k][col]).sum();
            linv[i][col] = (rhs - s) / l[i][i];
        }
    }
    let mut inv = [[0.0_f64; 3]; 3];
    for i in 0..3 {
        for j in i..3 {
            let v: f64 = (j..3).map(|k| linv[k][i] * linv[k][j]).sum();
            inv[i][j] = v;
            inv[j][i] = v;
        }
    }
    Ok(InverseCapacitanceMatrix { entries: inv })
}

/// Convenience: validate, build and invert in one go.
pub fn inverse_for(model: &SmallSignalModel) -> Result<InverseCapacitanceMatrix> {
    invert_capacitance_matrix(&build_capacitance_matrix(model)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HamiltonianMode {
    /// The closed-form Hamiltonian behind the fluctuation formulas.
    AsPrinted,
    /// Exact Legendre transform of the Lagrangian.
    Derived,
}

/// Hamiltonian split into named contributions.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct HamiltonianTerms {
    /// `Σ C_ii Q_i²/2 + φ_i²/(2L_i)`
    pub oscillators: f64,
    /// `Σ_{i<j} (C_ij + C_ji)/2 · Q_i Q_j`
    pub capacitive_coupling: f64,
    /// Terms linear in `Q` and proportional to `g_m`.
    pub transconductance: f64,
    /// Terms linear in `Q` and proportional to `V_rf`.
    pub drive: f64,
    /// `−i_n² φ_1`
    pub noise: f64,
    /// `½ bᵀ C⁻¹ b` for the charge offset `b`; absent from the printed form.
    pub offset_quadratic: f64,
    /// `−C_in V_rf²/2`; absent from the printed form.
    pub drive_constant: f64,
}

impl HamiltonianTerms {
    pub fn total(&self) -> f64 {
        self.oscillators
            + self.capacitive_coupling
            + self.transconductance
            + self.drive
            + self.noise
            + self.offset_quadratic
            + self.drive_constant
    }

    fn named(&self) -> [(&'static str, f64); 7] {
        [
            ("oscillators", self.oscillators),
            ("capacitive_coupling", self.capacitive_coupling),
            ("transconductance", self.transconductance),
            ("drive", self.drive),
            ("noise", self.noise),
            ("offset_quadratic", self.offset_quadratic),
            ("drive_constant", self.drive_constant),
        ]
    }
}

pub fn hamiltonian_terms(
    model: &SmallSignalModel,
    inv: &InverseCapacitanceMatrix,
    state: &CircuitState,
    mode: HamiltonianMode,
) -> Result<HamiltonianTerms> {
    model.validate()?;
    state.validate()?;
    let c = |i: usize, j: usize| inv.get(i, j);
    let q = &state.q;
    let phi = &state.phi;
    let l = model.inductances();

    let oscillators: f64 = (0..3)
        .map(|i| c(i, i) * q[i] * q[i] / 2.0 + phi[i] * phi[i] / (2.0 * l[i]))
        .sum();
    let capacitive_coupling = (c(0, 1) + c(1, 0)) / 2.0 * q[0] * q[1]
        + (c(0, 2) + c(2, 0)) / 2.0 * q[0] * q[2]
        + (c(1, 2) + c(2, 1)) / 2.0 * q[1] * q[2];
    let noise = -model.i_n2 * phi[0];

    let terms = match mode {
        HamiltonianMode::AsPrinted => {
            let (g1, g2) = (model.g_m1, model.g_m2);
            let transconductance = c(0, 0) * g1 * q[0] * phi[1]
                + c(0, 1) * g2 * q[0] * phi[2]
                + c(1, 0) * g1 * q[1] * phi[1]
                + c(1, 1) * g2 * q[1] * phi[2]
                + c(2, 0) * g1 * q[2] * phi[1]
                + c(2, 1) * g2 * q[2] * phi[2];
            let cv = model.c_in * model.v_rf;
            let drive = -cv * (c(0, 0) * q[0] + c(1, 0) * q[1] + c(2, 0) * q[2]);
            HamiltonianTerms {
                oscillators,
                capacitive_coupling,
                transconductance,
                drive,
                noise,
                offset_quadratic: 0.0,
                drive_constant: 0.0,
            }
        }
        HamiltonianMode::Derived => {
            // H = ½(Q−b)ᵀK(Q−b) + U − i_n²φ_1 − C_in V_rf²/2
            let k_q = inv.apply(q);
            let transconductance = -model.g_m1 * phi[1] * k_q[0] - model.g_m2 * phi[2] * k_q[1];
            let drive = model.c_in * model.v_rf * k_q[0];
            let b = model.charge_offset(phi);
            let k_b = inv.apply(&b);
            let offset_quadratic = 0.5 * (b[0] * k_b[0] + b[1] * k_b[1] + b[2] * k_b[2]);
            HamiltonianTerms {
                oscillators,
                capacitive_coupling,
                transconductance,
                drive,
                noise,
                offset_quadratic,
                drive_constant: -0.5 * model.c_in * model.v_rf * model.v_rf,
            }
        }
    };
    Ok(terms)
}

/// Classical energy at `state` [J].
pub fn hamiltonian_energy(
    model: &SmallSignalModel,
    inv: &InverseCapacitanceMatrix,
    state: &CircuitState,
    mode: HamiltonianMode,
) -> Result<f64> {
    Ok(hamiltonian_terms(model, inv, state, mode)?.total())
}

/// Lagrangian evaluated term by term.
pub fn lagrangian(model: &SmallSignalModel, phi: &[f64; 3], phidot: &[f64; 3]) -> f64 {
    let m = model;
    let (p1, p2, p3) = (phi[0], phi[1], phi[2]);
    let (v1, v2, v3) = (phidot[0], phidot[1], phidot[2]);
    m.c_gs1 / 2.0 * v1 * v1 - p1 * p1 / (2.0 * m.l_g1)
        + m.c_gd1 / 2.0 * (v1 - v2) * (v1 - v2)
        + m.c_in / 2.0 * (m.v_rf - v1) * (m.v_rf - v1)
        + m.i_n2 * p1
        + m.c_gs2 / 2.0 * v2 * v2
        - p2 * p2 / (2.0 * m.l_d2)
        + m.c_gd2 / 2.0 * (v2 - v3) * (v2 - v3)
        + m.g_m1 * v1 * p2
        + m.c_ds3 / 2.0 * v3 * v3
        - p3 * p3 / (2.0 * m.l_d3)
        + m.g_m2 * v2 * p3
}

/// `∂L/∂φ̇_k`, differentiated term by term.
pub fn conjugate_charges(model: &SmallSignalModel, phi: &[f64; 3], phidot: &[f64; 3]) -> [f64; 3] {
    let m = model;
    let (v1, v2, v3) = (phidot[0], phidot[1], phidot[2]);
    [
        m.c_gs1 * v1 + m.c_gd1 * (v1 - v2) - m.c_in * (m.v_rf - v1) + m.g_m1 * phi[1],
        -m.c_gd1 * (v1 - v2) + m.c_gs2 * v2 + m.c_gd2 * (v2 - v3) + m.g_m2 * phi[2],
        -m.c_gd2 * (v2 - v3) + m.c_ds3 * v3,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LegendrePoint {
    pub q: [f64; 3],
    pub h: f64,
}

/// Ground-truth Hamiltonian from the Lagrangian: `Q_k = ∂L/∂φ̇_k`, then
/// `H = Σ Q_i φ̇_i − L`.
pub fn legendre_oracle(model: &SmallSignalModel, phi: &[f64; 3], phidot: &[f64; 3]) -> Result<LegendrePoint> {
    model.validate()?;
    for v in phi.iter().chain(phidot) {
        require_finite("phi/phidot", *v)?;
    }
    let q = conjugate_charges(model, phi, phidot);
    let h = q[0] * phidot[0] + q[1] * phidot[1] + q[2] * phidot[2] - lagrangian(model, phi, phidot);
    Ok(LegendrePoint { q, h })
}

/// Recovers `φ̇` from a canonical state by solving `C·φ̇ = Q − b(φ)`.
pub fn velocities(model: &SmallSignalModel, state: &CircuitState) -> Result<[f64; 3]> {
    let cap = build_capacitance_matrix(model)?;
    state.validate()?;
    let b = model.charge_offset(&state.phi);
    let rhs = [state.q[0] - b[0], state.q[1] - b[1], state.q[2] - b[2]];
    linalg::solve3(cap.entries, rhs, 1e-14)
        .ok_or_else(|| Error::Degenerate("capacitance matrix is singular".into()))
}

/// Oracle evaluated at a canonical state rather than at `(φ, φ̇)`.
pub fn legendre_oracle_at(model: &SmallSignalModel, state: &CircuitState) -> Result<LegendrePoint> {
    let phidot = velocities(model, state)?;
    legendre_oracle(model, &state.phi, &phidot)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermDiscrepancy {
    pub term: String,
    pub as_printed: f64,
    pub derived: f64,
    pub difference: f64,
}

/// Per-term comparison of the two Hamiltonian forms at one state, plus
/// the numerical oracle value for reference.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub state: CircuitState,
    pub terms: Vec<TermDiscrepancy>,
    pub total_as_printed: f64,
    pub total_derived: f64,
    pub oracle: f64,
}

impl DiscrepancyReport {
    /// Terms whose two forms differ by more than `rel_tol` of the larger
    /// total magnitude.
    pub fn mismatched(&self, rel_tol: f64) -> Vec<&TermDiscrepancy> {
        let scale = self.total_as_printed.abs().max(self.total_derived.abs()).max(f64::MIN_POSITIVE);
        self.terms
            .iter()
            .filter(|t| t.difference.abs() > rel_tol * scale)
            .collect()
    }
}

pub fn hamiltonian_discrepancy(
    model: &SmallSignalModel,
    inv: &InverseCapacitanceMatrix,
    state: &CircuitState,
) -> Result<DiscrepancyReport> {
    let printed = hamiltonian_terms(model, inv, state, HamiltonianMode::AsPrinted)?;
    let derived = hamiltonian_terms(model, inv, state, HamiltonianMode::Derived)?;
    let oracle = legendre_oracle_at(model, state)?.h;
    let terms = printed
        .named()
        .iter()
        .zip(derived.named())
        .map(|(&(name, a), (_, b))| TermDiscrepancy {
            term: name.to_string(),
            as_printed: a,
            derived: b,
            difference: a - b,
        })
        .collect();
    Ok(DiscrepancyReport {
        state: *state,
        terms,
        total_as_printed: printed.total(),
        total_derived: derived.total(),
        oracle,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn decoupled() -> SmallSignalModel {
        SmallSignalModel {
            c_in: 0.0,
            c_gs1: 4e-12,
            c_gd1: 0.0,
            c_gs2: 2e-12,
            c_gd2: 0.0,
            c_ds3: 1e-12,
            l_g1: 1e-9,
            l_d2: 2e-9,
            l_d3: 3e-9,
            g_m1: 0.0,
            g_m2: 0.0,
            v_rf: 0.0,
            i_n2: 0.0,
        }
    }

    #[test]
    fn zero_coupling_gives_diagonal_matrix() {
        let m = build_capacitance_matrix(&decoupled()).unwrap();
        assert_eq!(m.entries, [[4e-12, 0.0, 0.0], [0.0, 2e-12, 0.0], [0.0, 0.0, 1e-12]]);
        let inv = invert_capacitance_matrix(&m).unwrap();
        assert_relative_eq!(inv.get(0, 0), 0.25e12, max_relative = 1e-15);
        assert_relative_eq!(inv.get(1, 1), 0.5e12, max_relative = 1e-15);
        assert_relative_eq!(inv.get(2, 2), 1.0e12, max_relative = 1e-15);
        assert_eq!(inv.get(0, 1), 0.0);
    }

    #[test]
    fn reference_values_build_expected_matrix() {
        let model = SmallSignalModel::reference_design(1e-12, 1e-12, 0.01, 0.01);
        let m = build_capacitance_matrix(&model).unwrap();
        let d = m.diagonals();
        assert_relative_eq!(d[0], 3.72e-12, max_relative = 1e-12);
        assert_relative_eq!(d[1], 2.84e-12, max_relative = 1e-12);
        assert_relative_eq!(d[2], 1.12e-12, max_relative = 1e-12);
        assert_eq!(m.entries[0][1], -0.12e-12);
        assert_eq!(m.entries[1][2], -0.12e-12);
        assert_eq!(m.entries[0][2], 0.0);
        assert!(m.is_symmetric());
    }

    #[test]
    fn rejects_non_positive_components() {
        let mut model = decoupled();
        model.c_gs1 = 0.0;
        assert!(matches!(
            build_capacitance_matrix(&model),
            Err(Error::InvalidParameter { field: "c_gs1", .. })
        ));
        let mut model = decoupled();
        model.l_d3 = -1e-9;
        assert!(build_capacitance_matrix(&model).is_err());
        let mut model = decoupled();
        model.c_gd1 = -1e-15;
        assert!(build_capacitance_matrix(&model).is_err());
    }

    #[test]
    fn indefinite_matrix_is_degenerate() {
        let m = CapacitanceMatrix {
            entries: [[1.0, 2.0, 0.0], [2.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        assert!(matches!(invert_capacitance_matrix(&m), Err(Error::Degenerate(_))));
        let singular = CapacitanceMatrix {
            entries: [[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        };
        assert!(invert_capacitance_matrix(&singular).is_err());
    }

    #[test]
    fn energy_vanishes_at_origin() {
        let model = SmallSignalModel::reference_design(1e-12, 1e-12, 0.03, 0.05);
        let inv = inverse_for(&model).unwrap();
        for mode in [HamiltonianMode::AsPrinted, HamiltonianMode::Derived] {
            assert_eq!(hamiltonian_energy(&model, &inv, &CircuitState::default(), mode).unwrap(), 0.0);
        }
    }

    #[test]
    fn decoupled_oscillators() {
        let model = decoupled();
        let inv = inverse_for(&model).unwrap();
        let state = CircuitState {
            phi: [1e-10, -2e-10, 3e-10],
            q: [2e-12, 1e-12, -4e-12],
        };
        let l = model.inductances();
        let cap = model.node_capacitances();
        let expected: f64 = (0..3)
            .map(|i| state.q[i] * state.q[i] / (2.0 * cap[i]) + state.phi[i] * state.phi[i] / (2.0 * l[i]))
            .sum();
        let printed = hamiltonian_energy(&model, &inv, &state, HamiltonianMode::AsPrinted).unwrap();
        assert_relative_eq!(printed, expected, max_relative = 1e-14);
        let oracle = legendre_oracle_at(&model, &state).unwrap();
        assert_relative_eq!(oracle.h, printed, max_relative = 1e-14);
    }

    #[test]
    fn oracle_charge_from_transconductance_at_rest() {
        let model = SmallSignalModel::reference_design(1e-12, 1e-12, 0.03, 0.05);
        let phi = [1e-10, 2e-10, 3e-10];
        let p = legendre_oracle(&model, &phi, &[0.0; 3]).unwrap();
        assert_eq!(p.q[0], model.g_m1 * phi[1]);
        assert_eq!(p.q[1], model.g_m2 * phi[2]);
        assert_eq!(p.q[2], 0.0);
    }

    #[test]
    fn derived_mode_matches_oracle_with_drive() {
        let mut model = SmallSignalModel::reference_design(1e-12, 1e-12, 0.03, 0.05);
        model.v_rf = 0.3;
        model.i_n2 = 1e-3;
        let inv = inverse_for(&model).unwrap();
        let phi = [1e-10, -2e-10, 1.5e-10];
        let phidot = [0.2, -0.7, 0.4];
        let p = legendre_oracle(&model, &phi, &phidot).unwrap();
        let state = CircuitState { phi, q: p.q };
        let derived = hamiltonian_energy(&model, &inv, &state, HamiltonianMode::Derived).unwrap();
        assert_relative_eq!(derived, p.h, max_relative = 1e-12);
    }

    #[test]
    fn discrepancy_report_flags_sign_of_linear_terms() {
        let model = SmallSignalModel::reference_design(1e-12, 1e-12, 0.03, 0.05);
        let inv = inverse_for(&model).unwrap();
        let state = CircuitState {
            phi: [1e-10, 2e-10, 3e-10],
            q: [1e-12, 2e-12, -1e-12],
        };
        let report = hamiltonian_discrepancy(&model, &inv, &state).unwrap();
        let by_name = |n: &str| report.terms.iter().find(|t| t.term == n).unwrap();
        assert_eq!(by_name("oscillators").difference, 0.0);
        assert_eq!(by_name("capacitive_coupling").difference, 0.0);
        let g = by_name("transconductance");
        assert_relative_eq!(g.as_printed, -g.derived, max_relative = 1e-12);
        assert!(by_name("offset_quadratic").derived > 0.0);
        assert_relative_eq!(report.total_derived, report.oracle, max_relative = 1e-12);
        assert!(!report.mismatched(1e-9).is_empty());
    }
}
