//! Independent reference computations shared by the integration tests.
//! Nothing here calls into the library's numerics.

#![allow(dead_code)]

use std::f64::consts::PI;

use lnakit::circuit::SmallSignalModel;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random valid model with values in realistic device ranges.
pub fn random_model(r: &mut ChaCha8Rng) -> SmallSignalModel {
    let pf = |r: &mut ChaCha8Rng, lo: f64, hi: f64| r.random_range(lo..hi) * 1e-12;
    let nh = |r: &mut ChaCha8Rng| r.random_range(0.05..5.0) * 1e-9;
    SmallSignalModel {
        c_in: pf(r, 0.0, 5.0),
        c_gs1: pf(r, 0.1, 5.0),
        c_gd1: pf(r, 0.0, 0.5),
        c_gs2: pf(r, 0.1, 5.0),
        c_gd2: pf(r, 0.0, 0.5),
        c_ds3: pf(r, 0.1, 5.0),
        l_g1: nh(r),
        l_d2: nh(r),
        l_d3: nh(r),
        g_m1: r.random_range(0.0..0.2),
        g_m2: r.random_range(0.0..0.2),
        v_rf: r.random_range(-1e-3..1e-3),
        i_n2: r.random_range(-1e-12..1e-12),
    }
}

/// The published component set with implementer-chosen `C_in = C_ds3 = 1 pF`.
pub fn reference_model(g_m1: f64, g_m2: f64) -> SmallSignalModel {
    SmallSignalModel::reference_design(1e-12, 1e-12, g_m1, g_m2)
}

/// Capacitance matrix written out entry by entry.
pub fn capacitance_entries(m: &SmallSignalModel) -> [[f64; 3]; 3] {
    let c1 = m.c_in + m.c_gs1 + m.c_gd1;
    let c2 = m.c_gd2 + m.c_gs2 + m.c_gd1;
    let c3 = m.c_ds3 + m.c_gd2;
    [[c1, -m.c_gd1, 0.0], [-m.c_gd1, c2, -m.c_gd2], [0.0, -m.c_gd2, c3]]
}

/// Inverse by cofactor expansion and the adjugate.
pub fn cofactor_inverse(a: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let minor = |r: usize, c: usize| {
        let rows: Vec<usize> = (0..3).filter(|&i| i != r).collect();
        let cols: Vec<usize> = (0..3).filter(|&j| j != c).collect();
        a[rows[0]][cols[0]] * a[rows[1]][cols[1]] - a[rows[0]][cols[1]] * a[rows[1]][cols[0]]
    };
    let cof = |r: usize, c: usize| if (r + c) % 2 == 0 { minor(r, c) } else { -minor(r, c) };
    let det = a[0][0] * cof(0, 0) + a[0][1] * cof(0, 1) + a[0][2] * cof(0, 2);
    let mut inv = [[0.0; 3]; 3];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v = cof(j, i) / det;
        }
    }
    inv
}

/// Transconductance fluctuation summed term by term from the closed-form
/// variance expressions. Returns `(ΔI_out², ΔV_in², ΔG_m²)`.
pub fn fluctuation_terms(m: &SmallSignalModel, c: [[f64; 3]; 3], n: [f64; 3], z: [f64; 3]) -> (f64, f64, f64) {
    let (c11, c12, c13) = (c[0][0], c[0][1], c[0][2]);
    let (c21, c22) = (c[1][0], c[1][1]);
    let (c31, c32) = (c[2][0], c[2][1]);
    let (g1, g2) = (m.g_m1, m.g_m2);
    let o1 = 2.0 * n[0] + 1.0;
    let o2 = 2.0 * n[1] + 1.0;
    let o3 = 2.0 * n[2] + 1.0;

    let mut vin = 0.0;
    vin += c11 * c11 * o1 / (2.0 * z[0]);
    vin += (c12 + c21) * (c12 + c21) / (8.0 * z[1]) * o2;
    vin += (c11 * g1) * (c11 * g1) * z[1] / 2.0 * o2;
    vin += (c13 + c31) * (c13 + c31) / (8.0 * z[2]) * o3;
    vin += (c12 * g2) * (c12 * g2) * z[2] / 2.0 * o3;

    let mut iout = 0.0;
    iout += (c12 * g2) * (c12 * g2) * o1 / (2.0 * z[0]);
    iout += (c22 * g2) * (c22 * g2) * o2 / (2.0 * z[1]);
    iout += (c32 * g2) * (c32 * g2) / (2.0 * z[2]) * o3;
    iout += z[2] / (2.0 * m.l_d3 * m.l_d3) * o3;

    (iout, vin, iout / vin)
}

/// `sqrt(L_i · C_ii)` from a given inverse.
pub fn impedances(m: &SmallSignalModel, c: [[f64; 3]; 3]) -> [f64; 3] {
    [
        (m.l_g1 * c[0][0]).sqrt(),
        (m.l_d2 * c[1][1]).sqrt(),
        (m.l_d3 * c[2][2]).sqrt(),
    ]
}

fn complex_det(a: &[Vec<Complex64>]) -> Complex64 {
    let n = a.len();
    if n == 1 {
        return a[0][0];
    }
    let mut det = Complex64::new(0.0, 0.0);
    for c in 0..n {
        if a[0][c] == Complex64::new(0.0, 0.0) {
            continue;
        }
        let sub: Vec<Vec<Complex64>> = a[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|&(j, _)| j != c).map(|(_, v)| *v).collect())
            .collect();
        let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
        det += a[0][c] * sign * complex_det(&sub);
    }
    det
}

/// Cramer's rule with cofactor-expansion determinants.
pub fn cramer(a: &[Vec<Complex64>], b: &[Complex64]) -> Vec<Complex64> {
    let d = complex_det(a);
    (0..b.len())
        .map(|k| {
            let mut ak: Vec<Vec<Complex64>> = a.to_vec();
            for (row, &bv) in ak.iter_mut().zip(b) {
                row[k] = bv;
            }
            complex_det(&ak) / d
        })
        .collect()
}

/// Modified nodal analysis with an ideal voltage source: unknowns are the
/// source terminal, the three model nodes and the source current. Returns
/// `[V_1, V_2, V_3]` for a 1 V source.
pub fn mna_node_voltages(m: &SmallSignalModel, freq_hz: f64) -> [Complex64; 3] {
    let jw = Complex64::new(0.0, 2.0 * PI * freq_hz);
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let yin = jw * m.c_in;
    let y1 = jw * m.c_gs1 + one / (jw * m.l_g1);
    let y2 = jw * m.c_gs2 + one / (jw * m.l_d2);
    let y3 = jw * m.c_ds3 + one / (jw * m.l_d3);
    let g12 = jw * m.c_gd1;
    let g23 = jw * m.c_gd2;
    let gm1 = Complex64::new(m.g_m1, 0.0);
    let gm2 = Complex64::new(m.g_m2, 0.0);
    // KCL, currents leaving each node; the source current enters node 0.
    let a = vec![
        vec![yin, -yin, z, z, -one],
        vec![-yin, yin + y1 + g12, -g12, z, z],
        vec![z, gm1 - g12, y2 + g12 + g23, -g23, z],
        vec![z, z, gm2 - g23, y3 + g23, z],
        vec![one, z, z, z, z],
    ];
    let b = vec![z, z, z, z, one];
    let x = cramer(&a, &b);
    [x[1], x[2], x[3]]
}

/// Two-port S-parameters from open-circuit impedance parameters. Port 1 is
/// the source side of `C_in`, port 2 is node 3. Returns `[S11, S12, S21, S22]`.
pub fn sparams_via_z(m: &SmallSignalModel, freq_hz: f64, z0: f64) -> [Complex64; 4] {
    let jw = Complex64::new(0.0, 2.0 * PI * freq_hz);
    let z = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let yin = jw * m.c_in;
    let y1 = jw * m.c_gs1 + one / (jw * m.l_g1);
    let y2 = jw * m.c_gs2 + one / (jw * m.l_d2);
    let y3 = jw * m.c_ds3 + one / (jw * m.l_d3);
    let g12 = jw * m.c_gd1;
    let g23 = jw * m.c_gd2;
    let gm1 = Complex64::new(m.g_m1, 0.0);
    let gm2 = Complex64::new(m.g_m2, 0.0);
    let a = vec![
        vec![yin, -yin, z, z],
        vec![-yin, yin + y1 + g12, -g12, z],
        vec![z, gm1 - g12, y2 + g12 + g23, -g23],
        vec![z, z, gm2 - g23, y3 + g23],
    ];
    let v1 = cramer(&a, &[one, z, z, z]);
    let v2 = cramer(&a, &[z, z, z, one]);
    let (z11, z21, z12, z22) = (v1[0], v1[3], v2[0], v2[3]);
    // S = (Z − z0)(Z + z0)⁻¹ for a 2×2.
    let r = Complex64::new(z0, 0.0);
    let (a11, a12, a21, a22) = (z11 - r, z12, z21, z22 - r);
    let (b11, b12, b21, b22) = (z11 + r, z12, z21, z22 + r);
    let det = b11 * b22 - b12 * b21;
    let (i11, i12, i21, i22) = (b22 / det, -b12 / det, -b21 / det, b11 / det);
    [
        a11 * i11 + a12 * i21,
        a11 * i12 + a12 * i22,
        a21 * i11 + a22 * i21,
        a21 * i12 + a22 * i22,
    ]
}

/// Amplitude of `cos(p·θ1 + q·θ2)` in `y(A(cos θ1 + cos θ2))`, by sampling
/// one common period and projecting onto the product frequency.
pub fn fourier_projection(y: impl Fn(f64) -> f64, amplitude: f64, p: i32, q: i32) -> f64 {
    let (k1, k2) = (10_i32, 11_i32);
    let n = 512;
    let target = (p * k1 + q * k2) as f64;
    let mut acc = 0.0;
    for s in 0..n {
        let t = s as f64 / n as f64;
        let x = amplitude * ((2.0 * PI * k1 as f64 * t).cos() + (2.0 * PI * k2 as f64 * t).cos());
        acc += y(x) * (2.0 * PI * target * t).cos();
    }
    let scale = if target == 0.0 { 1.0 } else { 2.0 };
    scale * acc / n as f64
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
