//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Grids come back as flat row-major `Vec<f64>` so the page can paint them
//! straight into a canvas.

use lnakit::circuit::{inverse_for, SmallSignalModel};
use lnakit::fluctuation::{
    gm_sweep, linear_grid, ImpedanceRule, InductiveReactanceRule, InverseDiagonalRule, InverseRule, OscillatorSpec,
    REFERENCE_PHOTON_NUMBERS,
};
use lnakit::nonlinear::{fit_from_specs, single_tone_gain_db, two_tone_response, TwoToneSpec};
use lnakit::rf::{db_to_linear, nf_from_match, NfVariant, NoiseParameters, ReflectionCoefficient};
use wasm_bindgen::prelude::*;

fn err(e: lnakit::Error) -> String {
    e.to_string()
}

/// Noise figure [dB] on an `n × n` grid over `[-1, 1]²` in the Γ_s plane,
/// row index along Re Γ_s. Points outside the unit disk are NaN.
#[wasm_bindgen]
pub fn nf_map(
    nf_min_db: f64,
    r_n: f64,
    gamma_opt_mag: f64,
    gamma_opt_deg: f64,
    n: usize,
    textbook: bool,
) -> Result<Vec<f64>, String> {
    if n < 2 {
        return Err("grid needs at least 2 points per axis".into());
    }
    let g = ReflectionCoefficient::from_polar(gamma_opt_mag, gamma_opt_deg).0;
    let np = NoiseParameters::new(db_to_linear(nf_min_db), r_n, g).map_err(err)?;
    let variant = if textbook { NfVariant::Textbook } else { NfVariant::Paper };
    let axis = linear_grid(-1.0, 1.0, n);
    let mut out = Vec::with_capacity(n * n);
    for &re in &axis {
        for &im in &axis {
            let gs = ReflectionCoefficient::new(re, im);
            out.push(if gs.is_passive() { nf_from_match(&np, gs, variant).map_err(err)? } else { f64::NAN });
        }
    }
    Ok(out)
}

/// `log10 ΔG_m²` over an `n × n` grid of `g_m1, g_m2` in 1–100 mS, with the
/// published component values and the given coupling and output
/// capacitors [pF]. `rule` is `inverse-diagonal` or `inductive-reactance`
/// (at 1.6 GHz).
#[wasm_bindgen]
pub fn gm_surface(c_in_pf: f64, c_ds3_pf: f64, n: usize, rule: &str) -> Result<Vec<f64>, String> {
    if n < 2 {
        return Err("grid needs at least 2 points per axis".into());
    }
    let model = SmallSignalModel::reference_design(c_in_pf * 1e-12, c_ds3_pf * 1e-12, 0.0, 0.0);
    model.validate().map_err(err)?;
    let inv = inverse_for(&model).map_err(err)?;
    let z = match rule {
        "inverse-diagonal" => InverseDiagonalRule.impedances(&model, &inv),
        "inductive-reactance" => InductiveReactanceRule { freq_hz: 1.6e9 }.impedances(&model, &inv),
        other => return Err(format!("unknown impedance rule `{other}`")),
    };
    let spec = OscillatorSpec::new(REFERENCE_PHOTON_NUMBERS, z).map_err(err)?;
    let grid = linear_grid(1e-3, 100e-3, n);
    let s = gm_sweep(&model, &inv, InverseRule::Fixed, &spec, &grid, &grid).map_err(err)?;
    Ok(s.points.iter().map(|p| p.result.delta_gm2.log10()).collect())
}

/// Rows of `[Pin, gain, P_fund, P_IM3, P_IM5]` in dBm/dB, flattened. Absent
/// products are NaN.
#[wasm_bindgen]
pub fn two_tone(gain_db: f64, iip3_dbm: f64, a5: f64, pin_start: f64, pin_stop: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(step > 0.0 && pin_stop >= pin_start) {
        return Err("need pin_start <= pin_stop and step > 0".into());
    }
    let mut amp = fit_from_specs(gain_db, iip3_dbm, 50.0).map_err(err)?;
    amp.a5 = a5;
    amp.validate().map_err(err)?;
    let n = ((pin_stop - pin_start) / step + 1e-9).floor() as usize + 1;
    let mut out = Vec::with_capacity(5 * n);
    for k in 0..n {
        let pin = pin_start + step * k as f64;
        let spec = TwoToneSpec {
            center_hz: 1.6e9,
            detuning_hz: 1e6,
            tone_power_dbm: pin,
        };
        let r = two_tone_response(&amp, &spec).map_err(err)?;
        let nan = f64::NAN;
        out.extend([
            pin,
            single_tone_gain_db(&amp, pin),
            r.fundamental_dbm.unwrap_or(nan),
            r.im3_dbm.unwrap_or(nan),
            r.im5_dbm.unwrap_or(nan),
        ]);
    }
    Ok(out)
}
