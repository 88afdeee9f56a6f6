use std::path::PathBuf;

use lnakit::circuit::inverse_for;
use lnakit::fluctuation::gm_sweep;
use lnakit::matching::{optimize_match, tradeoff_csv, tradeoff_report, GainModel};
use lnakit::nonlinear::{compression_curve, iip3, two_tone_csv, two_tone_sweep};
use lnakit::rf::{
    nf_from_match, nf_of_temperature, noise_temperature, rollett_k, sparams_of_model, write_touchstone, NfVariant,
    ReflectionCoefficient, Touchstone, TwoPortRecord,
};
use lnakit::snr::{run_experiment, watts_to_dbm};
use serde::Serialize;
use serde_json::json;

use crate::config::{RunConfig, SparamSource};
use crate::error::{CliError, CliResult};
use crate::output::{cell, Format, Writer};

pub fn quantum_sweep(cfg: &RunConfig, w: &Writer, fmt: Format) -> CliResult<Vec<PathBuf>> {
    let model = cfg.model(false)?;
    let spec = cfg.oscillator_spec(&model)?;
    let (g1, g2) = cfg.sweep_grids()?;
    let inv = inverse_for(&model)?;
    let rule = cfg.sweep.inverse.unwrap_or_default();
    let s = gm_sweep(&model, &inv, rule, &spec, &g1, &g2)?;
    let argmax = json!({
        "i": s.argmax.0,
        "j": s.argmax.1,
        "g_m1": s.argmax_g_m1,
        "g_m2": s.argmax_g_m2,
        "delta_gm2": s.max_delta_gm2,
    });
    let notes = [
        format!("impedances_ohm: {} {} {}", spec.z[0], spec.z[1], spec.z[2]),
        format!("argmax: g_m1={} g_m2={} delta_Gm2={}", s.argmax_g_m1, s.argmax_g_m2, s.max_delta_gm2),
    ];
    let result = json!({
        "oscillators": spec,
        "inverse_capacitance": inv.entries,
        "argmax": argmax,
        "surface": s,
    });
    Ok(vec![w.emit(fmt, result, &notes, &s.to_csv())?])
}

#[derive(Serialize)]
struct MapPoint {
    gamma_re: f64,
    gamma_im: f64,
    nf_paper_db: f64,
    nf_textbook_db: f64,
}

pub fn nf_map(cfg: &RunConfig, w: &Writer, fmt: Format) -> CliResult<Vec<PathBuf>> {
    let ts = cfg.device()?;
    let point = cfg.nf_map_point(&ts)?;
    let n = cfg.nf_map_points()?;
    let np = point.params;
    let mut points = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let re = -1.0 + 2.0 * i as f64 / (n - 1) as f64;
            let im = -1.0 + 2.0 * j as f64 / (n - 1) as f64;
            let g = ReflectionCoefficient::new(re, im);
            if !g.is_passive() {
                continue;
            }
            points.push(MapPoint {
                gamma_re: re,
                gamma_im: im,
                nf_paper_db: nf_from_match(&np, g, NfVariant::Paper)?,
                nf_textbook_db: nf_from_match(&np, g, NfVariant::Textbook)?,
            });
        }
    }
    let mut table = String::from("gamma_re,gamma_im,nf_paper_db,nf_textbook_db\n");
    for p in &points {
        table.push_str(&format!("{},{},{},{}\n", p.gamma_re, p.gamma_im, p.nf_paper_db, p.nf_textbook_db));
    }
    let notes = [format!(
        "freq_hz: {} nf_min_db: {} r_n: {} gamma_opt: {} {}",
        point.freq_hz,
        np.nf_min_db(),
        np.r_n,
        np.gamma_opt.re,
        np.gamma_opt.im
    )];
    let result = json!({ "freq_hz": point.freq_hz, "noise": np, "points": points });
    Ok(vec![w.emit(fmt, result, &notes, &table)?])
}

fn in_band(records: &[TwoPortRecord], lo: f64, hi: f64) -> Vec<TwoPortRecord> {
    records.iter().filter(|r| r.freq_hz >= lo && r.freq_hz <= hi).copied().collect()
}

pub fn stability(cfg: &RunConfig, w: &Writer, fmt: Format) -> CliResult<Vec<PathBuf>> {
    let (lo, hi, _) = cfg.band()?;
    let (records, singular) = match cfg.stability_source() {
        SparamSource::Model => {
            let sweep = sparams_of_model(&cfg.model(true)?, &cfg.band_freqs()?, cfg.z0()?)?;
            (sweep.records, sweep.singular)
        }
        SparamSource::Touchstone => {
            if cfg.device.touchstone.is_none() {
                return Err(CliError::field("device.touchstone", "required when stability.source = \"touchstone\""));
            }
            (in_band(&cfg.device()?.records, lo, hi), Vec::new())
        }
    };
    if records.is_empty() {
        return Err(CliError::Numerical("no frequency in the band gave S-parameters".into()));
    }
    let reports = records.iter().map(rollett_k).collect::<Result<Vec<_>, _>>()?;
    let mut table = String::from("freq_hz,s21_db,k,delta_mag,mu,stable\n");
    for (r, s) in records.iter().zip(&reports) {
        table.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.freq_hz,
            r.s21_db(),
            cell(s.k),
            s.delta.norm(),
            s.mu,
            s.unconditionally_stable
        ));
    }
    let stable = reports.iter().filter(|s| s.unconditionally_stable).count();
    let notes = [
        format!("stable_points: {stable}/{}", reports.len()),
        format!("singular_hz: {singular:?}"),
    ];
    let result = json!({
        "stable_points": stable,
        "singular_hz": singular,
        "records": records,
        "stability": reports,
    });
    let mut out = vec![w.emit(fmt, result, &notes, &table)?];
    if cfg.stability_source() == SparamSource::Model {
        let ts = Touchstone {
            z0: cfg.z0()?,
            records,
            noise: Vec::new(),
        };
        out.push(w.touchstone("", &write_touchstone(&ts)?)?);
    }
    Ok(out)
}

pub fn two_tone(cfg: &RunConfig, w: &Writer, fmt: Format) -> CliResult<Vec<PathBuf>> {
    let amp = cfg.amplifier()?.amp;
    let (spec, pins) = cfg.two_tone()?;
    let rows = two_tone_sweep(&amp, &spec, &pins)?;
    let curve = compression_curve(&amp, &pins)?;
    let ip3 = iip3(&amp)?;
    let notes = [
        format!("tones_hz: {} {}", spec.tones_hz().0, spec.tones_hz().1),
        format!("iip3_dbm: {}", cell(ip3)),
        format!("p1db_dbm: {}", cell(curve.p1db_dbm)),
        format!("small_signal_gain_db: {}", curve.small_signal_gain_db),
    ];
    let result = json!({
        "amplifier": amp,
        "iip3_dbm": ip3,
        "compression": curve,
        "rows": rows,
    });
    Ok(vec![w.emit(fmt, result, &notes, &two_tone_csv(&rows))?])
}

pub fn snr_sim(cfg: &RunConfig, w: &Writer, fmt: Format) -> CliResult<Vec<PathBuf>> {
    let exp = cfg.experiment()?;
    let run = run_experiment(&exp)?;
    let m = &run.measurement;
    let mut notes: Vec<String> = m
        .tones
        .iter()
        .map(|t| format!("tone {} Hz: snr_in_db={} snr_out_db={} nf_db={}", t.detuning_hz, t.snr_in_db, t.snr_out_db, t.nf_db))
        .collect();
    notes.push(format!("floor_in_dbm: {} floor_out_dbm: {}", watts_to_dbm(m.floor_in_w), watts_to_dbm(m.floor_out_w)));
    let (a, b) = (&m.input_spectrum, &m.output_spectrum);
    let mut table = String::from("detuning_hz,input_dbm,output_dbm\n");
    for k in 0..a.len() {
        table.push_str(&format!("{},{},{}\n", a.detuning_hz[k], a.dbm(k), b.dbm(k)));
    }
    let result = json!({ "experiment": exp, "measurement": m });
    Ok(vec![w.emit(fmt, result, &notes, &table)?])
}

pub fn optimize(cfg: &RunConfig, w: &Writer, fmt: Format) -> CliResult<Vec<PathBuf>> {
    let ts = cfg.device()?;
    let obj = cfg.objective(&ts)?;
    let space = cfg.search_space()?;
    let settings = cfg.simplex()?;
    let res = optimize_match(&obj, &space, &settings)?;
    let tradeoff = match &cfg.optimizer.nf_weights {
        None => None,
        Some(weights) => {
            let records = if ts.records.is_empty() {
                sparams_of_model(&cfg.model(true)?, &obj.freqs_hz, cfg.z0()?)?.records
            } else {
                ts.records.clone()
            };
            Some(tradeoff_report(&obj, &space, &GainModel { records }, weights, &settings)?)
        }
    };
    let notes = [
        format!("variant: {}", if obj.variant == NfVariant::Paper { "paper" } else { "textbook" }),
        format!("params: {} {}", res.params[0], res.params[1]),
        format!("objective_db: {} start_objective_db: {}", res.objective, res.start_objective),
        format!("iterations: {} converged: {}", res.iterations, res.converged),
    ];
    let mut table = String::from("freq_hz,gamma_re,gamma_im,nf_db\n");
    for ((f, g), nf) in res.freqs_hz.iter().zip(&res.gamma_s).zip(&res.nf_db) {
        table.push_str(&format!("{f},{},{},{nf}\n", g.re, g.im));
    }
    let mut out = Vec::new();
    match fmt {
        Format::Json => out.push(w.json("", json!({ "match": res, "tradeoff": tradeoff }))?),
        Format::Csv => {
            out.push(w.csv("", &notes, &table)?);
            if let Some(t) = &tradeoff {
                out.push(w.csv("-tradeoff", &[], &tradeoff_csv(t))?);
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct ConvertRow {
    nf_db: f64,
    t_e_k: f64,
}

pub fn convert(cfg: &RunConfig, w: &Writer, fmt: Format) -> CliResult<Vec<PathBuf>> {
    let c = &cfg.convert;
    let nf = c.nf_db.as_deref().unwrap_or_default();
    let te = c.t_e_k.as_deref().unwrap_or_default();
    if nf.is_empty() && te.is_empty() {
        return Err(CliError::field("convert", "give `nf_db` or `t_e_k` values"));
    }
    let mut rows = Vec::with_capacity(nf.len() + te.len());
    for (k, &v) in nf.iter().enumerate() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(CliError::field(&format!("convert.nf_db[{k}]"), format!("must be finite and >= 0, got {v}")));
        }
        rows.push(ConvertRow { nf_db: v, t_e_k: noise_temperature(v) });
    }
    for (k, &v) in te.iter().enumerate() {
        if !(v.is_finite() && v >= 0.0) {
            return Err(CliError::field(&format!("convert.t_e_k[{k}]"), format!("must be finite and >= 0, got {v}")));
        }
        rows.push(ConvertRow { nf_db: nf_of_temperature(v), t_e_k: v });
    }
    let mut table = String::from("nf_db,t_e_k\n");
    for r in &rows {
        table.push_str(&format!("{},{:.6}\n", r.nf_db, r.t_e_k));
    }
    Ok(vec![w.emit(fmt, json!({ "rows": rows }), &[], &table)?])
}

