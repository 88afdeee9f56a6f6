//! Run configuration: parsing, unit normalisation and conversion into the
//! library's types.
//!
//! [`RunConfig::resolve`] rewrites every quantity as a bare SI number and
//! fills in defaults, so the resolved form serialises to a config that
//! loads back to itself. Artifacts embed that form.

use std::path::{Path, PathBuf};

use lnakit::circuit::{inverse_for, SmallSignalModel};
use lnakit::fluctuation::{
    linear_grid, FixedImpedances, ImpedanceRule, InductiveReactanceRule, InverseDiagonalRule, InverseRule,
    OscillatorSpec, REFERENCE_PHOTON_NUMBERS,
};
use lnakit::matching::{BandObjective, ElementKind, MatchSearchSpace, SimplexSettings};
use lnakit::nonlinear::{fit_from_specs, TwoToneSpec};
use lnakit::rf::{db_to_linear, parse_touchstone, NfVariant, NoiseParameters, NoisePoint, ReflectionCoefficient, Touchstone};
use lnakit::snr::{AmplifierSim, SnrExperiment};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::units::Quantity;

type Q = Option<Quantity>;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub model: ModelBlock,
    #[serde(default)]
    pub oscillators: OscillatorBlock,
    #[serde(default)]
    pub sweep: SweepBlock,
    #[serde(default)]
    pub band: BandBlock,
    #[serde(default)]
    pub device: DeviceBlock,
    #[serde(default)]
    pub nf_map: NfMapBlock,
    #[serde(default)]
    pub stability: StabilityBlock,
    #[serde(default)]
    pub amplifier: AmplifierBlock,
    #[serde(default)]
    pub two_tone: TwoToneBlock,
    #[serde(default)]
    pub analysis: AnalysisBlock,
    #[serde(default)]
    pub optimizer: OptimizerBlock,
    #[serde(default)]
    pub convert: ConvertBlock,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_in: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_gs1: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_gd1: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_gs2: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_gd2: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c_ds3: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_g1: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_d2: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_d3: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_m1: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_m2: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v_rf: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_n2: Option<f64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleKind {
    #[default]
    InverseDiagonal,
    InductiveReactance,
    Fixed,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OscillatorBlock {
    /// Mean photon numbers per node.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impedance_rule: Option<RuleKind>,
    /// Frequency for the `inductive-reactance` rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rule_freq: Q,
    /// Impedances for the `fixed` rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<[Quantity; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub start: Quantity,
    pub stop: Quantity,
    pub points: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_m1: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g_m2: Option<Grid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inverse: Option<InverseRule>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Q,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseRow {
    pub freq: Quantity,
    pub nf_min_db: f64,
    pub r_n: f64,
    pub gamma_opt_mag: f64,
    pub gamma_opt_deg: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceBlock {
    /// Touchstone `.s2p` file, relative to the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub touchstone: Option<String>,
    /// Inline noise parameters, used when no Touchstone file is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise: Option<Vec<NoiseRow>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NfMapBlock {
    /// Frequency of the noise parameters to map; defaults to the first
    /// available point.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub freq: Q,
    /// Grid points per axis over `[-1, 1]`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SparamSource {
    #[default]
    Model,
    Touchstone,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilityBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SparamSource>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplifierBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iip3_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_e: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a5: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Q,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TwoToneBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detuning: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pin_start_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pin_stop_dbm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pin_step_db: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tone_offsets: Option<Vec<Quantity>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tone_powers_dbm: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_temperature: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step: Q,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub segment_len: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub averages: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpaceKind {
    #[default]
    Direct,
    Network,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<SpaceKind>,
    /// `(Re, Im)` of Γ_s for `direct`; element values in pF/nH for
    /// `network`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shunt: Option<ElementKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series: Option<ElementKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<[f64; 2]>,
    /// Per-frequency objective weights; uniform when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<NfVariant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_step: Option<f64>,
    /// NF weights for the NF/gain trade-off report; skipped when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nf_weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvertBlock {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nf_db: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_e_k: Option<Vec<f64>>,
}

/// Converts a present quantity to SI in place, or installs the default.
fn norm(q: &mut Q, field: &str, unit: &str, default: Option<f64>) -> CliResult<()> {
    match q {
        Some(v) => *q = Some(Quantity::Number(v.si(unit).map_err(|m| CliError::field(field, m))?)),
        None => *q = default.map(Quantity::Number),
    }
    Ok(())
}

fn norm_value(q: &mut Quantity, field: &str, unit: &str) -> CliResult<()> {
    *q = Quantity::Number(q.si(unit).map_err(|m| CliError::field(field, m))?);
    Ok(())
}

/// Value of a field already normalised by [`norm`].
fn num(q: &Q, field: &str) -> CliResult<f64> {
    match q {
        Some(Quantity::Number(v)) => Ok(*v),
        Some(Quantity::Text(_)) => unreachable!("{field} read before resolve"),
        None => Err(CliError::field(field, "missing")),
    }
}

fn value(q: &Quantity) -> f64 {
    match q {
        Quantity::Number(v) => *v,
        Quantity::Text(_) => unreachable!("quantity read before resolve"),
    }
}

impl RunConfig {
    /// Parses TOML or JSON, chosen by extension. A JSON or CSV artifact
    /// written by this tool is accepted too; its embedded config is used.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
        let cfg: Self = match ext {
            "json" => {
                let v: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::field("config", e))?;
                let inner = match v.get("config") {
                    Some(c) if v.get("tool").is_some() => c.clone(),
                    _ => v,
                };
                serde_json::from_value(inner).map_err(|e| CliError::field("config", e))?
            }
            "csv" => {
                let line = text
                    .lines()
                    .find_map(|l| l.strip_prefix("# config: "))
                    .ok_or_else(|| CliError::field("config", "CSV artifact has no embedded config"))?;
                serde_json::from_str(line).map_err(|e| CliError::field("config", e))?
            }
            _ => toml::from_str(&text).map_err(|e| CliError::field("config", e))?,
        };
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve(base)
    }

    /// Normalises units, fills defaults and makes the Touchstone path
    /// absolute with respect to `base`.
    pub fn resolve(mut self, base: &Path) -> CliResult<Self> {
        let m = &mut self.model;
        norm(&mut m.c_in, "model.c_in", "F", None)?;
        norm(&mut m.c_gs1, "model.c_gs1", "F", Some(2.6e-12))?;
        norm(&mut m.c_gd1, "model.c_gd1", "F", Some(0.12e-12))?;
        norm(&mut m.c_gs2, "model.c_gs2", "F", Some(2.6e-12))?;
        norm(&mut m.c_gd2, "model.c_gd2", "F", Some(0.12e-12))?;
        norm(&mut m.c_ds3, "model.c_ds3", "F", None)?;
        norm(&mut m.l_g1, "model.l_g1", "H", Some(1.1e-9))?;
        norm(&mut m.l_d2, "model.l_d2", "H", Some(2.2e-9))?;
        norm(&mut m.l_d3, "model.l_d3", "H", Some(0.1e-9))?;
        norm(&mut m.g_m1, "model.g_m1", "S", None)?;
        norm(&mut m.g_m2, "model.g_m2", "S", None)?;
        norm(&mut m.v_rf, "model.v_rf", "V", Some(0.0))?;
        m.i_n2.get_or_insert(0.0);

        let o = &mut self.oscillators;
        o.n.get_or_insert(REFERENCE_PHOTON_NUMBERS);
        let rule = *o.impedance_rule.get_or_insert_default();
        let freq_default = (rule == RuleKind::InductiveReactance).then_some(1.6e9);
        norm(&mut o.rule_freq, "oscillators.rule_freq", "Hz", freq_default)?;
        if let Some(z) = &mut o.z {
            for (k, q) in z.iter_mut().enumerate() {
                norm_value(q, &format!("oscillators.z[{k}]"), "ohm")?;
            }
        }

        let s = &mut self.sweep;
        for (grid, name) in [(&mut s.g_m1, "sweep.g_m1"), (&mut s.g_m2, "sweep.g_m2")] {
            let g = grid.get_or_insert_with(|| Grid {
                start: Quantity::Number(1e-3),
                stop: Quantity::Number(100e-3),
                points: 25,
            });
            norm_value(&mut g.start, &format!("{name}.start"), "S")?;
            norm_value(&mut g.stop, &format!("{name}.stop"), "S")?;
        }
        s.inverse.get_or_insert_default();

        let b = &mut self.band;
        norm(&mut b.start, "band.start", "Hz", Some(1.0e9))?;
        norm(&mut b.stop, "band.stop", "Hz", Some(3.0e9))?;
        b.points.get_or_insert(201);
        norm(&mut b.z0, "band.z0", "ohm", Some(50.0))?;

        if let Some(p) = &mut self.device.touchstone {
            let abs: PathBuf = base.join(&*p);
            *p = abs.to_string_lossy().into_owned();
        }
        if let Some(rows) = &mut self.device.noise {
            for (k, r) in rows.iter_mut().enumerate() {
                norm_value(&mut r.freq, &format!("device.noise[{k}].freq"), "Hz")?;
            }
        }

        norm(&mut self.nf_map.freq, "nf_map.freq", "Hz", None)?;
        self.nf_map.points.get_or_insert(101);
        self.stability.source.get_or_insert_default();

        let a = &mut self.amplifier;
        a.gain_db.get_or_insert(22.0);
        a.iip3_dbm.get_or_insert(-15.0);
        norm(&mut a.t_e, "amplifier.t_e", "K", Some(0.602))?;
        a.a5.get_or_insert(0.0);
        norm(&mut a.z0, "amplifier.z0", "ohm", Some(50.0))?;

        let t = &mut self.two_tone;
        norm(&mut t.center, "two_tone.center", "Hz", Some(1.6e9))?;
        norm(&mut t.detuning, "two_tone.detuning", "Hz", Some(1e6))?;
        t.pin_start_dbm.get_or_insert(-130.0);
        t.pin_stop_dbm.get_or_insert(-10.0);
        t.pin_step_db.get_or_insert(1.0);

        let an = &mut self.analysis;
        let offs = an.tone_offsets.get_or_insert_with(|| vec![Quantity::Number(1e6)]);
        for (k, q) in offs.iter_mut().enumerate() {
            norm_value(q, &format!("analysis.tone_offsets[{k}]"), "Hz")?;
        }
        an.tone_powers_dbm.get_or_insert_with(|| vec![-90.0]);
        norm(&mut an.input_temperature, "analysis.input_temperature", "K", Some(290.0))?;
        norm(&mut an.carrier, "analysis.carrier", "Hz", Some(1.6e9))?;
        norm(&mut an.step, "analysis.step", "s", Some(100e-9))?;
        an.segment_len.get_or_insert(256);
        an.averages.get_or_insert(1024);
        an.seed.get_or_insert(0);

        let op = &mut self.optimizer;
        let space = *op.space.get_or_insert_default();
        let d = SimplexSettings::default();
        match space {
            SpaceKind::Direct => {
                op.start.get_or_insert([0.0, 0.0]);
            }
            SpaceKind::Network => {
                op.start.get_or_insert([1.0, 1.0]);
                op.shunt.get_or_insert(ElementKind::Capacitor);
                op.series.get_or_insert(ElementKind::Inductor);
                op.lower.get_or_insert([0.01, 0.01]);
                op.upper.get_or_insert([20.0, 20.0]);
            }
        }
        op.variant.get_or_insert_default();
        op.max_iterations.get_or_insert(d.max_iterations);
        op.tolerance.get_or_insert(d.tolerance);
        op.restarts.get_or_insert(d.restarts);
        op.initial_step.get_or_insert(d.initial_step);

        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.analysis.seed.unwrap_or(0)
    }

    /// The small-signal model. Without `need_gm` the transconductances
    /// default to zero, for commands that sweep them.
    pub fn model(&self, need_gm: bool) -> CliResult<SmallSignalModel> {
        let m = &self.model;
        let gm = |q: &Q, f: &str| if need_gm || q.is_some() { num(q, f) } else { Ok(0.0) };
        let model = SmallSignalModel {
            c_in: num(&m.c_in, "model.c_in")?,
            c_gs1: num(&m.c_gs1, "model.c_gs1")?,
            c_gd1: num(&m.c_gd1, "model.c_gd1")?,
            c_gs2: num(&m.c_gs2, "model.c_gs2")?,
            c_gd2: num(&m.c_gd2, "model.c_gd2")?,
            c_ds3: num(&m.c_ds3, "model.c_ds3")?,
            l_g1: num(&m.l_g1, "model.l_g1")?,
            l_d2: num(&m.l_d2, "model.l_d2")?,
            l_d3: num(&m.l_d3, "model.l_d3")?,
            g_m1: gm(&m.g_m1, "model.g_m1")?,
            g_m2: gm(&m.g_m2, "model.g_m2")?,
            v_rf: num(&m.v_rf, "model.v_rf")?,
            i_n2: m.i_n2.unwrap_or(0.0),
        };
        model.validate().map_err(|e| CliError::in_block("model", e))?;
        Ok(model)
    }

    pub fn oscillator_spec(&self, model: &SmallSignalModel) -> CliResult<OscillatorSpec> {
        let o = &self.oscillators;
        let inv = inverse_for(model)?;
        let z = match o.impedance_rule.unwrap_or_default() {
            RuleKind::InverseDiagonal => InverseDiagonalRule.impedances(model, &inv),
            RuleKind::InductiveReactance => {
                let f = num(&o.rule_freq, "oscillators.rule_freq")?;
                if !(f > 0.0) {
                    return Err(CliError::field("oscillators.rule_freq", "must be > 0"));
                }
                InductiveReactanceRule { freq_hz: f }.impedances(model, &inv)
            }
            RuleKind::Fixed => {
                let z = o.z.as_ref().ok_or_else(|| CliError::field("oscillators.z", "required by the fixed rule"))?;
                FixedImpedances([value(&z[0]), value(&z[1]), value(&z[2])]).impedances(model, &inv)
            }
        };
        OscillatorSpec::new(o.n.unwrap_or(REFERENCE_PHOTON_NUMBERS), z).map_err(|e| CliError::in_block("oscillators", e))
    }

    pub fn sweep_grids(&self) -> CliResult<(Vec<f64>, Vec<f64>)> {
        let grid = |g: &Option<Grid>, name: &str| -> CliResult<Vec<f64>> {
            let g = g.as_ref().ok_or_else(|| CliError::field(name, "missing"))?;
            let (a, b) = (value(&g.start), value(&g.stop));
            if g.points == 0 {
                return Err(CliError::field(&format!("{name}.points"), "must be at least 1"));
            }
            if a < 0.0 || b < a {
                return Err(CliError::field(name, format!("need 0 <= start <= stop, got {a}..{b}")));
            }
            Ok(linear_grid(a, b, g.points))
        };
        Ok((grid(&self.sweep.g_m1, "sweep.g_m1")?, grid(&self.sweep.g_m2, "sweep.g_m2")?))
    }

    pub fn band(&self) -> CliResult<(f64, f64, usize)> {
        let b = &self.band;
        let (lo, hi) = (num(&b.start, "band.start")?, num(&b.stop, "band.stop")?);
        let n = b.points.unwrap_or(201);
        if !(lo > 0.0 && hi >= lo) {
            return Err(CliError::field("band", format!("need 0 < start <= stop, got {lo}..{hi}")));
        }
        if n == 0 {
            return Err(CliError::field("band.points", "must be at least 1"));
        }
        Ok((lo, hi, n))
    }

    pub fn band_freqs(&self) -> CliResult<Vec<f64>> {
        let (lo, hi, n) = self.band()?;
        Ok(linear_grid(lo, hi, n))
    }

    pub fn z0(&self) -> CliResult<f64> {
        let z = num(&self.band.z0, "band.z0")?;
        if z > 0.0 {
            Ok(z)
        } else {
            Err(CliError::field("band.z0", "must be > 0"))
        }
    }

    /// Touchstone data, from the file if given, otherwise a noise-only
    /// data set built from the inline rows.
    pub fn device(&self) -> CliResult<Touchstone> {
        if let Some(p) = &self.device.touchstone {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Io(format!("{p}: {e}")))?;
            return parse_touchstone(&text).map_err(|e| CliError::Validation(format!("device.touchstone ({p}): {e}")));
        }
        let rows = self
            .device
            .noise
            .as_ref()
            .ok_or_else(|| CliError::field("device", "needs either `touchstone` or `noise`"))?;
        let mut noise = Vec::with_capacity(rows.len());
        for (k, r) in rows.iter().enumerate() {
            let g = ReflectionCoefficient::from_polar(r.gamma_opt_mag, r.gamma_opt_deg).0;
            let params = NoiseParameters::new(db_to_linear(r.nf_min_db), r.r_n, g)
                .map_err(|e| CliError::in_block(&format!("device.noise[{k}]"), e))?;
            let freq_hz = value(&r.freq);
            if !(freq_hz > 0.0) {
                return Err(CliError::field(&format!("device.noise[{k}].freq"), "must be > 0"));
            }
            noise.push(NoisePoint { freq_hz, params });
        }
        Ok(Touchstone {
            z0: self.z0()?,
            records: Vec::new(),
            noise,
        })
    }

    pub fn nf_map_point(&self, ts: &Touchstone) -> CliResult<NoisePoint> {
        let first = ts.noise.first().ok_or_else(|| CliError::field("device", "no noise parameters"))?;
        match &self.nf_map.freq {
            None => Ok(*first),
            Some(_) => {
                let f = num(&self.nf_map.freq, "nf_map.freq")?;
                ts.noise
                    .iter()
                    .find(|p| (p.freq_hz - f).abs() <= 1e-9 * f)
                    .copied()
                    .ok_or_else(|| CliError::field("nf_map.freq", format!("no noise data at {f} Hz")))
            }
        }
    }

    pub fn nf_map_points(&self) -> CliResult<usize> {
        match self.nf_map.points.unwrap_or(101) {
            n if n >= 2 => Ok(n),
            _ => Err(CliError::field("nf_map.points", "must be at least 2")),
        }
    }

    pub fn stability_source(&self) -> SparamSource {
        self.stability.source.unwrap_or_default()
    }

    pub fn amplifier(&self) -> CliResult<AmplifierSim> {
        let a = &self.amplifier;
        let mut amp = fit_from_specs(a.gain_db.unwrap_or(22.0), a.iip3_dbm.unwrap_or(-15.0), num(&a.z0, "amplifier.z0")?)
            .map_err(|e| CliError::in_block("amplifier", e))?;
        amp.a5 = a.a5.unwrap_or(0.0);
        let sim = AmplifierSim {
            amp,
            t_e: num(&a.t_e, "amplifier.t_e")?,
        };
        sim.validate().map_err(|e| CliError::in_block("amplifier", e))?;
        Ok(sim)
    }

    pub fn two_tone(&self) -> CliResult<(TwoToneSpec, Vec<f64>)> {
        let t = &self.two_tone;
        let spec = TwoToneSpec {
            center_hz: num(&t.center, "two_tone.center")?,
            detuning_hz: num(&t.detuning, "two_tone.detuning")?,
            tone_power_dbm: t.pin_start_dbm.unwrap_or(-130.0),
        };
        spec.validate().map_err(|e| CliError::in_block("two_tone", e))?;
        let (a, b, step) = (
            t.pin_start_dbm.unwrap_or(-130.0),
            t.pin_stop_dbm.unwrap_or(-10.0),
            t.pin_step_db.unwrap_or(1.0),
        );
        if !(step > 0.0 && b >= a && a.is_finite() && b.is_finite()) {
            return Err(CliError::field("two_tone", format!("need pin_start <= pin_stop and step > 0, got {a}..{b} by {step}")));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize + 1;
        Ok((spec, (0..n).map(|k| a + step * k as f64).collect()))
    }

    pub fn experiment(&self) -> CliResult<SnrExperiment> {
        let an = &self.analysis;
        let offsets: Vec<f64> = an.tone_offsets.as_deref().unwrap_or_default().iter().map(value).collect();
        let powers = an.tone_powers_dbm.clone().unwrap_or_default();
        if offsets.is_empty() {
            return Err(CliError::field("analysis.tone_offsets", "must list at least one tone"));
        }
        if offsets.len() != powers.len() {
            return Err(CliError::field(
                "analysis.tone_powers_dbm",
                format!("{} powers for {} tones", powers.len(), offsets.len()),
            ));
        }
        let segment_len = an.segment_len.unwrap_or(256);
        if segment_len < 8 || !segment_len.is_power_of_two() {
            return Err(CliError::field("analysis.segment_len", "must be a power of two >= 8"));
        }
        let exp = SnrExperiment {
            tone_offsets_hz: offsets,
            tone_powers_dbm: powers,
            amplifier: self.amplifier()?,
            input_temperature_k: num(&an.input_temperature, "analysis.input_temperature")?,
            carrier_hz: num(&an.carrier, "analysis.carrier")?,
            step_s: num(&an.step, "analysis.step")?,
            z0: num(&self.amplifier.z0, "amplifier.z0")?,
            segment_len,
            averages: an.averages.unwrap_or(1024),
            seed: self.seed(),
        };
        if !(exp.step_s > 0.0) {
            return Err(CliError::field("analysis.step", "must be > 0"));
        }
        exp.validate().map_err(|e| CliError::in_block("analysis", e))?;
        Ok(exp)
    }

    pub fn variant(&self) -> NfVariant {
        self.optimizer.variant.unwrap_or_default()
    }

    pub fn search_space(&self) -> CliResult<MatchSearchSpace> {
        let o = &self.optimizer;
        let start = o.start.unwrap_or([0.0, 0.0]);
        let space = match o.space.unwrap_or_default() {
            SpaceKind::Direct => MatchSearchSpace::Direct {
                start: Complex64::new(start[0], start[1]),
            },
            SpaceKind::Network => MatchSearchSpace::Network {
                shunt: o.shunt.unwrap_or(ElementKind::Capacitor),
                series: o.series.unwrap_or(ElementKind::Inductor),
                start,
                lower: o.lower.unwrap_or([0.01, 0.01]),
                upper: o.upper.unwrap_or([20.0, 20.0]),
                z0: self.z0()?,
            },
        };
        space.validate().map_err(|e| CliError::in_block("optimizer", e))?;
        Ok(space)
    }

    pub fn simplex(&self) -> CliResult<SimplexSettings> {
        let o = &self.optimizer;
        let d = SimplexSettings::default();
        let s = SimplexSettings {
            max_iterations: o.max_iterations.unwrap_or(d.max_iterations),
            tolerance: o.tolerance.unwrap_or(d.tolerance),
            restarts: o.restarts.unwrap_or(d.restarts),
            initial_step: o.initial_step.unwrap_or(d.initial_step),
        };
        if s.max_iterations == 0 {
            return Err(CliError::field("optimizer.max_iterations", "must be at least 1"));
        }
        if !(s.tolerance > 0.0) {
            return Err(CliError::field("optimizer.tolerance", "must be > 0"));
        }
        if !(s.initial_step > 0.0) {
            return Err(CliError::field("optimizer.initial_step", "must be > 0"));
        }
        Ok(s)
    }

    /// Noise points of the device inside the band, with the configured
    /// weights.
    pub fn objective(&self, ts: &Touchstone) -> CliResult<BandObjective> {
        let (lo, hi, _) = self.band()?;
        let mut obj = BandObjective::from_touchstone(ts, lo, hi, self.variant()).map_err(|e| CliError::in_block("device", e))?;
        if let Some(w) = &self.optimizer.weights {
            if w.len() != obj.freqs_hz.len() {
                return Err(CliError::field(
                    "optimizer.weights",
                    format!("{} weights for {} in-band noise points", w.len(), obj.freqs_hz.len()),
                ));
            }
            obj.weights = w.clone();
        }
        obj.validate().map_err(|e| CliError::in_block("optimizer", e))?;
        Ok(obj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> CliResult<RunConfig> {
        toml::from_str::<RunConfig>(text).unwrap().resolve(Path::new("/cfg"))
    }

    #[test]
    fn units_are_normalised_and_defaults_filled() {
        let c = parse("[model]\nc_in = \"1 pF\"\nc_ds3 = 1e-12\ng_m1 = \"40 mS\"\ng_m2 = \"20 mS\"\n").unwrap();
        let m = c.model(true).unwrap();
        assert_eq!(m.c_in, 1e-12);
        assert_eq!(m.g_m1, 0.04);
        assert_eq!(m.c_gs1, 2.6e-12);
        assert_eq!(c.band().unwrap(), (1e9, 3e9, 201));
        assert_eq!(c.band.start, Some(Quantity::Number(1e9)));
    }

    #[test]
    fn missing_required_field_is_named() {
        let c = parse("[model]\nc_ds3 = \"1 pF\"\n").unwrap();
        let e = c.model(false).unwrap_err();
        assert_eq!(e.exit_code(), 1);
        assert!(e.to_string().contains("model.c_in"), "{e}");
    }

    #[test]
    fn bad_unit_names_field() {
        let e = parse("[model]\nc_in = \"1 nH\"\n").unwrap_err();
        assert!(e.to_string().contains("model.c_in"));
    }

    #[test]
    fn unknown_field_is_rejected() {
        assert!(toml::from_str::<RunConfig>("[model]\nc_inn = 1.0\n").is_err());
    }

    #[test]
    fn resolved_config_round_trips() {
        let c = parse("[model]\nc_in = \"1 pF\"\nc_ds3 = \"2 pF\"\n[band]\nstart = \"1.2 GHz\"\n").unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back: RunConfig = serde_json::from_str(&json).unwrap();
        assert_eq!(back.resolve(Path::new("/cfg")).unwrap(), c);
    }

    #[test]
    fn touchstone_path_is_anchored_at_config_dir() {
        let c = parse("[device]\ntouchstone = \"dev.s2p\"\n").unwrap();
        assert_eq!(c.device.touchstone.as_deref(), Some("/cfg/dev.s2p"));
    }

    #[test]
    fn two_tone_grid_includes_endpoint() {
        let c = parse("[two_tone]\npin_start_dbm = -30.0\npin_stop_dbm = -20.0\npin_step_db = 2.5\n").unwrap();
        assert_eq!(c.two_tone().unwrap().1, vec![-30.0, -27.5, -25.0, -22.5, -20.0]);
    }
}
