//! Source-match optimisation of the mismatch noise figure.

mod simplex;

pub use simplex::{minimize, IterationRecord, SimplexOutcome, SimplexSettings};

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, Error, Result};
use crate::rf::{linear_to_db, nf_from_match, NfVariant, NoiseParameters, ReflectionCoefficient, Touchstone, TwoPortRecord};

/// Objective value assigned to infeasible points.
pub const BARRIER: f64 = 1e6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementKind {
    /// Inductor, value in nH.
    Inductor,
    /// Capacitor, value in pF.
    Capacitor,
}

impl ElementKind {
    fn reactance(self, value: f64, freq_hz: f64) -> f64 {
        let w = 2.0 * PI * freq_hz;
        match self {
            ElementKind::Inductor => w * value * 1e-9,
            ElementKind::Capacitor => -1.0 / (w * value * 1e-12),
        }
    }
}

/// How the optimiser's parameters map to a source reflection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum MatchSearchSpace {
    /// `(Re Γ_s, Im Γ_s)` in the open unit disk, the same at every frequency.
    Direct { start: Complex64 },
    /// A `z0` source, a shunt element across it, then a series element
    /// towards the device.
    Network {
        shunt: ElementKind,
        series: ElementKind,
        start: [f64; 2],
        lower: [f64; 2],
        upper: [f64; 2],
        z0: f64,
    },
}

impl MatchSearchSpace {
    pub fn validate(&self) -> Result<()> {
        match self {
            MatchSearchSpace::Direct { start } => {
                if !(start.norm() < 1.0) {
                    return Err(Error::Infeasible(format!("start |Γ_s| = {} is not inside the unit disk", start.norm())));
                }
            }
            MatchSearchSpace::Network { start, lower, upper, z0, .. } => {
                require_positive("z0", *z0)?;
                for i in 0..2 {
                    require_positive("lower", lower[i])?;
                    if !(upper[i] > lower[i]) {
                        return Err(Error::invalid("upper", format!("bound {} must exceed lower bound {}", upper[i], lower[i])));
                    }
                    if !(start[i] >= lower[i] && start[i] <= upper[i]) {
                        return Err(Error::Infeasible(format!("start value {} outside [{}, {}]", start[i], lower[i], upper[i])));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn start(&self) -> Vec<f64> {
        match self {
            MatchSearchSpace::Direct { start } => vec![start.re, start.im],
            MatchSearchSpace::Network { start, .. } => start.to_vec(),
        }
    }

    fn steps(&self, relative: f64) -> Vec<f64> {
        match self {
            MatchSearchSpace::Direct { .. } => vec![relative; 2],
            MatchSearchSpace::Network { lower, upper, .. } => (0..2).map(|i| relative * (upper[i] - lower[i])).collect(),
        }
    }

    /// Source reflection at `freq_hz`, or `None` outside the bounds or the
    /// unit disk.
    pub fn gamma_at(&self, params: &[f64], freq_hz: f64) -> Option<Complex64> {
        match self {
            MatchSearchSpace::Direct { .. } => {
                let g = Complex64::new(params[0], params[1]);
                (g.norm() < 1.0).then_some(g)
            }
            MatchSearchSpace::Network { shunt, series, lower, upper, z0, .. } => {
                if (0..2).any(|i| !(params[i] >= lower[i] && params[i] <= upper[i])) {
                    return None;
                }
                let zsh = Complex64::new(0.0, shunt.reactance(params[0], freq_hz));
                let zse = Complex64::new(0.0, series.reactance(params[1], freq_hz));
                let zsrc = Complex64::new(*z0, 0.0);
                let z = zse + zsrc * zsh / (zsrc + zsh);
                let g = (z - *z0) / (z + *z0);
                (g.norm() < 1.0 && g.is_finite()).then_some(g)
            }
        }
    }
}

/// Weighted noise figure over a set of frequencies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandObjective {
    pub freqs_hz: Vec<f64>,
    pub noise: Vec<NoiseParameters>,
    pub weights: Vec<f64>,
    pub variant: NfVariant,
}

impl BandObjective {
    pub fn uniform(freqs_hz: Vec<f64>, noise: Vec<NoiseParameters>, variant: NfVariant) -> Self {
        let weights = vec![1.0; freqs_hz.len()];
        Self { freqs_hz, noise, weights, variant }
    }

    /// Noise points of `ts` inside `[f_lo, f_hi]`, equally weighted.
    pub fn from_touchstone(ts: &Touchstone, f_lo: f64, f_hi: f64, variant: NfVariant) -> Result<Self> {
        let pts: Vec<_> = ts.noise.iter().filter(|p| p.freq_hz >= f_lo && p.freq_hz <= f_hi).collect();
        if pts.is_empty() {
            return Err(Error::invalid("band", format!("no noise data between {f_lo} and {f_hi} Hz")));
        }
        Ok(Self::uniform(
            pts.iter().map(|p| p.freq_hz).collect(),
            pts.iter().map(|p| p.params).collect(),
            variant,
        ))
    }

    pub fn validate(&self) -> Result<()> {
        if self.freqs_hz.is_empty() {
            return Err(Error::Empty("objective has no frequency points"));
        }
        if self.noise.len() != self.freqs_hz.len() || self.weights.len() != self.freqs_hz.len() {
            return Err(Error::invalid("weights", "frequencies, noise parameters and weights differ in length"));
        }
        for &f in &self.freqs_hz {
            require_positive("frequency", f)?;
        }
        for &w in &self.weights {
            require_non_negative("weight", w)?;
        }
        for np in &self.noise {
            np.validate()?;
        }
        if !(self.weights.iter().sum::<f64>() > 0.0) {
            return Err(Error::invalid("weights", "must sum to a positive value"));
        }
        Ok(())
    }

    fn weight_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Per-frequency NF [dB] for the given parameters, `None` if infeasible
    /// anywhere in the band.
    pub fn nf_profile(&self, space: &MatchSearchSpace, params: &[f64]) -> Option<Vec<f64>> {
        self.freqs_hz
            .iter()
            .zip(&self.noise)
            .map(|(&f, np)| {
                let g = space.gamma_at(params, f)?;
                nf_from_match(np, ReflectionCoefficient(g), self.variant).ok()
            })
            .collect()
    }

    /// Weighted mean NF [dB]; [`BARRIER`] when infeasible.
    pub fn evaluate(&self, space: &MatchSearchSpace, params: &[f64]) -> f64 {
        match self.nf_profile(space, params) {
            Some(nf) => nf.iter().zip(&self.weights).map(|(n, w)| n * w).sum::<f64>() / self.weight_sum(),
            None => BARRIER,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchResult {
    pub params: Vec<f64>,
    pub gamma_s: Vec<Complex64>,
    pub freqs_hz: Vec<f64>,
    pub nf_db: Vec<f64>,
    pub objective: f64,
    pub start_objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub log: Vec<IterationRecord>,
}

fn finish(space: &MatchSearchSpace, freqs: &[f64], nf_db: Vec<f64>, out: SimplexOutcome) -> MatchResult {
    let gamma_s = freqs.iter().map(|&f| space.gamma_at(&out.x, f).expect("returned point is feasible")).collect();
    MatchResult {
        params: out.x,
        gamma_s,
        freqs_hz: freqs.to_vec(),
        nf_db,
        objective: out.value,
        start_objective: out.start_value,
        iterations: out.iterations,
        converged: out.converged,
        log: out.log,
    }
}

fn check_start(obj: &BandObjective, space: &MatchSearchSpace) -> Result<()> {
    obj.validate()?;
    space.validate()?;
    if obj.nf_profile(space, &space.start()).is_none() {
        return Err(Error::Infeasible("start point gives |Γ_s| >= 1 somewhere in the band".into()));
    }
    Ok(())
}

pub fn optimize_match(obj: &BandObjective, space: &MatchSearchSpace, settings: &SimplexSettings) -> Result<MatchResult> {
    check_start(obj, space)?;
    let out = minimize(|x| obj.evaluate(space, x), &space.start(), &space.steps(settings.initial_step), settings);
    let nf = obj.nf_profile(space, &out.x).expect("best point is no worse than a feasible start");
    Ok(finish(space, &obj.freqs_hz, nf, out))
}

/// Per-frequency S-parameters used to score available gain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GainModel {
    pub records: Vec<TwoPortRecord>,
}

impl GainModel {
    fn record_at(&self, freq_hz: f64) -> Result<&TwoPortRecord> {
        self.records
            .iter()
            .find(|r| (r.freq_hz - freq_hz).abs() <= 1e-9 * freq_hz.abs())
            .ok_or_else(|| Error::invalid("gain model", format!("no S-parameters at {freq_hz} Hz")))
    }

    fn aligned(&self, freqs: &[f64]) -> Result<Vec<TwoPortRecord>> {
        freqs.iter().map(|&f| self.record_at(f).copied()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub nf_weight: f64,
    pub mean_nf_db: f64,
    pub mean_gain_db: f64,
    pub params: Vec<f64>,
    pub iterations: usize,
}

/// Transducer gain [dB] for each record at its own Γ_s.
fn gains_db(records: &[TwoPortRecord], space: &MatchSearchSpace, params: &[f64]) -> Option<Vec<f64>> {
    records
        .iter()
        .map(|r| space.gamma_at(params, r.freq_hz).map(|g| linear_to_db(r.transducer_gain(g))))
        .collect()
}

/// Optimises `w·NF − (1 − w)·G` for every weight `w` in `nf_weights` and
/// reports the NF and gain reached, averaged with the objective's weights.
pub fn tradeoff_report(
    obj: &BandObjective,
    space: &MatchSearchSpace,
    gain: &GainModel,
    nf_weights: &[f64],
    settings: &SimplexSettings,
) -> Result<Vec<TradeoffPoint>> {
    check_start(obj, space)?;
    let records = gain.aligned(&obj.freqs_hz)?;
    let wsum = obj.weight_sum();
    let mean = |v: &[f64]| v.iter().zip(&obj.weights).map(|(x, w)| x * w).sum::<f64>() / wsum;
    let steps = space.steps(settings.initial_step);
    let mut out = Vec::with_capacity(nf_weights.len());
    for &w in nf_weights {
        if !(0.0..=1.0).contains(&w) {
            return Err(Error::invalid("nf_weight", format!("{w} outside [0, 1]")));
        }
        let f = |x: &[f64]| match (obj.nf_profile(space, x), gains_db(&records, space, x)) {
            (Some(nf), Some(g)) if g.iter().all(|v| v.is_finite()) => w * mean(&nf) - (1.0 - w) * mean(&g),
            _ => BARRIER,
        };
        let res = minimize(f, &space.start(), &steps, settings);
        let nf = obj.nf_profile(space, &res.x).expect("feasible");
        let g = gains_db(&records, space, &res.x).expect("feasible");
        out.push(TradeoffPoint {
            nf_weight: w,
            mean_nf_db: mean(&nf),
            mean_gain_db: mean(&g),
            params: res.x,
            iterations: res.iterations,
        });
    }
    Ok(out)
}

/// CSV with columns `nf_weight,nf_db,gain_db,p0,p1`.
pub fn tradeoff_csv(points: &[TradeoffPoint]) -> String {
    let mut s = String::from("nf_weight,nf_db,gain_db,p0,p1\n");
    for p in points {
        s.push_str(&format!(
            "{},{:.9},{:.9},{:.12},{:.12}\n",
            p.nf_weight, p.mean_nf_db, p.mean_gain_db, p.params[0], p.params[1]
        ));
    }
    s
}
