use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimplexSettings {
    /// Per-run iteration cap.
    pub max_iterations: usize,
    /// Stop once every vertex is within this distance (max-norm) of the best.
    pub tolerance: f64,
    /// Extra runs restarted from the incumbent.
    pub restarts: usize,
    /// Initial simplex edge, per parameter.
    pub initial_step: f64,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-10,
            restarts: 3,
            initial_step: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub run: usize,
    pub iteration: usize,
    pub best: f64,
    pub spread: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub start_value: f64,
    pub iterations: usize,
    /// Whether the final run met the spread tolerance.
    pub converged: bool,
    pub log: Vec<IterationRecord>,
}

fn spread(simplex: &[Vec<f64>]) -> f64 {
    let best = &simplex[0];
    simplex[1..]
        .iter()
        .flat_map(|v| v.iter().zip(best).map(|(a, b)| (a - b).abs()))
        .fold(0.0, f64::max)
}

fn sort(simplex: &mut Vec<Vec<f64>>, values: &mut Vec<f64>) {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    // Stable on ties so the iterate sequence is reproducible.
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    *simplex = idx.iter().map(|&i| simplex[i].clone()).collect();
    *values = idx.iter().map(|&i| values[i]).collect();
}

fn lerp(a: &[f64], b: &[f64], t: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect()
}

/// One Nelder–Mead run from `start`. Returns the sorted final simplex
/// with its values and whether it converged.
fn run(
    f: &mut impl FnMut(&[f64]) -> f64,
    start: &[f64],
    start_value: f64,
    steps: &[f64],
    settings: &SimplexSettings,
    run_index: usize,
    log: &mut Vec<IterationRecord>,
) -> (Vec<f64>, f64, usize, bool) {
    let n = start.len();
    let mut simplex = vec![start.to_vec()];
    let mut values = vec![start_value];
    for i in 0..n {
        let mut v = start.to_vec();
        v[i] += steps[i];
        values.push(f(&v));
        simplex.push(v);
    }
    sort(&mut simplex, &mut values);

    let mut iterations = 0;
    let mut converged = false;
    while iterations < settings.max_iterations {
        let s = spread(&simplex);
        if s < settings.tolerance {
            converged = true;
            break;
        }
        iterations += 1;
        let centroid: Vec<f64> = (0..n)
            .map(|d| simplex[..n].iter().map(|v| v[d]).sum::<f64>() / n as f64)
            .collect();
        let worst = simplex[n].clone();
        let reflected = lerp(&centroid, &worst, -1.0);
        let fr = f(&reflected);
        if fr < values[0] {
            let expanded = lerp(&centroid, &worst, -2.0);
            let fe = f(&expanded);
            if fe < fr {
                simplex[n] = expanded;
                values[n] = fe;
            } else {
                simplex[n] = reflected;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = reflected;
            values[n] = fr;
        } else {
            let (candidate, fc) = if fr < values[n] {
                let c = lerp(&centroid, &reflected, 0.5);
                let fc = f(&c);
                (c, fc)
            } else {
                let c = lerp(&centroid, &worst, 0.5);
                let fc = f(&c);
                (c, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = candidate;
                values[n] = fc;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    simplex[i] = lerp(&best, &simplex[i], 0.5);
                    values[i] = f(&simplex[i]);
                }
            }
        }
        sort(&mut simplex, &mut values);
        log.push(IterationRecord {
            run: run_index,
            iteration: iterations,
            best: values[0],
            spread: spread(&simplex),
        });
    }
    (simplex.swap_remove(0), values[0], iterations, converged)
}

/// Nelder–Mead minimisation with restarts. The start point is always one
/// vertex of the first simplex and the best vertex is never discarded, so
/// the result is never worse than the start.
pub fn minimize(mut f: impl FnMut(&[f64]) -> f64, start: &[f64], steps: &[f64], settings: &SimplexSettings) -> SimplexOutcome {
    let start_value = f(start);
    let mut log = Vec::new();
    let mut best = start.to_vec();
    let mut best_value = start_value;
    let mut iterations = 0;
    let mut converged = false;
    for r in 0..=settings.restarts {
        let (x, v, it, conv) = run(&mut f, &best, best_value, steps, settings, r, &mut log);
        iterations += it;
        converged = conv;
        if v <= best_value {
            best = x;
            best_value = v;
        }
    }
    SimplexOutcome {
        x: best,
        value: best_value,
        start_value,
        iterations,
        converged,
        log,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let settings = SimplexSettings { max_iterations: 2000, ..Default::default() };
        let out = minimize(f, &[-1.2, 1.0], &[0.1, 0.1], &settings);
        assert!((out.x[0] - 1.0).abs() < 1e-6 && (out.x[1] - 1.0).abs() < 1e-6, "{:?}", out.x);
    }

    #[test]
    fn log_is_monotone_within_each_run() {
        let f = |x: &[f64]| (x[0] - 0.3).powi(2) + 2.0 * (x[1] + 0.2).powi(2);
        let out = minimize(f, &[0.0, 0.0], &[0.1, 0.1], &SimplexSettings::default());
        for w in out.log.windows(2) {
            if w[0].run == w[1].run {
                assert!(w[1].best <= w[0].best);
            }
        }
        assert!(out.value <= out.start_value);
    }
}
