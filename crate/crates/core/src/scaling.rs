//! Accuracy of the surrogate as a function of the distance from its
//! reference point: energy error and gradient dissimilarity `1 - f` at random
//! points on the boundary of the `inf`-ball of radius `delta`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzCircuit;
use crate::descent::{run_natural_gradient_with_ground, MetricMode, NoiseSpec, OptimizerConfig};
use crate::error::{QadError, Result};
use crate::pauli::PauliSum;
use crate::scalar::{max_abs, one_minus_similarity, Real};
use crate::simulator::{energy_gradient, ground_energy};
use crate::surrogate::SurrogateModel;

/// Steps of noiseless natural gradient used to move close to an optimum
/// before the study.
pub const PRELIMINARY_STEPS: usize = 2_000;

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn loglog_fit(x: &[f64], y: &[f64]) -> Result<LogLogFit> {
    if x.len() != y.len() {
        return Err(QadError::DimensionMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    if x.len() < 2 || x.iter().chain(y).any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(QadError::InvalidArgument(
            "log-log fit needs at least two strictly positive points".into(),
        ));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = ly.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LogLogFit {
        slope,
        intercept,
        r_squared,
    })
}

/// `count` values spaced geometrically from `lo` to `hi`.
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let r = (hi / lo).ln() / (count - 1) as f64;
    (0..count).map(|i| lo * (r * i as f64).exp()).collect()
}

/// Default distances: 8 points from 0.01 to 0.3.
pub fn default_delta_grid() -> Vec<f64> {
    geometric_grid(0.01, 0.3, 8)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingSample {
    pub delta: f64,
    pub energy_error: f64,
    pub one_minus_f: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub samples: Vec<ScalingSample>,
    /// `(delta, mean energy error, mean 1 - f)` per grid point.
    pub means: Vec<(f64, f64, f64)>,
    /// `None` when some mean is zero (for example an exact single-gate model).
    pub energy_fit: Option<LogLogFit>,
    pub similarity_fit: Option<LogLogFit>,
}

/// Builds a noiseless model at the circuit's reference point and evaluates
/// it at `samples` points per `delta`. Each point is drawn uniformly from the
/// cube and rescaled so that `|theta|_inf = delta` exactly.
pub fn scaling_study<T: Real>(
    circuit: &AnsatzCircuit<T>,
    h: &PauliSum<T>,
    deltas: &[f64],
    samples: usize,
    seed: u64,
) -> Result<ScalingStudy> {
    if let Some(bad) = deltas.iter().find(|d| !(**d > 0.0 && **d < std::f64::consts::FRAC_PI_2)) {
        return Err(QadError::InvalidArgument(format!("delta must lie in (0, pi/2), got {bad}")));
    }
    if samples == 0 {
        return Err(QadError::InvalidArgument("need at least one sample per delta".into()));
    }
    let model = SurrogateModel::from_circuit(circuit, h, None, 0, true)?;
    let nu = circuit.nu();
    let jobs: Vec<(usize, usize)> = (0..deltas.len()).flat_map(|d| (0..samples).map(move |s| (d, s))).collect();
    let out: Vec<ScalingSample> = jobs
        .par_iter()
        .map(|&(d, s)| {
            let delta = deltas[d];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream((d * samples + s) as u64);
            let raw: Vec<f64> = (0..nu).map(|_| rng.random_range(-1.0..1.0)).collect();
            let scale = delta / max_abs(&raw);
            let theta: Vec<T> = raw.iter().map(|r| T::lit(r * scale)).collect();
            let e_model = model.eval_energy(&theta)?;
            let e_true = circuit.energy(&theta, h)?;
            let g_model = model.eval_gradient(&theta)?;
            let g_true = energy_gradient(circuit, &theta, h)?;
            Ok(ScalingSample {
                delta,
                energy_error: (e_model - e_true).abs().as_f64(),
                one_minus_f: one_minus_similarity(&g_model, &g_true).as_f64(),
            })
        })
        .collect::<Result<_>>()?;

    let means: Vec<(f64, f64, f64)> = deltas
        .iter()
        .enumerate()
        .map(|(d, &delta)| {
            let chunk = &out[d * samples..(d + 1) * samples];
            let n = samples as f64;
            (
                delta,
                chunk.iter().map(|s| s.energy_error).sum::<f64>() / n,
                chunk.iter().map(|s| s.one_minus_f).sum::<f64>() / n,
            )
        })
        .collect();
    let xs: Vec<f64> = means.iter().map(|m| m.0).collect();
    let es: Vec<f64> = means.iter().map(|m| m.1).collect();
    let fs: Vec<f64> = means.iter().map(|m| m.2).collect();
    Ok(ScalingStudy {
        samples: out,
        energy_fit: loglog_fit(&xs, &es).ok(),
        similarity_fit: loglog_fit(&xs, &fs).ok(),
        means,
    })
}

/// Runs `steps` noiseless natural-gradient steps (step 0.01, eta 0.01) and
/// returns the circuit re-anchored at the final point.
pub fn prepare_near_optimum<T: Real>(circuit: &AnsatzCircuit<T>, h: &PauliSum<T>, steps: usize) -> Result<AnsatzCircuit<T>> {
    let config = OptimizerConfig {
        step_size: 0.01,
        eta: 0.01,
        max_outer: steps,
        convergence_threshold: 0.0,
        metric: MetricMode::Exact,
        ..OptimizerConfig::default()
    };
    let ground = ground_energy(h)?;
    let trace = run_natural_gradient_with_ground(circuit, h, &config, &NoiseSpec::noiseless(), ground)?;
    circuit.with_theta_ref(trace.final_theta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::parse_pauli_sum;

    #[test]
    fn fit_recovers_power_law() {
        let x = geometric_grid(0.01, 0.3, 6);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v.powi(3)).collect();
        let fit = loglog_fit(&x, &y).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
        assert!((fit.intercept - 2f64.ln()).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        assert!(loglog_fit(&[1.0, 2.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = default_delta_grid();
        assert_eq!(g.len(), 8);
        assert!((g[0] - 0.01).abs() < 1e-15);
        assert!((g[7] - 0.3).abs() < 1e-12);
    }

    #[test]
    fn single_gate_model_is_exact() {
        let c = AnsatzCircuit::<f64>::new(1, vec!["X".parse().unwrap()], vec![0.4]).unwrap();
        let h = parse_pauli_sum("1 Z").unwrap();
        let study = scaling_study(&c, &h, &[0.01, 0.1, 0.3], 20, 1).unwrap();
        assert!(study.samples.iter().all(|s| s.energy_error < 1e-14 && s.one_minus_f < 1e-14));
        for s in &study.samples {
            assert!(s.delta > 0.0);
        }
    }
}
