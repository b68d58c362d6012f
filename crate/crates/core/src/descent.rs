//! The two-loop analytic descent optimizer, the natural-gradient baseline it
//! is compared against, the shot-noise precision policy and trace output.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzCircuit;
use crate::error::{QadError, Result};
use crate::linalg::DenseMatrix;
use crate::metric::{qfi_exact, qfi_surrogate_estimate, qfi_surrogate_eval, MetricTensor};
use crate::pauli::PauliSum;
use crate::scalar::{max_abs, norm2, one_minus_similarity, Real};
use crate::simulator::{energy_gradient, ground_energy};
use crate::surrogate::{gaussian, query_rng, schedule_len, QueryNoise, SurrogateModel};

/// Smallest per-query standard deviation used when noise is enabled.
pub const NOISE_FLOOR: f64 = 1e-8;

/// Shot-noise model: every energy query carries Gaussian noise whose size is
/// tied to the current gradient norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseSpec {
    pub enabled: bool,
    /// Target uncertainty of each `eB` coefficient is
    /// `relative_gradient_precision * |g| / sqrt(nu)`; the other classes use
    /// `relative_gradient_precision * |g|`.
    pub relative_gradient_precision: f64,
    pub rng_seed: u64,
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            enabled: false,
            relative_gradient_precision: 0.1,
            rng_seed: 0,
        }
    }
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        Self::default()
    }

    pub fn with_seed(seed: u64) -> Self {
        Self {
            enabled: true,
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.relative_gradient_precision > 0.0) {
            return Err(QadError::InvalidArgument(format!(
                "relative_gradient_precision must be positive, got {}",
                self.relative_gradient_precision
            )));
        }
        Ok(())
    }
}

/// Coefficient precisions and the raw-query noise that realizes them.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Precision<T> {
    /// Standard deviation of each `eB_k`.
    pub coefficient_b: T,
    /// Standard deviation of `eA`, `eC_k` and `eD_kl`.
    pub coefficient_other: T,
    pub query: QueryNoise<T>,
    /// Whether any raw-query sigma was raised to [`NOISE_FLOOR`].
    pub floored: bool,
}

/// `eps_B = p |g| / sqrt(nu)` and `eps = p |g|`. Raw queries get
/// `eps_B / sqrt 2` for `eB` (two per coefficient), `eps` for `eA` and `eC`,
/// and `eps / 2` for `eD` (four per coefficient). Returns `None` when noise
/// is disabled.
pub fn precision_policy<T: Real>(g_norm: T, nu: usize, spec: &NoiseSpec) -> Option<Precision<T>> {
    if !spec.enabled {
        return None;
    }
    let p = T::lit(spec.relative_gradient_precision);
    let eps_b = p * g_norm / T::lit(nu.max(1) as f64).sqrt();
    let eps = p * g_norm;
    let floor = T::lit(NOISE_FLOOR);
    let raw = [eps_b / T::two().sqrt(), eps, eps, eps * T::half()];
    let floored = raw.iter().any(|s| *s < floor);
    let [sigma_b, sigma_a, sigma_c, sigma_d] = raw.map(|s| s.max(floor));
    Some(Precision {
        coefficient_b: eps_b,
        coefficient_other: eps,
        query: QueryNoise {
            sigma_a,
            sigma_b,
            sigma_c,
            sigma_d,
        },
        floored,
    })
}

/// Which metric the inner loop preconditions with.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricMode {
    /// Exact metric at the current inner-loop point.
    Exact,
    /// Exact metric at the reference point, factorized once per outer iteration.
    Frozen,
    /// Two-class overlap surrogate evaluated at the current inner-loop point.
    Surrogate,
    /// Plain gradient descent.
    Identity,
}

impl MetricMode {
    pub fn name(self) -> &'static str {
        match self {
            MetricMode::Exact => "exact",
            MetricMode::Frozen => "frozen",
            MetricMode::Surrogate => "surrogate",
            MetricMode::Identity => "identity",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub step_size: f64,
    /// Tikhonov shift added to the metric before solving.
    pub eta: f64,
    /// Outer iterations for analytic descent, steps for natural gradient.
    pub max_outer: usize,
    pub max_inner: usize,
    /// The inner loop stops after the first step that leaves the box
    /// `|theta - theta0|_inf <= trust_radius`.
    pub trust_radius: f64,
    /// Check the model against the device every `feedback_period` inner
    /// steps; 0 disables feedback.
    pub feedback_period: usize,
    /// Largest accepted `|E_device - E_model|` at a feedback check.
    pub feedback_tolerance: f64,
    /// Also compare model and device gradients at feedback checks.
    pub similarity_feedback: bool,
    /// Abort the inner loop when `1 - f` exceeds this value.
    pub similarity_abort: f64,
    /// Stop once the true energy is this close to the ground energy.
    pub convergence_threshold: f64,
    /// Stop the inner loop when the model gradient's inf-norm drops below this.
    pub inner_gradient_tolerance: f64,
    pub metric: MetricMode,
    /// Dispatch the energy queries of one model build concurrently.
    pub parallel_queries: bool,
    /// Record every n-th inner step in the trace (the last step of each
    /// inner loop is always recorded).
    pub inner_record_interval: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            step_size: 0.01,
            eta: 0.01,
            max_outer: 200,
            max_inner: 10_000,
            trust_radius: 0.2,
            feedback_period: 0,
            feedback_tolerance: 1e-2,
            similarity_feedback: false,
            similarity_abort: 5e-2,
            convergence_threshold: 1e-3,
            inner_gradient_tolerance: 1e-6,
            metric: MetricMode::Exact,
            parallel_queries: true,
            inner_record_interval: 1,
        }
    }
}

impl OptimizerConfig {
    /// Analytic descent on the spin ring: inner step 0.01.
    pub fn spin_ring_analytic() -> Self {
        Self::default()
    }

    /// Natural-gradient baseline on the spin ring: step 0.01.
    pub fn spin_ring_natural() -> Self {
        Self {
            max_outer: 50_000,
            ..Self::default()
        }
    }

    /// Analytic descent on molecular Hamiltonians: inner step 0.001.
    pub fn molecular_analytic() -> Self {
        Self {
            step_size: 0.001,
            max_inner: 20_000,
            ..Self::default()
        }
    }

    /// Natural-gradient baseline on molecular Hamiltonians: step 0.1.
    pub fn molecular_natural() -> Self {
        Self {
            step_size: 0.1,
            max_outer: 50_000,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(QadError::InvalidArgument(what.to_string()));
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return bad("step_size must be positive and finite");
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) {
            return bad("eta must be non-negative and finite");
        }
        if !(self.trust_radius > 0.0 && self.trust_radius < std::f64::consts::FRAC_PI_2) {
            return bad("trust_radius must lie in (0, pi/2)");
        }
        if !(self.convergence_threshold >= 0.0) {
            return bad("convergence_threshold must be non-negative");
        }
        if !(self.similarity_abort >= 0.0) {
            return bad("similarity_abort must be non-negative");
        }
        if !(self.feedback_tolerance >= 0.0) {
            return bad("feedback_tolerance must be non-negative");
        }
        if !(self.inner_gradient_tolerance >= 0.0) {
            return bad("inner_gradient_tolerance must be non-negative");
        }
        if self.inner_record_interval == 0 {
            return bad("inner_record_interval must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Phase {
    Outer,
    Inner,
    Feedback,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Outer => "outer",
            Phase::Inner => "inner",
            Phase::Feedback => "feedback",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord<T> {
    pub phase: Phase,
    pub outer: usize,
    pub inner: usize,
    pub theta: Option<Vec<T>>,
    pub energy_true: T,
    pub energy_model: Option<T>,
    pub distance_to_ground: T,
    /// In units of one conventional gradient step.
    pub cumulative_cost: f64,
    pub cumulative_raw_queries: u64,
}

/// Why an inner loop stopped.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerExit {
    MaxInner,
    TrustRadius,
    GradientTolerance,
    SimilarityAbort,
    FeedbackDeviation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    BudgetExhausted,
    Diverged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub method: String,
    pub metric: String,
    pub nu: usize,
    pub ground_energy: f64,
    pub noise_enabled: bool,
    pub noise_seed: u64,
    pub noise_floor: f64,
    /// Model builds (or gradient estimates) whose noise was raised to the floor.
    pub floored_builds: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizationTrace<T> {
    pub records: Vec<TraceRecord<T>>,
    pub inner_exits: Vec<InnerExit>,
    pub termination: Termination,
    pub final_theta: Vec<T>,
    pub metadata: TraceMetadata,
}

impl<T: Real> OptimizationTrace<T> {
    /// Cost at which the true energy first came within `threshold` of the
    /// ground energy.
    pub fn cost_to_reach(&self, threshold: f64) -> Option<f64> {
        self.records
            .iter()
            .find(|r| r.distance_to_ground.as_f64() < threshold)
            .map(|r| r.cumulative_cost)
    }

    pub fn final_distance(&self) -> T {
        self.records.last().map(|r| r.distance_to_ground).unwrap_or(T::infinity())
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(CSV_COLUMNS)?;
        for r in &self.records {
            w.write_record([
                r.phase.as_str().to_string(),
                r.outer.to_string(),
                r.inner.to_string(),
                r.cumulative_cost.to_string(),
                r.cumulative_raw_queries.to_string(),
                r.energy_true.to_string(),
                r.energy_model.map(|e| e.to_string()).unwrap_or_default(),
                r.distance_to_ground.to_string(),
            ])?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

pub const CSV_COLUMNS: [&str; 8] = [
    "phase",
    "outer",
    "inner",
    "cumulative_cost",
    "cumulative_raw_queries",
    "energy_true",
    "energy_model",
    "distance_to_ground",
];

/// One row of a trace CSV as read back from disk.
#[derive(Clone, Debug, PartialEq, Deserialize)]
pub struct CsvRow {
    pub phase: Phase,
    pub outer: usize,
    pub inner: usize,
    pub cumulative_cost: f64,
    pub cumulative_raw_queries: u64,
    pub energy_true: f64,
    pub energy_model: Option<f64>,
    pub distance_to_ground: f64,
}

pub fn read_trace_csv<R: Read>(reader: R) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_reader(reader);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != CSV_COLUMNS {
        return Err(QadError::InvalidArgument(format!("unexpected trace header {header:?}")));
    }
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// SplitMix64 step, used to derive independent per-iteration seeds.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Result of comparing the model against the device at one inner-loop point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeedbackOutcome<T> {
    pub deviation: T,
    pub one_minus_f: Option<T>,
    pub device_energy: T,
    pub raw_queries: u64,
}

/// Queries the device energy at `theta_ref + theta` once and reports
/// `|E_device - E_model(theta)|`. With `similarity` set, also estimates the
/// device gradient by parameter shifts (`2 nu` more queries) and reports
/// `1 - f` against the model gradient.
pub fn feedback_check<T: Real>(
    model: &SurrogateModel<T>,
    circuit: &AnsatzCircuit<T>,
    h: &PauliSum<T>,
    theta: &[T],
    noise: Option<&QueryNoise<T>>,
    seed: u64,
    similarity: bool,
) -> Result<FeedbackOutcome<T>> {
    let nu = circuit.nu();
    let mut e = circuit.energy(theta, h)?;
    if let Some(n) = noise {
        e += gaussian(&mut query_rng(seed, 0), n.sigma_a);
    }
    let deviation = (e - model.eval_energy(theta)?).abs();
    let mut raw = 1;
    let one_minus_f = if similarity {
        let device = noisy_parameter_shift(circuit, h, theta, noise.map(|n| n.sigma_b), seed, 1)?;
        raw += 2 * nu as u64;
        let model_g = model.eval_gradient_direct(theta)?;
        Some(one_minus_similarity(&model_g, &device))
    } else {
        None
    };
    Ok(FeedbackOutcome {
        deviation,
        one_minus_f,
        device_energy: e,
        raw_queries: raw,
    })
}

/// `g_k = [E(theta + pi/2 v_k) - E(theta - pi/2 v_k)] / 2` with Gaussian
/// noise of std `sigma` on every raw query. The `+` and `-` queries of axis
/// `k` use streams `offset + 2k` and `offset + 2k + 1`, matching the `B`
/// entries of the surrogate query schedule when `offset = 1`.
fn noisy_parameter_shift<T: Real>(
    circuit: &AnsatzCircuit<T>,
    h: &PauliSum<T>,
    theta: &[T],
    sigma: Option<T>,
    seed: u64,
    offset: u64,
) -> Result<Vec<T>> {
    let shift = T::FRAC_PI_2();
    let mut work = theta.to_vec();
    let noisy = |e: T, stream: u64| match sigma {
        Some(s) if s > T::zero() => e + gaussian(&mut query_rng(seed, stream), s),
        _ => e,
    };
    (0..theta.len())
        .map(|k| {
            work[k] = theta[k] + shift;
            let plus = noisy(circuit.energy(&work, h)?, offset + 2 * k as u64);
            work[k] = theta[k] - shift;
            let minus = noisy(circuit.energy(&work, h)?, offset + 2 * k as u64 + 1);
            work[k] = theta[k];
            Ok((plus - minus) * T::half())
        })
        .collect()
}

/// Factorized `(F + eta I)` for repeated solves, or the metric to solve
/// against at each step.
enum Preconditioner<T> {
    Factor(DenseMatrix<T>),
    Identity(T),
}

impl<T: Real> Preconditioner<T> {
    fn factor(f: &MetricTensor<T>, eta: T) -> Result<Self> {
        let n = f.nu();
        let shifted = DenseMatrix::from_fn(n, n, |i, j| if i == j { f[(i, j)] + eta } else { f[(i, j)] });
        match shifted.cholesky() {
            Some(l) => Ok(Preconditioner::Factor(l)),
            None => Err(QadError::NotPositiveDefinite {
                smallest: shifted.symmetric_eigenvalues()[0].as_f64(),
            }),
        }
    }

    fn solve(&self, g: &[T]) -> Vec<T> {
        match self {
            Preconditioner::Factor(l) => l.cholesky_solve(g),
            Preconditioner::Identity(scale) => g.iter().map(|x| *x / *scale).collect(),
        }
    }
}

fn metric_preconditioner<T: Real>(
    mode: MetricMode,
    circuit: &AnsatzCircuit<T>,
    theta: &[T],
    eta: T,
    surrogate: Option<&crate::metric::MetricSurrogate<T>>,
) -> Result<Preconditioner<T>> {
    match mode {
        MetricMode::Exact | MetricMode::Frozen => Preconditioner::factor(&qfi_exact(circuit, theta)?, eta),
        MetricMode::Surrogate => {
            let s = surrogate.expect("surrogate metric is estimated before use");
            Preconditioner::factor(&qfi_surrogate_eval(s, theta)?, eta)
        }
        MetricMode::Identity => Ok(Preconditioner::Identity(T::one() + eta)),
    }
}

struct Recorder<T> {
    ground: T,
    cost: f64,
    raw: u64,
    records: Vec<TraceRecord<T>>,
}

impl<T: Real> Recorder<T> {
    fn push(&mut self, phase: Phase, outer: usize, inner: usize, energy_true: T, energy_model: Option<T>, theta: Option<Vec<T>>) {
        self.records.push(TraceRecord {
            phase,
            outer,
            inner,
            theta,
            energy_true,
            energy_model,
            distance_to_ground: energy_true - self.ground,
            cumulative_cost: self.cost,
            cumulative_raw_queries: self.raw,
        });
    }
}

fn check_inputs<T: Real>(circuit: &AnsatzCircuit<T>, h: &PauliSum<T>, config: &OptimizerConfig, noise: &NoiseSpec) -> Result<()> {
    config.validate()?;
    noise.validate()?;
    if circuit.num_qubits() != h.num_qubits() {
        return Err(QadError::DimensionMismatch {
            expected: circuit.num_qubits(),
            found: h.num_qubits(),
        });
    }
    Ok(())
}

/// Two nested loops: each outer iteration estimates a fresh surrogate at the
/// current reference point (2 cost units), and the inner loop runs natural
/// gradient on the surrogate until it leaves the trust region, stalls,
/// fails a feedback check or exhausts `max_inner`. The circuit's reference
/// point then moves to the last inner iterate.
pub fn run_analytic_descent<T: Real>(
    circuit: &AnsatzCircuit<T>,
    h: &PauliSum<T>,
    config: &OptimizerConfig,
    noise: &NoiseSpec,
) -> Result<OptimizationTrace<T>> {
    let ground = ground_energy(h)?;
    run_analytic_descent_with_ground(circuit, h, config, noise, ground)
}

/// [`run_analytic_descent`] with a precomputed ground energy.
pub fn run_analytic_descent_with_ground<T: Real>(
    circuit: &AnsatzCircuit<T>,
    h: &PauliSum<T>,
    config: &OptimizerConfig,
    noise: &NoiseSpec,
    ground: T,
) -> Result<OptimizationTrace<T>> {
    check_inputs(circuit, h, config, noise)?;
    let nu = circuit.nu();
    let step = T::lit(config.step_size);
    let eta = T::lit(config.eta);
    let radius = T::lit(config.trust_radius);
    let mut rec = Recorder {
        ground,
        cost: 0.0,
        raw: 0,
        records: Vec::new(),
    };
    let mut exits = Vec::new();
    let mut floored_builds = 0;
    let mut circ = circuit.clone();
    let zero = vec![T::zero(); nu];
    let mut termination = Termination::BudgetExhausted;

    'outer: for outer in 0..config.max_outer {
        let e_ref = circ.energy(&zero, h)?;
        if !e_ref.is_finite() {
            termination = Termination::Diverged;
            break;
        }
        if (e_ref - ground).as_f64() < config.convergence_threshold {
            rec.push(Phase::Outer, outer, 0, e_ref, None, Some(circ.theta_ref().to_vec()));
            termination = Termination::Converged;
            break;
        }
        let g_norm = norm2(&energy_gradient(&circ, &zero, h)?);
        let precision = precision_policy(g_norm, nu, noise);
        if precision.is_some_and(|p| p.floored) {
            floored_builds += 1;
        }
        let qnoise = precision.map(|p| p.query);
        let seed = derive_seed(noise.rng_seed, outer as u64);
        let model = SurrogateModel::from_circuit(&circ, h, qnoise.as_ref(), seed, config.parallel_queries)?;
        rec.cost += 2.0;
        rec.raw += schedule_len(nu) as u64;
        rec.push(Phase::Outer, outer, 0, e_ref, Some(model.e_a), Some(circ.theta_ref().to_vec()));

        let metric_surrogate = match config.metric {
            MetricMode::Surrogate => Some(qfi_surrogate_estimate(&circ)?),
            _ => None,
        };
        let frozen = match config.metric {
            MetricMode::Frozen => Some(metric_preconditioner(MetricMode::Frozen, &circ, &zero, eta, None)?),
            _ => None,
        };

        let mut theta = zero.clone();
        let mut exit = InnerExit::MaxInner;
        for inner in 1..=config.max_inner {
            let grad = match model.eval_gradient(&theta) {
                Ok(g) => g,
                Err(QadError::TrustRegion { .. }) => {
                    exit = InnerExit::TrustRadius;
                    break;
                }
                Err(e) => return Err(e),
            };
            if max_abs(&grad).as_f64() < config.inner_gradient_tolerance {
                exit = InnerExit::GradientTolerance;
                break;
            }
            let dir = match &frozen {
                Some(p) => p.solve(&grad),
                None => metric_preconditioner(config.metric, &circ, &theta, eta, metric_surrogate.as_ref())?.solve(&grad),
            };
            for (t, d) in theta.iter_mut().zip(&dir) {
                *t -= step * *d;
            }
            let left_region = max_abs(&theta) > radius;
            let last = inner == config.max_inner || left_region;
            let record = last || inner % config.inner_record_interval == 0;
            if record {
                let e_model = model.eval_energy(&theta)?;
                let e_true = circ.energy(&theta, h)?;
                if !(e_true.is_finite() && e_model.is_finite()) {
                    rec.push(Phase::Inner, outer, inner, e_true, Some(e_model), None);
                    termination = Termination::Diverged;
                    break 'outer;
                }
                rec.push(Phase::Inner, outer, inner, e_true, Some(e_model), None);
            }
            if left_region {
                exit = InnerExit::TrustRadius;
                break;
            }
            if config.feedback_period > 0 && inner % config.feedback_period == 0 {
                let fb = feedback_check(
                    &model,
                    &circ,
                    h,
                    &theta,
                    qnoise.as_ref(),
                    derive_seed(seed, inner as u64),
                    config.similarity_feedback,
                )?;
                rec.raw += fb.raw_queries;
                rec.push(Phase::Feedback, outer, inner, fb.device_energy, Some(model.eval_energy(&theta)?), None);
                if fb.deviation.as_f64() > config.feedback_tolerance {
                    exit = InnerExit::FeedbackDeviation;
                    break;
                }
                if fb.one_minus_f.is_some_and(|v| v.as_f64() > config.similarity_abort) {
                    exit = InnerExit::SimilarityAbort;
                    break;
                }
            }
        }
        exits.push(exit);
        circ = circ.rebase(&theta)?;
    }
    if termination == Termination::BudgetExhausted {
        let e = circ.energy(&zero, h)?;
        if (e - ground).as_f64() < config.convergence_threshold {
            termination = Termination::Converged;
        }
        rec.push(Phase::Outer, config.max_outer, 0, e, None, Some(circ.theta_ref().to_vec()));
    }
    Ok(OptimizationTrace {
        records: rec.records,
        inner_exits: exits,
        termination,
        final_theta: circ.theta_ref().to_vec(),
        metadata: TraceMetadata {
            method: "analytic_descent".into(),
            metric: config.metric.name().into(),
            nu,
            ground_energy: ground.as_f64(),
            noise_enabled: noise.enabled,
            noise_seed: noise.rng_seed,
            noise_floor: NOISE_FLOOR,
            floored_builds,
        },
    })
}

/// Conventional natural gradient: every step estimates the gradient by
/// parameter shifts (`2 nu` queries, 1 cost unit) and moves by
/// `-step_size (F + eta I)^{-1} g`. Runs for at most `max_outer` steps.
pub fn run_natural_gradient<T: Real>(
    circuit: &AnsatzCircuit<T>,
    h: &PauliSum<T>,
    config: &OptimizerConfig,
    noise: &NoiseSpec,
) -> Result<OptimizationTrace<T>> {
    let ground = ground_energy(h)?;
    run_natural_gradient_with_ground(circuit, h, config, noise, ground)
}

/// [`run_natural_gradient`] with a precomputed ground energy.
pub fn run_natural_gradient_with_ground<T: Real>(
    circuit: &AnsatzCircuit<T>,
    h: &PauliSum<T>,
    config: &OptimizerConfig,
    noise: &NoiseSpec,
    ground: T,
) -> Result<OptimizationTrace<T>> {
    check_inputs(circuit, h, config, noise)?;
    let nu = circuit.nu();
    let step = T::lit(config.step_size);
    let eta = T::lit(config.eta);
    let mut rec = Recorder {
        ground,
        cost: 0.0,
        raw: 0,
        records: Vec::new(),
    };
    let mut theta = vec![T::zero(); nu];
    let mut floored_builds = 0;
    let mut termination = Termination::BudgetExhausted;
    let surrogate = match config.metric {
        MetricMode::Surrogate => Some(qfi_surrogate_estimate(circuit)?),
        _ => None,
    };
    let frozen = match config.metric {
        MetricMode::Frozen => Some(metric_preconditioner(MetricMode::Frozen, circuit, &theta, eta, None)?),
        _ => None,
    };

    for k in 0..=config.max_outer {
        let e = circuit.energy(&theta, h)?;
        if !e.is_finite() {
            rec.push(Phase::Outer, k, 0, e, None, None);
            termination = Termination::Diverged;
            break;
        }
        rec.push(Phase::Outer, k, 0, e, None, None);
        if (e - ground).as_f64() < config.convergence_threshold {
            termination = Termination::Converged;
            break;
        }
        if k == config.max_outer {
            break;
        }
        let g_norm = norm2(&energy_gradient(circuit, &theta, h)?);
        let precision = precision_policy(g_norm, nu, noise);
        if precision.is_some_and(|p| p.floored) {
            floored_builds += 1;
        }
        let sigma = precision.map(|p| p.query.sigma_b);
        let g = noisy_parameter_shift(circuit, h, &theta, sigma, derive_seed(noise.rng_seed, k as u64), 1)?;
        rec.cost += 1.0;
        rec.raw += 2 * nu as u64;
        let dir = match &frozen {
            Some(p) => p.solve(&g),
            None => metric_preconditioner(config.metric, circuit, &theta, eta, surrogate.as_ref())?.solve(&g),
        };
        for (t, d) in theta.iter_mut().zip(&dir) {
            *t -= step * *d;
        }
    }
    Ok(OptimizationTrace {
        records: rec.records,
        inner_exits: Vec::new(),
        termination,
        final_theta: circuit.absolute_angles(&theta)?,
        metadata: TraceMetadata {
            method: "natural_gradient".into(),
            metric: config.metric.name().into(),
            nu,
            ground_energy: ground.as_f64(),
            noise_enabled: noise.enabled,
            noise_seed: noise.rng_seed,
            noise_floor: NOISE_FLOOR,
            floored_builds,
        },
    })
}
