use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use num_complex::Complex;
use qad::ansatz::{parse_circuit, AnsatzCircuit};
use qad::descent::{run_analytic_descent_with_ground, run_natural_gradient_with_ground, OptimizationTrace};
use qad::pauli::PauliSum;
use qad::presets::basis_state_start;
use qad::scaling::{prepare_near_optimum, scaling_study, ScalingStudy};
use qad::simulator::{ground_energy, hamiltonian_apply};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Method, RunRecord};

/// Largest register for which `validate` reports the ground energy.
pub const VALIDATE_GROUND_MAX_QUBITS: usize = 12;

pub struct RunSummary {
    pub method: Method,
    pub seed: u64,
    pub csv: PathBuf,
    pub final_distance: f64,
}

fn stem(method: Method, seed: u64) -> String {
    format!("{}_seed{seed}", method.name())
}

fn start_circuit(h: &PauliSum<f64>, blocks: usize, seed: u64) -> Result<AnsatzCircuit<f64>> {
    Ok(basis_state_start(h, blocks, seed)?)
}

/// Runs every (method, seed) pair, writing `<method>_seed<s>.csv` and a
/// `.toml` sidecar that re-runs the same trace.
pub fn run(config: &ExperimentConfig) -> Result<Vec<RunSummary>> {
    config.validate()?;
    let h = config.hamiltonian.load()?;
    let ground = ground_energy(&h)?;
    fs::create_dir_all(&config.output_dir)
        .with_context(|| format!("cannot create output directory {}", config.output_dir.display()))?;

    let jobs: Vec<(Method, u64)> = config
        .method
        .expand()
        .into_iter()
        .flat_map(|m| config.seeds.iter().map(move |&s| (m, s)))
        .collect();

    jobs.par_iter()
        .map(|&(method, seed)| {
            let circuit = start_circuit(&h, config.ansatz.blocks, seed)?;
            let noise = config.noise.spec(seed);
            let trace = match method {
                Method::AnalyticDescent => {
                    run_analytic_descent_with_ground(&circuit, &h, &config.analytic_descent, &noise, ground)?
                }
                _ => run_natural_gradient_with_ground(&circuit, &h, &config.natural_gradient, &noise, ground)?,
            };
            write_run(config, method, seed, &trace)
        })
        .collect()
}

fn write_run(config: &ExperimentConfig, method: Method, seed: u64, trace: &OptimizationTrace<f64>) -> Result<RunSummary> {
    let name = stem(method, seed);
    let csv = config.output_dir.join(format!("{name}.csv"));
    let file = File::create(&csv).with_context(|| format!("cannot create {}", csv.display()))?;
    trace.write_csv(BufWriter::new(file))?;

    let mut sidecar = config.clone();
    sidecar.method = method;
    sidecar.seeds = vec![seed];
    if let Some(path) = &sidecar.hamiltonian.file {
        sidecar.hamiltonian.file = Some(fs::canonicalize(path).unwrap_or_else(|_| path.clone()));
    }
    sidecar.run = Some(RunRecord {
        trace_csv: format!("{name}.csv"),
        termination: trace.termination,
        final_distance: trace.final_distance(),
        records: trace.records.len(),
        trace: trace.metadata.clone(),
    });
    let meta = config.output_dir.join(format!("{name}.toml"));
    fs::write(&meta, sidecar.to_toml()?).with_context(|| format!("cannot write {}", meta.display()))?;

    Ok(RunSummary {
        method,
        seed,
        csv,
        final_distance: trace.final_distance(),
    })
}

pub struct ScalingOptions {
    pub deltas: Vec<f64>,
    pub samples: usize,
    pub preliminary_steps: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

/// Scaling study around a pre-optimized reference point.
pub fn scaling(circuit: &AnsatzCircuit<f64>, h: &PauliSum<f64>, opts: &ScalingOptions) -> Result<ScalingStudy> {
    let anchored = if opts.preliminary_steps > 0 {
        prepare_near_optimum(circuit, h, opts.preliminary_steps)?
    } else {
        circuit.clone()
    };
    let study = scaling_study(&anchored, h, &opts.deltas, opts.samples, opts.seed)?;
    if let Some(path) = &opts.output {
        let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
        let mut w = csv::Writer::from_writer(BufWriter::new(file));
        for s in &study.samples {
            w.serialize(s)?;
        }
        w.flush()?;
    }
    Ok(study)
}

pub fn load_circuit(path: &Path) -> Result<AnsatzCircuit<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read circuit file {}", path.display()))?;
    parse_circuit(&text).with_context(|| format!("{}", path.display()))
}

pub fn scaling_circuit(h: &PauliSum<f64>, circuit: Option<&Path>, blocks: usize, init_seed: u64) -> Result<AnsatzCircuit<f64>> {
    match circuit {
        Some(path) => {
            let c = load_circuit(path)?;
            if c.num_qubits() != h.num_qubits() {
                bail!(
                    "circuit {} acts on {} qubits but the Hamiltonian has {}",
                    path.display(),
                    c.num_qubits(),
                    h.num_qubits()
                );
            }
            Ok(c)
        }
        None => start_circuit(h, blocks, init_seed),
    }
}

pub struct ValidationReport {
    pub num_qubits: usize,
    pub terms: usize,
    pub ground_energy: Option<f64>,
    /// Largest `|<x|Hy> - conj(<y|Hx>)|` over random probe pairs.
    pub hermiticity_defect: f64,
}

pub fn validate(h: &PauliSum<f64>) -> Result<ValidationReport> {
    let n = h.num_qubits();
    let ground_energy = if n <= VALIDATE_GROUND_MAX_QUBITS {
        Some(ground_energy(h)?)
    } else {
        None
    };
    let dim = 1usize << n;
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut probe = || -> Vec<Complex<f64>> {
        (0..dim)
            .map(|_| Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect()
    };
    let dot = |a: &[Complex<f64>], b: &[Complex<f64>]| a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex<f64>>();
    let mut defect = 0.0f64;
    for _ in 0..3 {
        let (x, y) = (probe(), probe());
        let mut hx = vec![Complex::default(); dim];
        let mut hy = vec![Complex::default(); dim];
        hamiltonian_apply(h, &x, &mut hx);
        hamiltonian_apply(h, &y, &mut hy);
        let scale = 1.0 + dot(&x, &hy).norm();
        defect = defect.max((dot(&x, &hy) - dot(&hx, &y)).norm() / scale);
    }
    Ok(ValidationReport {
        num_qubits: n,
        terms: h.len(),
        ground_energy,
        hermiticity_defect: defect,
    })
}
