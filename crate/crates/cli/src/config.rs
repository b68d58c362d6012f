//! Experiment configuration in TOML, and the per-run sidecar written next to
//! each trace.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use qad::descent::{NoiseSpec, OptimizerConfig, Termination, TraceMetadata};
use qad::pauli::{parse_pauli_sum, spin_ring_fields, spin_ring_hamiltonian, PauliSum};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AnalyticDescent,
    NaturalGradient,
    Both,
}

impl Method {
    pub fn expand(self) -> Vec<Method> {
        match self {
            Method::Both => vec![Method::AnalyticDescent, Method::NaturalGradient],
            m => vec![m],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::AnalyticDescent => "analytic_descent",
            Method::NaturalGradient => "natural_gradient",
            Method::Both => "both",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinRing {
    pub num_qubits: usize,
    #[serde(default = "default_coupling")]
    pub coupling: f64,
    #[serde(default)]
    pub omega_seed: u64,
    /// Explicit fields; overrides `omega_seed` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<f64>>,
}

fn default_coupling() -> f64 {
    0.05
}

impl SpinRing {
    pub fn hamiltonian(&self) -> Result<PauliSum<f64>> {
        let omega = match &self.fields {
            Some(f) => f.clone(),
            None => spin_ring_fields(self.num_qubits, self.omega_seed),
        };
        Ok(spin_ring_hamiltonian(self.num_qubits, self.coupling, &omega)?)
    }
}

/// Exactly one of the two sources must be set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSource {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spin_ring: Option<SpinRing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl HamiltonianSource {
    pub fn load(&self) -> Result<PauliSum<f64>> {
        match (&self.spin_ring, &self.file) {
            (Some(ring), None) => ring.hamiltonian(),
            (None, Some(path)) => load_hamiltonian_file(path),
            (Some(_), Some(_)) => bail!("hamiltonian: give either spin_ring or file, not both"),
            (None, None) => bail!("hamiltonian: no source given (set spin_ring or file)"),
        }
    }
}

pub fn load_hamiltonian_file(path: &Path) -> Result<PauliSum<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read Hamiltonian file {}", path.display()))?;
    parse_pauli_sum(&text).with_context(|| format!("{}", path.display()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnsatzSection {
    pub blocks: usize,
}

impl Default for AnsatzSection {
    fn default() -> Self {
        Self { blocks: 2 }
    }
}

/// Noise settings shared by all runs. Each run uses its own seed from
/// `seeds` as the noise seed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseSection {
    pub enabled: bool,
    pub relative_gradient_precision: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        let d = NoiseSpec::default();
        Self {
            enabled: true,
            relative_gradient_precision: d.relative_gradient_precision,
        }
    }
}

impl NoiseSection {
    pub fn spec(&self, seed: u64) -> NoiseSpec {
        NoiseSpec {
            enabled: self.enabled,
            relative_gradient_precision: self.relative_gradient_precision,
            rng_seed: seed,
        }
    }
}

/// Outcome of one run, stored in its sidecar. Ignored when the sidecar is
/// loaded back as a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunRecord {
    pub trace_csv: String,
    pub termination: Termination,
    pub final_distance: f64,
    pub records: usize,
    pub trace: TraceMetadata,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_method")]
    pub method: Method,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub hamiltonian: HamiltonianSource,
    #[serde(default)]
    pub ansatz: AnsatzSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default = "OptimizerConfig::spin_ring_analytic")]
    pub analytic_descent: OptimizerConfig,
    #[serde(default = "OptimizerConfig::spin_ring_natural")]
    pub natural_gradient: OptimizerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub run: Option<RunRecord>,
}

fn default_method() -> Method {
    Method::Both
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("qad-output")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            method: default_method(),
            seeds: default_seeds(),
            output_dir: default_output_dir(),
            hamiltonian: HamiltonianSource::default(),
            ansatz: AnsatzSection::default(),
            noise: NoiseSection::default(),
            analytic_descent: OptimizerConfig::spin_ring_analytic(),
            natural_gradient: OptimizerConfig::spin_ring_natural(),
            run: None,
        }
    }
}

impl ExperimentConfig {
    /// Reads a config file. A relative Hamiltonian path is taken relative to
    /// the config file's directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("cannot read config file {}", path.display()))?;
        let mut config: Self = toml::from_str(&text).with_context(|| format!("invalid config {}", path.display()))?;
        if let Some(file) = &config.hamiltonian.file {
            if file.is_relative() {
                let base = path.parent().unwrap_or(Path::new("."));
                config.hamiltonian.file = Some(base.join(file));
            }
        }
        config.run = None;
        Ok(config)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            bail!("seeds: need at least one seed");
        }
        if self.ansatz.blocks == 0 {
            bail!("ansatz.blocks must be at least 1");
        }
        self.noise.spec(0).validate()?;
        self.analytic_descent.validate().context("analytic_descent")?;
        self.natural_gradient.validate().context("natural_gradient")?;
        Ok(())
    }
}
