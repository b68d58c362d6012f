mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};
use qad::pauli::PauliSum;
use qad::scaling::{default_delta_grid, PRELIMINARY_STEPS};

use commands::ScalingOptions;
use config::{ExperimentConfig, HamiltonianSource, Method, SpinRing};

#[derive(Parser)]
#[command(name = "qad", version, about = "Quantum analytic descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run analytic descent and/or natural gradient and write CSV traces.
    Run(RunArgs),
    /// Measure surrogate error against distance from the reference point.
    ScalingStudy(ScalingArgs),
    /// Check a Hamiltonian and report its size and ground energy.
    Validate(HamiltonianArgs),
}

#[derive(Args)]
struct HamiltonianArgs {
    /// Hamiltonian file, one `<coefficient> <letters>` term per line.
    #[arg(value_name = "FILE", conflicts_with = "spin_ring")]
    file: Option<PathBuf>,
    /// Use the periodic spin ring with this many sites.
    #[arg(long, value_name = "N")]
    spin_ring: Option<usize>,
    #[arg(long, requires = "spin_ring")]
    coupling: Option<f64>,
    #[arg(long, requires = "spin_ring")]
    omega_seed: Option<u64>,
    /// Set every field omega_i to zero.
    #[arg(long, requires = "spin_ring")]
    zero_fields: bool,
}

impl HamiltonianArgs {
    fn source(&self) -> Option<HamiltonianSource> {
        if let Some(path) = &self.file {
            return Some(HamiltonianSource {
                spin_ring: None,
                file: Some(path.clone()),
            });
        }
        let n = self.spin_ring?;
        Some(HamiltonianSource {
            spin_ring: Some(SpinRing {
                num_qubits: n,
                coupling: self.coupling.unwrap_or(0.05),
                omega_seed: self.omega_seed.unwrap_or(0),
                fields: self.zero_fields.then(|| vec![0.0; n]),
            }),
            file: None,
        })
    }

    fn load(&self) -> Result<PauliSum<f64>> {
        match self.source() {
            Some(src) => src.load(),
            None => bail!("no Hamiltonian given (pass a FILE or --spin-ring N)"),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    hamiltonian: HamiltonianArgs,
    #[arg(long)]
    blocks: Option<usize>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long, value_delimiter = ',')]
    seeds: Option<Vec<u64>>,
    /// Disable shot noise.
    #[arg(long)]
    noiseless: bool,
    #[arg(long)]
    relative_gradient_precision: Option<f64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

impl RunArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::from_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(src) = self.hamiltonian.source() {
            c.hamiltonian = src;
        }
        if let Some(b) = self.blocks {
            c.ansatz.blocks = b;
        }
        if let Some(m) = self.method {
            c.method = m;
        }
        if let Some(s) = &self.seeds {
            c.seeds = s.clone();
        }
        if self.noiseless {
            c.noise.enabled = false;
        }
        if let Some(p) = self.relative_gradient_precision {
            c.noise.relative_gradient_precision = p;
        }
        if let Some(d) = &self.output_dir {
            c.output_dir = d.clone();
        }
        Ok(c)
    }
}

#[derive(Args)]
struct ScalingArgs {
    #[command(flatten)]
    hamiltonian: HamiltonianArgs,
    /// Circuit file (`<theta_ref> <letters>` per gate); defaults to the
    /// hardware-efficient ansatz at a perturbed basis state.
    #[arg(long)]
    circuit: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    blocks: usize,
    #[arg(long, default_value_t = 0)]
    init_seed: u64,
    /// Distances from the reference point; defaults to 8 points from 0.01 to 0.3.
    #[arg(long, value_delimiter = ',')]
    deltas: Option<Vec<f64>>,
    #[arg(long, default_value_t = 125)]
    samples: usize,
    #[arg(long, default_value_t = PRELIMINARY_STEPS)]
    preliminary_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// CSV of per-sample errors.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn run(args: &RunArgs) -> Result<()> {
    let config = args.config()?;
    for r in commands::run(&config)? {
        println!(
            "{} seed {}: final distance {:.3e} ({})",
            r.method.name(),
            r.seed,
            r.final_distance,
            r.csv.display()
        );
    }
    Ok(())
}

fn scaling_study(args: &ScalingArgs) -> Result<()> {
    let h = if args.hamiltonian.file.is_none() && args.hamiltonian.spin_ring.is_none() {
        SpinRing {
            num_qubits: 6,
            coupling: 0.05,
            omega_seed: 0,
            fields: None,
        }
        .hamiltonian()?
    } else {
        args.hamiltonian.load()?
    };
    let circuit = commands::scaling_circuit(&h, args.circuit.as_deref(), args.blocks, args.init_seed)?;
    let opts = ScalingOptions {
        deltas: args.deltas.clone().unwrap_or_else(default_delta_grid),
        samples: args.samples,
        preliminary_steps: args.preliminary_steps,
        seed: args.seed,
        output: args.output.clone(),
    };
    let study = commands::scaling(&circuit, &h, &opts)?;
    println!("nu = {}", circuit.nu());
    println!("delta,mean_energy_error,mean_one_minus_f");
    for (d, e, f) in &study.means {
        println!("{d},{e:e},{f:e}");
    }
    for (name, fit) in [("energy error", study.energy_fit), ("1-f", study.similarity_fit)] {
        match fit {
            Some(f) => println!("{name} slope {:.3} (R^2 {:.4})", f.slope, f.r_squared),
            None => println!("{name} slope: not fitted (errors vanish at machine precision)"),
        }
    }
    Ok(())
}

fn validate(args: &HamiltonianArgs) -> Result<()> {
    let h = args.load()?;
    let report = commands::validate(&h)?;
    println!("qubits: {}", report.num_qubits);
    println!("terms: {}", report.terms);
    match report.ground_energy {
        Some(e) => println!("ground energy: {e:.12}"),
        None => println!(
            "ground energy: skipped (more than {} qubits)",
            commands::VALIDATE_GROUND_MAX_QUBITS
        ),
    }
    if report.hermiticity_defect > 1e-12 {
        bail!("operator is not Hermitian (defect {:.2e})", report.hermiticity_defect);
    }
    println!("hermitian: yes (defect {:.1e})", report.hermiticity_defect);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::ScalingStudy(a) => scaling_study(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
