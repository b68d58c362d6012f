//! Problem instances used by the experiments: the periodic spin ring with a
//! hardware-efficient ansatz, and perturbed starting points.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{build_hardware_efficient, hardware_efficient_basis_angles, AnsatzCircuit};
use crate::error::Result;
use crate::pauli::{spin_ring_fields, spin_ring_hamiltonian, PauliSum};
use crate::scalar::Real;

/// Amplitude of the uniform perturbation added to starting parameters.
pub const INIT_PERTURBATION: f64 = 0.5;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SpinRingSpec {
    pub num_qubits: usize,
    pub coupling: f64,
    /// Seed for the fields `omega_i`, drawn uniformly from `(-1, 1)`.
    pub omega_seed: u64,
}

impl Default for SpinRingSpec {
    fn default() -> Self {
        Self {
            num_qubits: 6,
            coupling: 0.05,
            omega_seed: 0,
        }
    }
}

impl SpinRingSpec {
    pub fn hamiltonian<T: Real>(&self) -> Result<PauliSum<T>> {
        let omega = spin_ring_fields::<T>(self.num_qubits, self.omega_seed);
        spin_ring_hamiltonian(self.num_qubits, T::lit(self.coupling), &omega)
    }
}

/// `theta + u` with every `u_k` uniform in `(-amplitude, amplitude)`.
pub fn perturbed<T: Real>(theta: &[T], amplitude: f64, seed: u64) -> Vec<T> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    theta
        .iter()
        .map(|t| *t + T::lit(amplitude * rng.random_range(-1.0..1.0)))
        .collect()
}

/// Hardware-efficient circuit whose reference point prepares the lowest
/// computational basis state of `h`, plus the standard perturbation.
pub fn basis_state_start<T: Real>(h: &PauliSum<T>, blocks: usize, init_seed: u64) -> Result<AnsatzCircuit<T>> {
    let n = h.num_qubits();
    let (index, _) = h.lowest_basis_state();
    let base = hardware_efficient_basis_angles::<T>(n, blocks, index);
    build_hardware_efficient::<T>(n, blocks)?.with_theta_ref(perturbed(&base, INIT_PERTURBATION, init_seed))
}

/// Circuit started from supplied parameters (e.g. a Hartree-Fock point) plus
/// the standard perturbation.
pub fn perturbed_start<T: Real>(circuit: &AnsatzCircuit<T>, init_seed: u64) -> Result<AnsatzCircuit<T>> {
    circuit.with_theta_ref(perturbed(circuit.theta_ref(), INIT_PERTURBATION, init_seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{expectation, basis_state};

    #[test]
    fn basis_start_is_near_lowest_basis_state() {
        let spec = SpinRingSpec {
            num_qubits: 4,
            ..SpinRingSpec::default()
        };
        let h: PauliSum<f64> = spec.hamiltonian().unwrap();
        let (index, e) = h.lowest_basis_state();
        let psi = basis_state::<f64>(4, index).unwrap();
        assert!((expectation(&psi, &h).unwrap() - e).abs() < 1e-14);
        let c = basis_state_start(&h, 2, 1).unwrap();
        assert_eq!(c.nu(), 4 + 24);
        let exact = build_hardware_efficient::<f64>(4, 2)
            .unwrap()
            .with_theta_ref(hardware_efficient_basis_angles(4, 2, index))
            .unwrap();
        assert!((exact.energy(&[0.0; 28], &h).unwrap() - e).abs() < 1e-12);
        let shift: Vec<f64> = c.theta_ref().iter().zip(exact.theta_ref()).map(|(a, b)| a - b).collect();
        assert!(shift.iter().all(|d| d.abs() < INIT_PERTURBATION));
    }

    #[test]
    fn fields_are_seeded() {
        let a: Vec<f64> = spin_ring_fields(6, 3);
        assert_eq!(a, spin_ring_fields::<f64>(6, 3));
        assert_ne!(a, spin_ring_fields::<f64>(6, 4));
        assert!(a.iter().all(|w| w.abs() < 1.0));
    }
}
