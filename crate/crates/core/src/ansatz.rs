//! Pauli-rotation circuits and the energy function `E(theta)` measured
//! relative to a stored reference point.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{QadError, Result};
use crate::pauli::{parse_qubit_header, random_pauli_string, Pauli, PauliString, PauliSum};
use crate::scalar::Real;
use crate::simulator::{expectation, zero_state, StateVector};

/// Ordered gates `exp(-i (theta_ref_k + theta_k) P_k / 2)` applied to `|0...0>`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct AnsatzCircuit<T> {
    num_qubits: usize,
    generators: Vec<PauliString>,
    theta_ref: Vec<T>,
}

impl<T: Real> AnsatzCircuit<T> {
    pub fn new(num_qubits: usize, generators: Vec<PauliString>, theta_ref: Vec<T>) -> Result<Self> {
        if generators.len() != theta_ref.len() {
            return Err(QadError::DimensionMismatch {
                expected: generators.len(),
                found: theta_ref.len(),
            });
        }
        if let Some(bad) = generators.iter().find(|p| p.num_qubits() != num_qubits) {
            return Err(QadError::DimensionMismatch {
                expected: num_qubits,
                found: bad.num_qubits(),
            });
        }
        Ok(Self {
            num_qubits,
            generators,
            theta_ref,
        })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    /// Number of parameters.
    pub fn nu(&self) -> usize {
        self.generators.len()
    }

    pub fn generators(&self) -> &[PauliString] {
        &self.generators
    }

    pub fn theta_ref(&self) -> &[T] {
        &self.theta_ref
    }

    pub fn with_theta_ref(&self, theta_ref: Vec<T>) -> Result<Self> {
        Self::new(self.num_qubits, self.generators.clone(), theta_ref)
    }

    /// Moves the reference point to `theta_ref + theta`.
    pub fn rebase(&self, theta: &[T]) -> Result<Self> {
        let angles = self.absolute_angles(theta)?;
        self.with_theta_ref(angles)
    }

    /// `theta_ref + theta`, checking the length.
    pub fn absolute_angles(&self, theta: &[T]) -> Result<Vec<T>> {
        if theta.len() != self.nu() {
            return Err(QadError::DimensionMismatch {
                expected: self.nu(),
                found: theta.len(),
            });
        }
        Ok(self.theta_ref.iter().zip(theta).map(|(r, t)| *r + *t).collect())
    }

    pub fn prepare_state(&self, theta: &[T]) -> Result<StateVector<T>> {
        let angles = self.absolute_angles(theta)?;
        let mut psi = zero_state(self.num_qubits)?;
        for (p, a) in self.generators.iter().zip(angles) {
            psi.rotate(p, a)?;
        }
        Ok(psi)
    }

    pub fn energy(&self, theta: &[T], h: &PauliSum<T>) -> Result<T> {
        expectation(&self.prepare_state(theta)?, h)
    }

    /// Parameter-shift gradient `[E(theta + pi/2 v_k) - E(theta - pi/2 v_k)] / 2`.
    pub fn parameter_shift_gradient(&self, theta: &[T], h: &PauliSum<T>) -> Result<Vec<T>> {
        let shift = T::FRAC_PI_2();
        let mut work = theta.to_vec();
        (0..self.nu())
            .map(|k| {
                work[k] = theta[k] + shift;
                let plus = self.energy(&work, h)?;
                work[k] = theta[k] - shift;
                let minus = self.energy(&work, h)?;
                work[k] = theta[k];
                Ok((plus - minus) * T::half())
            })
            .collect()
    }
}

/// Hardware-efficient layout on a ring of `num_qubits` qubits: an initial
/// layer of Y rotations, then `blocks` repetitions of
/// `[ZZ on (i, i+1 mod N)] [X on each qubit] [Y on each qubit]`, giving
/// `N + 3 N B` parameters. The reference point starts at zero.
pub fn build_hardware_efficient<T: Real>(num_qubits: usize, blocks: usize) -> Result<AnsatzCircuit<T>> {
    if num_qubits < 2 {
        return Err(QadError::InvalidArgument(format!(
            "hardware-efficient ansatz needs at least 2 qubits, got {num_qubits}"
        )));
    }
    if blocks == 0 {
        return Err(QadError::InvalidArgument("hardware-efficient ansatz needs at least 1 block".into()));
    }
    let n = num_qubits;
    let mut gens = Vec::with_capacity(n + 3 * n * blocks);
    for q in 0..n {
        gens.push(PauliString::on_qubits(n, &[q], Pauli::Y)?);
    }
    for _ in 0..blocks {
        for q in 0..n {
            gens.push(PauliString::on_qubits(n, &[q, (q + 1) % n], Pauli::Z)?);
        }
        for q in 0..n {
            gens.push(PauliString::on_qubits(n, &[q], Pauli::X)?);
        }
        for q in 0..n {
            gens.push(PauliString::on_qubits(n, &[q], Pauli::Y)?);
        }
    }
    let nu = gens.len();
    AnsatzCircuit::new(n, gens, vec![T::zero(); nu])
}

/// Parameters that make a hardware-efficient circuit prepare the basis state
/// `|basis_index>`: angle `pi` on the initial Y rotation of every qubit whose
/// bit is set, zero elsewhere.
pub fn hardware_efficient_basis_angles<T: Real>(num_qubits: usize, blocks: usize, basis_index: usize) -> Vec<T> {
    let nu = num_qubits + 3 * num_qubits * blocks;
    let mut theta = vec![T::zero(); nu];
    for (q, t) in theta.iter_mut().enumerate().take(num_qubits) {
        if basis_index >> q & 1 == 1 {
            *t = T::PI();
        }
    }
    theta
}

/// Circuit of `nu` uniformly random non-identity generators with reference
/// angles uniform in `[-pi, pi)`.
pub fn random_circuit<T: Real, R: Rng + ?Sized>(num_qubits: usize, nu: usize, rng: &mut R) -> Result<AnsatzCircuit<T>> {
    let generators = (0..nu).map(|_| random_pauli_string(num_qubits, rng)).collect();
    let theta_ref = (0..nu)
        .map(|_| T::lit(rng.random_range(-std::f64::consts::PI..std::f64::consts::PI)))
        .collect();
    AnsatzCircuit::new(num_qubits, generators, theta_ref)
}

/// Text form of a circuit: `# qubits: N` header, then one gate per line as
/// `<theta_ref> <generator letters>` in application order.
pub fn format_circuit<T: Real>(circuit: &AnsatzCircuit<T>) -> String {
    let mut out = format!("# qubits: {}\n", circuit.num_qubits());
    for (p, t) in circuit.generators().iter().zip(circuit.theta_ref()) {
        out.push_str(&format!("{t} {p}\n"));
    }
    out
}

pub fn parse_circuit<T: Real>(text: &str) -> Result<AnsatzCircuit<T>> {
    let mut declared = None;
    let mut gens = Vec::new();
    let mut refs = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(n) = parse_qubit_header(comment) {
                declared = Some(n.map_err(|_| QadError::MalformedLine {
                    line,
                    text: trimmed.to_string(),
                })?);
            }
            continue;
        }
        let mut fields = trimmed.split_whitespace();
        let (Some(angle), Some(letters), None) = (fields.next(), fields.next(), fields.next()) else {
            return Err(QadError::MalformedLine {
                line,
                text: trimmed.to_string(),
            });
        };
        let t: f64 = angle.parse().map_err(|_| QadError::BadCoefficient {
            line,
            text: angle.to_string(),
        })?;
        let p: PauliString = letters.parse().map_err(|e| match e {
            QadError::BadPauliLetter { letter, .. } => QadError::BadPauliLetter { line, letter },
            other => other,
        })?;
        refs.push(T::lit(t));
        gens.push(p);
    }
    let n = match (declared, gens.first()) {
        (Some(d), _) => d,
        (None, Some(p)) => p.num_qubits(),
        (None, None) => return Err(QadError::EmptyInput),
    };
    AnsatzCircuit::new(n, gens, refs)
}
