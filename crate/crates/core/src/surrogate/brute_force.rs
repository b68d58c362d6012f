//! The untruncated `3^nu`-term expansion, for checking the truncation on
//! small circuits.

use crate::ansatz::AnsatzCircuit;
use crate::error::{QadError, Result};
use crate::pauli::PauliSum;
use crate::scalar::Real;

pub const BRUTE_FORCE_MAX_NU: usize = 8;

/// Energies of `circuit` at every shift in `{0, +pi/2, -pi/2, pi}^nu`,
/// cached so the full expansion can be evaluated at many `theta`.
#[derive(Clone, Debug)]
pub struct BruteForceExpansion<T> {
    nu: usize,
    grid: Vec<T>,
}

impl<T: Real> BruteForceExpansion<T> {
    pub fn new(circuit: &AnsatzCircuit<T>, h: &PauliSum<T>) -> Result<Self> {
        let nu = circuit.nu();
        if nu > BRUTE_FORCE_MAX_NU {
            return Err(QadError::InvalidArgument(format!(
                "brute-force expansion needs nu <= {BRUTE_FORCE_MAX_NU}, got {nu}"
            )));
        }
        let levels = [T::zero(), T::FRAC_PI_2(), -T::FRAC_PI_2(), T::PI()];
        let mut grid = Vec::with_capacity(1 << (2 * nu));
        let mut shift = vec![T::zero(); nu];
        for code in 0..1usize << (2 * nu) {
            for (k, s) in shift.iter_mut().enumerate() {
                *s = levels[(code >> (2 * k)) & 3];
            }
            grid.push(circuit.energy(&shift, h)?);
        }
        Ok(Self { nu, grid })
    }

    /// Sum of every monomial times its discrete coefficient. Equals the
    /// circuit energy at `theta` up to rounding.
    pub fn energy(&self, theta: &[T]) -> Result<T> {
        if theta.len() != self.nu {
            return Err(QadError::DimensionMismatch {
                expected: self.nu,
                found: theta.len(),
            });
        }
        let weights: Vec<[T; 4]> = theta
            .iter()
            .map(|&t| {
                let (s, c) = t.sin_cos();
                let b = s * T::half();
                [(T::one() + c) * T::half(), b, -b, (T::one() - c) * T::half()]
            })
            .collect();
        let mut total = T::zero();
        for (code, &e) in self.grid.iter().enumerate() {
            let mut w = T::one();
            for (k, wk) in weights.iter().enumerate() {
                w *= wk[(code >> (2 * k)) & 3];
            }
            total += w * e;
        }
        Ok(total)
    }
}

/// One-shot form of [`BruteForceExpansion`].
pub fn brute_force_energy<T: Real>(circuit: &AnsatzCircuit<T>, h: &PauliSum<T>, theta: &[T]) -> Result<T> {
    BruteForceExpansion::new(circuit, h)?.energy(theta)
}
