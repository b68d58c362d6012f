//! Exact pure-state simulator: the stand-in for the quantum device.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzCircuit;
use crate::error::{QadError, Result};
use crate::lanczos;
use crate::pauli::{PauliString, PauliSum};
use crate::scalar::Real;

/// Largest register the simulator accepts.
pub const MAX_QUBITS: usize = 24;

/// Registers up to this size may be diagonalised densely by callers; above
/// it only the Krylov solver is used.
pub const DENSE_LIMIT: usize = 6;

/// Tolerance on `| |psi| - 1 |` for states handed to the simulator.
pub fn norm_tolerance<T: Real>() -> T {
    T::lit(1e-10).max(T::epsilon() * T::lit(1e3))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct StateVector<T> {
    num_qubits: usize,
    amplitudes: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    /// Wraps raw amplitudes, checking length and normalisation.
    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<Complex<T>>) -> Result<Self> {
        check_qubits(num_qubits)?;
        if amplitudes.len() != 1 << num_qubits {
            return Err(QadError::DimensionMismatch {
                expected: 1 << num_qubits,
                found: amplitudes.len(),
            });
        }
        let s = Self {
            num_qubits,
            amplitudes,
        };
        let dev = (s.norm() - T::one()).abs();
        if dev > norm_tolerance::<T>() {
            return Err(QadError::InvalidArgument(format!("state norm deviates from 1 by {dev}")));
        }
        Ok(s)
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amplitudes
    }

    pub fn norm(&self) -> T {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        self.check_same(other.num_qubits)?;
        Ok(inner_raw(&self.amplitudes, &other.amplitudes))
    }

    /// In-place `exp(-i theta P / 2)`.
    pub fn rotate(&mut self, generator: &PauliString, theta: T) -> Result<()> {
        self.check_same(generator.num_qubits())?;
        rotate_raw(&mut self.amplitudes, generator, theta);
        Ok(())
    }

    /// In-place application of the Pauli string itself.
    pub fn apply_pauli(&mut self, p: &PauliString) -> Result<()> {
        self.check_same(p.num_qubits())?;
        let mut out = vec![Complex::new(T::zero(), T::zero()); self.dim()];
        pauli_apply_accumulate(&self.amplitudes, p, Complex::new(T::one(), T::zero()), &mut out);
        self.amplitudes = out;
        Ok(())
    }

    fn check_same(&self, n: usize) -> Result<()> {
        if n != self.num_qubits {
            return Err(QadError::DimensionMismatch {
                expected: self.num_qubits,
                found: n,
            });
        }
        Ok(())
    }
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(QadError::QubitRange(n));
    }
    Ok(())
}

pub fn zero_state<T: Real>(num_qubits: usize) -> Result<StateVector<T>> {
    check_qubits(num_qubits)?;
    let mut amplitudes = vec![Complex::new(T::zero(), T::zero()); 1 << num_qubits];
    amplitudes[0] = Complex::new(T::one(), T::zero());
    Ok(StateVector {
        num_qubits,
        amplitudes,
    })
}

/// Computational basis state `|b>` (bit `q` of `b` is qubit `q`).
pub fn basis_state<T: Real>(num_qubits: usize, index: usize) -> Result<StateVector<T>> {
    let mut s = zero_state(num_qubits)?;
    if index >= s.dim() {
        return Err(QadError::InvalidArgument(format!("basis index {index} out of range")));
    }
    s.amplitudes[0] = Complex::new(T::zero(), T::zero());
    s.amplitudes[index] = Complex::new(T::one(), T::zero());
    Ok(s)
}

/// `cos(theta/2) psi - i sin(theta/2) P psi`.
pub fn apply_pauli_rotation<T: Real>(psi: &StateVector<T>, p: &PauliString, theta: T) -> Result<StateVector<T>> {
    let mut out = psi.clone();
    out.rotate(p, theta)?;
    Ok(out)
}

/// `sum_j c_j <psi|P_j|psi>`.
pub fn expectation<T: Real>(psi: &StateVector<T>, h: &PauliSum<T>) -> Result<T> {
    psi.check_same(h.num_qubits())?;
    let mut total = T::zero();
    for (c, p) in h.terms() {
        let v = pauli_expectation(&psi.amplitudes, p);
        debug_assert!(
            v.im.abs() < T::lit(1e-10).max(T::epsilon() * T::lit(1e3)),
            "Pauli expectation has imaginary part {}",
            v.im
        );
        total += *c * v.re;
    }
    Ok(total)
}

/// `|<psi|phi>|^2`.
pub fn overlap<T: Real>(psi: &StateVector<T>, phi: &StateVector<T>) -> Result<T> {
    Ok(psi.inner(phi)?.norm_sqr())
}

/// Smallest eigenvalue of `h`, from a restarted Lanczos iteration on
/// Pauli-application matrix-vector products.
pub fn ground_energy<T: Real>(h: &PauliSum<T>) -> Result<T> {
    check_qubits(h.num_qubits())?;
    let dim = 1usize << h.num_qubits();
    let scale: T = h.terms().iter().map(|(c, _)| c.abs()).sum();
    let tol = T::lit(lanczos::RESIDUAL_TOLERANCE).max(T::epsilon() * T::lit(1e2) * scale.max(T::one()));
    let result = lanczos::lowest_eigenpair(dim, |x, y| hamiltonian_apply(h, x, y), tol, lanczos::MAX_MATVECS)?;
    Ok(result.value)
}

/// Writes `H x` into `y`.
pub fn hamiltonian_apply<T: Real>(h: &PauliSum<T>, x: &[Complex<T>], y: &mut [Complex<T>]) {
    y.iter_mut().for_each(|v| *v = Complex::new(T::zero(), T::zero()));
    for (c, p) in h.terms() {
        pauli_apply_accumulate(x, p, Complex::new(*c, T::zero()), y);
    }
}

/// Exact derivatives `d|psi(theta)>/d theta_m` of the circuit state at
/// `theta_ref + theta`, obtained by inserting `-(i/2) P_m` after gate `m`.
pub fn tangent_states<T: Real>(circuit: &AnsatzCircuit<T>, theta: &[T]) -> Result<Vec<StateVector<T>>> {
    let angles = circuit.absolute_angles(theta)?;
    let gens = circuit.generators();
    let mut psi = zero_state::<T>(circuit.num_qubits())?;
    let minus_half_i = Complex::new(T::zero(), -T::half());
    let mut out = Vec::with_capacity(gens.len());
    for (m, (p, &angle)) in gens.iter().zip(&angles).enumerate() {
        rotate_raw(&mut psi.amplitudes, p, angle);
        let mut t = vec![Complex::new(T::zero(), T::zero()); psi.dim()];
        pauli_apply_accumulate(&psi.amplitudes, p, minus_half_i, &mut t);
        for (q, &a) in gens[m + 1..].iter().zip(&angles[m + 1..]) {
            rotate_raw(&mut t, q, a);
        }
        out.push(StateVector {
            num_qubits: psi.num_qubits,
            amplitudes: t,
        });
    }
    Ok(out)
}

/// Gradient of `<psi(theta)|H|psi(theta)>` by one forward pass and one
/// backward sweep (adjoint differentiation), O(nu) gate applications.
pub fn energy_gradient<T: Real>(circuit: &AnsatzCircuit<T>, theta: &[T], h: &PauliSum<T>) -> Result<Vec<T>> {
    let angles = circuit.absolute_angles(theta)?;
    let mut phi = circuit.prepare_state(theta)?;
    phi.check_same(h.num_qubits())?;
    let mut lam = vec![Complex::new(T::zero(), T::zero()); phi.dim()];
    hamiltonian_apply(h, &phi.amplitudes, &mut lam);
    let minus_half_i = Complex::new(T::zero(), -T::half());
    let mut t = vec![Complex::new(T::zero(), T::zero()); phi.dim()];
    let mut grad = vec![T::zero(); angles.len()];
    for (m, p) in circuit.generators().iter().enumerate().rev() {
        t.iter_mut().for_each(|v| *v = Complex::new(T::zero(), T::zero()));
        pauli_apply_accumulate(&phi.amplitudes, p, minus_half_i, &mut t);
        grad[m] = T::two() * inner_raw(&lam, &t).re;
        rotate_raw(&mut phi.amplitudes, p, -angles[m]);
        rotate_raw(&mut lam, p, -angles[m]);
    }
    Ok(grad)
}

// ---- kernels ---------------------------------------------------------------

#[inline]
fn i_pow<T: Real>(k: usize) -> Complex<T> {
    match k % 4 {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), -T::one()),
    }
}

#[inline]
fn parity_sign(b: u64, z: u64) -> bool {
    (b & z).count_ones() % 2 == 1
}

pub(crate) fn inner_raw<T: Real>(a: &[Complex<T>], b: &[Complex<T>]) -> Complex<T> {
    a.iter()
        .zip(b)
        .fold(Complex::new(T::zero(), T::zero()), |acc, (x, y)| acc + x.conj() * y)
}

/// `out += scale * P x`, using `P|b> = i^{n_Y} (-1)^{|b & z|} |b ^ x>`.
pub(crate) fn pauli_apply_accumulate<T: Real>(x: &[Complex<T>], p: &PauliString, scale: Complex<T>, out: &mut [Complex<T>]) {
    let xm = p.x_mask() as usize;
    let zm = p.z_mask();
    let ph = scale * i_pow::<T>(p.y_count());
    for (b, amp) in x.iter().enumerate() {
        let v = ph * amp;
        if parity_sign(b as u64, zm) {
            out[b ^ xm] -= v;
        } else {
            out[b ^ xm] += v;
        }
    }
}

fn pauli_expectation<T: Real>(x: &[Complex<T>], p: &PauliString) -> Complex<T> {
    let xm = p.x_mask() as usize;
    let zm = p.z_mask();
    let mut acc = Complex::new(T::zero(), T::zero());
    for (b, amp) in x.iter().enumerate() {
        let v = x[b ^ xm].conj() * amp;
        if parity_sign(b as u64, zm) {
            acc -= v;
        } else {
            acc += v;
        }
    }
    acc * i_pow::<T>(p.y_count())
}

pub(crate) fn rotate_raw<T: Real>(amps: &mut [Complex<T>], p: &PauliString, theta: T) {
    let half = theta * T::half();
    let (s, c) = half.sin_cos();
    let xm = p.x_mask() as usize;
    let zm = p.z_mask();
    if xm == 0 {
        // Diagonal generator: |b> picks up cos - i sin (+-1).
        let plus = Complex::new(c, -s);
        let minus = Complex::new(c, s);
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= if parity_sign(b as u64, zm) { minus } else { plus };
        }
        return;
    }
    // -i sin * i^{nY}
    let k = Complex::new(T::zero(), -s) * i_pow::<T>(p.y_count());
    let top = 1usize << (usize::BITS - 1 - xm.leading_zeros());
    for b in 0..amps.len() {
        if b & top != 0 {
            continue;
        }
        let bp = b ^ xm;
        let (vb, vbp) = (amps[b], amps[bp]);
        // (P psi)[b] = i^{nY} sgn(bp) psi[bp]
        let pb = if parity_sign(bp as u64, zm) { -vbp } else { vbp };
        let pbp = if parity_sign(b as u64, zm) { -vb } else { vb };
        amps[b] = vb * c + k * pb;
        amps[bp] = vbp * c + k * pbp;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::parse_pauli_sum;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn ps(s: &str) -> PauliString {
        s.parse().unwrap()
    }

    #[test]
    fn zero_states() {
        let s = zero_state::<f64>(1).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0)]);
        let s = zero_state::<f64>(2).unwrap();
        assert_eq!(s.amplitudes(), &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(zero_state::<f64>(12).unwrap().norm(), 1.0);
        assert!(matches!(zero_state::<f64>(0), Err(QadError::QubitRange(0))));
        assert!(zero_state::<f64>(MAX_QUBITS + 1).is_err());
    }

    #[test]
    fn rotation_identity_and_pi() {
        let z = zero_state::<f64>(1).unwrap();
        assert_eq!(apply_pauli_rotation(&z, &ps("X"), 0.0).unwrap(), z);
        let r = apply_pauli_rotation(&z, &ps("X"), PI).unwrap();
        assert!((r.amplitudes()[0] - c(0.0, 0.0)).norm() < 1e-15);
        assert!((r.amplitudes()[1] - c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn two_pi_rotation_is_minus_identity() {
        let mut s = zero_state::<f64>(3).unwrap();
        s.rotate(&ps("XYI"), 0.7).unwrap();
        s.rotate(&ps("IZY"), -1.1).unwrap();
        let r = apply_pauli_rotation(&s, &ps("ZZZ"), 2.0 * PI).unwrap();
        for (a, b) in r.amplitudes().iter().zip(s.amplitudes()) {
            assert!((a + b).norm() < 1e-14);
        }
    }

    #[test]
    fn pauli_squares_to_identity() {
        let mut s = zero_state::<f64>(3).unwrap();
        s.rotate(&ps("XII"), 0.4).unwrap();
        s.rotate(&ps("YZX"), 1.3).unwrap();
        let orig = s.clone();
        for p in ["XYZ", "YYI", "ZIZ", "IXI"] {
            s.apply_pauli(&ps(p)).unwrap();
            s.apply_pauli(&ps(p)).unwrap();
            for (a, b) in s.amplitudes().iter().zip(orig.amplitudes()) {
                assert!((a - b).norm() < 1e-15);
            }
        }
    }

    #[test]
    fn single_qubit_y_action() {
        let mut s = zero_state::<f64>(1).unwrap();
        s.apply_pauli(&ps("Y")).unwrap();
        assert_eq!(s.amplitudes(), &[c(0.0, 0.0), c(0.0, 1.0)]);
    }

    #[test]
    fn expectation_examples() {
        let z = zero_state::<f64>(1).unwrap();
        let hz: PauliSum<f64> = parse_pauli_sum("1 Z").unwrap();
        assert_eq!(expectation(&z, &hz).unwrap(), 1.0);
        for &t in &[0.3, 1.2, -2.0, 3.0] {
            let s = apply_pauli_rotation(&z, &ps("X"), t).unwrap();
            assert!((expectation(&s, &hz).unwrap() - f64::cos(t)).abs() < 1e-14);
        }
        let mut s = zero_state::<f64>(3).unwrap();
        s.rotate(&ps("XYZ"), 0.9).unwrap();
        let hi: PauliSum<f64> = parse_pauli_sum("0.37 III").unwrap();
        assert!((expectation(&s, &hi).unwrap() - 0.37).abs() < 1e-15);
        assert!(expectation(&s, &hz).is_err());
    }

    #[test]
    fn overlap_examples() {
        let z = zero_state::<f64>(1).unwrap();
        assert!((overlap(&z, &z).unwrap() - 1.0).abs() < 1e-15);
        let flipped = apply_pauli_rotation(&z, &ps("X"), PI).unwrap();
        assert!(overlap(&z, &flipped).unwrap() < 1e-30);
        for &t in &[0.2, 1.0, 2.5] {
            let r = apply_pauli_rotation(&z, &ps("X"), t).unwrap();
            assert!((overlap(&z, &r).unwrap() - (t / 2.0).cos().powi(2)).abs() < 1e-14);
            assert!((overlap(&r, &z).unwrap() - overlap(&z, &r).unwrap()).abs() < 1e-16);
        }
    }

    #[test]
    fn ground_energy_examples() {
        let h: PauliSum<f64> = parse_pauli_sum("1 Z").unwrap();
        assert!((ground_energy(&h).unwrap() + 1.0).abs() < 1e-10);
        let h: PauliSum<f64> = parse_pauli_sum("1 X").unwrap();
        assert!((ground_energy(&h).unwrap() + 1.0).abs() < 1e-10);
        let ring = crate::pauli::spin_ring_hamiltonian(3, 0.05f64, &[0.0; 3]).unwrap();
        assert!((ground_energy(&ring).unwrap() + 0.15).abs() < 1e-10);
        let ring2 = crate::pauli::spin_ring_hamiltonian(2, 0.05f64, &[0.0; 2]).unwrap();
        assert!((ground_energy(&ring2).unwrap() + 0.3).abs() < 1e-10);
    }

    #[test]
    fn ground_energy_of_degenerate_and_identity_sums() {
        let h: PauliSum<f64> = parse_pauli_sum("0.5 II").unwrap();
        assert!((ground_energy(&h).unwrap() - 0.5).abs() < 1e-12);
        let h: PauliSum<f64> = PauliSum::empty(2).unwrap();
        assert!(ground_energy(&h).unwrap().abs() < 1e-12);
    }

    #[test]
    fn works_in_single_precision() {
        let z = zero_state::<f32>(1).unwrap();
        let s = apply_pauli_rotation(&z, &ps("X"), 0.5f32).unwrap();
        let hz: PauliSum<f32> = parse_pauli_sum("1 Z").unwrap();
        assert!((expectation(&s, &hz).unwrap() - 0.5f32.cos()).abs() < 1e-6);
        assert!((ground_energy(&hz).unwrap() + 1.0).abs() < 1e-5);
    }

    #[test]
    fn adjoint_gradient_matches_parameter_shift() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let c = crate::ansatz::random_circuit::<f64, _>(3, 12, &mut rng).unwrap();
        let h = crate::pauli::random_pauli_sum(3, 8, &mut rng);
        let theta = vec![0.1; 12];
        let a = energy_gradient(&c, &theta, &h).unwrap();
        let b = c.parameter_shift_gradient(&theta, &h).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-13);
        }
    }
}
