//! Quantum Fisher information of the circuit manifold, its overlap-based
//! surrogate, and the regularized solve used by natural-gradient steps.

use num_complex::Complex;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzCircuit;
use crate::error::{QadError, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;
use crate::simulator::{overlap, tangent_states, StateVector};
use crate::surrogate::MonomialBasis;

/// Symmetric `nu x nu` metric `F_mn = 2 tr[d_m rho d_n rho]`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricTensor<T> {
    entries: DenseMatrix<T>,
}

impl<T: Real> MetricTensor<T> {
    /// Wraps `entries`, replacing them by `(M + M^T)/2`.
    pub fn from_matrix(entries: DenseMatrix<T>) -> Result<Self> {
        if entries.rows() != entries.cols() {
            return Err(QadError::DimensionMismatch {
                expected: entries.rows(),
                found: entries.cols(),
            });
        }
        let n = entries.rows();
        let sym = DenseMatrix::from_fn(n, n, |i, j| (entries[(i, j)] + entries[(j, i)]) * T::half());
        Ok(Self { entries: sym })
    }

    pub fn identity(nu: usize) -> Self {
        Self {
            entries: DenseMatrix::identity(nu),
        }
    }

    pub fn nu(&self) -> usize {
        self.entries.rows()
    }

    pub fn matrix(&self) -> &DenseMatrix<T> {
        &self.entries
    }

    pub fn eigenvalues(&self) -> Vec<T> {
        self.entries.symmetric_eigenvalues()
    }
}

impl<T> std::ops::Index<(usize, usize)> for MetricTensor<T> {
    type Output = T;

    fn index(&self, idx: (usize, usize)) -> &T {
        &self.entries[idx]
    }
}

/// Exact metric at `theta_ref + theta` from the tangent states:
/// `F_mn = 4 Re[<d_m psi|d_n psi> + <psi|d_m psi><psi|d_n psi>]`.
pub fn qfi_exact<T: Real>(circuit: &AnsatzCircuit<T>, theta: &[T]) -> Result<MetricTensor<T>> {
    let psi = circuit.prepare_state(theta)?;
    let tangents = tangent_states(circuit, theta)?;
    let proj: Vec<Complex<T>> = tangents.iter().map(|t| psi.inner(t)).collect::<Result<_>>()?;
    let nu = tangents.len();
    let four = T::lit(4.0);
    let rows: Vec<Vec<T>> = (0..nu)
        .into_par_iter()
        .map(|m| {
            (0..nu)
                .map(|n| {
                    if n < m {
                        return T::zero();
                    }
                    let ab = tangents[m].inner(&tangents[n]).expect("tangent dimensions agree");
                    four * (ab.re + (proj[m] * proj[n]).re)
                })
                .collect()
        })
        .collect();
    let f = DenseMatrix::from_fn(nu, nu, |i, j| if i <= j { rows[i][j] } else { rows[j][i] });
    Ok(MetricTensor { entries: f })
}

/// Overlap coefficients of the metric expansion around `theta0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct MetricSurrogate<T> {
    pub theta0: Vec<T>,
    /// `ov(+m,+n) + ov(-m,-n) - ov(-m,+n) - ov(+m,-n)`.
    pub f_bb: Vec<Vec<T>>,
    /// `ov(0,+m) - ov(0,-m)`, the same for every `n`; zero for pure states.
    pub f_ab: Vec<Vec<T>>,
}

/// Builds the surrogate from `|<psi(x)|psi(y)>|^2` overlaps between states
/// shifted by `+-pi/2` along single axes.
pub fn qfi_surrogate_estimate<T: Real>(circuit: &AnsatzCircuit<T>) -> Result<MetricSurrogate<T>> {
    let nu = circuit.nu();
    let h = T::FRAC_PI_2();
    let shifted = |k: usize, s: T| -> Result<StateVector<T>> {
        let mut theta = vec![T::zero(); nu];
        theta[k] = s;
        circuit.prepare_state(&theta)
    };
    let plus: Vec<StateVector<T>> = (0..nu).into_par_iter().map(|k| shifted(k, h)).collect::<Result<_>>()?;
    let minus: Vec<StateVector<T>> = (0..nu).into_par_iter().map(|k| shifted(k, -h)).collect::<Result<_>>()?;
    let psi0 = circuit.prepare_state(&vec![T::zero(); nu])?;

    let f_bb: Vec<Vec<T>> = (0..nu)
        .into_par_iter()
        .map(|m| {
            (0..nu)
                .map(|n| {
                    let pp = overlap(&plus[m], &plus[n])?;
                    let mm = overlap(&minus[m], &minus[n])?;
                    let mp = overlap(&minus[m], &plus[n])?;
                    let pm = overlap(&plus[m], &minus[n])?;
                    Ok(pp + mm - mp - pm)
                })
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    let ab: Vec<T> = (0..nu)
        .map(|m| Ok(overlap(&psi0, &plus[m])? - overlap(&psi0, &minus[m])?))
        .collect::<Result<_>>()?;
    let f_ab = (0..nu).map(|m| vec![ab[m]; nu]).collect();
    Ok(MetricSurrogate {
        theta0: circuit.theta_ref().to_vec(),
        f_bb,
        f_ab,
    })
}

/// `F_BB(m,n) 2 dB_m/dtheta_m dB_n/dtheta_n` plus the two `F_AB` cross
/// terms, symmetrized. Only the leading classes are kept, so the result
/// agrees with [`qfi_exact`] at `theta = 0` and to first order away from it.
pub fn qfi_surrogate_eval<T: Real>(s: &MetricSurrogate<T>, theta: &[T]) -> Result<MetricTensor<T>> {
    let nu = s.theta0.len();
    if theta.len() != nu {
        return Err(QadError::DimensionMismatch {
            expected: nu,
            found: theta.len(),
        });
    }
    if let Some(index) = theta.iter().position(|t| !(t.abs() < T::FRAC_PI_2())) {
        return Err(QadError::TrustRegion {
            index,
            value: theta[index].as_f64(),
            bound: T::FRAC_PI_2().as_f64(),
        });
    }
    let mb = MonomialBasis::new(theta);
    let db: Vec<T> = (0..nu).map(|k| mb.db[k] * mb.product_excluding(k)).collect();
    let da: Vec<T> = (0..nu).map(|k| mb.da[k] * mb.product_excluding(k)).collect();
    let two = T::two();
    let f = DenseMatrix::from_fn(nu, nu, |m, n| {
        two * (s.f_bb[m][n] * db[m] * db[n] + s.f_ab[m][n] * db[m] * da[n] + s.f_ab[n][m] * da[m] * db[n])
    });
    MetricTensor::from_matrix(f)
}

/// Solves `(F + eta I) d = g` by Cholesky factorization.
pub fn regularized_natural_direction<T: Real>(f: &MetricTensor<T>, eta: T, g: &[T]) -> Result<Vec<T>> {
    let nu = f.nu();
    if g.len() != nu {
        return Err(QadError::DimensionMismatch {
            expected: nu,
            found: g.len(),
        });
    }
    if !(eta >= T::zero()) {
        return Err(QadError::InvalidArgument(format!("regularization must be non-negative, got {eta}")));
    }
    let shifted = DenseMatrix::from_fn(nu, nu, |i, j| if i == j { f[(i, j)] + eta } else { f[(i, j)] });
    match shifted.cholesky() {
        Some(l) => Ok(l.cholesky_solve(g)),
        None => {
            let smallest = shifted.symmetric_eigenvalues().first().copied().unwrap_or(T::zero());
            Err(QadError::NotPositiveDefinite {
                smallest: smallest.as_f64(),
            })
        }
    }
}

#[cfg(test)]
mod tests;
