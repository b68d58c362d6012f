//! Restarted Lanczos iteration for the lowest eigenpair of a Hermitian
//! operator given only as a matrix-vector product.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{QadError, Result};
use crate::linalg::DenseMatrix;
use crate::scalar::Real;
use crate::simulator::inner_raw;

pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
pub const MAX_MATVECS: usize = 10_000;
const KRYLOV_DIM: usize = 64;

pub struct Eigenpair<T> {
    pub value: T,
    pub vector: Vec<Complex<T>>,
    pub residual: T,
    pub matvecs: usize,
}

fn normalize<T: Real>(v: &mut [Complex<T>]) -> T {
    let n = inner_raw(v, v).re.sqrt();
    if n > T::zero() {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lowest eigenpair of the Hermitian operator `apply` on a `dim`-dimensional
/// space, iterated until `|A x - lambda x| <= tol` or `max_matvecs` products
/// have been spent.
pub fn lowest_eigenpair<T: Real>(
    dim: usize,
    apply: impl Fn(&[Complex<T>], &mut [Complex<T>]),
    tol: T,
    max_matvecs: usize,
) -> Result<Eigenpair<T>> {
    let zero = Complex::new(T::zero(), T::zero());
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c_2005);
    let mut start: Vec<Complex<T>> = (0..dim)
        .map(|_| Complex::new(T::lit(rng.random::<f64>() - 0.5), T::lit(rng.random::<f64>() - 0.5)))
        .collect();
    normalize(&mut start);

    let m_max = KRYLOV_DIM.min(dim);
    let mut matvecs = 0usize;
    let mut w = vec![zero; dim];
    loop {
        let mut basis: Vec<Vec<Complex<T>>> = vec![start.clone()];
        let mut alpha: Vec<T> = Vec::with_capacity(m_max);
        let mut beta: Vec<T> = Vec::with_capacity(m_max);
        for j in 0..m_max {
            apply(&basis[j], &mut w);
            matvecs += 1;
            let a = inner_raw(&basis[j], &w).re;
            alpha.push(a);
            // Full reorthogonalisation (twice) against the whole basis.
            for _ in 0..2 {
                for v in &basis {
                    let proj = inner_raw(v, &w);
                    w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= *vi * proj);
                }
            }
            if j + 1 == m_max {
                break;
            }
            let mut next = w.clone();
            let b = normalize(&mut next);
            if b <= T::epsilon() * T::lit(1e2) * a.abs().max(T::one()) {
                break;
            }
            beta.push(b);
            basis.push(next);
        }

        let m = alpha.len();
        let tri = DenseMatrix::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i.abs_diff(j) == 1 {
                beta[i.min(j)]
            } else {
                T::zero()
            }
        });
        let (vals, vecs) = tri.symmetric_eigen();
        let lambda = vals[0];
        let mut x = vec![zero; dim];
        for (k, v) in basis.iter().enumerate().take(m) {
            let coef = vecs[(k, 0)];
            x.iter_mut().zip(v).for_each(|(xi, vi)| *xi += *vi * coef);
        }
        normalize(&mut x);
        apply(&x, &mut w);
        matvecs += 1;
        let residual = w
            .iter()
            .zip(&x)
            .map(|(wi, xi)| (*wi - *xi * lambda).norm_sqr())
            .sum::<T>()
            .sqrt();
        if residual <= tol || m == dim {
            return Ok(Eigenpair {
                value: lambda,
                vector: x,
                residual,
                matvecs,
            });
        }
        if matvecs >= max_matvecs {
            return Err(QadError::NoConvergence {
                iterations: matvecs,
                residual: residual.as_f64(),
            });
        }
        start = x;
    }
}
