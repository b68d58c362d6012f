//! Per-axis Fourier components and the products of them that make up the
//! surrogate's monomials.

use crate::scalar::Real;

/// `a = (1 + cos t)/2`, `b = sin t / 2`, `c = (1 - cos t)/2` and their
/// derivatives for every coordinate of one parameter vector, plus prefix and
/// suffix products of `a` so that `prod_{j != k} a_j` costs O(1).
#[derive(Clone, Debug)]
pub struct MonomialBasis<T> {
    pub a: Vec<T>,
    pub b: Vec<T>,
    pub c: Vec<T>,
    pub da: Vec<T>,
    pub db: Vec<T>,
    pub dc: Vec<T>,
    prefix: Vec<T>,
    suffix: Vec<T>,
}

impl<T: Real> MonomialBasis<T> {
    pub fn new(theta: &[T]) -> Self {
        let nu = theta.len();
        let half = T::half();
        let mut a = Vec::with_capacity(nu);
        let mut b = Vec::with_capacity(nu);
        let mut c = Vec::with_capacity(nu);
        let mut da = Vec::with_capacity(nu);
        let mut db = Vec::with_capacity(nu);
        let mut dc = Vec::with_capacity(nu);
        for &t in theta {
            let (s, co) = t.sin_cos();
            a.push((T::one() + co) * half);
            b.push(s * half);
            c.push((T::one() - co) * half);
            da.push(-s * half);
            db.push(co * half);
            dc.push(s * half);
        }
        let mut prefix = Vec::with_capacity(nu + 1);
        prefix.push(T::one());
        for k in 0..nu {
            prefix.push(prefix[k] * a[k]);
        }
        let mut suffix = vec![T::one(); nu + 1];
        for k in (0..nu).rev() {
            suffix[k] = suffix[k + 1] * a[k];
        }
        Self {
            a,
            b,
            c,
            da,
            db,
            dc,
            prefix,
            suffix,
        }
    }

    pub fn nu(&self) -> usize {
        self.a.len()
    }

    /// `A(theta) = prod_k a(theta_k)`.
    pub fn full_product(&self) -> T {
        self.prefix[self.nu()]
    }

    /// `prod_{j < k} a_j`.
    pub fn prefix(&self, k: usize) -> T {
        self.prefix[k]
    }

    /// `prod_{j >= k} a_j`.
    pub fn suffix(&self, k: usize) -> T {
        self.suffix[k]
    }

    /// `prod_{j != k} a_j`, without division.
    pub fn product_excluding(&self, k: usize) -> T {
        self.prefix[k] * self.suffix[k + 1]
    }

    /// `prod_{j not in skip} a_j` by direct multiplication.
    pub fn product_excluding_direct(&self, skip: &[usize]) -> T {
        self.a
            .iter()
            .enumerate()
            .filter(|(j, _)| !skip.contains(j))
            .fold(T::one(), |acc, (_, &x)| acc * x)
    }
}
