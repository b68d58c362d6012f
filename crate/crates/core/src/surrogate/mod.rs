//! The truncated trigonometric model of the energy landscape around a
//! reference point.
//!
//! Every gate `exp(-i t P / 2)` contributes `a(t) Phi_a + b(t) Phi_b + c(t)
//! Phi_c` to the circuit, with `a = (1+cos t)/2`, `b = sin t/2`, `c =
//! (1-cos t)/2`. Keeping the products in which at most two axes leave the
//! `a` branch (and at most one of them takes `c`) leaves
//!
//! ```text
//! E(theta) ~ A eA + sum_k (B_k eB_k + C_k eC_k) + sum_{k<l} D_kl eD_kl
//! ```
//!
//! whose coefficients are combinations of energies at shifts in
//! `{0, +-pi/2, pi}` along one or two axes. The discarded terms are
//! `O(sin^3 delta)` with `delta = |theta|_inf`.

mod brute_force;
mod monomial;

pub use brute_force::{brute_force_energy, BruteForceExpansion, BRUTE_FORCE_MAX_NU};
pub use monomial::MonomialBasis;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ansatz::AnsatzCircuit;
use crate::error::{QadError, Result};
use crate::linalg::DenseMatrix;
use crate::pauli::PauliSum;
use crate::scalar::{max_abs, Real};

/// Sign pattern of a two-axis query `(s_k pi/2) v_k + (s_l pi/2) v_l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PairSigns {
    PlusPlus,
    MinusMinus,
    MinusPlus,
    PlusMinus,
}

impl PairSigns {
    pub const ALL: [PairSigns; 4] = [
        PairSigns::PlusPlus,
        PairSigns::MinusMinus,
        PairSigns::MinusPlus,
        PairSigns::PlusMinus,
    ];

    fn signs(self) -> (f64, f64) {
        match self {
            PairSigns::PlusPlus => (1.0, 1.0),
            PairSigns::MinusMinus => (-1.0, -1.0),
            PairSigns::MinusPlus => (-1.0, 1.0),
            PairSigns::PlusMinus => (1.0, -1.0),
        }
    }

    /// Weight of this query inside `eD_kl`.
    fn weight(self) -> f64 {
        match self {
            PairSigns::PlusPlus | PairSigns::MinusMinus => 1.0,
            PairSigns::MinusPlus | PairSigns::PlusMinus => -1.0,
        }
    }
}

/// Which coefficient a query feeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QueryTag {
    A,
    BPlus(usize),
    BMinus(usize),
    C(usize),
    D { k: usize, l: usize, signs: PairSigns },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CoefficientClass {
    A,
    B,
    C,
    D,
}

impl QueryTag {
    pub fn class(&self) -> CoefficientClass {
        match self {
            QueryTag::A => CoefficientClass::A,
            QueryTag::BPlus(_) | QueryTag::BMinus(_) => CoefficientClass::B,
            QueryTag::C(_) => CoefficientClass::C,
            QueryTag::D { .. } => CoefficientClass::D,
        }
    }
}

/// One energy query: a shift from the reference point with at most two
/// nonzero entries, each in `{+-pi/2, pi}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QueryPoint<T> {
    pub nu: usize,
    pub entries: Vec<(usize, T)>,
    pub tag: QueryTag,
}

impl<T: Real> QueryPoint<T> {
    pub fn shift(&self) -> Vec<T> {
        let mut v = vec![T::zero(); self.nu];
        for &(k, s) in &self.entries {
            v[k] = s;
        }
        v
    }
}

/// Number of distinct points in the schedule, `2 nu^2 + nu + 1`.
pub fn schedule_len(nu: usize) -> usize {
    2 * nu * nu + nu + 1
}

/// All energy queries needed for one model, in canonical order: `A`, then
/// `B+_k, B-_k` for each k, then `C_k`, then the four sign patterns of every
/// pair `k < l`. The position in this list is the query's stream index.
pub fn query_schedule<T: Real>(nu: usize) -> Vec<QueryPoint<T>> {
    let h = T::FRAC_PI_2();
    let mut out = Vec::with_capacity(schedule_len(nu));
    out.push(QueryPoint {
        nu,
        entries: vec![],
        tag: QueryTag::A,
    });
    for k in 0..nu {
        out.push(QueryPoint {
            nu,
            entries: vec![(k, h)],
            tag: QueryTag::BPlus(k),
        });
        out.push(QueryPoint {
            nu,
            entries: vec![(k, -h)],
            tag: QueryTag::BMinus(k),
        });
    }
    for k in 0..nu {
        out.push(QueryPoint {
            nu,
            entries: vec![(k, T::PI())],
            tag: QueryTag::C(k),
        });
    }
    for k in 0..nu {
        for l in k + 1..nu {
            for signs in PairSigns::ALL {
                let (sk, sl) = signs.signs();
                out.push(QueryPoint {
                    nu,
                    entries: vec![(k, h * T::lit(sk)), (l, h * T::lit(sl))],
                    tag: QueryTag::D { k, l, signs },
                });
            }
        }
    }
    debug_assert_eq!(out.len(), schedule_len(nu));
    out
}

/// Standard deviation of the Gaussian noise added to each raw energy query,
/// per coefficient class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct QueryNoise<T> {
    pub sigma_a: T,
    pub sigma_b: T,
    pub sigma_c: T,
    pub sigma_d: T,
}

impl<T: Real> QueryNoise<T> {
    pub fn uniform(sigma: T) -> Self {
        Self {
            sigma_a: sigma,
            sigma_b: sigma,
            sigma_c: sigma,
            sigma_d: sigma,
        }
    }

    pub fn sigma(&self, class: CoefficientClass) -> T {
        match class {
            CoefficientClass::A => self.sigma_a,
            CoefficientClass::B => self.sigma_b,
            CoefficientClass::C => self.sigma_c,
            CoefficientClass::D => self.sigma_d,
        }
    }
}

/// Deterministic RNG for raw query `index` of a model seeded with `seed`.
pub fn query_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian<T: Real, R: Rng>(rng: &mut R, sigma: T) -> T {
    let z: f64 = rng.sample(StandardNormal);
    T::lit(z) * sigma
}

/// Packed index of the strictly-upper-triangular pair `(k, l)`, `k < l`.
#[inline]
pub fn pair_index(nu: usize, k: usize, l: usize) -> usize {
    debug_assert!(k < l && l < nu);
    k * (2 * nu - k - 1) / 2 + (l - k - 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct SurrogateModel<T> {
    pub theta0: Vec<T>,
    pub e_a: T,
    pub e_b: Vec<T>,
    pub e_c: Vec<T>,
    /// Strict upper triangle, packed row by row (see [`pair_index`]).
    pub e_d: Vec<T>,
    pub var_a: T,
    pub var_b: Vec<T>,
    pub var_c: Vec<T>,
    pub var_d: Vec<T>,
}

/// Per-class contributions to the propagated variance of one gradient entry.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct VarianceBreakdown<T> {
    pub a: T,
    pub b: T,
    pub c: T,
    pub d: T,
}

impl<T: Real> VarianceBreakdown<T> {
    pub fn total(&self) -> T {
        self.a + self.b + self.c + self.d
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryReport<T> {
    pub max_asymmetry: T,
    pub b_norm_inf: T,
    pub samples: usize,
    pub radius: T,
}

/// Runs every query in `schedule` through `oracle` (optionally adding
/// Gaussian noise per raw query) and combines the results into a model.
///
/// The oracle receives the shift relative to `theta0`. Noise for the query at
/// schedule position `i` comes from [`query_rng`]`(seed, i)`, so the result is
/// the same whether or not queries run in parallel.
pub fn estimate_coefficients<T, F>(
    oracle: F,
    schedule: &[QueryPoint<T>],
    theta0: Vec<T>,
    noise: Option<&QueryNoise<T>>,
    seed: u64,
    parallel: bool,
) -> Result<SurrogateModel<T>>
where
    T: Real,
    F: Fn(&[T]) -> Result<T> + Sync,
{
    let nu = theta0.len();
    let run = |(i, q): (usize, &QueryPoint<T>)| -> Result<T> {
        if q.nu != nu {
            return Err(QadError::DimensionMismatch {
                expected: nu,
                found: q.nu,
            });
        }
        let shift = q.shift();
        let mut e = oracle(&shift).map_err(|e| QadError::Query {
            shift: shift.iter().map(|x| x.as_f64()).collect(),
            source: Box::new(e),
        })?;
        if let Some(n) = noise {
            let sigma = n.sigma(q.tag.class());
            if sigma > T::zero() {
                let mut rng = query_rng(seed, i as u64);
                e += gaussian(&mut rng, sigma);
            }
        }
        Ok(e)
    };
    let values: Vec<T> = if parallel {
        schedule.par_iter().enumerate().map(run).collect::<Result<_>>()?
    } else {
        schedule.iter().enumerate().map(run).collect::<Result<_>>()?
    };

    let npairs = nu * nu.saturating_sub(1) / 2;
    let mut e_a = None;
    let mut b_plus = vec![None; nu];
    let mut b_minus = vec![None; nu];
    let mut e_c = vec![None; nu];
    let mut d_parts: Vec<[Option<T>; 4]> = vec![[None; 4]; npairs];
    for (q, v) in schedule.iter().zip(values) {
        match q.tag {
            QueryTag::A => e_a = Some(v),
            QueryTag::BPlus(k) => b_plus[k] = Some(v),
            QueryTag::BMinus(k) => b_minus[k] = Some(v),
            QueryTag::C(k) => e_c[k] = Some(v),
            QueryTag::D { k, l, signs } => {
                let slot = PairSigns::ALL.iter().position(|s| *s == signs).unwrap();
                d_parts[pair_index(nu, k, l)][slot] = Some(v);
            }
        }
    }
    let missing = |what: &str| QadError::InvalidArgument(format!("schedule lacks the {what} query"));
    let e_a = e_a.ok_or_else(|| missing("A"))?;
    let e_b = (0..nu)
        .map(|k| match (b_plus[k], b_minus[k]) {
            (Some(p), Some(m)) => Ok(p - m),
            _ => Err(missing(&format!("B_{k}"))),
        })
        .collect::<Result<Vec<_>>>()?;
    let e_c = e_c
        .into_iter()
        .enumerate()
        .map(|(k, v)| v.ok_or_else(|| missing(&format!("C_{k}"))))
        .collect::<Result<Vec<_>>>()?;
    let e_d = d_parts
        .iter()
        .map(|parts| {
            let mut acc = T::zero();
            for (slot, signs) in PairSigns::ALL.iter().enumerate() {
                let v = parts[slot].ok_or_else(|| missing("D"))?;
                acc += T::lit(signs.weight()) * v;
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;

    let (va, vb, vc, vd) = match noise {
        Some(n) => (
            n.sigma_a * n.sigma_a,
            T::two() * n.sigma_b * n.sigma_b,
            n.sigma_c * n.sigma_c,
            T::lit(4.0) * n.sigma_d * n.sigma_d,
        ),
        None => (T::zero(), T::zero(), T::zero(), T::zero()),
    };
    Ok(SurrogateModel {
        theta0,
        e_a,
        e_b,
        e_c,
        e_d,
        var_a: va,
        var_b: vec![vb; nu],
        var_c: vec![vc; nu],
        var_d: vec![vd; npairs],
    })
}

impl<T: Real> SurrogateModel<T> {
    /// Builds the model of `circuit`'s energy around its reference point.
    pub fn from_circuit(
        circuit: &AnsatzCircuit<T>,
        h: &PauliSum<T>,
        noise: Option<&QueryNoise<T>>,
        seed: u64,
        parallel: bool,
    ) -> Result<Self> {
        let schedule = query_schedule::<T>(circuit.nu());
        estimate_coefficients(
            |shift| circuit.energy(shift, h),
            &schedule,
            circuit.theta_ref().to_vec(),
            noise,
            seed,
            parallel,
        )
    }

    pub fn nu(&self) -> usize {
        self.theta0.len()
    }

    /// `eD_kl` for `k < l`.
    pub fn e_d(&self, k: usize, l: usize) -> T {
        assert!(k < l, "eD is indexed with k < l");
        self.e_d[pair_index(self.nu(), k, l)]
    }

    pub fn var_d(&self, k: usize, l: usize) -> T {
        assert!(k < l, "var_d is indexed with k < l");
        self.var_d[pair_index(self.nu(), k, l)]
    }

    fn e_d_sym(&self, k: usize, l: usize) -> T {
        if k < l {
            self.e_d(k, l)
        } else {
            self.e_d(l, k)
        }
    }

    fn var_d_sym(&self, k: usize, l: usize) -> T {
        if k < l {
            self.var_d(k, l)
        } else {
            self.var_d(l, k)
        }
    }

    fn check_len(&self, theta: &[T]) -> Result<()> {
        if theta.len() != self.nu() {
            return Err(QadError::DimensionMismatch {
                expected: self.nu(),
                found: theta.len(),
            });
        }
        Ok(())
    }

    fn check_trust_region(theta: &[T]) -> Result<()> {
        let bound = T::FRAC_PI_2();
        match theta.iter().position(|t| !(t.abs() < bound)) {
            Some(index) => Err(QadError::TrustRegion {
                index,
                value: theta[index].as_f64(),
                bound: bound.as_f64(),
            }),
            None => Ok(()),
        }
    }

    /// Value of the truncated series at `theta` (relative to `theta0`).
    pub fn eval_energy(&self, theta: &[T]) -> Result<T> {
        self.check_len(theta)?;
        let nu = self.nu();
        let m = MonomialBasis::new(theta);
        let mut e = m.full_product() * self.e_a;
        for k in 0..nu {
            e += (m.b[k] * self.e_b[k] + m.c[k] * self.e_c[k]) * m.product_excluding(k);
        }
        for k in 0..nu {
            if m.b[k] == T::zero() {
                continue;
            }
            // prod_{j != k, l} a_j = prefix(k) * (a_{k+1} ... a_{l-1}) * suffix(l+1)
            let mut mid = T::one();
            for l in k + 1..nu {
                let w = m.prefix(k) * mid * m.suffix(l + 1);
                e += m.b[k] * m.b[l] * w * self.e_d(k, l);
                mid *= m.a[l];
            }
        }
        Ok(e)
    }

    /// Exact gradient of [`eval_energy`](Self::eval_energy) in O(nu^2).
    ///
    /// Divides by `a(theta_k)`, so every coordinate must satisfy
    /// `|theta_k| < pi/2` (where `a >= 1/2`).
    pub fn eval_gradient(&self, theta: &[T]) -> Result<Vec<T>> {
        self.check_len(theta)?;
        Self::check_trust_region(theta)?;
        let nu = self.nu();
        let m = MonomialBasis::new(theta);
        let r: Vec<T> = (0..nu).map(|k| m.b[k] / m.a[k]).collect();
        let s: Vec<T> = (0..nu).map(|k| m.c[k] / m.a[k]).collect();
        let rb: T = (0..nu).map(|k| r[k] * self.e_b[k]).sum();
        let sc: T = (0..nu).map(|k| s[k] * self.e_c[k]).sum();
        let mut w = vec![T::zero(); nu];
        let mut pair_sum = T::zero();
        for k in 0..nu {
            for l in k + 1..nu {
                let d = self.e_d(k, l);
                w[k] += r[l] * d;
                w[l] += r[k] * d;
                pair_sum += r[k] * r[l] * d;
            }
        }
        Ok((0..nu)
            .map(|i| {
                let rest = self.e_a + (rb - r[i] * self.e_b[i]) + (sc - s[i] * self.e_c[i]) + (pair_sum - r[i] * w[i]);
                let g = m.da[i] * rest + m.db[i] * (self.e_b[i] + w[i]) + m.dc[i] * self.e_c[i];
                g * m.product_excluding(i)
            })
            .collect())
    }

    /// Gradient from the monomial derivative definitions with explicit
    /// products (no division). O(nu^4); valid for every `theta`.
    pub fn eval_gradient_direct(&self, theta: &[T]) -> Result<Vec<T>> {
        self.check_len(theta)?;
        let nu = self.nu();
        let m = MonomialBasis::new(theta);
        let mut grad = vec![T::zero(); nu];
        for (i, gi) in grad.iter_mut().enumerate() {
            let mut g = m.da[i] * m.product_excluding_direct(&[i]) * self.e_a;
            for k in 0..nu {
                if k == i {
                    g += m.db[i] * m.product_excluding_direct(&[i]) * self.e_b[k];
                    g += m.dc[i] * m.product_excluding_direct(&[i]) * self.e_c[k];
                } else {
                    let p = m.product_excluding_direct(&[i, k]) * m.da[i];
                    g = g + p * m.b[k] * self.e_b[k] + p * m.c[k] * self.e_c[k];
                }
            }
            for k in 0..nu {
                for l in k + 1..nu {
                    let deriv = if i == k {
                        m.db[k] * m.b[l] * m.product_excluding_direct(&[k, l])
                    } else if i == l {
                        m.b[k] * m.db[l] * m.product_excluding_direct(&[k, l])
                    } else {
                        m.b[k] * m.b[l] * m.da[i] * m.product_excluding_direct(&[k, l, i])
                    };
                    g += deriv * self.e_d(k, l);
                }
            }
            *gi = g;
        }
        Ok(grad)
    }

    /// Linear error propagation of the coefficient variances into each
    /// gradient entry, split by coefficient class.
    pub fn gradient_variance_by_class(&self, theta: &[T]) -> Result<Vec<VarianceBreakdown<T>>> {
        self.check_len(theta)?;
        if Self::check_trust_region(theta).is_err() {
            return self.gradient_variance_direct(theta);
        }
        let nu = self.nu();
        let m = MonomialBasis::new(theta);
        let r2: Vec<T> = (0..nu).map(|k| (m.b[k] / m.a[k]).powi(2)).collect();
        let s2: Vec<T> = (0..nu).map(|k| (m.c[k] / m.a[k]).powi(2)).collect();
        let rb: T = (0..nu).map(|k| r2[k] * self.var_b[k]).sum();
        let sc: T = (0..nu).map(|k| s2[k] * self.var_c[k]).sum();
        let mut wd = vec![T::zero(); nu];
        let mut sd = T::zero();
        for k in 0..nu {
            for l in k + 1..nu {
                let v = self.var_d(k, l);
                wd[k] += r2[l] * v;
                wd[l] += r2[k] * v;
                sd += r2[k] * r2[l] * v;
            }
        }
        Ok((0..nu)
            .map(|i| {
                let p = m.product_excluding(i);
                let am = (m.da[i] * p).powi(2);
                let bm = (m.db[i] * p).powi(2);
                let cm = (m.dc[i] * p).powi(2);
                VarianceBreakdown {
                    a: am * self.var_a,
                    b: bm * self.var_b[i] + am * (rb - r2[i] * self.var_b[i]),
                    c: cm * self.var_c[i] + am * (sc - s2[i] * self.var_c[i]),
                    d: bm * wd[i] + am * (sd - r2[i] * wd[i]),
                }
            })
            .collect())
    }

    fn gradient_variance_direct(&self, theta: &[T]) -> Result<Vec<VarianceBreakdown<T>>> {
        let nu = self.nu();
        let m = MonomialBasis::new(theta);
        Ok((0..nu)
            .map(|i| {
                let mut out = VarianceBreakdown::default();
                out.a = (m.da[i] * m.product_excluding_direct(&[i])).powi(2) * self.var_a;
                for k in 0..nu {
                    let (db, dc) = if k == i {
                        let p = m.product_excluding_direct(&[i]);
                        (m.db[i] * p, m.dc[i] * p)
                    } else {
                        let p = m.product_excluding_direct(&[i, k]) * m.da[i];
                        (p * m.b[k], p * m.c[k])
                    };
                    out.b += db * db * self.var_b[k];
                    out.c += dc * dc * self.var_c[k];
                }
                for k in 0..nu {
                    for l in k + 1..nu {
                        let deriv = if i == k {
                            m.db[k] * m.b[l] * m.product_excluding_direct(&[k, l])
                        } else if i == l {
                            m.b[k] * m.db[l] * m.product_excluding_direct(&[k, l])
                        } else {
                            m.b[k] * m.b[l] * m.da[i] * m.product_excluding_direct(&[k, l, i])
                        };
                        out.d += deriv * deriv * self.var_d_sym(k, l);
                    }
                }
                out
            })
            .collect())
    }

    /// Propagated variance of every entry of [`eval_gradient`](Self::eval_gradient).
    pub fn gradient_variance(&self, theta: &[T]) -> Result<Vec<T>> {
        Ok(self.gradient_variance_by_class(theta)?.iter().map(|v| v.total()).collect())
    }

    /// Gradient and Hessian of the true energy at the reference point:
    /// `g_m = eB_m/2`, `H_mm = (eC_m - eA)/2`, `H_mn = eD_mn/4`.
    pub fn extract_gradient_hessian(&self) -> (Vec<T>, DenseMatrix<T>) {
        let nu = self.nu();
        let g = self.e_b.iter().map(|&b| b * T::half()).collect();
        let quarter = T::lit(0.25);
        let h = DenseMatrix::from_fn(nu, nu, |i, j| {
            if i == j {
                (self.e_c[i] - self.e_a) * T::half()
            } else {
                self.e_d_sym(i, j) * quarter
            }
        });
        (g, h)
    }

    /// Largest per-coefficient standard deviation among the `eB`.
    pub fn max_b_std(&self) -> T {
        self.var_b.iter().fold(T::zero(), |m, v| m.max(v.sqrt()))
    }

    /// Samples `theta` uniformly in the cube of half-width `radius` and
    /// reports the largest `|E(theta) - E(-theta)|` of the model.
    ///
    /// The model must be built at a stationary point: `|eB|_inf` may not
    /// exceed `10 * max std(eB)` (or `stationarity_floor` when noiseless).
    pub fn symmetry_report(&self, samples: usize, radius: T, seed: u64, stationarity_floor: T) -> Result<SymmetryReport<T>> {
        let b_norm = max_abs(&self.e_b);
        let threshold = (T::lit(10.0) * self.max_b_std()).max(stationarity_floor);
        if b_norm > threshold {
            return Err(QadError::InvalidArgument(format!(
                "model is not at a stationary point: |eB|_inf = {b_norm} exceeds {threshold}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst = T::zero();
        for _ in 0..samples {
            let theta: Vec<T> = (0..self.nu())
                .map(|_| radius * T::lit(rng.random_range(-1.0..=1.0)))
                .collect();
            let neg: Vec<T> = theta.iter().map(|t| -*t).collect();
            let d = (self.eval_energy(&theta)? - self.eval_energy(&neg)?).abs();
            worst = worst.max(d);
        }
        Ok(SymmetryReport {
            max_asymmetry: worst,
            b_norm_inf: b_norm,
            samples,
            radius,
        })
    }
}

#[cfg(test)]
mod tests;
