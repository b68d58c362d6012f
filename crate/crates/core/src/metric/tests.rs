use super::*;
use crate::ansatz::random_circuit;
use crate::pauli::PauliString;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type C64 = Complex<f64>;

fn single(letter: &str, angle: f64) -> AnsatzCircuit<f64> {
    AnsatzCircuit::new(1, vec![letter.parse::<PauliString>().unwrap()], vec![angle]).unwrap()
}

fn density(c: &AnsatzCircuit<f64>, theta: &[f64]) -> DMatrix<C64> {
    let psi = c.prepare_state(theta).unwrap();
    let v = nalgebra::DVector::from_column_slice(psi.amplitudes());
    &v * v.adjoint()
}

fn fd_metric(c: &AnsatzCircuit<f64>, theta: &[f64], eps: f64) -> DMatrix<f64> {
    let nu = c.nu();
    let d: Vec<DMatrix<C64>> = (0..nu)
        .map(|k| {
            let mut p = theta.to_vec();
            p[k] += eps;
            let mut q = theta.to_vec();
            q[k] -= eps;
            density(c, &p) - density(c, &q)
        })
        .collect();
    DMatrix::from_fn(nu, nu, |m, n| 2.0 * (&d[m] * &d[n]).trace().re / (4.0 * eps * eps))
}

#[test]
fn single_rx_is_one() {
    for phi in [0.0, 0.4, 1.3, -2.0] {
        let f = qfi_exact(&single("X", phi), &[0.0]).unwrap();
        assert!((f[(0, 0)] - 1.0).abs() < 1e-15);
    }
    assert_eq!(qfi_exact(&single("X", 0.0), &[0.0]).unwrap()[(0, 0)], 1.0);
}

#[test]
fn repeated_generator_gives_rank_one() {
    let x: PauliString = "XI".parse().unwrap();
    let c = AnsatzCircuit::<f64>::new(2, vec![x.clone(), x], vec![0.3, 0.5]).unwrap();
    let f = qfi_exact(&c, &[0.0, 0.0]).unwrap();
    assert!((f[(0, 0)] - f[(0, 1)]).abs() < 1e-14);
    assert!((f[(1, 0)] - f[(1, 1)]).abs() < 1e-14);
    assert!(f.eigenvalues()[0].abs() < 1e-12);
}

#[test]
fn exact_matches_density_matrix_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in 1..=3 {
        let c = random_circuit::<f64, _>(n, 6, &mut rng).unwrap();
        let theta: Vec<f64> = (0..6).map(|_| rng.random_range(-0.5..0.5)).collect();
        let f = qfi_exact(&c, &theta).unwrap();
        let fd = fd_metric(&c, &theta, 1e-4);
        for m in 0..6 {
            for k in 0..6 {
                assert!((f[(m, k)] - fd[(m, k)]).abs() < 1e-6, "{m} {k}");
            }
        }
    }
}

#[test]
fn exact_metric_is_psd() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for _ in 0..20 {
        let c = random_circuit::<f64, _>(3, 8, &mut rng).unwrap();
        let f = qfi_exact(&c, &[0.0; 8]).unwrap();
        assert!(f.matrix().max_asymmetry() < 1e-12);
        assert!(f.eigenvalues()[0] > -1e-8);
    }
}

#[test]
fn single_rx_surrogate_chain() {
    let s = qfi_surrogate_estimate(&single("X", 0.0)).unwrap();
    assert!((s.f_bb[0][0] - 2.0).abs() < 1e-15);
    assert!(s.f_ab[0][0].abs() < 1e-15);
    let f = qfi_surrogate_eval(&s, &[0.0]).unwrap();
    assert!((f[(0, 0)] - 1.0).abs() < 1e-15);
}

#[test]
fn surrogate_equals_exact_at_origin() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let c = random_circuit::<f64, _>(2, 5, &mut rng).unwrap();
        let s = qfi_surrogate_estimate(&c).unwrap();
        for m in 0..5 {
            for n in 0..5 {
                assert!((s.f_bb[m][n] - s.f_bb[n][m]).abs() < 1e-14);
            }
            assert!(s.f_ab[m][0].abs() < 1e-12);
        }
        let approx = qfi_surrogate_eval(&s, &[0.0; 5]).unwrap();
        let exact = qfi_exact(&c, &[0.0; 5]).unwrap();
        for m in 0..5 {
            for n in 0..5 {
                assert!((approx[(m, n)] - exact[(m, n)]).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn surrogate_error_shrinks_linearly() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c = random_circuit::<f64, _>(4, 8, &mut rng).unwrap();
    let s = qfi_surrogate_estimate(&c).unwrap();
    let dir: Vec<f64> = (0..8).map(|_| rng.random_range(-1.0..1.0)).collect();
    let err = |delta: f64| {
        let theta: Vec<f64> = dir.iter().map(|d| d * delta).collect();
        let a = qfi_surrogate_eval(&s, &theta).unwrap();
        let e = qfi_exact(&c, &theta).unwrap();
        (0..8)
            .flat_map(|m| (0..8).map(move |n| (m, n)))
            .map(|(m, n)| (a[(m, n)] - e[(m, n)]).abs())
            .fold(0.0, f64::max)
    };
    let (e1, e2) = (err(0.02), err(0.01));
    assert!(e1 > 0.0 && e2 < 0.7 * e1, "{e1} {e2}");
    assert!(qfi_surrogate_eval(&s, &[2.0; 8]).is_err());
}

#[test]
fn regularized_solve_examples() {
    let g = [0.3f64, -1.0, 2.0];
    let id = MetricTensor::identity(3);
    assert_eq!(regularized_natural_direction(&id, 0.0, &g).unwrap(), g.to_vec());
    let d = regularized_natural_direction(&id, 0.01, &g).unwrap();
    for (di, gi) in d.iter().zip(g) {
        assert!((di - gi / 1.01).abs() < 1e-15);
    }
    let zero = MetricTensor::from_matrix(DenseMatrix::zeros(3, 3)).unwrap();
    let d = regularized_natural_direction(&zero, 0.01, &g).unwrap();
    for (di, gi) in d.iter().zip(g) {
        assert!((di - 100.0 * gi).abs() < 1e-12);
    }
    assert!(matches!(
        regularized_natural_direction(&zero, 0.0, &g),
        Err(QadError::NotPositiveDefinite { .. })
    ));
    assert!(regularized_natural_direction(&id, 0.0, &g[..2]).is_err());
}

#[test]
fn regularized_solve_residual() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let c = random_circuit::<f64, _>(3, 10, &mut rng).unwrap();
    let f = qfi_exact(&c, &[0.0; 10]).unwrap();
    let g: Vec<f64> = (0..10).map(|_| rng.random_range(-1.0..1.0)).collect();
    let d = regularized_natural_direction(&f, 0.01, &g).unwrap();
    let r = f.matrix().mul_vec(&d);
    let res: f64 = r.iter().zip(&d).zip(&g).map(|((ri, di), gi)| (ri + 0.01 * di - gi).powi(2)).sum::<f64>().sqrt();
    let gn: f64 = g.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(res <= 1e-10 * gn);
}
