use super::*;
use rand::Rng;
use crate::ansatz::random_circuit;
use crate::pauli::{parse_pauli_sum, random_pauli_sum, PauliString};
use proptest::prelude::*;
use std::collections::HashSet;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

fn rx(theta_ref: f64) -> (AnsatzCircuit<f64>, PauliSum<f64>) {
    let c = AnsatzCircuit::new(1, vec!["X".parse::<PauliString>().unwrap()], vec![theta_ref]).unwrap();
    (c, parse_pauli_sum("1 Z").unwrap())
}

fn random_model(nu: usize, seed: u64) -> SurrogateModel<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize| -> Vec<f64> { (0..n).map(|_| rng.random_range(-1.0..1.0)).collect() };
    let npairs = nu * (nu - 1) / 2;
    let e_a = draw(1)[0];
    let e_b = draw(nu);
    let e_c = draw(nu);
    let e_d = draw(npairs);
    let var_b = draw(nu).iter().map(|x| x * x).collect();
    let var_c = draw(nu).iter().map(|x| x * x).collect();
    let var_d = draw(npairs).iter().map(|x| x * x).collect();
    SurrogateModel {
        theta0: vec![0.0; nu],
        e_a,
        e_b,
        e_c,
        e_d,
        var_a: 0.3,
        var_b,
        var_c,
        var_d,
    }
}

fn random_setup(n: usize, nu: usize, seed: u64) -> (AnsatzCircuit<f64>, PauliSum<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = random_circuit(n, nu, &mut rng).unwrap();
    let h = random_pauli_sum(n, 6, &mut rng);
    (c, h)
}

#[test]
fn schedule_sizes() {
    assert_eq!(query_schedule::<f64>(1).len(), 4);
    assert_eq!(query_schedule::<f64>(2).len(), 11);
    assert_eq!(query_schedule::<f64>(10).len(), 211);
    assert_eq!(query_schedule::<f64>(84).len(), 14_197);
    assert_eq!(schedule_len(84), 2 * 84 * 84 + 84 + 1);
}

#[test]
fn schedule_points_are_distinct_and_sparse() {
    let nu = 7;
    let pts = query_schedule::<f64>(nu);
    let mut seen = HashSet::new();
    for p in &pts {
        let v = p.shift();
        let nz: Vec<f64> = v.iter().copied().filter(|x| *x != 0.0).collect();
        assert!(nz.len() <= 2);
        assert!(nz.iter().all(|x| *x == FRAC_PI_2 || *x == -FRAC_PI_2 || *x == PI));
        let key: Vec<u64> = v.iter().map(|x| x.to_bits()).collect();
        assert!(seen.insert(key), "duplicate point {v:?}");
    }
}

#[test]
fn single_rx_coefficients() {
    let (c, h) = rx(0.0);
    let m = SurrogateModel::from_circuit(&c, &h, None, 0, false).unwrap();
    assert!((m.e_a - 1.0).abs() < 1e-15);
    assert!(m.e_b[0].abs() < 1e-15);
    assert!((m.e_c[0] + 1.0).abs() < 1e-15);
    assert_eq!(m.var_a, 0.0);
    assert_eq!(m.var_b, vec![0.0]);

    let (c, h) = rx(FRAC_PI_4);
    let m = SurrogateModel::from_circuit(&c, &h, None, 0, false).unwrap();
    assert!((m.e_b[0] + 2f64.sqrt()).abs() < 1e-14);
    let g = m.eval_gradient(&[0.0]).unwrap();
    assert!((g[0] + FRAC_PI_4.sin()).abs() < 1e-14);
}

#[test]
fn single_rx_model_is_exact() {
    let (c, h) = rx(0.7);
    let m = SurrogateModel::from_circuit(&c, &h, None, 0, false).unwrap();
    for i in 0..20 {
        let t = -3.0 + 0.3 * i as f64;
        assert!((m.eval_energy(&[t]).unwrap() - (0.7 + t).cos()).abs() < 1e-14);
        let g = m.eval_gradient_direct(&[t]).unwrap();
        assert!((g[0] + (0.7 + t).sin()).abs() < 1e-14);
        if t.abs() < FRAC_PI_2 {
            let g = m.eval_gradient(&[t]).unwrap();
            assert!((g[0] + (0.7 + t).sin()).abs() < 1e-14);
        }
    }
}

#[test]
fn origin_reproduces_coefficients() {
    let m = random_model(6, 3);
    assert_eq!(m.eval_energy(&[0.0; 6]).unwrap(), m.e_a);
    let g = m.eval_gradient(&[0.0; 6]).unwrap();
    for (gi, bi) in g.iter().zip(&m.e_b) {
        assert_eq!(*gi, bi * 0.5);
    }
    let v = m.gradient_variance(&[0.0; 6]).unwrap();
    for (vi, bi) in v.iter().zip(&m.var_b) {
        assert!((vi - bi / 4.0).abs() < 1e-16);
    }
}

#[test]
fn gradient_at_origin_equals_parameter_shift() {
    let (c, h) = random_setup(3, 8, 11);
    let m = SurrogateModel::from_circuit(&c, &h, None, 0, true).unwrap();
    let g = m.eval_gradient(&vec![0.0; 8]).unwrap();
    let ps = c.parameter_shift_gradient(&vec![0.0; 8], &h).unwrap();
    assert_eq!(g, ps);
}

#[test]
fn single_axis_slice_matches_simulator() {
    let (c, h) = random_setup(3, 9, 5);
    let m = SurrogateModel::from_circuit(&c, &h, None, 0, true).unwrap();
    for k in [0, 4, 8] {
        for i in 0..20 {
            let t = -PI + 0.31 * i as f64;
            let mut theta = vec![0.0; 9];
            theta[k] = t;
            let want = c.energy(&theta, &h).unwrap();
            assert!((m.eval_energy(&theta).unwrap() - want).abs() < 1e-12);
        }
    }
}

#[test]
fn exact_at_single_axis_schedule_points() {
    let (c, h) = random_setup(3, 7, 8);
    let m = SurrogateModel::from_circuit(&c, &h, None, 0, true).unwrap();
    for q in query_schedule::<f64>(7).iter().filter(|q| q.entries.len() <= 1) {
        let s = q.shift();
        assert!((m.eval_energy(&s).unwrap() - c.energy(&s, &h).unwrap()).abs() < 1e-12);
    }
}

// At a two-axis point every axis has a = |b| = c = 1/2, so the dropped
// b-c, c-b and c-c products of the pair survive with weight 1/4.
#[test]
fn two_axis_points_differ_by_dropped_pair_terms() {
    let (c, h) = random_setup(3, 5, 9);
    let m = SurrogateModel::from_circuit(&c, &h, None, 0, true).unwrap();
    let e = |k: usize, tk: f64, l: usize, tl: f64| {
        let mut s = vec![0.0; 5];
        s[k] = tk;
        s[l] = tl;
        c.energy(&s, &h).unwrap()
    };
    for q in query_schedule::<f64>(5).iter().filter(|q| q.entries.len() == 2) {
        let (k, sk) = q.entries[0];
        let (l, sl) = q.entries[1];
        let e_bc = e(k, FRAC_PI_2, l, PI) - e(k, -FRAC_PI_2, l, PI);
        let e_cb = e(k, PI, l, FRAC_PI_2) - e(k, PI, l, -FRAC_PI_2);
        let e_cc = e(k, PI, l, PI);
        let dropped = 0.25 * (sk.signum() * e_bc + sl.signum() * e_cb + e_cc);
        let s = q.shift();
        let defect = c.energy(&s, &h).unwrap() - m.eval_energy(&s).unwrap();
        assert!((defect - dropped).abs() < 1e-12);
    }
}

#[test]
fn fast_gradient_matches_finite_differences() {
    let m = random_model(9, 21);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let theta: Vec<f64> = (0..9).map(|_| rng.random_range(-0.2..0.2)).collect();
    let g = m.eval_gradient(&theta).unwrap();
    let eps = 1e-5;
    for k in 0..9 {
        let mut p = theta.clone();
        p[k] += eps;
        let mut q = theta.clone();
        q[k] -= eps;
        let fd = (m.eval_energy(&p).unwrap() - m.eval_energy(&q).unwrap()) / (2.0 * eps);
        assert!((fd - g[k]).abs() <= 1e-7 * g[k].abs().max(1.0));
    }
}

#[test]
fn trust_region_is_enforced() {
    let m = random_model(3, 2);
    let err = m.eval_gradient(&[0.1, FRAC_PI_2, 0.0]).unwrap_err();
    assert!(matches!(err, QadError::TrustRegion { index: 1, .. }));
    assert!(m.eval_gradient_direct(&[0.1, FRAC_PI_2, 0.0]).is_ok());
    assert!(matches!(
        m.eval_energy(&[0.0; 2]),
        Err(QadError::DimensionMismatch { expected: 3, found: 2 })
    ));
}

#[test]
fn variance_slow_path_covers_boundary() {
    let m = random_model(4, 9);
    let theta = [0.3, -0.2, 0.1, 0.4];
    let fast = m.gradient_variance_by_class(&theta).unwrap();
    let slow = m.gradient_variance_direct(&theta).unwrap();
    for (f, s) in fast.iter().zip(&slow) {
        assert!((f.a - s.a).abs() < 1e-14);
        assert!((f.b - s.b).abs() < 1e-14);
        assert!((f.c - s.c).abs() < 1e-14);
        assert!((f.d - s.d).abs() < 1e-14);
    }
    assert!(m.gradient_variance(&[PI, 0.0, 0.0, 0.0]).unwrap().iter().all(|v| v.is_finite()));
}

#[test]
fn noiseless_variance_is_zero() {
    let (c, h) = random_setup(2, 4, 1);
    let m = SurrogateModel::from_circuit(&c, &h, None, 0, false).unwrap();
    assert!(m.gradient_variance(&[0.1, -0.1, 0.05, 0.0]).unwrap().iter().all(|v| *v == 0.0));
}

#[test]
fn hessian_of_single_rx() {
    let (c, h) = rx(0.0);
    let m = SurrogateModel::from_circuit(&c, &h, None, 0, false).unwrap();
    let (g, hess) = m.extract_gradient_hessian();
    assert!(g[0].abs() < 1e-15);
    assert!((hess[(0, 0)] + 1.0).abs() < 1e-15);
}

#[test]
fn hessian_is_symmetric() {
    let m = random_model(5, 8);
    let (_, hess) = m.extract_gradient_hessian();
    assert_eq!(hess.max_asymmetry(), 0.0);
    assert_eq!(hess[(1, 3)], m.e_d(1, 3) / 4.0);
}

#[test]
fn symmetry_report_with_zero_b() {
    let mut m = random_model(6, 12);
    m.e_b = vec![0.0; 6];
    m.var_b = vec![0.0; 6];
    let r = m.symmetry_report(200, 0.3, 1, 1e-8).unwrap();
    assert!(r.max_asymmetry < 1e-12);
    let mut m = random_model(6, 12);
    m.var_b = vec![0.0; 6];
    assert!(m.symmetry_report(10, 0.1, 1, 1e-8).is_err());
}

#[test]
fn noise_is_independent_of_dispatch() {
    let (c, h) = random_setup(3, 6, 4);
    let noise = QueryNoise::uniform(0.01);
    let a = SurrogateModel::from_circuit(&c, &h, Some(&noise), 77, true).unwrap();
    let b = SurrogateModel::from_circuit(&c, &h, Some(&noise), 77, false).unwrap();
    assert_eq!(a, b);
    let other = SurrogateModel::from_circuit(&c, &h, Some(&noise), 78, true).unwrap();
    assert_ne!(a.e_a, other.e_a);
    assert!((a.var_b[0] - 2e-4).abs() < 1e-18);
    assert!((a.var_d(0, 1) - 4e-4).abs() < 1e-18);
}

#[test]
fn oracle_failure_names_the_point() {
    let schedule = query_schedule::<f64>(2);
    let err = estimate_coefficients(
        |s: &[f64]| {
            if s[1] == PI {
                Err(QadError::InvalidArgument("boom".into()))
            } else {
                Ok(0.0)
            }
        },
        &schedule,
        vec![0.0; 2],
        None,
        0,
        false,
    )
    .unwrap_err();
    match err {
        QadError::Query { shift, .. } => assert_eq!(shift, vec![0.0, PI]),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn model_round_trips_through_json() {
    let m = random_model(4, 30);
    let text = serde_json::to_string(&m).unwrap();
    let back: SurrogateModel<f64> = serde_json::from_str(&text).unwrap();
    assert_eq!(back, m);
}

#[test]
fn brute_force_matches_simulator() {
    let (c, h) = random_setup(2, 4, 6);
    let bf = BruteForceExpansion::new(&c, &h).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let theta: Vec<f64> = (0..4).map(|_| rng.random_range(-PI..PI)).collect();
        assert!((bf.energy(&theta).unwrap() - c.energy(&theta, &h).unwrap()).abs() < 1e-12);
    }
    let (big, h) = random_setup(2, 9, 6);
    assert!(BruteForceExpansion::new(&big, &h).is_err());
}

#[test]
fn f32_model_builds() {
    let c = AnsatzCircuit::<f32>::new(1, vec!["Y".parse().unwrap()], vec![0.2]).unwrap();
    let h: PauliSum<f32> = parse_pauli_sum("1 Z").unwrap();
    let m = SurrogateModel::from_circuit(&c, &h, None, 0, true).unwrap();
    assert!((m.eval_energy(&[0.3]).unwrap() - 0.5f32.cos()).abs() < 1e-6);
}

proptest! {
    #[test]
    fn fast_and_direct_gradients_agree(seed in any::<u64>(), nu in 2usize..8, scale in 0.0f64..1.5) {
        let m = random_model(nu, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
        let theta: Vec<f64> = (0..nu).map(|_| scale * rng.random_range(-1.0..1.0)).collect();
        let fast = m.eval_gradient(&theta).unwrap();
        let slow = m.eval_gradient_direct(&theta).unwrap();
        for (f, s) in fast.iter().zip(&slow) {
            prop_assert!((f - s).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_index_is_a_bijection(nu in 2usize..40) {
        let mut expected = 0;
        for k in 0..nu {
            for l in k + 1..nu {
                prop_assert_eq!(pair_index(nu, k, l), expected);
                expected += 1;
            }
        }
    }
}
