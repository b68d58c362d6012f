use proptest::prelude::*;
use qad::ansatz::{random_circuit, AnsatzCircuit};
use qad::descent::{precision_policy, NoiseSpec};
use qad::metric::qfi_exact;
use qad::pauli::{random_pauli_sum, PauliSum};
use qad::surrogate::{schedule_len, query_schedule, SurrogateModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(seed: u64, n: usize, nu: usize) -> (AnsatzCircuit<f64>, PauliSum<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = random_circuit(n, nu, &mut rng).unwrap();
    let h = random_pauli_sum(n, 2 * n, &mut rng);
    (c, h)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn model_is_exact_at_reference(seed in any::<u64>(), n in 1usize..4, nu in 1usize..8) {
        let (c, h) = instance(seed, n, nu);
        let m = SurrogateModel::from_circuit(&c, &h, None, 0, false).unwrap();
        let zero = vec![0.0; nu];
        prop_assert!((m.eval_energy(&zero).unwrap() - c.energy(&zero, &h).unwrap()).abs() < 1e-12);
        let g = c.parameter_shift_gradient(&zero, &h).unwrap();
        for (a, b) in m.eval_gradient(&zero).unwrap().iter().zip(&g) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fast_and_direct_gradients_agree(seed in any::<u64>(), nu in 1usize..8, scale in 0.0f64..1.4) {
        let (c, h) = instance(seed, 3, nu);
        let m = SurrogateModel::from_circuit(&c, &h, None, 0, false).unwrap();
        let theta: Vec<f64> = (0..nu).map(|k| scale * (((k * 7 + 3) % 11) as f64 / 11.0 - 0.5)).collect();
        let fast = m.eval_gradient(&theta).unwrap();
        let direct = m.eval_gradient_direct(&theta).unwrap();
        for (a, b) in fast.iter().zip(&direct) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn metric_is_symmetric_and_positive_semidefinite(seed in any::<u64>(), n in 1usize..4, nu in 1usize..7) {
        let (c, _) = instance(seed, n, nu);
        let theta = vec![0.1; nu];
        let f = qfi_exact(&c, &theta).unwrap();
        for i in 0..nu {
            for j in 0..nu {
                prop_assert_eq!(f[(i, j)], f[(j, i)]);
            }
        }
        prop_assert!(f.eigenvalues().iter().all(|&e| e > -1e-10));
    }

    #[test]
    fn schedule_points_are_distinct(nu in 1usize..12) {
        let s = query_schedule::<f64>(nu);
        prop_assert_eq!(s.len(), schedule_len(nu));
        let mut shifts: Vec<Vec<u64>> = s.iter().map(|q| q.shift().iter().map(|x| x.to_bits()).collect()).collect();
        shifts.sort();
        shifts.dedup();
        prop_assert_eq!(shifts.len(), schedule_len(nu));
    }

    #[test]
    fn precision_scales_with_gradient(g in 1e-3f64..10.0, nu in 1usize..100, p in 0.01f64..0.5) {
        let spec = NoiseSpec { relative_gradient_precision: p, ..NoiseSpec::with_seed(0) };
        let prec = precision_policy(g, nu, &spec).unwrap();
        let expected = p * g / (nu as f64).sqrt();
        prop_assert!((prec.coefficient_b - expected).abs() <= 1e-12 * expected);
        prop_assert!((prec.coefficient_other - p * g).abs() <= 1e-12 * p * g);
    }
}
