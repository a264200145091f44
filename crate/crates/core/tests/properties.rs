use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shotfrugal_core::estimators::{
    recursive_update, shots_for_recursive_df, shots_for_recursive_f, shots_for_sm_df,
    shots_for_sm_f, DriftBound, RecursiveModel,
};
use shotfrugal_core::optimizers::{sa_mse_target, ErrorPolicy, EstimatorKind, SaConfig};
use shotfrugal_core::sim::{exact_expectation, sample_term, shift_gradient};
use shotfrugal_core::{Circuit, DiagonalTerm, Estimate, Observable, Pauli, PauliString, RecursiveState};

const PAULIS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

fn random_pauli(n: usize, rng: &mut ChaCha8Rng) -> PauliString {
    loop {
        let p: Vec<Pauli> = (0..n).map(|_| PAULIS[rng.random_range(0..4)]).collect();
        if p.iter().any(|&q| q != Pauli::I) {
            return PauliString::new(p);
        }
    }
}

/// Random circuit of H, CNOT and Pauli rotations on `n` qubits with 3
/// parameters, some of them shared between gates.
fn random_circuit(seed: u64) -> (Circuit, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=4);
    let mut c = Circuit::new(n, 3).unwrap();
    for _ in 0..rng.random_range(1..20) {
        match rng.random_range(0..3) {
            0 => {
                c.h(rng.random_range(0..n)).unwrap();
            }
            1 if n > 1 => {
                let a = rng.random_range(0..n);
                let b = (a + rng.random_range(1..n)) % n;
                c.cnot(a, b).unwrap();
            }
            _ => {
                c.rotation(random_pauli(n, &mut rng), rng.random_range(0..3))
                    .unwrap();
            }
        }
    }
    let theta = (0..3).map(|_| rng.random_range(-4.0..4.0)).collect();
    (c, theta)
}

fn random_diagonal(n: usize, rng: &mut ChaCha8Rng) -> DiagonalTerm<f64> {
    let diag = (0..1usize << n).map(|_| rng.random_range(-3.0..3.0)).collect();
    DiagonalTerm::computational(n, diag).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn circuits_preserve_norm(seed in any::<u64>()) {
        let (c, theta) = random_circuit(seed);
        let psi = c.apply(&theta).unwrap();
        prop_assert!((psi.norm_sqr() - 1.0).abs() <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn shift_rule_matches_finite_differences(seed in any::<u64>()) {
        let (c, theta) = random_circuit(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let n = c.num_qubits();
        let obs = Observable::new(vec![
            random_diagonal(n, &mut rng),
            DiagonalTerm::pauli(&PauliString::on(n, &[0], Pauli::X).unwrap()).unwrap(),
        ])
        .unwrap();
        let h = 1e-5;
        for k in 0..3 {
            let mut plus = theta.clone();
            let mut minus = theta.clone();
            plus[k] += h;
            minus[k] -= h;
            let fd = (exact_expectation(&c, &plus, &obs).unwrap()
                - exact_expectation(&c, &minus, &obs).unwrap())
                / (2.0 * h);
            let g = shift_gradient(&c, &theta, &obs, k).unwrap();
            prop_assert!((g - fd).abs() <= 1e-6, "k={} {} vs {}", k, g, fd);
        }
    }

    #[test]
    fn samples_are_bounded_by_the_term_norm(seed in any::<u64>()) {
        let (c, theta) = random_circuit(seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let term = random_diagonal(c.num_qubits(), &mut rng);
        let xs = sample_term(&c, &theta, &term, 200, &mut rng).unwrap();
        prop_assert_eq!(xs.len(), 200);
        prop_assert!(xs.iter().all(|x| x.abs() <= term.norm()));
        prop_assert!(xs.iter().all(|x| term.diagonal().contains(x)));
    }

    #[test]
    fn estimates_keep_mse_consistent(
        value in -10.0f64..10.0,
        var in 0.0f64..5.0,
        bias in 0.0f64..2.0,
        shots in 0u64..10_000,
    ) {
        let e = Estimate::new(value, var, bias, shots);
        prop_assert_eq!(e.mse_bound(), bias * bias + var);
        prop_assert_eq!(e.shots_used(), shots);
    }

    #[test]
    fn recursive_plans_meet_targets_with_no_more_shots(
        seed in any::<u64>(),
        e in 1e-3f64..0.5,
        step in 0.0f64..0.5,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.random_range(1..4);
        let norms: Vec<f64> = (0..rng.random_range(1..5)).map(|_| rng.random_range(0.1..3.0)).collect();
        let model = RecursiveModel::new(norms.iter().sum(), DriftBound::Algorithm).unwrap();
        let s0 = RecursiveState::new(vec![0.0; m]);
        let fresh = |rng: &mut ChaCha8Rng| Estimate::unbiased(rng.random_range(-1.0..1.0), rng.random_range(1e-4..0.2), 10);
        let f0 = fresh(&mut rng);
        let g0: Vec<_> = (0..m).map(|_| Some(fresh(&mut rng))).collect();
        let s1 = recursive_update(&s0, &vec![0.0; m], Some(&f0), &g0, 0.0, &vec![0.0; m], &model)
            .unwrap()
            .state;
        let delta: Vec<f64> = (0..m).map(|_| rng.random_range(-step..=step)).collect();

        let vp = shots_for_recursive_f(e, &s1, &delta, &model, &norms).unwrap();
        prop_assert!(vp.mse() <= e * (1.0 + 1e-9));
        prop_assert!(vp.allocation.total() <= shots_for_sm_f(e, &norms).unwrap().total());
        for k in 0..m {
            let gp = shots_for_recursive_df(e, &s1, &delta, &model, &norms, k).unwrap();
            prop_assert!(gp.mse() <= e * (1.0 + 1e-9));
            prop_assert!(gp.allocation.total() <= shots_for_sm_df(e, &norms).unwrap().total());
        }
    }

    /// Above the crossover temperature `√(2E)/η` the error-aware target is
    /// looser than a fixed `E`, so the fixed policy never asks for fewer
    /// shots; below it the order flips.
    #[test]
    fn fixed_and_error_aware_targets_cross_once(
        e in 1e-4f64..0.3,
        eta in 0.05f64..2.0,
        ratio in 0.05f64..20.0,
    ) {
        let crossover = (2.0 * e).sqrt() / eta;
        let t = crossover * ratio;
        let aware = sa_mse_target(eta, t);
        let fixed_shots = shots_for_sm_f(e, &[1.0]).unwrap().total();
        let aware_shots = shots_for_sm_f(aware, &[1.0]).unwrap().total();
        if ratio > 1.0 {
            prop_assert!(fixed_shots >= aware_shots);
        } else {
            prop_assert!(fixed_shots <= aware_shots);
        }
    }
}

#[test]
fn sa_config_rejects_recursive_estimator() {
    let c = SaConfig {
        t0: 1.0,
        cooling: 0.9,
        proposal_sigma: 0.5,
        eta: 0.2,
        shot_budget: 100,
        policy: ErrorPolicy::<f64>::ErrorAware,
        estimator: EstimatorKind::Recursive,
        refresh_incumbent: false,
        max_iters: None,
    };
    assert!(c.validate().is_err());
}
