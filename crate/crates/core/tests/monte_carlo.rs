//! Statistical checks of the sample-mean estimator on the one-qubit cosine
//! problem, whose exact value `cos θ` and derivative `−sin θ` are known in
//! closed form.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use shotfrugal_core::benchmarks::make_cosine_problem;
use shotfrugal_core::estimators::{confidence_interval, shots_for_sm_df, shots_for_sm_f};
use shotfrugal_core::optimizers::Device;
use shotfrugal_core::sim::sample_term;
use shotfrugal_core::Estimate64;

fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

fn value_estimates(theta: f64, e: f64, reps: usize, seed: u64) -> Vec<Estimate64> {
    let p = make_cosine_problem::<f64>();
    let mut dev = Device::new(&p);
    let alloc = shots_for_sm_f(e, &dev.term_norms()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..reps)
        .map(|_| dev.estimate_value(&[theta], &alloc, &mut rng).unwrap().unwrap())
        .collect()
}

#[test]
fn raw_samples_are_unbiased_with_bounded_variance() {
    let p = make_cosine_problem::<f64>();
    let term = &p.observable.terms()[0];
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for theta in [0.0, 0.7, 1.9, 3.0] {
        let xs = sample_term(&p.circuit, &[theta], term, 100_000, &mut rng).unwrap();
        let (m, se) = mean_and_se(&xs);
        let exact = f64::cos(theta);
        assert!((m - exact).abs() <= 5.0 * se.max(1e-12), "θ={theta}: {m} vs {exact}");
        let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / xs.len() as f64;
        assert!(var <= term.norm().powi(2));
    }
}

#[test]
fn sample_mean_mse_stays_under_target() {
    let e = 0.01;
    for i in 0..10 {
        let theta = -3.0 + 0.6 * i as f64;
        let sq: Vec<f64> = value_estimates(theta, e, 2000, 100 + i)
            .iter()
            .map(|est| (est.value() - theta.cos()).powi(2))
            .collect();
        let (mse, se) = mean_and_se(&sq);
        assert!(mse <= e + 3.0 * se, "θ={theta}: mse {mse} (±{se})");
    }
}

#[test]
fn confidence_intervals_cover() {
    let theta = 1.1;
    let ests = value_estimates(theta, 0.02, 4000, 7);
    for kappa in [1.0, 2.0, 3.0] {
        let misses = ests
            .iter()
            .filter(|est| {
                (est.value() - theta.cos()).abs() > confidence_interval(*est, kappa).radius
            })
            .count();
        let rate = misses as f64 / ests.len() as f64;
        let tail = 2.0 * f64::exp(-kappa * kappa / 2.0);
        assert!(rate <= tail, "κ={kappa}: {rate} > {tail}");
    }
}

#[test]
fn value_and_gradient_estimates_are_unbiased() {
    let p = make_cosine_problem::<f64>();
    let mut dev = Device::new(&p);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let theta = 0.9;
    let va = shots_for_sm_f(0.05, &dev.term_norms()).unwrap();
    let ga = shots_for_sm_df(0.05, &dev.shift_norms(0)).unwrap();
    let mut vals = Vec::new();
    let mut grads = Vec::new();
    for _ in 0..3000 {
        vals.push(dev.estimate_value(&[theta], &va, &mut rng).unwrap().unwrap().value());
        grads.push(
            dev.estimate_gradient(&[theta], 0, &ga, &mut rng)
                .unwrap()
                .unwrap()
                .value(),
        );
    }
    let (m, se) = mean_and_se(&vals);
    assert!((m - theta.cos()).abs() <= 5.0 * se);
    let (m, se) = mean_and_se(&grads);
    assert!((m + theta.sin()).abs() <= 5.0 * se);
}

#[test]
fn single_precision_path_agrees() {
    let p32 = make_cosine_problem::<f32>();
    let dev = Device::new(&p32);
    for i in 0..20 {
        let theta = -3.0f32 + 0.3 * i as f32;
        let f = dev.exact_value(&[theta]).unwrap();
        let g = dev.exact_gradient(&[theta]).unwrap()[0];
        assert!((f - theta.cos()).abs() < 1e-5);
        assert!((g + theta.sin()).abs() < 1e-5);
    }
    let mut dev = Device::new(&p32);
    let alloc = shots_for_sm_f(0.01f32, &dev.term_norms()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let est = dev.estimate_value(&[0.5f32], &alloc, &mut rng).unwrap().unwrap();
    assert_eq!(est.variance_bound(), alloc.epsilon);
    assert!((est.value() - 0.5f32.cos()).abs() < 0.5);
}
