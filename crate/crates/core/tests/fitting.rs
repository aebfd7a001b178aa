use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use sarrus_core::elastic::{fit_gaussian, fit_mooney, ElasticModel, ForceStretchSample};
use sarrus_core::io::read_force_stretch_csv;
use sarrus_core::Error;

const AREA: f64 = 7e-6;
const L0: f64 = 0.085;

fn noisy(model: &ElasticModel, sigma: f64, seed: u64) -> Vec<ForceStretchSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).unwrap();
    (0..30)
        .map(|i| {
            let lambda = 1.1 + 1.5 * i as f64 / 29.0;
            let f = model.force(lambda).unwrap() + noise.sample(&mut rng);
            ForceStretchSample::new(lambda, f.max(0.0)).unwrap()
        })
        .collect()
}

#[test]
fn mooney_fit_on_noisy_grid() {
    let truth = ElasticModel::demonstrator();
    for seed in 0..5 {
        let fit = fit_mooney(&noisy(&truth, 0.03, seed), AREA, L0).unwrap();
        assert!((fit.quality.rmse - 0.03).abs() < 0.01, "rmse {}", fit.quality.rmse);
        assert!(fit.quality.r_squared >= 0.99);
        assert!((fit.c1 - 68.88e3).abs() / 68.88e3 < 0.1);
    }
}

#[test]
fn gaussian_fit_on_noisy_grid() {
    let truth = ElasticModel::demonstrator_gaussian();
    for seed in 0..5 {
        let fit = fit_gaussian(&noisy(&truth, 0.18, seed), 296.0).unwrap();
        assert!((fit.quality.rmse - 0.18).abs() < 0.05, "rmse {}", fit.quality.rmse);
        assert!((fit.c0 - 47.94e-4).abs() / 47.94e-4 < 0.05);
    }
}

#[test]
fn gaussian_single_sample() {
    let s = ForceStretchSample::new(2.0, 2.4833).unwrap();
    let fit = fit_gaussian(&[s], 296.0).unwrap();
    assert!((fit.c0 - 47.94e-4).abs() < 1e-7);
}

#[test]
fn degenerate_designs() {
    let s = ForceStretchSample::new(1.5, 1.0).unwrap();
    assert!(matches!(fit_mooney(&[s, s], AREA, L0), Err(Error::RankDeficient(_))));
    let slack = ForceStretchSample::new(1.0, 0.0).unwrap();
    assert_eq!(fit_gaussian(&[slack], 296.0).unwrap_err(), Error::AllSlack);
}

#[test]
fn csv_to_fit() {
    let truth = ElasticModel::demonstrator();
    let mut text = String::from("lambda,force_N\n");
    for l in [1.2, 1.6, 2.0, 2.4] {
        text += &format!("{l},{}\n", truth.force(l).unwrap());
    }
    let data = read_force_stretch_csv(text.as_bytes()).unwrap();
    let fit = fit_mooney(&data, AREA, L0).unwrap();
    assert!((fit.c2 - 73.61e3).abs() / 73.61e3 < 1e-9);
}
