//! Squared-return moments under asymmetry against long simulations.

use gjr_cogarch::model::{return_moments_with, MomentForm};
use gjr_cogarch::sim::simulate;
use gjr_cogarch::{LevySpec, ParamSet, Sigma2Init};

const N: usize = 1_000_000;

fn sample_stats(y: &[f64]) -> (f64, f64) {
    let n = y.len() as f64;
    let sq: Vec<f64> = y.iter().map(|v| v * v).collect();
    let m = sq.iter().sum::<f64>() / n;
    let var = sq.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let cov1 = sq.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum::<f64>() / n;
    (var, cov1)
}

#[test]
fn generator_form_tracks_simulation_under_leverage() {
    // Strong mean reversion keeps the eighth moment finite, so sample
    // variances of squared returns settle quickly.
    let params = ParamSet::new(0.04, 0.2, 0.05, 0.6).unwrap();
    let levy = LevySpec::standard();
    let path = simulate(&params, &levy, N as f64, Sigma2Init::Stationary, 4_417).unwrap();
    let y = path.equidistant_returns(1.0).unwrap().returns().to_vec();
    let (var, cov1) = sample_stats(&y);

    let printed = return_moments_with(&params, &levy, 1.0, MomentForm::Printed).unwrap();
    let generator = return_moments_with(&params, &levy, 1.0, MomentForm::Generator).unwrap();
    let rel = |a: f64, b: f64| (a / b - 1.0).abs();

    assert!(rel(var, generator.var_sq().unwrap()) < 0.04, "var {var} vs {}", generator.var_sq().unwrap());
    assert!(rel(var, printed.var_sq().unwrap()) > 0.08, "var {var} vs {}", printed.var_sq().unwrap());
    assert!(rel(cov1, generator.cov_sq(1.0).unwrap()) < 0.2, "cov {cov1} vs {}", generator.cov_sq(1.0).unwrap());
    assert!(rel(cov1, printed.cov_sq(1.0).unwrap()) > 0.4, "cov {cov1} vs {}", printed.cov_sq(1.0).unwrap());
}
