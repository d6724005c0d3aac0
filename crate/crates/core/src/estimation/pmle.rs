//! Pseudo maximum likelihood on possibly irregularly spaced returns.
//!
//! Returns are treated as conditionally Gaussian with variance `ρᵢ²`, the
//! model-implied conditional variance given a GJR-GARCH type volatility proxy
//! `σ²_{tᵢ}` driven by the observed returns.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimation::optimize::{minimize, NelderMeadOptions};
use crate::first_jump::InnovationPairing;
use crate::model::{h, ParamSet};
use crate::series::ReturnSeries;

/// Conditional variance formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RhoForm {
    /// `ρᵢ² = (σ² − m)(e^{pΔt} − 1)/p + mΔt`
    #[default]
    AsPrinted,
    /// `ρᵢ² = (σ² − m)(1 − e^{−pΔt})/p + mΔt`, the integral of the decaying
    /// conditional mean of `σ²`.
    ExactDecay,
}

#[derive(Debug, Clone)]
pub struct PmleOptions {
    /// Whether `σ²_{tᵢ}` uses `Yᵢ` or `Yᵢ₋₁`.
    pub pairing: InnovationPairing,
    pub rho_form: RhoForm,
    /// `ρᵢ²` is floored at `floor_scale · mean(Yᵢ²)`.
    pub floor_scale: f64,
    /// Profile out the asymmetry: estimate with `γ = 0`.
    pub fix_gamma_zero: bool,
    /// Number of optimizer starts (the first is the supplied initial value).
    pub starts: usize,
    pub optimizer: NelderMeadOptions,
}

impl Default for PmleOptions {
    fn default() -> Self {
        Self {
            pairing: InnovationPairing::Contemporaneous,
            rho_form: RhoForm::AsPrinted,
            floor_scale: 1e-12,
            fix_gamma_zero: false,
            starts: 1,
            optimizer: NelderMeadOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarianceRecursion {
    /// `ρᵢ²` for `i = 1..=N`.
    pub rho2: Vec<f64>,
    /// `σ²_{tᵢ}` for `i = 0..=N`.
    pub sigma2: Vec<f64>,
    /// Cells where `ρᵢ²` hit the positivity floor.
    pub floored: usize,
}

/// `η − φ(1 + γ²) = −Ψ(1)`, required positive.
fn mean_reversion(params: &ParamSet) -> Result<f64> {
    let p = params.eta() - params.phi() * params.gamma_tilde();
    if p > 0.0 {
        Ok(p)
    } else {
        Err(Error::InvalidParameters(format!(
            "pseudo likelihood needs eta - phi(1+gamma^2) > 0, got {p}"
        )))
    }
}

fn floor_value(series: &ReturnSeries, scale: f64) -> f64 {
    let mean_sq = series.returns().iter().map(|y| y * y).sum::<f64>() / series.len().max(1) as f64;
    (scale * mean_sq).max(f64::MIN_POSITIVE)
}

/// Streams `(ρᵢ², σ²_{tᵢ})` through `visit`; returns the floored-cell count.
fn scan(
    series: &ReturnSeries,
    params: &ParamSet,
    opts: &PmleOptions,
    mut visit: impl FnMut(usize, f64, f64),
) -> Result<usize> {
    let p = mean_reversion(params)?;
    let (theta, eta, phi, gamma) = (params.theta(), params.eta(), params.phi(), params.gamma());
    let mean = theta / p;
    let floor = floor_value(series, opts.floor_scale);
    let returns = series.returns();
    let mut sigma2 = mean;
    let mut floored = 0;
    for (i, (dt, &y)) in series.increments().zip(returns).enumerate() {
        let growth = match opts.rho_form {
            RhoForm::AsPrinted => (p * dt).exp_m1() / p,
            RhoForm::ExactDecay => -(-p * dt).exp_m1() / p,
        };
        let mut rho2 = (sigma2 - mean) * growth + mean * dt;
        if !(rho2 >= floor) {
            rho2 = floor;
            floored += 1;
        }
        let shock = match opts.pairing {
            InnovationPairing::Contemporaneous => y,
            InnovationPairing::Lagged => {
                if i == 0 {
                    0.0
                } else {
                    returns[i - 1]
                }
            }
        };
        let decay = (-eta * dt).exp();
        sigma2 = theta * dt + decay * sigma2 + phi * decay * h(shock, gamma);
        visit(i, rho2, sigma2);
    }
    Ok(floored)
}

/// Conditional variances `ρᵢ²` and the volatility proxy, started from the
/// stationary mean `θ/(η − φ(1 + γ²))`.
pub fn pmle_variance_recursion(series: &ReturnSeries, params: &ParamSet, opts: &PmleOptions) -> Result<VarianceRecursion> {
    let n = series.len();
    let mut rho2 = Vec::with_capacity(n);
    let mut sigma2 = Vec::with_capacity(n + 1);
    sigma2.push(params.theta() / mean_reversion(params)?);
    let floored = scan(series, params, opts, |_, r, s| {
        rho2.push(r);
        sigma2.push(s);
    })?;
    Ok(VarianceRecursion { rho2, sigma2, floored })
}

/// Gaussian pseudo log-likelihood
/// `L_N = −½ Σ log ρᵢ² − (N/2) log 2π − ½ Σ Yᵢ²/ρᵢ²`.
pub fn pmle_objective(series: &ReturnSeries, params: &ParamSet, opts: &PmleOptions) -> Result<f64> {
    let returns = series.returns();
    let mut sum = 0.0;
    scan(series, params, opts, |i, rho2, _| {
        sum += rho2.ln() + returns[i] * returns[i] / rho2;
    })?;
    Ok(-0.5 * sum - 0.5 * series.len() as f64 * (2.0 * std::f64::consts::PI).ln())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmleFit {
    pub params: ParamSet,
    pub loglik: f64,
    pub iterations: usize,
    pub converged: bool,
    pub floored: usize,
    /// Initial value after the stationarity fallback.
    pub start: ParamSet,
}

/// Unconstrained coordinates `(log θ, log φ, logit γ, log(η − φ(1+γ²)))`.
struct Transform {
    fix_gamma_zero: bool,
}

const GAMMA_CLAMP: f64 = 1e-4;

impl Transform {
    fn to_free(&self, p: &ParamSet) -> Vec<f64> {
        let reversion = p.eta() - p.phi() * p.gamma_tilde();
        let mut x = vec![p.theta().ln(), p.phi().ln(), reversion.ln()];
        if !self.fix_gamma_zero {
            let g = p.gamma().clamp(GAMMA_CLAMP, 1.0 - GAMMA_CLAMP);
            x.push((g / (1.0 - g)).ln());
        }
        x
    }

    fn from_free(&self, x: &[f64]) -> Option<ParamSet> {
        let theta = x[0].exp();
        let phi = x[1].exp();
        let gamma = if self.fix_gamma_zero { 0.0 } else { 1.0 / (1.0 + (-x[3]).exp()) };
        let eta = x[2].exp() + phi * (1.0 + gamma * gamma);
        ParamSet::new(theta, eta, phi, gamma).ok()
    }
}

/// Shrinks `φ` until `η − φ(1 + γ²) > 0`.
fn stationary_start(init: &ParamSet) -> ParamSet {
    let mut p = *init;
    while p.eta() - p.phi() * p.gamma_tilde() <= 0.0 {
        p = ParamSet::new_unchecked(p.theta(), p.eta(), p.phi() * 0.5, p.gamma());
    }
    p
}

/// Maximizes the pseudo likelihood from `init`.
pub fn pmle_fit(series: &ReturnSeries, init: &ParamSet, opts: &PmleOptions) -> Result<PmleFit> {
    if series.len() < 2 {
        return Err(Error::InvalidArgument("need at least two returns".into()));
    }
    let start = stationary_start(&if opts.fix_gamma_zero { init.with_gamma(0.0) } else { *init });
    let transform = Transform { fix_gamma_zero: opts.fix_gamma_zero };
    let n = series.len() as f64;
    let objective = |x: &[f64]| match transform.from_free(x) {
        Some(p) => pmle_objective(series, &p, opts).map_or(f64::INFINITY, |l| -l / n),
        None => f64::INFINITY,
    };
    let x0 = transform.to_free(&start);
    let starts: Vec<Vec<f64>> = (0..opts.starts.max(1))
        .map(|k| {
            // Deterministic spread of alternative starting points.
            x0.iter()
                .enumerate()
                .map(|(j, v)| if k == 0 { *v } else { v + 0.5 * ((k * (j + 1)) as f64).sin() })
                .collect()
        })
        .collect();
    let results: Vec<_> = starts
        .par_iter()
        .map(|x| minimize(objective, x, &opts.optimizer))
        .collect();
    let best = results
        .into_iter()
        .min_by(|a, b| a.value.total_cmp(&b.value))
        .expect("at least one start");
    let params = transform.from_free(&best.x).ok_or_else(|| {
        Error::InvalidParameters("optimizer left the admissible region".into())
    })?;
    let loglik = pmle_objective(series, &params, opts)?;
    let floored = scan(series, &params, opts, |_, _, _| {})?;
    Ok(PmleFit {
        params,
        loglik,
        iterations: best.iterations,
        converged: best.converged,
        floored,
        start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ParamSet {
        ParamSet::new(0.04, 0.053, 0.04, 0.3).unwrap()
    }

    #[test]
    fn first_conditional_variance_at_stationary_start() {
        let p = params();
        let series = ReturnSeries::new(vec![0.0, 0.7, 1.0], vec![0.5, -0.2]).unwrap();
        let rec = pmle_variance_recursion(&series, &p, &PmleOptions::default()).unwrap();
        let mean = 0.04 / (0.053 - 0.04 * 1.09);
        assert_eq!(rec.sigma2[0], mean);
        assert!((rec.rho2[0] - mean * 0.7).abs() < 1e-14 * mean);
    }

    #[test]
    fn zero_returns_decay_to_fixed_point() {
        let p = params();
        let series = ReturnSeries::equidistant(vec![0.0; 2000], 1.0).unwrap();
        let rec = pmle_variance_recursion(&series, &p, &PmleOptions::default()).unwrap();
        let fixed = p.theta() / (1.0 - (-p.eta()).exp());
        assert!((rec.sigma2[2000] - fixed).abs() < 1e-6 * fixed);
        assert!(rec.rho2.iter().all(|&r| r > 0.0));
        assert_eq!(rec.floored, 0);
    }

    #[test]
    fn single_observation_likelihood() {
        // θ/(η−φγ̃)·Δt = 1 with Y = 0 gives −½ log 2π.
        let p = ParamSet::new(0.05, 0.2, 0.1, 0.0).unwrap();
        let series = ReturnSeries::new(vec![0.0, 2.0], vec![0.0]).unwrap();
        let l = pmle_objective(&series, &p, &PmleOptions::default()).unwrap();
        assert!((l + 0.5 * (2.0 * std::f64::consts::PI).ln()).abs() < 1e-14);
    }

    #[test]
    fn nonstationary_parameters_are_rejected() {
        let p = ParamSet::new(0.04, 0.04, 0.04, 0.3).unwrap();
        let series = ReturnSeries::equidistant(vec![0.1, 0.2], 1.0).unwrap();
        assert!(matches!(
            pmle_variance_recursion(&series, &p, &PmleOptions::default()),
            Err(Error::InvalidParameters(_))
        ));
    }

    #[test]
    fn objective_is_deterministic() {
        let series = ReturnSeries::equidistant((0..500).map(|i| (i as f64 * 0.37).sin()).collect(), 1.0).unwrap();
        let a = pmle_objective(&series, &params(), &PmleOptions::default()).unwrap();
        let b = pmle_objective(&series, &params(), &PmleOptions::default()).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn rho_forms_and_pairings_differ_as_expected() {
        let series = ReturnSeries::equidistant(vec![2.0, -1.0, 0.5], 1.0).unwrap();
        let exact = PmleOptions { rho_form: RhoForm::ExactDecay, ..Default::default() };
        let a = pmle_variance_recursion(&series, &params(), &PmleOptions::default()).unwrap();
        let b = pmle_variance_recursion(&series, &params(), &exact).unwrap();
        assert_eq!(a.rho2[0], b.rho2[0]);
        assert_ne!(a.rho2[1], b.rho2[1]);
        let lagged = PmleOptions { pairing: InnovationPairing::Lagged, ..Default::default() };
        let c = pmle_variance_recursion(&series, &params(), &lagged).unwrap();
        // σ²_{t₁} ignores Y₁ under the lagged pairing.
        let decay = (-params().eta()).exp();
        assert!((c.sigma2[1] - (params().theta() + decay * c.sigma2[0])).abs() < 1e-14);
        assert!(a.sigma2[1] > c.sigma2[1]);
    }

    #[test]
    fn fallback_shrinks_phi() {
        let init = ParamSet::new(0.04, 0.05, 0.2, 0.5).unwrap();
        let start = stationary_start(&init);
        assert!(start.eta() - start.phi() * start.gamma_tilde() > 0.0);
        assert_eq!(start.eta(), init.eta());
    }

    #[test]
    fn transform_round_trip() {
        let t = Transform { fix_gamma_zero: false };
        let p = params();
        let q = t.from_free(&t.to_free(&p)).unwrap();
        for (a, b) in p.as_array().iter().zip(q.as_array()) {
            assert!((a - b).abs() < 1e-14);
        }
    }
}
