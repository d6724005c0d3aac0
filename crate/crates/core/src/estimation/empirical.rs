//! Empirical second-order summary of squared returns: mean, variance and an
//! exponential fit to the autocorrelation function.

use crate::error::{Error, Result};
use crate::series::ReturnSeries;

/// `E[Gᵢ²] = μ`, `var(Gᵢ²) = Γ`, `cor(Gᵢ², Gᵢ₊ₕ²) = k e^{−Δhp}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSummary {
    pub mu: f64,
    pub var_sq: f64,
    pub k: f64,
    pub p: f64,
    pub delta: f64,
    pub s_used: f64,
}

impl MomentSummary {
    pub fn new(mu: f64, var_sq: f64, k: f64, p: f64, delta: f64, s_used: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("Gamma", var_sq), ("k", k), ("p", p), ("delta", delta), ("S", s_used)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InfeasibleMoments(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(Self { mu, var_sq, k, p, delta, s_used })
    }
}

/// Lag window for the autocorrelation fit.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct AcfFitOptions {
    /// Largest lag used; defaults to `min(50, N/100)`.
    pub max_lag: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcfFit {
    /// Lags that entered the fit.
    pub lags: Vec<usize>,
    /// Sample autocorrelations at lags `0..=max_lag`.
    pub acf: Vec<f64>,
    /// Weighted coefficient of determination of the log-linear fit.
    pub r2: f64,
}

/// Sample autocorrelations at lags `0..=max_lag`.
pub fn sample_acf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = centered.iter().map(|v| v * v).sum();
    (0..=max_lag.min(n.saturating_sub(1)))
        .map(|h| {
            let ch: f64 = centered[..n - h].iter().zip(&centered[h..]).map(|(a, b)| a * b).sum();
            ch / c0
        })
        .collect()
}

/// Moment summary of an equidistant return series.
///
/// `(k, p)` come from weighted least squares of `log ρ̂(h)` on `h` over the
/// lags with `ρ̂(h) > 0`, with weights `ρ̂(h)²`.
pub fn empirical_moments(series: &ReturnSeries, options: AcfFitOptions, s_used: f64) -> Result<(MomentSummary, AcfFit)> {
    let delta = series.step().ok_or_else(|| {
        Error::InvalidArgument("moment estimation needs equidistant observations".into())
    })?;
    let n = series.len();
    let max_lag = options.max_lag.unwrap_or_else(|| (n / 100).min(50));
    if max_lag < 2 || n <= max_lag + 1 {
        return Err(Error::InvalidArgument(format!(
            "{n} returns are too few for an autocorrelation fit over {max_lag} lags"
        )));
    }
    let squares: Vec<f64> = series.returns().iter().map(|y| y * y).collect();
    let nf = n as f64;
    let mu = squares.iter().sum::<f64>() / nf;
    let var_sq = squares.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / nf;
    if !(var_sq > 0.0) {
        return Err(Error::AcfFitFailure("squared returns are constant".into()));
    }
    let acf = sample_acf(&squares, max_lag);

    let mean_acf = acf[1..].iter().sum::<f64>() / max_lag as f64;
    if mean_acf <= 3.0 / (nf * max_lag as f64).sqrt() {
        return Err(Error::AcfFitFailure(format!(
            "no volatility clustering detected (mean autocorrelation {mean_acf:.3e})"
        )));
    }

    let points: Vec<(usize, f64, f64)> = (1..=max_lag)
        .filter(|&h| acf[h] > 0.0)
        .map(|h| (h, acf[h].ln(), acf[h] * acf[h]))
        .collect();
    if points.len() < 2 {
        return Err(Error::AcfFitFailure("fewer than two positive autocorrelations".into()));
    }
    let sw: f64 = points.iter().map(|p| p.2).sum();
    let mx = points.iter().map(|p| p.2 * p.0 as f64).sum::<f64>() / sw;
    let my = points.iter().map(|p| p.2 * p.1).sum::<f64>() / sw;
    let sxx: f64 = points.iter().map(|p| p.2 * (p.0 as f64 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| p.2 * (p.0 as f64 - mx) * (p.1 - my)).sum();
    let syy: f64 = points.iter().map(|p| p.2 * (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    if !(slope < 0.0) {
        return Err(Error::AcfFitFailure(format!(
            "autocorrelations do not decay (fitted slope {slope:.3e})"
        )));
    }
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    let k = intercept.exp();
    let p = -slope / delta;
    let summary = MomentSummary::new(mu, var_sq, k, p, delta, s_used)?;
    Ok((
        summary,
        AcfFit {
            lags: points.iter().map(|p| p.0).collect(),
            acf,
            r2,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn acf_of_ar1() {
        let mut rng = crate::rng::stream(8, 0);
        let mut x = 0.0;
        let data: Vec<f64> = (0..200_000)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                x = 0.6 * x + z;
                x
            })
            .collect();
        let acf = sample_acf(&data, 3);
        assert_eq!(acf[0], 1.0);
        for (h, r) in acf.iter().enumerate() {
            assert!((r - 0.6f64.powi(h as i32)).abs() < 0.01);
        }
    }

    #[test]
    fn exact_exponential_acf_is_recovered() {
        // Squared returns follow a positive AR(1), so their ACF is a^h.
        let mut rng = crate::rng::stream(12, 0);
        let a: f64 = 0.9;
        let mut v = 1.0;
        let returns: Vec<f64> = (0..400_000)
            .map(|_| {
                let e: f64 = rand_distr::Exp1.sample(&mut rng);
                v = a * v + (1.0 - a) * e;
                v.sqrt()
            })
            .collect();
        let series = ReturnSeries::equidistant(returns, 0.5).unwrap();
        let (summary, fit) = empirical_moments(&series, AcfFitOptions { max_lag: Some(20) }, 3.0).unwrap();
        let p_true = -a.ln() / 0.5;
        assert!((summary.p / p_true - 1.0).abs() < 0.05, "{} vs {p_true}", summary.p);
        assert!(fit.r2 > 0.9);
    }

    #[test]
    fn iid_returns_fail() {
        let mut rng = crate::rng::stream(21, 0);
        let returns: Vec<f64> = (0..100_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let series = ReturnSeries::equidistant(returns, 1.0).unwrap();
        let err = empirical_moments(&series, AcfFitOptions::default(), 3.0).unwrap_err();
        assert!(matches!(err, Error::AcfFitFailure(_)), "{err}");
    }

    #[test]
    fn irregular_series_is_rejected() {
        let series = ReturnSeries::new(vec![0.0, 1.0, 3.0], vec![0.1, 0.2]).unwrap();
        assert!(matches!(
            empirical_moments(&series, AcfFitOptions::default(), 3.0),
            Err(Error::InvalidArgument(_))
        ));
    }
}
