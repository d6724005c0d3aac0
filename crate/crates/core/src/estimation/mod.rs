//! Parameter estimation: closed-form method of moments on equidistant
//! returns and pseudo maximum likelihood on arbitrary observation grids.

pub mod bootstrap;
pub mod empirical;
pub mod mom;
pub mod optimize;
pub mod pmle;

use crate::error::{Error, Result};
use crate::levy::LevySpec;
use crate::model::{stationarity, ParamSet, StationarityReport};
use crate::series::ReturnSeries;

pub use empirical::{empirical_moments, AcfFit, AcfFitOptions, MomentSummary};
pub use mom::{forward_summary, mom_invert, symmetric_invert, MomIntermediates};
pub use pmle::{pmle_fit, pmle_objective, pmle_variance_recursion, PmleFit, PmleOptions, RhoForm};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Mom,
    Pmle,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Mom => "mom",
            Method::Pmle => "pmle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    pub acf_fit_r2: Option<f64>,
    pub loglik: Option<f64>,
    pub iterations: Option<usize>,
    pub converged: Option<bool>,
    pub floored_cells: Option<usize>,
    pub stationarity: Option<StationarityReport>,
    pub summary: Option<MomentSummary>,
    pub intermediates: Option<MomIntermediates>,
    /// Bootstrap replicates that failed and were left out.
    pub bootstrap_failures: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub params: ParamSet,
    pub method: Method,
    pub diagnostics: Diagnostics,
    /// Standard errors of `(θ, η, φ, γ)`.
    pub standard_errors: Option<[f64; 4]>,
}

impl EstimateReport {
    /// Flat `key = value` view used by the text and JSON writers.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![("method".to_string(), self.method.name().to_string())];
        let names = ["theta", "eta", "phi", "gamma"];
        for (name, v) in names.iter().zip(self.params.as_array()) {
            kv.push((name.to_string(), fmt(v)));
        }
        if let Some(se) = self.standard_errors {
            for (name, v) in names.iter().zip(se) {
                kv.push((format!("se.{name}"), fmt(v)));
            }
        }
        let d = &self.diagnostics;
        if let Some(v) = d.acf_fit_r2 {
            kv.push(("acf_fit_r2".into(), fmt(v)));
        }
        if let Some(v) = d.loglik {
            kv.push(("loglik".into(), fmt(v)));
        }
        if let Some(v) = d.iterations {
            kv.push(("iterations".into(), v.to_string()));
        }
        if let Some(v) = d.converged {
            kv.push(("converged".into(), v.to_string()));
        }
        if let Some(v) = d.floored_cells {
            kv.push(("floored_cells".into(), v.to_string()));
        }
        if let Some(s) = d.stationarity {
            kv.push(("stationarity.log_condition".into(), s.log_condition.to_string()));
            kv.push(("stationarity.psi1_negative".into(), s.psi1_negative.to_string()));
            kv.push(("stationarity.psi2_negative".into(), s.psi2_negative.to_string()));
        }
        if let Some(s) = d.summary {
            for (k, v) in [("mu", s.mu), ("Gamma", s.var_sq), ("k", s.k), ("p", s.p), ("delta", s.delta), ("S", s.s_used)] {
                kv.push((format!("summary.{k}"), fmt(v)));
            }
        }
        if let Some(m) = d.intermediates {
            for (k, v) in [("E", m.e), ("M1", m.m1), ("M2", m.m2), ("M3", m.m3)] {
                kv.push((format!("mom.{k}"), fmt(v)));
            }
            for i in 0..2 {
                kv.push((format!("mom.gamma_tilde_root{}", i + 1), fmt(m.gamma_tilde_roots[i])));
                kv.push((format!("mom.M4_{}", i + 1), fmt(m.m4[i])));
                kv.push((format!("mom.residual{}", i + 1), fmt(m.residuals[i])));
            }
            kv.push(("mom.gamma_tilde".into(), fmt(m.gamma_tilde)));
        }
        if let Some(v) = d.bootstrap_failures {
            kv.push(("bootstrap_failures".into(), v.to_string()));
        }
        kv
    }
}

fn fmt(v: f64) -> String {
    crate::io::format_float(v)
}

/// Method-of-moments estimate with `S = levy.assumed_s()`.
pub fn estimate_mom(series: &ReturnSeries, levy: &LevySpec, acf: AcfFitOptions) -> Result<EstimateReport> {
    let (summary, fit) = empirical_moments(series, acf, levy.assumed_s())?;
    let (params, inter) = mom_invert(&summary)?;
    Ok(EstimateReport {
        params,
        method: Method::Mom,
        diagnostics: Diagnostics {
            acf_fit_r2: Some(fit.r2),
            stationarity: Some(stationarity(&params, levy)),
            summary: Some(summary),
            intermediates: Some(inter),
            ..Default::default()
        },
        standard_errors: None,
    })
}

/// Starting value for `γ` when the moment inversion gives no usable asymmetry.
pub const FALLBACK_GAMMA_START: f64 = 0.5;

/// Where pseudo-likelihood starting values came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitSource {
    Moments,
    /// Full inversion infeasible; symmetric solution for `(θ, η, φ)` with
    /// `γ = FALLBACK_GAMMA_START` and `η` adjusted to keep `|Ψ(1)| = p`.
    SymmetricMoments,
}

/// Moment-based starting values for [`pmle_fit`].
pub fn mom_initial_guess(summary: &MomentSummary) -> Result<(ParamSet, InitSource)> {
    match mom_invert(summary) {
        Ok((params, _)) => Ok((params, InitSource::Moments)),
        Err(full) => {
            let sym = symmetric_invert(summary).map_err(|_| full)?;
            let g = FALLBACK_GAMMA_START;
            let eta = summary.p + sym.phi() * (1.0 + g * g);
            Ok((ParamSet::new(sym.theta(), eta, sym.phi(), g)?, InitSource::SymmetricMoments))
        }
    }
}

/// Pseudo maximum likelihood estimate started at `init`.
pub fn estimate_pmle(series: &ReturnSeries, init: &ParamSet, levy: &LevySpec, opts: &PmleOptions) -> Result<EstimateReport> {
    let fit = pmle_fit(series, init, opts)?;
    Ok(EstimateReport {
        params: fit.params,
        method: Method::Pmle,
        diagnostics: Diagnostics {
            loglik: Some(fit.loglik),
            iterations: Some(fit.iterations),
            converged: Some(fit.converged),
            floored_cells: Some(fit.floored),
            stationarity: Some(stationarity(&fit.params, levy)),
            ..Default::default()
        },
        standard_errors: None,
    })
}

/// Block length `10/(pΔ)` observations, clamped to `[1, N/2]`.
pub fn bootstrap_block_length(p: f64, delta: f64, n: usize) -> usize {
    let raw = (10.0 / (p * delta)).round();
    let upper = (n / 2).max(1);
    if raw.is_finite() {
        (raw as usize).clamp(1, upper)
    } else {
        upper
    }
}

/// Attaches moving-block bootstrap standard errors to `report` by re-running
/// the same estimator on `replicates` resampled series. Replicates where the
/// estimator fails are counted and skipped.
pub fn attach_bootstrap_errors(
    report: &mut EstimateReport,
    series: &ReturnSeries,
    levy: &LevySpec,
    acf: AcfFitOptions,
    pmle: &PmleOptions,
    replicates: usize,
    seed: u64,
) -> Result<()> {
    let step = series.step().ok_or_else(|| {
        Error::InvalidArgument("bootstrap standard errors need equidistant observations".into())
    })?;
    let p = report.params.eta() - report.params.phi() * report.params.gamma_tilde();
    let block = bootstrap_block_length(p, step, series.len());
    let point = report.params;
    let method = report.method;
    let draws = bootstrap::block_bootstrap(series.returns(), block, replicates, seed, |sample| {
        let resampled = ReturnSeries::equidistant(sample.to_vec(), step).ok()?;
        let est = match method {
            Method::Mom => estimate_mom(&resampled, levy, acf).ok()?.params,
            Method::Pmle => pmle_fit(&resampled, &point, pmle).ok()?.params,
        };
        Some(est.as_array())
    });
    let ok: Vec<[f64; 4]> = draws.iter().flatten().copied().collect();
    let mut se = [f64::NAN; 4];
    for (j, s) in se.iter_mut().enumerate() {
        let column: Vec<f64> = ok.iter().map(|v| v[j]).collect();
        *s = bootstrap::standard_error(&column);
    }
    report.standard_errors = Some(se);
    report.diagnostics.bootstrap_failures = Some(draws.len() - ok.len());
    Ok(())
}
