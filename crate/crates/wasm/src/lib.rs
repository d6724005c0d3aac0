//! Browser bindings: paired symmetric/asymmetric paths on one driver,
//! analytic moments, and the moment-estimator round trip.

use gjr_cogarch::estimation::{forward_summary, mom_invert};
use gjr_cogarch::model::{return_moments, sigma2_moment, stationarity};
use gjr_cogarch::sim::simulate_with_jumps;
use gjr_cogarch::{Error, LevySpec, ParamSet, PsiValues};
use wasm_bindgen::prelude::*;

/// Grid rows `[t, σ²(γ=0), G(γ=0), σ², G]`, flattened.
pub fn paired_paths(params: &ParamSet, horizon: f64, step: f64, sigma2_0: f64, seed: u64) -> Result<Vec<f64>, Error> {
    if !(step > 0.0 && horizon / step <= 200_000.0) {
        return Err(Error::InvalidArgument("grid too fine for the demo".into()));
    }
    let levy = LevySpec::standard();
    let jumps = levy.sample_jumps(horizon, seed)?;
    let asym = simulate_with_jumps(params, &jumps, horizon, sigma2_0)?;
    let sym = simulate_with_jumps(&params.with_gamma(0.0), &jumps, horizon, sigma2_0)?;
    let n = (horizon / step + 1e-9).floor() as usize;
    let times: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
    let mut out = Vec::with_capacity(5 * times.len());
    for (s, a) in sym.sample(&times).iter().zip(asym.sample(&times)) {
        out.extend([s.time, s.sigma2, s.g, a.sigma2, a.g]);
    }
    Ok(out)
}

/// `[Ψ(1), Ψ(2), stationary law exists, E[σ²], E[G²], var(G²), cor(G², lag r·j) for j = 1..=lags]`.
/// Moments that do not exist are `NaN`.
pub fn moment_table(params: &ParamSet, r: f64, lags: usize) -> Result<Vec<f64>, Error> {
    let levy = LevySpec::standard();
    let psi = PsiValues::new(params, &levy);
    let st = stationarity(params, &levy);
    let mut out = vec![
        psi.psi1,
        psi.psi2,
        if st.log_condition { 1.0 } else { 0.0 },
        sigma2_moment(params, &levy, 1).unwrap_or(f64::NAN),
    ];
    let m = return_moments(params, &levy, r);
    match &m {
        Ok(m) => {
            out.push(m.second);
            out.push(m.var_sq().unwrap_or(f64::NAN));
        }
        Err(_) => out.extend([f64::NAN; 2]),
    }
    for j in 1..=lags {
        out.push(m.as_ref().ok().and_then(|m| m.cor_sq(j as f64 * r).ok()).unwrap_or(f64::NAN));
    }
    Ok(out)
}

/// `[μ, Γ, k, p, θ̂, η̂, φ̂, γ̂, max relative error]` with `S = 3`.
pub fn round_trip(params: &ParamSet, delta: f64) -> Result<Vec<f64>, Error> {
    let summary = forward_summary(params, 3.0, delta)?;
    let (back, _) = mom_invert(&summary)?;
    let err = back
        .as_array()
        .iter()
        .zip(params.as_array())
        .map(|(a, b)| if b == 0.0 { a.abs() } else { (a / b - 1.0).abs() })
        .fold(0.0, f64::max);
    let mut out = vec![summary.mu, summary.var_sq, summary.k, summary.p];
    out.extend(back.as_array());
    out.push(err);
    Ok(out)
}

fn to_js(err: Error) -> JsError {
    JsError::new(&err.to_string())
}

fn params(theta: f64, eta: f64, phi: f64, gamma: f64) -> Result<ParamSet, JsError> {
    ParamSet::new(theta, eta, phi, gamma).map_err(to_js)
}

#[wasm_bindgen(js_name = pairedPaths)]
#[allow(clippy::too_many_arguments)]
pub fn paired_paths_js(
    theta: f64,
    eta: f64,
    phi: f64,
    gamma: f64,
    horizon: f64,
    step: f64,
    sigma2_0: f64,
    seed: u32,
) -> Result<Vec<f64>, JsError> {
    paired_paths(&params(theta, eta, phi, gamma)?, horizon, step, sigma2_0, seed as u64).map_err(to_js)
}

#[wasm_bindgen(js_name = momentTable)]
pub fn moment_table_js(theta: f64, eta: f64, phi: f64, gamma: f64, r: f64, lags: usize) -> Result<Vec<f64>, JsError> {
    moment_table(&params(theta, eta, phi, gamma)?, r, lags).map_err(to_js)
}

#[wasm_bindgen(js_name = roundTrip)]
pub fn round_trip_js(theta: f64, eta: f64, phi: f64, gamma: f64, delta: f64) -> Result<Vec<f64>, JsError> {
    round_trip(&params(theta, eta, phi, gamma)?, delta).map_err(to_js)
}
