//! Exact simulation of the coupled volatility and price dynamics for
//! compound Poisson drivers.
//!
//! Between jumps the volatility follows the deterministic flow
//! `dσ² = (θ − ησ²) dt`, solved exactly. At a jump `J` at time `s` the price
//! moves by `σ_{s−} J` and the volatility is multiplied by `1 + φ h(J)`, both
//! using the left limit `σ²_{s−}`.

use crate::error::{Error, Result};
use crate::levy::{log_integral, Jump, LevySpec};
use crate::model::{h, ParamSet, PsiValues};
use crate::rng;
use crate::series::ReturnSeries;

/// Initial volatility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Sigma2Init {
    Value(f64),
    /// Approximately stationary start obtained by burn-in.
    Stationary,
}

/// One jump of the driver together with the state it produced.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub jump: f64,
    pub sigma2_before: f64,
    pub sigma2_after: f64,
    pub g_after: f64,
}

/// Path state at a grid time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub time: f64,
    pub sigma2: f64,
    pub g: f64,
}

/// Exact trajectory on `[0, horizon]`, stored at jump times only.
#[derive(Debug, Clone, PartialEq)]
pub struct SimPath {
    params: ParamSet,
    sigma2_0: f64,
    horizon: f64,
    events: Vec<Event>,
}

/// Deterministic volatility flow over a gap of length `dt`.
#[inline]
pub fn flow(params: &ParamSet, sigma2: f64, dt: f64) -> f64 {
    let level = params.theta() / params.eta();
    level + (sigma2 - level) * (-params.eta() * dt).exp()
}

/// Length of the burn-in run used for [`Sigma2Init::Stationary`]: fifty
/// relaxation times of the volatility's mean (or, when the mean is infinite,
/// of its log-drift).
pub fn burn_in_length(params: &ParamSet, levy: &LevySpec) -> Result<f64> {
    let psi1 = PsiValues::new(params, levy).psi1;
    if psi1 < 0.0 {
        return Ok(50.0 / -psi1);
    }
    let log_drift = params.eta() - log_integral(levy, params);
    if log_drift > 0.0 {
        Ok(50.0 / log_drift)
    } else {
        Err(Error::NonstationaryModel(format!(
            "stationary start needs ∫log(1+φh)dν < η; the integral exceeds η by {}",
            -log_drift
        )))
    }
}

/// Simulates the path on `(0, horizon]` with jumps drawn from `seed`.
///
/// The observed jumps are exactly `levy.sample_jumps(horizon, seed)`; burn-in
/// jumps come from a separate stream.
pub fn simulate(
    params: &ParamSet,
    levy: &LevySpec,
    horizon: f64,
    init: Sigma2Init,
    seed: u64,
) -> Result<SimPath> {
    let sigma2_0 = match init {
        Sigma2Init::Value(v) => v,
        Sigma2Init::Stationary => stationary_start(params, levy, seed)?,
    };
    let jumps = levy.sample_jumps(horizon, seed)?;
    simulate_with_jumps(params, &jumps, horizon, sigma2_0)
}

fn stationary_start(params: &ParamSet, levy: &LevySpec, seed: u64) -> Result<f64> {
    let burn = burn_in_length(params, levy)?;
    let psi1 = PsiValues::new(params, levy).psi1;
    let start = if psi1 < 0.0 {
        params.theta() / -psi1
    } else {
        params.theta() / params.eta()
    };
    let jumps = levy.sample_jumps_with(burn, &mut rng::stream(seed, rng::BURN_IN_STREAM))?;
    let warm = simulate_with_jumps(params, &jumps, burn, start)?;
    Ok(warm.sigma2_at(burn))
}

/// Runs the exact dynamics along a given, time-ordered jump list.
pub fn simulate_with_jumps(
    params: &ParamSet,
    jumps: &[Jump],
    horizon: f64,
    sigma2_0: f64,
) -> Result<SimPath> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon must be positive, got {horizon}")));
    }
    if !(sigma2_0.is_finite() && sigma2_0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "initial volatility must be non-negative, got {sigma2_0}"
        )));
    }
    let mut events = Vec::with_capacity(jumps.len());
    let (mut t, mut sigma2, mut g) = (0.0, sigma2_0, 0.0);
    for jump in jumps {
        if !(jump.time > t) || jump.time > horizon {
            return Err(Error::InvalidArgument(format!(
                "jump times must be increasing within (0, {horizon}], got {}",
                jump.time
            )));
        }
        let before = flow(params, sigma2, jump.time - t);
        g += before.sqrt() * jump.size;
        let after = before * (1.0 + params.phi() * h(jump.size, params.gamma()));
        events.push(Event {
            time: jump.time,
            jump: jump.size,
            sigma2_before: before,
            sigma2_after: after,
            g_after: g,
        });
        t = jump.time;
        sigma2 = after;
    }
    Ok(SimPath {
        params: *params,
        sigma2_0,
        horizon,
        events,
    })
}

impl SimPath {
    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    pub fn sigma2_0(&self) -> f64 {
        self.sigma2_0
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn events(&self) -> &[Event] {
        &self.events
    }

    /// Number of events at or before `t`.
    fn events_through(&self, t: f64) -> usize {
        self.events.partition_point(|e| e.time <= t)
    }

    /// `σ²_t` (right-continuous).
    pub fn sigma2_at(&self, t: f64) -> f64 {
        match self.events_through(t) {
            0 => flow(&self.params, self.sigma2_0, t),
            k => {
                let e = &self.events[k - 1];
                flow(&self.params, e.sigma2_after, t - e.time)
            }
        }
    }

    /// `G_t`
    pub fn g_at(&self, t: f64) -> f64 {
        match self.events_through(t) {
            0 => 0.0,
            k => self.events[k - 1].g_after,
        }
    }

    /// State at each requested time.
    pub fn sample(&self, times: &[f64]) -> Vec<GridPoint> {
        times
            .iter()
            .map(|&t| GridPoint {
                time: t,
                sigma2: self.sigma2_at(t),
                g: self.g_at(t),
            })
            .collect()
    }

    /// Returns over consecutive grid cells: `Yᵢ = Σ σ_{s−} ΔL_s` over jumps in
    /// `(tᵢ₋₁, tᵢ]`.
    pub fn returns_on_grid(&self, times: &[f64]) -> Result<ReturnSeries> {
        if times.len() < 2 {
            return Err(Error::InvalidArgument("need at least two grid times".into()));
        }
        if times[0] < 0.0 || times[times.len() - 1] > self.horizon {
            return Err(Error::InvalidArgument(format!(
                "grid [{}, {}] is outside [0, {}]",
                times[0],
                times[times.len() - 1],
                self.horizon
            )));
        }
        let mut returns = vec![0.0; times.len() - 1];
        let mut k = self.events_through(times[0]);
        for (i, cell_end) in times[1..].iter().enumerate() {
            while k < self.events.len() && self.events[k].time <= *cell_end {
                let e = &self.events[k];
                returns[i] += e.sigma2_before.sqrt() * e.jump;
                k += 1;
            }
        }
        ReturnSeries::new(times.to_vec(), returns)
    }

    /// Returns on the equidistant grid `0, Δ, 2Δ, …` up to the horizon.
    pub fn equidistant_returns(&self, step: f64) -> Result<ReturnSeries> {
        if !(step > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        let n = (self.horizon / step * (1.0 + 1e-12)).floor() as usize;
        let times: Vec<f64> = (0..=n).map(|i| i as f64 * step).collect();
        let series = self.returns_on_grid(&times)?;
        ReturnSeries::equidistant(series.returns().to_vec(), step)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn derived() -> ParamSet {
        ParamSet::new(0.04, 0.053, 0.04, 0.3).unwrap()
    }

    #[test]
    fn no_jumps_is_pure_flow() {
        let p = derived();
        let path = simulate_with_jumps(&p, &[], 50.0, 2.0).unwrap();
        let level = 0.04 / 0.053;
        let expected = level + (2.0 - level) * (-0.053f64 * 50.0).exp();
        assert!((path.sigma2_at(50.0) - expected).abs() < 1e-14);
        assert_eq!(path.g_at(50.0), 0.0);
        let r = path.returns_on_grid(&[0.0, 10.0, 50.0]).unwrap();
        assert_eq!(r.returns(), &[0.0, 0.0]);
    }

    #[test]
    fn event_invariants_hold() {
        let p = derived();
        let path = simulate(&p, &LevySpec::standard(), 500.0, Sigma2Init::Value(1.0), 3).unwrap();
        let mut prev: Option<&Event> = None;
        let mut g = 0.0;
        for e in path.events() {
            let factor = 1.0 + p.phi() * h(e.jump, p.gamma());
            assert_eq!(e.sigma2_after, e.sigma2_before * factor);
            let (t0, s0) = prev.map_or((0.0, 1.0), |q| (q.time, q.sigma2_after));
            assert_eq!(e.sigma2_before, flow(&p, s0, e.time - t0));
            assert!((e.g_after - g - e.sigma2_before.sqrt() * e.jump).abs() < 1e-12);
            assert!(e.sigma2_before > 0.0);
            g = e.g_after;
            prev = Some(e);
        }
    }

    #[test]
    fn single_event_return() {
        let p = derived();
        let jumps = [Jump { time: 0.4, size: -1.3 }];
        let path = simulate_with_jumps(&p, &jumps, 1.0, 2.0).unwrap();
        let r = path.returns_on_grid(&[0.0, 1.0]).unwrap();
        assert_eq!(r.returns()[0], flow(&p, 2.0, 0.4).sqrt() * -1.3);
    }

    #[test]
    fn no_feedback_keeps_flow() {
        let p = ParamSet::new_unchecked(0.04, 0.053, 0.0, 0.3);
        let path = simulate(&p, &LevySpec::standard(), 100.0, Sigma2Init::Value(1.0), 1).unwrap();
        let pure = flow(&p, 1.0, 100.0);
        assert!((path.sigma2_at(100.0) - pure).abs() < 1e-12);
        assert!(path.g_at(100.0) != 0.0);
    }

    #[test]
    fn grid_outside_horizon_is_rejected() {
        let path = simulate_with_jumps(&derived(), &[], 5.0, 1.0).unwrap();
        assert!(path.returns_on_grid(&[0.0, 6.0]).is_err());
        assert!(path.returns_on_grid(&[-1.0, 1.0]).is_err());
    }

    #[test]
    fn invalid_inputs() {
        assert!(simulate_with_jumps(&derived(), &[], 0.0, 1.0).is_err());
        assert!(simulate_with_jumps(&derived(), &[], 1.0, -1.0).is_err());
        let unordered = [Jump { time: 0.5, size: 1.0 }, Jump { time: 0.2, size: 1.0 }];
        assert!(simulate_with_jumps(&derived(), &unordered, 1.0, 1.0).is_err());
    }

    #[test]
    fn stationary_start_requires_log_condition() {
        let fig1 = ParamSet::new(0.0001, 0.04576, 1.0 / 18.0, 0.3).unwrap();
        let err = simulate(&fig1, &LevySpec::standard(), 10.0, Sigma2Init::Stationary, 1).unwrap_err();
        assert!(matches!(err, Error::NonstationaryModel(_)));
        // Ψ(1) > 0 but log condition holds: burn-in uses the log drift.
        let p = ParamSet::new(0.01, 0.1, 0.1, 0.0).unwrap();
        assert!(PsiValues::new(&p, &LevySpec::standard()).psi1 >= 0.0);
        assert!(burn_in_length(&p, &LevySpec::standard()).is_ok());
    }

    #[test]
    fn stationary_and_fixed_starts_share_jumps() {
        let levy = LevySpec::standard();
        let a = simulate(&derived(), &levy, 100.0, Sigma2Init::Stationary, 9).unwrap();
        let b = simulate(&derived(), &levy, 100.0, Sigma2Init::Value(1.0), 9).unwrap();
        let times = |p: &SimPath| p.events().iter().map(|e| (e.time, e.jump)).collect::<Vec<_>>();
        assert_eq!(times(&a), times(&b));
        assert!(a.sigma2_0() > 0.0 && a.sigma2_0() != 1.0);
    }

    #[test]
    fn euler_scheme_converges_to_exact_path() {
        // Independent Euler discretization of the volatility equation.
        let p = ParamSet::new(0.04, 0.5, 0.3, 0.4).unwrap();
        let horizon = 10.0;
        let jumps = LevySpec::standard().sample_jumps(horizon, 11).unwrap();
        let exact = simulate_with_jumps(&p, &jumps, horizon, 0.5).unwrap().sigma2_at(horizon);
        let euler = |dt: f64| {
            let steps = (horizon / dt).round() as usize;
            let mut sigma2 = 0.5;
            let mut k = 0;
            for i in 0..steps {
                let t_end = (i + 1) as f64 * dt;
                sigma2 += (p.theta() - p.eta() * sigma2) * dt;
                while k < jumps.len() && jumps[k].time <= t_end {
                    let x = jumps[k].size;
                    let v = x.abs() - p.gamma() * x;
                    sigma2 += p.phi() * sigma2 * v * v;
                    k += 1;
                }
            }
            sigma2
        };
        let err = |dt| ((euler(dt) - exact) / exact).abs();
        let (coarse, fine) = (err(1e-2), err(1e-4));
        assert!(fine < 1e-3, "{fine}");
        assert!(fine < coarse);
    }
}
