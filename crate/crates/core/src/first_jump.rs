//! First-jump approximation: a sequence of discrete GJR-GARCH recursions
//! built from the first "large" jump of the driver in each cell of a
//! partition.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::{Jump, LevySpec};
use crate::model::ParamSet;
use crate::rng;
use crate::sim::simulate_with_jumps;

/// Warn when `max Δtᵢ · ν({|x| ≥ m})²` exceeds this value.
pub const VANISHING_PRODUCT_WARN: f64 = 0.1;

/// Which innovation drives the volatility update of cell `i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnovationPairing {
    /// `σ²ᵢ` uses `εᵢ`, the innovation that also moves `Gᵢ`. The update is
    /// then equivalent to the GJR-GARCH form written in `Yᵢ = Gᵢ − Gᵢ₋₁`.
    #[default]
    Contemporaneous,
    /// `σ²ᵢ` uses `εᵢ₋₁` (with `ε₀ = 0`).
    Lagged,
}

/// Partition, threshold and innovation standardization for one level of the
/// approximation.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstJumpScheme {
    partition: Vec<f64>,
    threshold: f64,
    means: Vec<f64>,
    sds: Vec<f64>,
    vanishing_product: f64,
}

/// Default threshold `m = Δt^{1/3}`, capped at 1.
pub fn default_threshold(step: f64) -> f64 {
    step.cbrt().min(1.0)
}

impl FirstJumpScheme {
    /// `partition` must start at 0 and increase strictly; `threshold ∈ (0, 1]`.
    pub fn new(levy: &LevySpec, partition: Vec<f64>, threshold: f64) -> Result<Self> {
        if partition.len() < 2 || partition[0] != 0.0 {
            return Err(Error::InvalidArgument(
                "partition must start at 0 and contain at least one cell".into(),
            ));
        }
        if partition.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("partition must be strictly increasing".into()));
        }
        if !(threshold > 0.0 && threshold <= 1.0) {
            return Err(Error::InvalidArgument(format!(
                "threshold must lie in (0, 1], got {threshold}"
            )));
        }
        let jumps = levy.jumps();
        let tail = jumps.tail_probability(threshold);
        if tail == 0.0 {
            return Err(Error::InvalidArgument(format!(
                "no jump exceeds threshold {threshold}; innovations would be degenerate"
            )));
        }
        // Conditional second moment of a jump given |J| > m.
        let cond_second = jumps.truncated_second_moment(threshold) / tail;
        let exceed_rate = levy.rate() * tail;

        let mut means = Vec::with_capacity(partition.len() - 1);
        let mut sds = Vec::with_capacity(partition.len() - 1);
        let mut max_dt: f64 = 0.0;
        for w in partition.windows(2) {
            let dt = w[1] - w[0];
            max_dt = max_dt.max(dt);
            // P(some jump above m in the cell)
            let hit = -(-exceed_rate * dt).exp_m1();
            // The conditional law of the first exceedance is symmetric.
            let mean = 0.0;
            let var = hit * cond_second - mean * mean;
            means.push(mean);
            sds.push(var.sqrt());
        }
        if let Some(i) = sds.iter().position(|&s| !(s > 0.0)) {
            return Err(Error::InvalidArgument(format!("innovation sd of cell {} is zero", i + 1)));
        }
        let tail_mass = levy.tail_mass(threshold);
        Ok(Self {
            partition,
            threshold,
            means,
            sds,
            vanishing_product: max_dt * tail_mass * tail_mass,
        })
    }

    /// `N` cells of length `horizon / N` with `N = round(horizon / step)`.
    pub fn equidistant(levy: &LevySpec, horizon: f64, step: f64, threshold: f64) -> Result<Self> {
        if !(horizon > 0.0 && step > 0.0 && step <= horizon) {
            return Err(Error::InvalidArgument(format!(
                "need 0 < step <= horizon, got step {step}, horizon {horizon}"
            )));
        }
        let cells = (horizon / step).round().max(1.0) as usize;
        let partition = (0..=cells).map(|i| horizon * i as f64 / cells as f64).collect();
        Self::new(levy, partition, threshold)
    }

    pub fn partition(&self) -> &[f64] {
        &self.partition
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    /// `μᵢ`
    pub fn means(&self) -> &[f64] {
        &self.means
    }

    /// `ξᵢ`
    pub fn sds(&self) -> &[f64] {
        &self.sds
    }

    pub fn cells(&self) -> usize {
        self.partition.len() - 1
    }

    pub fn max_step(&self) -> f64 {
        self.partition.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// `max Δtᵢ · ν({|x| ≥ m})²`
    pub fn vanishing_product(&self) -> f64 {
        self.vanishing_product
    }

    pub fn warning(&self) -> Option<String> {
        (self.vanishing_product > VANISHING_PRODUCT_WARN).then(|| {
            format!(
                "Δt·ν(|x|≥m)² = {:.3} exceeds {VANISHING_PRODUCT_WARN}; partition too coarse for threshold {}",
                self.vanishing_product, self.threshold
            )
        })
    }
}

/// `εᵢ = (1{τᵢ<∞} ΔL_{τᵢ} − μᵢ)/ξᵢ` where `τᵢ` is the first jump in cell `i`
/// with `|ΔL| > m`.
pub fn innovations(jumps: &[Jump], scheme: &FirstJumpScheme) -> Vec<f64> {
    let mut eps = Vec::with_capacity(scheme.cells());
    let mut k = 0;
    for (i, w) in scheme.partition.windows(2).enumerate() {
        while k < jumps.len() && jumps[k].time <= w[0] {
            k += 1;
        }
        let mut first = 0.0;
        while k < jumps.len() && jumps[k].time <= w[1] {
            if first == 0.0 && jumps[k].size.abs() > scheme.threshold {
                first = jumps[k].size;
            }
            k += 1;
        }
        eps.push((first - scheme.means[i]) / scheme.sds[i]);
    }
    eps
}

/// Discrete path `(Gᵢ, σ²ᵢ)` for `i = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    pub g: Vec<f64>,
    pub sigma2: Vec<f64>,
}

impl DiscretePath {
    pub fn returns(&self) -> Vec<f64> {
        self.g.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Asymmetric weight: `(1−γ)²` for `ε ≥ 0`, `(1+γ)²` for `ε < 0`.
///
/// `ε = 0` contributes nothing either way; it goes to the `(1−γ)²` branch.
#[inline]
pub fn sign_weight(eps: f64, gamma: f64) -> f64 {
    if eps < 0.0 {
        (1.0 + gamma) * (1.0 + gamma)
    } else {
        (1.0 - gamma) * (1.0 - gamma)
    }
}

/// Runs
///
/// ```text
/// Gᵢ  = Gᵢ₋₁ + σᵢ₋₁ √Δtᵢ εᵢ
/// σ²ᵢ = θΔtᵢ + (1 + w(ε) φ Δtᵢ ε²) e^{−ηΔtᵢ} σ²ᵢ₋₁
/// ```
///
/// with `ε = εᵢ` or `εᵢ₋₁` according to `pairing`.
pub fn garch_recursion(
    eps: &[f64],
    params: &ParamSet,
    partition: &[f64],
    sigma2_0: f64,
    pairing: InnovationPairing,
) -> Result<DiscretePath> {
    if partition.len() != eps.len() + 1 {
        return Err(Error::InvalidArgument(format!(
            "{} innovations need {} partition points, got {}",
            eps.len(),
            eps.len() + 1,
            partition.len()
        )));
    }
    if !(sigma2_0 >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "initial volatility must be non-negative, got {sigma2_0}"
        )));
    }
    let (theta, eta, phi, gamma) = (params.theta(), params.eta(), params.phi(), params.gamma());
    let mut g = Vec::with_capacity(eps.len() + 1);
    let mut sigma2 = Vec::with_capacity(eps.len() + 1);
    g.push(0.0);
    sigma2.push(sigma2_0);
    for (i, w) in partition.windows(2).enumerate() {
        let dt = w[1] - w[0];
        let prev = sigma2[i];
        g.push(g[i] + prev.sqrt() * dt.sqrt() * eps[i]);
        let e = match pairing {
            InnovationPairing::Contemporaneous => eps[i],
            InnovationPairing::Lagged => {
                if i == 0 {
                    0.0
                } else {
                    eps[i - 1]
                }
            }
        };
        let factor = 1.0 + sign_weight(e, gamma) * phi * dt * e * e;
        sigma2.push(theta * dt + factor * (-eta * dt).exp() * prev);
    }
    Ok(DiscretePath { g, sigma2 })
}

/// Volatility of the contemporaneous recursion rewritten in terms of
/// `Yᵢ = Gᵢ − Gᵢ₋₁`:
/// `σ²ᵢ = θΔtᵢ + e^{−ηΔtᵢ}σ²ᵢ₋₁ + φ e^{−ηΔtᵢ} (|Yᵢ| − γYᵢ)²`.
pub fn gjr_garch_form(path: &DiscretePath, params: &ParamSet, partition: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(path.sigma2.len());
    out.push(path.sigma2[0]);
    for (i, w) in partition.windows(2).enumerate() {
        let dt = w[1] - w[0];
        let y = path.g[i + 1] - path.g[i];
        let decay = (-params.eta() * dt).exp();
        out.push(
            params.theta() * dt
                + decay * path.sigma2[i]
                + params.phi() * decay * crate::model::h(y, params.gamma()),
        );
    }
    out
}

/// Ensemble-mean endpoint errors at one refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelError {
    pub level: usize,
    pub cells: usize,
    pub step: f64,
    pub threshold: f64,
    pub err_sigma2: f64,
    pub err_g: f64,
}

/// Compares the first-jump approximation at each step size against the
/// exact path on `paths` shared driver realizations over `[0, horizon]`.
/// Thresholds follow [`default_threshold`].
pub fn convergence_study(
    params: &ParamSet,
    levy: &LevySpec,
    horizon: f64,
    steps: &[f64],
    paths: usize,
    sigma2_0: f64,
    seed: u64,
) -> Result<Vec<LevelError>> {
    if paths == 0 {
        return Err(Error::InvalidArgument("need at least one path".into()));
    }
    let schemes = steps
        .iter()
        .map(|&dt| FirstJumpScheme::equidistant(levy, horizon, dt, default_threshold(dt)))
        .collect::<Result<Vec<_>>>()?;

    let per_path = (0..paths)
        .into_par_iter()
        .map(|k| -> Result<Vec<(f64, f64)>> {
            let jumps = levy.sample_jumps(horizon, rng::member_seed(seed, k as u64))?;
            let exact = simulate_with_jumps(params, &jumps, horizon, sigma2_0)?;
            let (sigma2_t, g_t) = (exact.sigma2_at(horizon), exact.g_at(horizon));
            schemes
                .iter()
                .map(|scheme| {
                    let eps = innovations(&jumps, scheme);
                    let approx = garch_recursion(
                        &eps,
                        params,
                        scheme.partition(),
                        sigma2_0,
                        InnovationPairing::Contemporaneous,
                    )?;
                    let n = scheme.cells();
                    Ok(((approx.sigma2[n] - sigma2_t).abs(), (approx.g[n] - g_t).abs()))
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(schemes
        .iter()
        .enumerate()
        .map(|(level, scheme)| {
            let (s, g) = per_path
                .iter()
                .fold((0.0, 0.0), |acc, errs| (acc.0 + errs[level].0, acc.1 + errs[level].1));
            LevelError {
                level: level + 1,
                cells: scheme.cells(),
                step: scheme.max_step(),
                threshold: scheme.threshold(),
                err_sigma2: s / paths as f64,
                err_g: g / paths as f64,
            }
        })
        .collect())
}
