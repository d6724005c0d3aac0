//! Closed-form method of moments.
//!
//! The forward map sends `(θ, η, φ, γ)` to the summary `(μ, Γ, k, p)` of
//! equidistant returns with step `Δ`; [`mom_invert`] undoes it in closed form.

use crate::error::{Error, Result};
use crate::estimation::empirical::MomentSummary;
use crate::model::{curvature, ParamSet, PsiValues};

/// `γ̃ = 1 + γ²` values this close to 1 are treated as exactly symmetric.
pub const SYMMETRIC_SNAP: f64 = 1e-9;
/// Largest accepted relative residual of the root-selection equation.
pub const ROOT_RESIDUAL_TOL: f64 = 1e-6;

/// Quantities computed on the way from a summary to parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomIntermediates {
    /// `E = (1 − e^{−Δp})(e^{Δp} − 1)`
    pub e: f64,
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    pub gamma_tilde_roots: [f64; 2],
    /// `M₄ⁱ` for each root (NaN when undefined).
    pub m4: [f64; 2],
    /// Relative residuals of the selection equation for each root.
    pub residuals: [f64; 2],
    /// Index of the selected root.
    pub selected: usize,
    pub gamma_tilde: f64,
    /// `|Ψ(2)| = 2p − φ²(γ̃² + 4γ̃ − 4)S` of the recovered parameters.
    pub abs_psi2: f64,
}

/// Stationary summary of squared returns at step `delta`, with `E[L₁²] = 1`
/// and fourth Lévy moment `s`.
pub fn forward_summary(params: &ParamSet, s: f64, delta: f64) -> Result<MomentSummary> {
    let PsiValues { psi1, psi2 } = PsiValues::from_moments(params, 1.0, s);
    if psi1 >= 0.0 {
        return Err(Error::MomentDivergent { order: 1, psi: psi1 });
    }
    if psi2 >= 0.0 {
        return Err(Error::MomentDivergent { order: 2, psi: psi2 });
    }
    let (abs1, abs2) = (-psi1, -psi2);
    let (theta, eta, phi) = (params.theta(), params.eta(), params.phi());
    let curvature = curvature(params, s, abs1, abs2);
    let feedback = 2.0 * eta / phi - params.gamma_tilde();

    // Γ = θ² Γ̃
    let gamma_scaled = 6.0 / (abs1 * abs1) * feedback * curvature * (delta + (-delta * abs1).exp_m1() / abs1)
        + 2.0 * s / (abs1 * abs2) * delta
        + 2.0 / (abs1 * abs1) * delta * delta;
    let window = -(-delta * abs1).exp_m1() * (delta * abs1).exp_m1();
    let k = feedback * curvature * window / (gamma_scaled * abs1 * abs1 * abs1);

    MomentSummary::new(theta * delta / abs1, theta * theta * gamma_scaled, k, abs1, delta, s)
}

/// Recovers `(θ, η, φ, γ)` from a moment summary.
pub fn mom_invert(summary: &MomentSummary) -> Result<(ParamSet, MomIntermediates)> {
    let MomentSummary { mu, var_sq, k, p, delta, s_used: s } = *summary;
    let dp = delta * p;
    let e = -(-dp).exp_m1() * dp.exp_m1();

    let m1 = var_sq - 6.0 * k * var_sq / e * (dp + (-dp).exp_m1()) - 2.0 * mu * mu;
    if !(m1 > 0.0) {
        return Err(Error::InfeasibleMoments(format!("M1 = {m1:.6e} is not positive")));
    }
    let m2 = 1.0 - mu * mu * s / (delta * m1);
    if !(m2 > 0.0) {
        return Err(Error::InfeasibleMoments(format!("M2 = {m2:.6e} is not positive")));
    }
    let m3 = delta * k * var_sq * p * p * s / (m1 * e);

    // (M₂ − 2pS) γ̃² − 2(M₃ + 4pS) γ̃ + (M₃²/M₂ + 8pS) = 0
    let ps = p * s;
    let a = m2 - 2.0 * ps;
    let half_b = m3 + 4.0 * ps;
    let c = m3 * m3 / m2 + 8.0 * ps;
    let quarter_disc = 8.0 * ps * m3 + 32.0 * ps * ps - 8.0 * ps * m2 + 2.0 * ps * m3 * m3 / m2;
    if !(quarter_disc >= 0.0) {
        return Err(Error::InfeasibleMoments(format!(
            "discriminant {quarter_disc:.6e} of the gamma-tilde equation is negative"
        )));
    }
    let q = half_b + quarter_disc.sqrt();
    let roots = [q / a, c / q];

    // M₄ = p²/γ̃² + 2ΔkΓp³/(γ̃ M₁ E H); the second summand is φ(φ + 2p/γ̃).
    let excess = |gt: f64, hh: f64| 2.0 * delta * k * var_sq * p * p * p / (gt * m1 * e * hh);
    let mut m4 = [f64::NAN; 2];
    let mut residuals = [f64::INFINITY; 2];
    for (i, &gt) in roots.iter().enumerate() {
        let hh = gt * gt + 4.0 * gt - 4.0;
        if !(gt.is_finite() && gt > 0.0 && hh != 0.0) {
            continue;
        }
        m4[i] = p * p / (gt * gt) + excess(gt, hh);
        if !(m4[i] > 0.0) {
            continue;
        }
        let lhs = m4[i].sqrt() * hh * s * gt;
        let terms = [-m2 * gt * gt, m3 * gt, hh * s * p];
        let rhs: f64 = terms.iter().sum();
        let scale = lhs.abs() + terms.iter().map(|t| t.abs()).sum::<f64>();
        residuals[i] = (lhs - rhs).abs() / scale;
    }
    let selected = if residuals[0] <= residuals[1] { 0 } else { 1 };
    if !(residuals[selected] < ROOT_RESIDUAL_TOL) {
        return Err(Error::RootSelectionFailure { residuals });
    }

    let mut gamma_tilde = roots[selected];
    if (gamma_tilde - 1.0).abs() <= SYMMETRIC_SNAP {
        gamma_tilde = 1.0;
    }
    if !(1.0..2.0).contains(&gamma_tilde) {
        return Err(Error::InfeasibleMoments(format!("gamma-tilde = {gamma_tilde} outside [1, 2)")));
    }
    let hh = gamma_tilde * gamma_tilde + 4.0 * gamma_tilde - 4.0;
    let m4_sel = p * p / (gamma_tilde * gamma_tilde) + excess(gamma_tilde, hh);
    // φ = −p/γ̃ + √M₄, written without cancellation.
    let phi = excess(gamma_tilde, hh) / (m4_sel.sqrt() + p / gamma_tilde);
    let theta = p * mu / delta;
    let gamma = (gamma_tilde - 1.0).sqrt();
    let eta = p + phi * gamma_tilde;

    let abs_psi2 = 2.0 * p - phi * phi * hh * s;
    if !(abs_psi2 > 0.0) {
        return Err(Error::InfeasibleMoments(format!(
            "recovered parameters have Psi(2) = {:.6e} >= 0",
            -abs_psi2
        )));
    }
    let params = ParamSet::new(theta, eta, phi, gamma)
        .map_err(|e| Error::InfeasibleMoments(format!("recovered parameters invalid: {e}")))?;
    debug_assert!({
        let psi1 = PsiValues::from_moments(&params, 1.0, s).psi1;
        (psi1 + p).abs() <= 1e-9 * p.max(eta)
    });

    Ok((
        params,
        MomIntermediates {
            e,
            m1,
            m2,
            m3,
            gamma_tilde_roots: roots,
            m4,
            residuals,
            selected,
            gamma_tilde,
            abs_psi2,
        },
    ))
}

/// Closed-form solution restricted to `γ = 0`; the symmetric moment
/// estimator.
pub fn symmetric_invert(summary: &MomentSummary) -> Result<ParamSet> {
    let MomentSummary { mu, var_sq, k, p, delta, .. } = *summary;
    let dp = delta * p;
    let e = -(-dp).exp_m1() * dp.exp_m1();
    let m1 = var_sq - 6.0 * k * var_sq / e * (dp + (-dp).exp_m1()) - 2.0 * mu * mu;
    if !(m1 > 0.0) {
        return Err(Error::InfeasibleMoments(format!("M1 = {m1:.6e} is not positive")));
    }
    let excess = 2.0 * delta * k * var_sq * p * p * p / (m1 * e);
    let phi = excess / ((p * p + excess).sqrt() + p);
    ParamSet::new(p * mu / delta, p + phi, phi, 0.0)
        .map_err(|e| Error::InfeasibleMoments(format!("recovered parameters invalid: {e}")))
}
