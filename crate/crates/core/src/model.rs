//! Model parameters, the asymmetry function, the Laplace exponent and the
//! closed-form stationary moments of volatility and returns.

use crate::error::{Error, Result};
use crate::levy::{log_integral, LevySpec};

/// Asymmetric news impact `h(x) = (|x| − γx)²`.
#[inline]
pub fn h(x: f64, gamma: f64) -> f64 {
    let v = x.abs() - gamma * x;
    v * v
}

/// `1 + 6γ² + γ⁴`, the factor multiplying `φ²S` in `Ψ(2) − 2Ψ(1)`.
#[inline]
pub fn quartic_factor(gamma: f64) -> f64 {
    let g2 = gamma * gamma;
    1.0 + 6.0 * g2 + g2 * g2
}

/// GJR-COGARCH parameters `(θ, η, φ, γ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSet {
    theta: f64,
    eta: f64,
    phi: f64,
    gamma: f64,
}

impl ParamSet {
    /// Validates `θ, η, φ > 0` and `γ ∈ [0, 1)`.
    pub fn new(theta: f64, eta: f64, phi: f64, gamma: f64) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameters(format!("{name} must be positive, got {v}")))
            }
        };
        positive("theta", theta)?;
        positive("eta", eta)?;
        positive("phi", phi)?;
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::InvalidParameters(format!(
                "gamma must lie in [0,1), got {gamma}"
            )));
        }
        Ok(Self { theta, eta, phi, gamma })
    }

    /// Skips validation. Used for boundary cases such as `φ = 0` (no jump
    /// feedback), which several formulas reduce to cleanly.
    pub fn new_unchecked(theta: f64, eta: f64, phi: f64, gamma: f64) -> Self {
        Self { theta, eta, phi, gamma }
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `1 + γ²`
    pub fn gamma_tilde(&self) -> f64 {
        1.0 + self.gamma * self.gamma
    }

    pub fn with_gamma(self, gamma: f64) -> Self {
        Self { gamma, ..self }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.theta, self.eta, self.phi, self.gamma]
    }
}

/// Laplace exponent at 1 and 2 from the closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PsiValues {
    pub psi1: f64,
    pub psi2: f64,
}

impl PsiValues {
    pub fn new(params: &ParamSet, levy: &LevySpec) -> Self {
        Self::from_moments(params, levy.second_moment(), levy.fourth_moment())
    }

    /// Closed forms with explicit `E[L₁²]` and `S = ∫x⁴ν(dx)`.
    pub fn from_moments(params: &ParamSet, second: f64, s: f64) -> Self {
        let psi1 = -params.eta + params.phi * params.gamma_tilde() * second;
        let psi2 = 2.0 * psi1 + params.phi * params.phi * quartic_factor(params.gamma) * s;
        Self { psi1, psi2 }
    }
}

/// `Ψ(u) = −ηu + ∫((1 + φh(y))ᵘ − 1) ν(dy)` by quadrature.
///
/// Every shipped driver has moments of all orders, so the result is finite.
pub fn psi(u: f64, params: &ParamSet, levy: &LevySpec) -> f64 {
    let (phi, gamma) = (params.phi, params.gamma);
    -params.eta * u + levy.integrate(|y| (u * (phi * h(y, gamma)).ln_1p()).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StationarityReport {
    /// `∫ log(1 + φh) dν < η`: a stationary volatility law exists.
    pub log_condition: bool,
    /// `Ψ(1) < 0`: the stationary law has a finite mean.
    pub psi1_negative: bool,
    /// `Ψ(2) < 0`: the stationary law has a finite second moment.
    pub psi2_negative: bool,
}

pub fn stationarity(params: &ParamSet, levy: &LevySpec) -> StationarityReport {
    let psi = PsiValues::new(params, levy);
    let report = StationarityReport {
        log_condition: log_integral(levy, params) < params.eta,
        psi1_negative: psi.psi1 < 0.0,
        psi2_negative: psi.psi2 < 0.0,
    };
    debug_assert!(!report.psi1_negative || report.log_condition);
    debug_assert!(!report.psi2_negative || report.psi1_negative);
    report
}

/// `E[σ^{2κ}] = κ! θ^κ ∏ 1/(−Ψ(l))` for the stationary volatility.
pub fn sigma2_moment(params: &ParamSet, levy: &LevySpec, kappa: u32) -> Result<f64> {
    if kappa == 0 {
        return Err(Error::InvalidArgument("kappa must be positive".into()));
    }
    let closed = PsiValues::new(params, levy);
    let mut value = 1.0;
    for l in 1..=kappa {
        let psi_l = match l {
            1 => closed.psi1,
            2 => closed.psi2,
            _ => psi(l as f64, params, levy),
        };
        if psi_l >= 0.0 {
            return Err(Error::MomentDivergent { order: l, psi: psi_l });
        }
        value *= l as f64 * params.theta / -psi_l;
    }
    Ok(value)
}

/// `cov(σ²_t, σ²_{t+lag}) = θ²(2/(Ψ(1)Ψ(2)) − 1/Ψ(1)²) e^{lag Ψ(1)}`.
pub fn sigma2_autocov(params: &ParamSet, levy: &LevySpec, lag: f64) -> Result<f64> {
    if !(lag >= 0.0) {
        return Err(Error::InvalidArgument(format!("lag must be non-negative, got {lag}")));
    }
    let PsiValues { psi1, psi2 } = PsiValues::new(params, levy);
    if psi1 >= 0.0 {
        return Err(Error::MomentDivergent { order: 1, psi: psi1 });
    }
    if psi2 >= 0.0 {
        return Err(Error::MomentDivergent { order: 2, psi: psi2 });
    }
    let theta2 = params.theta * params.theta;
    Ok(theta2 * curvature(params, levy.fourth_moment(), -psi1, -psi2) / -psi1 * (lag * psi1).exp())
}

/// `2/|Ψ(2)| − 1/|Ψ(1)|`, using `2|Ψ(1)| − |Ψ(2)| = φ²(1 + 6γ² + γ⁴)S` to
/// avoid cancellation when `φ²` is small against `|Ψ(1)|`.
pub(crate) fn curvature(params: &ParamSet, s: f64, abs1: f64, abs2: f64) -> f64 {
    params.phi * params.phi * quartic_factor(params.gamma) * s / (abs1 * abs2)
}

/// Stationary moments of the increments `G^{(r)}_t = G_{t+r} − G_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReturnMoments {
    pub mean: f64,
    /// `E[(G^{(r)})²]`
    pub second: f64,
    /// `E[(G^{(r)})⁴]`; `None` when `Ψ(2) ≥ 0`.
    pub fourth: Option<f64>,
    /// Return interval `r`.
    pub grid: f64,
    cov_sq_scale: Option<f64>,
    decay: f64,
    psi2: f64,
}

impl ReturnMoments {
    /// `var((G^{(r)})²)`
    pub fn var_sq(&self) -> Result<f64> {
        let fourth = self.fourth_or_err()?;
        Ok(fourth - self.second * self.second)
    }

    pub fn fourth_or_err(&self) -> Result<f64> {
        self.fourth.ok_or(Error::MomentDivergent { order: 2, psi: self.psi2 })
    }

    /// `cov((G^{(r)}_t)², (G^{(r)}_{t+lag})²)`, valid only for `lag ≥ r`.
    pub fn cov_sq(&self, lag: f64) -> Result<f64> {
        if !(lag >= self.grid) {
            return Err(Error::OutOfDomain(format!(
                "squared-return covariance needs lag >= r = {}, got {lag}",
                self.grid
            )));
        }
        let scale = self.cov_sq_scale.ok_or(Error::MomentDivergent { order: 2, psi: self.psi2 })?;
        Ok(scale * (-lag * self.decay).exp())
    }

    /// `cov(G^{(r)}_t, G^{(r)}_{t+lag}) = 0` for `lag ≥ r`.
    pub fn cov(&self, lag: f64) -> Result<f64> {
        if !(lag >= self.grid) {
            return Err(Error::OutOfDomain(format!(
                "return covariance needs lag >= r = {}, got {lag}",
                self.grid
            )));
        }
        Ok(0.0)
    }

    /// `cor((G^{(r)}_t)², (G^{(r)}_{t+lag})²)`.
    pub fn cor_sq(&self, lag: f64) -> Result<f64> {
        Ok(self.cov_sq(lag)? / self.var_sq()?)
    }
}

/// Which expression supplies the coupling between squared returns and the
/// volatility in the fourth moment and squared-return autocovariance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MomentForm {
    /// `θ²(2η/φ − γ̃E[L₁²])(2/|Ψ(2)| − 1/|Ψ(1)|)/|Ψ(1)|`, the closed form
    /// on which the moment estimator is built.
    #[default]
    Printed,
    /// `(E[L₁²] + φγ̃S)E[σ⁴] − E[L₁²]E[σ²]²`, obtained from the generator of
    /// `(G, σ²)`. It omits a leverage term proportional to `γ E[G_t σ_t³]`,
    /// which vanishes for `γ = 0` and has no closed form otherwise. Both forms
    /// coincide at `γ = 0`; for `γ > 0` this one matches simulation.
    Generator,
}

/// Closed-form return moments on an interval of length `r`.
pub fn return_moments(params: &ParamSet, levy: &LevySpec, r: f64) -> Result<ReturnMoments> {
    return_moments_with(params, levy, r, MomentForm::Printed)
}

pub fn return_moments_with(params: &ParamSet, levy: &LevySpec, r: f64, form: MomentForm) -> Result<ReturnMoments> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::InvalidArgument(format!("return interval must be positive, got {r}")));
    }
    let m2 = levy.second_moment();
    let PsiValues { psi1, psi2 } = PsiValues::new(params, levy);
    if psi1 >= 0.0 {
        return Err(Error::MomentDivergent { order: 1, psi: psi1 });
    }
    let abs1 = -psi1;
    let theta = params.theta;
    let theta2 = theta * theta;
    let second = theta * r / abs1 * m2;

    let mut fourth = None;
    let mut cov_sq_scale = None;
    if psi2 < 0.0 && levy.third_moment() == 0.0 {
        let abs2 = -psi2;
        let (phi, s) = (params.phi, levy.fourth_moment());
        let coupling = match form {
            MomentForm::Printed => {
                let feedback = 2.0 * params.eta / phi - params.gamma_tilde() * m2;
                theta2 * feedback * curvature(params, s, abs1, abs2) / abs1
            }
            MomentForm::Generator => {
                let hh = quartic_factor(params.gamma);
                theta2 * phi * s * (m2 * phi * hh + 2.0 * abs1 * params.gamma_tilde()) / (abs1 * abs1 * abs2)
            }
        };
        let smoothing = r + (-r * abs1).exp_m1() / abs1;

        let cross_term = 6.0 * m2 * coupling / abs1 * smoothing;
        // 2θ²/φ² · (2/|Ψ(2)| − 1/|Ψ(1)|)/(1 + 6γ² + γ⁴) · r with φ² cancelled.
        let jump_term = 2.0 * theta2 * s / (abs1 * abs2) * r;
        let gaussian_term = 3.0 * theta2 / (abs1 * abs1) * m2 * m2 * r * r;
        fourth = Some(cross_term + jump_term + gaussian_term);

        let window = -(-r * abs1).exp_m1() * (r * abs1).exp_m1();
        cov_sq_scale = Some(m2 * coupling / (abs1 * abs1) * window);
    }

    Ok(ReturnMoments {
        mean: 0.0,
        second,
        fourth,
        grid: r,
        cov_sq_scale,
        decay: abs1,
        psi2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::JumpDist;
    use proptest::prelude::*;

    fn derived() -> ParamSet {
        ParamSet::new(0.04, 0.053, 0.04, 0.3).unwrap()
    }

    fn fig1() -> ParamSet {
        ParamSet::new(0.0001, 0.04576, 1.0 / 18.0, 0.3).unwrap()
    }

    #[test]
    fn moment_forms_agree_without_asymmetry() {
        let levy = LevySpec::standard();
        let sym = ParamSet::new(0.04, 0.0494, 0.04, 0.0).unwrap();
        let a = return_moments_with(&sym, &levy, 1.0, MomentForm::Printed).unwrap();
        let b = return_moments_with(&sym, &levy, 1.0, MomentForm::Generator).unwrap();
        assert!((a.fourth.unwrap() - b.fourth.unwrap()).abs() < 1e-12 * a.fourth.unwrap());
        assert!((a.cov_sq(2.0).unwrap() - b.cov_sq(2.0).unwrap()).abs() < 1e-12 * a.cov_sq(2.0).unwrap());
        let asym = derived();
        let a = return_moments_with(&asym, &levy, 1.0, MomentForm::Printed).unwrap();
        let b = return_moments_with(&asym, &levy, 1.0, MomentForm::Generator).unwrap();
        assert!(b.cov_sq(1.0).unwrap() < a.cov_sq(1.0).unwrap());
        assert_eq!(a.second, b.second);
    }

    #[test]
    fn h_values() {
        assert_eq!(h(0.0, 0.7), 0.0);
        assert_eq!(h(-1.5, 0.0), 2.25);
        assert!((h(2.0, 0.3) - 1.96).abs() < 1e-14);
        assert!((h(-2.0, 0.3) - 6.76).abs() < 1e-14);
    }

    #[test]
    fn parameter_validation() {
        assert!(ParamSet::new(0.1, 0.1, 0.1, 1.2).is_err());
        assert!(ParamSet::new(0.1, 0.1, 0.1, 1.0).is_err());
        assert!(ParamSet::new(0.1, 0.1, 0.1, -0.1).is_err());
        assert!(ParamSet::new(0.0, 0.1, 0.1, 0.1).is_err());
        assert!(ParamSet::new(0.1, 0.1, f64::NAN, 0.1).is_err());
        let err = ParamSet::new(0.1, 0.1, 0.1, 1.2).unwrap_err().to_string();
        assert!(err.contains("gamma must lie in [0,1)"), "{err}");
    }

    #[test]
    fn psi_closed_forms() {
        let psi = PsiValues::new(&derived(), &LevySpec::standard());
        assert!((psi.psi1 - -0.0094).abs() < 1e-15);
        assert!((psi.psi2 - -0.01136912).abs() < 1e-15);
    }

    #[test]
    fn psi_without_feedback_is_linear() {
        let params = ParamSet::new_unchecked(0.1, 0.3, 0.0, 0.5);
        for u in [0.5, 1.0, 2.0, 3.7] {
            assert_eq!(psi(u, &params, &LevySpec::standard()), -0.3 * u);
        }
    }

    #[test]
    fn quadrature_matches_closed_forms() {
        let levies = [
            LevySpec::standard(),
            LevySpec::compound_poisson(3.0, JumpDist::StandardNormal).unwrap(),
            LevySpec::compound_poisson(0.5, JumpDist::TwoPoint { a: 1.0 }).unwrap(),
        ];
        for levy in &levies {
            for params in [derived(), fig1(), ParamSet::new(1.0, 2.0, 0.7, 0.9).unwrap()] {
                let closed = PsiValues::new(&params, levy);
                for (u, c) in [(1.0, closed.psi1), (2.0, closed.psi2)] {
                    let q = psi(u, &params, levy);
                    assert!((q - c).abs() <= 1e-8 * c.abs(), "u={u}: {q} vs {c}");
                }
            }
        }
    }

    #[test]
    fn stationarity_examples() {
        let levy = LevySpec::standard();
        let off = stationarity(&ParamSet::new_unchecked(0.1, 0.2, 0.0, 0.3), &levy);
        assert!(off.log_condition && off.psi1_negative && off.psi2_negative);

        assert!(stationarity(&derived(), &levy).psi1_negative);

        // Ψ(1) = −0.04576 + 1.09/18 > 0 and ∫log(1+φh)dν ≈ 0.0549 > η.
        let report = stationarity(&fig1(), &levy);
        assert!(!report.psi1_negative);
        assert!(!report.log_condition);
        let li = log_integral(&levy, &fig1());
        assert!((li - 0.054868580499359).abs() < 1e-9, "{li}");
    }

    #[test]
    fn volatility_moments() {
        let levy = LevySpec::standard();
        let m1 = sigma2_moment(&derived(), &levy, 1).unwrap();
        assert!((m1 - 0.04 / 0.0094).abs() < 1e-12);
        assert!((m1 - 4.2553).abs() < 1e-4);
        let m2 = sigma2_moment(&derived(), &levy, 2).unwrap();
        assert!((m2 - 2.0 * 0.0016 / (0.0094 * 0.01136912)).abs() < 1e-9);

        let var = sigma2_autocov(&derived(), &levy, 0.0).unwrap();
        assert!((var - (m2 - m1 * m1)).abs() < 1e-10 * var);
        let ratio = sigma2_autocov(&derived(), &levy, 3.0).unwrap() / var;
        assert!((ratio - (-3.0 * 0.0094f64).exp()).abs() < 1e-14);

        assert!(matches!(
            sigma2_moment(&fig1(), &levy, 1),
            Err(Error::MomentDivergent { order: 1, .. })
        ));
        // Ψ(1) < 0 but Ψ(2) > 0
        let heavy = ParamSet::new(0.04, 0.5, 0.4, 0.0).unwrap();
        assert!(sigma2_moment(&heavy, &levy, 1).is_ok());
        assert!(matches!(
            sigma2_moment(&heavy, &levy, 2),
            Err(Error::MomentDivergent { order: 2, .. })
        ));
        assert!(sigma2_autocov(&heavy, &levy, 1.0).is_err());
        // Third moment uses quadrature for Ψ(3) = −0.0035340201599...
        let m3 = sigma2_moment(&derived(), &levy, 3).unwrap();
        let expected = 6.0 * 0.04f64.powi(3) / (0.0094 * 0.01136912 * 0.0035340201599990684);
        assert!((m3 - expected).abs() < 1e-8 * expected);
        assert!(sigma2_moment(&derived(), &levy, 4).is_err());
    }

    #[test]
    fn return_second_moment() {
        let rm = return_moments(&derived(), &LevySpec::standard(), 1.0).unwrap();
        assert_eq!(rm.mean, 0.0);
        assert!((rm.second - 4.2553191489361).abs() < 1e-10);
        assert_eq!(rm.cov(1.0).unwrap(), 0.0);
        assert!(matches!(rm.cov_sq(0.5), Err(Error::OutOfDomain(_))));
        assert!(rm.cov_sq(1.0).unwrap() > 0.0);
        assert!(matches!(
            return_moments(&fig1(), &LevySpec::standard(), 1.0),
            Err(Error::MomentDivergent { order: 1, .. })
        ));
    }

    #[test]
    fn fourth_moment_unavailable_when_psi2_nonnegative() {
        let heavy = ParamSet::new(0.04, 0.5, 0.4, 0.0).unwrap();
        let rm = return_moments(&heavy, &LevySpec::standard(), 1.0).unwrap();
        assert!(rm.fourth.is_none());
        assert!(matches!(rm.var_sq(), Err(Error::MomentDivergent { .. })));
        assert!(rm.cov_sq(2.0).is_err());
    }

    #[test]
    fn squared_return_covariance_is_log_linear() {
        let rm = return_moments(&derived(), &LevySpec::standard(), 2.0).unwrap();
        let logs: Vec<f64> = (1..=10).map(|i| rm.cov_sq(2.0 * i as f64).unwrap().ln()).collect();
        for w in logs.windows(2) {
            assert!(((w[1] - w[0]) - -2.0 * 0.0094).abs() < 1e-12);
        }
    }

    #[test]
    fn sign_of_gamma_does_not_change_h_distribution() {
        // Histogram of h(J) under ±γ for symmetric J.
        use rand_distr::{Distribution, StandardNormal};
        let mut rng = crate::rng::stream(5, 0);
        let draws: Vec<f64> = (0..200_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let edges = [0.05, 0.2, 0.5, 1.0, 2.0, 4.0, 8.0];
        let hist = |g: f64| {
            let mut counts = vec![0usize; edges.len() + 1];
            for &z in &draws {
                let v = h(z, g);
                counts[edges.iter().filter(|&&e| v > e).count()] += 1;
            }
            counts
        };
        let (plus, minus) = (hist(0.4), hist(-0.4));
        for (a, b) in plus.iter().zip(&minus) {
            let (a, b) = (*a as f64, *b as f64);
            // Both counts estimate the same bin probability.
            assert!((a - b).abs() < 4.0 * (a + b).sqrt().max(1.0), "{a} vs {b}");
        }
        // Exact statement at the quadrature level.
        let levy = LevySpec::standard();
        for u in [0.5, 1.0, 1.5, 2.0, 3.0] {
            let p = psi(u, &ParamSet::new_unchecked(0.1, 0.2, 0.3, 0.6), &levy);
            let m = psi(u, &ParamSet::new_unchecked(0.1, 0.2, 0.3, -0.6), &levy);
            assert!((p - m).abs() < 1e-14 * p.abs().max(1.0));
        }
    }

    proptest! {
        #[test]
        fn psi2_identity(theta in 0.01f64..2.0, eta in 0.01f64..3.0, phi in 0.001f64..1.5, gamma in 0.0f64..0.99, rate in 0.2f64..5.0) {
            let params = ParamSet::new(theta, eta, phi, gamma).unwrap();
            let levy = LevySpec::compound_poisson(rate, JumpDist::StandardNormal).unwrap();
            let psi = PsiValues::new(&params, &levy);
            let lhs = psi.psi2 - 2.0 * psi.psi1;
            let rhs = phi * phi * quartic_factor(gamma) * levy.fourth_moment();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (rhs.abs() + psi.psi1.abs()));
            let q1 = super::psi(1.0, &params, &levy);
            let q2 = super::psi(2.0, &params, &levy);
            prop_assert!((q1 - psi.psi1).abs() <= 1e-8 * psi.psi1.abs() + 1e-13 * eta);
            prop_assert!((q2 - psi.psi2).abs() <= 1e-8 * psi.psi2.abs() + 1e-13 * eta);
        }

        #[test]
        fn stationarity_is_monotone(eta in 0.01f64..2.0, phi in 0.001f64..1.5, gamma in 0.0f64..0.99, two_point in any::<bool>()) {
            let params = ParamSet::new(0.1, eta, phi, gamma).unwrap();
            let jumps = if two_point { JumpDist::TwoPoint { a: 1.0 } } else { JumpDist::StandardNormal };
            let levy = LevySpec::compound_poisson(1.0, jumps).unwrap();
            let report = stationarity(&params, &levy);
            prop_assert!(!report.psi2_negative || report.psi1_negative);
            prop_assert!(!report.psi1_negative || report.log_condition);
        }
    }
}
