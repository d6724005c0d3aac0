//! The driving pure-jump Lévy process.
//!
//! Only compound Poisson drivers with symmetric jump laws are supported. Specs
//! are normalized at construction so that `E[L₁²] = rate · E[J²] = 1`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};

use crate::error::{Error, Result};
use crate::model::{h, ParamSet};
use crate::quadrature;
use crate::rng::{self, SimRng};

/// Fourth-moment value used by the moment estimator when inverting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SConvention {
    /// `S = 3`, the value for normally distributed increments.
    Pseudo,
    /// `S = ∫x⁴ν(dx)` of the driver.
    True,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DriverKind {
    CompoundPoisson,
}

/// Symmetric jump-size law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpDist {
    StandardNormal,
    ScaledNormal { sd: f64 },
    /// `±a` with probability ½ each.
    TwoPoint { a: f64 },
}

impl JumpDist {
    fn scale(&self) -> f64 {
        match *self {
            JumpDist::StandardNormal => 1.0,
            JumpDist::ScaledNormal { sd } => sd,
            JumpDist::TwoPoint { a } => a,
        }
    }

    fn with_scale(&self, scale: f64) -> JumpDist {
        match self {
            JumpDist::StandardNormal | JumpDist::ScaledNormal { .. } => {
                if scale == 1.0 {
                    JumpDist::StandardNormal
                } else {
                    JumpDist::ScaledNormal { sd: scale }
                }
            }
            JumpDist::TwoPoint { .. } => JumpDist::TwoPoint { a: scale },
        }
    }

    /// `E[J²]`
    pub fn second_moment(&self) -> f64 {
        let s = self.scale();
        s * s
    }

    /// `E[J⁴]`
    pub fn fourth_moment(&self) -> f64 {
        let s2 = self.second_moment();
        match self {
            JumpDist::TwoPoint { .. } => s2 * s2,
            _ => 3.0 * s2 * s2,
        }
    }

    /// `E[f(J)]`, by Gauss–Hermite quadrature for normal laws and an exact
    /// two-term sum for the two-point law.
    pub fn expectation(&self, f: impl Fn(f64) -> f64) -> f64 {
        match *self {
            JumpDist::TwoPoint { a } => 0.5 * (f(a) + f(-a)),
            _ => {
                let s = self.scale();
                quadrature::standard().normal_expectation(|z| f(s * z))
            }
        }
    }

    /// `P(|J| > m)`
    pub fn tail_probability(&self, m: f64) -> f64 {
        match *self {
            JumpDist::TwoPoint { a } => {
                if a > m {
                    1.0
                } else {
                    0.0
                }
            }
            _ => libm::erfc(m / self.scale() * FRAC_1_SQRT_2),
        }
    }

    /// `E[J² 1{|J| > m}]`
    pub fn truncated_second_moment(&self, m: f64) -> f64 {
        match *self {
            JumpDist::TwoPoint { a } => {
                if a > m {
                    a * a
                } else {
                    0.0
                }
            }
            _ => {
                let s = self.scale();
                let x = m / s;
                let density = (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
                s * s * (2.0 * x * density + libm::erfc(x * FRAC_1_SQRT_2))
            }
        }
    }

    pub fn sample(&self, rng: &mut SimRng) -> f64 {
        match *self {
            JumpDist::TwoPoint { a } => {
                if rng.random::<bool>() {
                    a
                } else {
                    -a
                }
            }
            _ => {
                let z: f64 = StandardNormal.sample(rng);
                self.scale() * z
            }
        }
    }
}

/// A single jump of the driver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub time: f64,
    pub size: f64,
}

/// Driving Lévy process: compound Poisson with a symmetric jump law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevySpec {
    kind: DriverKind,
    rate: f64,
    jumps: JumpDist,
    s_convention: SConvention,
}

impl LevySpec {
    /// Compound Poisson driver rescaled so that `rate · E[J²] = 1`.
    pub fn compound_poisson(rate: f64, jumps: JumpDist) -> Result<Self> {
        check_rate(rate)?;
        let scale = jumps.scale();
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "jump scale must be positive and finite, got {scale}"
            )));
        }
        Ok(Self {
            kind: DriverKind::CompoundPoisson,
            rate,
            jumps: jumps.with_scale(1.0 / rate.sqrt()),
            s_convention: SConvention::Pseudo,
        })
    }

    /// Takes the jump law as given; fails unless it is already normalized.
    pub fn compound_poisson_unnormalized(rate: f64, jumps: JumpDist) -> Result<Self> {
        check_rate(rate)?;
        let m2 = rate * jumps.second_moment();
        if (m2 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "E[L_1^2] = {m2}, expected 1; enable normalization"
            )));
        }
        Ok(Self {
            kind: DriverKind::CompoundPoisson,
            rate,
            jumps,
            s_convention: SConvention::Pseudo,
        })
    }

    /// Rate-1 compound Poisson process with standard normal jumps.
    pub fn standard() -> Self {
        Self::compound_poisson(1.0, JumpDist::StandardNormal).expect("valid spec")
    }

    pub fn with_s_convention(mut self, convention: SConvention) -> Result<Self> {
        if let SConvention::Fixed(s) = convention {
            if !(s.is_finite() && s > 0.0) {
                return Err(Error::InvalidArgument(format!("S must be positive, got {s}")));
            }
        }
        self.s_convention = convention;
        Ok(self)
    }

    pub fn kind(&self) -> DriverKind {
        self.kind
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn jumps(&self) -> JumpDist {
        self.jumps
    }

    pub fn s_convention(&self) -> SConvention {
        self.s_convention
    }

    /// `∫ xᵏ ν(dx) = rate · E[Jᵏ]` for `k ∈ {2, 4}`.
    pub fn moment(&self, order: u32) -> Result<f64> {
        match order {
            2 => Ok(self.rate * self.jumps.second_moment()),
            4 => Ok(self.rate * self.jumps.fourth_moment()),
            _ => Err(Error::InvalidArgument(format!(
                "moment order must be 2 or 4, got {order}"
            ))),
        }
    }

    pub fn second_moment(&self) -> f64 {
        self.rate * self.jumps.second_moment()
    }

    /// `S = ∫ x⁴ ν(dx)`
    pub fn fourth_moment(&self) -> f64 {
        self.rate * self.jumps.fourth_moment()
    }

    /// Third moment of the Lévy measure; zero for every supported law.
    pub fn third_moment(&self) -> f64 {
        0.0
    }

    /// `S` as used by the moment estimator.
    pub fn assumed_s(&self) -> f64 {
        match self.s_convention {
            SConvention::Pseudo => 3.0,
            SConvention::True => self.fourth_moment(),
            SConvention::Fixed(s) => s,
        }
    }

    /// `∫ f(y) ν(dy) = rate · E[f(J)]`
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.rate * self.jumps.expectation(f)
    }

    /// `ν({|x| > m})`
    pub fn tail_mass(&self, m: f64) -> f64 {
        self.rate * self.jumps.tail_probability(m)
    }

    /// Jump times of a Poisson process on `(0, horizon]` with i.i.d. sizes.
    pub fn sample_jumps(&self, horizon: f64, seed: u64) -> Result<Vec<Jump>> {
        self.sample_jumps_with(horizon, &mut rng::stream(seed, rng::MAIN_STREAM))
    }

    pub fn sample_jumps_with(&self, horizon: f64, rng: &mut SimRng) -> Result<Vec<Jump>> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "horizon must be positive and finite, got {horizon}"
            )));
        }
        let gaps = Exp::new(self.rate).expect("rate checked at construction");
        let mut jumps = Vec::with_capacity((self.rate * horizon * 1.1) as usize + 16);
        let mut t = 0.0;
        loop {
            t += gaps.sample(rng);
            if t > horizon {
                break;
            }
            jumps.push(Jump {
                time: t,
                size: self.jumps.sample(rng),
            });
        }
        Ok(jumps)
    }
}

/// `∫ log(1 + φ h(y)) ν(dy)`; the stationarity condition requires it to be
/// below `η`.
pub fn log_integral(levy: &LevySpec, params: &ParamSet) -> f64 {
    let phi = params.phi();
    let gamma = params.gamma();
    levy.integrate(|y| (phi * h(y, gamma)).ln_1p())
}

fn check_rate(rate: f64) -> Result<()> {
    if rate.is_finite() && rate > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "jump rate must be positive and finite, got {rate}"
        )))
    }
}
