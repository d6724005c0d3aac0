use crate::error::{Error, Result};

/// Observation times `t₀ < … < t_N` and returns `Yᵢ = G_{tᵢ} − G_{tᵢ₋₁}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    times: Vec<f64>,
    returns: Vec<f64>,
    step: Option<f64>,
}

/// Relative tolerance when deciding whether a time grid is equidistant.
const EQUIDISTANT_TOL: f64 = 1e-9;

impl ReturnSeries {
    pub fn new(times: Vec<f64>, returns: Vec<f64>) -> Result<Self> {
        if times.len() != returns.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "{} times need {} returns, got {}",
                times.len(),
                times.len().saturating_sub(1),
                returns.len()
            )));
        }
        if let Some(i) = times.iter().position(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!("time {i} is not finite")));
        }
        if let Some(i) = returns.iter().position(|y| !y.is_finite()) {
            return Err(Error::InvalidArgument(format!("return {} is not finite", i + 1)));
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument(format!(
                "times must be strictly increasing (t[{}] = {} >= t[{}] = {})",
                i,
                times[i],
                i + 1,
                times[i + 1]
            )));
        }
        let step = detect_step(&times);
        Ok(Self { times, returns, step })
    }

    /// Returns observed every `step` starting at time 0.
    pub fn equidistant(returns: Vec<f64>, step: f64) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
        }
        let times = (0..=returns.len()).map(|i| i as f64 * step).collect();
        let mut series = Self::new(times, returns)?;
        series.step = Some(step);
        Ok(series)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn returns(&self) -> &[f64] {
        &self.returns
    }

    pub fn len(&self) -> usize {
        self.returns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.returns.is_empty()
    }

    /// Grid step when the observation times are equidistant.
    pub fn step(&self) -> Option<f64> {
        self.step
    }

    pub fn is_equidistant(&self) -> bool {
        self.step.is_some()
    }

    /// `Δtᵢ = tᵢ − tᵢ₋₁`
    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.times.windows(2).map(|w| w[1] - w[0])
    }
}

fn detect_step(times: &[f64]) -> Option<f64> {
    if times.len() < 2 {
        return None;
    }
    let step = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    times
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= EQUIDISTANT_TOL * step)
        .then_some(step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validates_shape_and_order() {
        assert!(ReturnSeries::new(vec![0.0, 1.0], vec![]).is_err());
        assert!(ReturnSeries::new(vec![0.0, 1.0, 1.0], vec![0.1, 0.2]).is_err());
        assert!(ReturnSeries::new(vec![0.0, 1.0], vec![f64::NAN]).is_err());
        let s = ReturnSeries::new(vec![0.0, 0.5, 2.0], vec![0.1, -0.2]).unwrap();
        assert!(!s.is_equidistant());
        assert_eq!(s.increments().collect::<Vec<_>>(), vec![0.5, 1.5]);
    }

    #[test]
    fn equidistant_grid() {
        let s = ReturnSeries::equidistant(vec![1.0, 2.0, 3.0], 1.0).unwrap();
        assert_eq!(s.times(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(s.step(), Some(1.0));
        let t: Vec<f64> = (0..=10).map(|i| 0.1 * i as f64).collect();
        assert!(ReturnSeries::new(t, vec![0.0; 10]).unwrap().is_equidistant());
    }
}
