//! Asymmetric continuous-time GARCH (GJR-COGARCH) processes driven by
//! compound Poisson Lévy processes.
//!
//! The volatility follows
//!
//! ```text
//! σ²_t = σ²_0 + θt − η ∫₀ᵗ σ²_s ds + φ Σ_{0<s≤t} σ²_{s−} h(ΔL_s),   h(x) = (|x| − γx)²
//! ```
//!
//! and the price process is `dG_t = σ_{t−} dL_t`. The crate provides exact path
//! simulation, closed-form stationary moments, the first-jump discrete
//! approximation, a closed-form method-of-moments inversion and a pseudo
//! maximum likelihood estimator that works on irregularly spaced returns.

pub mod config;
pub mod error;
pub mod estimation;
pub mod first_jump;
pub mod io;
pub mod levy;
pub mod model;
pub mod quadrature;
pub mod rng;
pub mod series;
pub mod sim;

pub use error::{Error, Result};
pub use levy::{JumpDist, LevySpec, SConvention};
pub use model::{MomentForm, ParamSet, PsiValues, ReturnMoments, StationarityReport};
pub use series::ReturnSeries;
pub use sim::{SimPath, Sigma2Init};
