//! Heavy-tailed linear processes and peaks-over-threshold estimation.
//!
//! The crate simulates moving-average processes driven by two-sided Pareto
//! innovations, fits the Generalized Pareto distribution to excesses over an
//! intermediate order statistic with the likelihood moment equations, and
//! ships a Monte Carlo harness that compares empirical tail measures and
//! estimator sweeps against their closed-form limits.
//!
//! Modules:
//!
//! * [`heavy_tail`] — two-sided Pareto innovation sampling and quantiles;
//! * [`linear_process`] — ARMA-to-moving-average expansion, causality
//!   checks, process simulation;
//! * [`tail_measure`] — absolute order statistics, empirical tail measures,
//!   theoretical quantile/scale functions;
//! * [`gpd_lme`] — the likelihood moment solver, its population limit
//!   functions, and the Hill estimator;
//! * [`experiment`] — reproducible experiment configs, runners and CSV/JSON
//!   emitters;
//! * [`quadrature`] — the adaptive Gauss–Kronrod integrator backing the
//!   limit functions.
//!
//! Numerical kernels are generic over the scalar type through [`Real`]
//! (`f32` or `f64`); the aliases below pin the common double-precision
//! instantiations. The experiment layer is `f64` only.

pub mod error;
pub mod experiment;
pub mod gpd_lme;
pub mod heavy_tail;
pub mod linear_process;
pub mod quadrature;
pub mod scalar;
pub mod tail_measure;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision innovation law.
pub type InnovationSpec64 = heavy_tail::InnovationSpec<f64>;
/// Double-precision ARMA parameterization.
pub type ArmaSpec64 = linear_process::ArmaSpec<f64>;
/// Double-precision moving-average coefficients.
pub type MaCoefficients64 = linear_process::MaCoefficients<f64>;
/// Double-precision excess sample.
pub type ExcessSample64 = tail_measure::ExcessSample<f64>;
/// Double-precision scale functions.
pub type ScaleFunctions64 = tail_measure::ScaleFunctions<f64>;
/// Double-precision solver configuration.
pub type LmeConfig64 = gpd_lme::LmeConfig<f64>;
/// Double-precision fit result.
pub type LmeFit64 = gpd_lme::LmeFit<f64>;
