//! Kaplan-Meier product-limit estimation for right-censored data, with an
//! additive unit-level decomposition of the population estimator.
//!
//! Every estimator is a right-continuous [`StepFunction`] over ages. The
//! numeric routines are generic over [`Scalar`], so the same code runs in
//! `f64`, `f32`, or exact rational arithmetic ([`Rational`]).
//!
//! ```
//! use kmdecomp::{decomposition, estimator, ObservedUnit, Population};
//!
//! let units = [(1.0, false), (2.0, true), (3.0, false), (4.0, true), (5.0, true), (6.0, false)]
//!     .into_iter()
//!     .map(|(t, e)| ObservedUnit::new(t, e))
//!     .collect();
//! let pop = Population::new(units).unwrap();
//! let km = estimator::km_product(&pop);
//! let sum = decomposition::decompose(&pop).unwrap().aggregate();
//! assert!(km.approx_eq(&sum, 1e-12));
//! ```

pub mod decomposition;
mod error;
pub mod estimator;
pub mod population;
mod scalar;
pub mod simulation;
mod step;
pub mod verify;

pub use decomposition::{AttributionSplit, Redistribution, StackedRow, UnitDecomposition};
pub use error::{Error, Result};
pub use population::{ObservedUnit, Population};
pub use scalar::Scalar;
pub use simulation::{SimConfig, SimulatedPopulation, WeibullSpec};
pub use step::{evaluation_grid, StepFunction};

/// Exact rational scalar used for oracle computations.
pub type Rational = num_rational::Ratio<i128>;

pub type ObservedUnitF64 = ObservedUnit<f64>;
pub type PopulationF64 = Population<f64>;
pub type StepFunctionF64 = StepFunction<f64>;
pub type UnitDecompositionF64 = UnitDecomposition<f64>;

pub type ObservedUnitF32 = ObservedUnit<f32>;
pub type PopulationF32 = Population<f32>;
pub type StepFunctionF32 = StepFunction<f32>;

pub type ExactObservedUnit = ObservedUnit<Rational>;
pub type ExactPopulation = Population<Rational>;
pub type ExactStepFunction = StepFunction<Rational>;
pub type ExactUnitDecomposition = UnitDecomposition<Rational>;
