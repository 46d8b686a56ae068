//! Cross-checks of a decomposition against independent constructions.

use std::fmt;

use crate::decomposition::{
    consistency_deviation, decompose, fixed_point_step, redistribute_to_right,
};
use crate::estimator::km_product;
use crate::step::evaluation_grid;
use crate::{Population, Result, Scalar, StepFunction, UnitDecomposition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Identity {
    /// Mean of the unit curves equals the product-limit estimate.
    SumWise,
    /// Redistribution to the right equals the product-limit estimate.
    Redistribution,
    /// Tail estimate of each censored unit equals the conditioned population estimate.
    Consistency,
    /// The unit family is reproduced by the self-consistency map.
    FixedPoint,
}

impl Identity {
    pub const ALL: [Identity; 4] = [
        Identity::SumWise,
        Identity::Redistribution,
        Identity::Consistency,
        Identity::FixedPoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Identity::SumWise => "sum_identity",
            Identity::Redistribution => "redistribution",
            Identity::Consistency => "consistency",
            Identity::FixedPoint => "fixed_point",
        }
    }
}

impl fmt::Display for Identity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances<S> {
    pub identity: S,
    pub fixed_point: S,
}

impl Default for Tolerances<f64> {
    fn default() -> Self {
        Tolerances {
            identity: 1e-12,
            fixed_point: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome<S> {
    pub identity: Identity,
    /// `None` when the check could not be evaluated; see `error`.
    pub deviation: Option<S>,
    pub tolerance: S,
    pub error: Option<String>,
}

impl<S: Scalar> CheckOutcome<S> {
    pub fn passed(&self) -> bool {
        matches!(self.deviation, Some(d) if d <= self.tolerance)
    }

    fn from_result(identity: Identity, tolerance: S, r: Result<S>) -> Self {
        match r {
            Ok(d) => CheckOutcome {
                identity,
                deviation: Some(d),
                tolerance,
                error: None,
            },
            Err(e) => CheckOutcome {
                identity,
                deviation: None,
                tolerance,
                error: Some(e.to_string()),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport<S> {
    pub checks: Vec<CheckOutcome<S>>,
}

impl<S: Scalar> VerifyReport<S> {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(CheckOutcome::passed)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckOutcome<S>> {
        self.checks.iter().filter(|c| !c.passed())
    }

    pub fn get(&self, identity: Identity) -> Option<&CheckOutcome<S>> {
        self.checks.iter().find(|c| c.identity == identity)
    }
}

pub fn verify_population<S: Scalar>(
    pop: &Population<S>,
    tol: Tolerances<S>,
) -> Result<VerifyReport<S>> {
    Ok(verify_decomposition(&decompose(pop)?, tol))
}

/// Runs every identity against the given family. The redistribution and
/// consistency checks only look at the population.
pub fn verify_decomposition<S: Scalar>(
    d: &UnitDecomposition<S>,
    tol: Tolerances<S>,
) -> VerifyReport<S> {
    let pop = d.population();
    let km = km_product(pop);
    let checks = vec![
        CheckOutcome::from_result(
            Identity::SumWise,
            tol.identity,
            Ok(sup_on_grid(&km, &d.aggregate(), pop)),
        ),
        CheckOutcome::from_result(
            Identity::Redistribution,
            tol.identity,
            redistribute_to_right(pop).map(|r| sup_on_grid(&km, &r.curve, pop)),
        ),
        CheckOutcome::from_result(
            Identity::Consistency,
            tol.identity,
            max_consistency_deviation(pop),
        ),
        CheckOutcome::from_result(
            Identity::FixedPoint,
            tol.fixed_point,
            fixed_point_deviation(d),
        ),
    ];
    VerifyReport { checks }
}

fn sup_on_grid<S: Scalar>(a: &StepFunction<S>, b: &StepFunction<S>, pop: &Population<S>) -> S {
    let extra: Vec<S> = pop.last_age().into_iter().collect();
    let grid = evaluation_grid(&[a, b], &extra);
    a.max_abs_diff_on(b, &grid)
}

pub fn max_consistency_deviation<S: Scalar>(pop: &Population<S>) -> Result<S> {
    let mut worst = S::zero();
    for (idx, unit) in pop.units().iter().enumerate() {
        if !unit.event {
            worst = worst.max_of(consistency_deviation(pop, idx + 1)?);
        }
    }
    Ok(worst)
}

/// Largest change any unit curve undergoes under one self-consistency step.
pub fn fixed_point_deviation<S: Scalar>(d: &UnitDecomposition<S>) -> Result<S> {
    let pop = d.population();
    let next = fixed_point_step(d.unit_curves(), pop)?;
    Ok(d.unit_curves()
        .iter()
        .zip(&next)
        .fold(S::zero(), |m, (a, b)| m.max_of(sup_on_grid(a, b, pop))))
}
