//! Unit-level decomposition of the product-limit estimator.
//!
//! Each unit `j` gets its own curve `G_j`: the unit step at `t_j` when its
//! failure was observed, otherwise the product-limit estimate of the units
//! observed after it. The population estimate is the plain average
//! `(1/n) * sum_j G_j`. This module builds that family, splits it into
//! observed and imputed parts, and provides the independent checks: the
//! conditional-imputation identity, the self-consistency map whose fixed
//! point is the family, and Efron's redistribution-to-the-right sweep.

use crate::estimator::{conditional_cdf, km_product, unit_step};
use crate::step::evaluation_grid;
use crate::{Error, Population, Result, Scalar, StepFunction};

/// The family of unit-level curves of a population, each weighted `1/n`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitDecomposition<S: Scalar = f64> {
    population: Population<S>,
    unit_curves: Vec<StepFunction<S>>,
}

/// Population estimate split by unit status.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributionSplit<S: Scalar = f64> {
    /// `(1/n) * sum` of the curves of units with an observed failure.
    pub empirical_part: StepFunction<S>,
    /// `(1/n) * sum` of the curves of censored units.
    pub predicted_part: StepFunction<S>,
}

impl<S: Scalar> AttributionSplit<S> {
    pub fn total(&self) -> StepFunction<S> {
        self.empirical_part.add(&self.predicted_part)
    }
}

/// Cumulative layers at one age: `layers[m - 1] = (1/n) * sum_{j <= m} G_j(tau)`.
#[derive(Debug, Clone, PartialEq)]
pub struct StackedRow<S: Scalar = f64> {
    pub tau: S,
    pub layers: Vec<S>,
}

/// Output of the redistribution-to-the-right sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Redistribution<S: Scalar = f64> {
    pub curve: StepFunction<S>,
    /// Mass held by trailing censored units and never placed; `1 - final value`.
    pub lost_mass: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointRun<S: Scalar = f64> {
    pub curves: Vec<StepFunction<S>>,
    pub iterations: usize,
    pub converged: bool,
    /// Sup-norm change of the final step.
    pub last_change: S,
}

impl<S: Scalar> UnitDecomposition<S> {
    /// Wraps an arbitrary family of curves, one per unit in effective order.
    pub fn from_curves(
        population: Population<S>,
        unit_curves: Vec<StepFunction<S>>,
    ) -> Result<Self> {
        if population.is_empty() {
            return Err(Error::domain("empty population"));
        }
        if unit_curves.len() != population.len() {
            return Err(Error::domain(format!(
                "{} curves for a population of {}",
                unit_curves.len(),
                population.len()
            )));
        }
        Ok(UnitDecomposition {
            population,
            unit_curves,
        })
    }

    pub fn population(&self) -> &Population<S> {
        &self.population
    }

    pub fn unit_curves(&self) -> &[StepFunction<S>] {
        &self.unit_curves
    }

    pub fn into_curves(self) -> Vec<StepFunction<S>> {
        self.unit_curves
    }

    /// Curve of unit `j` (1-based).
    pub fn curve(&self, j: usize) -> Result<&StepFunction<S>> {
        self.population.check_index(j)?;
        Ok(&self.unit_curves[j - 1])
    }

    pub fn len(&self) -> usize {
        self.unit_curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unit_curves.is_empty()
    }

    pub fn weight(&self) -> S {
        S::one() / S::from_count(self.len())
    }

    pub fn aggregate(&self) -> StepFunction<S> {
        StepFunction::mean(&self.unit_curves)
    }

    pub fn split(&self) -> AttributionSplit<S> {
        let part = |event: bool| {
            StepFunction::sum(
                self.population
                    .units()
                    .iter()
                    .zip(&self.unit_curves)
                    .filter(|(u, _)| u.event == event)
                    .map(|(_, c)| c),
            )
            .scale(self.weight())
        };
        AttributionSplit {
            empirical_part: part(true),
            predicted_part: part(false),
        }
    }

    pub fn stacked(&self, tau_grid: &[S]) -> Result<Vec<StackedRow<S>>> {
        if tau_grid
            .windows(2)
            .any(|w| w[0].partial_cmp(&w[1]).is_none_or(|o| o.is_gt()))
        {
            return Err(Error::domain("tau grid must be sorted ascending"));
        }
        if let Some(bad) = tau_grid.iter().find(|t| !t.is_non_negative()) {
            return Err(Error::domain(format!("negative age {bad:?} in tau grid")));
        }
        let w = self.weight();
        Ok(tau_grid
            .iter()
            .map(|&tau| {
                let mut acc = S::zero();
                let layers = self
                    .unit_curves
                    .iter()
                    .map(|c| {
                        acc = acc + c.value_at(tau) * w;
                        acc
                    })
                    .collect();
                StackedRow { tau, layers }
            })
            .collect())
    }

    /// Default comparison grid for this family: merged breakpoints,
    /// midpoints, `0` and the last observed age.
    pub fn grid(&self) -> Vec<S> {
        let refs: Vec<&StepFunction<S>> = self.unit_curves.iter().collect();
        let extra: Vec<S> = self.population.last_age().into_iter().collect();
        evaluation_grid(&refs, &extra)
    }
}

/// `G_j`: unit step for an observed failure, else the product-limit
/// estimate of units `j+1..=n` (the zero function when there are none).
pub fn unit_estimator<S: Scalar>(pop: &Population<S>, j: usize) -> Result<StepFunction<S>> {
    let unit = pop.unit(j)?;
    if unit.event {
        Ok(unit_step(unit.age))
    } else {
        Ok(km_product(&pop.tail(j)?))
    }
}

pub fn decompose<S: Scalar>(pop: &Population<S>) -> Result<UnitDecomposition<S>> {
    if pop.is_empty() {
        return Err(Error::domain("empty population"));
    }
    let curves = (1..=pop.len())
        .map(|j| unit_estimator(pop, j))
        .collect::<Result<Vec<_>>>()?;
    UnitDecomposition::from_curves(pop.clone(), curves)
}

pub fn aggregate<S: Scalar>(d: &UnitDecomposition<S>) -> StepFunction<S> {
    d.aggregate()
}

pub fn split_empirical_predicted<S: Scalar>(d: &UnitDecomposition<S>) -> AttributionSplit<S> {
    d.split()
}

pub fn stacked_contributions<S: Scalar>(
    d: &UnitDecomposition<S>,
    tau_grid: &[S],
) -> Result<Vec<StackedRow<S>>> {
    d.stacked(tau_grid)
}

/// Largest gap, for `tau > t_j`, between the product-limit estimate of the
/// units after censored unit `j` and the population estimate conditioned on
/// survival to `t_j`.
pub fn consistency_deviation<S: Scalar>(pop: &Population<S>, j: usize) -> Result<S> {
    let unit = *pop.unit(j)?;
    if unit.event {
        return Err(Error::Precondition(format!(
            "unit {j} has an observed failure; the identity applies to censored units"
        )));
    }
    let tail_km = km_product(&pop.tail(j)?);
    let conditioned = conditional_cdf(&km_product(pop), unit.age)?;
    let extra: Vec<S> = std::iter::once(unit.age).chain(pop.last_age()).collect();
    let grid: Vec<S> = evaluation_grid(&[&tail_km, &conditioned], &extra)
        .into_iter()
        .filter(|&tau| tau > unit.age)
        .collect();
    Ok(tail_km.max_abs_diff_on(&conditioned, &grid))
}

pub fn consistency_check<S: Scalar>(pop: &Population<S>, j: usize, tol: S) -> Result<bool> {
    Ok(consistency_deviation(pop, j)? <= tol)
}

/// One application of the self-consistency map
/// `H'_j = delta_j * step(t_j) + (1 - delta_j) * cond(Hbar, t_j)`,
/// where `Hbar` is the mean of the input family.
pub fn fixed_point_step<S: Scalar>(
    family: &[StepFunction<S>],
    pop: &Population<S>,
) -> Result<Vec<StepFunction<S>>> {
    if family.len() != pop.len() {
        return Err(Error::domain(format!(
            "{} curves for a population of {}",
            family.len(),
            pop.len()
        )));
    }
    if let Some(bad) = family.iter().position(|h| !h.is_sub_cdf()) {
        return Err(Error::Precondition(format!(
            "curve {} is not a sub-CDF",
            bad + 1
        )));
    }
    let mean = StepFunction::mean(family);
    pop.units()
        .iter()
        .map(|u| {
            if u.event {
                Ok(unit_step(u.age))
            } else {
                conditional_cdf(&mean, u.age)
            }
        })
        .collect()
}

/// Repeats [`fixed_point_step`] until the sup-norm change of every curve is
/// at most `tol`, or `max_iterations` steps have run.
pub fn iterate_fixed_point<S: Scalar>(
    start: Vec<StepFunction<S>>,
    pop: &Population<S>,
    max_iterations: usize,
    tol: S,
) -> Result<FixedPointRun<S>> {
    let mut curves = start;
    let mut last_change = S::zero();
    for it in 1..=max_iterations {
        let next = fixed_point_step(&curves, pop)?;
        last_change = curves
            .iter()
            .zip(&next)
            .fold(S::zero(), |m, (a, b)| m.max_of(a.sup_distance(b)));
        curves = next;
        if last_change <= tol {
            return Ok(FixedPointRun {
                curves,
                iterations: it,
                converged: true,
                last_change,
            });
        }
    }
    Ok(FixedPointRun {
        curves,
        iterations: max_iterations,
        converged: false,
        last_change,
    })
}

/// Efron's redistribution to the right.
///
/// Every unit starts with mass `1/n`. Sweeping in effective order, a censored
/// unit hands its current mass in equal shares to all later units; a failed
/// unit places its current mass as a jump at its age. Mass left on a final
/// censored unit has nowhere to go and is reported as `lost_mass`.
pub fn redistribute_to_right<S: Scalar>(pop: &Population<S>) -> Result<Redistribution<S>> {
    let n = pop.len();
    if n == 0 {
        return Err(Error::domain("empty population"));
    }
    let mut mass = vec![S::one() / S::from_count(n); n];
    let mut placed = S::zero();
    let mut lost = S::zero();
    let mut curve = StepFunction::zero();
    for (j, unit) in pop.units().iter().enumerate() {
        let m = mass[j];
        if unit.event {
            placed = placed + m;
            curve.push(unit.age, placed);
        } else if j + 1 < n {
            let share = m / S::from_count(n - j - 1);
            for later in &mut mass[j + 1..] {
                *later = *later + share;
            }
        } else {
            lost = lost + m;
        }
    }
    Ok(Redistribution {
        curve,
        lost_mass: lost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimator::{empirical_cdf, unit_km_via_imputation};
    use crate::fixtures::granular;
    use crate::{ObservedUnit, Rational};

    fn r(n: i128, d: i128) -> Rational {
        Rational::new(n, d)
    }

    fn steps(points: &[(i128, Rational)]) -> StepFunction<Rational> {
        StepFunction::from_steps(r(0, 1), points.iter().map(|&(t, v)| (r(t, 1), v))).unwrap()
    }

    #[test]
    fn unit_curves_of_granular_example() {
        let pop = granular::<Rational>();
        let km = steps(&[(2, r(1, 5)), (4, r(7, 15)), (5, r(11, 15))]);
        assert_eq!(unit_estimator(&pop, 1).unwrap(), km);
        assert_eq!(unit_estimator(&pop, 2).unwrap(), unit_step(r(2, 1)));
        assert_eq!(
            unit_estimator(&pop, 3).unwrap(),
            steps(&[(4, r(1, 3)), (5, r(2, 3))])
        );
        assert_eq!(unit_estimator(&pop, 6).unwrap(), StepFunction::zero());
        assert!(matches!(
            unit_estimator(&pop, 0),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn aggregate_at_six() {
        let d = decompose(&granular::<Rational>()).unwrap();
        assert_eq!(d.len(), 6);
        assert_eq!(d.weight(), r(1, 6));
        let hand = (r(11, 15) + r(1, 1) + r(2, 3) + r(1, 1) + r(1, 1)) / r(6, 1);
        assert_eq!(hand, r(11, 15));
        assert_eq!(d.aggregate().value_at(r(6, 1)), hand);
        assert_eq!(d.aggregate(), km_product(d.population()));
    }

    #[test]
    fn decompose_edge_cases() {
        assert!(matches!(
            decompose(&Population::<f64>::empty()),
            Err(Error::Domain(_))
        ));

        let single = Population::new(vec![ObservedUnit::censored(1.0)]).unwrap();
        let d = decompose(&single).unwrap();
        assert_eq!(d.unit_curves(), &[StepFunction::zero()]);

        let ages = [r(1, 1), r(5, 2), r(3, 1)];
        let all_failed =
            Population::new(ages.iter().map(|&a| ObservedUnit::failed(a)).collect()).unwrap();
        let d = decompose(&all_failed).unwrap();
        for (c, u) in d.unit_curves().iter().zip(all_failed.units()) {
            assert_eq!(*c, unit_step(u.age));
        }
        assert_eq!(d.aggregate(), empirical_cdf(&ages).unwrap());

        let one_failed = Population::new(vec![ObservedUnit::failed(2.0)]).unwrap();
        assert_eq!(decompose(&one_failed).unwrap().aggregate(), unit_step(2.0));
    }

    #[test]
    fn all_censored_aggregate_and_split_are_zero() {
        let pop = Population::new(vec![
            ObservedUnit::censored(1.0),
            ObservedUnit::censored(2.0),
        ])
        .unwrap();
        let d = decompose(&pop).unwrap();
        assert_eq!(d.aggregate(), StepFunction::zero());
        let s = d.split();
        assert_eq!(s.empirical_part, StepFunction::zero());
        assert_eq!(s.predicted_part, StepFunction::zero());
    }

    #[test]
    fn split_of_granular_example() {
        let d = decompose(&granular::<Rational>()).unwrap();
        let s = d.split();
        assert_eq!(s.empirical_part.value_at(r(6, 1)), r(1, 2));
        assert_eq!(s.predicted_part.value_at(r(6, 1)), r(7, 30));
        assert_eq!(s.total(), d.aggregate());
    }

    #[test]
    fn split_without_censoring() {
        let pop =
            Population::new(vec![ObservedUnit::failed(1.0), ObservedUnit::failed(2.0)]).unwrap();
        assert_eq!(
            decompose(&pop).unwrap().split().predicted_part,
            StepFunction::zero()
        );
    }

    #[test]
    fn stacked_layers_at_six() {
        let d = decompose(&granular::<Rational>()).unwrap();
        let rows = d.stacked(&[r(1, 2), r(6, 1)]).unwrap();
        assert!(rows[0].layers.iter().all(|v| *v == r(0, 1)));
        let want: Vec<Rational> = [11, 26, 36, 51, 66, 66].iter().map(|&k| r(k, 90)).collect();
        assert_eq!(rows[1].layers, want);
        assert!(rows[1].layers.windows(2).all(|w| w[0] <= w[1]));
        assert!(matches!(
            d.stacked(&[r(2, 1), r(1, 1)]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn consistency_on_granular_example() {
        let pop = granular::<Rational>();
        for j in [1, 3, 6] {
            assert_eq!(consistency_deviation(&pop, j).unwrap(), r(0, 1), "unit {j}");
        }
        let pop = granular::<f64>();
        assert!(consistency_check(&pop, 3, 1e-12).unwrap());
        assert!(matches!(
            consistency_check(&pop, 2, 1e-12),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn imputation_matches_unit_estimator() {
        let pop = granular::<Rational>();
        for j in 1..=pop.len() {
            assert_eq!(
                unit_km_via_imputation(&pop, j).unwrap(),
                unit_estimator(&pop, j).unwrap()
            );
        }
    }

    #[test]
    fn fixed_point_of_granular_example() {
        let pop = granular::<Rational>();
        let d = decompose(&pop).unwrap();
        let next = fixed_point_step(d.unit_curves(), &pop).unwrap();
        assert_eq!(next, d.unit_curves());
    }

    #[test]
    fn fixed_point_trivial_cases() {
        let failed =
            Population::new(vec![ObservedUnit::failed(1.0), ObservedUnit::failed(2.0)]).unwrap();
        let arbitrary = vec![
            StepFunction::unit_step(0.5).scale(0.3),
            StepFunction::zero(),
        ];
        let out = fixed_point_step(&arbitrary, &failed).unwrap();
        assert_eq!(out, vec![unit_step(1.0), unit_step(2.0)]);

        let censored = Population::new(vec![
            ObservedUnit::censored(1.0),
            ObservedUnit::censored(2.0),
        ])
        .unwrap();
        let zeros = vec![StepFunction::zero(); 2];
        assert_eq!(fixed_point_step(&zeros, &censored).unwrap(), zeros);
    }

    #[test]
    fn fixed_point_errors() {
        let pop = Population::new(vec![ObservedUnit::censored(2.0)]).unwrap();
        let saturated = vec![StepFunction::unit_step(1.0)];
        assert!(matches!(
            fixed_point_step(&saturated, &pop),
            Err(Error::DegenerateConditioning { .. })
        ));
        assert!(fixed_point_step(&[], &pop).is_err());
        let bad = vec![StepFunction::unit_step(1.0).scale(2.0)];
        assert!(matches!(
            fixed_point_step(&bad, &pop),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn iteration_from_observed_failures_reaches_family() {
        let pop = granular::<f64>();
        let start: Vec<StepFunction> = pop
            .units()
            .iter()
            .map(|u| {
                if u.event {
                    unit_step(u.age)
                } else {
                    StepFunction::zero()
                }
            })
            .collect();
        let run = iterate_fixed_point(start, &pop, 1000, 1e-13).unwrap();
        assert!(run.converged);
        let d = decompose(&pop).unwrap();
        for (a, b) in run.curves.iter().zip(d.unit_curves()) {
            assert!(a.approx_eq(b, 1e-10));
        }
    }

    #[test]
    fn redistribution_of_granular_example() {
        let pop = granular::<Rational>();
        let out = redistribute_to_right(&pop).unwrap();
        assert_eq!(
            out.curve,
            steps(&[(2, r(1, 5)), (4, r(7, 15)), (5, r(11, 15))])
        );
        assert_eq!(out.lost_mass, r(4, 15));
        assert_eq!(out.lost_mass, r(1, 1) - out.curve.final_value());
    }

    #[test]
    fn redistribution_extremes() {
        let ages = [r(1, 1), r(2, 1)];
        let failed =
            Population::new(ages.iter().map(|&a| ObservedUnit::failed(a)).collect()).unwrap();
        let out = redistribute_to_right(&failed).unwrap();
        assert_eq!(out.curve, empirical_cdf(&ages).unwrap());
        assert_eq!(out.lost_mass, r(0, 1));

        let censored =
            Population::new(ages.iter().map(|&a| ObservedUnit::censored(a)).collect()).unwrap();
        let out = redistribute_to_right(&censored).unwrap();
        assert_eq!(out.curve, StepFunction::zero());
        assert_eq!(out.lost_mass, r(1, 1));

        assert!(redistribute_to_right(&Population::<f64>::empty()).is_err());
    }
}
