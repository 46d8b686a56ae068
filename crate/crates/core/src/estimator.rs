//! Closed-form estimators: the product-limit estimator, the empirical CDF and
//! the conditional (imputation) construction for a censored unit.

use crate::{Error, Population, Result, Scalar, StepFunction};

/// CDF of a unit observed to fail at `t`.
pub fn unit_step<S: Scalar>(t: S) -> StepFunction<S> {
    StepFunction::unit_step(t)
}

/// Product-limit (Kaplan-Meier) estimate of the cumulative failure
/// distribution, `1 - prod_j (1 - delta_j * H(tau - t_j) / (n - j + 1))`.
///
/// Breakpoints sit only at failure ages. The empty population gives the
/// zero function.
pub fn km_product<S: Scalar>(pop: &Population<S>) -> StepFunction<S> {
    let n = pop.len();
    let mut survival = S::one();
    let mut curve = StepFunction::zero();
    for (idx, unit) in pop.units().iter().enumerate() {
        if !unit.event {
            continue;
        }
        let at_risk = S::from_count(n - idx);
        survival = survival * (S::one() - S::one() / at_risk);
        curve.push(unit.age, S::one() - survival);
    }
    curve
}

/// `(1/n) * #{j : t_j <= tau}` for a fully observed sample.
pub fn empirical_cdf<S: Scalar>(ages: &[S]) -> Result<StepFunction<S>> {
    if ages.is_empty() {
        return Err(Error::domain("empirical CDF of an empty sample"));
    }
    if let Some(bad) = ages.iter().find(|a| !a.is_non_negative()) {
        return Err(Error::domain(format!("invalid age {bad:?}")));
    }
    let mut sorted = ages.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let n = S::from_count(sorted.len());
    let mut curve = StepFunction::zero();
    for (idx, age) in sorted.into_iter().enumerate() {
        curve.push(age, S::from_count(idx + 1) / n);
    }
    Ok(curve)
}

/// Distribution of a unit known to have survived to `t`, with `cdf` as the
/// model for its future: `H(tau - t) * (F(tau) - F(t)) / (1 - F(t))`.
pub fn conditional_cdf<S: Scalar>(cdf: &StepFunction<S>, t: S) -> Result<StepFunction<S>> {
    if !t.is_non_negative() {
        return Err(Error::domain(format!(
            "cannot condition on negative age {t:?}"
        )));
    }
    let at_t = cdf.value_at(t);
    let remaining = S::one() - at_t;
    if remaining <= S::zero() {
        return Err(Error::DegenerateConditioning { age: t.to_f64() });
    }
    let start = cdf.breakpoints().partition_point(|b| *b <= t);
    let steps = cdf.breakpoints()[start..]
        .iter()
        .zip(&cdf.values()[start..])
        .map(|(&b, &v)| (b, (v - at_t) / remaining));
    StepFunction::from_steps(S::zero(), steps)
}

/// Unit-level curve built by imputing a censored unit's future from the
/// population's own product-limit estimate. Failed units get their unit step.
pub fn unit_km_via_imputation<S: Scalar>(pop: &Population<S>, j: usize) -> Result<StepFunction<S>> {
    let unit = *pop.unit(j)?;
    if unit.event {
        return Ok(unit_step(unit.age));
    }
    // F_KM(t_j) < 1 for a censored unit: reaching 1 needs a failure with a
    // single unit at risk, i.e. a failure in last position.
    conditional_cdf(&km_product(pop), unit.age)
}
