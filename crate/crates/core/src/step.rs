//! Right-continuous piecewise-constant functions on `[0, inf)`.

use std::cmp::Ordering;

use crate::{Error, Result, Scalar};

/// A right-continuous step function.
///
/// The value is `base` on `[0, breakpoints[0])` and `values[i]` on
/// `[breakpoints[i], breakpoints[i + 1])`; past the last breakpoint the last
/// value is held. The jump at a breakpoint is included at that breakpoint,
/// so a unit step at `t` evaluates to 1 at `t` itself.
///
/// Storage is canonical: breakpoints strictly increase and every stored
/// breakpoint changes the value. Structural equality is therefore exact
/// equality of functions, which is what exact rational tests rely on.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<S: Scalar = f64> {
    breakpoints: Vec<S>,
    values: Vec<S>,
    base: S,
}

fn cmp<S: Scalar>(a: &S, b: &S) -> Ordering {
    a.partial_cmp(b).unwrap_or(Ordering::Equal)
}

impl<S: Scalar> StepFunction<S> {
    pub fn zero() -> Self {
        Self::constant(S::zero())
    }

    pub fn constant(value: S) -> Self {
        StepFunction {
            breakpoints: Vec::new(),
            values: Vec::new(),
            base: value,
        }
    }

    /// CDF of a point mass at `t`: 0 before `t`, 1 from `t` on.
    pub fn unit_step(t: S) -> Self {
        StepFunction {
            breakpoints: vec![t],
            values: vec![S::one()],
            base: S::zero(),
        }
    }

    /// Builds from `(age, value from this age on)` pairs with non-decreasing
    /// ages. Repeated ages keep the last value; steps that do not change the
    /// value are dropped.
    pub fn from_steps<I>(base: S, steps: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, S)>,
    {
        let mut f = Self::constant(base);
        for (age, value) in steps {
            if !age.is_non_negative() {
                return Err(Error::domain(format!("breakpoint {age:?} is not >= 0")));
            }
            if let Some(&last) = f.breakpoints.last() {
                if age < last {
                    return Err(Error::domain("breakpoints must be non-decreasing"));
                }
            }
            f.push(age, value);
        }
        Ok(f)
    }

    /// Appends a step at an age no smaller than the current last breakpoint.
    pub(crate) fn push(&mut self, age: S, value: S) {
        if self.breakpoints.last() == Some(&age) {
            self.breakpoints.pop();
            self.values.pop();
        }
        if value != self.final_value() {
            self.breakpoints.push(age);
            self.values.push(value);
        }
    }

    pub fn breakpoints(&self) -> &[S] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[S] {
        &self.values
    }

    pub fn base(&self) -> S {
        self.base
    }

    pub fn final_value(&self) -> S {
        self.values.last().copied().unwrap_or(self.base)
    }

    /// Value at `tau`. Negative `tau` is a domain error.
    pub fn evaluate(&self, tau: S) -> Result<S> {
        if !tau.is_non_negative() {
            return Err(Error::domain(format!(
                "cannot evaluate at negative age {tau:?}"
            )));
        }
        Ok(self.value_at(tau))
    }

    /// Unchecked evaluation; anything before the first breakpoint gets `base`.
    pub fn value_at(&self, tau: S) -> S {
        match self.breakpoints.partition_point(|b| *b <= tau) {
            0 => self.base,
            k => self.values[k - 1],
        }
    }

    /// Limit from the left at `tau`.
    pub fn left_limit(&self, tau: S) -> S {
        match self.breakpoints.partition_point(|b| *b < tau) {
            0 => self.base,
            k => self.values[k - 1],
        }
    }

    /// `(age, jump size)` for every breakpoint.
    pub fn jumps(&self) -> impl Iterator<Item = (S, S)> + '_ {
        let mut prev = self.base;
        self.breakpoints
            .iter()
            .zip(&self.values)
            .map(move |(&b, &v)| {
                let jump = v - prev;
                prev = v;
                (b, jump)
            })
    }

    /// Non-decreasing with all values in `[0, 1]`.
    pub fn is_sub_cdf(&self) -> bool {
        let in_range = |v: S| v >= S::zero() && v <= S::one();
        in_range(self.base)
            && self.values.iter().all(|&v| in_range(v))
            && self.jumps().all(|(_, j)| j >= S::zero())
    }

    pub fn scale(&self, factor: S) -> Self {
        Self::from_sorted(
            self.base * factor,
            self.breakpoints
                .iter()
                .copied()
                .zip(self.values.iter().map(|&v| v * factor)),
        )
    }

    pub fn add(&self, other: &Self) -> Self {
        Self::sum([self, other])
    }

    /// Pointwise sum, computed by merging the jumps of all summands.
    pub fn sum<'a, I>(curves: I) -> Self
    where
        I: IntoIterator<Item = &'a StepFunction<S>>,
    {
        let mut base = S::zero();
        let mut jumps: Vec<(S, S)> = Vec::new();
        for c in curves {
            base = base + c.base;
            jumps.extend(c.jumps());
        }
        jumps.sort_by(|a, b| cmp(&a.0, &b.0));
        let mut acc = base;
        Self::from_sorted(
            base,
            jumps.into_iter().map(|(age, jump)| {
                acc = acc + jump;
                (age, acc)
            }),
        )
    }

    /// Pointwise mean `(1/n) * sum`; the zero function for an empty family.
    pub fn mean(curves: &[StepFunction<S>]) -> Self {
        if curves.is_empty() {
            return Self::zero();
        }
        Self::sum(curves).scale(S::one() / S::from_count(curves.len()))
    }

    /// Applies `f` to the values of `curves` on the union of their breakpoints.
    pub fn pointwise<F>(curves: &[&StepFunction<S>], f: F) -> Self
    where
        F: Fn(&[S]) -> S,
    {
        let mut ages: Vec<S> = curves
            .iter()
            .flat_map(|c| c.breakpoints.iter().copied())
            .collect();
        ages.sort_by(cmp);
        ages.dedup();
        let mut buf = vec![S::zero(); curves.len()];
        let mut eval = |tau: Option<S>| {
            for (slot, c) in buf.iter_mut().zip(curves) {
                *slot = match tau {
                    Some(t) => c.value_at(t),
                    None => c.base,
                };
            }
            f(&buf)
        };
        let base = eval(None);
        let steps: Vec<(S, S)> = ages.into_iter().map(|t| (t, eval(Some(t)))).collect();
        Self::from_sorted(base, steps)
    }

    /// Largest `|self - other|` over `grid`.
    pub fn max_abs_diff_on(&self, other: &Self, grid: &[S]) -> S {
        grid.iter().fold(S::zero(), |m, &t| {
            m.max_of((self.value_at(t) - other.value_at(t)).abs())
        })
    }

    /// Sup-norm distance. Exact for step functions: the difference is
    /// constant between merged breakpoints.
    pub fn sup_distance(&self, other: &Self) -> S {
        let base = (self.base - other.base).abs();
        let grid = evaluation_grid(&[self, other], &[]);
        base.max_of(self.max_abs_diff_on(other, &grid))
    }

    pub fn approx_eq(&self, other: &Self, tol: S) -> bool {
        self.sup_distance(other) <= tol
    }

    pub fn sample(&self, grid: &[S]) -> Vec<(S, S)> {
        grid.iter().map(|&t| (t, self.value_at(t))).collect()
    }

    fn from_sorted<I: IntoIterator<Item = (S, S)>>(base: S, steps: I) -> Self {
        let mut f = Self::constant(base);
        for (age, value) in steps {
            f.push(age, value);
        }
        f
    }
}

/// Grid on which step functions are compared: `0`, every breakpoint of
/// `curves`, the `extra` ages, and the midpoint between each consecutive pair.
/// Two step functions agreeing on this grid agree everywhere on `[0, max]`.
pub fn evaluation_grid<S: Scalar>(curves: &[&StepFunction<S>], extra: &[S]) -> Vec<S> {
    let mut pts: Vec<S> = curves
        .iter()
        .flat_map(|c| c.breakpoints.iter().copied())
        .chain(extra.iter().copied())
        .chain(std::iter::once(S::zero()))
        .collect();
    pts.sort_by(cmp);
    pts.dedup();
    let mut grid = Vec::with_capacity(pts.len() * 2);
    for w in pts.windows(2) {
        grid.push(w[0]);
        grid.push((w[0] + w[1]) / S::two());
    }
    grid.extend(pts.last());
    grid
}
