//! Right-censored observations and their ordering.
//!
//! Ties are resolved by ordering, not by perturbing ages: at equal ages
//! observed failures come before censorings, and otherwise input order is
//! kept. This reproduces the usual Kaplan-Meier convention that deaths at
//! `t` are counted before censorings at `t`. Stored ages stay bit-identical
//! to the input.

use std::cmp::Ordering;
use std::io::Read;

use crate::{Error, Result, Scalar};

/// One subject: its last observed age and whether a failure was observed there.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObservedUnit<S: Scalar = f64> {
    pub age: S,
    /// `true` for an observed failure, `false` for right censoring.
    pub event: bool,
}

impl<S: Scalar> ObservedUnit<S> {
    pub fn new(age: S, event: bool) -> Self {
        ObservedUnit { age, event }
    }

    pub fn failed(age: S) -> Self {
        ObservedUnit { age, event: true }
    }

    pub fn censored(age: S) -> Self {
        ObservedUnit { age, event: false }
    }
}

/// Units in effective order: ages non-decreasing, ties ordered failure-first
/// and then by input position, so that position alone gives a strict order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Population<S: Scalar = f64> {
    units: Vec<ObservedUnit<S>>,
}

pub(crate) fn effective_order<S: Scalar>(a: &ObservedUnit<S>, b: &ObservedUnit<S>) -> Ordering {
    a.age
        .partial_cmp(&b.age)
        .unwrap_or(Ordering::Equal)
        // failures (true) first
        .then_with(|| b.event.cmp(&a.event))
}

impl<S: Scalar> Population<S> {
    /// Sorts `units` into effective order. Ages must be `>= 0`; NaN is rejected.
    pub fn new(mut units: Vec<ObservedUnit<S>>) -> Result<Self> {
        if let Some(bad) = units.iter().position(|u| !u.age.is_non_negative()) {
            return Err(Error::domain(format!(
                "unit {} has invalid age {:?}; ages must be >= 0",
                bad + 1,
                units[bad].age
            )));
        }
        // stable sort keeps input order among equal keys
        units.sort_by(effective_order);
        Ok(Population { units })
    }

    pub fn empty() -> Self {
        Population { units: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }

    pub fn units(&self) -> &[ObservedUnit<S>] {
        &self.units
    }

    /// 1-based access, matching the unit numbering used throughout the crate.
    pub fn unit(&self, j: usize) -> Result<&ObservedUnit<S>> {
        self.check_index(j)?;
        Ok(&self.units[j - 1])
    }

    pub fn ages(&self) -> impl Iterator<Item = S> + '_ {
        self.units.iter().map(|u| u.age)
    }

    pub fn failures(&self) -> usize {
        self.units.iter().filter(|u| u.event).count()
    }

    pub fn censored(&self) -> usize {
        self.len() - self.failures()
    }

    pub fn last_age(&self) -> Option<S> {
        self.units.last().map(|u| u.age)
    }

    /// Units `j+1..=n`, still in effective order. `tail(n)` is empty.
    pub fn tail(&self, j: usize) -> Result<Population<S>> {
        self.check_index(j)?;
        Ok(Population {
            units: self.units[j..].to_vec(),
        })
    }

    /// New population with `unit` placed in front. The unit must not come
    /// after the current first unit in effective order.
    pub fn prepend(&self, unit: ObservedUnit<S>) -> Result<Population<S>> {
        if !unit.age.is_non_negative() {
            return Err(Error::domain(format!("invalid age {:?}", unit.age)));
        }
        if let Some(first) = self.units.first() {
            if effective_order(&unit, first) == Ordering::Greater {
                return Err(Error::domain(
                    "prepended unit must not follow the first unit in effective order",
                ));
            }
        }
        let mut units = Vec::with_capacity(self.len() + 1);
        units.push(unit);
        units.extend_from_slice(&self.units);
        Ok(Population { units })
    }

    pub(crate) fn check_index(&self, j: usize) -> Result<()> {
        if j == 0 || j > self.units.len() {
            return Err(Error::IndexOutOfRange {
                index: j,
                len: self.units.len(),
            });
        }
        Ok(())
    }
}

/// Parses `time,event` CSV text. Row order is preserved; no sorting happens here.
pub fn ingest_csv(text: &str) -> Result<Vec<ObservedUnit<f64>>> {
    read_units(text.as_bytes())
}

pub fn read_units<R: Read>(reader: R) -> Result<Vec<ObservedUnit<f64>>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);

    let header = rdr.headers().map_err(|e| Error::Parse {
        line: 1,
        message: e.to_string(),
    })?;
    if header.len() != 2 || &header[0] != "time" || &header[1] != "event" {
        return Err(Error::Parse {
            line: 1,
            message: format!(
                "expected header `time,event`, found `{}`",
                header.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }

    let mut units = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let time: f64 = record[0].trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid time `{}`", &record[0]),
        })?;
        if !time.is_finite() {
            return Err(Error::Parse {
                line,
                message: format!("time must be finite, found `{}`", &record[0]),
            });
        }
        let event = match &record[1] {
            "1" => true,
            "0" => false,
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("event must be 0 or 1, found `{other}`"),
                })
            }
        };
        if time < 0.0 {
            return Err(Error::domain(format!("line {line}: negative time {time}")));
        }
        if time == 0.0 && event {
            return Err(Error::domain(format!(
                "line {line}: a failure cannot be observed at age 0"
            )));
        }
        units.push(ObservedUnit::new(time, event));
    }
    Ok(units)
}

/// Writes units as `time,event` CSV, the same schema [`ingest_csv`] reads.
pub fn write_csv<S: Scalar>(units: &[ObservedUnit<S>]) -> String {
    let mut out = String::from("time,event\n");
    for u in units {
        // `{:?}` on f64 is the shortest round-tripping representation
        out.push_str(&format!("{:?},{}\n", u.age.to_f64(), u8::from(u.event)));
    }
    out
}
