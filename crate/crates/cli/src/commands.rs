use std::fmt;
use std::fs;

use anyhow::{bail, Context};
use kmdecomp::decomposition::{decompose as decompose_population, iterate_fixed_point};
use kmdecomp::estimator::{km_product, unit_step};
use kmdecomp::population::{read_units, write_csv};
use kmdecomp::simulation::simulate_population;
use kmdecomp::verify::{verify_decomposition, Tolerances, VerifyReport};
use kmdecomp::{Population, SimConfig, StepFunction, UnitDecomposition, WeibullSpec};

use crate::output::{fmt_sig, to_csv, to_json, CurveRecord};
use crate::svg::{self, Band, Line, Plot};
use crate::{Format, InputArgs, OutputArgs, Style, EXIT_DOMAIN, EXIT_IO, EXIT_PARSE, EXIT_VERIFY};

/// Verification tolerance override for the 1e-12 identities.
pub const TOL_ENV: &str = "KMDECOMP_TOL";
const FIXED_POINT_MAX_ITERATIONS: usize = 1000;
const FIXED_POINT_TOL: f64 = 1e-10;

#[derive(Debug)]
pub struct VerificationFailed(pub Vec<&'static str>);

impl fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "verification failed: {}", self.0.join(", "))
    }
}

impl std::error::Error for VerificationFailed {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return EXIT_VERIFY;
    }
    match err.downcast_ref::<kmdecomp::Error>() {
        Some(kmdecomp::Error::Parse { .. }) => EXIT_PARSE,
        Some(_) => EXIT_DOMAIN,
        None => EXIT_IO,
    }
}

fn load(input: &InputArgs) -> anyhow::Result<Population> {
    let file = fs::File::open(&input.input)
        .with_context(|| format!("cannot open {}", input.input.display()))?;
    let units = read_units(file)?;
    Ok(Population::new(units)?)
}

fn load_nonempty(input: &InputArgs) -> anyhow::Result<Population> {
    let pop = load(input)?;
    if pop.is_empty() {
        return Err(kmdecomp::Error::Domain("empty population".into()).into());
    }
    Ok(pop)
}

fn emit(output: &OutputArgs, content: &str) -> anyhow::Result<()> {
    match &output.output {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("cannot write {}", path.display()))
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn encode(records: &[CurveRecord], format: Format) -> anyhow::Result<String> {
    match format {
        Format::Csv => Ok(to_csv(records)),
        Format::Json => Ok(to_json(records)?),
        Format::Svg => bail!(kmdecomp::Error::Domain(
            "svg output is only available from plotdata".into()
        )),
    }
}

/// Parses `start:stop:step` into an inclusive uniform grid.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>, kmdecomp::Error> {
    let bad = |msg: &str| kmdecomp::Error::Domain(format!("grid `{spec}`: {msg}"));
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(bad("expected start:stop:step"));
    }
    let nums = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad("not a number")))
        .collect::<Result<Vec<_>, _>>()?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(start >= 0.0 && stop >= start && stop.is_finite()) {
        return Err(bad("need 0 <= start <= stop"));
    }
    if step.is_nan() || step <= 0.0 {
        return Err(bad("step must be > 0"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    if count > 10_000_000 {
        return Err(bad("too many grid points"));
    }
    Ok((0..=count).map(|k| start + k as f64 * step).collect())
}

fn grid_or(grid: Option<&str>, default: impl FnOnce() -> Vec<f64>) -> anyhow::Result<Vec<f64>> {
    Ok(match grid {
        Some(spec) => parse_grid(spec)?,
        None => default(),
    })
}

/// `0` followed by the breakpoints of `f`.
fn breakpoint_grid(f: &StepFunction) -> Vec<f64> {
    let mut grid = vec![0.0];
    grid.extend(f.breakpoints().iter().copied().filter(|&b| b > 0.0));
    grid
}

fn sample(series: &str, f: &StepFunction, grid: &[f64]) -> Vec<CurveRecord> {
    grid.iter()
        .map(|&t| CurveRecord::new(series, t, f.value_at(t)))
        .collect()
}

pub fn estimate(
    input: &InputArgs,
    output: &OutputArgs,
    format: Format,
    grid: Option<&str>,
) -> anyhow::Result<()> {
    let pop = load_nonempty(input)?;
    let km = km_product(&pop);
    let grid = grid_or(grid, || breakpoint_grid(&km))?;
    let records = sample("km", &km, &grid);
    emit(output, &encode(&records, format)?)
}

/// Prefix sums `(1/n) * sum_{j <= m} G_j` as step functions, `m = 1..=n`.
fn layer_curves(d: &UnitDecomposition) -> Vec<StepFunction> {
    let w = d.weight();
    let mut acc = StepFunction::zero();
    d.unit_curves()
        .iter()
        .map(|c| {
            acc = acc.add(&c.scale(w));
            acc.clone()
        })
        .collect()
}

fn decomposition_records(
    d: &UnitDecomposition,
    grid: &[f64],
) -> anyhow::Result<(Vec<CurveRecord>, f64)> {
    let km = km_product(d.population());
    let agg = d.aggregate();
    let mut records = sample("km", &km, grid);
    for (j, c) in d.unit_curves().iter().enumerate() {
        records.extend(sample(&format!("unit_{}", j + 1), c, grid));
    }
    let rows = d.stacked(grid)?;
    for m in 0..d.len() {
        let series = format!("layer_{}", m + 1);
        records.extend(
            rows.iter()
                .map(|row| CurveRecord::new(series.clone(), row.tau, row.layers[m])),
        );
    }
    let split = d.split();
    records.extend(sample("empirical_part", &split.empirical_part, grid));
    records.extend(sample("predicted_part", &split.predicted_part, grid));

    let check_grid = kmdecomp::evaluation_grid(&[&km, &agg], &d.grid());
    let sum_check = agg.max_abs_diff_on(&km, &check_grid);
    let last = grid.last().copied().unwrap_or(0.0);
    records.push(CurveRecord::new("sum_check", last, sum_check));
    Ok((records, sum_check))
}

pub fn decompose(
    input: &InputArgs,
    output: &OutputArgs,
    format: Format,
    grid: Option<&str>,
) -> anyhow::Result<()> {
    let pop = load_nonempty(input)?;
    let d = decompose_population(&pop)?;
    let grid = grid_or(grid, || d.grid())?;
    let (records, sum_check) = decomposition_records(&d, &grid)?;
    emit(output, &encode(&records, format)?)?;
    eprintln!("sum_check={}", fmt_sig(sum_check));
    Ok(())
}

pub fn simulate(
    n: usize,
    failure: (f64, f64),
    censoring: (f64, f64),
    seed: u64,
    output: &OutputArgs,
) -> anyhow::Result<()> {
    let cfg = SimConfig {
        n,
        failure: WeibullSpec::new(failure.0, failure.1)?,
        censoring: WeibullSpec::new(censoring.0, censoring.1)?,
        seed,
    };
    let sim = simulate_population(&cfg)?;
    emit(output, &write_csv(sim.population.units()))?;
    eprintln!(
        "simulated {} units: {} failed, {} censored",
        sim.population.len(),
        sim.population.failures(),
        sim.population.censored()
    );
    Ok(())
}

fn tolerances() -> anyhow::Result<Tolerances<f64>> {
    let mut tol = Tolerances::default();
    if let Ok(raw) = std::env::var(TOL_ENV) {
        let value: f64 = raw
            .trim()
            .parse()
            .ok()
            .filter(|v: &f64| *v >= 0.0 && v.is_finite())
            .ok_or_else(|| {
                kmdecomp::Error::Domain(format!("{TOL_ENV}=`{raw}` is not a non-negative number"))
            })?;
        tol.identity = value;
    }
    Ok(tol)
}

/// Damages one unit curve while keeping it a sub-CDF.
fn corrupt(d: UnitDecomposition) -> anyhow::Result<UnitDecomposition> {
    let pop = d.population().clone();
    let last = pop.last_age().unwrap_or(0.0);
    let mut curves = d.into_curves();
    let target = curves
        .iter()
        .position(|c| c.final_value() > 0.0)
        .unwrap_or(0);
    let c = &curves[target];
    curves[target] = if c.final_value() > 0.0 {
        c.scale(0.5)
    } else {
        c.add(&unit_step(last).scale(0.5))
    };
    eprintln!("self-test: corrupted unit_{}", target + 1);
    Ok(UnitDecomposition::from_curves(pop, curves)?)
}

fn print_report(report: &VerifyReport<f64>) {
    for check in &report.checks {
        let dev = check.deviation.map_or_else(|| "n/a".to_string(), fmt_sig);
        let status = if check.passed() { "PASS" } else { "FAIL" };
        print!(
            "{:<16} max_deviation={:<20} tolerance={:<8} {}",
            check.identity.name(),
            dev,
            fmt_sig(check.tolerance),
            status
        );
        match &check.error {
            Some(e) => println!(" ({e})"),
            None => println!(),
        }
    }
}

pub fn verify(input: &InputArgs, self_test: bool) -> anyhow::Result<()> {
    let tol = tolerances()?;
    let pop = load_nonempty(input)?;
    let mut d = decompose_population(&pop)?;
    if self_test {
        d = corrupt(d)?;
    }
    let report = verify_decomposition(&d, tol);
    println!(
        "population: {} units, {} failed, {} censored",
        pop.len(),
        pop.failures(),
        pop.censored()
    );
    print_report(&report);

    if !self_test {
        // informational: iterate the self-consistency map from the observed failures alone
        let start = pop
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
        match iterate_fixed_point(start, &pop, FIXED_POINT_MAX_ITERATIONS, FIXED_POINT_TOL) {
            Ok(run) => {
                let dist = run
                    .curves
                    .iter()
                    .zip(d.unit_curves())
                    .fold(0.0f64, |m, (a, b)| m.max(a.sup_distance(b)));
                println!(
                    "iteration from observed failures: {} after {} steps, distance to unit family {}",
                    if run.converged { "converged" } else { "not converged" },
                    run.iterations,
                    fmt_sig(dist)
                );
            }
            Err(e) => println!("iteration from observed failures: stopped ({e})"),
        }
    }

    let failed: Vec<&'static str> = report.failed().map(|c| c.identity.name()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(VerificationFailed(failed).into())
    }
}

fn layer_fill(event: bool) -> &'static str {
    if event {
        svg::FAILED_FILL
    } else {
        svg::CENSORED_FILL
    }
}

pub fn plotdata(
    input: &InputArgs,
    output: &OutputArgs,
    style: Style,
    format: Option<Format>,
    grid: Option<&str>,
) -> anyhow::Result<()> {
    let format = format.unwrap_or_else(|| match &output.output {
        Some(p) if p.extension().is_some_and(|e| e.eq_ignore_ascii_case("svg")) => Format::Svg,
        _ => Format::Csv,
    });
    let pop = load_nonempty(input)?;
    let km = km_product(&pop);
    let d = decompose_population(&pop)?;

    if format == Format::Svg {
        let x_max = pop.last_age().unwrap_or(1.0) * 1.05;
        let layers = layer_curves(&d);
        let split = d.split();
        let total = split.total();
        let zero = StepFunction::zero();
        let km_line = || Line {
            curve: &km,
            stroke: "black",
            label: "km".into(),
        };
        let (title, bands, lines) = match style {
            Style::Km => ("Kaplan-Meier estimate", vec![], vec![km_line()]),
            Style::Stacked => {
                let bands = layers
                    .iter()
                    .enumerate()
                    .map(|(m, upper)| Band {
                        lower: if m == 0 { &zero } else { &layers[m - 1] },
                        upper,
                        fill: layer_fill(pop.units()[m].event),
                        label: format!("unit_{}", m + 1),
                    })
                    .collect();
                ("Stacked unit contributions", bands, vec![km_line()])
            }
            Style::Split => {
                let bands = vec![
                    Band {
                        lower: &zero,
                        upper: &split.empirical_part,
                        fill: svg::FAILED_FILL,
                        label: "empirical_part".into(),
                    },
                    Band {
                        lower: &split.empirical_part,
                        upper: &total,
                        fill: svg::CENSORED_FILL,
                        label: "predicted_part".into(),
                    },
                ];
                (
                    "Empirical and predicted contributions",
                    bands,
                    vec![km_line()],
                )
            }
            Style::Units => {
                let lines = d
                    .unit_curves()
                    .iter()
                    .zip(pop.units())
                    .enumerate()
                    .map(|(j, (c, u))| Line {
                        curve: c,
                        stroke: layer_fill(u.event),
                        label: format!("unit_{}", j + 1),
                    })
                    .collect();
                ("Unit-level estimators", vec![], lines)
            }
        };
        let svg = svg::render(&Plot {
            title: title.into(),
            x_max,
            bands,
            lines,
        });
        return emit(output, &svg);
    }

    let records: Vec<CurveRecord> = match style {
        Style::Km => {
            let grid = grid_or(grid, || breakpoint_grid(&km))?;
            sample("km", &km, &grid)
        }
        Style::Stacked => {
            let grid = grid_or(grid, || d.grid())?;
            let rows = d.stacked(&grid)?;
            (0..d.len())
                .flat_map(|m| {
                    let series = format!("layer_{}", m + 1);
                    rows.iter()
                        .map(move |row| CurveRecord::new(series.clone(), row.tau, row.layers[m]))
                })
                .collect()
        }
        Style::Split => {
            let grid = grid_or(grid, || d.grid())?;
            let split = d.split();
            let mut records = sample("empirical_part", &split.empirical_part, &grid);
            records.extend(sample("predicted_part", &split.predicted_part, &grid));
            records
        }
        Style::Units => {
            let grid = grid_or(grid, || d.grid())?;
            d.unit_curves()
                .iter()
                .enumerate()
                .flat_map(|(j, c)| sample(&format!("unit_{}", j + 1), c, &grid))
                .collect()
        }
    };
    emit(output, &encode(&records, format)?)
}
