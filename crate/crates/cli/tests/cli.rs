use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_kmdecomp");
const GRANULAR: &str = "time,event\n1,0\n2,1\n3,0\n4,1\n5,1\n6,0\n";

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env_remove("KMDECOMP_TOL")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, content).unwrap();
    p
}

/// series -> [(tau, value)]
fn parse_records(csv: &str) -> BTreeMap<String, Vec<(f64, f64)>> {
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("series,tau,value"));
    let mut out: BTreeMap<String, Vec<(f64, f64)>> = BTreeMap::new();
    for line in lines {
        let f: Vec<&str> = line.split(',').collect();
        out.entry(f[0].to_string())
            .or_default()
            .push((f[1].parse().unwrap(), f[2].parse().unwrap()));
    }
    out
}

#[test]
fn estimate_granular_example() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.csv", GRANULAR);
    let o = run(&["estimate", "--input", input.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let recs = parse_records(&stdout(&o));
    let km = &recs["km"];
    let want = [
        (0.0, 0.0),
        (2.0, 0.2),
        (4.0, 7.0 / 15.0),
        (5.0, 11.0 / 15.0),
    ];
    assert_eq!(km.len(), want.len());
    for ((t, v), (wt, wv)) in km.iter().zip(want) {
        assert_eq!(*t, wt);
        assert!((v - wv).abs() < 1e-11);
    }
}

#[test]
fn estimate_json_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.csv", GRANULAR);
    let out = dir.path().join("km.json");
    let o = run(&[
        "estimate",
        "-i",
        input.to_str().unwrap(),
        "-o",
        out.to_str().unwrap(),
        "--format",
        "json",
    ]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    let arr = v.as_array().unwrap();
    assert_eq!(arr.len(), 4);
    assert_eq!(arr[2]["series"], "km");
    assert_eq!(arr[2]["tau"], 4.0);
    assert_eq!(arr[2]["value"], 0.466666666667);
}

#[test]
fn estimate_on_uniform_grid() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.csv", GRANULAR);
    let o = run(&[
        "estimate",
        "-i",
        input.to_str().unwrap(),
        "--grid",
        "0:6:0.5",
    ]);
    let km = &parse_records(&stdout(&o))["km"];
    assert_eq!(km.len(), 13);
    assert_eq!(km[3], (1.5, 0.0));
    assert_eq!(km[4], (2.0, 0.2));
}

#[test]
fn estimate_errors() {
    let dir = tempfile::tempdir().unwrap();
    let empty = write(dir.path(), "e.csv", "time,event\n");
    let o = run(&["estimate", "-i", empty.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("empty population"));

    let malformed = write(dir.path(), "m.csv", "time,event\n1,1\n2,x\n");
    let o = run(&["estimate", "-i", malformed.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("line 3"));

    let negative = write(dir.path(), "n.csv", "time,event\n-1,1\n");
    assert_eq!(
        run(&["estimate", "-i", negative.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );

    let missing = dir.path().join("nope.csv");
    assert_eq!(
        run(&["estimate", "-i", missing.to_str().unwrap()])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn estimate_all_censored() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "c.csv", "time,event\n1,0\n2,0\n3,0\n");
    let o = run(&["estimate", "-i", input.to_str().unwrap()]);
    let recs = parse_records(&stdout(&o));
    assert_eq!(recs.len(), 1);
    assert!(recs["km"].iter().all(|&(_, v)| v == 0.0));
}

#[test]
fn decompose_granular_example() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.csv", GRANULAR);
    let o = run(&["decompose", "-i", input.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let recs = parse_records(&stdout(&o));
    for j in 1..=6 {
        assert!(recs.contains_key(&format!("unit_{j}")));
        assert!(recs.contains_key(&format!("layer_{j}")));
    }
    assert!(recs.contains_key("empirical_part") && recs.contains_key("predicted_part"));
    let sum_check = recs["sum_check"][0].1;
    assert!(sum_check <= 1e-12);
    assert!(recs["unit_6"].iter().all(|&(_, v)| v == 0.0));
    assert_eq!(recs["unit_1"], recs["km"]);
    assert_eq!(recs["layer_6"], recs["km"]);
    // default grid contains breakpoints and midpoints
    let taus: Vec<f64> = recs["km"].iter().map(|r| r.0).collect();
    assert!(taus.contains(&3.0) && taus.contains(&4.5) && taus.contains(&6.0));
}

#[test]
fn simulate_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let oa = run(&["simulate", "-o", a.to_str().unwrap()]);
    let ob = run(&["simulate", "-o", b.to_str().unwrap()]);
    assert!(oa.status.success() && ob.status.success());
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert_eq!(text.lines().count(), 101);
    assert!(stderr(&oa).contains("simulated 100 units"));

    let est = run(&["estimate", "-i", a.to_str().unwrap()]);
    assert!(est.status.success());
    let km = &parse_records(&stdout(&est))["km"];
    assert!(km.windows(2).all(|w| w[0].0 < w[1].0 && w[0].1 <= w[1].1));
    assert!(km.iter().all(|&(_, v)| (0.0..=1.0).contains(&v)));
}

#[test]
fn simulate_without_censoring_and_bad_parameters() {
    let o = run(&["simulate", "--censor-scale", "1e9", "--seed", "3"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains(", 0 censored"), "{}", stderr(&o));
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",1")));

    assert_eq!(run(&["simulate", "--n", "0"]).status.code(), Some(4));
    assert_eq!(
        run(&["simulate", "--failure-shape=-1"]).status.code(),
        Some(4)
    );
}

#[test]
fn verify_passes_and_self_test_fails() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.csv", GRANULAR);
    let o = run(&["verify", "-i", input.to_str().unwrap()]);
    assert!(o.status.success(), "{}{}", stdout(&o), stderr(&o));
    let out = stdout(&o);
    for name in [
        "sum_identity",
        "redistribution",
        "consistency",
        "fixed_point",
    ] {
        assert!(
            out.lines()
                .any(|l| l.starts_with(name) && l.ends_with("PASS")),
            "{out}"
        );
    }

    let o = run(&["verify", "-i", input.to_str().unwrap(), "--self-test"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("sum_identity"));
    assert!(stdout(&o)
        .lines()
        .any(|l| l.starts_with("sum_identity") && l.ends_with("FAIL")));
}

#[test]
fn verify_tolerance_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.csv", GRANULAR);
    let o = Command::new(BIN)
        .args(["verify", "-i", input.to_str().unwrap()])
        .env("KMDECOMP_TOL", "0.5")
        .output()
        .unwrap();
    assert!(stdout(&o).contains("tolerance=0.5"));
    let o = Command::new(BIN)
        .args(["verify", "-i", input.to_str().unwrap()])
        .env("KMDECOMP_TOL", "bogus")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn plotdata_styles() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.csv", GRANULAR);
    let inp = input.to_str().unwrap();

    let stacked = parse_records(&stdout(&run(&[
        "plotdata", "-i", inp, "--style", "stacked",
    ])));
    assert_eq!(stacked.len(), 6);
    let decomposed = parse_records(&stdout(&run(&["decompose", "-i", inp])));
    assert_eq!(stacked["layer_6"], decomposed["km"]);

    let split = parse_records(&stdout(&run(&["plotdata", "-i", inp, "--style", "split"])));
    assert_eq!(
        split.keys().collect::<Vec<_>>(),
        vec!["empirical_part", "predicted_part"]
    );
    let at6 = |s: &str| split[s].iter().find(|r| r.0 == 6.0).unwrap().1;
    assert!((at6("empirical_part") - 0.5).abs() < 1e-11);
    assert!((at6("predicted_part") - 7.0 / 30.0).abs() < 1e-11);

    let km = run(&["plotdata", "-i", inp, "--style", "km"]);
    let est = run(&["estimate", "-i", inp]);
    assert_eq!(stdout(&km), stdout(&est));

    let units = parse_records(&stdout(&run(&["plotdata", "-i", inp, "--style", "units"])));
    assert_eq!(units.len(), 6);

    assert_ne!(
        run(&["plotdata", "-i", inp, "--style", "nonsense"])
            .status
            .code(),
        Some(0)
    );
}

#[test]
fn plotdata_svg() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(dir.path(), "g.csv", GRANULAR);
    for style in ["km", "stacked", "split", "units"] {
        let out = dir.path().join(format!("{style}.svg"));
        let o = run(&[
            "plotdata",
            "-i",
            input.to_str().unwrap(),
            "-o",
            out.to_str().unwrap(),
            "--style",
            style,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        let svg = std::fs::read_to_string(out).unwrap();
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    }
    let stacked = std::fs::read_to_string(dir.path().join("stacked.svg")).unwrap();
    assert_eq!(stacked.matches("<polygon").count(), 6);
    assert!(stacked.contains("#d62728") && stacked.contains("#1f77b4"));

    let o = run(&["estimate", "-i", input.to_str().unwrap(), "--format", "svg"]);
    assert_eq!(o.status.code(), Some(4));
}
