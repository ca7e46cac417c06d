use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use dispersal_cli::{Experiment, ExperimentConfig};
use tempfile::TempDir;

fn run(sub: &str, config: &str, dir: &Path) -> Output {
    let path = dir.join("exp.cfg");
    fs::write(&path, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_dispersal"))
        .args([sub, "--config", path.to_str().unwrap(), "--out", dir.join("out").to_str().unwrap(), "--jobs", "1"])
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const CONVERGE_B: &str = "\
# space-free coefficient: every principal value equals its time average
bc = neumann
domain = interval(0, 1)
h = 1/64
dt = 1/128
deltas = 0.4, 0.25, 0.125
coefficient = time-sine(0.5, 1)
";

#[test]
fn converge_b_neumann_space_free_gaps_vanish() {
    let dir = TempDir::new().unwrap();
    let o = run("converge-b", CONVERGE_B, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("out/report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("delta,lambda_delta,lambda_r,abs_gap,pev_criterion"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 3);
    for row in rows {
        let gap: f64 = row.split(',').nth(3).unwrap().parse().unwrap();
        assert!(gap <= 1e-7, "{row}");
    }
}

#[test]
fn coarse_spacing_is_rejected_citing_the_rule() {
    let dir = TempDir::new().unwrap();
    let cfg = "\
bc = neumann
domain = interval(0, 1)
h = 0.1
dt = 0.01
deltas = 0.2
initial = cos(3.14)
reaction = zero
";
    let o = run("converge-a", cfg, dir.path());
    assert_eq!(o.status.code(), Some(2));
    let msg = stderr(&o);
    assert!(msg.contains("'h'") && msg.contains("h <= min(deltas)/8"), "{msg}");
}

#[test]
fn negative_growth_fails_h2_with_lambda() {
    let dir = TempDir::new().unwrap();
    let cfg = "\
bc = neumann
kind = nonlocal
domain = interval(0, 1)
h = 1/32
dt = 1/256
delta = 0.2
reaction = logistic(const(-1))
";
    let o = run("kpp-orbit", cfg, dir.path());
    assert_eq!(o.status.code(), Some(3));
    let msg = stderr(&o);
    assert!(msg.contains("(H2)"), "{msg}");
    // constants are eigenfunctions under Neumann, so λ = −1
    let lambda: f64 = msg
        .split("principal value ")
        .nth(1)
        .and_then(|s| s.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!((lambda + 1.0).abs() <= 1e-8, "{lambda}");
}

const SIMULATE: &str = "\
experiment = simulate
bc = dirichlet
kind = nonlocal
kernel = mollifier
domain = interval(0, 1)
h = 1/64
dt = 1/100
delta = 0.125
T = 1
horizon = 0.5
initial = poly-bump
reaction = logistic(tx-product(1, 0.5, 3))
snapshots = 5
";

const SPECTRUM: &str = "\
bc = periodic
kind = local
domain = cell(2*pi)
h = 2*pi/64
dt = 1/64
coefficient = space-cosine(0.2, 1, 1)
";

#[test]
fn outputs_are_bitwise_deterministic() {
    for (sub, cfg, files) in [
        ("simulate", SIMULATE, vec!["snapshot_000.csv", "snapshot_005.csv", "run.txt"]),
        ("spectrum", SPECTRUM, vec!["spectrum.csv", "eigenfunction.csv", "run.txt"]),
        ("converge-b", CONVERGE_B, vec!["report.csv", "run.txt"]),
    ] {
        let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
        let (oa, ob) = (run(sub, cfg, a.path()), run(sub, cfg, b.path()));
        assert!(oa.status.success() && ob.status.success(), "{sub}: {}", stderr(&oa));
        for f in files {
            let x = fs::read(a.path().join("out").join(f)).unwrap();
            let y = fs::read(b.path().join("out").join(f)).unwrap();
            assert!(!x.is_empty() && x == y, "{sub}/{f}");
        }
    }
}

#[test]
fn simulate_writes_every_snapshot() {
    let dir = TempDir::new().unwrap();
    let o = run("simulate", SIMULATE, dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    for k in 0..=5 {
        let csv = fs::read_to_string(dir.path().join(format!("out/snapshot_{k:03}.csv"))).unwrap();
        assert_eq!(csv.lines().next(), Some("x,value"));
        // 65 nodes of [0, 1], no ghost nodes
        assert_eq!(csv.lines().count(), 66);
        for line in csv.lines().skip(1) {
            let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
            assert!((0.0..=1.0).contains(&v), "{line}");
        }
    }
}

#[test]
fn summary_reparses_to_the_same_config() {
    let experiments = [
        (Experiment::Simulate, "simulate", SIMULATE),
        (Experiment::Spectrum, "spectrum", SPECTRUM),
        (Experiment::ConvergeB, "converge-b", CONVERGE_B),
    ];
    for (exp, sub, cfg) in experiments {
        let dir = TempDir::new().unwrap();
        assert!(run(sub, cfg, dir.path()).status.success());
        let echoed = fs::read_to_string(dir.path().join("out/run.txt")).unwrap();
        let original = ExperimentConfig::parse(cfg, exp).unwrap();
        let reparsed = ExperimentConfig::parse(&echoed, exp).unwrap();
        assert_eq!(original, reparsed, "{sub}");
        assert!(echoed.lines().any(|l| l.starts_with("# ")));
    }
}

#[test]
fn validation_errors_name_the_key() {
    let cases = [
        ("spectrum", SPECTRUM.replace("coefficient", "coeficient"), "coeficient"),
        ("spectrum", SPECTRUM.replace("space-cosine", "space-cos"), "coefficient"),
        ("spectrum", SPECTRUM.replace("kind = local", "kind = nonlocal"), "delta"),
        ("spectrum", SPECTRUM.replace("bc = periodic", "bc = neumann"), "bc"),
        ("spectrum", SPECTRUM.replace("dt = 1/64", "dt = -1"), "dt"),
        ("spectrum", format!("{SPECTRUM}h = 1\n"), "h"),
        ("spectrum", SIMULATE.to_string(), "experiment"),
        ("kpp-orbit", SIMULATE.replace("experiment = simulate\n", "").replace("logistic", "linear"), "reaction"),
        ("converge-b", CONVERGE_B.replace("0.4, 0.25", "0.25, 0.4"), "deltas"),
    ];
    for (sub, cfg, key) in cases {
        let dir = TempDir::new().unwrap();
        let o = run(sub, &cfg, dir.path());
        assert_eq!(o.status.code(), Some(2), "{key}: {}", stderr(&o));
        assert!(stderr(&o).contains(&format!("'{key}'")), "{key}: {}", stderr(&o));
    }
}

#[test]
fn missing_config_file_is_an_io_error() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_dispersal"))
        .args(["spectrum", "--config", dir.path().join("nope.cfg").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}
