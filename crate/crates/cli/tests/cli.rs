use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rectvis"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, body).unwrap();
    p
}

const E1: &str = "1\t1\tR\n2\t2\tB\n3\t3\tR\n";
const E2: &str = "# two reds hidden behind a third\n1\t2\tR\n2\t1\tR\n4\t6\tR\n5\t10\tB\n";

fn report(args: &[&str]) -> Value {
    let mut all = args.to_vec();
    all.extend(["--json", "-"]);
    let out = run(&all);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn points_on_e2() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e2.txt", E2);
    for solver in ["oracle", "sweep", "optimal"] {
        let r = report(&["points", "--solver", solver, s(&f)]);
        assert_eq!(r["participating"], serde_json::json!([2, 3]), "{solver}");
        assert_eq!(r["schema"], 1);
        assert_eq!(r["solver"], solver);
    }
    let out = run(&["points", "--solver=optimal", s(&f)]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(
        text.starts_with("points (optimal): n = 4, 2 participating"),
        "{text}"
    );
}

#[test]
fn pairs_on_e1() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e1.txt", E1);
    let r = report(&["pairs", "--solver=sweep", s(&f)]);
    assert_eq!(r["pairs"], serde_json::json!([[0, 1], [1, 2]]));
    assert!(r["comparisons"].as_u64().unwrap() > 0);
    let r = report(&["pairs", "--solver=oracle", s(&f)]);
    assert!(r["comparisons"].is_null());
}

#[test]
fn solvers_agree_on_generated_files() {
    let dir = TempDir::new().unwrap();
    for (family, n, k) in [
        ("uniform", 60, 2),
        ("diag-clusters", 64, 4),
        ("threelines", 12, 2),
        ("two-halves", 40, 2),
    ] {
        for seed in 0..3 {
            let f = dir.path().join(format!("{family}-{seed}.txt"));
            let out = run(&[
                "gen",
                "--family",
                family,
                "--n",
                &n.to_string(),
                "--k",
                &k.to_string(),
                "--seed",
                &seed.to_string(),
                "-o",
                s(&f),
            ]);
            assert!(out.status.success());
            for cmd in ["points", "pairs"] {
                let answers: Vec<Value> = ["oracle", "sweep", "optimal"]
                    .iter()
                    .map(|solver| {
                        let r = report(&[cmd, "--solver", solver, s(&f)]);
                        serde_json::json!([r["participating"], r["pairs"]])
                    })
                    .collect();
                assert!(
                    answers.windows(2).all(|w| w[0] == w[1]),
                    "{family} {seed} {cmd}"
                );
            }
            let scan = report(&["points", "--emptiness=scan", "--delta=1", s(&f)]);
            let grid = report(&["points", s(&f)]);
            assert_eq!(scan["participating"], grid["participating"]);
        }
    }
}

#[test]
fn reports_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let f = dir.path().join("u.txt");
    assert!(run(&[
        "gen",
        "--family=uniform",
        "--n=300",
        "--seed=9",
        "-o",
        s(&f)
    ])
    .status
    .success());
    for cmd in ["points", "pairs", "entropy", "adversary"] {
        let strip = |mut v: Value| {
            v.as_object_mut().unwrap().remove("wall_ms");
            serde_json::to_string(&v).unwrap()
        };
        let a = strip(report(&[cmd, s(&f)]));
        let b = strip(report(&[cmd, s(&f)]));
        assert_eq!(a, b, "{cmd}");
    }
    let x = run(&["gen", "--family=uniform", "--n=50", "--seed=9"]).stdout;
    assert_eq!(
        x,
        run(&["gen", "--family=uniform", "--n=50", "--seed=9"]).stdout
    );
}

#[test]
fn json_file_and_digest() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e2.txt", E2);
    let j = dir.path().join("r.json");
    let out = run(&["points", s(&f), "--json", s(&j)]);
    assert!(out.status.success());
    assert!(!out.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&j).unwrap()).unwrap();
    assert_eq!(v["input_digest"], rectvis_cli::digest(E2.as_bytes()));
    assert!(v["rounds"].is_array());
}

#[test]
fn validation_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(&dir, "bad.txt", "1\t1\tR\n2\tx\tB\n");
    let out = run(&["points", s(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let color = write(&dir, "color.txt", "1\t1\tG\n");
    assert_eq!(run(&["points", s(&color)]).status.code(), Some(2));

    let tie = write(&dir, "tie.txt", "1\t1\tR\n1\t2\tB\n");
    assert_eq!(run(&["points", s(&tie)]).status.code(), Some(2));
    let r = report(&["points", "--dedupe-ties", s(&tie)]);
    assert_eq!(r["n"], 2);

    assert_eq!(
        run(&["gen", "--family=uniform", "--n=0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["gen", "--family=diag-clusters", "--n=10", "--k=4"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        run(&["gen", "--family=hexagons", "--n=10"]).status.code(),
        Some(2)
    );
    assert_eq!(run(&["points", "/nonexistent/file"]).status.code(), Some(2));
    let e1 = write(&dir, "e1.txt", E1);
    assert_eq!(
        run(&["adversary", "--solver=oracle", s(&e1)]).status.code(),
        Some(2)
    );
    assert_eq!(
        run(&["points", "--delta=-1", s(&e1)]).status.code(),
        Some(2)
    );
}

#[test]
fn gen_shapes() {
    let out = run(&["gen", "--family=threelines", "--n=2", "--seed=7"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let pts: Vec<(i64, i64, String)> = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            (
                f[0].parse().unwrap(),
                f[1].parse().unwrap(),
                f[2].to_string(),
            )
        })
        .collect();
    assert_eq!(pts.len(), 7);
    // the last point is red and dominates all others
    let (tx, ty, tc) = pts.last().unwrap().clone();
    assert_eq!(tc, "R");
    assert!(pts[..6].iter().all(|&(x, y, _)| x < tx && y < ty));
    // each line has slope -1: x + y constant per color among the first four
    let sums = |c: &str| -> Vec<i64> {
        pts[..4]
            .iter()
            .filter(|p| p.2 == c)
            .map(|p| p.0 + p.1)
            .collect()
    };
    for c in ["R", "B"] {
        let v = sums(c);
        assert_eq!(v.len(), 2);
        assert_eq!(v[0], v[1]);
    }
    assert!(sums("R")[0] > sums("B")[0]);
    // the low pair sits on a third parallel line below both
    assert_eq!(pts[4].0 + pts[4].1, pts[5].0 + pts[5].1);
    assert!(pts[4].0 + pts[4].1 < sums("B")[0]);

    let dir = TempDir::new().unwrap();
    let f = dir.path().join("d.txt");
    assert!(run(&[
        "gen",
        "--family=diag-clusters",
        "--n=16",
        "--k=4",
        "--seed=1",
        "-o",
        s(&f)
    ])
    .status
    .success());
    let r = report(&["points", "--solver=oracle", s(&f)]);
    // at most two participating points per cluster boundary
    assert!(r["h"].as_u64().unwrap() <= 6);
}

#[test]
fn entropy_and_adversary_reports() {
    let dir = TempDir::new().unwrap();
    let f = write(&dir, "e1.txt", E1);
    let r = report(&["entropy", s(&f)]);
    let e = &r["entropy"];
    assert!((e["H_pikd"].as_f64().unwrap() - 3f64.log2()).abs() < 1e-9);
    assert_eq!(e["pikd"]["above_lower_bound"], true);
    assert_eq!(e["exact_below_constructions"], true);

    let g = dir.path().join("g.txt");
    assert!(
        run(&["gen", "--family=uniform", "--n=40", "--seed=3", "-o", s(&g)])
            .status
            .success()
    );
    for solver in ["sweep", "optimal"] {
        let r = report(&["adversary", "--solver", solver, s(&g)]);
        let a = &r["adversary"];
        assert_eq!(a["replay_mismatches"], 0);
        assert_eq!(a["output_correct"], true);
        assert_eq!(a["chips_bound_holds"], true);
        assert_eq!(a["counters"]["invariant_violations"], 0);
        let mut sigma: Vec<u64> = a["sigma"]
            .as_array()
            .unwrap()
            .iter()
            .map(|v| v.as_u64().unwrap())
            .collect();
        sigma.sort_unstable();
        assert_eq!(sigma, (0..40).collect::<Vec<_>>());
    }
}

#[test]
fn bench_csv_columns() {
    let out = run(&[
        "bench",
        "--family=diag-clusters",
        "--n=4096",
        "--k=2,4,8,16,32",
    ]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("family,n,k,seed,solver,comparisons,h,H_pikd,nH1")
    );
    let rows: Vec<Vec<String>> = lines
        .map(|l| l.split(',').map(String::from).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    let hs: Vec<f64> = rows
        .iter()
        .step_by(2)
        .map(|r| r[7].parse().unwrap())
        .collect();
    assert!(hs.windows(2).all(|w| w[0] < w[1]), "{hs:?}");
    assert!(rows.iter().all(|r| r[5].parse::<u64>().unwrap() > 0));

    let out = run(&[
        "bench",
        "--family=threelines",
        "--n=64,128",
        "--solvers=optimal",
    ]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("threelines,131,0,0,optimal,"));
}
