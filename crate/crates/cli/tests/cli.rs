use std::path::{Path, PathBuf};

use serde_json::{json, Value};
use tempfile::TempDir;

use daugavet_cli::format::{report_from_json, CliScalar};
use daugavet_cli::run;
use daugavet_core::daugavet::daugavet_report;
use daugavet_core::models::{random_kernel, RandomClass};
use daugavet_core::{KernelOperator, Rational, Tolerance};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn daugavet(args: &[&str]) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("daugavet").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, body: &Value) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, serde_json::to_string(body).unwrap()).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_negative_identity() {
    let dir = TempDir::new().unwrap();
    let input = write(&dir, "m.json", &json!({"matrix": [[-1, 0], [0, -1]]}));
    let output = dir.path().join("report.json");
    let r = daugavet(&["check", "--input", s(&input), "--output", s(&output)]);
    assert_eq!(r.code, 1, "{}", r.err);
    assert!(r.out.contains("defect = 2\n"));
    assert!(r.out.contains("daugavet: fails"));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&output).unwrap()).unwrap();
    assert_eq!(report["tool"], "daugavet");
    assert_eq!(report["report"]["defect"], "2/1");
    assert_eq!(report["report"]["double_star"], false);
    assert_eq!(report["input"]["kernel"]["matrix"][0][0], json!(-1));
}

#[test]
fn check_positive_random_matrix() {
    let dir = TempDir::new().unwrap();
    let t = random_kernel::<f64>(RandomClass::Positive, 6, 99, 1.0);
    let input = write(
        &dir,
        "pos.json",
        &json!({"scalar": "float", "matrix": t.to_matrix()}),
    );
    let r = daugavet(&["check", "--input", s(&input)]);
    assert_eq!(r.code, 0, "{}", r.err);
    let report: Value = serde_json::from_str(&r.out).unwrap();
    assert_eq!(report["report"]["defect"].as_f64(), Some(0.0));
    assert_eq!(report["input"]["tol"].as_f64(), Some(1e-9));
}

#[test]
fn check_cos_spec_at_level_64() {
    // Row norms of this kernel are all equal at every level and some
    // self-atoms are positive, so the defect vanishes up to rounding.
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "cos.json",
        &json!({"scalar": "float", "spec": {"type": "density", "expr": "cos(pi*(s+t))"}}),
    );
    let r = daugavet(&["check", "--input", s(&input), "--level", "64"]);
    let report: Value = serde_json::from_str(&r.out).unwrap();
    let defect = report["report"]["defect"].as_f64().unwrap();
    assert!(defect <= 2.0 / 64.0);
    assert!(report["report"]["defect_bound"].is_number());
    assert_eq!(report["input"]["level"], 64);
    assert_eq!(r.code, 0);
    let missing = daugavet(&["check", "--input", s(&input)]);
    assert_eq!(missing.code, 2);
    assert!(missing.err.contains("--level"));
}

#[test]
fn exact_report_round_trips() {
    let dir = TempDir::new().unwrap();
    let t = random_kernel::<Rational>(RandomClass::RationalSigned, 5, 17, 1.0);
    let matrix: Vec<Vec<Value>> = t
        .to_matrix()
        .iter()
        .map(|row| row.iter().map(|x| x.to_json()).collect())
        .collect();
    let input = write(
        &dir,
        "q.json",
        &json!({"scalar": "exact", "matrix": matrix}),
    );
    let r = daugavet(&["check", "--input", s(&input)]);
    let report: Value = serde_json::from_str(&r.out).unwrap();
    let back = report_from_json::<Rational>(&report).unwrap();
    assert_eq!(back, daugavet_report(&t, Tolerance::exact()));
    assert_eq!(
        r.code,
        if back.defect == Rational::from_integer(0.into()) {
            0
        } else {
            1
        }
    );
}

#[test]
fn malformed_inputs_exit_two() {
    let dir = TempDir::new().unwrap();
    let bad_json = dir.path().join("bad.json");
    std::fs::write(&bad_json, "{\"matrix\": [[1, 2]").unwrap();
    let r = daugavet(&["check", "--input", s(&bad_json)]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("malformed JSON"), "{}", r.err);
    assert!(r.err.contains("line 1"), "{}", r.err);

    let bad_expr = write(
        &dir,
        "e.json",
        &json!({"scalar": "float", "spec": {"type": "density", "expr": "cos(s +"}}),
    );
    let r = daugavet(&["check", "--input", s(&bad_expr), "--level", "4"]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("syntax error at position"), "{}", r.err);

    let missing = dir.path().join("nope.json");
    assert_eq!(daugavet(&["check", "--input", s(&missing)]).code, 2);
    assert_eq!(
        daugavet(&["check", "--input", s(&bad_json), "--frobnicate"]).code,
        2
    );
    assert_eq!(daugavet(&[]).code, 2);
}

#[test]
fn help_exits_zero() {
    let r = daugavet(&["--help"]);
    assert_eq!(r.code, 0);
    assert!(r.out.contains("escalate"));
    assert_eq!(daugavet(&["refine", "--help"]).code, 0);
}

#[test]
fn refine_writes_csv() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "cos.json",
        &json!({"scalar": "float", "spec": {"type": "preset", "name": "cos-kernel"}}),
    );
    let csv = dir.path().join("out.csv");
    let r = daugavet(&[
        "refine",
        "--spec",
        s(&spec),
        "--levels",
        "16,64,256",
        "--csv",
        s(&csv),
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("decay exponent"));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(!text.contains('\r'));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "level,opnorm,defect,defect_bound,max_abs_diag");
    assert_eq!(lines.len(), 4);
    for (line, n) in lines[1..].iter().zip([16.0, 64.0, 256.0]) {
        let cols: Vec<f64> = line.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[0], n);
        assert!(cols[2] <= 2.0 / n);
    }
    let dual = daugavet(&["refine", "--spec", s(&spec), "--levels", "16,64", "--dual"]);
    assert_eq!(dual.code, 0);
    assert_eq!(dual.out.lines().count(), 3);
    assert_eq!(
        daugavet(&["refine", "--spec", s(&spec), "--levels", "64,16"]).code,
        2
    );
}

#[test]
fn refine_rejects_boundary_atoms() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "d.json",
        &json!({"spec": {"type": "preset", "name": "neg-dirac-half"}}),
    );
    let r = daugavet(&["refine", "--spec", s(&spec), "--levels", "3,4"]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("cell boundary"), "{}", r.err);
    let ok = daugavet(&["refine", "--spec", s(&spec), "--levels", "3,9,27"]);
    assert_eq!(ok.code, 0);
    assert!(ok.out.contains("\n27,1,0,0,"), "{}", ok.out);
}

#[test]
fn sweep_prints_lambda_and_value() {
    let dir = TempDir::new().unwrap();
    let input = write(
        &dir,
        "c.json",
        &json!({"matrix": [[{"re": "3/10", "im": "2/5"}]]}),
    );
    let r = daugavet(&["sweep", "--input", s(&input)]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.contains("lambda* = 0.6 - 0.8i"), "{}", r.out);
    assert!(r.out.contains("value = 1.5"), "{}", r.out);

    let irrational = write(&dir, "i.json", &json!({"matrix": [[{"re": 1, "im": 1}]]}));
    assert_eq!(daugavet(&["sweep", "--input", s(&irrational)]).code, 2);
    let float = write(
        &dir,
        "f.json",
        &json!({"scalar": "float", "matrix": [[{"re": 1, "im": 1}]]}),
    );
    let r = daugavet(&["sweep", "--input", s(&float)]);
    assert_eq!(r.code, 0, "{}", r.err);
}

#[test]
fn escalate_outcomes() {
    let r = daugavet(&[
        "escalate",
        "--mock",
        "const-neg-quarter",
        "--beta",
        "0.1",
        "--bound",
        "1",
    ]);
    assert_eq!(r.code, 1);
    assert!(
        r.out.starts_with("BoundViolated, 6 points, mass 1.25\n"),
        "{}",
        r.out
    );
    assert!(r.out.contains("s_5 = "));
    assert!(r.out.contains("verified: true"));

    let r = daugavet(&[
        "escalate",
        "--mock",
        "diag-neg-quarter",
        "--beta",
        "0.1",
        "--bound",
        "1",
        "--mode",
        "norm",
    ]);
    assert_eq!(r.code, 0);
    assert!(
        r.out.starts_with("Stalled at step 1: empty-refinement-set"),
        "{}",
        r.out
    );

    let r = daugavet(&[
        "escalate", "--mock", "identity", "--beta", "0.1", "--bound", "1",
    ]);
    assert_eq!(r.out, "NoNegativePatch\n");

    assert_eq!(
        daugavet(&["escalate", "--mock", "nope", "--beta", "0.1", "--bound", "1"]).code,
        2
    );
    assert_eq!(
        daugavet(&["escalate", "--beta", "0.1", "--bound", "1"]).code,
        2
    );
    assert_eq!(
        daugavet(&["escalate", "--mock", "identity", "--beta", "0", "--bound", "1"]).code,
        2
    );
}

#[test]
fn escalate_on_spec() {
    let dir = TempDir::new().unwrap();
    let spec = write(
        &dir,
        "d.json",
        &json!({"spec": {"type": "preset", "name": "neg-dirac-half"}}),
    );
    let r = daugavet(&[
        "escalate",
        "--spec",
        s(&spec),
        "--beta",
        "0.1",
        "--bound",
        "1",
        "--max-level",
        "3",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.starts_with("Stalled at step 1"), "{}", r.out);
    assert!(r.out.contains("s_0 = 0.5"));
}

#[test]
fn search_exit_codes() {
    let r = daugavet(&[
        "search",
        "--class",
        "rational-signed",
        "--n",
        "6",
        "--trials",
        "200",
        "--seed",
        "1",
        "--predicate",
        "prop1-identity",
    ]);
    assert_eq!(r.code, 0, "{}", r.err);
    assert!(r.out.starts_with("findings: 0 "));

    let r = daugavet(&[
        "search",
        "--class",
        "rational-signed",
        "--n",
        "2",
        "--trials",
        "1000",
        "--seed",
        "0",
        "--predicate",
        "defect-zero",
    ]);
    assert_eq!(r.code, 0);
    assert!(!r.out.starts_with("findings: 0 "));
    assert!(r.out.contains("trial "));

    let r = daugavet(&[
        "search",
        "--class",
        "signed",
        "--n",
        "3",
        "--trials",
        "10",
        "--seed",
        "0",
        "--predicate",
        "prop1-identity",
        "--scalar",
        "float",
    ]);
    assert_eq!(r.code, 2);
    assert!(r.err.contains("exact"));
    let r = daugavet(&[
        "search",
        "--class",
        "weird",
        "--n",
        "3",
        "--trials",
        "10",
        "--seed",
        "0",
        "--predicate",
        "defect-zero",
    ]);
    assert_eq!(r.code, 2);
}

#[test]
fn oracle_matches_and_agrees_with_check() {
    let dir = TempDir::new().unwrap();
    for (k, n) in [1usize, 4, 12].into_iter().enumerate() {
        let t: KernelOperator<Rational> =
            random_kernel(RandomClass::RationalSigned, n, 40 + k as u64, 1.0);
        let matrix: Vec<Vec<Value>> = t
            .to_matrix()
            .iter()
            .map(|row| row.iter().map(|x| x.to_json()).collect())
            .collect();
        let input = write(&dir, &format!("o{n}.json"), &json!({"matrix": matrix}));
        let r = daugavet(&["oracle", "--input", s(&input)]);
        assert_eq!(r.code, 0, "{}", r.err);
        assert!(r.out.ends_with("match\n") && !r.out.contains("mismatch"));
        let line = r.out.lines().find(|l| l.starts_with("norm I+T")).unwrap();
        let brute = line
            .split("brute force ")
            .nth(1)
            .unwrap()
            .split(' ')
            .next()
            .unwrap();
        let check = daugavet(&["check", "--input", s(&input)]);
        let report: Value = serde_json::from_str(&check.out).unwrap();
        let closed = report_from_json::<Rational>(&report).unwrap().norm_id_plus;
        assert_eq!(closed.show(), brute);
    }
    let complex = write(&dir, "c.json", &json!({"matrix": [[{"re": 0, "im": 1}]]}));
    assert_eq!(daugavet(&["oracle", "--input", s(&complex)]).code, 2);
}

#[test]
fn deterministic_output() {
    let args = [
        "escalate",
        "--mock",
        "const-neg-quarter",
        "--beta",
        "0.05",
        "--bound",
        "2",
    ];
    assert_eq!(daugavet(&args).out, daugavet(&args).out);
}
