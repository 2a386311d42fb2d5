//! End-to-end tests against the built binary, plus a few library-level
//! checks of the loaders and the CSV writer.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use canonbase::json::SpaceDoc;
use canonbase::{CanonicalBase, CbFamily, Element, LatticeElement};
use canonlab::curve::emit_curve;
use canonlab::docs::load_element;
use canonlab::report::Digest;
use serde_json::Value;
use tempfile::TempDir;

fn canonlab(args: &[&str], seed_env: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_canonlab"));
    cmd.args(args).env_remove("CANONLAB_SEED");
    if let Some(s) = seed_env {
        cmd.env("CANONLAB_SEED", s);
    }
    cmd.output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not a report ({e}): {}\nstderr: {}",
            String::from_utf8_lossy(&out.stdout),
            String::from_utf8_lossy(&out.stderr)
        )
    })
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Files(TempDir);

impl Files {
    fn new() -> Self {
        Self(tempfile::tempdir().unwrap())
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let path = self.0.path().join(name);
        std::fs::write(&path, text).unwrap();
        path
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// One unit atom, two cells, with the `{±}` part.
const SPACE: &str = r#"{"base_weights": [1.0], "fiber_cells": 2, "orthogonal_part": true}"#;
const F: &str = r#"{"rows": [[-2, 4]]}"#;

#[test]
fn usage_errors_exit_one() {
    let out = canonlab(&[], None);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("Usage"));
    let out = canonlab(&["frobnicate"], None);
    assert_eq!(out.status.code(), Some(1));
    let out = canonlab(&["demo", "p1", "--p", "1", "--eps", "2/3"], None);
    assert_eq!(out.status.code(), Some(1));
    let out = canonlab(&["--help"], None);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn p1_demo_reports_unit_norms() {
    let out = canonlab(&["demo", "p1", "--p", "1", "--eps", "1/4"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["outputs"]["norms"], serde_json::json!([1.0, 1.0]));
    assert_eq!(r["outputs"]["partial"], serde_json::json!([-1.0]));
    assert_eq!(r["checks"]["partial_norm_matches"], true);

    let out = canonlab(&["demo", "p1", "--p", "2", "--eps", "1/16"], None);
    assert_eq!(out.status.code(), Some(0));
    let norm = report(&out)["outputs"]["norms"][1].as_f64().unwrap();
    assert!((norm - 0.25).abs() < 1e-9);
}

#[test]
fn remark_demo() {
    let out = canonlab(&["demo", "remark"], None);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["outputs"]["combinations_checked"], 121);
    assert_eq!(r["outputs"]["witness_values"], serde_json::json!([1.0, 0.0]));
}

#[test]
fn typeq_exit_codes() {
    let files = Files::new();
    let space = files.write("s.json", SPACE);
    let f = files.write("f.json", F);
    let same = files.write("g.json", r#"{"rows": [[4, -2]]}"#);
    let other = files.write("h.json", r#"{"rows": [[4, -2]], "plus": [1, 0]}"#);
    let run = |b: &Path, extra: &[&str]| {
        let mut args = vec!["typeq", "--space", s(&space), "--a", s(&f), "--b", s(b), "--p", "1"];
        args.extend_from_slice(extra);
        canonlab(&args, None)
    };
    assert_eq!(run(&f, &[]).status.code(), Some(0));
    let out = run(&same, &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["checks"]["canonical_base_consistent"], true);
    let out = run(&other, &[]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(report(&out)["outputs"]["equal"], false);
    assert_eq!(run(&same, &["--absolute"]).status.code(), Some(0));
}

#[test]
fn lp_cb_outputs_and_curve() {
    let files = Files::new();
    let space = files.write("s.json", SPACE);
    let f = files.write("f.json", F);
    let (out_path, curve) = (files.path("cb.json"), files.path("curve.csv"));
    let out = canonlab(
        &[
            "lp-cb", "--space", s(&space), "--element", s(&f), "--p", "1", "--grid", "2",
            "--out", s(&out_path), "--curve", s(&curve),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["checks"]["reconstructs_sorted_fibers"], true);
    let cb: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(cb["pos_norm"], 2.0);
    assert_eq!(cb["neg_norm"], 1.0);
    assert_eq!(cb["grid"], serde_json::json!([0.5]));
    assert_eq!(cb["partials"][0]["values"], serde_json::json!([-1.0]));
    assert_eq!(cb["partials"][1]["values"], serde_json::json!([1.0]));
    assert_eq!(std::fs::read_to_string(&curve).unwrap(), "t,atom_0\n0.5,-1\n");

    let out = canonlab(
        &["lp-cb", "--space", s(&space), "--element", s(&f), "--p", "1", "--grid", "2", "--intervals"],
        None,
    );
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert!(r["outputs"]["partials"].is_null());
    assert_eq!(r["outputs"]["intervals"].as_array().unwrap().len(), 3);
}

#[test]
fn bad_inputs_exit_two_with_pointer() {
    let files = Files::new();
    let space = files.write("s.json", SPACE);
    let short = files.write("short.json", r#"{"rows": [[1, 2, 3]]}"#);
    let typed = files.write("typed.json", r#"{"rows": [[1, "x"]]}"#);
    let unknown = files.write("unknown.json", r#"{"rows": [[1, 2]], "extra": 1}"#);
    let lp = |f: &Path, p: &str| {
        canonlab(&["lp-cb", "--space", s(&space), "--element", s(f), "--p", p, "--grid", "2"], None)
    };
    let out = lp(&short, "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/rows/0"), "{}", stderr(&out));
    let out = lp(&typed, "1");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("/rows/0/1"), "{}", stderr(&out));
    assert_eq!(lp(&unknown, "1").status.code(), Some(2));
    let good = files.write("f.json", F);
    assert_eq!(lp(&good, "0.5").status.code(), Some(2));
    assert_eq!(lp(&files.path("missing.json"), "1").status.code(), Some(2));
}

#[test]
fn element_loader_defaults() {
    let files = Files::new();
    let pair = serde_json::from_str::<SpaceDoc>(SPACE).unwrap().to_pair().unwrap();
    let mut digest = Digest::new(&[]);
    let zero = load_element(&files.write("z.json", "{}"), &pair, &mut digest).unwrap();
    assert!(zero.is_zero());
    let f = load_element(&files.write("m.json", r#"{"rows": [[1, 2]], "minus": [-1, 0]}"#), &pair, &mut digest).unwrap();
    assert_eq!(pair.plus_fiber(&f).unwrap(), &[0.0, 0.0]);
    assert_eq!(pair.minus_fiber(&f).unwrap(), &[-1.0, 0.0]);
}

fn base_for(values: Vec<Element>, limit: Element, grid: Vec<f64>) -> CanonicalBase {
    CanonicalBase {
        p: 1.0,
        pos_norm: 0.0,
        neg_norm: 0.0,
        grid,
        family: CbFamily::Partials { values, limit },
    }
}

#[test]
fn empty_grid_gives_header_only() {
    let pair = serde_json::from_str::<SpaceDoc>(SPACE).unwrap().to_pair().unwrap();
    let limit = LatticeElement::zero(pair.base_space().clone());
    let mut buf = Vec::new();
    emit_curve(&base_for(vec![], limit, vec![]), &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "t,atom_0\n");
}

#[test]
fn curve_round_trips() {
    let files = Files::new();
    let space = files.write(
        "s.json",
        r#"{"base_weights": [0.5, 1.5, 2.0], "fiber_cells": 8, "orthogonal_part": false}"#,
    );
    let f = files.write(
        "f.json",
        r#"{"rows": [[0.1, -3.7, 2.2, 9.25, -0.333, 1e-3, 4, 4],
                     [1, 2, 3, 4, 5, 6, 7, 8],
                     [-1.5, 0, 0, 2.75, -8.125, 3.3, 0.7, -0.2]]}"#,
    );
    let (out_path, curve) = (files.path("cb.json"), files.path("curve.csv"));
    let out = canonlab(
        &[
            "lp-cb", "--space", s(&space), "--element", s(&f), "--p", "2", "--grid", "8",
            "--out", s(&out_path), "--curve", s(&curve),
        ],
        None,
    );
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let cb: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let mut reader = csv::Reader::from_path(&curve).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["t", "atom_0", "atom_1", "atom_2"]);
    let rows: Vec<Vec<f64>> = reader
        .records()
        .map(|r| r.unwrap().iter().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 7);
    for (row, partial) in rows.iter().zip(cb["partials"].as_array().unwrap()) {
        assert!((row[0] - partial["t"].as_f64().unwrap()).abs() < 1e-12);
        for (got, want) in row[1..].iter().zip(partial["values"].as_array().unwrap()) {
            assert!((got - want.as_f64().unwrap()).abs() < 1e-9);
        }
    }
    assert!(rows.windows(2).all(|w| w[0][0] < w[1][0]));
}

fn without_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_time_ms");
    v
}

#[test]
fn reports_are_deterministic() {
    let files = Files::new();
    let space = files.write("s.json", SPACE);
    let f = files.write("f.json", F);
    let args = ["lp-cb", "--space", s(&space), "--element", s(&f), "--p", "3", "--grid", "2"];
    let a = report(&canonlab(&args, None));
    let b = report(&canonlab(&args, None));
    assert!(a["wall_time_ms"].is_number());
    assert_eq!(without_timing(a.clone()), without_timing(b));
    assert_eq!(a["inputs_digest"].as_str().unwrap().len(), 64);

    // The digest follows file contents.
    let g = files.write("f.json", r#"{"rows": [[-2, 5]]}"#);
    let c = report(&canonlab(&["lp-cb", "--space", s(&space), "--element", s(&g), "--p", "3", "--grid", "2"], None));
    assert_ne!(a["inputs_digest"], c["inputs_digest"]);
}

#[test]
fn seed_precedence() {
    let args = ["ultra", "--prime", "3", "check-triangles", "--samples", "30"];
    let default = report(&canonlab(&args, None));
    assert_eq!(default["seed"], 0);
    assert_eq!(default["checks"]["triangle_inequality"], true);
    assert_eq!(default["outputs"]["triples"], 4060);
    let env = report(&canonlab(&args, Some("5")));
    assert_eq!(env["seed"], 5);
    let mut flagged = vec!["--seed", "5"];
    flagged.extend_from_slice(&args);
    let flag = report(&canonlab(&flagged, Some("9")));
    assert_eq!(flag["seed"], 5);
    assert_eq!(flag["outputs"], env["outputs"]);
    assert_eq!(canonlab(&args, Some("x")).status.code(), Some(1));
}

#[test]
fn ultra_ball_distance() {
    let out = canonlab(&["ultra", "--prime", "2", "ball-dist", "0", "1/4", "1", "1/4"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["outputs"]["distance"], "3/4");
    assert_eq!(r["outputs"]["equal"], false);
    let r = report(&canonlab(&["ultra", "--prime", "2", "ball-dist", "0", "1/2", "2", "1/2"], None));
    assert_eq!(r["outputs"]["distance"], "0");
    assert_eq!(r["outputs"]["equal"], true);
    let out = canonlab(&["ultra", "--prime", "4", "ball-dist", "0", "1", "1", "1"], None);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn legendre_conjugates_abs() {
    let files = Files::new();
    let input = files.write("f.json", r#"{"breakpoints": [0], "slopes": [-1, 1], "anchor": [0, 0]}"#);
    let out = canonlab(&["legendre", "--input", s(&input)], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    let star = &r["outputs"]["conjugate"];
    assert_eq!(star["lower"], "-1");
    assert_eq!(star["upper"], "1");
    assert_eq!(star["slopes"], serde_json::json!(["0"]));
    assert_eq!(star["anchor"][1], "0");
    assert_eq!(r["checks"]["biconjugate_equals_input"], true);

    let rational = files.write("g.json", r#"{"lower": "-1/3", "slopes": ["1/2"], "anchor": ["-1/3", 0]}"#);
    let r = report(&canonlab(&["legendre", "--input", s(&rational)], None));
    assert_eq!(r["outputs"]["conjugate"]["upper"], "1/2");
}

#[test]
fn krivine_subcommands() {
    let out = canonlab(&["krivine", "approx", "--function", "euclid", "--eps", "0.05"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert!(r["outputs"]["certified_error"].as_f64().unwrap() <= 0.05);
    let r = report(&canonlab(&["krivine", "eval", "--term", r"x0 \/ x1", "--arity", "2", "--at", "1,-2"], None));
    assert_eq!(r["outputs"]["value"], 1.0);
    let r = report(&canonlab(&["krivine", "norm", "--term", "avg(x0, neg(x1))", "--arity", "2"], None));
    assert_eq!(r["outputs"]["sup_norm"], 1.0);
    assert_eq!(canonlab(&["krivine", "eval", "--term", "x0 +", "--arity", "1", "--at", "1"], None).status.code(), Some(2));
    assert_eq!(canonlab(&["krivine", "approx", "--function", "nope"], None).status.code(), Some(2));
}

#[test]
fn hilbert_and_random_variable_bases() {
    let files = Files::new();
    let v = files.write("v.json", "[[1, 2, 3]]");
    let e = files.write("e.json", r#"{"dim": 3, "basis": [[1, 0, 0]]}"#);
    let r = report(&canonlab(&["hs-cb", "--vectors", s(&v), "--subspace", s(&e)], None));
    assert_eq!(r["outputs"]["gram"], serde_json::json!([[14.0]]));
    assert_eq!(r["outputs"]["projections"], serde_json::json!([[1.0, 0.0, 0.0]]));
    let bad = files.write("bad.json", r#"{"dim": 2, "basis": [[1, 1]]}"#);
    let v2 = files.write("v2.json", "[[1, 2]]");
    assert_eq!(canonlab(&["hs-cb", "--vectors", s(&v2), "--subspace", s(&bad)], None).status.code(), Some(2));

    let space = files.write("p.json", r#"{"weights": [0.25, 0.25, 0.25, 0.25], "blocks": [[0, 1], [2, 3]]}"#);
    let x = files.write("x.json", "[[0, 1, 0.5, 0.5]]");
    let out = canonlab(&["rv-cb", "--space", s(&space), "--elements", s(&x), "--k-max", "2"], None);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let r = report(&out);
    assert_eq!(r["outputs"]["moments"][0]["values"], serde_json::json!([0.5, 0.5, 0.5, 0.5]));
    assert_eq!(r["outputs"]["moments"][1]["values"], serde_json::json!([0.5, 0.5, 0.25, 0.25]));
    let outside = files.write("y.json", "[[0, 2, 0.5, 0.5]]");
    assert_eq!(canonlab(&["rv-cb", "--space", s(&space), "--elements", s(&outside)], None).status.code(), Some(2));

    let events = files.write(
        "ev.json",
        r#"{"weights": [0.25, 0.25, 0.25, 0.25], "blocks": [[0, 1], [2, 3]],
            "events": [[1, 0, 1, 1], [1, 1, 0, 1]]}"#,
    );
    let r = report(&canonlab(&["apr-cb", "--events", s(&events)], None));
    let rows = r["outputs"]["conditional_probabilities"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert_eq!(rows[2]["events"], serde_json::json!([0, 1]));
    assert_eq!(rows[2]["values"], serde_json::json!([0.5, 0.5, 0.5, 0.5]));
}
