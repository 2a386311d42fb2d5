//! One function per subcommand. Each returns its outputs and the identity
//! checks it ran; [`crate::run`] turns them into a report and exit code.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;
use std::sync::Arc;

use canonbase::hilbert::{hs_cb, phi_identity_check, Subspace};
use canonbase::krivine::{approximate_on_sphere, lipschitz_bound, parse_term, term_sup_norm};
use canonbase::lp::{canonical_base_1type, p1_counterexample, remark_counterexample};
use canonbase::rv::{apr_cb, cond_moment, least_squares_check, product_formula_check};
use canonbase::ultra::{ball_distance, ball_equal, sample_balls, triangle_check};
use canonbase::{
    absolute_type_equal, type_equal_1, Ball, CanonicalBase, CbFamily, EventAlgebra, ExactPlFn,
    HomogeneousFn, MeasureSpace, PAdicContext, ProjPoint, Rational, RvElement, Scalar,
    SubStructure, Term,
};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::curve::{emit_curve, partial_rows};
use crate::docs::{
    load, load_element, load_space, EventsDoc, Literal, PlDoc, ProbabilityDoc, SubspaceDoc,
};
use crate::error::{CliError, CliResult};
use crate::report::Digest;
use crate::{
    AprCbArgs, Command, DemoCommand, HsCbArgs, KrivineCommand, LegendreArgs, LpCbArgs, Outcome,
    RvCbArgs, TypeqArgs, UltraArgs, UltraCommand,
};

pub(crate) fn dispatch(command: &Command, seed: u64, digest: &mut Digest) -> CliResult<Outcome> {
    match command {
        Command::LpCb(a) => lp_cb(a, digest),
        Command::RvCb(a) => rv_cb(a, digest),
        Command::AprCb(a) => apr(a, digest),
        Command::HsCb(a) => hs(a, digest),
        Command::Typeq(a) => typeq(a, digest),
        Command::Legendre(a) => legendre(a, digest),
        Command::Krivine(k) => krivine(k),
        Command::Ultra(a) => ultra(a, seed),
        Command::Demo(d) => demo(d),
    }
}

fn done(outputs: Value, checks: Vec<(&str, bool)>) -> Outcome {
    Outcome {
        outputs,
        checks: checks.into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        code: 0,
    }
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * (1.0 + a.abs().max(b.abs()))
}

fn base_json(cb: &CanonicalBase) -> Value {
    let mut doc = json!({
        "p": cb.p,
        "pos_norm": cb.pos_norm,
        "neg_norm": cb.neg_norm,
        "grid": cb.grid,
    });
    match &cb.family {
        CbFamily::Partials { values, limit } => {
            let mut rows: Vec<Value> = cb
                .grid
                .iter()
                .zip(values)
                .map(|(t, e)| json!({"t": t, "values": e.values()}))
                .collect();
            rows.push(json!({"t": 1.0, "values": limit.values()}));
            doc["partials"] = Value::Array(rows);
        }
        CbFamily::Intervals(list) => {
            doc["intervals"] = list
                .iter()
                .map(|((t, s), e)| json!({"t": t, "s": s, "values": e.values()}))
                .collect();
        }
    }
    doc
}

fn lp_cb(a: &LpCbArgs, digest: &mut Digest) -> CliResult<Outcome> {
    if a.grid == 0 {
        return Err(CliError::Usage("--grid must be positive".into()));
    }
    let pair = load_space(&a.space, digest)?;
    let f = load_element(&a.element, &pair, digest)?;
    let n = a.grid;
    let grid: Vec<f64> = (1..n).map(|k| k as f64 / n as f64).collect();
    let cb = canonical_base_1type(&f, &pair, a.p, &grid, a.intervals)?;
    // On the grid {k/n} with n fiber cells, first differences of the
    // partials give back the sorted fibers.
    let rebuilt = cb.reconstruct_sorted(n)?;
    let mut checks = Vec::new();
    if n == pair.fiber_cells() {
        let matches = (0..pair.base_atoms()).all(|i| {
            let mut row = pair.fiber(&f, i).to_vec();
            row.sort_by(f64::total_cmp);
            row.iter().zip(&rebuilt[i]).all(|(x, y)| close(*x, *y))
        });
        checks.push(("reconstructs_sorted_fibers", matches));
    }
    let outputs = base_json(&cb);
    if let Some(path) = &a.out {
        let w = create(path)?;
        serde_json::to_writer_pretty(w, &outputs).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            source: e.into(),
        })?;
    }
    if let Some(path) = &a.curve {
        emit_curve(&cb, create(path)?)?;
    }
    let mut outputs = outputs;
    outputs["curve_points"] = json!(partial_rows(&cb).len());
    Ok(done(outputs, checks))
}

fn probability_space(weights: &[f64], blocks: &[Vec<usize>]) -> CliResult<EventAlgebra<f64>> {
    let space = Arc::new(MeasureSpace::new(weights.to_vec())?);
    let s = SubStructure::new(blocks.to_vec(), weights.len())?;
    Ok(EventAlgebra::new(space, s)?)
}

/// Every `k̄ ∈ ℕⁿ` with `1 ≤ |k̄| ≤ k_max`, in lexicographic order.
fn multi_indices(n: usize, k_max: u32) -> Vec<Vec<u32>> {
    let mut out: Vec<Vec<u32>> = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                let used: u32 = prefix.iter().sum();
                (0..=k_max - used).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out.retain(|k| k.iter().sum::<u32>() >= 1);
    out
}

fn rv_cb(a: &RvCbArgs, digest: &mut Digest) -> CliResult<Outcome> {
    let space: ProbabilityDoc = load(&a.space, digest)?;
    let alg = probability_space(&space.weights, &space.blocks)?;
    let values: Vec<Vec<f64>> = load(&a.elements, digest)?;
    if values.is_empty() {
        return Err(canonbase::Error::Empty("random variables").into());
    }
    let xs = values
        .into_iter()
        .map(|v| RvElement::from_values(alg.space.clone(), v))
        .collect::<canonbase::Result<Vec<_>>>()?;
    let mut moments = Vec::new();
    let mut tower = true;
    for k in multi_indices(xs.len(), a.k_max) {
        let m = cond_moment(&xs, &k, &alg.algebra)?;
        let (lhs, rhs) = product_formula_check(&xs, &k, &[], &[], &alg.algebra)?;
        tower &= close(lhs, rhs);
        moments.push(json!({"k": k, "values": m.values()}));
    }
    let mut least_squares = true;
    for x in &xs {
        for k in 1..=a.k_max {
            least_squares &= least_squares_check(x, k, &alg.algebra, 20)?.optimal;
        }
    }
    Ok(done(
        json!({"moments": moments}),
        vec![("expectation_preserved", tower), ("least_squares", least_squares)],
    ))
}

fn apr(a: &AprCbArgs, digest: &mut Digest) -> CliResult<Outcome> {
    let doc: EventsDoc = load(&a.events, digest)?;
    let alg = probability_space(&doc.weights, &doc.blocks)?;
    let events = doc
        .events
        .into_iter()
        .map(|v| RvElement::from_values(alg.space.clone(), v))
        .collect::<canonbase::Result<Vec<_>>>()?;
    let cb = apr_cb(&events, &alg.algebra)?;
    // P[⋀_S | s] never exceeds P[Aᵢ | s] for i ∈ S; singletons come first
    // in bitmask order at positions 2^i − 1.
    let monotone = cb.iter().all(|(subset, p)| {
        subset.iter().all(|&i| {
            let single = &cb[(1usize << i) - 1].1;
            p.values().iter().zip(single.values()).all(|(a, b)| *a <= *b + 1e-12)
        })
    });
    let rows: Vec<Value> = cb
        .iter()
        .map(|(subset, p)| json!({"events": subset, "values": p.values()}))
        .collect();
    Ok(done(json!({"conditional_probabilities": rows}), vec![("meets_monotone", monotone)]))
}

fn hs(a: &HsCbArgs, digest: &mut Digest) -> CliResult<Outcome> {
    let vectors: Vec<Vec<f64>> = load(&a.vectors, digest)?;
    let doc: SubspaceDoc = load(&a.subspace, digest)?;
    let e = Subspace::new(doc.dim, doc.basis)?;
    let cb = hs_cb(&vectors, &e)?;
    let ones = vec![1.0; vectors.len()];
    let (lhs, rhs) = phi_identity_check(&vectors, &ones, &vec![0.0; doc.dim], &e)?;
    let inside = cb
        .projections
        .iter()
        .map(|p| e.contains(p))
        .collect::<canonbase::Result<Vec<_>>>()?;
    Ok(done(
        json!({"projections": cb.projections, "gram": cb.gram}),
        vec![
            ("phi_identity", close(lhs, rhs)),
            ("projections_in_subspace", inside.iter().all(|&b| b)),
        ],
    ))
}

fn typeq(a: &TypeqArgs, digest: &mut Digest) -> CliResult<Outcome> {
    let pair = load_space(&a.space, digest)?;
    let f = load_element(&a.a, &pair, digest)?;
    let g = load_element(&a.b, &pair, digest)?;
    let mut checks = Vec::new();
    let equal = if a.absolute {
        absolute_type_equal(&[f], &[g], a.p)?
    } else {
        let equal = type_equal_1(&f, &g, &pair, a.p)?;
        // The base on the full cell grid must agree exactly when the types do.
        let n = pair.fiber_cells();
        if n >= 2 {
            let grid: Vec<f64> = (1..n).map(|k| k as f64 / n as f64).collect();
            let bf = canonical_base_1type(&f, &pair, a.p, &grid, false)?;
            let bg = canonical_base_1type(&g, &pair, a.p, &grid, false)?;
            checks.push(("canonical_base_consistent", bf.approx_eq(&bg) == equal));
        }
        equal
    };
    let mut out = done(json!({"equal": equal, "absolute": a.absolute}), checks);
    out.code = if equal { 0 } else { 3 };
    Ok(out)
}

fn exact(l: &Literal) -> CliResult<Rational> {
    l.exact()
}

fn pl_json(f: &ExactPlFn) -> Value {
    let s = |x: &Rational| Value::String(x.to_string());
    json!({
        "lower": f.lower().map(s),
        "upper": f.upper().map(s),
        "breakpoints": f.breakpoints().iter().map(s).collect::<Vec<_>>(),
        "slopes": f.slopes().iter().map(s).collect::<Vec<_>>(),
        "anchor": [s(&f.anchor_point()), s(f.anchor_value())],
    })
}

fn legendre(a: &LegendreArgs, digest: &mut Digest) -> CliResult<Outcome> {
    let doc: PlDoc = load(&a.input, digest)?;
    let f = ExactPlFn::new(
        doc.lower.as_ref().map(exact).transpose()?,
        doc.upper.as_ref().map(exact).transpose()?,
        doc.breakpoints.iter().map(exact).collect::<CliResult<_>>()?,
        doc.slopes.iter().map(exact).collect::<CliResult<_>>()?,
        (exact(&doc.anchor.0)?, exact(&doc.anchor.1)?),
    )?;
    let star = f.conjugate();
    Ok(done(
        json!({"function": pl_json(&f), "conjugate": pl_json(&star)}),
        vec![("biconjugate_equals_input", star.conjugate() == f)],
    ))
}

fn krivine(k: &KrivineCommand) -> CliResult<Outcome> {
    match k {
        KrivineCommand::Approx { function, eps, grid } => {
            let phi = HomogeneousFn::from_name(function)?;
            let approx = approximate_on_sphere(&phi, *eps, *grid)?;
            Ok(done(
                json!({
                    "function": phi.name(),
                    "term": approx.term.to_string(),
                    "certified_error": approx.certified_error,
                    "uniform_bound": approx.uniform_bound,
                    "samples": approx.samples,
                    "pieces": approx.pieces,
                }),
                vec![("within_eps", approx.certified_error <= *eps)],
            ))
        }
        KrivineCommand::Eval { term, arity, at } => {
            let t: Term = parse_term(term, *arity)?;
            let value = t.eval_scalar(at)?;
            Ok(done(json!({"term": t.to_string(), "at": at, "value": value}), vec![]))
        }
        KrivineCommand::Norm { term, arity } => {
            let t: Term = parse_term(term, *arity)?;
            Ok(done(
                json!({
                    "term": t.to_string(),
                    "sup_norm": term_sup_norm(&t),
                    "lipschitz": lipschitz_bound(&t),
                }),
                vec![],
            ))
        }
    }
}

fn radius(text: &str) -> CliResult<Rational> {
    Rational::parse_literal(text)
        .ok_or_else(|| CliError::Usage(format!("not a rational radius: {text:?}")))
}

fn ultra(a: &UltraArgs, seed: u64) -> CliResult<Outcome> {
    let ctx = PAdicContext::new(a.prime)?;
    match &a.command {
        UltraCommand::CheckTriangles { samples } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let balls = sample_balls(&mut rng, *samples, &ctx);
            let report = triangle_check(&balls, &ctx);
            Ok(done(
                json!({
                    "prime": a.prime,
                    "samples": samples,
                    "triples": report.triples,
                    "violations": report.violations,
                    "min_slack": report.min_slack.to_string(),
                }),
                vec![("triangle_inequality", report.violations == 0)],
            ))
        }
        UltraCommand::BallDist { a: ca, r, b: cb, s } => {
            let x = Ball::new(ProjPoint::parse(ca)?, radius(r)?)?;
            let y = Ball::new(ProjPoint::parse(cb)?, radius(s)?)?;
            let d = ball_distance(&x, &y, &ctx);
            let equal = ball_equal(&x, &y, &ctx);
            Ok(done(
                json!({
                    "a": x.to_string(),
                    "b": y.to_string(),
                    "distance": d.to_string(),
                    "distance_f64": d.to_f64(),
                    "equal": equal,
                }),
                vec![("equal_iff_zero_distance", equal == is_zero(&d))],
            ))
        }
    }
}

fn is_zero(x: &Rational) -> bool {
    *x == Rational::from_ratio(0, 1)
}

/// `1/m` (or a decimal whose reciprocal is an integer) to `m`.
fn parse_eps(text: &str) -> CliResult<usize> {
    let bad = || CliError::Usage(format!("--eps must be 1/m for a positive integer m, got {text:?}"));
    let eps = Rational::parse_literal(text).ok_or_else(bad)?;
    if eps <= Rational::from_ratio(0, 1) {
        return Err(bad());
    }
    let m = eps.recip();
    if !m.is_integer() {
        return Err(bad());
    }
    usize::try_from(m.to_integer()).map_err(|_| bad())
}

fn demo(d: &DemoCommand) -> CliResult<Outcome> {
    match d {
        DemoCommand::P1 { p, eps, cells } => {
            let m = parse_eps(eps)?;
            let cells = cells.unwrap_or_else(|| m * 16usize.div_ceil(m));
            let r = p1_counterexample(m, *p, cells)?;
            Ok(done(
                json!({
                    "eps": r.eps,
                    "cells": cells,
                    "norms": [r.f_norm, r.partial_norm],
                    "expected_partial_norm": r.expected,
                    "partial": r.partial.values(),
                }),
                vec![
                    ("unit_norm", close(r.f_norm, 1.0)),
                    ("partial_norm_matches", close(r.partial_norm, r.expected)),
                ],
            ))
        }
        DemoCommand::Remark => {
            let r = remark_counterexample()?;
            Ok(done(
                json!({
                    "combinations_checked": r.combinations_checked,
                    "one_types_agree": r.one_types_agree,
                    "joint_types_differ": r.joint_types_differ,
                    "witness": r.witness,
                    "witness_values": [r.witness_values.0, r.witness_values.1],
                }),
                vec![
                    ("one_types_agree", r.one_types_agree),
                    ("joint_types_differ", r.joint_types_differ),
                    ("witness_separates", r.witness_values == (1.0, 0.0)),
                ],
            ))
        }
    }
}
