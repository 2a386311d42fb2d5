//! Shared random instances and independent reference computations.

#![allow(dead_code)]

use std::io::Write;

use canonbase::{Element, Pair};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Prints one verdict line past the test harness's output capture, so that
/// it shows up in plain `cargo test` logs.
pub fn verdict(label: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "acceptance {status}: {label} ({detail})");
}

/// A random fibered instance: the pair, the element, and the exponent.
pub struct Instance {
    pub pair: Pair,
    pub f: Element,
    pub p: f64,
    pub rows: Vec<Vec<f64>>,
    pub plus: Option<Vec<f64>>,
    pub minus: Option<Vec<f64>>,
}

/// Quarter-integers in `[-8, 8]` make ties common; otherwise uniform.
fn random_row<R: Rng>(rng: &mut R, n: usize, ties: bool) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if ties {
                f64::from(rng.random_range(-32..=32i32)) / 4.0
            } else {
                rng.random_range(-5.0..5.0)
            }
        })
        .collect()
}

fn random_orthogonal<R: Rng>(rng: &mut R, n: usize, sign: f64) -> Vec<f64> {
    (0..n)
        .map(|_| {
            if rng.random_bool(0.5) {
                0.0
            } else {
                sign * f64::from(rng.random_range(1..=8i32)) / 2.0
            }
        })
        .collect()
}

pub fn random_instance<R: Rng>(rng: &mut R, max_atoms: usize, cells: usize) -> Instance {
    let m = rng.random_range(1..=max_atoms);
    let weights: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..2.0)).collect();
    let orthogonal = rng.random_bool(0.5);
    let pair = Pair::new(weights, cells, orthogonal).unwrap();
    let ties = rng.random_bool(0.5);
    let rows: Vec<Vec<f64>> = (0..m).map(|_| random_row(rng, cells, ties)).collect();
    let (plus, minus) = if orthogonal {
        (
            Some(random_orthogonal(rng, cells, 1.0)),
            Some(random_orthogonal(rng, cells, -1.0)),
        )
    } else {
        (None, None)
    };
    let f = pair.element(rows.clone(), plus.clone(), minus.clone()).unwrap();
    let p = [1.0, 2.0, 3.0][rng.random_range(0..3)];
    Instance {
        pair,
        f,
        p,
        rows,
        plus,
        minus,
    }
}

/// A partner of `inst.f`: a fiberwise rearrangement (same type) or a small
/// perturbation (usually a different type), chosen at random.
pub fn partner<R: Rng>(rng: &mut R, inst: &Instance) -> Element {
    let mut rows = inst.rows.clone();
    let mut plus = inst.plus.clone();
    let mut minus = inst.minus.clone();
    for r in &mut rows {
        r.shuffle(rng);
    }
    for o in [&mut plus, &mut minus].into_iter().flatten() {
        o.shuffle(rng);
    }
    match rng.random_range(0..5) {
        0 | 1 => {}
        2 => {
            let i = rng.random_range(0..rows.len());
            let j = rng.random_range(0..rows[i].len());
            rows[i][j] += 0.25 * f64::from(rng.random_range(1..=4i32));
        }
        3 => match plus.as_mut() {
            Some(o) => o[0] += 0.5,
            None => rows[0][0] -= 1.0,
        },
        _ => {
            // Swapping the fibers of two atoms changes the type unless they match.
            let a = rng.random_range(0..rows.len());
            let b = rng.random_range(0..rows.len());
            rows.swap(a, b);
        }
    }
    inst.pair.element(rows, plus, minus).unwrap()
}

pub fn sorted(row: &[f64]) -> Vec<f64> {
    let mut v = row.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// `E_t` over one atom straight from the order statistics: with
/// `t·n = k + r`, the mean of the `k` smallest values plus `r/n` of the next.
pub fn prefix_oracle(row: &[f64], t: f64) -> f64 {
    let v = sorted(row);
    let n = v.len() as f64;
    let pos = t * n;
    let k = (pos.floor() as usize).min(v.len());
    let r = pos - k as f64;
    let head: f64 = v[..k].iter().sum();
    let tail = if k < v.len() { r * v[k] } else { 0.0 };
    (head + tail) / n
}

/// `(Σ w|f|^p)^{1/p}` written out directly.
pub fn direct_norm(values: &[f64], weights: &[f64], p: f64) -> f64 {
    values
        .iter()
        .zip(weights)
        .map(|(v, w)| w * v.abs().powf(p))
        .sum::<f64>()
        .powf(1.0 / p)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}
