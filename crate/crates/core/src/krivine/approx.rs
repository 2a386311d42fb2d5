//! Approximation of homogeneous functions by lattice terms on the sphere.
//!
//! On the circle a homogeneous function is interpolated piecewise linearly
//! between knot directions; each piece is a hat `(α ∧ β) ∨ 0` of two linear
//! functionals, valid while two adjacent cones span less than `π`. Knots
//! start equiangular and are refined greedily at the worst sample. In higher
//! dimensions the term is a max-min of pairwise linear interpolants, which
//! is a best-effort construction.

use std::f64::consts::PI;

use super::bound::lipschitz_bound;
use super::{Expr, HomogeneousFn, LatticeTerm};
use crate::error::{Error, Result};

/// A certified lattice-term approximation.
#[derive(Debug, Clone)]
pub struct Approximation {
    pub term: LatticeTerm<f64>,
    /// `max |t − φ|` over the sample grid, measured on the term itself.
    pub certified_error: f64,
    /// `certified_error` plus the Lipschitz and modulus slack between samples:
    /// a bound on `sup |t − φ|` over the whole sphere.
    pub uniform_bound: f64,
    pub samples: usize,
    /// Number of linear pieces (knots on the circle).
    pub pieces: usize,
}

const INITIAL_KNOTS: usize = 8;
const MAX_KNOTS: usize = 4096;
const MAX_HIGH_DIM_KNOTS: usize = 24;

/// Approximates `φ` on the unit sphere to within `eps` on a grid of `grid`
/// samples.
///
/// Fails with [`Error::ApproximationStalled`] carrying the best error
/// reached when the knot budget runs out first.
pub fn approximate_on_sphere(phi: &HomogeneousFn, eps: f64, grid: usize) -> Result<Approximation> {
    if !(eps > 0.0) || grid == 0 {
        return Err(Error::InvalidParameter(
            "approximation needs eps > 0 and a nonempty grid".into(),
        ));
    }
    let n = phi.arity();
    if n == 0 {
        return Err(Error::InvalidParameter("arity must be positive".into()));
    }
    let probes = sphere_samples(n, 16);
    if phi.homogeneity_defect(&probes, &[0.0, 0.5, 3.0]) > 1e-9 {
        return Err(Error::InvalidParameter(format!(
            "{} is not positively homogeneous of degree one",
            phi.name()
        )));
    }
    let result = if let Some(c) = phi.linear_coefficients() {
        let term = LatticeTerm::new(n, Expr::linear(c))?;
        certify(phi, term, &sphere_samples(n, grid), 1)
    } else {
        match n {
            1 => {
                let (pos, neg) = (phi.eval_unchecked(&[1.0]), phi.eval_unchecked(&[-1.0]));
                let expr = if pos == -neg {
                    Expr::var(0).scaled(pos)
                } else {
                    Expr::sum(vec![
                        Expr::var(0).positive_part().scaled(pos),
                        Expr::var(0).negative_part().scaled(neg),
                    ])
                };
                certify(phi, LatticeTerm::new(1, expr)?, &sphere_samples(1, grid), 2)
            }
            2 => circle(phi, eps, grid)?,
            _ => high_dim(phi, eps, grid)?,
        }
    };
    if result.certified_error > eps {
        return Err(Error::ApproximationStalled {
            best_error: result.certified_error,
            target: eps,
        });
    }
    Ok(result)
}

fn certify(phi: &HomogeneousFn, term: LatticeTerm<f64>, samples: &[Vec<f64>], pieces: usize) -> Approximation {
    let certified_error = samples
        .iter()
        .map(|x| (term.expr().eval(x) - phi.eval_unchecked(x)).abs())
        .fold(0.0, f64::max);
    let n = phi.arity();
    // Largest distance from a sphere point to the nearest sample.
    let gap = match n {
        1 => 0.0,
        2 => 2.0 * (PI / (2.0 * samples.len() as f64)).sin(),
        _ => covering_radius(samples),
    };
    let uniform_bound = certified_error + lipschitz_bound(&term) * gap + phi.modulus(gap);
    Approximation {
        term,
        certified_error,
        uniform_bound,
        samples: samples.len(),
        pieces,
    }
}

/// Empirical covering radius, estimated against a denser probe set and
/// inflated by the probe spacing.
fn covering_radius(samples: &[Vec<f64>]) -> f64 {
    let n = samples[0].len();
    let probes = sphere_samples_seeded(n, 2000, 0x5eed);
    let worst = probes
        .iter()
        .map(|p| {
            samples
                .iter()
                .map(|s| dist(p, s))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max);
    2.0 * worst
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn circle_samples(grid: usize) -> Vec<f64> {
    (0..grid).map(|k| 2.0 * PI * k as f64 / grid as f64).collect()
}

fn unit(theta: f64) -> [f64; 2] {
    [theta.cos(), theta.sin()]
}

/// Deterministic samples: the circle grid for `n = 2`, `±1` for `n = 1`,
/// otherwise pseudo-random points from a fixed seed.
pub(crate) fn sphere_samples(n: usize, count: usize) -> Vec<Vec<f64>> {
    match n {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => circle_samples(count).into_iter().map(|t| unit(t).to_vec()).collect(),
        _ => sphere_samples_seeded(n, count, 0),
    }
}

fn sphere_samples_seeded(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            // Box–Muller normals, normalised.
            let v: Vec<f64> = (0..n)
                .map(|_| {
                    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
                    let u2: f64 = rng.random();
                    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
                })
                .collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-9 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

/// Piecewise-linear homogeneous interpolation of `values` at `knots`
/// (sorted angles), evaluated at angle `theta` lying in cone `k`.
fn interpolate(knots: &[f64], values: &[f64], k: usize, theta: f64) -> f64 {
    let m = knots.len();
    let (a, b) = (knots[k], if k + 1 < m { knots[k + 1] } else { knots[0] + 2.0 * PI });
    let span = (b - a).sin();
    let lambda = (b - theta).sin() / span;
    let mu = (theta - a).sin() / span;
    lambda * values[k] + mu * values[(k + 1) % m]
}

/// The hat-basis term interpolating `φ` at the given knot angles. Adjacent
/// knots must be less than `π/2` apart.
fn hat_term(knots: &[f64], values: &[f64]) -> Result<LatticeTerm<f64>> {
    let m = knots.len();
    let cross = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
    let mut pieces = Vec::with_capacity(m);
    for k in 0..m {
        if values[k] == 0.0 {
            continue;
        }
        let prev = unit(knots[(k + m - 1) % m]);
        let here = unit(knots[k]);
        let next = unit(knots[(k + 1) % m]);
        // α vanishes on prev, β on next; both equal one at here.
        let ca = cross(prev, here);
        let alpha = Expr::linear(&[-prev[1] / ca, prev[0] / ca]);
        let cb = cross(here, next);
        let beta = Expr::linear(&[next[1] / cb, -next[0] / cb]);
        let hat = alpha.meet(beta).positive_part();
        pieces.push(hat.scaled(values[k]));
    }
    LatticeTerm::new(2, Expr::sum(pieces))
}

/// The hat-basis interpolant of `φ` at fixed knot angles, certified on
/// `grid` equiangular samples.
pub fn interpolate_on_circle(phi: &HomogeneousFn, knots: &[f64], grid: usize) -> Result<Approximation> {
    if phi.arity() != 2 {
        return Err(Error::ArityMismatch {
            expected: 2,
            found: phi.arity(),
        });
    }
    let mut knots: Vec<f64> = knots.iter().map(|t| t.rem_euclid(2.0 * PI)).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let m = knots.len();
    let too_wide = (0..m).any(|k| {
        let next = if k + 1 < m { knots[k + 1] } else { knots[0] + 2.0 * PI };
        next - knots[k] >= PI / 2.0
    });
    if m < 3 || too_wide {
        return Err(Error::InvalidParameter(
            "adjacent knots must be less than π/2 apart".into(),
        ));
    }
    let values: Vec<f64> = knots.iter().map(|&t| phi.eval_unchecked(&unit(t))).collect();
    let term = hat_term(&knots, &values)?;
    Ok(certify(phi, term, &sphere_samples(2, grid), m))
}

/// The join of tangent functionals of `φ` at the given knot angles: at each
/// knot `u` the linear form `ℓ` with `ℓ(u) = φ(u)` and `ℓ(u^⊥) = dφ/dθ`.
/// For convex `φ` this is the polygonal support-function approximation from
/// below.
pub fn tangent_envelope(phi: &HomogeneousFn, knots: &[f64], grid: usize) -> Result<Approximation> {
    if phi.arity() != 2 {
        return Err(Error::ArityMismatch {
            expected: 2,
            found: phi.arity(),
        });
    }
    if knots.is_empty() {
        return Err(Error::Empty("knots"));
    }
    const H: f64 = 1e-6;
    let forms = knots
        .iter()
        .map(|&theta| {
            let u = unit(theta);
            let value = phi.eval_unchecked(&u);
            let slope = (phi.eval_unchecked(&unit(theta + H)) - phi.eval_unchecked(&unit(theta - H))) / (2.0 * H);
            // ℓ = value·u + slope·u^⊥ with u^⊥ = (−sin θ, cos θ).
            Expr::linear(&[value * u[0] - slope * u[1], value * u[1] + slope * u[0]])
        })
        .collect();
    let term = LatticeTerm::new(2, Expr::join_all(forms).expect("nonempty"))?;
    Ok(certify(phi, term, &sphere_samples(2, grid), knots.len()))
}

fn circle(phi: &HomogeneousFn, eps: f64, grid: usize) -> Result<Approximation> {
    let thetas = circle_samples(grid);
    let targets: Vec<f64> = thetas.iter().map(|&t| phi.eval_unchecked(&unit(t))).collect();
    let mut knots: Vec<f64> = circle_samples(INITIAL_KNOTS);
    let mut values: Vec<f64> = knots.iter().map(|&t| phi.eval_unchecked(&unit(t))).collect();
    let goal = 0.5 * eps;
    loop {
        // Samples and knots are both sorted by angle: walk them together.
        let mut worst = (0.0, None);
        let mut k = 0;
        for (s, &theta) in thetas.iter().enumerate() {
            while k + 1 < knots.len() && knots[k + 1] <= theta {
                k += 1;
            }
            let err = (interpolate(&knots, &values, k, theta) - targets[s]).abs();
            if err > worst.0 {
                worst = (err, Some(s));
            }
        }
        match worst {
            (err, Some(s)) if err > goal && knots.len() < MAX_KNOTS => {
                let theta = thetas[s];
                let at = knots.partition_point(|&x| x < theta);
                if knots.get(at) == Some(&theta) {
                    break;
                }
                knots.insert(at, theta);
                values.insert(at, targets[s]);
            }
            _ => break,
        }
    }
    let term = hat_term(&knots, &values)?;
    Ok(certify(phi, term, &sphere_samples(2, grid), knots.len()))
}

/// Minimum-norm linear functional `ℓ` with `ℓ(x) = a`, `ℓ(y) = b`.
fn min_norm_functional(x: &[f64], y: &[f64], a: f64, b: f64) -> Vec<f64> {
    let dot = |u: &[f64], v: &[f64]| u.iter().zip(v).map(|(p, q)| p * q).sum::<f64>();
    let (xx, xy, yy) = (dot(x, x), dot(x, y), dot(y, y));
    let det = xx * yy - xy * xy;
    if det.abs() < 1e-12 {
        // Parallel directions: fit x alone.
        return x.iter().map(|v| v * a / xx).collect();
    }
    let c1 = (a * yy - b * xy) / det;
    let c2 = (b * xx - a * xy) / det;
    x.iter().zip(y).map(|(u, v)| c1 * u + c2 * v).collect()
}

fn high_dim(phi: &HomogeneousFn, eps: f64, grid: usize) -> Result<Approximation> {
    let n = phi.arity();
    let samples = sphere_samples(n, grid);
    let targets: Vec<f64> = samples.iter().map(|x| phi.eval_unchecked(x)).collect();
    let mut knots: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut e = vec![0.0; n];
            e[i] = s;
            knots.push(e);
        }
    }
    let build = |knots: &[Vec<f64>]| -> Vec<Vec<Vec<f64>>> {
        let vals: Vec<f64> = knots.iter().map(|x| phi.eval_unchecked(x)).collect();
        (0..knots.len())
            .map(|i| {
                (0..knots.len())
                    .filter(|&j| j != i)
                    .map(|j| min_norm_functional(&knots[i], &knots[j], vals[i], vals[j]))
                    .collect()
            })
            .collect()
    };
    let eval = |forms: &[Vec<Vec<f64>>], x: &[f64]| {
        forms
            .iter()
            .map(|row| {
                row.iter()
                    .map(|l| l.iter().zip(x).map(|(a, b)| a * b).sum::<f64>())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let mut forms = build(&knots);
    while knots.len() < MAX_HIGH_DIM_KNOTS {
        let (worst, err) = samples
            .iter()
            .zip(&targets)
            .enumerate()
            .map(|(s, (x, v))| (s, (eval(&forms, x) - v).abs()))
            .fold((0, 0.0), |acc, c| if c.1 > acc.1 { c } else { acc });
        if err <= 0.5 * eps {
            break;
        }
        knots.push(samples[worst].clone());
        forms = build(&knots);
    }
    let rows = forms
        .into_iter()
        .map(|row| {
            Expr::meet_all(row.iter().map(|l| Expr::linear(l)).collect()).expect("at least one form")
        })
        .collect();
    let term = LatticeTerm::new(n, Expr::join_all(rows).expect("at least one knot"))?;
    let pieces = knots.len();
    Ok(certify(phi, term, &samples, pieces))
}
