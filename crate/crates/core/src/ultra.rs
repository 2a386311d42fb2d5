//! The ball sort over the projective line of `ℚ` with a `p`-adic absolute
//! value. All arithmetic is exact.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::Rational;

/// The valuation data for a fixed prime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PAdicContext {
    prime: u64,
}

fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

impl PAdicContext {
    pub fn new(prime: u64) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::NotPrime(prime));
        }
        Ok(Self { prime })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    /// Exponent of `p` in a nonzero integer.
    fn int_valuation(&self, n: &BigInt) -> i64 {
        let p = BigInt::from(self.prime);
        let mut n = n.abs();
        let mut v = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            v += 1;
        }
        v
    }

    /// `v_p(x)`; `None` for zero.
    pub fn valuation(&self, x: &Rational) -> Option<i64> {
        (!x.is_zero()).then(|| self.int_valuation(x.numer()) - self.int_valuation(x.denom()))
    }

    fn power(&self, v: i64) -> Rational {
        let base = Rational::from_integer(BigInt::from(self.prime));
        if v >= 0 {
            num_traits::pow(base, v as usize)
        } else {
            num_traits::pow(base.recip(), (-v) as usize)
        }
    }
}

/// `|x|_p = p^{−v_p(x)}`, with `|0|_p = 0`.
pub fn padic_abs(x: &Rational, ctx: &PAdicContext) -> Rational {
    match ctx.valuation(x) {
        None => Rational::zero(),
        Some(v) => ctx.power(-v),
    }
}

/// A point of the projective line over `ℚ`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ProjPoint {
    Finite(Rational),
    Infinity,
}

impl ProjPoint {
    pub fn finite(num: i64, den: i64) -> Self {
        Self::Finite(Rational::new(num.into(), den.into()))
    }

    /// Parses `"p/q"`, an integer, or `"inf"`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if matches!(text, "inf" | "∞" | "infinity") {
            return Ok(Self::Infinity);
        }
        crate::scalar::Scalar::parse_literal(text)
            .map(Self::Finite)
            .ok_or_else(|| Error::InvalidParameter(format!("not a rational or 'inf': {text:?}")))
    }
}

impl fmt::Display for ProjPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Finite(x) => write!(f, "{x}"),
            Self::Infinity => f.write_str("inf"),
        }
    }
}

fn max_one(x: Rational) -> Rational {
    if x > Rational::one() {
        x
    } else {
        Rational::one()
    }
}

/// `d(x, y) = |x − y| / (max(|x|, 1)·max(|y|, 1))` and
/// `d(x, ∞) = 1/max(|x|, 1)`.
pub fn proj_distance(x: &ProjPoint, y: &ProjPoint, ctx: &PAdicContext) -> Rational {
    match (x, y) {
        (ProjPoint::Infinity, ProjPoint::Infinity) => Rational::zero(),
        (ProjPoint::Finite(a), ProjPoint::Infinity) | (ProjPoint::Infinity, ProjPoint::Finite(a)) => {
            max_one(padic_abs(a, ctx)).recip()
        }
        (ProjPoint::Finite(a), ProjPoint::Finite(b)) => {
            padic_abs(&(a - b), ctx) / (max_one(padic_abs(a, ctx)) * max_one(padic_abs(b, ctx)))
        }
    }
}

/// A closed ball `[a_r]` with `0 ≤ r ≤ 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ball {
    pub center: ProjPoint,
    pub radius: Rational,
}

impl Ball {
    pub fn new(center: ProjPoint, radius: Rational) -> Result<Self> {
        if radius.is_negative() || radius > Rational::one() {
            return Err(Error::OutOfRange {
                name: "radius",
                value: radius.to_f64().unwrap_or(f64::NAN),
                range: "[0, 1]",
            });
        }
        Ok(Self { center, radius })
    }
}

impl fmt::Display for Ball {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}", self.center, self.radius)
    }
}

fn dot_minus(a: Rational, b: &Rational) -> Rational {
    let d = a - b;
    if d.is_negative() {
        Rational::zero()
    } else {
        d
    }
}

/// `d(a_r, b_s) = |r − s| ∨ (d(a, b) ∸ (r ∧ s))`.
pub fn ball_distance(a: &Ball, b: &Ball, ctx: &PAdicContext) -> Rational {
    let radii = (&a.radius - &b.radius).abs();
    let smaller = if a.radius < b.radius { &a.radius } else { &b.radius };
    let centers = dot_minus(proj_distance(&a.center, &b.center, ctx), smaller);
    radii.max(centers)
}

/// `φ(x, a, r) = d(x, a) ∸ r`, the distance from `x` to `[a_r]`.
pub fn phi_ball(x: &ProjPoint, ball: &Ball, ctx: &PAdicContext) -> Rational {
    dot_minus(proj_distance(x, &ball.center, ctx), &ball.radius)
}

/// `(sup_x |φ(x, a, r) − φ(x, b, s)|, d(a_r, b_s))` over the witnesses.
pub fn sup_formula_check(
    a: &Ball,
    b: &Ball,
    witnesses: &[ProjPoint],
    ctx: &PAdicContext,
) -> Result<(Rational, Rational)> {
    let sup = witnesses
        .iter()
        .map(|x| (phi_ball(x, a, ctx) - phi_ball(x, b, ctx)).abs())
        .max()
        .ok_or(Error::Empty("witnesses"))?;
    Ok((sup, ball_distance(a, b, ctx)))
}

/// `[a_r] = [b_s]`: `r = s` and `d(a, b) ≤ r`.
pub fn ball_equal(a: &Ball, b: &Ball, ctx: &PAdicContext) -> bool {
    a.radius == b.radius && proj_distance(&a.center, &b.center, ctx) <= a.radius
}

/// Random points: rationals `n/d` with `|n| ≤ 64`, `d ≤ 16`, plus `∞` and
/// powers of the prime so that every valuation class is hit.
pub fn sample_points<R: Rng>(rng: &mut R, count: usize, ctx: &PAdicContext) -> Vec<ProjPoint> {
    let p = ctx.prime() as i64;
    (0..count)
        .map(|_| match rng.random_range(0..10) {
            0 => ProjPoint::Infinity,
            1 => {
                let k = rng.random_range(0..4u32);
                let sign = if rng.random() { 1 } else { -1 };
                if rng.random() {
                    ProjPoint::finite(sign * p.pow(k), 1)
                } else {
                    ProjPoint::finite(sign, p.pow(k))
                }
            }
            _ => ProjPoint::finite(rng.random_range(-64..=64), rng.random_range(1..=16)),
        })
        .collect()
}

/// Random balls with radii drawn from `{0, 1, j/12, p^{−k}}`.
pub fn sample_balls<R: Rng>(rng: &mut R, count: usize, ctx: &PAdicContext) -> Vec<Ball> {
    let centers = sample_points(rng, count, ctx);
    let p = ctx.prime() as i64;
    centers
        .into_iter()
        .map(|center| {
            let radius = match rng.random_range(0..4) {
                0 => Rational::zero(),
                1 => Rational::one(),
                2 => Rational::new(rng.random_range(0..=12).into(), 12.into()),
                _ => Rational::new(1.into(), p.pow(rng.random_range(0..4u32)).into()),
            };
            Ball::new(center, radius).expect("radius in [0, 1]")
        })
        .collect()
}

/// Outcome of [`triangle_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleReport {
    pub triples: usize,
    pub violations: usize,
    /// Smallest `d(a,b) + d(b,c) − d(a,c)` over all orderings.
    pub min_slack: Rational,
}

/// Checks `d(x, z) ≤ d(x, y) + d(y, z)` for every unordered triple and each
/// choice of middle point. Distances are computed once; when all of them
/// share a denominator that fits in `i128` the comparisons run on integers.
pub fn triangle_check(balls: &[Ball], ctx: &PAdicContext) -> TriangleReport {
    let n = balls.len();
    let mut dist = vec![Rational::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = ball_distance(&balls[i], &balls[j], ctx);
            dist[i * n + j] = d.clone();
            dist[j * n + i] = d;
        }
    }
    let lcm = dist
        .iter()
        .fold(BigInt::one(), |acc, d| num_integer::Integer::lcm(&acc, d.denom()));
    let scaled: Option<Vec<i128>> = dist
        .iter()
        .map(|d| (d.numer() * (&lcm / d.denom())).to_i128())
        .collect();
    let mut triples = 0;
    let mut violations = 0;
    match scaled {
        Some(m) => {
            let mut min_slack = i128::MAX;
            for_each_triple(n, |a, b, c| {
                triples += 1;
                for (x, y, z) in [(a, b, c), (b, a, c), (a, c, b)] {
                    let slack = m[x * n + y] + m[y * n + z] - m[x * n + z];
                    min_slack = min_slack.min(slack);
                    violations += usize::from(slack < 0);
                }
            });
            let min_slack = if triples == 0 { Rational::zero() } else { Rational::new(min_slack.into(), lcm) };
            TriangleReport {
                triples,
                violations,
                min_slack,
            }
        }
        None => {
            let mut min_slack: Option<Rational> = None;
            for_each_triple(n, |a, b, c| {
                triples += 1;
                for (x, y, z) in [(a, b, c), (b, a, c), (a, c, b)] {
                    let slack = &dist[x * n + y] + &dist[y * n + z] - &dist[x * n + z];
                    violations += usize::from(slack.is_negative());
                    if min_slack.as_ref().is_none_or(|m| slack < *m) {
                        min_slack = Some(slack);
                    }
                }
            });
            TriangleReport {
                triples,
                violations,
                min_slack: min_slack.unwrap_or_else(Rational::zero),
            }
        }
    }
}

fn for_each_triple(n: usize, mut f: impl FnMut(usize, usize, usize)) {
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                f(a, b, c);
            }
        }
    }
}
