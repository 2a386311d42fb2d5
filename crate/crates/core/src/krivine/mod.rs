//! Lattice terms in the language `{0, −, ½[x+y], |·|, ∨, ∧}` with rational
//! scaling, their evaluation on scalars and lattice elements, interpolation
//! and approximation of homogeneous functions on the sphere.

mod approx;
mod bound;
mod func;
mod parse;

use std::fmt;

pub use approx::{approximate_on_sphere, interpolate_on_circle, tangent_envelope, Approximation};
pub use bound::{lipschitz_bound, term_sup_norm};
pub use func::HomogeneousFn;
pub use parse::parse_term;

use crate::error::{Error, Result};
use crate::measure::LatticeElement;
use crate::scalar::{Real, Scalar};

/// Abstract syntax of a lattice term.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr<T> {
    Zero,
    Var(usize),
    Neg(Box<Expr<T>>),
    HalfSum(Box<Expr<T>>, Box<Expr<T>>),
    Abs(Box<Expr<T>>),
    Join(Box<Expr<T>>, Box<Expr<T>>),
    Meet(Box<Expr<T>>, Box<Expr<T>>),
    Scale(T, Box<Expr<T>>),
}

impl<T: Scalar> Expr<T> {
    pub fn var(i: usize) -> Self {
        Self::Var(i)
    }

    pub fn neg(self) -> Self {
        Self::Neg(Box::new(self))
    }

    pub fn abs(self) -> Self {
        Self::Abs(Box::new(self))
    }

    pub fn half_sum(self, other: Self) -> Self {
        Self::HalfSum(Box::new(self), Box::new(other))
    }

    pub fn join(self, other: Self) -> Self {
        Self::Join(Box::new(self), Box::new(other))
    }

    pub fn meet(self, other: Self) -> Self {
        Self::Meet(Box::new(self), Box::new(other))
    }

    pub fn scale(self, q: T) -> Self {
        Self::Scale(q, Box::new(self))
    }

    /// `a + b`, written as `2·½[a + b]`.
    pub fn add(self, other: Self) -> Self {
        self.half_sum(other).scale(T::two())
    }

    /// `a⁺ = a ∨ 0`.
    pub fn positive_part(self) -> Self {
        self.join(Self::Zero)
    }

    /// `a⁻ = (−a) ∨ 0`.
    pub fn negative_part(self) -> Self {
        self.neg().join(Self::Zero)
    }

    /// `q·a`, dropping zero coefficients and unit scalings.
    pub fn scaled(self, q: T) -> Self {
        if q.is_zero() {
            Self::Zero
        } else if q == T::one() {
            self
        } else if q == -T::one() {
            self.neg()
        } else {
            self.scale(q)
        }
    }

    /// `Σᵢ termsᵢ` as a balanced tree of doubled half-sums; `0` when empty.
    pub fn sum(mut terms: Vec<Self>) -> Self {
        terms.retain(|t| *t != Self::Zero);
        match terms.len() {
            0 => Self::Zero,
            1 => terms.pop().expect("one term"),
            len => {
                let right = terms.split_off(len / 2);
                Self::sum(terms).add(Self::sum(right))
            }
        }
    }

    /// `Σᵢ cᵢ·xᵢ`.
    pub fn linear(coefficients: &[T]) -> Self {
        Self::sum(
            coefficients
                .iter()
                .enumerate()
                .map(|(i, c)| Self::Var(i).scaled(c.clone()))
                .collect(),
        )
    }

    /// `⋁ᵢ termsᵢ`; `None` when empty.
    pub fn join_all(terms: Vec<Self>) -> Option<Self> {
        balanced(terms, Self::join)
    }

    /// `⋀ᵢ termsᵢ`; `None` when empty.
    pub fn meet_all(terms: Vec<Self>) -> Option<Self> {
        balanced(terms, Self::meet)
    }

    pub fn max_var(&self) -> Option<usize> {
        match self {
            Self::Zero => None,
            Self::Var(i) => Some(*i),
            Self::Neg(a) | Self::Abs(a) | Self::Scale(_, a) => a.max_var(),
            Self::HalfSum(a, b) | Self::Join(a, b) | Self::Meet(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Self::Zero | Self::Var(_) => 1,
            Self::Neg(a) | Self::Abs(a) | Self::Scale(_, a) => 1 + a.size(),
            Self::HalfSum(a, b) | Self::Join(a, b) | Self::Meet(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::Zero | Self::Var(_) => 1,
            Self::Neg(a) | Self::Abs(a) | Self::Scale(_, a) => 1 + a.depth(),
            Self::HalfSum(a, b) | Self::Join(a, b) | Self::Meet(a, b) => 1 + a.depth().max(b.depth()),
        }
    }

    /// Evaluation without arity checks; `point` must cover every variable.
    pub(crate) fn eval(&self, point: &[T]) -> T {
        match self {
            Self::Zero => T::zero(),
            Self::Var(i) => point[*i].clone(),
            Self::Neg(a) => -a.eval(point),
            Self::Abs(a) => a.eval(point).abs(),
            Self::Scale(q, a) => q.clone() * a.eval(point),
            Self::HalfSum(a, b) => (a.eval(point) + b.eval(point)) * T::half(),
            Self::Join(a, b) => a.eval(point).max_of(b.eval(point)),
            Self::Meet(a, b) => a.eval(point).min_of(b.eval(point)),
        }
    }

    pub fn map_scalar<U: Scalar>(&self, f: &impl Fn(&T) -> U) -> Expr<U> {
        match self {
            Self::Zero => Expr::Zero,
            Self::Var(i) => Expr::Var(*i),
            Self::Neg(a) => a.map_scalar(f).neg(),
            Self::Abs(a) => a.map_scalar(f).abs(),
            Self::Scale(q, a) => a.map_scalar(f).scale(f(q)),
            Self::HalfSum(a, b) => a.map_scalar(f).half_sum(b.map_scalar(f)),
            Self::Join(a, b) => a.map_scalar(f).join(b.map_scalar(f)),
            Self::Meet(a, b) => a.map_scalar(f).meet(b.map_scalar(f)),
        }
    }
}

fn balanced<T>(mut terms: Vec<T>, op: fn(T, T) -> T) -> Option<T> {
    match terms.len() {
        0 => None,
        1 => terms.pop(),
        len => {
            let right = terms.split_off(len / 2);
            Some(op(balanced(terms, op)?, balanced(right, op)?))
        }
    }
}

impl<T: Scalar> fmt::Display for Expr<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Zero => f.write_str("0"),
            Self::Var(i) => write!(f, "x{i}"),
            Self::Neg(a) => write!(f, "neg({a})"),
            Self::Abs(a) => write!(f, "abs({a})"),
            Self::HalfSum(a, b) => write!(f, "avg({a}, {b})"),
            Self::Join(a, b) => write!(f, "({a} \\/ {b})"),
            Self::Meet(a, b) => write!(f, "({a} /\\ {b})"),
            Self::Scale(q, a) => write!(f, "{q}*{a}"),
        }
    }
}

/// A lattice term together with its declared arity.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeTerm<T> {
    arity: usize,
    expr: Expr<T>,
}

impl<T: Scalar> LatticeTerm<T> {
    pub fn new(arity: usize, expr: Expr<T>) -> Result<Self> {
        if let Some(i) = expr.max_var() {
            if i >= arity {
                return Err(Error::VariableOutOfRange { index: i, arity });
            }
        }
        Ok(Self { arity, expr })
    }

    pub fn zero(arity: usize) -> Self {
        Self {
            arity,
            expr: Expr::Zero,
        }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn expr(&self) -> &Expr<T> {
        &self.expr
    }

    pub fn into_expr(self) -> Expr<T> {
        self.expr
    }

    /// `t(point)`, with `∨ = max`, `∧ = min` and `½[a+b]` the mean.
    pub fn eval_scalar(&self, point: &[T]) -> Result<T> {
        if point.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: point.len(),
            });
        }
        Ok(self.expr.eval(point))
    }

    /// `t(f̄)` computed atomwise.
    pub fn eval_element(&self, args: &[LatticeElement<T>]) -> Result<LatticeElement<T>> {
        if args.len() != self.arity {
            return Err(Error::ArityMismatch {
                expected: self.arity,
                found: args.len(),
            });
        }
        let Some(first) = args.first() else {
            return Err(Error::Empty("term arguments"));
        };
        if args.iter().any(|a| !a.same_space(first)) {
            return Err(Error::SpaceMismatch);
        }
        let mut point = Vec::with_capacity(args.len());
        let values = (0..first.len())
            .map(|i| {
                point.clear();
                point.extend(args.iter().map(|a| a.value(i).clone()));
                self.expr.eval(&point)
            })
            .collect();
        LatticeElement::new(first.space().clone(), values)
    }

    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LatticeTerm<U> {
        LatticeTerm {
            arity: self.arity,
            expr: self.expr.map_scalar(&f),
        }
    }
}

impl<T: Scalar> fmt::Display for LatticeTerm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.expr.fmt(f)
    }
}

fn check_sphere<T: Real>(x: &[T]) -> Result<()> {
    let norm = x.iter().fold(T::zero(), |acc, v| acc + *v * *v).sqrt();
    if !x.iter().all(|v| v.is_finite()) || (norm - T::one()).abs() > T::tolerance() {
        return Err(Error::NotOnSphere);
    }
    Ok(())
}

/// A term `t` with `t(x̄) = a` and `t(ȳ) = b` for distinct unit vectors.
///
/// Pick a coordinate `i` where the points differ. If `|xᵢ| = |yᵢ|` the
/// coordinates have opposite signs and `t = (a/|xᵢ|)·zᵢ^{∓} + (b/|xᵢ|)·zᵢ^{±}`
/// separates them. Otherwise orient so that `|xᵢ| < |yᵢ|`, choose `j` with
/// `|yⱼ| < |xⱼ|` and solve for `t = α·zᵢ + β·zⱼ`.
pub fn interpolating_term<T: Real>(x: &[T], y: &[T], a: T, b: T) -> Result<LatticeTerm<T>> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: y.len(),
        });
    }
    let n = x.len();
    check_sphere(x)?;
    check_sphere(y)?;
    let Some(i) = (0..n)
        .filter(|&i| x[i] != y[i])
        .max_by(|&i, &j| (x[i] - y[i]).abs().total_cmp_value(&(x[j] - y[j]).abs()))
    else {
        return Err(Error::CoincidentPoints);
    };
    if a.is_zero() && b.is_zero() {
        return Ok(LatticeTerm::zero(n));
    }
    let expr = if x[i].abs() == y[i].abs() {
        let c = x[i].abs();
        // Values on the positive and negative side of coordinate i.
        let (pos, neg) = if x[i] > T::zero() { (a, b) } else { (b, a) };
        Expr::sum(vec![
            Expr::var(i).positive_part().scaled(pos / c),
            Expr::var(i).negative_part().scaled(neg / c),
        ])
    } else {
        let (x, y, a, b) = if x[i].abs() < y[i].abs() { (x, y, a, b) } else { (y, x, b, a) };
        let j = (0..n)
            .filter(|&j| y[j].abs() < x[j].abs())
            .max_by(|&j, &k| {
                (x[j] * x[j] - y[j] * y[j]).total_cmp_value(&(x[k] * x[k] - y[k] * y[k]))
            })
            .expect("unit vectors with |xᵢ| < |yᵢ| have a coordinate with |yⱼ| < |xⱼ|");
        let det = x[j] * y[i] - x[i] * y[j];
        let alpha = (b * x[j] - a * y[j]) / det;
        let beta = (a * y[i] - b * x[i]) / det;
        Expr::sum(vec![Expr::var(i).scaled(alpha), Expr::var(j).scaled(beta)])
    };
    LatticeTerm::new(n, expr)
}
