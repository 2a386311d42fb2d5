//! `‖t‖ = sup_{[−1,1]ⁿ} |t|`.
//!
//! Restricted to a segment a term is a one-dimensional piecewise-linear
//! function that can be built exactly, bottom up. By homogeneity the sup over
//! the cube is attained on its boundary. In one and two variables the
//! boundary is a union of segments and the result is exact; in higher
//! dimensions lines on every face are scanned exactly and the gap between
//! them is covered by the term's Lipschitz constant.

use super::{Expr, LatticeTerm};
use crate::scalar::Scalar;

/// Lipschitz constant of `t` with respect to the sup norm on inputs.
pub fn lipschitz_bound<T: Scalar>(t: &LatticeTerm<T>) -> T {
    lipschitz(t.expr())
}

fn lipschitz<T: Scalar>(e: &Expr<T>) -> T {
    match e {
        Expr::Zero => T::zero(),
        Expr::Var(_) => T::one(),
        Expr::Neg(a) | Expr::Abs(a) => lipschitz(a),
        Expr::Scale(q, a) => q.abs() * lipschitz(a),
        Expr::HalfSum(a, b) => (lipschitz(a) + lipschitz(b)) * T::half(),
        Expr::Join(a, b) | Expr::Meet(a, b) => lipschitz(a).max_of(lipschitz(b)),
    }
}

/// A continuous piecewise-linear function on `[0, 1]`, stored by knots.
#[derive(Debug, Clone)]
struct Segment<T> {
    knots: Vec<(T, T)>,
}

impl<T: Scalar> Segment<T> {
    fn linear(a: T, b: T) -> Self {
        Self {
            knots: vec![(T::zero(), a), (T::one(), b)],
        }
    }

    fn map(mut self, f: impl Fn(T) -> T) -> Self {
        for k in &mut self.knots {
            k.1 = f(k.1.clone());
        }
        self
    }

    fn at(&self, s: &T) -> T {
        let i = self.knots.partition_point(|(x, _)| x < s);
        if i < self.knots.len() && self.knots[i].0 == *s {
            return self.knots[i].1.clone();
        }
        let (x0, y0) = &self.knots[i - 1];
        let (x1, y1) = &self.knots[i];
        y0.clone() + (y1.clone() - y0.clone()) * (s.clone() - x0.clone()) / (x1.clone() - x0.clone())
    }

    /// Pointwise combination; `crossings` adds the zeros of `a − b` so that
    /// max/min stay piecewise linear on the merged knots.
    fn combine(&self, other: &Self, crossings: bool, f: impl Fn(T, T) -> T) -> Self {
        let mut xs: Vec<T> = self
            .knots
            .iter()
            .chain(&other.knots)
            .map(|(x, _)| x.clone())
            .collect();
        xs.sort_by(|a, b| a.total_cmp_value(b));
        xs.dedup();
        let pairs: Vec<(T, T, T)> = xs
            .into_iter()
            .map(|x| {
                let (a, b) = (self.at(&x), other.at(&x));
                (x, a, b)
            })
            .collect();
        let mut knots = Vec::with_capacity(pairs.len() * 2);
        for (k, (x, a, b)) in pairs.iter().enumerate() {
            if crossings && k > 0 {
                let (px, pa, pb) = &pairs[k - 1];
                let d0 = pa.clone() - pb.clone();
                let d1 = a.clone() - b.clone();
                if (d0 > T::zero() && d1 < T::zero()) || (d0 < T::zero() && d1 > T::zero()) {
                    let s = px.clone() + (x.clone() - px.clone()) * d0.clone() / (d0.clone() - d1);
                    let va = pa.clone() + (a.clone() - pa.clone()) * (s.clone() - px.clone()) / (x.clone() - px.clone());
                    if s > *px && s < *x {
                        knots.push((s, va));
                    }
                }
            }
            knots.push((x.clone(), f(a.clone(), b.clone())));
        }
        // Crossing values were stored before applying f; a = b there so f
        // only matters for sums, which never request crossings.
        Self { knots }
    }

    fn max_abs(&self) -> T {
        self.knots
            .iter()
            .fold(T::zero(), |acc, (_, y)| acc.max_of(y.abs()))
    }
}

fn restrict<T: Scalar>(e: &Expr<T>, start: &[T], end: &[T]) -> Segment<T> {
    match e {
        Expr::Zero => Segment::linear(T::zero(), T::zero()),
        Expr::Var(i) => Segment::linear(start[*i].clone(), end[*i].clone()),
        Expr::Neg(a) => restrict(a, start, end).map(|v| -v),
        Expr::Scale(q, a) => restrict(a, start, end).map(|v| q.clone() * v),
        Expr::Abs(a) => {
            let inner = restrict(a, start, end);
            let zero = Segment::linear(T::zero(), T::zero());
            inner.combine(&zero, true, |v, _| v.abs())
        }
        Expr::HalfSum(a, b) => restrict(a, start, end).combine(&restrict(b, start, end), false, |x, y| {
            (x + y) * T::half()
        }),
        Expr::Join(a, b) => restrict(a, start, end).combine(&restrict(b, start, end), true, T::max_of),
        Expr::Meet(a, b) => restrict(a, start, end).combine(&restrict(b, start, end), true, T::min_of),
    }
}

/// `sup |t|` along the segment from `start` to `end`, exact.
pub(crate) fn segment_sup<T: Scalar>(t: &LatticeTerm<T>, start: &[T], end: &[T]) -> T {
    restrict(t.expr(), start, end).max_abs()
}

/// Number of lines per face direction above which the scan is coarsened.
const LINE_BUDGET: usize = 20_000;

/// `sup_{[−1,1]ⁿ} |t|`: exact for arity at most two, otherwise an upper
/// bound from exact line scans plus a Lipschitz margin.
pub fn term_sup_norm<T: Scalar>(t: &LatticeTerm<T>) -> T {
    let n = t.arity();
    let one = T::one();
    match n {
        0 => t.expr().eval(&[]).abs(),
        1 => {
            let a = t.expr().eval(std::slice::from_ref(&one)).abs();
            let b = t.expr().eval(&[-one]).abs();
            a.max_of(b)
        }
        2 => {
            let corners = [
                [one.clone(), one.clone()],
                [-one.clone(), one.clone()],
                [-one.clone(), -one.clone()],
                [one.clone(), -one.clone()],
            ];
            (0..4)
                .map(|k| segment_sup(t, &corners[k], &corners[(k + 1) % 4]))
                .fold(T::zero(), T::max_of)
        }
        _ => high_dim_sup(t, n),
    }
}

fn high_dim_sup<T: Scalar>(t: &LatticeTerm<T>, n: usize) -> T {
    // g grid values per free coordinate other than the scanned one.
    let free = n - 2;
    let mut g = 65usize;
    while g > 2 && g.pow(free as u32) > LINE_BUDGET {
        g = (g - 1) / 2 + 1;
    }
    let grid: Vec<T> = (0..g)
        .map(|k| T::from_ratio(2 * k as i64 - (g as i64 - 1), g as i64 - 1))
        .collect();
    let mut best = T::zero();
    let mut start = vec![T::zero(); n];
    let mut end = vec![T::zero(); n];
    let mut idx = vec![0usize; free];
    for fixed in 0..n {
        for sign in [T::one(), -T::one()] {
            for scan in (0..n).filter(|&k| k != fixed) {
                let others: Vec<usize> = (0..n).filter(|&k| k != fixed && k != scan).collect();
                idx.iter_mut().for_each(|v| *v = 0);
                loop {
                    start[fixed] = sign.clone();
                    end[fixed] = sign.clone();
                    start[scan] = -T::one();
                    end[scan] = T::one();
                    for (slot, &k) in others.iter().enumerate() {
                        start[k] = grid[idx[slot]].clone();
                        end[k] = grid[idx[slot]].clone();
                    }
                    best = best.max_of(segment_sup(t, &start, &end));
                    // Odometer over the grid.
                    let mut slot = 0;
                    while slot < free {
                        idx[slot] += 1;
                        if idx[slot] < g {
                            break;
                        }
                        idx[slot] = 0;
                        slot += 1;
                    }
                    if slot == free {
                        break;
                    }
                }
            }
        }
    }
    // Every boundary point is within half a grid step of a scanned line.
    let step = T::from_ratio(1, g as i64 - 1);
    best + lipschitz_bound(t) * step
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::krivine::parse_term;
    use crate::Rational;

    fn sup(text: &str, arity: usize) -> f64 {
        term_sup_norm(&parse_term::<f64>(text, arity).unwrap())
    }

    #[test]
    fn examples() {
        assert_eq!(sup("x0", 1), 1.0);
        assert_eq!(sup("x0 \\/ x1", 2), 1.0);
        assert_eq!(sup("3*abs(x0)", 1), 3.0);
        assert_eq!(sup("avg(x0, x1)", 2), 1.0);
        assert_eq!(sup("avg(x0, neg(x1)) /\\ 0", 2), 1.0);
        assert_eq!(sup("0", 2), 0.0);
    }

    #[test]
    fn exact_rational_two_dim() {
        let t = parse_term::<Rational>("abs(avg(x0, 1/3*x1)) \\/ 1/2*x1", 2).unwrap();
        assert_eq!(term_sup_norm(&t), Rational::from_ratio(2, 3));
    }

    #[test]
    fn crossing_inside_segment() {
        // |x0 − x1| peaks at the corners; max(x0, −x0) /\ 1/2 caps at 1/2.
        assert_eq!(sup("2*avg(x0, neg(x1))", 2), 2.0);
        assert_eq!(sup("abs(x0) /\\ 0.5*abs(x1)", 2), 0.5);
    }

    #[test]
    fn three_dims_is_an_upper_bound() {
        let t = parse_term::<f64>("2*avg(x0, 2*avg(x1, x2))", 3).unwrap();
        let s = term_sup_norm(&t);
        assert!(s >= 3.0 - 1e-12);
        assert!(s <= 3.0 + 3.0 / 32.0 + 1e-12);
        assert!(lipschitz_bound(&t) == 3.0);
    }
}
