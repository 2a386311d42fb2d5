//! Exact Legendre–Fenchel transforms of piecewise-linear convex functions.
//!
//! A [`PlConvexFn`] is a convex function that is finite on a closed interval
//! (possibly unbounded), affine between finitely many breakpoints and `+∞`
//! outside its domain. Conjugation swaps breakpoints and slopes, so it is
//! exact for rational scalars.

use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A value of the extended real line.
#[derive(Debug, Clone, PartialEq, PartialOrd)]
pub enum Extended<T> {
    NegInf,
    Finite(T),
    PosInf,
}

impl<T: Scalar> Extended<T> {
    pub fn finite(&self) -> Option<&T> {
        match self {
            Self::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// `self <= other` with [`Scalar::tolerance`] slack on finite values.
    pub fn approx_le(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Finite(a), Self::Finite(b)) => a.approx_le(b),
            (Self::NegInf, _) | (_, Self::PosInf) => true,
            _ => false,
        }
    }
}

impl<T: fmt::Display> fmt::Display for Extended<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NegInf => f.write_str("-inf"),
            Self::Finite(v) => v.fmt(f),
            Self::PosInf => f.write_str("+inf"),
        }
    }
}

/// A proper convex piecewise-linear function in canonical form.
///
/// The domain is `[lower, upper]` where `None` stands for an infinite end.
/// `breakpoints` lie strictly inside the domain and `slopes` (one more than
/// the breakpoints) are strictly increasing. A single-point domain carries no
/// slopes. The stored value is taken at the anchor: the first breakpoint if
/// any, else the finite lower end, else the finite upper end, else `0`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlConvexFn<T> {
    lower: Option<T>,
    upper: Option<T>,
    breakpoints: Vec<T>,
    slopes: Vec<T>,
    knot_values: Vec<T>,
    anchor_value: T,
}

impl<T: Scalar> PlConvexFn<T> {
    /// Builds a function from its domain, breakpoints, slopes and the value
    /// `anchor.1` it takes at the point `anchor.0` of the domain.
    ///
    /// Adjacent equal slopes are merged, so the result is canonical.
    pub fn new(
        lower: Option<T>,
        upper: Option<T>,
        breakpoints: Vec<T>,
        slopes: Vec<T>,
        anchor: (T, T),
    ) -> Result<Self> {
        let non_finite = lower
            .iter()
            .chain(&upper)
            .chain(&breakpoints)
            .chain(&slopes)
            .chain([&anchor.0, &anchor.1])
            .any(|v| !v.is_finite_value());
        if non_finite {
            return Err(Error::Improper("non-finite parameter".into()));
        }
        if let (Some(l), Some(u)) = (&lower, &upper) {
            if l > u {
                return Err(Error::Improper(format!("empty domain [{l}, {u}]")));
            }
            if l == u {
                if !breakpoints.is_empty() {
                    return Err(Error::Improper("a point domain has no breakpoints".into()));
                }
                if anchor.0 != *l {
                    return Err(Error::OutsideDomain(anchor.0.to_f64()));
                }
                return Ok(Self::point(l.clone(), anchor.1));
            }
        }
        if slopes.len() != breakpoints.len() + 1 {
            return Err(Error::LengthMismatch {
                expected: breakpoints.len() + 1,
                found: slopes.len(),
            });
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Improper("breakpoints must be strictly increasing".into()));
        }
        if slopes.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Improper("slopes must be nondecreasing".into()));
        }
        let inside = |x: &T| {
            lower.as_ref().is_none_or(|l| x > l) && upper.as_ref().is_none_or(|u| x < u)
        };
        if !breakpoints.iter().all(inside) {
            return Err(Error::Improper(
                "breakpoints must lie strictly inside the domain".into(),
            ));
        }
        let in_domain = lower.as_ref().is_none_or(|l| anchor.0 >= *l)
            && upper.as_ref().is_none_or(|u| anchor.0 <= *u);
        if !in_domain {
            return Err(Error::OutsideDomain(anchor.0.to_f64()));
        }

        let (breakpoints, slopes) = merge_equal_slopes(breakpoints, slopes);
        // Provisional form anchored at the given point, then re-anchored.
        let provisional = Self::assemble(
            lower.clone(),
            upper.clone(),
            breakpoints.clone(),
            slopes.clone(),
            anchor.0.clone(),
            anchor.1.clone(),
        );
        let canonical = provisional.anchor_point();
        let value = provisional
            .value(&canonical)
            .expect("anchor point lies in the domain");
        Ok(Self::assemble(lower, upper, breakpoints, slopes, canonical, value))
    }

    /// The function equal to `value` at `x` and `+∞` elsewhere.
    pub fn point(x: T, value: T) -> Self {
        Self {
            lower: Some(x.clone()),
            upper: Some(x),
            breakpoints: Vec::new(),
            slopes: Vec::new(),
            knot_values: Vec::new(),
            anchor_value: value,
        }
    }

    /// `x ↦ slope·x + intercept` on the whole line.
    pub fn linear(slope: T, intercept: T) -> Self {
        Self::assemble(None, None, Vec::new(), vec![slope], T::zero(), intercept)
    }

    /// `x ↦ |x|`.
    pub fn abs() -> Self {
        Self::assemble(
            None,
            None,
            vec![T::zero()],
            vec![-T::one(), T::one()],
            T::zero(),
            T::zero(),
        )
    }

    /// `x ↦ weight · Σⱼ (scale·x − vⱼ)⁺` on the whole line, for `scale ≥ 0`
    /// and `weight > 0`.
    pub fn hinge_sum(scale: &T, offsets: &[T], weight: &T) -> Self {
        if scale.is_zero() || offsets.is_empty() {
            let constant = weight.clone()
                * offsets
                    .iter()
                    .fold(T::zero(), |acc, v| acc + v.clone().negative_part());
            return Self::linear(T::zero(), constant);
        }
        let mut kinks: Vec<T> = offsets.iter().map(|v| v.clone() / scale.clone()).collect();
        kinks.sort_by(|a, b| a.total_cmp_value(b));
        let step = weight.clone() * scale.clone();
        let mut breakpoints: Vec<T> = Vec::with_capacity(kinks.len());
        let mut slopes = vec![T::zero()];
        let mut passed = 0usize;
        for k in kinks {
            passed += 1;
            let slope = step.clone() * T::from_usize(passed);
            if breakpoints.last() == Some(&k) {
                *slopes.last_mut().expect("nonempty") = slope;
            } else {
                breakpoints.push(k);
                slopes.push(slope);
            }
        }
        let anchor = breakpoints[0].clone();
        Self::assemble(None, None, breakpoints, slopes, anchor, T::zero())
    }

    fn assemble(
        lower: Option<T>,
        upper: Option<T>,
        breakpoints: Vec<T>,
        slopes: Vec<T>,
        anchor: T,
        anchor_value: T,
    ) -> Self {
        let mut out = Self {
            lower,
            upper,
            breakpoints,
            slopes,
            knot_values: Vec::new(),
            anchor_value: anchor_value.clone(),
        };
        if out.breakpoints.is_empty() {
            // Re-anchor at the canonical point along the single piece.
            let canonical = out.anchor_point();
            if !out.slopes.is_empty() {
                out.anchor_value = anchor_value + out.slopes[0].clone() * (canonical - anchor);
            }
            return out;
        }
        // Value at the first breakpoint from the value at `anchor`.
        let first = out.affine_from(&anchor, &anchor_value, &out.breakpoints[0].clone());
        let mut values = Vec::with_capacity(out.breakpoints.len());
        values.push(first);
        for i in 1..out.breakpoints.len() {
            let prev = values[i - 1].clone();
            let dx = out.breakpoints[i].clone() - out.breakpoints[i - 1].clone();
            values.push(prev + out.slopes[i].clone() * dx);
        }
        out.anchor_value = values[0].clone();
        out.knot_values = values;
        out
    }

    /// Value at `target` given the value at `from`, integrating the slopes.
    /// Only used while assembling, before knot values are cached.
    fn affine_from(&self, from: &T, value: &T, target: &T) -> T {
        let (lo, hi, sign) = if from <= target {
            (from.clone(), target.clone(), T::one())
        } else {
            (target.clone(), from.clone(), -T::one())
        };
        let mut acc = T::zero();
        let mut cursor = lo.clone();
        for (i, b) in self.breakpoints.iter().enumerate() {
            if *b <= cursor {
                continue;
            }
            let end = if *b < hi { b.clone() } else { hi.clone() };
            acc = acc + self.slopes[i].clone() * (end.clone() - cursor.clone());
            cursor = end;
            if cursor >= hi {
                break;
            }
        }
        if cursor < hi {
            let last = self.slopes.last().expect("nonempty").clone();
            acc = acc + last * (hi - cursor);
        }
        value.clone() + sign * acc
    }

    pub fn lower(&self) -> Option<&T> {
        self.lower.as_ref()
    }

    pub fn upper(&self) -> Option<&T> {
        self.upper.as_ref()
    }

    pub fn breakpoints(&self) -> &[T] {
        &self.breakpoints
    }

    pub fn slopes(&self) -> &[T] {
        &self.slopes
    }

    pub fn is_point(&self) -> bool {
        self.slopes.is_empty()
    }

    /// The canonical anchor point.
    pub fn anchor_point(&self) -> T {
        self.breakpoints
            .first()
            .or(self.lower.as_ref())
            .or(self.upper.as_ref())
            .cloned()
            .unwrap_or_else(T::zero)
    }

    pub fn anchor_value(&self) -> &T {
        &self.anchor_value
    }

    pub fn contains(&self, x: &T) -> bool {
        self.lower.as_ref().is_none_or(|l| x >= l) && self.upper.as_ref().is_none_or(|u| x <= u)
    }

    /// `φ(x)`, or `None` where `φ = +∞`.
    pub fn value(&self, x: &T) -> Option<T> {
        if !self.contains(x) {
            return None;
        }
        if self.is_point() {
            return Some(self.anchor_value.clone());
        }
        if self.breakpoints.is_empty() || self.knot_values.is_empty() {
            let a = self.anchor_point();
            return Some(self.anchor_value.clone() + self.slopes[0].clone() * (x.clone() - a));
        }
        // Number of breakpoints strictly below x.
        let k = self.breakpoints.partition_point(|b| b < x);
        Some(if k == 0 {
            self.knot_values[0].clone() + self.slopes[0].clone() * (x.clone() - self.breakpoints[0].clone())
        } else {
            self.knot_values[k - 1].clone()
                + self.slopes[k].clone() * (x.clone() - self.breakpoints[k - 1].clone())
        })
    }

    /// Finite points where the function may attain a supremum of `tx − φ(x)`:
    /// breakpoints and finite domain ends.
    fn knots(&self) -> Vec<T> {
        let mut knots = Vec::with_capacity(self.breakpoints.len() + 2);
        knots.extend(self.lower.iter().cloned());
        knots.extend(self.breakpoints.iter().cloned());
        if self.upper != self.lower {
            knots.extend(self.upper.iter().cloned());
        }
        knots
    }

    /// `φ*(t) = sup_x tx − φ(x)`, exact.
    pub fn conjugate(&self) -> Self {
        if self.is_point() {
            let a = self.lower.clone().expect("point domain");
            return Self::linear(a, -self.anchor_value.clone());
        }
        let first = self.slopes[0].clone();
        let last = self.slopes.last().expect("nonempty").clone();
        if self.lower.is_none() && self.upper.is_none() && self.breakpoints.is_empty() {
            // Affine on the line: the conjugate lives at the single slope.
            let intercept = self.anchor_value.clone() - first.clone() * self.anchor_point();
            return Self::point(first, -intercept);
        }
        let lower = self.lower.is_none().then(|| first.clone());
        let upper = self.upper.is_none().then(|| last.clone());
        let k = self.slopes.len();
        let skip_first = usize::from(self.lower.is_none());
        let skip_last = usize::from(self.upper.is_none());
        let breakpoints: Vec<T> = self.slopes[skip_first..k - skip_last].to_vec();
        let mut slopes = Vec::with_capacity(breakpoints.len() + 1);
        slopes.extend(self.lower.iter().cloned());
        slopes.extend(self.breakpoints.iter().cloned());
        slopes.extend(self.upper.iter().cloned());

        let mut out = Self {
            lower,
            upper,
            breakpoints,
            slopes,
            knot_values: Vec::new(),
            anchor_value: T::zero(),
        };
        let anchor = out.anchor_point();
        let value = self.sup_affine(&anchor);
        Self::assemble(
            out.lower.take(),
            out.upper.take(),
            out.breakpoints,
            out.slopes,
            anchor,
            value,
        )
    }

    /// `max over knots of t·x − φ(x)`: the conjugate at a slope `t` in the
    /// conjugate's domain.
    fn sup_affine(&self, t: &T) -> T {
        self.knots()
            .into_iter()
            .map(|x| {
                let v = self.value(&x).expect("knot in domain");
                t.clone() * x - v
            })
            .reduce(|a, b| a.max_of(b))
            .expect("at least one knot")
    }

    /// `φ** = φ` for every proper convex PL function; computed by conjugating twice.
    pub fn biconjugate(&self) -> Self {
        self.conjugate().conjugate()
    }

    /// Left and right derivatives at `x`. Outward derivatives at domain ends are infinite.
    pub fn one_sided_derivs(&self, x: &T) -> Result<(Extended<T>, Extended<T>)> {
        if !self.contains(x) {
            return Err(Error::OutsideDomain(x.to_f64()));
        }
        if self.is_point() {
            return Ok((Extended::NegInf, Extended::PosInf));
        }
        let k = self.breakpoints.partition_point(|b| b < x);
        let at_break = self.breakpoints.get(k) == Some(x);
        let left = if self.lower.as_ref() == Some(x) {
            Extended::NegInf
        } else {
            Extended::Finite(self.slopes[k].clone())
        };
        let right = if self.upper.as_ref() == Some(x) {
            Extended::PosInf
        } else if at_break {
            Extended::Finite(self.slopes[k + 1].clone())
        } else {
            Extended::Finite(self.slopes[k].clone())
        };
        Ok((left, right))
    }

    /// Evaluates independently the three equivalent conditions
    /// `φ(x) + φ*(t) = tx`, `D⁻φ*(t) ≤ x ≤ D⁺φ*(t)` and `D⁻φ(x) ≤ t ≤ D⁺φ(x)`.
    pub fn attainment_check(&self, x: &T, t: &T) -> Result<(bool, bool, bool)> {
        let star = self.conjugate();
        self.attainment_check_with(&star, x, t)
    }

    /// As [`PlConvexFn::attainment_check`] with a precomputed conjugate.
    pub fn attainment_check_with(&self, star: &Self, x: &T, t: &T) -> Result<(bool, bool, bool)> {
        let phi_x = self.value(x).ok_or_else(|| Error::OutsideDomain(x.to_f64()))?;
        let star_t = star.value(t).ok_or_else(|| Error::OutsideDomain(t.to_f64()))?;
        let equality = (phi_x + star_t).approx_eq(&(t.clone() * x.clone()));
        let between = |lo: &Extended<T>, v: &T, hi: &Extended<T>| {
            let v = Extended::Finite(v.clone());
            lo.approx_le(&v) && v.approx_le(hi)
        };
        let (sl, sr) = star.one_sided_derivs(t)?;
        let (pl, pr) = self.one_sided_derivs(x)?;
        Ok((equality, between(&sl, x, &sr), between(&pl, t, &pr)))
    }

    /// Approximate equality of the canonical forms.
    pub fn approx_eq(&self, other: &Self) -> bool {
        let opt_eq = |a: &Option<T>, b: &Option<T>| match (a, b) {
            (Some(a), Some(b)) => a.approx_eq(b),
            (None, None) => true,
            _ => false,
        };
        let vec_eq = |a: &[T], b: &[T]| a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y));
        opt_eq(&self.lower, &other.lower)
            && opt_eq(&self.upper, &other.upper)
            && vec_eq(&self.breakpoints, &other.breakpoints)
            && vec_eq(&self.slopes, &other.slopes)
            && self.anchor_value.approx_eq(&other.anchor_value)
    }

    /// Converts the scalar type, e.g. from exact rationals to floats.
    pub fn map_scalar<U: Scalar>(&self, f: impl Fn(&T) -> U) -> PlConvexFn<U> {
        PlConvexFn {
            lower: self.lower.as_ref().map(&f),
            upper: self.upper.as_ref().map(&f),
            breakpoints: self.breakpoints.iter().map(&f).collect(),
            slopes: self.slopes.iter().map(&f).collect(),
            knot_values: self.knot_values.iter().map(&f).collect(),
            anchor_value: f(&self.anchor_value),
        }
    }
}

fn merge_equal_slopes<T: Scalar>(breakpoints: Vec<T>, slopes: Vec<T>) -> (Vec<T>, Vec<T>) {
    let mut out_b = Vec::with_capacity(breakpoints.len());
    let mut out_s = Vec::with_capacity(slopes.len());
    let mut slopes = slopes.into_iter();
    out_s.push(slopes.next().expect("at least one slope"));
    for (b, s) in breakpoints.into_iter().zip(slopes) {
        if *out_s.last().expect("nonempty") != s {
            out_b.push(b);
            out_s.push(s);
        }
    }
    (out_b, out_s)
}

impl<T: Scalar> fmt::Display for PlConvexFn<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let end = |v: &Option<T>, inf: &str| v.as_ref().map_or(inf.to_string(), |v| v.to_string());
        write!(
            f,
            "domain [{}, {}], breakpoints [",
            end(&self.lower, "-inf"),
            end(&self.upper, "+inf")
        )?;
        for (i, b) in self.breakpoints.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str("], slopes [")?;
        for (i, s) in self.slopes.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "], value {} at {}", self.anchor_value, self.anchor_point())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    /// `½(3x+2)⁺ + ½(3x−4)⁺`.
    fn psi_instance() -> PlConvexFn<Q> {
        PlConvexFn::hinge_sum(&q(3, 1), &[q(-2, 1), q(4, 1)], &q(1, 2))
    }

    #[test]
    fn abs_conjugate_is_interval_indicator() {
        let star = PlConvexFn::<Q>::abs().conjugate();
        assert_eq!(star.lower(), Some(&q(-1, 1)));
        assert_eq!(star.upper(), Some(&q(1, 1)));
        assert_eq!(star.value(&q(1, 2)), Some(q(0, 1)));
        assert_eq!(star.value(&q(2, 1)), None);
        assert_eq!(star.conjugate(), PlConvexFn::abs());
    }

    #[test]
    fn psi_instance_conjugate() {
        let psi = psi_instance();
        assert_eq!(psi.breakpoints(), &[q(-2, 3), q(4, 3)]);
        assert_eq!(psi.slopes(), &[q(0, 1), q(3, 2), q(3, 1)]);
        let star = psi.conjugate();
        assert_eq!(star.value(&q(3, 2)), Some(q(-1, 1)));
        assert_eq!(star.lower(), Some(&q(0, 1)));
        assert_eq!(star.upper(), Some(&q(3, 1)));
        let bi = psi.biconjugate();
        assert_eq!(bi, psi);
        for b in psi.breakpoints() {
            assert_eq!(bi.value(b), psi.value(b));
        }
    }

    #[test]
    fn linear_conjugates_to_point() {
        let lin = PlConvexFn::linear(q(2, 1), q(5, 1));
        let star = lin.conjugate();
        assert!(star.is_point());
        assert_eq!(star.value(&q(2, 1)), Some(q(-5, 1)));
        assert_eq!(star.value(&q(1, 1)), None);
        assert_eq!(lin.biconjugate(), lin);
    }

    #[test]
    fn derivatives() {
        let abs = PlConvexFn::<Q>::abs();
        assert_eq!(
            abs.one_sided_derivs(&q(0, 1)).unwrap(),
            (Extended::Finite(q(-1, 1)), Extended::Finite(q(1, 1)))
        );
        assert_eq!(
            abs.one_sided_derivs(&q(2, 1)).unwrap(),
            (Extended::Finite(q(1, 1)), Extended::Finite(q(1, 1)))
        );
        assert_eq!(
            psi_instance().one_sided_derivs(&q(-2, 3)).unwrap(),
            (Extended::Finite(q(0, 1)), Extended::Finite(q(3, 2)))
        );
        let star = abs.conjugate();
        assert_eq!(
            star.one_sided_derivs(&q(1, 1)).unwrap(),
            (Extended::Finite(q(0, 1)), Extended::PosInf)
        );
        assert!(matches!(star.one_sided_derivs(&q(3, 1)), Err(Error::OutsideDomain(_))));
    }

    #[test]
    fn attainment_examples() {
        let abs = PlConvexFn::<Q>::abs();
        assert_eq!(abs.attainment_check(&q(0, 1), &q(1, 2)).unwrap(), (true, true, true));
        assert_eq!(abs.attainment_check(&q(2, 1), &q(1, 2)).unwrap(), (false, false, false));
        assert_eq!(abs.attainment_check(&q(2, 1), &q(1, 1)).unwrap(), (true, true, true));
        assert!(abs.attainment_check(&q(0, 1), &q(2, 1)).is_err());
    }

    #[test]
    fn construction_merges_and_reanchors() {
        let f = PlConvexFn::new(
            Some(q(-1, 1)),
            None,
            vec![q(0, 1), q(1, 1)],
            vec![q(1, 1), q(1, 1), q(2, 1)],
            (q(-1, 1), q(0, 1)),
        )
        .unwrap();
        assert_eq!(f.breakpoints(), &[q(1, 1)]);
        assert_eq!(f.value(&q(1, 1)), Some(q(2, 1)));
        assert_eq!(f.value(&q(3, 1)), Some(q(6, 1)));
        assert_eq!(f.value(&q(-2, 1)), None);
    }

    #[test]
    fn construction_errors() {
        let bad_order = PlConvexFn::new(None, None, vec![q(0, 1)], vec![q(1, 1), q(0, 1)], (q(0, 1), q(0, 1)));
        assert!(matches!(bad_order, Err(Error::Improper(_))));
        let empty = PlConvexFn::new(Some(q(1, 1)), Some(q(0, 1)), vec![], vec![q(0, 1)], (q(0, 1), q(0, 1)));
        assert!(matches!(empty, Err(Error::Improper(_))));
        let outside = PlConvexFn::new(Some(q(0, 1)), Some(q(1, 1)), vec![q(1, 1)], vec![q(0, 1), q(1, 1)], (q(0, 1), q(0, 1)));
        assert!(matches!(outside, Err(Error::Improper(_))));
        let count = PlConvexFn::new(None, None, vec![q(0, 1)], vec![q(0, 1)], (q(0, 1), q(0, 1)));
        assert!(matches!(count, Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn bounded_segment_round_trip() {
        let seg = PlConvexFn::new(
            Some(q(-1, 1)),
            Some(q(2, 1)),
            vec![q(0, 1)],
            vec![q(-1, 2), q(3, 1)],
            (q(0, 1), q(1, 1)),
        )
        .unwrap();
        let star = seg.conjugate();
        assert_eq!(star.lower(), None);
        assert_eq!(star.upper(), None);
        assert_eq!(star.slopes(), &[q(-1, 1), q(0, 1), q(2, 1)]);
        assert_eq!(star.biconjugate(), star);
        assert_eq!(seg.biconjugate(), seg);
    }

    #[test]
    fn float_instance() {
        let psi = PlConvexFn::<f64>::hinge_sum(&3.0, &[-2.0, 4.0], &0.5);
        let star = psi.conjugate();
        assert!((star.value(&1.5).unwrap() + 1.0).abs() < 1e-12);
        assert!(psi.biconjugate().approx_eq(&psi));
    }
}
