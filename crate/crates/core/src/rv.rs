//! `[0,1]`-valued random variables: the connectives `¬, ½, ∨, ∧`,
//! conditional moments as canonical bases, conditional probabilities of
//! events, and the lift of a random variable to an event on a fibered space.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::measure::{cond_exp, ExtensionPair, LatticeElement, MeasureSpace, SubStructure};
use crate::scalar::{sum, Scalar};

/// A lattice element with every value in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RvElement<T>(LatticeElement<T>);

impl<T: Scalar> RvElement<T> {
    pub fn new(f: LatticeElement<T>) -> Result<Self> {
        if let Some(v) = f.values().iter().find(|v| **v < T::zero() || **v > T::one()) {
            return Err(Error::OutOfRange {
                name: "random variable value",
                value: v.to_f64(),
                range: "[0, 1]",
            });
        }
        Ok(Self(f))
    }

    pub fn from_values(space: Arc<MeasureSpace<T>>, values: Vec<T>) -> Result<Self> {
        Self::new(LatticeElement::new(space, values)?)
    }

    pub fn constant(space: Arc<MeasureSpace<T>>, c: T) -> Result<Self> {
        Self::new(LatticeElement::constant(space, c))
    }

    pub fn element(&self) -> &LatticeElement<T> {
        &self.0
    }

    pub fn into_element(self) -> LatticeElement<T> {
        self.0
    }

    pub fn values(&self) -> &[T] {
        self.0.values()
    }

    /// `E[X] = d(X, 0)`.
    pub fn expectation(&self) -> T {
        self.0.integral()
    }

    /// Clamps round-off from averaging back into `[0, 1]`.
    fn clamped(f: LatticeElement<T>) -> Self {
        Self(f.map(|v| v.clone().max_of(T::zero()).min_of(T::one())))
    }
}

/// Connectives of continuous logic on `[0,1]`-valued variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RvOp {
    /// `¬X = 1 − X`.
    Not,
    /// `X/2`.
    Half,
    Join,
    Meet,
}

pub fn rv_op<T: Scalar>(op: RvOp, x: &RvElement<T>, y: Option<&RvElement<T>>) -> Result<RvElement<T>> {
    let second = || {
        y.ok_or_else(|| Error::InvalidParameter(format!("{op:?} needs two operands")))
    };
    let out = match op {
        RvOp::Not => x.0.map(|v| T::one() - v.clone()),
        RvOp::Half => x.0.map(|v| v.clone() * T::half()),
        RvOp::Join => x.0.join(&second()?.0)?,
        RvOp::Meet => x.0.meet(&second()?.0)?,
    };
    Ok(RvElement(out))
}

/// A probability space with a conditioning algebra given by blocks that
/// partition every atom.
#[derive(Debug, Clone)]
pub struct EventAlgebra<T> {
    pub space: Arc<MeasureSpace<T>>,
    pub algebra: SubStructure,
}

impl<T: Scalar> EventAlgebra<T> {
    pub fn new(space: Arc<MeasureSpace<T>>, algebra: SubStructure) -> Result<Self> {
        if !space.total_mass().approx_eq(&T::one()) {
            return Err(Error::InvalidSpace(format!(
                "a probability space needs total mass 1, got {}",
                space.total_mass()
            )));
        }
        check_partition(&algebra, space.len())?;
        Ok(Self { space, algebra })
    }
}

fn check_partition(s: &SubStructure, atoms: usize) -> Result<()> {
    if s.atom_count() != atoms {
        return Err(Error::LengthMismatch {
            expected: s.atom_count(),
            found: atoms,
        });
    }
    if !s.covers_all() {
        return Err(Error::InvalidSubStructure(
            "conditioning blocks must cover every atom".into(),
        ));
    }
    Ok(())
}

/// `Πᵢ Xᵢ^{kᵢ}` atomwise.
fn monomial<T: Scalar>(xs: &[RvElement<T>], k: &[u32]) -> Result<LatticeElement<T>> {
    if xs.len() != k.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            found: k.len(),
        });
    }
    let first = xs.first().ok_or(Error::Empty("random variables"))?;
    let mut out = LatticeElement::constant(first.0.space().clone(), T::one());
    for (x, &power) in xs.iter().zip(k) {
        for _ in 0..power {
            out = out.mul(&x.0)?;
        }
    }
    Ok(out)
}

/// `E[X̄^k̄ | s]`.
pub fn cond_moment<T: Scalar>(xs: &[RvElement<T>], k: &[u32], s: &SubStructure) -> Result<RvElement<T>> {
    let m = monomial(xs, k)?;
    check_partition(s, m.len())?;
    Ok(RvElement::clamped(cond_exp(&m, s)?))
}

/// Outcome of [`least_squares_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquaresReport<T> {
    /// No candidate beats the conditional moment.
    pub optimal: bool,
    /// Smallest excess cost `‖X^k − y‖² − ‖X^k − E[X^k|s]‖²` over candidates
    /// away from the optimum: positive means the optimum is strict.
    pub margin: T,
}

/// Checks blockwise that `E[X^k|s]` minimises the `L₂` distance to `X^k`
/// among block constants from the grid `{j/steps}` and the two nearest
/// perturbations of the optimum.
pub fn least_squares_check<T: Scalar>(
    x: &RvElement<T>,
    k: u32,
    s: &SubStructure,
    steps: usize,
) -> Result<LeastSquaresReport<T>> {
    if steps == 0 {
        return Err(Error::InvalidParameter("grid needs at least one step".into()));
    }
    let target = monomial(std::slice::from_ref(x), &[k])?;
    check_partition(s, target.len())?;
    let means = s.block_means(&target)?;
    let w = target.space().weights();
    let h = T::from_ratio(1, steps as i64);
    let mut optimal = true;
    let mut margin: Option<T> = None;
    for (block, mean) in s.blocks().iter().zip(means) {
        let cost = |y: &T| {
            sum(block.iter().map(|&i| {
                let d = target.value(i).clone() - y.clone();
                w[i].clone() * d.clone() * d
            }))
        };
        let best = cost(&mean);
        let candidates = (0..=steps)
            .map(|j| T::from_usize(j) * h.clone())
            .chain([mean.clone() - h.clone(), mean.clone() + h.clone()]);
        for y in candidates {
            let excess = cost(&y) - best.clone();
            if excess < -T::tolerance() {
                optimal = false;
            }
            if !y.approx_eq(&mean) {
                margin = Some(match margin {
                    Some(m) => m.min_of(excess),
                    None => excess,
                });
            }
        }
    }
    Ok(LeastSquaresReport {
        optimal,
        margin: margin.unwrap_or_else(T::zero),
    })
}

/// `(E[X̄^k̄ Ȳ^ℓ̄], E[E[X̄^k̄|s]·Ȳ^ℓ̄])` for block-measurable `Ȳ`.
pub fn product_formula_check<T: Scalar>(
    xs: &[RvElement<T>],
    k: &[u32],
    ys: &[RvElement<T>],
    l: &[u32],
    s: &SubStructure,
) -> Result<(T, T)> {
    for y in ys {
        if let Some(block) = s.first_unmeasurable_block(&y.0)? {
            return Err(Error::NotMeasurable(block));
        }
    }
    let xk = monomial(xs, k)?;
    let yl = if ys.is_empty() {
        LatticeElement::constant(xk.space().clone(), T::one())
    } else {
        monomial(ys, l)?
    };
    let lhs = xk.mul(&yl)?.integral();
    let rhs = cond_moment(xs, k, s)?.0.mul(&yl)?.integral();
    Ok((lhs, rhs))
}

fn check_indicator<T: Scalar>(x: &RvElement<T>) -> Result<()> {
    match x
        .values()
        .iter()
        .position(|v| !v.is_zero() && *v != T::one())
    {
        Some(atom) => Err(Error::NotIndicator {
            atom,
            value: x.values()[atom].to_f64(),
        }),
        None => Ok(()),
    }
}

const MAX_EVENTS: usize = 20;

/// `P[⋀_{i∈S} Aᵢ | s]` for every nonempty `S`, listed by bitmask order with
/// `S` given as sorted indices.
pub fn apr_cb<T: Scalar>(events: &[RvElement<T>], s: &SubStructure) -> Result<Vec<(Vec<usize>, RvElement<T>)>> {
    if events.is_empty() {
        return Err(Error::Empty("events"));
    }
    if events.len() > MAX_EVENTS {
        return Err(Error::InvalidParameter(format!(
            "at most {MAX_EVENTS} events are supported"
        )));
    }
    for e in events {
        check_indicator(e)?;
    }
    check_partition(s, events[0].0.len())?;
    (1u32..1 << events.len())
        .map(|mask| {
            let subset: Vec<usize> = (0..events.len()).filter(|i| mask >> i & 1 == 1).collect();
            let mut meet = events[subset[0]].0.clone();
            for &i in &subset[1..] {
                meet = meet.meet(&events[i].0)?;
            }
            Ok((subset, RvElement::clamped(cond_exp(&meet, s)?)))
        })
        .collect()
}

/// The event `B_X = {(ω, r) : r ≤ X(ω)}` on the space fibered into `n` cells.
#[derive(Debug, Clone)]
pub struct LiftedEvent<T> {
    pub pair: ExtensionPair<T>,
    pub indicator: LatticeElement<T>,
    /// `P[B_X | s]` over the base space; equals `X`.
    pub cond_prob: RvElement<T>,
}

/// Lifts a grid-valued `X` measurable over `s` to an event whose conditional
/// probability over `s` is `X`.
pub fn lift_event<T: Scalar>(x: &RvElement<T>, s: &SubStructure, n: usize) -> Result<LiftedEvent<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("fiber needs at least one cell".into()));
    }
    check_partition(s, x.0.len())?;
    if let Some(block) = s.first_unmeasurable_block(&x.0)? {
        return Err(Error::NotMeasurable(block));
    }
    let mut rows = Vec::with_capacity(x.0.len());
    for (atom, v) in x.values().iter().enumerate() {
        let cells = (v.to_f64() * n as f64).round() as i64;
        let rounded = T::from_ratio(cells, n as i64);
        if !rounded.approx_eq(v) {
            return Err(Error::OffGrid {
                atom,
                value: v.to_f64(),
                rounded: rounded.to_f64(),
            });
        }
        rows.push(
            (0..n)
                .map(|j| if (j as i64) < cells { T::one() } else { T::zero() })
                .collect(),
        );
    }
    let pair = ExtensionPair::new(x.0.space().weights().to_vec(), n, false)?;
    let indicator = pair.element(rows, None, None)?;
    // Conditioning on s inside the fibered space: fibers are already
    // averaged by the base projection, then the blocks of s apply.
    let over_base = pair.cond_exp_base(&indicator)?;
    let over_base = LatticeElement::new(x.0.space().clone(), over_base.into_values())?;
    let cond_prob = RvElement::clamped(cond_exp(&over_base, s)?);
    Ok(LiftedEvent {
        pair,
        indicator,
        cond_prob,
    })
}

/// Per block, the distinct values of `x` with their normalised masses.
fn block_distribution<T: Scalar>(x: &LatticeElement<T>, block: &[usize]) -> Vec<(T, T)> {
    let w = x.space().weights();
    let mass = sum(block.iter().map(|&i| w[i].clone()));
    let mut points: Vec<(T, T)> = block
        .iter()
        .map(|&i| (x.value(i).clone(), w[i].clone() / mass.clone()))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp_value(&b.0));
    let mut out: Vec<(T, T)> = Vec::with_capacity(points.len());
    for (v, m) in points {
        match out.last_mut() {
            Some((last, acc)) if last.approx_eq(&v) => *acc = acc.clone() + m,
            _ => out.push((v, m)),
        }
    }
    out
}

fn union_support<T: Scalar>(a: &[(T, T)], b: &[(T, T)]) -> Vec<T> {
    let mut values: Vec<T> = a.iter().chain(b).map(|(v, _)| v.clone()).collect();
    values.sort_by(|x, y| x.total_cmp_value(y));
    values.dedup_by(|x, y| x.approx_eq(y));
    values
}

/// Masses `m` on distinct `support` points with `Σⱼ mⱼ·sⱼ^k = moments[k]`
/// for `k < support.len()`: the Vandermonde system, solved by elimination.
pub fn distribution_from_moments<T: Scalar>(support: &[T], moments: &[T]) -> Result<Vec<T>> {
    let v = support.len();
    if moments.len() < v {
        return Err(Error::LengthMismatch {
            expected: v,
            found: moments.len(),
        });
    }
    // Row k: s_0^k .. s_{v−1}^k | moments[k].
    let mut rows: Vec<Vec<T>> = (0..v)
        .map(|k| {
            let mut row: Vec<T> = support
                .iter()
                .map(|s| (0..k).fold(T::one(), |acc, _| acc * s.clone()))
                .collect();
            row.push(moments[k].clone());
            row
        })
        .collect();
    for col in 0..v {
        let pivot = (col..v)
            .max_by(|&a, &b| rows[a][col].abs().total_cmp_value(&rows[b][col].abs()))
            .expect("nonempty range");
        if rows[pivot][col].is_zero() {
            return Err(Error::InvalidParameter("support points must be distinct".into()));
        }
        rows.swap(col, pivot);
        for r in 0..v {
            if r != col && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone() / rows[col][col].clone();
                for c in col..=v {
                    let delta = factor.clone() * rows[col][c].clone();
                    rows[r][c] = rows[r][c].clone() - delta;
                }
            }
        }
    }
    Ok((0..v).map(|r| rows[r][v].clone() / rows[r][r].clone()).collect())
}

/// Outcome of [`moments_determine_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub moments_equal: bool,
    pub distributions_equal: bool,
    /// Distributions rebuilt from moments agree exactly when the moments do.
    pub reconstruction_consistent: bool,
}

impl MomentReport {
    /// Moment equality and distribution equality coincide.
    pub fn determines(&self) -> bool {
        self.moments_equal == self.distributions_equal && self.reconstruction_consistent
    }
}

/// Compares `E[X^k|s] = E[Y^k|s]` for `k ≤ max_k` with per-block equality of
/// distributions. Fails with [`Error::InsufficientMoments`] when some block
/// carries more than `max_k + 1` distinct values across `X` and `Y`, since
/// then moments cannot separate every pair of distributions.
pub fn moments_determine_check<T: Scalar>(
    x: &RvElement<T>,
    y: &RvElement<T>,
    s: &SubStructure,
    max_k: usize,
) -> Result<MomentReport> {
    if !x.0.same_space(&y.0) {
        return Err(Error::SpaceMismatch);
    }
    check_partition(s, x.0.len())?;
    let mut moments_equal = true;
    let mut distributions_equal = true;
    let mut reconstruction_consistent = true;
    for (b, block) in s.blocks().iter().enumerate() {
        let dx = block_distribution(&x.0, block);
        let dy = block_distribution(&y.0, block);
        let support = union_support(&dx, &dy);
        if support.len() > max_k + 1 {
            return Err(Error::InsufficientMoments {
                block: b,
                support: support.len(),
                max_k,
            });
        }
        let moments = |d: &[(T, T)]| -> Vec<T> {
            (0..=max_k)
                .map(|k| {
                    sum(d.iter().map(|(v, m)| {
                        m.clone() * (0..k).fold(T::one(), |acc, _| acc * v.clone())
                    }))
                })
                .collect()
        };
        let (mx, my) = (moments(&dx), moments(&dy));
        let block_moments_equal = mx.iter().zip(&my).all(|(a, c)| a.approx_eq(c));
        let on_support = |d: &[(T, T)]| -> Vec<T> {
            support
                .iter()
                .map(|s| {
                    d.iter()
                        .find(|(v, _)| v.approx_eq(s))
                        .map_or_else(T::zero, |(_, m)| m.clone())
                })
                .collect()
        };
        let block_dist_equal = on_support(&dx)
            .iter()
            .zip(on_support(&dy))
            .all(|(a, c)| a.approx_eq(&c));
        let rx = distribution_from_moments(&support, &mx)?;
        let ry = distribution_from_moments(&support, &my)?;
        let rebuilt_equal = rx.iter().zip(&ry).all(|(a, c)| a.approx_eq(c));
        reconstruction_consistent &= rebuilt_equal == block_dist_equal;
        moments_equal &= block_moments_equal;
        distributions_equal &= block_dist_equal;
    }
    Ok(MomentReport {
        moments_equal,
        distributions_equal,
        reconstruction_consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn space(weights: Vec<f64>) -> Arc<MeasureSpace<f64>> {
        Arc::new(MeasureSpace::new(weights).unwrap())
    }

    fn rv(space: &Arc<MeasureSpace<f64>>, values: Vec<f64>) -> RvElement<f64> {
        RvElement::from_values(space.clone(), values).unwrap()
    }

    #[test]
    fn connectives() {
        let sp = space(vec![0.5, 0.5]);
        let x = rv(&sp, vec![0.2, 0.9]);
        let not = rv_op(RvOp::Not, &x, None).unwrap();
        assert!(rv_op(RvOp::Not, &not, None).unwrap().element().approx_eq(x.element()));
        let one = RvElement::constant(sp.clone(), 1.0).unwrap();
        assert_eq!(rv_op(RvOp::Half, &one, None).unwrap().values(), &[0.5, 0.5]);
        let zero = RvElement::constant(sp.clone(), 0.0).unwrap();
        assert_eq!(rv_op(RvOp::Join, &x, Some(&zero)).unwrap(), x);
        assert!(rv_op(RvOp::Meet, &x, None).is_err());
        assert!(RvElement::from_values(sp, vec![0.5, 1.5]).is_err());
        assert!((x.expectation() - 0.55).abs() < 1e-12);
    }

    #[test]
    fn moments() {
        let sp = space(vec![0.5, 0.5]);
        let x = rv(&sp, vec![0.2, 0.8]);
        let s = SubStructure::trivial(2);
        let m1 = cond_moment(std::slice::from_ref(&x), &[1], &s).unwrap();
        let m2 = cond_moment(std::slice::from_ref(&x), &[2], &s).unwrap();
        assert!((m1.values()[0] - 0.5).abs() < 1e-12);
        assert!((m2.values()[0] - 0.34).abs() < 1e-12);
        assert_eq!(cond_moment(std::slice::from_ref(&x), &[0], &s).unwrap().values(), &[1.0, 1.0]);
        let fine = cond_moment(std::slice::from_ref(&x), &[3], &SubStructure::discrete(2)).unwrap();
        assert!((fine.values()[1] - 0.512).abs() < 1e-12);
        assert!(cond_moment(std::slice::from_ref(&x), &[1, 2], &s).is_err());
    }

    #[test]
    fn least_squares() {
        let sp = space(vec![0.25; 4]);
        let x = rv(&sp, vec![0.1, 0.7, 0.3, 0.3]);
        let s = SubStructure::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let report = least_squares_check(&x, 2, &s, 50).unwrap();
        assert!(report.optimal);
        assert!(report.margin > 0.0);
    }

    #[test]
    fn product_formula() {
        let sp = space(vec![0.1, 0.2, 0.3, 0.4]);
        let s = SubStructure::new(vec![vec![0, 3], vec![1, 2]], 4).unwrap();
        let x = rv(&sp, vec![0.1, 0.5, 0.9, 0.4]);
        let y = rv(&sp, vec![0.6, 0.2, 0.2, 0.6]);
        let (lhs, rhs) = product_formula_check(&[x.clone()], &[2], &[y.clone()], &[3], &s).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        let bad = rv(&sp, vec![0.6, 0.2, 0.3, 0.6]);
        assert_eq!(
            product_formula_check(&[x], &[1], &[bad], &[1], &s),
            Err(Error::NotMeasurable(1))
        );
    }

    #[test]
    fn event_probabilities() {
        let sp = space(vec![0.25; 4]);
        let s = SubStructure::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let a = rv(&sp, vec![1.0, 0.0, 1.0, 1.0]);
        let b = rv(&sp, vec![0.0, 1.0, 0.0, 0.0]);
        let cb = apr_cb(&[a.clone(), b], &s).unwrap();
        assert_eq!(cb.len(), 3);
        assert_eq!(cb[0].0, vec![0]);
        assert_eq!(cb[0].1.values(), &[0.5, 0.5, 1.0, 1.0]);
        assert_eq!(cb[2].0, vec![0, 1]);
        assert!(cb[2].1.element().is_zero());
        let same = apr_cb(&[a.clone(), a.clone()], &s).unwrap();
        assert!(same.iter().all(|(_, e)| *e == same[0].1));
        let half = rv(&sp, vec![0.5, 0.0, 0.0, 0.0]);
        assert_eq!(apr_cb(&[half], &s).unwrap_err(), Error::NotIndicator { atom: 0, value: 0.5 });
    }

    #[test]
    fn lifting() {
        let sp = space(vec![0.5, 0.5]);
        let s = SubStructure::discrete(2);
        let x = rv(&sp, vec![0.4, 0.4]);
        let lifted = lift_event(&x, &s, 5).unwrap();
        assert_eq!(lifted.pair.fiber(&lifted.indicator, 0), &[1.0, 1.0, 0.0, 0.0, 0.0]);
        assert!(lifted.cond_prob.element().approx_eq(x.element()));
        let zero = rv(&sp, vec![0.0, 1.0]);
        let lifted = lift_event(&zero, &s, 4).unwrap();
        assert_eq!(lifted.indicator.values(), &[0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0]);
        match lift_event(&rv(&sp, vec![0.33, 0.5]), &s, 4) {
            Err(Error::OffGrid { atom: 0, rounded, .. }) => assert_eq!(rounded, 0.25),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn moment_determination() {
        let sp = space(vec![0.25; 4]);
        let s = SubStructure::new(vec![vec![0, 1], vec![2, 3]], 4).unwrap();
        let x = rv(&sp, vec![0.0, 1.0, 1.0, 0.0]);
        let r = moments_determine_check(&x, &x, &s, 1).unwrap();
        assert!(r.moments_equal && r.distributions_equal && r.determines());
        let y = rv(&sp, vec![1.0, 1.0, 0.0, 1.0]);
        let r = moments_determine_check(&x, &y, &s, 1).unwrap();
        assert!(!r.moments_equal && !r.distributions_equal && r.determines());
        // Same mean, different support: one moment is not enough.
        let z = rv(&sp, vec![0.5, 0.5, 0.5, 0.5]);
        assert_eq!(
            moments_determine_check(&x, &z, &s, 1),
            Err(Error::InsufficientMoments { block: 0, support: 3, max_k: 1 })
        );
        let r = moments_determine_check(&x, &z, &s, 2).unwrap();
        assert!(!r.moments_equal && r.determines());
    }

    #[test]
    fn vandermonde_exact() {
        let q = |n, d| Rational::from_ratio(n, d);
        let support = [q(0, 1), q(1, 2), q(1, 1)];
        let masses = [q(1, 4), q(1, 2), q(1, 4)];
        let moments: Vec<Rational> = (0..3u32)
            .map(|k| {
                support
                    .iter()
                    .zip(&masses)
                    .map(|(s, m)| m * num_traits::pow::pow(s.clone(), k as usize))
                    .sum()
            })
            .collect();
        assert_eq!(distribution_from_moments(&support, &moments).unwrap(), masses.to_vec());
    }
}
