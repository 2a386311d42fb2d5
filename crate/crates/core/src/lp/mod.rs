//! Partial conditional expectations in `L_p` lattices.
//!
//! Over each base atom `ω` the fiber of `f` is a list of `n` cell values
//! `v₁..vₙ`. Then `Ψ_f(x)(ω) = (1/n)·Σⱼ (x·f₀(ω) − vⱼ)⁺`, its conjugate at
//! slope `t·f₀(ω)` is the partial conditional expectation `E_t[f|E](ω)`, and
//! the left derivative of that conjugate recovers the slice `f_t(ω)`, an
//! order statistic of the fiber.

mod base;
mod transport;

pub use base::{
    canonical_base_1type, canonical_base_ntype, p1_counterexample, remark_counterexample,
    CbFamily, LpCanonicalBase, NTypeBase, P1Report, RemarkReport,
};
pub use transport::{
    cond_exp_pairing_check, duality_pairing, lq_transport, transported_half_sum,
    transported_interval_convergence, TransportDeviation,
};

use crate::error::{Error, Result};
use crate::legendre::{Extended, PlConvexFn};
use crate::measure::{ExtensionPair, LatticeElement};
use crate::scalar::{sum, Real, Scalar};

pub(crate) fn check_unit<T: Scalar>(name: &'static str, t: &T, open: bool) -> Result<()> {
    let ok = if open {
        *t > T::zero() && *t < T::one()
    } else {
        *t >= T::zero() && *t <= T::one()
    };
    if ok {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value: t.to_f64(),
            range: if open { "(0, 1)" } else { "[0, 1]" },
        })
    }
}

/// `f₀ = E[|f| | E]`: the fiberwise mean of `|f|` over each base atom.
pub fn f_zero<T: Scalar>(f: &LatticeElement<T>, pair: &ExtensionPair<T>) -> Result<LatticeElement<T>> {
    pair.fiberwise(f, |fiber| {
        sum(fiber.iter().map(|v| v.abs())) / T::from_usize(fiber.len())
    })
}

/// The family `x ↦ Ψ_f(x)(ω)` together with `f₀`.
#[derive(Debug, Clone)]
pub struct PsiFamily<T> {
    f0: LatticeElement<T>,
    fibers: Vec<PlConvexFn<T>>,
    sorted: Vec<Vec<T>>,
}

/// Builds `Ψ_f`. Over atoms where `f₀ = 0` the fiber function is `0`.
pub fn psi<T: Scalar>(f: &LatticeElement<T>, pair: &ExtensionPair<T>) -> Result<PsiFamily<T>> {
    let f0 = f_zero(f, pair)?;
    let weight = T::one() / T::from_usize(pair.fiber_cells());
    let mut fibers = Vec::with_capacity(pair.base_atoms());
    let mut sorted = Vec::with_capacity(pair.base_atoms());
    for i in 0..pair.base_atoms() {
        let values = pair.fiber(f, i);
        fibers.push(PlConvexFn::hinge_sum(f0.value(i), values, &weight));
        let mut row = values.to_vec();
        row.sort_by(|a, b| a.total_cmp_value(b));
        sorted.push(row);
    }
    Ok(PsiFamily { f0, fibers, sorted })
}

impl<T: Scalar> PsiFamily<T> {
    pub fn f0(&self) -> &LatticeElement<T> {
        &self.f0
    }

    pub fn fibers(&self) -> &[PlConvexFn<T>] {
        &self.fibers
    }

    /// `Ψ_f(x)` as an element of `E`.
    pub fn value(&self, x: &T) -> LatticeElement<T> {
        let values = self
            .fibers
            .iter()
            .map(|phi| phi.value(x).expect("Ψ is finite on the whole line"))
            .collect();
        LatticeElement::new(self.f0.space().clone(), values).expect("finite values")
    }

    /// `D⁺_x Ψ_f` as an element of `E`.
    pub fn right_derivative(&self, x: &T) -> LatticeElement<T> {
        let values = self
            .fibers
            .iter()
            .map(|phi| match phi.one_sided_derivs(x).expect("finite everywhere").1 {
                Extended::Finite(v) => v,
                _ => unreachable!("Ψ has finite derivatives"),
            })
            .collect();
        LatticeElement::new(self.f0.space().clone(), values).expect("finite values")
    }

    /// `f₀(ω)·#{j: vⱼ ≤ x·f₀(ω)}/n`, the distribution-function side of the
    /// identity `D⁺_x Ψ_f = f₀·P[f ≤ x f₀ | Ω]`.
    pub fn cdf_side(&self, x: &T) -> LatticeElement<T> {
        let values = self
            .sorted
            .iter()
            .zip(self.f0.values())
            .map(|(row, f0)| {
                if f0.is_zero() {
                    return T::zero();
                }
                let level = x.clone() * f0.clone();
                let count = row.partition_point(|v| *v <= level);
                f0.clone() * T::from_usize(count) / T::from_usize(row.len())
            })
            .collect();
        LatticeElement::new(self.f0.space().clone(), values).expect("finite values")
    }

    /// The conjugate family `t ↦ Ψ_f*(t·f₀)`.
    pub fn conjugate(&self) -> PartialCondExp<T> {
        PartialCondExp {
            f0: self.f0.clone(),
            conjugates: self.fibers.iter().map(PlConvexFn::conjugate).collect(),
        }
    }
}

/// The family of partial conditional expectations `t ↦ E_t[f|E]`.
#[derive(Debug, Clone)]
pub struct PartialCondExp<T> {
    f0: LatticeElement<T>,
    conjugates: Vec<PlConvexFn<T>>,
}

impl<T: Scalar> PartialCondExp<T> {
    pub fn conjugates(&self) -> &[PlConvexFn<T>] {
        &self.conjugates
    }

    /// `E_t[f|E]` for `t ∈ [0, 1]`.
    pub fn at(&self, t: &T) -> Result<LatticeElement<T>> {
        check_unit("t", t, false)?;
        let values = self
            .conjugates
            .iter()
            .zip(self.f0.values())
            .map(|(star, f0)| {
                let slope = clamp_to_domain(star, t.clone() * f0.clone());
                star.value(&slope).expect("slope clamped into the domain")
            })
            .collect();
        LatticeElement::new(self.f0.space().clone(), values)
    }

    /// The slice `f_t = f₀·D⁻Ψ*(t·f₀)` for `t ∈ (0, 1]`.
    pub fn slice(&self, t: &T) -> Result<LatticeElement<T>> {
        if !(*t > T::zero() && *t <= T::one()) {
            return Err(Error::OutOfRange {
                name: "t",
                value: t.to_f64(),
                range: "(0, 1]",
            });
        }
        let values = self
            .conjugates
            .iter()
            .zip(self.f0.values())
            .map(|(star, f0)| {
                if f0.is_zero() {
                    return T::zero();
                }
                let slope = clamp_to_domain(star, t.clone() * f0.clone());
                match star.one_sided_derivs(&slope).expect("slope in domain").0 {
                    Extended::Finite(d) => d * f0.clone(),
                    _ => unreachable!("left derivative is finite for t > 0"),
                }
            })
            .collect();
        LatticeElement::new(self.f0.space().clone(), values)
    }
}

/// Floating slopes `t·f₀` may overshoot the conjugate's domain `[0, f₀]` by
/// an ulp; exact scalars are unaffected.
fn clamp_to_domain<T: Scalar>(star: &PlConvexFn<T>, slope: T) -> T {
    let slope = match star.upper() {
        Some(u) if slope > *u => u.clone(),
        _ => slope,
    };
    match star.lower() {
        Some(l) if slope < *l => l.clone(),
        _ => slope,
    }
}

/// `E_t[f|E] = Ψ_f*(t)`, computed by exact conjugation.
pub fn partial_cond_exp<T: Scalar>(
    f: &LatticeElement<T>,
    pair: &ExtensionPair<T>,
    t: &T,
) -> Result<LatticeElement<T>> {
    check_unit("t", t, false)?;
    psi(f, pair)?.conjugate().at(t)
}

/// `E_{[t,s]}[f|E] = E_s[f|E] − E_t[f|E]`.
pub fn interval_cond_exp<T: Scalar>(
    f: &LatticeElement<T>,
    pair: &ExtensionPair<T>,
    t: &T,
    s: &T,
) -> Result<LatticeElement<T>> {
    check_interval(t, s)?;
    let family = psi(f, pair)?.conjugate();
    family.at(s)?.sub(&family.at(t)?)
}

pub(crate) fn check_interval<T: Scalar>(t: &T, s: &T) -> Result<()> {
    check_unit("t", t, false)?;
    check_unit("s", s, false)?;
    if t >= s {
        return Err(Error::InvalidParameter(format!(
            "interval needs t < s, got [{t}, {s}]"
        )));
    }
    Ok(())
}

/// Per base atom, the nondecreasing list of fiber values.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceFamily<T> {
    base: LatticeElement<T>,
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> SliceFamily<T> {
    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn fiber_cells(&self) -> usize {
        self.rows.first().map_or(0, Vec::len)
    }

    /// `f_t` for `t ∈ (0, 1]`: the `⌈t·n⌉`-th order statistic of each fiber.
    pub fn at(&self, t: &T) -> Result<LatticeElement<T>> {
        if !(*t > T::zero() && *t <= T::one()) {
            return Err(Error::OutOfRange {
                name: "t",
                value: t.to_f64(),
                range: "(0, 1]",
            });
        }
        let n = self.fiber_cells();
        let target = t.clone() * T::from_usize(n);
        // Smallest k ≥ 1 with k ≥ t·n.
        let k = (1..=n)
            .collect::<Vec<_>>()
            .partition_point(|&k| T::from_usize(k) < target)
            + 1;
        let values = self.rows.iter().map(|row| row[k.min(n) - 1].clone()).collect();
        LatticeElement::new(self.base.space().clone(), values)
    }
}

/// The slices `f_t` of `f`, as sorted fibers.
pub fn slices<T: Scalar>(f: &LatticeElement<T>, pair: &ExtensionPair<T>) -> Result<SliceFamily<T>> {
    pair.check_total(f)?;
    let rows = (0..pair.base_atoms())
        .map(|i| {
            let mut row = pair.fiber(f, i).to_vec();
            row.sort_by(|a, b| a.total_cmp_value(b));
            row
        })
        .collect();
    Ok(SliceFamily {
        base: LatticeElement::zero(pair.base_space().clone()),
        rows,
    })
}

/// The increasing realisation `f̂`: every fiber over `Ω` sorted, and the
/// `{±}` fibers replaced by the constants `±‖f^±↾_{E⊥}‖_p`.
pub fn increasing_realisation<T: Real>(
    f: &LatticeElement<T>,
    pair: &ExtensionPair<T>,
    p: T,
) -> Result<LatticeElement<T>> {
    let rows = slices(f, pair)?.rows;
    if !pair.has_orthogonal() {
        return pair.element(rows, None, None);
    }
    let (pos, neg) = pair.orthogonal_norms(f, p)?;
    let n = pair.fiber_cells();
    pair.element(rows, Some(vec![pos; n]), Some(vec![-neg; n]))
}

/// `(‖f_t‖_p, ‖f‖_p/(t − t²)^{1/p})`; the first never exceeds the second.
pub fn slice_norm_bound_check<T: Real>(
    f: &LatticeElement<T>,
    pair: &ExtensionPair<T>,
    p: T,
    t: T,
) -> Result<(T, T)> {
    check_unit("t", &t, true)?;
    let ft = slices(f, pair)?.at(&t)?;
    let lhs = ft.lp_norm(p)?;
    let rhs = f.lp_norm(p)? / (t - t * t).powf(p.recip());
    Ok((lhs, rhs))
}

/// Output of [`grid_approx`].
#[derive(Debug, Clone)]
pub struct GridApprox<T> {
    /// `g_{N,n} = ⋁_{|k|≤n} t·(Nk/n)·f₀ − Ψ_f(Nk/n)`.
    pub g: LatticeElement<T>,
    /// `h_N = sup_{|x|≤N} t·x·f₀ − Ψ_f(x)`, computed exactly.
    pub h: LatticeElement<T>,
    /// `E_t[f|E]`, for comparison.
    pub partial: LatticeElement<T>,
    /// Atoms where `|f_t| ≤ N·f₀`, on which `h_N = E_t[f|E]`.
    pub exact_region: Vec<bool>,
}

/// The grid approximations `g_{N,n} ≤ h_N ≤ E_t[f|E]`.
pub fn grid_approx<T: Scalar>(
    f: &LatticeElement<T>,
    pair: &ExtensionPair<T>,
    t: &T,
    big_n: &T,
    n_grid: usize,
) -> Result<GridApprox<T>> {
    check_unit("t", t, true)?;
    if *big_n <= T::zero() || n_grid == 0 {
        return Err(Error::InvalidParameter(
            "grid approximation needs N > 0 and n ≥ 1".into(),
        ));
    }
    let family = psi(f, pair)?;
    let conj = family.conjugate();
    let partial = conj.at(t)?;
    let slice = slices(f, pair)?.at(t)?;
    let f0 = family.f0();
    let n = T::from_usize(n_grid);
    let mut g = Vec::with_capacity(f0.len());
    let mut h = Vec::with_capacity(f0.len());
    for (phi, w) in family.fibers.iter().zip(f0.values()) {
        let objective = |x: &T| t.clone() * x.clone() * w.clone() - phi.value(x).expect("finite");
        let k_max = n_grid as i64;
        let grid_best = (-k_max..=k_max)
            .map(|k| objective(&(big_n.clone() * T::from_ratio(k, 1) / n.clone())))
            .reduce(|a, b| a.max_of(b))
            .expect("nonempty grid");
        // A concave PL objective peaks at a breakpoint or an interval end.
        let lo = -big_n.clone();
        let exact_best = phi
            .breakpoints()
            .iter()
            .filter(|b| **b >= lo && **b <= *big_n)
            .chain([&lo, big_n])
            .map(objective)
            .reduce(|a, b| a.max_of(b))
            .expect("nonempty candidate set");
        g.push(grid_best);
        h.push(exact_best);
    }
    let exact_region = slice
        .values()
        .iter()
        .zip(f0.values())
        .map(|(s, w)| s.abs() <= big_n.clone() * w.clone())
        .collect();
    Ok(GridApprox {
        g: LatticeElement::new(f0.space().clone(), g)?,
        h: LatticeElement::new(f0.space().clone(), h)?,
        partial,
        exact_region,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;

    type Q = BigRational;

    fn q(n: i64, d: i64) -> Q {
        Q::from_ratio(n, d)
    }

    /// One unit-mass base atom whose fiber holds (−2, 4).
    fn instance() -> (ExtensionPair<Q>, LatticeElement<Q>) {
        let pair = ExtensionPair::new(vec![q(1, 1)], 2, true).unwrap();
        let f = pair.element(vec![vec![q(-2, 1), q(4, 1)]], None, None).unwrap();
        (pair, f)
    }

    #[test]
    fn f_zero_examples() {
        let (pair, f) = instance();
        assert_eq!(f_zero(&f, &pair).unwrap().values(), &[q(3, 1)]);
        let orth = pair
            .element(vec![vec![q(0, 1); 2]], Some(vec![q(1, 1); 2]), None)
            .unwrap();
        assert!(f_zero(&orth, &pair).unwrap().is_zero());
        let e = LatticeElement::new(pair.base_space().clone(), vec![q(5, 2)]).unwrap();
        assert_eq!(f_zero(&pair.embed(&e).unwrap(), &pair).unwrap(), e);
    }

    #[test]
    fn psi_examples() {
        let (pair, f) = instance();
        let fam = psi(&f, &pair).unwrap();
        let expected = PlConvexFn::hinge_sum(&q(3, 1), &[q(-2, 1), q(4, 1)], &q(1, 2));
        assert_eq!(fam.fibers()[0], expected);

        let c = LatticeElement::new(pair.base_space().clone(), vec![q(7, 1)]).unwrap();
        let fam = psi(&pair.embed(&c).unwrap(), &pair).unwrap();
        for x in [q(-1, 1), q(1, 1), q(3, 2), q(4, 1)] {
            let expected = q(7, 1) * (x.clone() - q(1, 1)).positive_part();
            assert_eq!(fam.value(&x).values(), &[expected]);
        }
        let zero = LatticeElement::zero(pair.total_space().clone());
        assert!(psi(&zero, &pair).unwrap().value(&q(5, 1)).is_zero());
    }

    #[test]
    fn partial_examples() {
        let (pair, f) = instance();
        assert!(partial_cond_exp(&f, &pair, &q(0, 1)).unwrap().is_zero());
        assert_eq!(
            partial_cond_exp(&f, &pair, &q(1, 1)).unwrap(),
            pair.cond_exp_base(&f).unwrap()
        );
        assert_eq!(partial_cond_exp(&f, &pair, &q(1, 2)).unwrap().values(), &[q(-1, 1)]);
        assert_eq!(
            interval_cond_exp(&f, &pair, &q(1, 2), &q(1, 1)).unwrap().values(),
            &[q(2, 1)]
        );
        assert!(partial_cond_exp(&f, &pair, &q(3, 2)).is_err());
        assert!(interval_cond_exp(&f, &pair, &q(1, 2), &q(1, 2)).is_err());

        let c = LatticeElement::new(pair.base_space().clone(), vec![q(3, 1)]).unwrap();
        let fc = pair.embed(&c).unwrap();
        assert_eq!(partial_cond_exp(&fc, &pair, &q(1, 3)).unwrap().values(), &[q(1, 1)]);
        assert_eq!(
            interval_cond_exp(&fc, &pair, &q(1, 4), &q(3, 4)).unwrap().values(),
            &[q(3, 2)]
        );
    }

    #[test]
    fn slice_examples() {
        let (pair, f) = instance();
        let sl = slices(&f, &pair).unwrap();
        assert_eq!(sl.at(&q(1, 4)).unwrap().values(), &[q(-2, 1)]);
        assert_eq!(sl.at(&q(3, 4)).unwrap().values(), &[q(4, 1)]);
        assert_eq!(sl.at(&q(1, 2)).unwrap().values(), &[q(-2, 1)]);
        let conj = psi(&f, &pair).unwrap().conjugate();
        for t in [q(1, 4), q(1, 2), q(3, 4), q(1, 1)] {
            assert_eq!(conj.slice(&t).unwrap(), sl.at(&t).unwrap());
        }
        assert!(sl.at(&q(0, 1)).is_err());
    }

    #[test]
    fn realisation_and_bound() {
        let pair = ExtensionPair::new(vec![1.0], 2, true).unwrap();
        let f = pair.element(vec![vec![4.0, -2.0]], Some(vec![1.0, 3.0]), None).unwrap();
        let hat = increasing_realisation(&f, &pair, 1.0).unwrap();
        assert_eq!(pair.fiber(&hat, 0), &[-2.0, 4.0]);
        assert_eq!(pair.plus_fiber(&hat).unwrap(), &[2.0, 2.0]);
        assert_eq!(increasing_realisation(&hat, &pair, 1.0).unwrap(), hat);

        let g = pair.element(vec![vec![-2.0, 4.0]], None, None).unwrap();
        assert_eq!(slice_norm_bound_check(&g, &pair, 1.0, 0.5).unwrap(), (2.0, 12.0));
        assert!(slice_norm_bound_check(&g, &pair, 1.0, 1.0).is_err());
    }

    #[test]
    fn grid_examples() {
        let (pair, f) = instance();
        let out = grid_approx(&f, &pair, &q(1, 2), &q(4, 1), 8).unwrap();
        assert_eq!(out.h.values(), &[q(-1, 1)]);
        assert_eq!(out.exact_region, vec![true]);
        let gap = out.h.sub(&out.g).unwrap();
        assert!(gap.values()[0] >= q(0, 1));
        assert!(gap.values()[0] <= q(2 * 4, 8) * q(3, 1));
        assert!(grid_approx(&f, &pair, &q(1, 2), &q(0, 1), 8).is_err());
    }

    #[test]
    fn cdf_identity() {
        let (pair, f) = instance();
        let fam = psi(&f, &pair).unwrap();
        for x in [q(-1, 1), q(-2, 3), q(0, 1), q(4, 3), q(2, 1)] {
            assert_eq!(fam.right_derivative(&x), fam.cdf_side(&x));
        }
    }
}
