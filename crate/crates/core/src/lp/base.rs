//! Canonical-base tuples `(‖f⁺‖, ‖f⁻‖, E_t[f|E])_{t∈D}` and their interval
//! variant, plus the two counterexamples that bound what such tuples can do.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::krivine::{Expr, LatticeTerm};
use crate::measure::{ExtensionPair, LatticeElement, MeasureSpace};
use crate::oracle::{absolute_type_equal, DirectionalMass};
use crate::scalar::{Real, Scalar};

use super::{partial_cond_exp, psi};

/// The conditional part of a canonical base.
#[derive(Debug, Clone, PartialEq)]
pub enum CbFamily<T> {
    /// `E_t[f|E]` for each grid point, followed by the limit `E_1 = E[f|E]`.
    Partials {
        values: Vec<LatticeElement<T>>,
        limit: LatticeElement<T>,
    },
    /// `E_{[t,s]}[f|E]` for every pair `t < s` of `{0} ∪ D ∪ {1}`.
    Intervals(Vec<((T, T), LatticeElement<T>)>),
}

/// The base of `tp(f/E)` over a finite grid `D ⊂ (0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct LpCanonicalBase<T> {
    pub p: T,
    pub pos_norm: T,
    pub neg_norm: T,
    pub grid: Vec<T>,
    pub family: CbFamily<T>,
}

fn check_grid<T: Scalar>(grid: &[T]) -> Result<()> {
    let inside = grid.iter().all(|t| *t > T::zero() && *t < T::one());
    let increasing = grid.windows(2).all(|w| w[0] < w[1]);
    if grid.is_empty() || !inside || !increasing {
        return Err(Error::InvalidGrid);
    }
    Ok(())
}

/// The canonical base of `f`, with partials or, when `intervals` is set,
/// interval conditional expectations.
pub fn canonical_base_1type<T: Real>(
    f: &LatticeElement<T>,
    pair: &ExtensionPair<T>,
    p: T,
    grid: &[T],
    intervals: bool,
) -> Result<LpCanonicalBase<T>> {
    check_grid(grid)?;
    let pos_norm = f.positive_part().lp_norm(p)?;
    let neg_norm = f.negative_part().lp_norm(p)?;
    let family = psi(f, pair)?.conjugate();
    let family = if intervals {
        let mut points = Vec::with_capacity(grid.len() + 2);
        points.push(T::zero());
        points.extend_from_slice(grid);
        points.push(T::one());
        let values = points
            .iter()
            .map(|t| family.at(t))
            .collect::<Result<Vec<_>>>()?;
        let mut out = Vec::new();
        for a in 0..points.len() {
            for b in a + 1..points.len() {
                out.push(((points[a], points[b]), values[b].sub(&values[a])?));
            }
        }
        CbFamily::Intervals(out)
    } else {
        CbFamily::Partials {
            values: grid.iter().map(|t| family.at(t)).collect::<Result<_>>()?,
            limit: family.at(&T::one())?,
        }
    };
    Ok(LpCanonicalBase {
        p,
        pos_norm,
        neg_norm,
        grid: grid.to_vec(),
        family,
    })
}

impl<T: Real> LpCanonicalBase<T> {
    pub fn approx_eq(&self, other: &Self) -> bool {
        let scalars = self.p.approx_eq(&other.p)
            && self.pos_norm.approx_eq(&other.pos_norm)
            && self.neg_norm.approx_eq(&other.neg_norm)
            && self.grid.len() == other.grid.len()
            && self.grid.iter().zip(&other.grid).all(|(a, b)| a.approx_eq(b));
        scalars
            && match (&self.family, &other.family) {
                (
                    CbFamily::Partials { values: a, limit: la },
                    CbFamily::Partials { values: b, limit: lb },
                ) => la.approx_eq(lb) && a.iter().zip(b).all(|(x, y)| x.approx_eq(y)),
                (CbFamily::Intervals(a), CbFamily::Intervals(b)) => {
                    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.1.approx_eq(&y.1))
                }
                _ => false,
            }
    }

    /// `E_{k/n}` for `k = 0..=n`, read off the family when the grid is
    /// `{k/n : 0 < k < n}`.
    fn partials_on_full_grid(&self, n: usize) -> Result<Vec<LatticeElement<T>>> {
        let full = self.grid.len() + 1 == n
            && self
                .grid
                .iter()
                .enumerate()
                .all(|(k, t)| t.approx_eq(&T::from_ratio(k as i64 + 1, n as i64)));
        if n == 0 || !full {
            return Err(Error::InvalidGrid);
        }
        match &self.family {
            CbFamily::Partials { values, limit } => {
                let zero = LatticeElement::zero(limit.space().clone());
                let mut out = vec![zero];
                out.extend(values.iter().cloned());
                out.push(limit.clone());
                Ok(out)
            }
            CbFamily::Intervals(list) => {
                // E_{k/n} = E_{[0, k/n]}; the pairs starting at 0 come first.
                let mut out = Vec::with_capacity(n + 1);
                for (_, e) in list.iter().take(n) {
                    out.push(e.clone());
                }
                let zero = LatticeElement::zero(out[0].space().clone());
                out.insert(0, zero);
                Ok(out)
            }
        }
    }

    /// Sorted fiber values per base atom recovered from first differences
    /// `n·(E_{k/n} − E_{(k−1)/n})`. Needs the full grid `{k/n}`.
    pub fn reconstruct_sorted(&self, n: usize) -> Result<Vec<Vec<T>>> {
        let partials = self.partials_on_full_grid(n)?;
        let atoms = partials[0].len();
        let scale = <T as Scalar>::from_usize(n);
        Ok((0..atoms)
            .map(|i| {
                partials
                    .windows(2)
                    .map(|w| (*w[1].value(i) - *w[0].value(i)) * scale)
                    .collect()
            })
            .collect())
    }
}

/// Bases of all integer combinations `k̄·f̄` with `‖k̄‖_∞ ≤ k_bound`, and the
/// directional mass of the tuple.
#[derive(Debug, Clone)]
pub struct NTypeBase<T> {
    pub combos: Vec<(Vec<i64>, LpCanonicalBase<T>)>,
    pub summary: DirectionalMass<T>,
}

impl<T: Real> NTypeBase<T> {
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.summary.approx_eq(&other.summary)
            && self.combos.len() == other.combos.len()
            && self
                .combos
                .iter()
                .zip(&other.combos)
                .all(|((ka, a), (kb, b))| ka == kb && a.approx_eq(b))
    }
}

const MAX_COMBOS: usize = 100_000;

/// Every nonzero `k̄ ∈ [−k_bound, k_bound]ⁿ` in lexicographic order.
fn combinations(n: usize, k_bound: i64) -> Result<Vec<Vec<i64>>> {
    let side = (2 * k_bound + 1) as usize;
    let count = (0..n).try_fold(1usize, |acc, _| acc.checked_mul(side));
    match count {
        Some(c) if c <= MAX_COMBOS => {}
        _ => {
            return Err(Error::InvalidParameter(format!(
                "{side}^{n} combinations exceed the limit of {MAX_COMBOS}"
            )))
        }
    }
    let mut out = vec![Vec::with_capacity(n)];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (-k_bound..=k_bound).map(move |k| {
                    let mut v = prefix.clone();
                    v.push(k);
                    v
                })
            })
            .collect();
    }
    out.retain(|k| k.iter().any(|&v| v != 0));
    Ok(out)
}

pub fn canonical_base_ntype<T: Real>(
    fs: &[LatticeElement<T>],
    pair: &ExtensionPair<T>,
    p: T,
    grid: &[T],
    k_bound: i64,
) -> Result<NTypeBase<T>> {
    if fs.is_empty() {
        return Err(Error::Empty("tuple"));
    }
    if k_bound < 1 {
        return Err(Error::InvalidParameter("k_bound must be at least 1".into()));
    }
    for f in fs {
        pair.check_total(f)?;
    }
    let combos = combinations(fs.len(), k_bound)?
        .into_iter()
        .map(|k| {
            let mut combo = LatticeElement::zero(pair.total_space().clone());
            for (c, f) in k.iter().zip(fs) {
                combo = combo.add(&f.scale(&T::from_ratio(*c, 1)))?;
            }
            let base = canonical_base_1type(&combo, pair, p, grid, false)?;
            Ok((k, base))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NTypeBase {
        combos,
        summary: DirectionalMass::of_tuple(fs, p)?,
    })
}

/// Output of [`p1_counterexample`].
#[derive(Debug, Clone)]
pub struct P1Report<T> {
    pub eps: T,
    /// `‖f_ε‖_p`, always one.
    pub f_norm: T,
    /// `‖E_ε[f_ε|E]‖_p`.
    pub partial_norm: T,
    /// `ε^{1−1/p}`.
    pub expected: T,
    pub partial: LatticeElement<T>,
}

/// `f_ε = −ε^{−1/p}` on the first `ε`-fraction of every fiber over a single
/// unit-mass base atom, with `ε = 1/m`. For `p = 1` the partials `E_ε[f_ε|E]`
/// stay at norm one as `ε → 0`; for `p > 1` they shrink like `ε^{1−1/p}`.
pub fn p1_counterexample<T: Real>(m: usize, p: T, fiber_cells: usize) -> Result<P1Report<T>> {
    crate::measure::check_exponent(p)?;
    if m == 0 || fiber_cells % m != 0 {
        return Err(Error::InvalidParameter(format!(
            "eps = 1/{m} needs m to divide the fiber cell count {fiber_cells}"
        )));
    }
    let eps = T::from_ratio(1, m as i64);
    let pair = ExtensionPair::new(vec![T::one()], fiber_cells, false)?;
    let height = -eps.powf(-p.recip());
    let row = (0..fiber_cells)
        .map(|j| if j < fiber_cells / m { height } else { T::zero() })
        .collect();
    let f = pair.element(vec![row], None, None)?;
    let partial = partial_cond_exp(&f, &pair, &eps)?;
    Ok(P1Report {
        eps,
        f_norm: f.lp_norm(p)?,
        partial_norm: partial.lp_norm(p)?,
        expected: eps.powf(T::one() - p.recip()),
        partial,
    })
}

/// Output of [`remark_counterexample`].
#[derive(Debug, Clone)]
pub struct RemarkReport {
    /// Number of `(k, ℓ)` with `|k|, |ℓ| ≤ 5` checked.
    pub combinations_checked: usize,
    /// `tp(kg + ℓh) = tp(kg − ℓh)` for every checked pair.
    pub one_types_agree: bool,
    /// `tp(g, h) ≠ tp(g, −h)` by the directional-mass oracle.
    pub joint_types_differ: bool,
    pub witness: String,
    /// `∫τ(g, h)` and `∫τ(g, −h)` for the witness term `τ`.
    pub witness_values: (f64, f64),
}

/// On three unit atoms, `g = (1, −1, 0)` and `h = (1, 1, −2)` in `L_1` have
/// `tp(kg + ℓh) = tp(kg − ℓh)` for all integers, yet `(g, h)` and `(g, −h)`
/// differ, witnessed by `τ(x, y) = (x ∧ y)⁺`.
pub fn remark_counterexample() -> Result<RemarkReport> {
    let space = Arc::new(MeasureSpace::new(vec![1.0; 3])?);
    let g = LatticeElement::new(space.clone(), vec![1.0, -1.0, 0.0])?;
    let h = LatticeElement::new(space, vec![1.0, 1.0, -2.0])?;
    let minus_h = h.neg();
    let mut checked = 0;
    let mut agree = true;
    for k in -5..=5i32 {
        for l in -5..=5i32 {
            let a = g.scale(&f64::from(k)).add(&h.scale(&f64::from(l)))?;
            let b = g.scale(&f64::from(k)).sub(&h.scale(&f64::from(l)))?;
            agree &= absolute_type_equal(&[a], &[b], 1.0)?;
            checked += 1;
        }
    }
    let differ = !absolute_type_equal(&[g.clone(), h.clone()], &[g.clone(), minus_h.clone()], 1.0)?;
    let tau = LatticeTerm::new(2, Expr::var(0).meet(Expr::var(1)).positive_part())?;
    let with_h = tau.eval_element(&[g.clone(), h])?.integral();
    let with_minus_h = tau.eval_element(&[g, minus_h])?.integral();
    Ok(RemarkReport {
        combinations_checked: checked,
        one_types_agree: agree,
        joint_types_differ: differ,
        witness: tau.to_string(),
        witness_values: (with_h, with_minus_h),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::type_equal_1;

    fn instance() -> (ExtensionPair<f64>, LatticeElement<f64>) {
        let pair = ExtensionPair::new(vec![1.0], 2, true).unwrap();
        let f = pair.element(vec![vec![-2.0, 4.0]], None, None).unwrap();
        (pair, f)
    }

    #[test]
    fn single_grid_point() {
        let (pair, f) = instance();
        let cb = canonical_base_1type(&f, &pair, 1.0, &[0.5], false).unwrap();
        assert_eq!((cb.pos_norm, cb.neg_norm), (2.0, 1.0));
        match &cb.family {
            CbFamily::Partials { values, limit } => {
                assert_eq!(values[0].values(), &[-1.0]);
                assert_eq!(limit.values(), &[1.0]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert_eq!(cb.reconstruct_sorted(2).unwrap(), vec![vec![-2.0, 4.0]]);
    }

    #[test]
    fn intervals_reconstruct_too() {
        let (pair, f) = instance();
        let cb = canonical_base_1type(&f, &pair, 1.0, &[0.5], true).unwrap();
        let CbFamily::Intervals(list) = &cb.family else {
            panic!("expected intervals");
        };
        assert_eq!(list.len(), 3);
        assert_eq!(list[2].0, (0.5, 1.0));
        assert_eq!(list[2].1.values(), &[2.0]);
        assert_eq!(cb.reconstruct_sorted(2).unwrap(), vec![vec![-2.0, 4.0]]);
    }

    #[test]
    fn zero_element_and_bad_grids() {
        let (pair, _) = instance();
        let zero = LatticeElement::zero(pair.total_space().clone());
        let cb = canonical_base_1type(&zero, &pair, 2.0, &[0.25, 0.75], false).unwrap();
        assert_eq!((cb.pos_norm, cb.neg_norm), (0.0, 0.0));
        let CbFamily::Partials { values, limit } = &cb.family else {
            panic!("expected partials");
        };
        assert!(values.iter().all(LatticeElement::is_zero) && limit.is_zero());
        for grid in [vec![], vec![0.0], vec![0.5, 0.25], vec![1.0]] {
            assert_eq!(
                canonical_base_1type(&zero, &pair, 1.0, &grid, false).unwrap_err(),
                Error::InvalidGrid
            );
        }
        assert!(cb.reconstruct_sorted(4).is_err());
    }

    #[test]
    fn reconstruction_matches_sorting() {
        let pair = ExtensionPair::new(vec![0.5, 1.5], 4, false).unwrap();
        let rows = vec![vec![3.0, -1.0, 0.5, 2.0], vec![0.0, 0.0, -7.0, 1.0]];
        let f = pair.element(rows.clone(), None, None).unwrap();
        let cb = canonical_base_1type(&f, &pair, 2.0, &[0.25, 0.5, 0.75], false).unwrap();
        let mut sorted = rows;
        for r in &mut sorted {
            r.sort_by(f64::total_cmp);
        }
        let got = cb.reconstruct_sorted(4).unwrap();
        for (a, b) in got.iter().flatten().zip(sorted.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn base_equality_tracks_type_equality() {
        let pair = ExtensionPair::new(vec![1.0], 3, true).unwrap();
        let f = pair.element(vec![vec![1.0, 2.0, 3.0]], Some(vec![1.0, 0.0, 0.0]), None).unwrap();
        let g = pair.element(vec![vec![3.0, 1.0, 2.0]], Some(vec![0.0, 0.0, 1.0]), None).unwrap();
        let h = pair.element(vec![vec![3.0, 1.0, 2.0]], Some(vec![0.0, 0.0, 2.0]), None).unwrap();
        let grid = [1.0 / 3.0, 2.0 / 3.0];
        let base = |x: &LatticeElement<f64>| canonical_base_1type(x, &pair, 1.0, &grid, false).unwrap();
        assert!(type_equal_1(&f, &g, &pair, 1.0).unwrap());
        assert!(base(&f).approx_eq(&base(&g)));
        assert!(!type_equal_1(&f, &h, &pair, 1.0).unwrap());
        assert!(!base(&f).approx_eq(&base(&h)));
    }

    #[test]
    fn ntype_combinations() {
        let (pair, f) = instance();
        let out = canonical_base_ntype(&[f.clone()], &pair, 1.0, &[0.5], 2).unwrap();
        let ks: Vec<i64> = out.combos.iter().map(|(k, _)| k[0]).collect();
        assert_eq!(ks, vec![-2, -1, 1, 2]);
        let doubled = canonical_base_1type(&f.scale(&2.0), &pair, 1.0, &[0.5], false).unwrap();
        assert!(out.combos[3].1.approx_eq(&doubled));

        let same = canonical_base_ntype(&[f.clone(), f.clone()], &pair, 1.0, &[0.5], 1).unwrap();
        assert_eq!(same.combos.len(), 8);
        // (1, −1) and (−1, 1) both give the zero element.
        let zero = canonical_base_1type(&f.scale(&0.0), &pair, 1.0, &[0.5], false).unwrap();
        assert!(same.combos[2].1.approx_eq(&zero));
        assert!(same.summary.entries().iter().all(|(d, _)| d[0] == d[1]));
        assert!(canonical_base_ntype(&[], &pair, 1.0, &[0.5], 1).is_err());
    }

    #[test]
    fn p1_family() {
        let r = p1_counterexample(4, 1.0f64, 16).unwrap();
        assert!((r.f_norm - 1.0).abs() < 1e-12);
        assert!(r.partial.values().iter().all(|v| (v + 1.0).abs() < 1e-12));
        let r = p1_counterexample(4, 2.0f64, 16).unwrap();
        assert!((r.f_norm - 1.0).abs() < 1e-12);
        assert!((r.partial_norm - 0.5).abs() < 1e-12);
        let norms: Vec<f64> = [4, 16, 64]
            .iter()
            .map(|&m| p1_counterexample(m, 2.0, 64).unwrap().partial_norm)
            .collect();
        assert!(norms.windows(2).all(|w| w[1] < w[0]));
        assert!(p1_counterexample(3, 1.0, 16).is_err());
    }

    #[test]
    fn remark() {
        let r = remark_counterexample().unwrap();
        assert_eq!(r.combinations_checked, 121);
        assert!(r.one_types_agree);
        assert!(r.joint_types_differ);
        assert_eq!(r.witness_values, (1.0, 0.0));
    }
}
