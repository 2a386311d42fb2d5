//! Brute-force type-equality oracles.
//!
//! Over a sublattice `E` the type of a tuple is fixed by its conditional
//! distribution over each base atom together with the absolute type of its
//! orthogonal part. The absolute type of a tuple is summarised by its
//! directional `p`-mass.

use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::measure::{ExtensionPair, LatticeElement};
use crate::scalar::{Real, Scalar};

fn approx_cmp<T: Scalar>(a: &T, b: &T) -> Ordering {
    if a.approx_eq(b) {
        Ordering::Equal
    } else {
        a.total_cmp_value(b)
    }
}

fn approx_cmp_vec<T: Scalar>(a: &[T], b: &[T]) -> Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| approx_cmp(x, y))
        .find(|o| o.is_ne())
        .unwrap_or_else(|| a.len().cmp(&b.len()))
}

fn vec_approx_eq<T: Scalar>(a: &[T], b: &[T]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
}

/// Multiset equality of scalars, by sorting and tolerance comparison.
pub fn multiset_eq<T: Scalar>(a: &[T], b: &[T]) -> bool {
    let sort = |v: &[T]| {
        let mut v = v.to_vec();
        v.sort_by(|x, y| x.total_cmp_value(y));
        v
    };
    vec_approx_eq(&sort(a), &sort(b))
}

/// A finite measure on rays: each nonzero value-vector `v` with weight `w`
/// contributes `w·‖v‖_∞^p` to the direction `v/‖v‖_∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionalMass<T> {
    entries: Vec<(Vec<T>, T)>,
}

impl<T: Real> DirectionalMass<T> {
    /// Builds the summary from weighted value-vectors.
    pub fn from_vectors(points: impl IntoIterator<Item = (Vec<T>, T)>, p: T) -> Self {
        let mut raw: Vec<(Vec<T>, T)> = points
            .into_iter()
            .filter_map(|(v, w)| {
                let norm = v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()));
                (norm > T::zero()).then(|| {
                    let dir = v.iter().map(|x| *x / norm).collect();
                    (dir, w * norm.powf(p))
                })
            })
            .collect();
        raw.sort_by(|a, b| approx_cmp_vec(&a.0, &b.0));
        let mut entries: Vec<(Vec<T>, T)> = Vec::with_capacity(raw.len());
        for (dir, mass) in raw {
            match entries.last_mut() {
                Some((last, acc)) if vec_approx_eq(last, &dir) => *acc = *acc + mass,
                _ => entries.push((dir, mass)),
            }
        }
        Self { entries }
    }

    /// The summary of a tuple of elements on one space.
    pub fn of_tuple(fs: &[LatticeElement<T>], p: T) -> Result<Self> {
        let space = check_tuple(fs)?;
        let points = (0..space.len()).map(|i| {
            (
                fs.iter().map(|f| *f.value(i)).collect::<Vec<_>>(),
                *space.weight(i),
            )
        });
        Ok(Self::from_vectors(points, p))
    }

    pub fn entries(&self) -> &[(Vec<T>, T)] {
        &self.entries
    }

    pub fn total_mass(&self) -> T {
        self.entries.iter().fold(T::zero(), |acc, (_, m)| acc + *m)
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.entries.len() == other.entries.len()
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|((d1, m1), (d2, m2))| vec_approx_eq(d1, d2) && m1.approx_eq(m2))
    }
}

fn check_tuple<T: Scalar>(fs: &[LatticeElement<T>]) -> Result<&std::sync::Arc<crate::MeasureSpace<T>>> {
    let first = fs.first().ok_or(Error::Empty("tuple"))?;
    if fs.iter().any(|f| !f.same_space(first)) {
        return Err(Error::SpaceMismatch);
    }
    Ok(first.space())
}

/// Joint fiber distributions over each base atom, plus the directional mass
/// of the orthogonal part.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalDistribution<T> {
    /// Per base atom: distinct value-vectors with their cell counts.
    pub per_atom: Vec<Vec<(Vec<T>, usize)>>,
    pub orthogonal: DirectionalMass<T>,
}

impl<T: Real> ConditionalDistribution<T> {
    pub fn of_tuple(fs: &[LatticeElement<T>], pair: &ExtensionPair<T>, p: T) -> Result<Self> {
        check_tuple(fs)?;
        for f in fs {
            pair.check_total(f)?;
        }
        let n = pair.fiber_cells();
        let per_atom = (0..pair.base_atoms())
            .map(|i| {
                let mut cells: Vec<Vec<T>> = (0..n)
                    .map(|j| fs.iter().map(|f| pair.fiber(f, i)[j]).collect())
                    .collect();
                cells.sort_by(|a, b| approx_cmp_vec(a, b));
                let mut grouped: Vec<(Vec<T>, usize)> = Vec::new();
                for c in cells {
                    match grouped.last_mut() {
                        Some((last, count)) if vec_approx_eq(last, &c) => *count += 1,
                        _ => grouped.push((c, 1)),
                    }
                }
                grouped
            })
            .collect();
        let orthogonal = if pair.has_orthogonal() {
            let perps = fs
                .iter()
                .map(|f| pair.orthogonal_part(f))
                .collect::<Result<Vec<_>>>()?;
            DirectionalMass::of_tuple(&perps, p)?
        } else {
            DirectionalMass { entries: Vec::new() }
        };
        Ok(Self { per_atom, orthogonal })
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.per_atom.len() == other.per_atom.len()
            && self.per_atom.iter().zip(&other.per_atom).all(|(a, b)| {
                a.len() == b.len()
                    && a.iter()
                        .zip(b)
                        .all(|((v1, c1), (v2, c2))| c1 == c2 && vec_approx_eq(v1, v2))
            })
            && self.orthogonal.approx_eq(&other.orthogonal)
    }
}

/// `tp(f/E) = tp(g/E)`: equal fiber multisets over every base atom and equal
/// `‖·^±↾_{E⊥}‖_p`.
pub fn type_equal_1<T: Real>(
    f: &LatticeElement<T>,
    g: &LatticeElement<T>,
    pair: &ExtensionPair<T>,
    p: T,
) -> Result<bool> {
    pair.check_total(f)?;
    pair.check_total(g)?;
    let fibers_match =
        (0..pair.base_atoms()).all(|i| multiset_eq(pair.fiber(f, i), pair.fiber(g, i)));
    if !fibers_match {
        return Ok(false);
    }
    if !pair.has_orthogonal() {
        return Ok(true);
    }
    let (fp, fm) = pair.orthogonal_norms(f, p)?;
    let (gp, gm) = pair.orthogonal_norms(g, p)?;
    Ok(fp.approx_eq(&gp) && fm.approx_eq(&gm))
}

/// `tp(f̄/E) = tp(ḡ/E)` for tuples.
pub fn type_equal_n<T: Real>(
    fs: &[LatticeElement<T>],
    gs: &[LatticeElement<T>],
    pair: &ExtensionPair<T>,
    p: T,
) -> Result<bool> {
    if fs.len() != gs.len() {
        return Err(Error::LengthMismatch {
            expected: fs.len(),
            found: gs.len(),
        });
    }
    let a = ConditionalDistribution::of_tuple(fs, pair, p)?;
    let b = ConditionalDistribution::of_tuple(gs, pair, p)?;
    Ok(a.approx_eq(&b))
}

/// Equality of absolute (parameter-free) types via directional masses.
/// Each tuple lives on its own space.
pub fn absolute_type_equal<T: Real>(
    fs: &[LatticeElement<T>],
    gs: &[LatticeElement<T>],
    p: T,
) -> Result<bool> {
    if fs.len() != gs.len() {
        return Err(Error::LengthMismatch {
            expected: fs.len(),
            found: gs.len(),
        });
    }
    Ok(DirectionalMass::of_tuple(fs, p)?.approx_eq(&DirectionalMass::of_tuple(gs, p)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::MeasureSpace;
    use std::sync::Arc;

    fn one_fiber(values: &[f64]) -> (ExtensionPair<f64>, LatticeElement<f64>) {
        let pair = ExtensionPair::new(vec![1.0], values.len(), true).unwrap();
        let f = pair.element(vec![values.to_vec()], None, None).unwrap();
        (pair, f)
    }

    #[test]
    fn one_type_examples() {
        let (pair, f) = one_fiber(&[-2.0, 4.0]);
        assert!(type_equal_1(&f, &f, &pair, 1.0).unwrap());
        let g = pair.element(vec![vec![-2.0, 5.0]], None, None).unwrap();
        assert!(!type_equal_1(&f, &g, &pair, 1.0).unwrap());

        let f = pair
            .element(vec![vec![4.0, -2.0]], Some(vec![0.0, 2.0]), Some(vec![1.0, 0.0]))
            .unwrap();
        let sorted = pair
            .element(vec![vec![-2.0, 4.0]], Some(vec![1.0, 1.0]), Some(vec![0.0, 0.0]))
            .unwrap();
        // p = 1: ‖(0,2)‖ = 1 = ‖(1,1)‖ on cells of weight ½; minus side 0 vs 0.
        let f_no_minus = pair
            .element(vec![vec![4.0, -2.0]], Some(vec![0.0, 2.0]), None)
            .unwrap();
        assert!(type_equal_1(&f_no_minus, &sorted, &pair, 1.0).unwrap());
        // A positive value in the minus fiber is still a positive part.
        assert!(!type_equal_1(&f, &sorted, &pair, 1.0).unwrap());
    }

    #[test]
    fn n_type_examples() {
        let pair = ExtensionPair::new(vec![1.0], 3, true).unwrap();
        let g = pair.element(vec![vec![1.0, -1.0, 0.0]], None, None).unwrap();
        let h = pair.element(vec![vec![1.0, 1.0, -2.0]], None, None).unwrap();
        let gp = pair.element(vec![vec![-1.0, 0.0, 1.0]], None, None).unwrap();
        let hp = pair.element(vec![vec![1.0, -2.0, 1.0]], None, None).unwrap();
        assert!(type_equal_n(&[g.clone(), h.clone()], &[gp, hp], &pair, 1.0).unwrap());
        assert!(!type_equal_n(&[g.clone(), h.clone()], &[g.clone(), h.neg()], &pair, 1.0).unwrap());
        assert!(type_equal_n(&[g.clone()], &[g.clone()], &pair, 1.0).unwrap());
        assert!(type_equal_n(&[g.clone()], &[g, h], &pair, 1.0).is_err());
    }

    #[test]
    fn absolute_examples() {
        let s1 = Arc::new(MeasureSpace::new(vec![1.0, 1.0]).unwrap());
        let s2 = Arc::new(MeasureSpace::new(vec![4.0, 0.25]).unwrap());
        let f = LatticeElement::new(s1.clone(), vec![2.0, -1.0]).unwrap();
        // w·|v|^p preserved at p = 2: 4·1² = 1·2², ¼·2² = 1·1².
        let g = LatticeElement::new(s2, vec![1.0, -2.0]).unwrap();
        assert!(absolute_type_equal(&[f.clone()], &[g], 2.0).unwrap());
        // Single elements: equal iff the ± norms agree.
        let h = LatticeElement::new(s1.clone(), vec![-1.0, 2.0]).unwrap();
        assert!(absolute_type_equal(&[f.clone()], &[h], 1.0).unwrap());
        assert!(!absolute_type_equal(&[f.clone()], &[f.neg()], 1.0).unwrap());
        let three = Arc::new(MeasureSpace::new(vec![1.0; 3]).unwrap());
        let h = LatticeElement::new(three, vec![1.0, 1.0, -2.0]).unwrap();
        assert!(absolute_type_equal(&[h.clone()], &[h.neg()], 1.0).unwrap());
    }

    #[test]
    fn directions_merge() {
        let dm = DirectionalMass::from_vectors(
            [(vec![1.0, 2.0], 1.0), (vec![2.0, 4.0], 1.0), (vec![0.0, 0.0], 5.0)],
            1.0,
        );
        assert_eq!(dm.entries(), &[(vec![0.5, 1.0], 6.0)]);
    }
}
