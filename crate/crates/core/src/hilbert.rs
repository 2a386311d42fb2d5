//! Canonical bases in inner-product spaces: projections onto a subspace
//! together with the Gram matrix of the tuple.

use crate::error::{Error, Result};
use crate::scalar::{sum, Scalar};

fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    sum(a.iter().zip(b).map(|(x, y)| x.clone() * y.clone()))
}

fn check_dim<T>(dim: usize, v: &[T]) -> Result<()> {
    if v.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            found: v.len(),
        });
    }
    Ok(())
}

fn axpy<T: Scalar>(acc: &mut [T], c: &T, v: &[T]) {
    for (a, x) in acc.iter_mut().zip(v) {
        *a = a.clone() + c.clone() * x.clone();
    }
}

/// A subspace of `Tⁿ` with the standard inner product, given by an
/// orthonormal basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace<T> {
    dim: usize,
    basis: Vec<Vec<T>>,
}

impl<T: Scalar> Subspace<T> {
    pub fn new(dim: usize, basis: Vec<Vec<T>>) -> Result<Self> {
        for b in &basis {
            check_dim(dim, b)?;
        }
        for (i, a) in basis.iter().enumerate() {
            for (j, b) in basis.iter().enumerate().skip(i) {
                let expected = if i == j { T::one() } else { T::zero() };
                if !dot(a, b).approx_eq(&expected) {
                    return Err(Error::NotOrthonormal);
                }
            }
        }
        Ok(Self { dim, basis })
    }

    /// `span{e_i : i ∈ axes}`.
    pub fn coordinate(dim: usize, axes: &[usize]) -> Result<Self> {
        let basis = axes
            .iter()
            .map(|&i| {
                if i >= dim {
                    return Err(Error::InvalidParameter(format!("axis {i} out of range for dimension {dim}")));
                }
                let mut e = vec![T::zero(); dim];
                e[i] = T::one();
                Ok(e)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(dim, basis)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[Vec<T>] {
        &self.basis
    }

    /// `P_E v = Σ ⟨v, bᵢ⟩ bᵢ`.
    pub fn project(&self, v: &[T]) -> Result<Vec<T>> {
        check_dim(self.dim, v)?;
        let mut out = vec![T::zero(); self.dim];
        for b in &self.basis {
            axpy(&mut out, &dot(v, b), b);
        }
        Ok(out)
    }

    pub fn contains(&self, v: &[T]) -> Result<bool> {
        let p = self.project(v)?;
        Ok(v.iter().zip(&p).all(|(a, b)| a.approx_eq(b)))
    }
}

/// `P_E v`.
pub fn project<T: Scalar>(v: &[T], e: &Subspace<T>) -> Result<Vec<T>> {
    e.project(v)
}

/// `Cb(v̄/E) = (P_E vᵢ, ⟨vᵢ, vⱼ⟩)`.
#[derive(Debug, Clone, PartialEq)]
pub struct HsBase<T> {
    pub projections: Vec<Vec<T>>,
    pub gram: Vec<Vec<T>>,
}

impl<T: Scalar> HsBase<T> {
    pub fn approx_eq(&self, other: &Self) -> bool {
        let close = |a: &[Vec<T>], b: &[Vec<T>]| {
            a.len() == b.len()
                && a.iter().zip(b).all(|(x, y)| {
                    x.len() == y.len() && x.iter().zip(y).all(|(p, q)| p.approx_eq(q))
                })
        };
        close(&self.projections, &other.projections) && close(&self.gram, &other.gram)
    }

    /// `φ(v̄, u) = ‖Σλᵢvᵢ‖² − ‖ΣλᵢP_E vᵢ‖² + ‖ΣλᵢP_E vᵢ + u‖²`, read off
    /// the base alone.
    pub fn phi(&self, lambdas: &[T], u: &[T]) -> Result<T> {
        check_dim(self.projections.len(), lambdas)?;
        let dim = u.len();
        let full = sum(self.gram.iter().enumerate().flat_map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(move |(j, g)| lambdas[i].clone() * lambdas[j].clone() * g.clone())
        }));
        let mut projected = vec![T::zero(); dim];
        for (l, p) in lambdas.iter().zip(&self.projections) {
            check_dim(dim, p)?;
            axpy(&mut projected, l, p);
        }
        let mut shifted = projected.clone();
        axpy(&mut shifted, &T::one(), u);
        Ok(full - dot(&projected, &projected) + dot(&shifted, &shifted))
    }
}

pub fn hs_cb<T: Scalar>(vs: &[Vec<T>], e: &Subspace<T>) -> Result<HsBase<T>> {
    let projections = vs.iter().map(|v| e.project(v)).collect::<Result<Vec<_>>>()?;
    let gram = vs
        .iter()
        .map(|a| vs.iter().map(|b| dot(a, b)).collect())
        .collect();
    Ok(HsBase { projections, gram })
}

/// `(‖Σλᵢvᵢ + u‖², φ(v̄, u))` for `u ∈ E`.
pub fn phi_identity_check<T: Scalar>(
    vs: &[Vec<T>],
    lambdas: &[T],
    u: &[T],
    e: &Subspace<T>,
) -> Result<(T, T)> {
    if !e.contains(u)? {
        return Err(Error::NotInSubspace);
    }
    check_dim(vs.len(), lambdas)?;
    let mut combo = u.to_vec();
    for (l, v) in lambdas.iter().zip(vs) {
        check_dim(e.dim(), v)?;
        axpy(&mut combo, l, v);
    }
    let lhs = dot(&combo, &combo);
    let rhs = hs_cb(vs, e)?.phi(lambdas, u)?;
    Ok((lhs, rhs))
}

/// Two tuples with equal projections but different Gram matrices: returns
/// coefficients `λ̄` with `‖Σλᵢvᵢ‖² ≠ ‖Σλᵢwᵢ‖²` together with both values,
/// showing that projections alone do not fix `φ(·, 0)`.
pub fn non_uniformity_witness<T: Scalar>(
    vs: &[Vec<T>],
    ws: &[Vec<T>],
    e: &Subspace<T>,
) -> Result<Option<(Vec<T>, T, T)>> {
    check_dim(vs.len(), ws)?;
    let a = hs_cb(vs, e)?;
    let b = hs_cb(ws, e)?;
    let strip = |cb: &HsBase<T>| HsBase {
        projections: cb.projections.clone(),
        gram: Vec::new(),
    };
    if !strip(&a).approx_eq(&strip(&b)) {
        return Ok(None);
    }
    let n = vs.len();
    let zero = vec![T::zero(); e.dim()];
    // A symmetric form is fixed by its values on eᵢ and eᵢ + eⱼ.
    for i in 0..n {
        for j in i..n {
            let mut lambdas = vec![T::zero(); n];
            lambdas[i] = T::one();
            lambdas[j] = lambdas[j].clone() + T::one();
            let (x, y) = (a.phi(&lambdas, &zero)?, b.phi(&lambdas, &zero)?);
            if !x.approx_eq(&y) {
                return Ok(Some((lambdas, x, y)));
            }
        }
    }
    Ok(None)
}
