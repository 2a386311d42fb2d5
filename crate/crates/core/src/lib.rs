//! Uniform canonical bases over finitely discretized measure spaces.
//!
//! The crate is generic over the scalar type: exact algorithms (conditional
//! expectations, piecewise-linear conjugation, prefix sums) accept any
//! [`Scalar`], including exact rationals, while `L_p` norms and powers need a
//! floating [`Real`]. Concrete aliases for the common instantiations live at
//! the crate root.

pub mod error;
pub mod hilbert;
pub mod json;
pub mod krivine;
pub mod legendre;
pub mod lp;
pub mod measure;
pub mod oracle;
pub mod rv;
pub mod scalar;
pub mod ultra;

pub use error::{Error, Result};
pub use krivine::{Expr, HomogeneousFn, LatticeTerm};
pub use legendre::{Extended, PlConvexFn};
pub use lp::{CbFamily, LpCanonicalBase};
pub use measure::{
    band_decompose, cond_exp, lattice_op, orthogonal, ExtensionPair, LatticeElement, LatticeOp,
    MeasureSpace, SubStructure,
};
pub use oracle::{absolute_type_equal, type_equal_1, type_equal_n, DirectionalMass};
pub use rv::{EventAlgebra, RvElement, RvOp};
pub use scalar::{signed_power, Real, Scalar};
pub use ultra::{Ball, PAdicContext, ProjPoint};

/// Exact arbitrary-precision rationals.
pub type Rational = num_rational::BigRational;

pub type Space = MeasureSpace<f64>;
pub type Element = LatticeElement<f64>;
pub type Pair = ExtensionPair<f64>;
pub type PlFn = PlConvexFn<f64>;
pub type ExactPlFn = PlConvexFn<Rational>;
pub type Term = LatticeTerm<f64>;
pub type ExactTerm = LatticeTerm<Rational>;
pub type CanonicalBase = LpCanonicalBase<f64>;
