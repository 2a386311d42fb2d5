//! Finite measure spaces, lattice elements with their `L_p` structure,
//! conditioning substructures, band decomposition and the fibered extension
//! `E = L_p(Ω) ⊆ E' = L_p((Ω ∪ {+,−}) × [0,1])` discretized into cells.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::scalar::{sum, Real, Scalar};

/// A finite measure space given by strictly positive atom weights.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureSpace<T> {
    weights: Vec<T>,
}

impl<T: Scalar> MeasureSpace<T> {
    pub fn new(weights: Vec<T>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidSpace("a space needs at least one atom".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite_value() {
                return Err(Error::NonFinite(i));
            }
            if *w <= T::zero() {
                return Err(Error::InvalidSpace(format!(
                    "atom {i} has non-positive weight {w}"
                )));
            }
        }
        Ok(Self { weights })
    }

    /// `atoms` atoms of equal weight, total mass `total`.
    pub fn uniform(atoms: usize, total: T) -> Result<Self> {
        if atoms == 0 {
            return Err(Error::InvalidSpace("a space needs at least one atom".into()));
        }
        let w = total / T::from_usize(atoms);
        Self::new(vec![w; atoms])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn weight(&self, atom: usize) -> &T {
        &self.weights[atom]
    }

    pub fn total_mass(&self) -> T {
        sum(self.weights.iter().cloned())
    }
}

/// A real-valued function on the atoms of a [`MeasureSpace`].
#[derive(Debug, Clone)]
pub struct LatticeElement<T> {
    space: Arc<MeasureSpace<T>>,
    values: Vec<T>,
}

impl<T: PartialEq> PartialEq for LatticeElement<T> {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space)
            && self.values == other.values
    }
}

/// The vector-lattice operations available pointwise.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeOp<T> {
    Neg,
    Abs,
    Join,
    Meet,
    HalfSum,
    DotMinus,
    Scale(T),
}

impl<T: Scalar> LatticeOp<T> {
    pub fn is_binary(&self) -> bool {
        matches!(self, Self::Join | Self::Meet | Self::HalfSum | Self::DotMinus)
    }
}

impl<T: Scalar> LatticeElement<T> {
    pub fn new(space: Arc<MeasureSpace<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch {
                expected: space.len(),
                found: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite_value()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { space, values })
    }

    pub fn zero(space: Arc<MeasureSpace<T>>) -> Self {
        let values = vec![T::zero(); space.len()];
        Self { space, values }
    }

    pub fn constant(space: Arc<MeasureSpace<T>>, c: T) -> Self {
        let values = vec![c; space.len()];
        Self { space, values }
    }

    pub fn space(&self) -> &Arc<MeasureSpace<T>> {
        &self.space
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn value(&self, atom: usize) -> &T {
        &self.values[atom]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn same_space(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || *self.space == *other.space
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// Pointwise comparison up to [`Scalar::tolerance`].
    pub fn approx_eq(&self, other: &Self) -> bool {
        self.same_space(other)
            && self.values.iter().zip(&other.values).all(|(a, b)| a.approx_eq(b))
    }

    pub fn map(&self, f: impl Fn(&T) -> T) -> Self {
        Self {
            space: self.space.clone(),
            values: self.values.iter().map(f).collect(),
        }
    }

    pub fn zip_with(&self, other: &Self, f: impl Fn(&T, &T) -> T) -> Result<Self> {
        if !self.same_space(other) {
            return Err(Error::SpaceMismatch);
        }
        Ok(Self {
            space: self.space.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| f(a, b))
                .collect(),
        })
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v.clone())
    }

    pub fn abs(&self) -> Self {
        self.map(|v| v.abs())
    }

    pub fn positive_part(&self) -> Self {
        self.map(|v| v.clone().positive_part())
    }

    pub fn negative_part(&self) -> Self {
        self.map(|v| v.clone().negative_part())
    }

    pub fn scale(&self, c: &T) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    pub fn join(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone().max_of(b.clone()))
    }

    pub fn meet(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone().min_of(b.clone()))
    }

    pub fn half_sum(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| (a.clone() + b.clone()) * T::half())
    }

    pub fn dot_minus(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone().dot_minus(b.clone()))
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() + b.clone())
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() - b.clone())
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.zip_with(other, |a, b| a.clone() * b.clone())
    }

    /// `∫ f dμ`.
    pub fn integral(&self) -> T {
        sum(self
            .space
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| w.clone() * v.clone()))
    }

    /// `‖f‖_1`, available for exact scalars too.
    pub fn l1_norm(&self) -> T {
        self.abs().integral()
    }

    pub fn sup_norm(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max_of(v.abs()))
    }
}

impl<T: Real> LatticeElement<T> {
    /// `(Σ wᵢ|vᵢ|^p)^{1/p}`.
    pub fn lp_norm(&self, p: T) -> Result<T> {
        check_exponent(p)?;
        let mass = sum(self
            .space
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| *w * v.abs().powf(p)));
        Ok(mass.powf(p.recip()))
    }

    /// `∫ |f|^p`.
    pub fn p_mass(&self, p: T) -> Result<T> {
        check_exponent(p)?;
        Ok(sum(self
            .space
            .weights()
            .iter()
            .zip(&self.values)
            .map(|(w, v)| *w * v.abs().powf(p))))
    }

    /// Structure distance `d(f, g) = ‖½(f − g)‖_p`.
    pub fn distance(&self, other: &Self, p: T) -> Result<T> {
        self.sub(other)?.scale(&T::half()).lp_norm(p)
    }
}

pub(crate) fn check_exponent<T: Scalar>(p: T) -> Result<()> {
    if !p.is_finite_value() || p < T::one() {
        return Err(Error::InvalidExponent(p.to_f64()));
    }
    Ok(())
}

/// Applies a lattice operation pointwise. Binary operations need `g`.
pub fn lattice_op<T: Scalar>(
    op: &LatticeOp<T>,
    f: &LatticeElement<T>,
    g: Option<&LatticeElement<T>>,
) -> Result<LatticeElement<T>> {
    let second = || {
        g.ok_or_else(|| Error::InvalidParameter("binary lattice operation needs two operands".into()))
    };
    match op {
        LatticeOp::Neg => Ok(f.neg()),
        LatticeOp::Abs => Ok(f.abs()),
        LatticeOp::Scale(c) => Ok(f.scale(c)),
        LatticeOp::Join => f.join(second()?),
        LatticeOp::Meet => f.meet(second()?),
        LatticeOp::HalfSum => f.half_sum(second()?),
        LatticeOp::DotMinus => f.dot_minus(second()?),
    }
}

/// A conditioning structure: a support set of atoms partitioned into blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubStructure {
    support: Vec<usize>,
    blocks: Vec<Vec<usize>>,
    atom_count: usize,
}

impl SubStructure {
    pub fn new(blocks: Vec<Vec<usize>>, atom_count: usize) -> Result<Self> {
        let mut seen = vec![false; atom_count];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(Error::InvalidSubStructure(format!("block {b} is empty")));
            }
            for &i in block {
                if i >= atom_count {
                    return Err(Error::InvalidSubStructure(format!(
                        "atom {i} out of range for {atom_count} atoms"
                    )));
                }
                if std::mem::replace(&mut seen[i], true) {
                    return Err(Error::InvalidSubStructure(format!(
                        "atom {i} appears in more than one block"
                    )));
                }
            }
        }
        let support = (0..atom_count).filter(|&i| seen[i]).collect();
        Ok(Self {
            support,
            blocks,
            atom_count,
        })
    }

    /// Every atom is its own block.
    pub fn discrete(atom_count: usize) -> Self {
        Self {
            support: (0..atom_count).collect(),
            blocks: (0..atom_count).map(|i| vec![i]).collect(),
            atom_count,
        }
    }

    /// A single block holding every atom.
    pub fn trivial(atom_count: usize) -> Self {
        Self {
            support: (0..atom_count).collect(),
            blocks: vec![(0..atom_count).collect()],
            atom_count,
        }
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }

    pub fn covers_all(&self) -> bool {
        self.support.len() == self.atom_count
    }

    fn check<T: Scalar>(&self, f: &LatticeElement<T>) -> Result<()> {
        if f.len() != self.atom_count {
            return Err(Error::LengthMismatch {
                expected: self.atom_count,
                found: f.len(),
            });
        }
        Ok(())
    }

    /// Whether `f` is constant on every block (up to tolerance).
    pub fn is_measurable<T: Scalar>(&self, f: &LatticeElement<T>) -> Result<bool> {
        Ok(self.first_unmeasurable_block(f)?.is_none())
    }

    pub(crate) fn first_unmeasurable_block<T: Scalar>(
        &self,
        f: &LatticeElement<T>,
    ) -> Result<Option<usize>> {
        self.check(f)?;
        Ok(self.blocks.iter().position(|block| {
            let first = f.value(block[0]);
            block.iter().any(|&i| !f.value(i).approx_eq(first))
        }))
    }

    /// Weighted mean of `f` over each block.
    pub fn block_means<T: Scalar>(&self, f: &LatticeElement<T>) -> Result<Vec<T>> {
        self.check(f)?;
        let w = f.space().weights();
        Ok(self
            .blocks
            .iter()
            .map(|block| {
                let mass = sum(block.iter().map(|&i| w[i].clone()));
                let total = sum(block.iter().map(|&i| w[i].clone() * f.value(i).clone()));
                total / mass
            })
            .collect())
    }
}

/// Conditional expectation onto the blocks: the weighted block mean on the
/// support and zero elsewhere.
pub fn cond_exp<T: Scalar>(f: &LatticeElement<T>, s: &SubStructure) -> Result<LatticeElement<T>> {
    let means = s.block_means(f)?;
    let mut values = vec![T::zero(); f.len()];
    for (block, mean) in s.blocks().iter().zip(means) {
        for &i in block {
            values[i] = mean.clone();
        }
    }
    LatticeElement::new(f.space().clone(), values)
}

/// Splits `f` into the part carried by the support and the orthogonal rest.
pub fn band_decompose<T: Scalar>(
    f: &LatticeElement<T>,
    s: &SubStructure,
) -> Result<(LatticeElement<T>, LatticeElement<T>)> {
    s.check(f)?;
    let mut inside = vec![T::zero(); f.len()];
    for &i in s.support() {
        inside[i] = f.value(i).clone();
    }
    let inside = LatticeElement::new(f.space().clone(), inside)?;
    let outside = f.sub(&inside)?;
    Ok((inside, outside))
}

/// `|f| ∧ |g| = 0`.
pub fn orthogonal<T: Scalar>(f: &LatticeElement<T>, g: &LatticeElement<T>) -> Result<bool> {
    Ok(f.abs().meet(&g.abs())?.is_zero())
}

/// The discretized standard extension: `m` base atoms, each fibered into `n`
/// equal cells, optionally followed by two orthogonal fibers `{+}` and `{−}`
/// of mass one each.
///
/// Cell `(i, j)` of base atom `i` sits at index `i·n + j`; the `{+}` fiber
/// follows the base fibers and the `{−}` fiber comes last.
#[derive(Debug, Clone, PartialEq)]
pub struct ExtensionPair<T> {
    base: Arc<MeasureSpace<T>>,
    total: Arc<MeasureSpace<T>>,
    fiber_cells: usize,
    has_orthogonal: bool,
}

impl<T: Scalar> ExtensionPair<T> {
    pub fn new(base_weights: Vec<T>, fiber_cells: usize, has_orthogonal: bool) -> Result<Self> {
        if fiber_cells == 0 {
            return Err(Error::InvalidSpace("fiber_cells must be positive".into()));
        }
        let base = MeasureSpace::new(base_weights)?;
        let n = T::from_usize(fiber_cells);
        let mut cells = Vec::with_capacity((base.len() + 2) * fiber_cells);
        for w in base.weights() {
            cells.extend(std::iter::repeat_n(w.clone() / n.clone(), fiber_cells));
        }
        if has_orthogonal {
            let w = T::one() / n;
            cells.extend(std::iter::repeat_n(w, 2 * fiber_cells));
        }
        Ok(Self {
            base: Arc::new(base),
            total: Arc::new(MeasureSpace::new(cells)?),
            fiber_cells,
            has_orthogonal,
        })
    }

    pub fn base_space(&self) -> &Arc<MeasureSpace<T>> {
        &self.base
    }

    pub fn total_space(&self) -> &Arc<MeasureSpace<T>> {
        &self.total
    }

    pub fn base_atoms(&self) -> usize {
        self.base.len()
    }

    pub fn fiber_cells(&self) -> usize {
        self.fiber_cells
    }

    pub fn has_orthogonal(&self) -> bool {
        self.has_orthogonal
    }

    pub fn cell(&self, atom: usize, j: usize) -> usize {
        atom * self.fiber_cells + j
    }

    fn base_cells(&self) -> usize {
        self.base.len() * self.fiber_cells
    }

    /// Checks that `f` lives on the total space of this pair.
    pub fn check_total(&self, f: &LatticeElement<T>) -> Result<()> {
        if Arc::ptr_eq(f.space(), &self.total) || **f.space() == *self.total {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn check_base(&self, e: &LatticeElement<T>) -> Result<()> {
        if Arc::ptr_eq(e.space(), &self.base) || **e.space() == *self.base {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    /// Values of `f` along the fiber over base atom `atom`.
    pub fn fiber<'a>(&self, f: &'a LatticeElement<T>, atom: usize) -> &'a [T] {
        let start = atom * self.fiber_cells;
        &f.values()[start..start + self.fiber_cells]
    }

    pub fn plus_fiber<'a>(&self, f: &'a LatticeElement<T>) -> Option<&'a [T]> {
        self.has_orthogonal.then(|| {
            let start = self.base_cells();
            &f.values()[start..start + self.fiber_cells]
        })
    }

    pub fn minus_fiber<'a>(&self, f: &'a LatticeElement<T>) -> Option<&'a [T]> {
        self.has_orthogonal.then(|| {
            let start = self.base_cells() + self.fiber_cells;
            &f.values()[start..start + self.fiber_cells]
        })
    }

    /// Builds an element of `E'` from per-fiber rows; absent orthogonal
    /// fibers are zero.
    pub fn element(
        &self,
        rows: Vec<Vec<T>>,
        plus: Option<Vec<T>>,
        minus: Option<Vec<T>>,
    ) -> Result<LatticeElement<T>> {
        if rows.len() != self.base.len() {
            return Err(Error::LengthMismatch {
                expected: self.base.len(),
                found: rows.len(),
            });
        }
        let mut values = Vec::with_capacity(self.total.len());
        for row in rows {
            if row.len() != self.fiber_cells {
                return Err(Error::LengthMismatch {
                    expected: self.fiber_cells,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        for extra in [plus, minus] {
            match (extra, self.has_orthogonal) {
                (Some(cells), true) => {
                    if cells.len() != self.fiber_cells {
                        return Err(Error::LengthMismatch {
                            expected: self.fiber_cells,
                            found: cells.len(),
                        });
                    }
                    values.extend(cells);
                }
                (None, true) => values.extend(vec![T::zero(); self.fiber_cells]),
                (Some(_), false) => {
                    return Err(Error::InvalidParameter(
                        "orthogonal fibers given but the pair has no orthogonal part".into(),
                    ))
                }
                (None, false) => {}
            }
        }
        LatticeElement::new(self.total.clone(), values)
    }

    /// The canonical embedding `E → E'`: constant along fibers, zero on `{±}`.
    pub fn embed(&self, e: &LatticeElement<T>) -> Result<LatticeElement<T>> {
        self.check_base(e)?;
        let mut values = Vec::with_capacity(self.total.len());
        for v in e.values() {
            values.extend(std::iter::repeat_n(v.clone(), self.fiber_cells));
        }
        values.resize(self.total.len(), T::zero());
        LatticeElement::new(self.total.clone(), values)
    }

    /// Whether `f` lies in the embedded copy of `E`.
    pub fn is_embedded(&self, f: &LatticeElement<T>) -> Result<bool> {
        self.check_total(f)?;
        let fibers_constant = (0..self.base_atoms()).all(|i| {
            let fiber = self.fiber(f, i);
            fiber.iter().all(|v| v.approx_eq(&fiber[0]))
        });
        let orthogonal_zero = f.values()[self.base_cells()..]
            .iter()
            .all(|v| v.approx_eq(&T::zero()));
        Ok(fibers_constant && orthogonal_zero)
    }

    /// The conditioning structure whose blocks are the fibers over `Ω`.
    pub fn base_substructure(&self) -> SubStructure {
        let blocks = (0..self.base_atoms())
            .map(|i| (0..self.fiber_cells).map(|j| self.cell(i, j)).collect())
            .collect();
        SubStructure {
            support: (0..self.base_cells()).collect(),
            blocks,
            atom_count: self.total.len(),
        }
    }

    /// `E[f|E]` as an element of the base space (fiber means over `Ω`).
    pub fn cond_exp_base(&self, f: &LatticeElement<T>) -> Result<LatticeElement<T>> {
        self.fiberwise(f, |fiber| {
            sum(fiber.iter().cloned()) / T::from_usize(fiber.len())
        })
    }

    /// Applies `reduce` to each fiber over `Ω`, producing an element of `E`.
    pub fn fiberwise(
        &self,
        f: &LatticeElement<T>,
        reduce: impl Fn(&[T]) -> T,
    ) -> Result<LatticeElement<T>> {
        self.check_total(f)?;
        let values = (0..self.base_atoms())
            .map(|i| reduce(self.fiber(f, i)))
            .collect();
        LatticeElement::new(self.base.clone(), values)
    }

    /// `f↾_E`: the part of `f` over `Ω`.
    pub fn restrict_to_base(&self, f: &LatticeElement<T>) -> Result<LatticeElement<T>> {
        self.check_total(f)?;
        let mut values = f.values().to_vec();
        for v in &mut values[self.base_cells()..] {
            *v = T::zero();
        }
        LatticeElement::new(self.total.clone(), values)
    }

    /// `f↾_{E⊥}`: the part of `f` on the `{±}` fibers.
    pub fn orthogonal_part(&self, f: &LatticeElement<T>) -> Result<LatticeElement<T>> {
        let inside = self.restrict_to_base(f)?;
        f.sub(&inside)
    }
}

impl<T: Real> ExtensionPair<T> {
    /// `‖(f↾_{E⊥})⁺‖_p` and `‖(f↾_{E⊥})⁻‖_p`.
    pub fn orthogonal_norms(&self, f: &LatticeElement<T>, p: T) -> Result<(T, T)> {
        let perp = self.orthogonal_part(f)?;
        Ok((
            perp.positive_part().lp_norm(p)?,
            perp.negative_part().lp_norm(p)?,
        ))
    }
}
