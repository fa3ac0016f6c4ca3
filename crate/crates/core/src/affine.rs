//! Affine subspaces `v + U` of GF(2)^n.
//!
//! Every [`AffineSubspace`] is kept in canonical form: the linear part is
//! stored as reduced echelon rows and the offset has zeros in all pivot
//! coordinates. Two subspaces are equal as sets exactly when their canonical
//! forms are equal, so `==` is set equality.
//!
//! Intersections and preimages may be empty; they return
//! [`MaybeEmptyAffine`] instead of an `AffineSubspace`, which is never empty.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{reduce_rows, BitMatrix, BitVector};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AffineError {
    #[error("length mismatch: expected {expected}, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("affine span of an empty set of points")]
    EmptySpan,
}

fn check_len(expected: usize, found: usize) -> Result<(), AffineError> {
    if expected == found {
        Ok(())
    } else {
        Err(AffineError::LengthMismatch { expected, found })
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AffineSubspace {
    ambient: usize,
    offset: BitVector,
    basis: Vec<BitVector>,
    pivots: Vec<usize>,
}

/// Result of an operation whose output may be the empty set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MaybeEmptyAffine {
    Empty,
    Subspace(AffineSubspace),
}

impl MaybeEmptyAffine {
    pub fn is_empty(&self) -> bool {
        matches!(self, MaybeEmptyAffine::Empty)
    }

    pub fn subspace(self) -> Option<AffineSubspace> {
        match self {
            MaybeEmptyAffine::Empty => None,
            MaybeEmptyAffine::Subspace(d) => Some(d),
        }
    }

    pub fn as_subspace(&self) -> Option<&AffineSubspace> {
        match self {
            MaybeEmptyAffine::Empty => None,
            MaybeEmptyAffine::Subspace(d) => Some(d),
        }
    }
}

impl From<AffineSubspace> for MaybeEmptyAffine {
    fn from(d: AffineSubspace) -> Self {
        MaybeEmptyAffine::Subspace(d)
    }
}

impl AffineSubspace {
    /// Canonical form of `offset + span(gens)`.
    pub fn canonicalize(offset: BitVector, gens: Vec<BitVector>) -> Result<Self, AffineError> {
        let ambient = offset.len();
        for g in &gens {
            check_len(ambient, g.len())?;
        }
        Ok(Self::from_parts(offset, gens))
    }

    /// Same as [`canonicalize`](Self::canonicalize) for inputs already known
    /// to have matching lengths.
    fn from_parts(mut offset: BitVector, mut gens: Vec<BitVector>) -> Self {
        let ambient = offset.len();
        let pivots = reduce_rows(&mut gens, ambient);
        gens.truncate(pivots.len());
        for (row, &p) in gens.iter().zip(&pivots) {
            if offset.get(p) {
                offset.add_assign(row);
            }
        }
        Self {
            ambient,
            offset,
            basis: gens,
            pivots,
        }
    }

    pub fn point(v: BitVector) -> Self {
        Self {
            ambient: v.len(),
            offset: v,
            basis: Vec::new(),
            pivots: Vec::new(),
        }
    }

    pub fn zero(ambient: usize) -> Self {
        Self::point(BitVector::zeros(ambient))
    }

    /// The whole ambient space.
    pub fn full(ambient: usize) -> Self {
        Self {
            ambient,
            offset: BitVector::zeros(ambient),
            basis: (0..ambient).map(|i| BitVector::unit(ambient, i)).collect(),
            pivots: (0..ambient).collect(),
        }
    }

    /// The linear subspace spanned by `gens`.
    pub fn linear_span(ambient: usize, gens: Vec<BitVector>) -> Result<Self, AffineError> {
        Self::canonicalize(BitVector::zeros(ambient), gens)
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    /// Dimension of the linear part.
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn offset(&self) -> &BitVector {
        &self.offset
    }

    pub fn basis(&self) -> &[BitVector] {
        &self.basis
    }

    pub fn is_point(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_linear(&self) -> bool {
        self.offset.is_zero()
    }

    /// Reduces `x` modulo the linear part.
    fn reduce(&self, x: &mut BitVector) {
        for (row, &p) in self.basis.iter().zip(&self.pivots) {
            if x.get(p) {
                x.add_assign(row);
            }
        }
    }

    pub fn contains(&self, x: &BitVector) -> Result<bool, AffineError> {
        check_len(self.ambient, x.len())?;
        let mut diff = x.add(&self.offset);
        self.reduce(&mut diff);
        Ok(diff.is_zero())
    }

    /// Whether every point of `self` lies in `other`.
    pub fn is_subset_of(&self, other: &AffineSubspace) -> Result<bool, AffineError> {
        check_len(other.ambient, self.ambient)?;
        if !other.contains(&self.offset)? {
            return Ok(false);
        }
        Ok(self.basis.iter().all(|b| {
            let mut r = b.clone();
            other.reduce(&mut r);
            r.is_zero()
        }))
    }

    pub fn intersect(&self, other: &AffineSubspace) -> Result<MaybeEmptyAffine, AffineError> {
        check_len(self.ambient, other.ambient)?;
        // Solve U1 a + U2 b = v1 + v2; kernel pairs (a, b) give U1 ∩ U2 as U1 a.
        let k1 = self.basis.len();
        let gens: Vec<BitVector> = self.basis.iter().chain(&other.basis).cloned().collect();
        let system = BitMatrix::from_columns(&gens, self.ambient);
        let Some(coeffs) = system.solve(&self.offset.add(&other.offset)) else {
            return Ok(MaybeEmptyAffine::Empty);
        };
        let combine = |c: &BitVector| {
            let mut acc = BitVector::zeros(self.ambient);
            for i in c.ones().take_while(|&i| i < k1) {
                acc.add_assign(&self.basis[i]);
            }
            acc
        };
        let offset = self.offset.add(&combine(&coeffs));
        let linear = system.kernel_basis().iter().map(combine).collect();
        Ok(Self::from_parts(offset, linear).into())
    }

    /// Smallest affine subspace containing every point.
    pub fn affine_span(points: &[BitVector]) -> Result<Self, AffineError> {
        let (first, rest) = points.split_first().ok_or(AffineError::EmptySpan)?;
        for p in rest {
            check_len(first.len(), p.len())?;
        }
        let gens = rest.iter().map(|p| p.add(first)).collect();
        Ok(Self::from_parts(first.clone(), gens))
    }

    /// `{(x, y) : x ∈ self, y ∈ other}` in the concatenated ambient space.
    pub fn direct_sum(&self, other: &AffineSubspace) -> Self {
        let left_zero = BitVector::zeros(self.ambient);
        let right_zero = BitVector::zeros(other.ambient);
        let gens = self
            .basis
            .iter()
            .map(|b| b.concat(&right_zero))
            .chain(other.basis.iter().map(|b| left_zero.concat(b)))
            .collect();
        Self::from_parts(self.offset.concat(&other.offset), gens)
    }

    /// Affine span of `{x ⊗ y}`. Coordinate `(i, j)` of the product space is
    /// index `i * other.ambient_dim() + j`.
    pub fn tensor(&self, other: &AffineSubspace) -> Self {
        let v = &self.offset;
        let w = &other.offset;
        let mut gens = Vec::new();
        for u in &other.basis {
            gens.push(tensor_vectors(v, u));
        }
        for u in &self.basis {
            gens.push(tensor_vectors(u, w));
            for u2 in &other.basis {
                gens.push(tensor_vectors(u, u2));
            }
        }
        Self::from_parts(tensor_vectors(v, w), gens)
    }

    /// `f(self)`.
    pub fn map_image(&self, f: &BitMatrix) -> Result<Self, AffineError> {
        check_len(f.cols(), self.ambient)?;
        let gens = self.basis.iter().map(|b| f.mul_vec(b)).collect();
        Ok(Self::from_parts(f.mul_vec(&self.offset), gens))
    }

    /// `f⁻¹(self)`, empty when `self` misses the image of `f`.
    pub fn map_preimage(&self, f: &BitMatrix) -> Result<MaybeEmptyAffine, AffineError> {
        check_len(f.rows(), self.ambient)?;
        let n = f.cols();
        // Solve f x + U c = v over the augmented system [f | U].
        let mut system = f.clone().into_rows();
        let basis_cols = BitMatrix::from_columns(&self.basis, self.ambient);
        for (row, extra) in system.iter_mut().zip(basis_cols.row_vectors()) {
            *row = row.concat(extra);
        }
        let system = BitMatrix::from_rows(system, n + self.basis.len());
        let Some(solution) = system.solve(&self.offset) else {
            return Ok(MaybeEmptyAffine::Empty);
        };
        let linear = system.kernel_basis().iter().map(|k| k.slice(0, n)).collect();
        Ok(Self::from_parts(solution.slice(0, n), linear).into())
    }

    /// `{x + y : x ∈ self, y ∈ other}`.
    pub fn minkowski_sum(&self, other: &AffineSubspace) -> Result<Self, AffineError> {
        check_len(self.ambient, other.ambient)?;
        let gens = self.basis.iter().chain(&other.basis).cloned().collect();
        Ok(Self::from_parts(self.offset.add(&other.offset), gens))
    }

    /// Coordinates that take the same value at every point, with that value.
    pub fn fixed_coordinates(&self) -> Vec<(usize, bool)> {
        let mut free = BitVector::zeros(self.ambient);
        for b in &self.basis {
            for i in b.ones() {
                free.set(i, true);
            }
        }
        (0..self.ambient)
            .filter(|&i| !free.get(i))
            .map(|i| (i, self.offset.get(i)))
            .collect()
    }

    /// All `2^dim` points. Intended for small subspaces.
    pub fn points(&self) -> Vec<BitVector> {
        assert!(self.dim() < 32, "refusing to enumerate 2^{} points", self.dim());
        (0u64..1 << self.dim())
            .map(|mask| {
                let mut p = self.offset.clone();
                for (i, b) in self.basis.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        p.add_assign(b);
                    }
                }
                p
            })
            .collect()
    }
}

/// Coordinates of `x ⊗ y` with index `(i, j) ↦ i * y.len() + j`.
pub fn tensor_vectors(x: &BitVector, y: &BitVector) -> BitVector {
    let mut out = BitVector::zeros(x.len() * y.len());
    for i in x.ones() {
        for j in y.ones() {
            out.set(i * y.len() + j, true);
        }
    }
    out
}

impl std::fmt::Debug for AffineSubspace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:?} + span", self.offset)?;
        f.debug_list().entries(&self.basis).finish()
    }
}

/// Plain 0/1 array form used in results files.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineRecord {
    pub offset: Vec<u8>,
    pub basis: Vec<Vec<u8>>,
}

impl From<&AffineSubspace> for AffineRecord {
    fn from(d: &AffineSubspace) -> Self {
        Self {
            offset: d.offset.to_u8s(),
            basis: d.basis.iter().map(BitVector::to_u8s).collect(),
        }
    }
}

impl TryFrom<&AffineRecord> for AffineSubspace {
    type Error = AffineError;

    fn try_from(r: &AffineRecord) -> Result<Self, AffineError> {
        AffineSubspace::canonicalize(
            BitVector::from_u8s(&r.offset),
            r.basis.iter().map(|b| BitVector::from_u8s(b)).collect(),
        )
    }
}
