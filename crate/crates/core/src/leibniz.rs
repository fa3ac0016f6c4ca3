//! Affine constraints on one differential derived from the other two in a
//! Leibniz triple `(A, B, A + B)`.
//!
//! Writing `d(xy) = d(x) y + x d(y)` as an identity of linear maps, each of
//! the three differentials is pinned down (as an affine subspace of its hom
//! space) by affine constraints on the other two:
//!
//! * [`constrain_product`]: `d^{A+B}` from `d^A` and `d^B`, using
//!   `d^{A+B} ∘ μ = μ ∘ (d^A ⊗ 1) + μ ∘ (1 ⊗ d^B)` on `E^A ⊗ E^B`.
//! * [`constrain_factor`]: `d^A` from `d^B` and `d^{A+B}`, using the adjoint
//!   form `μ† ∘ d^A = (d^{A+B})_* ∘ μ† + (d^B)^* ∘ μ†` on `E^A`.
//!
//! Every functor application is an explicit matrix on flattened hom-vectors,
//! so the whole computation reduces to images, sums and preimages of affine
//! subspaces.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::{AffineError, AffineSubspace, MaybeEmptyAffine};
use crate::algebra::{
    post_compose_functor, post_compose_operator, pre_compose_functor, pre_compose_operator,
    AlgebraError, Bidegree, BigradedAlgebra,
    PageShift,
};
use crate::gf2::BitMatrix;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstructionKind {
    /// Constraint on `d^{A+B}`.
    S,
    /// Constraint on `d^A`.
    T,
    /// Constraint on `d^B`, i.e. `T` with the factors exchanged.
    TSwapped,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintResult {
    /// `Empty` means the inputs are inconsistent with the Leibniz rule.
    pub subspace: MaybeEmptyAffine,
    pub construction: ConstructionKind,
    pub pair: (Bidegree, Bidegree),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LeibnizError {
    /// One of the six bidegrees involved is not loaded; the pair is skipped.
    #[error("skipped: {0} is not loaded")]
    Unloaded(Bidegree),
    #[error("constraint input for {bidegree} has ambient dimension {found}, expected {expected}")]
    Shape {
        bidegree: Bidegree,
        expected: usize,
        found: usize,
    },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Affine(#[from] AffineError),
}

/// Dimensions of the six groups involved in the triple `(a, b, a + b)`.
#[derive(Clone, Copy, Debug)]
struct TripleDims {
    a: usize,
    a_t: usize,
    b: usize,
    b_t: usize,
    ab: usize,
    ab_t: usize,
}

fn triple_dims(
    alg: &BigradedAlgebra,
    page: PageShift,
    a: Bidegree,
    b: Bidegree,
) -> Result<TripleDims, LeibnizError> {
    let get = |x: Bidegree| alg.dim(x).ok_or(LeibnizError::Unloaded(x));
    Ok(TripleDims {
        a: get(a)?,
        a_t: get(page.shift(a))?,
        b: get(b)?,
        b_t: get(page.shift(b))?,
        ab: get(a + b)?,
        ab_t: get(page.shift(a + b))?,
    })
}

/// Whether all six bidegrees of the triple are loaded.
pub fn triple_loaded(alg: &BigradedAlgebra, page: PageShift, a: Bidegree, b: Bidegree) -> bool {
    triple_dims(alg, page, a, b).is_ok()
}

fn check_ambient(d: &AffineSubspace, bidegree: Bidegree, expected: usize) -> Result<(), LeibnizError> {
    if d.ambient_dim() == expected {
        Ok(())
    } else {
        Err(LeibnizError::Shape {
            bidegree,
            expected,
            found: d.ambient_dim(),
        })
    }
}

/// Constraint on `d^{A+B}` from `d^A ∈ D_A` and `d^B ∈ D_B`.
pub fn constrain_product(
    alg: &BigradedAlgebra,
    page: PageShift,
    d_a: &AffineSubspace,
    d_b: &AffineSubspace,
    a: Bidegree,
    b: Bidegree,
) -> Result<ConstraintResult, LeibnizError> {
    let dims = triple_dims(alg, page, a, b)?;
    check_ambient(d_a, a, dims.a * dims.a_t)?;
    check_ambient(d_b, b, dims.b * dims.b_t)?;
    let (a_t, b_t) = (page.shift(a), page.shift(b));
    let pair_dim = dims.a * dims.b;

    // μ_*(D_A ⊗ 1) in Hom(E^A ⊗ E^B, E^{(A+B)'})
    let tensor_a = tensor_identity_operator_right(dims.a, dims.a_t, dims.b);
    let push_a = post_compose_operator(&alg.mu_matrix(a_t, b)?, pair_dim);
    let left = d_a.map_image(&tensor_a)?.map_image(&push_a)?;

    // μ_*(1 ⊗ D_B)
    let tensor_b = tensor_identity_operator_left(dims.a, dims.b, dims.b_t);
    let push_b = post_compose_operator(&alg.mu_matrix(a, b_t)?, pair_dim);
    let right = d_b.map_image(&tensor_b)?.map_image(&push_b)?;

    let sum = left.minkowski_sum(&right)?;
    let pull = pre_compose_operator(&alg.mu_matrix(a, b)?, dims.ab_t);
    Ok(ConstraintResult {
        subspace: sum.map_preimage(&pull)?,
        construction: ConstructionKind::S,
        pair: (a, b),
    })
}

/// Constraint on `d^A` from `d^B ∈ D_B` and `d^{A+B} ∈ D_AB`.
pub fn constrain_factor(
    alg: &BigradedAlgebra,
    page: PageShift,
    d_b: &AffineSubspace,
    d_ab: &AffineSubspace,
    a: Bidegree,
    b: Bidegree,
) -> Result<ConstraintResult, LeibnizError> {
    let dims = triple_dims(alg, page, a, b)?;
    check_ambient(d_b, b, dims.b * dims.b_t)?;
    check_ambient(d_ab, a + b, dims.ab * dims.ab_t)?;
    let (a_t, b_t, ab, ab_t) = (page.shift(a), page.shift(b), a + b, page.shift(a + b));
    // Everything lands in Hom(E^A, Hom(E^B, E^{(A+B)'})).
    let inner = dims.ab_t * dims.b;

    // (μ†)^*((D_AB)_*)
    let lower = post_compose_functor(dims.b, dims.ab, dims.ab_t);
    let pull_ab = pre_compose_operator(&alg.mu_dagger_matrix(a, b, ab)?, inner);
    let left = d_ab.map_image(&lower)?.map_image(&pull_ab)?;

    // (μ†)^*((D_B)^*)
    let upper = pre_compose_functor(dims.b, dims.b_t, dims.ab_t);
    let pull_b = pre_compose_operator(&alg.mu_dagger_matrix(a, b_t, ab_t)?, inner);
    let right = d_b.map_image(&upper)?.map_image(&pull_b)?;

    let sum = left.minkowski_sum(&right)?;
    let push = post_compose_operator(&alg.mu_dagger_matrix(a_t, b, ab_t)?, dims.a);
    Ok(ConstraintResult {
        subspace: sum.map_preimage(&push)?,
        construction: ConstructionKind::T,
        pair: (a, b),
    })
}

/// Constraint on `d^B` from `d^A ∈ D_A` and `d^{A+B} ∈ D_AB`.
///
/// The reported pair stays `(a, b)`.
pub fn constrain_factor_swapped(
    alg: &BigradedAlgebra,
    page: PageShift,
    d_a: &AffineSubspace,
    d_ab: &AffineSubspace,
    a: Bidegree,
    b: Bidegree,
) -> Result<ConstraintResult, LeibnizError> {
    let mut result = constrain_factor(alg, page, d_a, d_ab, b, a)?;
    result.construction = ConstructionKind::TSwapped;
    result.pair = (a, b);
    Ok(result)
}

/// Matrix of `f ↦ f ⊗ 1` from flattened `Hom(V, V')` to flattened
/// `Hom(V ⊗ U, V' ⊗ U)`, `dim U = identity_dim`.
pub fn tensor_identity_operator_right(source_dim: usize, target_dim: usize, identity_dim: usize) -> BitMatrix {
    let u = identity_dim;
    let cols = source_dim * u;
    let mut out = BitMatrix::zeros(target_dim * u * cols, target_dim * source_dim);
    for i in 0..target_dim {
        for j in 0..source_dim {
            for k in 0..u {
                out.set((i * u + k) * cols + j * u + k, i * source_dim + j, true);
            }
        }
    }
    out
}

/// Matrix of `f ↦ 1 ⊗ f` from flattened `Hom(W, W')` to flattened
/// `Hom(U ⊗ W, U ⊗ W')`, `dim U = identity_dim`.
pub fn tensor_identity_operator_left(identity_dim: usize, source_dim: usize, target_dim: usize) -> BitMatrix {
    let u = identity_dim;
    let cols = u * source_dim;
    let mut out = BitMatrix::zeros(u * target_dim * cols, target_dim * source_dim);
    for k in 0..u {
        for i in 0..target_dim {
            for j in 0..source_dim {
                out.set((k * target_dim + i) * cols + k * source_dim + j, i * source_dim + j, true);
            }
        }
    }
    out
}
