//! Deduction of differentials in a differential bigraded algebra over GF(2)
//! by propagating the Leibniz rule through affine subspaces of hom-spaces.
//!
//! The crate is layered bottom-up:
//!
//! * [`gf2`]: bit-packed vectors and matrices over GF(2).
//! * [`affine`]: canonical affine subspaces and their closure operations.
//! * [`algebra`]: bidegrees, the multiplication tables and hom-space operators.
//! * [`leibniz`]: the constraints one differential imposes on another.
//! * [`propagate`]: the fixpoint loop, seeding, staging and reporting.
//! * [`ingest`] and [`results`]: the JSON file formats.
//! * [`cli`]: the command-line front end and SVG chart rendering.

pub mod affine;
pub mod algebra;
pub mod cli;
pub mod gf2;
pub mod ingest;
pub mod leibniz;
pub mod propagate;
pub mod results;

pub use affine::{AffineSubspace, MaybeEmptyAffine};
pub use algebra::{Bidegree, BigradedAlgebra, PageShift};
pub use gf2::{BitMatrix, BitVector};
