//! Bigraded algebras over GF(2) and the linear operators on hom-spaces built
//! from their multiplication.
//!
//! Conventions used throughout the crate:
//!
//! * A basis pair `x_i ⊗ y_j` of `E^A ⊗ E^B` has index `i * dim(B) + j`.
//! * A linear map `f: V -> W` is stored as a `dim W x dim V` matrix whose
//!   column `j` is `f(e_j)`. Its flattened form is the row-major vector of
//!   length `dim W * dim V`, entry `(i, j)` at index `i * dim V + j`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gf2::{BitMatrix, BitVector};

/// A position `(n, s)` on a chart: stem `n`, filtration `s`.
///
/// Ordered lexicographically by stem, then filtration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Bidegree {
    pub n: i32,
    pub s: i32,
}

impl Bidegree {
    pub const fn new(n: i32, s: i32) -> Self {
        Self { n, s }
    }
}

impl Add for Bidegree {
    type Output = Bidegree;

    fn add(self, rhs: Bidegree) -> Bidegree {
        Bidegree::new(self.n + rhs.n, self.s + rhs.s)
    }
}

impl fmt::Display for Bidegree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.s)
    }
}

/// The page `r` of the differential `d_r`, which maps `(n, s)` to `(n - 1, s + r)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PageShift(u32);

impl PageShift {
    pub fn new(r: u32) -> Result<Self, AlgebraError> {
        if r >= 2 {
            Ok(Self(r))
        } else {
            Err(AlgebraError::InvalidPage(r))
        }
    }

    pub fn r(self) -> u32 {
        self.0
    }

    /// Bidegree of the target of the differential on `a`.
    pub fn shift(self, a: Bidegree) -> Bidegree {
        Bidegree::new(a.n - 1, a.s + self.0 as i32)
    }
}

impl Default for PageShift {
    fn default() -> Self {
        Self(2)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("page r = {0} is invalid; r must be at least 2")]
    InvalidPage(u32),
    #[error("bidegree {0} is outside the loaded region")]
    Unloaded(Bidegree),
    #[error("bidegree {0} declared twice")]
    DuplicateBidegree(Bidegree),
    #[error("element name {name:?} used twice ({first} and {second})")]
    DuplicateName {
        name: String,
        first: Bidegree,
        second: Bidegree,
    },
    #[error("product {a} x {b}: expected a {rows}x{cols} matrix, got {found_rows}x{found_cols}")]
    ProductShape {
        a: Bidegree,
        b: Bidegree,
        rows: usize,
        cols: usize,
        found_rows: usize,
        found_cols: usize,
    },
    #[error("product {a} x {b} given twice with different values")]
    ConflictingProduct { a: Bidegree, b: Bidegree },
    #[error("product {a} x {b} is missing although {a}, {b} and their sum are all loaded")]
    MissingProduct { a: Bidegree, b: Bidegree },
    #[error("product {a} x {b} lands outside the loaded region")]
    ProductOutsideRegion { a: Bidegree, b: Bidegree },
    #[error("product {a} x {a} is not commutative")]
    NotCommutative { a: Bidegree },
    #[error("multiplication is not associative on {a} x {b} x {c}")]
    NotAssociative { a: Bidegree, b: Bidegree, c: Bidegree },
    #[error("unit element {index} in (0,0) does not act as the identity on {b}")]
    NotUnital { index: usize, b: Bidegree },
    #[error("unit must live in a loaded, nonzero bidegree (0,0), index {0} is invalid")]
    BadUnit(usize),
    #[error("{source_bidegree} + {b} != {target}")]
    DegreeMismatch {
        source_bidegree: Bidegree,
        b: Bidegree,
        target: Bidegree,
    },
}

/// A finite truncation of a bigraded, graded-commutative algebra over GF(2).
///
/// Only bidegrees in the loaded region have known groups; a bidegree outside
/// it is unknown, which is different from being zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigradedAlgebra {
    dims: BTreeMap<Bidegree, usize>,
    names: BTreeMap<Bidegree, Vec<String>>,
    name_index: BTreeMap<String, (Bidegree, usize)>,
    // Keyed with a <= b.
    products: BTreeMap<(Bidegree, Bidegree), BitMatrix>,
    unit: Option<usize>,
}

/// Input to [`BigradedAlgebra::new`].
#[derive(Clone, Debug, Default)]
pub struct AlgebraBuilder {
    bidegrees: Vec<(Bidegree, Vec<String>)>,
    products: Vec<(Bidegree, Bidegree, BitMatrix)>,
    unit: Option<usize>,
}

impl AlgebraBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Declares a bidegree with one name per basis element.
    pub fn bidegree(mut self, b: Bidegree, names: Vec<String>) -> Self {
        self.bidegrees.push((b, names));
        self
    }

    /// Declares a bidegree of dimension `dim` with generated names.
    pub fn anonymous(self, b: Bidegree, dim: usize) -> Self {
        let names = (0..dim).map(|i| format!("x_{}_{}_{}", b.n, b.s, i)).collect();
        self.bidegree(b, names)
    }

    /// Multiplication `E^a ⊗ E^b -> E^{a+b}` as a `dim(a+b) x (dim a * dim b)` matrix.
    pub fn product(mut self, a: Bidegree, b: Bidegree, matrix: BitMatrix) -> Self {
        self.products.push((a, b, matrix));
        self
    }

    /// Marks basis element `index` of `(0,0)` as the unit.
    pub fn unit(mut self, index: usize) -> Self {
        self.unit = Some(index);
        self
    }

    pub fn build(self) -> Result<BigradedAlgebra, AlgebraError> {
        BigradedAlgebra::new(self)
    }
}

/// `μ(B, A)` from `μ(A, B)` by swapping tensor factors.
fn swap_factors(m: &BitMatrix, dim_a: usize, dim_b: usize) -> BitMatrix {
    let mut out = BitMatrix::zeros(m.rows(), m.cols());
    for k in 0..m.rows() {
        for c in m.row(k).ones() {
            let (i, j) = (c / dim_b, c % dim_b);
            out.set(k, j * dim_a + i, true);
        }
    }
    out
}

impl BigradedAlgebra {
    pub fn builder() -> AlgebraBuilder {
        AlgebraBuilder::new()
    }

    pub fn empty() -> Self {
        Self::new(AlgebraBuilder::new()).expect("empty algebra is valid")
    }

    /// Validates shapes and completeness. Does not run the
    /// commutativity/associativity audits; see [`audit`](Self::audit).
    pub fn new(builder: AlgebraBuilder) -> Result<Self, AlgebraError> {
        let mut dims = BTreeMap::new();
        let mut names = BTreeMap::new();
        let mut name_index = BTreeMap::new();
        for (b, ns) in builder.bidegrees {
            if dims.insert(b, ns.len()).is_some() {
                return Err(AlgebraError::DuplicateBidegree(b));
            }
            for (i, name) in ns.iter().enumerate() {
                if let Some((first, _)) = name_index.insert(name.clone(), (b, i)) {
                    return Err(AlgebraError::DuplicateName {
                        name: name.clone(),
                        first,
                        second: b,
                    });
                }
            }
            names.insert(b, ns);
        }

        let mut products: BTreeMap<(Bidegree, Bidegree), BitMatrix> = BTreeMap::new();
        for (a, b, m) in builder.products {
            let (Some(&da), Some(&db)) = (dims.get(&a), dims.get(&b)) else {
                return Err(AlgebraError::Unloaded(if dims.contains_key(&a) { b } else { a }));
            };
            let Some(&dc) = dims.get(&(a + b)) else {
                return Err(AlgebraError::ProductOutsideRegion { a, b });
            };
            if m.rows() != dc || m.cols() != da * db {
                return Err(AlgebraError::ProductShape {
                    a,
                    b,
                    rows: dc,
                    cols: da * db,
                    found_rows: m.rows(),
                    found_cols: m.cols(),
                });
            }
            if da == 0 || db == 0 || dc == 0 {
                continue;
            }
            let (key, m) = if a <= b {
                ((a, b), m)
            } else {
                ((b, a), swap_factors(&m, da, db))
            };
            if let Some(existing) = products.get(&key) {
                if *existing != m {
                    return Err(AlgebraError::ConflictingProduct { a: key.0, b: key.1 });
                }
            } else {
                products.insert(key, m);
            }
        }

        let alg = Self {
            dims,
            names,
            name_index,
            products,
            unit: builder.unit,
        };

        for (&a, &da) in &alg.dims {
            for (&b, &db) in alg.dims.range(a..) {
                if da == 0 || db == 0 {
                    continue;
                }
                if let Some(&dc) = alg.dims.get(&(a + b)) {
                    if dc > 0 && !alg.products.contains_key(&(a, b)) {
                        return Err(AlgebraError::MissingProduct { a, b });
                    }
                }
            }
        }
        if let Some(u) = alg.unit {
            if u >= alg.dim(Bidegree::new(0, 0)).unwrap_or(0) {
                return Err(AlgebraError::BadUnit(u));
            }
        }
        Ok(alg)
    }

    pub fn is_loaded(&self, b: Bidegree) -> bool {
        self.dims.contains_key(&b)
    }

    pub fn dim(&self, b: Bidegree) -> Option<usize> {
        self.dims.get(&b).copied()
    }

    fn loaded_dim(&self, b: Bidegree) -> Result<usize, AlgebraError> {
        self.dim(b).ok_or(AlgebraError::Unloaded(b))
    }

    pub fn bidegrees(&self) -> impl Iterator<Item = Bidegree> + '_ {
        self.dims.keys().copied()
    }

    pub fn dims(&self) -> &BTreeMap<Bidegree, usize> {
        &self.dims
    }

    pub fn names(&self, b: Bidegree) -> Option<&[String]> {
        self.names.get(&b).map(Vec::as_slice)
    }

    /// Bidegree and basis index of a named element.
    pub fn lookup(&self, name: &str) -> Option<(Bidegree, usize)> {
        self.name_index.get(name).copied()
    }

    pub fn unit(&self) -> Option<usize> {
        self.unit
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Stored products, keyed with `a <= b`.
    pub fn stored_products(&self) -> &BTreeMap<(Bidegree, Bidegree), BitMatrix> {
        &self.products
    }

    /// Multiplication `E^a ⊗ E^b -> E^{a+b}` as a `dim(a+b) x (dim a * dim b)` matrix.
    pub fn mu_matrix(&self, a: Bidegree, b: Bidegree) -> Result<BitMatrix, AlgebraError> {
        let da = self.loaded_dim(a)?;
        let db = self.loaded_dim(b)?;
        let dc = self.loaded_dim(a + b)?;
        if da == 0 || db == 0 || dc == 0 {
            return Ok(BitMatrix::zeros(dc, da * db));
        }
        if a <= b {
            Ok(self.products[&(a, b)].clone())
        } else {
            Ok(swap_factors(&self.products[&(b, a)], db, da))
        }
    }

    /// Product of two elements given as coordinate vectors.
    pub fn multiply(
        &self,
        a: Bidegree,
        x: &BitVector,
        b: Bidegree,
        y: &BitVector,
    ) -> Result<BitVector, AlgebraError> {
        let mu = self.mu_matrix(a, b)?;
        Ok(mu.mul_vec(&crate::affine::tensor_vectors(x, y)))
    }

    /// Matrix of `x ↦ (y ↦ x·y)`, from `E^source` into the flattened
    /// `Hom(E^b, E^target)`. Shape `(dim target * dim b) x dim source`.
    pub fn mu_dagger_matrix(
        &self,
        source: Bidegree,
        b: Bidegree,
        target: Bidegree,
    ) -> Result<BitMatrix, AlgebraError> {
        if source + b != target {
            return Err(AlgebraError::DegreeMismatch {
                source_bidegree: source,
                b,
                target,
            });
        }
        let mu = self.mu_matrix(source, b)?;
        let da = self.loaded_dim(source)?;
        let db = self.loaded_dim(b)?;
        let dc = self.loaded_dim(target)?;
        let mut out = BitMatrix::zeros(dc * db, da);
        for k in 0..dc {
            for c in mu.row(k).ones() {
                let (i, j) = (c / db, c % db);
                out.set(k * db + j, i, true);
            }
        }
        Ok(out)
    }

    /// Runs the commutativity, associativity and unit audits.
    pub fn audit(&self) -> Result<(), AlgebraError> {
        self.audit_commutativity()?;
        self.audit_associativity()?;
        self.audit_unit()
    }

    /// Squares `E^a ⊗ E^a -> E^{2a}` must be symmetric. Other pairs are
    /// stored once, so commutativity holds for them by construction.
    pub fn audit_commutativity(&self) -> Result<(), AlgebraError> {
        for (&(a, b), m) in &self.products {
            if a == b {
                let d = self.dims[&a];
                if swap_factors(m, d, d) != *m {
                    return Err(AlgebraError::NotCommutative { a });
                }
            }
        }
        Ok(())
    }

    /// `(xy)z = x(yz)` on every triple whose intermediate bidegrees are loaded.
    pub fn audit_associativity(&self) -> Result<(), AlgebraError> {
        let degrees: Vec<Bidegree> = self.dims.iter().filter(|(_, &d)| d > 0).map(|(&b, _)| b).collect();
        for (ia, &a) in degrees.iter().enumerate() {
            for &b in &degrees[ia..] {
                if !self.is_loaded(a + b) {
                    continue;
                }
                // With a <= b fixed and c free, (ab)c = a(bc) covers every
                // bracketing once commutativity holds.
                for &c in &degrees {
                    let abc = a + b + c;
                    if !self.is_loaded(b + c) || !self.is_loaded(abc) {
                        continue;
                    }
                    if self.dims[&abc] == 0 {
                        continue;
                    }
                    let (da, db, dc) = (self.dims[&a], self.dims[&b], self.dims[&c]);
                    let left = self.mu_matrix(a + b, c)?.mul(&tensor_with_identity_right(
                        &self.mu_matrix(a, b)?,
                        dc,
                    ));
                    let right = self.mu_matrix(a, b + c)?.mul(&tensor_with_identity_left(
                        da,
                        &self.mu_matrix(b, c)?,
                    ));
                    debug_assert_eq!(left.cols(), da * db * dc);
                    if left != right {
                        return Err(AlgebraError::NotAssociative { a, b, c });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn audit_unit(&self) -> Result<(), AlgebraError> {
        let Some(u) = self.unit else {
            return Ok(());
        };
        let zero = Bidegree::new(0, 0);
        let d0 = self.loaded_dim(zero)?;
        for (&b, &db) in &self.dims {
            if db == 0 {
                continue;
            }
            let mu = self.mu_matrix(zero, b)?;
            let acts_as_identity = (0..db).all(|j| mu.column(u * db + j) == BitVector::unit(db, j));
            if !acts_as_identity {
                return Err(AlgebraError::NotUnital { index: u, b });
            }
            debug_assert_eq!(mu.cols(), d0 * db);
        }
        Ok(())
    }
}

/// `f ⊗ 1` on `V ⊗ U`, with `dim U = identity_dim`, as a matrix.
pub fn tensor_with_identity_right(f: &BitMatrix, identity_dim: usize) -> BitMatrix {
    let u = identity_dim;
    let mut out = BitMatrix::zeros(f.rows() * u, f.cols() * u);
    for i in 0..f.rows() {
        for j in f.row(i).ones() {
            for k in 0..u {
                out.set(i * u + k, j * u + k, true);
            }
        }
    }
    out
}

/// `1 ⊗ f` on `U ⊗ V`, with `dim U = identity_dim`, as a matrix.
pub fn tensor_with_identity_left(identity_dim: usize, f: &BitMatrix) -> BitMatrix {
    let u = identity_dim;
    let mut out = BitMatrix::zeros(u * f.rows(), u * f.cols());
    for k in 0..u {
        for i in 0..f.rows() {
            for j in f.row(i).ones() {
                out.set(k * f.rows() + i, k * f.cols() + j, true);
            }
        }
    }
    out
}

/// The space of linear maps `E^source -> E^target` with its flattening.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HomSpace {
    pub source: Bidegree,
    pub target: Bidegree,
    pub source_dim: usize,
    pub target_dim: usize,
}

impl HomSpace {
    pub fn new(alg: &BigradedAlgebra, source: Bidegree, target: Bidegree) -> Result<Self, AlgebraError> {
        Ok(Self {
            source,
            target,
            source_dim: alg.loaded_dim(source)?,
            target_dim: alg.loaded_dim(target)?,
        })
    }

    /// `Hom(E^a, E^{a'})` for the differential on `a`.
    pub fn differential(alg: &BigradedAlgebra, page: PageShift, a: Bidegree) -> Result<Self, AlgebraError> {
        Self::new(alg, a, page.shift(a))
    }

    pub fn dim(&self) -> usize {
        self.source_dim * self.target_dim
    }

    pub fn flatten(&self, m: &BitMatrix) -> BitVector {
        assert_eq!((m.rows(), m.cols()), (self.target_dim, self.source_dim), "hom shape mismatch");
        flatten(m)
    }

    pub fn unflatten(&self, v: &BitVector) -> BitMatrix {
        unflatten(v, self.target_dim, self.source_dim)
    }
}

/// Row-major flattening of a matrix.
pub fn flatten(m: &BitMatrix) -> BitVector {
    let mut out = BitVector::zeros(m.rows() * m.cols());
    for i in 0..m.rows() {
        for j in m.row(i).ones() {
            out.set(i * m.cols() + j, true);
        }
    }
    out
}

pub fn unflatten(v: &BitVector, rows: usize, cols: usize) -> BitMatrix {
    assert_eq!(v.len(), rows * cols, "flattened length mismatch");
    let mut m = BitMatrix::zeros(rows, cols);
    for idx in v.ones() {
        m.set(idx / cols, idx % cols, true);
    }
    m
}

/// Matrix of `g ↦ g ∘ f` for `f: V -> W`, acting on flattened
/// `Hom(W, U) -> Hom(V, U)` with `dim U = target_dim`.
///
/// Shape `(target_dim * f.cols()) x (target_dim * f.rows())`.
pub fn pre_compose_operator(f: &BitMatrix, target_dim: usize) -> BitMatrix {
    let (dw, dv) = (f.rows(), f.cols());
    let mut out = BitMatrix::zeros(target_dim * dv, target_dim * dw);
    for w in 0..dw {
        for v in f.row(w).ones() {
            for u in 0..target_dim {
                out.set(u * dv + v, u * dw + w, true);
            }
        }
    }
    out
}

/// Matrix of `g ↦ f ∘ g` for `f: V -> W`, acting on flattened
/// `Hom(U, V) -> Hom(U, W)` with `dim U = source_dim`.
///
/// Shape `(f.rows() * source_dim) x (f.cols() * source_dim)`.
pub fn post_compose_operator(f: &BitMatrix, source_dim: usize) -> BitMatrix {
    let (dw, dv) = (f.rows(), f.cols());
    let du = source_dim;
    let mut out = BitMatrix::zeros(dw * du, dv * du);
    for w in 0..dw {
        for v in f.row(w).ones() {
            for u in 0..du {
                out.set(w * du + u, v * du + u, true);
            }
        }
    }
    out
}

/// Matrix of the linear map `f ↦ f_*`, from flattened `Hom(V, W)` into the
/// flattened `Hom(Hom(U, V), Hom(U, W))`. Applying it to `flatten(f)` gives
/// `flatten(post_compose_operator(f, u_dim))`.
pub fn post_compose_functor(u_dim: usize, v_dim: usize, w_dim: usize) -> BitMatrix {
    let inner_cols = v_dim * u_dim;
    let mut out = BitMatrix::zeros(w_dim * u_dim * inner_cols, w_dim * v_dim);
    for w in 0..w_dim {
        for v in 0..v_dim {
            for u in 0..u_dim {
                let (row, col) = (w * u_dim + u, v * u_dim + u);
                out.set(row * inner_cols + col, w * v_dim + v, true);
            }
        }
    }
    out
}

/// Matrix of the linear map `f ↦ f^*`, from flattened `Hom(V, W)` into the
/// flattened `Hom(Hom(W, U), Hom(V, U))`. Applying it to `flatten(f)` gives
/// `flatten(pre_compose_operator(f, u_dim))`.
pub fn pre_compose_functor(v_dim: usize, w_dim: usize, u_dim: usize) -> BitMatrix {
    let inner_cols = u_dim * w_dim;
    let mut out = BitMatrix::zeros(u_dim * v_dim * inner_cols, w_dim * v_dim);
    for w in 0..w_dim {
        for v in 0..v_dim {
            for u in 0..u_dim {
                let (row, col) = (u * v_dim + v, u * w_dim + w);
                out.set(row * inner_cols + col, w * v_dim + v, true);
            }
        }
    }
    out
}

/// Bidegrees `a` for which both `a` and its differential target are loaded.
pub fn differential_domain(alg: &BigradedAlgebra, page: PageShift) -> BTreeSet<Bidegree> {
    alg.bidegrees()
        .filter(|&a| alg.is_loaded(page.shift(a)))
        .collect()
}
