//! Enumerated Leibniz constraint sets.
//!
//! All maps are flattened row-major (`entry (k, i)` at `k * cols + i`). A bilinear
//! map `E^A x E^B -> W` is encoded by listing its values on basis pairs
//! `(i, j)` in the order `i * dim B + j`.

use std::collections::{BTreeSet, HashSet};

use adams_leibniz::leibniz::{constrain_factor, constrain_factor_swapped, constrain_product};
use adams_leibniz::{AffineSubspace, Bidegree, BigradedAlgebra, BitMatrix, BitVector, MaybeEmptyAffine, PageShift};
use adams_leibniz::propagate::relevant_pairs;
use rand::seq::SliceRandom;
use rand::Rng;

use super::toy::{random_toy, ToyParams};

pub type Vector = Vec<u8>;

/// Basis product lookup: `(x, i, y, j) -> coordinates of e_i * f_j`.
pub type Mul<'a> = &'a dyn Fn(Bidegree, usize, Bidegree, usize) -> Vector;

pub fn points(d: &AffineSubspace) -> BTreeSet<Vector> {
    let offset = d.offset().to_u8s();
    let basis: Vec<Vector> = d.basis().iter().map(BitVector::to_u8s).collect();
    let mut out = BTreeSet::new();
    for mask in 0u64..1 << basis.len() {
        let mut x = offset.clone();
        for (k, g) in basis.iter().enumerate() {
            if mask >> k & 1 == 1 {
                for (p, q) in x.iter_mut().zip(g) {
                    *p ^= q;
                }
            }
        }
        out.insert(x);
    }
    out
}

pub fn points_maybe(d: &MaybeEmptyAffine) -> BTreeSet<Vector> {
    d.as_subspace().map(points).unwrap_or_default()
}

fn all_vectors(n: usize) -> impl Iterator<Item = Vector> {
    (0u64..1 << n).map(move |x| (0..n).map(|i| (x >> i & 1) as u8).collect())
}

fn xor(a: &[u8], b: &[u8]) -> Vector {
    a.iter().zip(b).map(|(p, q)| p ^ q).collect()
}

/// Dimensions of the six groups of a triple.
#[derive(Clone, Copy, Debug)]
pub struct Dims {
    pub a: usize,
    pub b: usize,
    pub a1: usize,
    pub b1: usize,
    pub ab: usize,
    pub ab1: usize,
}

pub struct Triple<'a> {
    pub a: Bidegree,
    pub b: Bidegree,
    pub page: PageShift,
    pub dims: Dims,
    pub mul: Mul<'a>,
}

impl Triple<'_> {
    fn a1(&self) -> Bidegree {
        self.page.shift(self.a)
    }

    fn b1(&self) -> Bidegree {
        self.page.shift(self.b)
    }

    /// `(x ⊗ y) ↦ μ(α(x) ⊗ y)` for `α: A -> A'`.
    fn left(&self, alpha: &[u8]) -> Vector {
        let Dims { a, b, a1, ab1, .. } = self.dims;
        let mut out = Vec::with_capacity(a * b * ab1);
        for i in 0..a {
            for j in 0..b {
                let mut v = vec![0u8; ab1];
                for k in 0..a1 {
                    if alpha[k * a + i] == 1 {
                        v = xor(&v, &(self.mul)(self.a1(), k, self.b, j));
                    }
                }
                out.extend(v);
            }
        }
        out
    }

    /// `(x ⊗ y) ↦ μ(x ⊗ β(y))` for `β: B -> B'`.
    fn right(&self, beta: &[u8]) -> Vector {
        let Dims { a, b, b1, ab1, .. } = self.dims;
        let mut out = Vec::with_capacity(a * b * ab1);
        for i in 0..a {
            for j in 0..b {
                let mut v = vec![0u8; ab1];
                for k in 0..b1 {
                    if beta[k * b + j] == 1 {
                        v = xor(&v, &(self.mul)(self.a, i, self.b1(), k));
                    }
                }
                out.extend(v);
            }
        }
        out
    }

    /// `(x ⊗ y) ↦ m(μ(x ⊗ y))` for `m: A+B -> (A+B)'`.
    fn outer(&self, m: &[u8]) -> Vector {
        let Dims { a, b, ab, ab1, .. } = self.dims;
        let mut out = Vec::with_capacity(a * b * ab1);
        for i in 0..a {
            for j in 0..b {
                let xy = (self.mul)(self.a, i, self.b, j);
                for t in 0..ab1 {
                    let mut bit = 0;
                    for (u, &c) in xy.iter().enumerate() {
                        bit ^= c & m[t * ab + u];
                    }
                    out.push(bit);
                }
            }
        }
        out
    }

    /// `{m : m∘μ = μ(α⊗1) + μ(1⊗β), α ∈ D_A, β ∈ D_B}`.
    pub fn product_set(&self, da: &BTreeSet<Vector>, db: &BTreeSet<Vector>) -> BTreeSet<Vector> {
        let lefts: Vec<Vector> = da.iter().map(|x| self.left(x)).collect();
        let rights: Vec<Vector> = db.iter().map(|y| self.right(y)).collect();
        let allowed: HashSet<Vector> = lefts.iter().flat_map(|l| rights.iter().map(move |r| xor(l, r))).collect();
        all_vectors(self.dims.ab * self.dims.ab1)
            .filter(|m| allowed.contains(&self.outer(m)))
            .collect()
    }

    /// `{α : μ(α⊗1) = m∘μ + μ(1⊗β), β ∈ D_B, m ∈ D_AB}`.
    pub fn factor_set(&self, db: &BTreeSet<Vector>, dab: &BTreeSet<Vector>) -> BTreeSet<Vector> {
        let outers: Vec<Vector> = dab.iter().map(|m| self.outer(m)).collect();
        let rights: Vec<Vector> = db.iter().map(|y| self.right(y)).collect();
        let allowed: HashSet<Vector> = outers.iter().flat_map(|o| rights.iter().map(move |r| xor(o, r))).collect();
        all_vectors(self.dims.a * self.dims.a1)
            .filter(|x| allowed.contains(&self.left(x)))
            .collect()
    }

    /// `{β : μ(1⊗β) = m∘μ + μ(α⊗1), α ∈ D_A, m ∈ D_AB}`.
    pub fn factor_swapped_set(&self, da: &BTreeSet<Vector>, dab: &BTreeSet<Vector>) -> BTreeSet<Vector> {
        let outers: Vec<Vector> = dab.iter().map(|m| self.outer(m)).collect();
        let lefts: Vec<Vector> = da.iter().map(|x| self.left(x)).collect();
        let allowed: HashSet<Vector> = outers.iter().flat_map(|o| lefts.iter().map(move |l| xor(o, l))).collect();
        all_vectors(self.dims.b * self.dims.b1)
            .filter(|y| allowed.contains(&self.right(y)))
            .collect()
    }
}

/// A bare algebra on the six bidegrees of one triple with random products.
pub struct RandomTriple {
    pub algebra: BigradedAlgebra,
    pub page: PageShift,
    pub a: Bidegree,
    pub b: Bidegree,
    pub dims: Dims,
    /// Columns of μ(A,B), μ(A',B), μ(A,B').
    tables: [Vec<Vector>; 3],
}

impl RandomTriple {
    pub fn mul(&self, x: Bidegree, i: usize, y: Bidegree, j: usize) -> Vector {
        let (a1, b1) = (self.page.shift(self.a), self.page.shift(self.b));
        let d = self.dims;
        if (x, y) == (self.a, self.b) {
            self.tables[0][i * d.b + j].clone()
        } else if (x, y) == (a1, self.b) {
            self.tables[1][i * d.b + j].clone()
        } else if (x, y) == (self.a, b1) {
            self.tables[2][i * d.b1 + j].clone()
        } else {
            panic!("no product {x} x {y} in this triple")
        }
    }
}

fn hom_ok(d: &Dims, limit: usize) -> bool {
    d.a * d.a1 <= limit && d.b * d.b1 <= limit && d.ab * d.ab1 <= limit
}

/// Six pairwise distinct bidegrees whose only sums among themselves are the
/// three products of the triple.
pub fn random_triple<R: Rng>(rng: &mut R, hom_limit: usize) -> RandomTriple {
    let page = PageShift::new(rng.gen_range(2..=3)).unwrap();
    let a = Bidegree::new(3, 1);
    let b = Bidegree::new(7, 1);
    let dims = loop {
        let mut g = || rng.gen_range(0..=3usize);
        let d = Dims {
            a: g(),
            b: g(),
            a1: g(),
            b1: g(),
            ab: g(),
            ab1: g(),
        };
        if hom_ok(&d, hom_limit) {
            break d;
        }
    };
    let (a1, b1) = (page.shift(a), page.shift(b));
    let mut table = |rows: usize, cols: usize| -> Vec<Vector> {
        (0..cols).map(|_| (0..rows).map(|_| rng.gen_range(0..=1u8)).collect()).collect()
    };
    let tables = [
        table(dims.ab, dims.a * dims.b),
        table(dims.ab1, dims.a1 * dims.b),
        table(dims.ab1, dims.a * dims.b1),
    ];
    let as_matrix = |cols: &[Vector], rows: usize| {
        BitMatrix::from_columns(&cols.iter().map(|c| BitVector::from_u8s(c)).collect::<Vec<_>>(), rows)
    };
    let algebra = BigradedAlgebra::builder()
        .anonymous(a, dims.a)
        .anonymous(b, dims.b)
        .anonymous(a1, dims.a1)
        .anonymous(b1, dims.b1)
        .anonymous(a + b, dims.ab)
        .anonymous(page.shift(a + b), dims.ab1)
        .product(a, b, as_matrix(&tables[0], dims.ab))
        .product(a1, b, as_matrix(&tables[1], dims.ab1))
        .product(a, b1, as_matrix(&tables[2], dims.ab1))
        .build()
        .expect("random triple is well formed");
    RandomTriple {
        algebra,
        page,
        a,
        b,
        dims,
        tables,
    }
}

/// A random affine subspace of a `n`-dimensional space, biased towards the
/// extremes.
pub fn random_space<R: Rng>(rng: &mut R, n: usize) -> AffineSubspace {
    match rng.gen_range(0..5) {
        0 => AffineSubspace::full(n),
        1 => AffineSubspace::point(BitVector::from_bits((0..n).map(|_| rng.gen_bool(0.5)))),
        _ => {
            let offset = BitVector::from_bits((0..n).map(|_| rng.gen_bool(0.5)));
            let gens = (0..rng.gen_range(0..=n))
                .map(|_| BitVector::from_bits((0..n).map(|_| rng.gen_bool(0.5))))
                .collect();
            AffineSubspace::canonicalize(offset, gens).unwrap()
        }
    }
}

/// Compares the three engine constraints with the enumerated sets for the
/// given input spaces.
pub fn compare_constraints(
    alg: &BigradedAlgebra,
    triple: &Triple<'_>,
    da: &AffineSubspace,
    db: &AffineSubspace,
    dab: &AffineSubspace,
) -> Result<(), String> {
    let (a, b, page) = (triple.a, triple.b, triple.page);
    let (pa, pb, pab) = (points(da), points(db), points(dab));
    let s = constrain_product(alg, page, da, db, a, b).map_err(|e| e.to_string())?;
    if points_maybe(&s.subspace) != triple.product_set(&pa, &pb) {
        return Err(format!("S({a},{b}) differs: {:?} vs {:?}", s.subspace, triple.product_set(&pa, &pb)));
    }
    let t = constrain_factor(alg, page, db, dab, a, b).map_err(|e| e.to_string())?;
    if points_maybe(&t.subspace) != triple.factor_set(&pb, &pab) {
        return Err(format!("T({a},{b}) differs: {:?} vs {:?}", t.subspace, triple.factor_set(&pb, &pab)));
    }
    let ts = constrain_factor_swapped(alg, page, da, dab, a, b).map_err(|e| e.to_string())?;
    if points_maybe(&ts.subspace) != triple.factor_swapped_set(&pa, &pab) {
        return Err(format!(
            "T({b},{a}) differs: {:?} vs {:?}",
            ts.subspace,
            triple.factor_swapped_set(&pa, &pab)
        ));
    }
    Ok(())
}

/// One random hand-made triple, checked against enumeration.
pub fn triple_case(seed: u64) -> Result<(), String> {
    let mut rng = super::rng(seed);
    let t = random_triple(&mut rng, 6);
    let d = t.dims;
    let mul = |x, i, y, j| t.mul(x, i, y, j);
    let triple = Triple {
        a: t.a,
        b: t.b,
        page: t.page,
        dims: d,
        mul: &mul,
    };
    let da = random_space(&mut rng, d.a * d.a1);
    let db = random_space(&mut rng, d.b * d.b1);
    let dab = random_space(&mut rng, d.ab * d.ab1);
    compare_constraints(&t.algebra, &triple, &da, &db, &dab)
}

/// One random relevant pair of a random toy, checked against enumeration.
pub fn toy_case(seed: u64) -> Result<(), String> {
    let mut rng = super::rng(seed);
    let toy = random_toy(&mut rng, &ToyParams::default());
    let pairs = relevant_pairs(&toy.algebra, toy.page);
    let Some(&(a, b)) = pairs.choose(&mut rng) else {
        return Ok(());
    };
    let dim = |x| toy.algebra.dim(x).unwrap();
    let p = toy.page;
    let dims = Dims {
        a: dim(a),
        b: dim(b),
        a1: dim(p.shift(a)),
        b1: dim(p.shift(b)),
        ab: dim(a + b),
        ab1: dim(p.shift(a + b)),
    };
    let mul = |x, i, y, j| toy.product(x, i, y, j);
    let triple = Triple {
        a,
        b,
        page: p,
        dims,
        mul: &mul,
    };
    let da = random_space(&mut rng, dims.a * dims.a1);
    let db = random_space(&mut rng, dims.b * dims.b1);
    let dab = random_space(&mut rng, dims.ab * dims.ab1);
    compare_constraints(&toy.algebra, &triple, &da, &db, &dab)
}
