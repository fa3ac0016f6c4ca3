//! Exhaustive set semantics for affine subspaces of small ambient spaces.
//!
//! Points are packed into `u64` masks, bit `i` = coordinate `i`, and every
//! check compares the engine's answer with a set computed by enumeration.

use std::collections::BTreeSet;

use adams_leibniz::{AffineSubspace, BitMatrix, BitVector, MaybeEmptyAffine};
use rand::Rng;

pub type Set = BTreeSet<u64>;

pub fn pack(v: &BitVector) -> u64 {
    v.ones().fold(0, |acc, i| acc | 1 << i)
}

pub fn unpack(x: u64, len: usize) -> BitVector {
    BitVector::from_bits((0..len).map(|i| x >> i & 1 == 1))
}

/// `offset + span(gens)` by enumerating all coefficient choices.
pub fn span_set(offset: u64, gens: &[u64]) -> Set {
    let mut out = Set::new();
    for mask in 0u64..1 << gens.len() {
        let mut x = offset;
        for (k, g) in gens.iter().enumerate() {
            if mask >> k & 1 == 1 {
                x ^= g;
            }
        }
        out.insert(x);
    }
    out
}

pub fn set_of(d: &AffineSubspace) -> Set {
    let gens: Vec<u64> = d.basis().iter().map(pack).collect();
    span_set(pack(d.offset()), &gens)
}

pub fn set_of_maybe(d: &MaybeEmptyAffine) -> Set {
    d.as_subspace().map(set_of).unwrap_or_default()
}

/// Smallest set containing `points` closed under `x + y + z`, grown one
/// point at a time: adding `x` to an affine set `S` through `p` gives
/// `S ∪ (S + x + p)`.
pub fn affine_closure(points: &Set) -> Set {
    let mut iter = points.iter().copied();
    let Some(p) = iter.next() else {
        return Set::new();
    };
    let mut s = Set::from([p]);
    for x in iter {
        if !s.contains(&x) {
            let shifted: Vec<u64> = s.iter().map(|y| y ^ x ^ p).collect();
            s.extend(shifted);
        }
    }
    s
}

/// Closure test by the defining property, for small sets.
pub fn is_affine(s: &Set) -> bool {
    s.iter().all(|x| s.iter().all(|y| s.iter().all(|z| s.contains(&(x ^ y ^ z)))))
}

/// Matrix given as row masks over the columns.
pub fn apply(rows: &[u64], x: u64) -> u64 {
    rows.iter()
        .enumerate()
        .fold(0, |acc, (i, r)| acc | (((r & x).count_ones() as u64) & 1) << i)
}

pub fn matrix(rows: &[u64], cols: usize) -> BitMatrix {
    BitMatrix::from_rows(rows.iter().map(|&r| unpack(r, cols)).collect(), cols)
}

pub fn tensor_point(x: u64, y: u64, n2: usize) -> u64 {
    let mut out = 0;
    for i in 0..64 {
        if x >> i & 1 == 1 {
            out |= y << (i * n2);
        }
    }
    out
}

fn mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1 << n) - 1
    }
}

/// A raw description `offset + span(gens)` of an affine subspace.
#[derive(Clone, Debug)]
pub struct Raw {
    pub ambient: usize,
    pub offset: u64,
    pub gens: Vec<u64>,
}

impl Raw {
    pub fn engine(&self) -> AffineSubspace {
        AffineSubspace::canonicalize(
            unpack(self.offset, self.ambient),
            self.gens.iter().map(|&g| unpack(g, self.ambient)).collect(),
        )
        .expect("equal lengths")
    }

    pub fn set(&self) -> Set {
        span_set(self.offset, &self.gens)
    }
}

pub fn random_raw<R: Rng>(rng: &mut R, ambient: usize) -> Raw {
    let count = rng.gen_range(0..=ambient + 1);
    Raw {
        ambient,
        offset: rng.gen::<u64>() & mask(ambient),
        // Sparse generators often repeat or depend on each other.
        gens: (0..count)
            .map(|_| rng.gen::<u64>() & rng.gen::<u64>() & mask(ambient))
            .collect(),
    }
}

pub fn random_rows<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Vec<u64> {
    let rank_limited = rng.gen_bool(0.3);
    let base: Vec<u64> = (0..rows).map(|_| rng.gen::<u64>() & mask(cols)).collect();
    if !rank_limited || rows < 2 {
        return base;
    }
    // Repeat rows to force a nontrivial kernel of the transpose.
    (0..rows).map(|i| base[i % 2]).collect()
}

fn expect(label: &str, ok: bool, detail: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(format!("{label}: {}", detail()))
    }
}

pub fn check_canonicalize(raw: &Raw, shuffle: u64) -> Result<(), String> {
    let d = raw.engine();
    expect("canonicalize set", set_of(&d) == raw.set(), || format!("{raw:?} -> {d:?}"))?;
    expect("canonicalize dim", 1usize << d.dim() == raw.set().len(), || format!("{d:?}"))?;
    // Another description of the same set: a different offset from the set,
    // generators mixed with each other.
    let points: Vec<u64> = raw.set().into_iter().collect();
    let other_offset = points[(shuffle as usize) % points.len()];
    let mut gens = raw.gens.clone();
    gens.reverse();
    if gens.len() >= 2 {
        gens[0] ^= gens[1];
    }
    let again = Raw {
        ambient: raw.ambient,
        offset: other_offset,
        gens,
    }
    .engine();
    expect("canonical uniqueness", again == d, || format!("{again:?} != {d:?}"))
}

pub fn check_contains(raw: &Raw, x: u64) -> Result<(), String> {
    let d = raw.engine();
    let got = d.contains(&unpack(x, raw.ambient)).map_err(|e| e.to_string())?;
    expect("contains", got == raw.set().contains(&x), || format!("{raw:?} ∋ {x:b}: {got}"))?;
    expect("contains offset", d.contains(d.offset()) == Ok(true), || format!("{d:?}"))
}

pub fn check_intersect(a: &Raw, b: &Raw) -> Result<(), String> {
    let got = a.engine().intersect(&b.engine()).map_err(|e| e.to_string())?;
    let want: Set = a.set().intersection(&b.set()).copied().collect();
    expect("intersect", set_of_maybe(&got) == want, || format!("{a:?} ∩ {b:?} -> {got:?}"))?;
    expect("intersect emptiness", got.is_empty() == want.is_empty(), || format!("{got:?}"))
}

pub fn check_affine_span(ambient: usize, points: &[u64]) -> Result<(), String> {
    let vs: Vec<BitVector> = points.iter().map(|&p| unpack(p, ambient)).collect();
    let got = AffineSubspace::affine_span(&vs).map_err(|e| e.to_string())?;
    let want = affine_closure(&points.iter().copied().collect());
    expect("affine_span", set_of(&got) == want, || format!("{points:?} -> {got:?}"))
}

pub fn check_direct_sum(a: &Raw, b: &Raw) -> Result<(), String> {
    let got = a.engine().direct_sum(&b.engine());
    let mut want = Set::new();
    for x in a.set() {
        for y in b.set() {
            want.insert(x | y << a.ambient);
        }
    }
    expect("direct_sum", set_of(&got) == want, || format!("{a:?} ⊕ {b:?} -> {got:?}"))?;
    expect("direct_sum ambient", got.ambient_dim() == a.ambient + b.ambient, String::new)
}

pub fn check_tensor(a: &Raw, b: &Raw) -> Result<(), String> {
    let got = a.engine().tensor(&b.engine());
    let mut products = Set::new();
    for x in a.set() {
        for y in b.set() {
            products.insert(tensor_point(x, y, b.ambient));
        }
    }
    let want = affine_closure(&products);
    expect("tensor", set_of(&got) == want, || format!("{a:?} ⊗ {b:?} -> {got:?}"))?;
    expect("tensor ambient", got.ambient_dim() == a.ambient * b.ambient, String::new)
}

pub fn check_map_image(rows: &[u64], d: &Raw) -> Result<(), String> {
    let f = matrix(rows, d.ambient);
    let got = d.engine().map_image(&f).map_err(|e| e.to_string())?;
    let want: Set = d.set().into_iter().map(|x| apply(rows, x)).collect();
    expect("map_image", set_of(&got) == want, || format!("{rows:?} {d:?} -> {got:?}"))
}

pub fn check_map_preimage(rows: &[u64], cols: usize, d: &Raw) -> Result<(), String> {
    let f = matrix(rows, cols);
    let got = d.engine().map_preimage(&f).map_err(|e| e.to_string())?;
    let target = d.set();
    let want: Set = (0u64..1 << cols).filter(|&x| target.contains(&apply(rows, x))).collect();
    expect("map_preimage", set_of_maybe(&got) == want, || format!("{rows:?} {d:?} -> {got:?}"))?;
    expect("map_preimage emptiness", got.is_empty() == want.is_empty(), String::new)
}

pub fn check_minkowski(a: &Raw, b: &Raw) -> Result<(), String> {
    let got = a.engine().minkowski_sum(&b.engine()).map_err(|e| e.to_string())?;
    let mut want = Set::new();
    for x in a.set() {
        for y in b.set() {
            want.insert(x ^ y);
        }
    }
    expect("minkowski_sum", set_of(&got) == want, || format!("{a:?} + {b:?} -> {got:?}"))
}

pub fn check_fixed_coordinates(d: &Raw) -> Result<(), String> {
    let got = d.engine().fixed_coordinates();
    let set = d.set();
    let first = *set.iter().next().expect("nonempty");
    let want: Vec<(usize, bool)> = (0..d.ambient)
        .filter(|&i| set.iter().all(|x| (x >> i & 1) == (first >> i & 1)))
        .map(|i| (i, first >> i & 1 == 1))
        .collect();
    expect("fixed_coordinates", got == want, || format!("{d:?} -> {got:?}"))
}

/// The nine operations plus fixed coordinates, each with a case generator.
pub const OPERATIONS: [&str; 10] = [
    "canonicalize",
    "contains",
    "intersect",
    "affine_span",
    "direct_sum",
    "tensor",
    "map_image",
    "map_preimage",
    "minkowski_sum",
    "fixed_coordinates",
];

/// Runs one random case of the named operation with ambient dims up to 6.
pub fn random_case<R: Rng>(rng: &mut R, op: &str) -> Result<(), String> {
    let n = rng.gen_range(0..=6);
    match op {
        "canonicalize" => check_canonicalize(&random_raw(rng, n), rng.gen()),
        "contains" => {
            let raw = random_raw(rng, n);
            let x = if rng.gen_bool(0.5) {
                *raw.set().iter().next().unwrap() ^ (rng.gen::<u64>() & mask(n) & rng.gen::<u64>())
            } else {
                rng.gen::<u64>() & mask(n)
            };
            check_contains(&raw, x)
        }
        "intersect" => check_intersect(&random_raw(rng, n), &random_raw(rng, n)),
        "affine_span" => {
            let k = rng.gen_range(1..=5);
            let pts: Vec<u64> = (0..k).map(|_| rng.gen::<u64>() & mask(n)).collect();
            check_affine_span(n, &pts)
        }
        "direct_sum" => {
            let m = rng.gen_range(0..=6);
            check_direct_sum(&random_raw(rng, n), &random_raw(rng, m))
        }
        "tensor" => {
            let (n1, n2) = (rng.gen_range(0..=6), rng.gen_range(0..=2));
            let (n1, n2) = if rng.gen_bool(0.5) { (n1, n2) } else { (n2, n1) };
            check_tensor(&random_raw(rng, n1), &random_raw(rng, n2))
        }
        "map_image" => {
            let m = rng.gen_range(0..=6);
            let rows = random_rows(rng, m, n);
            check_map_image(&rows, &random_raw(rng, n))
        }
        "map_preimage" => {
            let m = rng.gen_range(0..=6);
            let rows = random_rows(rng, m, n);
            check_map_preimage(&rows, n, &random_raw(rng, m))
        }
        "minkowski_sum" => check_minkowski(&random_raw(rng, n), &random_raw(rng, n)),
        "fixed_coordinates" => check_fixed_coordinates(&random_raw(rng, n)),
        other => Err(format!("unknown operation {other}")),
    }
}
