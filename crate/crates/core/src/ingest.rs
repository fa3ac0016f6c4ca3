//! Chart and seed files.
//!
//! Both are JSON with a `format_version` field; see the README for the
//! schemas. Loading validates everything and runs the algebra audits, so a
//! loaded chart is safe to propagate on.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{AlgebraError, Bidegree, BigradedAlgebra, PageShift};
use crate::gf2::{BitMatrix, BitVector};
use crate::propagate::Seed;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported format_version {0}, expected {FORMAT_VERSION}")]
    Version(u32),
    #[error("{0}")]
    Validation(String),
    #[error("{context}: {source}")]
    Algebra {
        context: String,
        #[source]
        source: AlgebraError,
    },
}

fn invalid(message: impl Into<String>) -> IngestError {
    IngestError::Validation(message.into())
}

/// Inclusive stem and filtration bounds. Every bidegree inside that is not
/// declared is loaded as zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionBounds {
    pub stems: [i32; 2],
    pub filtrations: [i32; 2],
}

impl RegionBounds {
    fn contains(&self, b: Bidegree) -> bool {
        (self.stems[0]..=self.stems[1]).contains(&b.n) && (self.filtrations[0]..=self.filtrations[1]).contains(&b.s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BidegreeRecord {
    pub n: i32,
    pub s: i32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

/// `e_i * f_j = value` for basis elements `e_i` of `a` and `f_j` of `b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductEntry {
    pub i: usize,
    pub j: usize,
    pub value: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductRecord {
    pub a: [i32; 2],
    pub b: [i32; 2],
    /// Absent entries are zero.
    #[serde(default)]
    pub entries: Vec<ProductEntry>,
}

fn default_page() -> u32 {
    2
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartDocument {
    pub format_version: u32,
    #[serde(default = "default_page")]
    pub page: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub region: Option<RegionBounds>,
    pub bidegrees: Vec<BidegreeRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    #[serde(default)]
    pub products: Vec<ProductRecord>,
}

/// A loaded chart: the algebra and the page its file asks for.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chart {
    pub algebra: BigradedAlgebra,
    pub page: PageShift,
}

fn read(path: &Path) -> Result<String, IngestError> {
    fs::read_to_string(path).map_err(|e| IngestError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn parse<T: DeserializeOwned>(text: &str, origin: &str) -> Result<T, IngestError> {
    serde_json::from_str(text).map_err(|e| IngestError::Parse {
        path: origin.to_string(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn bits(v: &[u8], what: impl Fn() -> String) -> Result<BitVector, IngestError> {
    if let Some(bad) = v.iter().find(|&&x| x > 1) {
        return Err(invalid(format!("{}: entry {bad} is not 0 or 1", what())));
    }
    Ok(BitVector::from_u8s(v))
}

pub fn load_chart(path: impl AsRef<Path>) -> Result<Chart, IngestError> {
    let path = path.as_ref();
    parse_chart(&read(path)?, &path.display().to_string())
}

pub fn parse_chart(text: &str, origin: &str) -> Result<Chart, IngestError> {
    let doc: ChartDocument = parse(text, origin)?;
    chart_from_document(&doc)
}

pub fn chart_from_document(doc: &ChartDocument) -> Result<Chart, IngestError> {
    if doc.format_version != FORMAT_VERSION {
        return Err(IngestError::Version(doc.format_version));
    }
    let page = PageShift::new(doc.page).map_err(|source| IngestError::Algebra {
        context: "page".into(),
        source,
    })?;

    let mut names: BTreeMap<Bidegree, Vec<String>> = BTreeMap::new();
    for rec in &doc.bidegrees {
        let b = Bidegree::new(rec.n, rec.s);
        let ns = match (&rec.names, rec.dim) {
            (Some(ns), Some(d)) if ns.len() != d => {
                return Err(invalid(format!(
                    "bidegree {b}: dim {d} but {} names given",
                    ns.len()
                )))
            }
            (Some(ns), _) => ns.clone(),
            (None, Some(d)) => (0..d).map(|i| format!("x_{}_{}_{i}", b.n, b.s)).collect(),
            (None, None) => return Err(invalid(format!("bidegree {b}: needs dim or names"))),
        };
        if let Some(region) = &doc.region {
            if !region.contains(b) {
                return Err(invalid(format!("bidegree {b} lies outside the declared region")));
            }
        }
        if names.insert(b, ns).is_some() {
            return Err(invalid(format!("bidegree {b} declared twice")));
        }
    }
    if let Some(region) = &doc.region {
        for n in region.stems[0]..=region.stems[1] {
            for s in region.filtrations[0]..=region.filtrations[1] {
                names.entry(Bidegree::new(n, s)).or_default();
            }
        }
    }

    let mut builder = BigradedAlgebra::builder();
    for (&b, ns) in &names {
        builder = builder.bidegree(b, ns.clone());
    }

    let mut seen = BTreeSet::new();
    for rec in &doc.products {
        let (a, b) = (Bidegree::new(rec.a[0], rec.a[1]), Bidegree::new(rec.b[0], rec.b[1]));
        let what = || format!("product {a} x {b}");
        if !seen.insert((a.min(b), a.max(b))) {
            return Err(invalid(format!("{}: given twice", what())));
        }
        let dim = |x: Bidegree| {
            names
                .get(&x)
                .map(Vec::len)
                .ok_or_else(|| invalid(format!("{}: bidegree {x} is not declared", what())))
        };
        let (da, db, dc) = (dim(a)?, dim(b)?, dim(a + b)?);
        let mut m = BitMatrix::zeros(dc, da * db);
        let mut filled = BTreeSet::new();
        for e in &rec.entries {
            if e.i >= da || e.j >= db {
                return Err(invalid(format!(
                    "{}: index ({}, {}) out of range for dims {da} x {db}",
                    what(),
                    e.i,
                    e.j
                )));
            }
            if e.value.len() != dc {
                return Err(invalid(format!(
                    "{}: value for ({}, {}) has length {}, expected dim {} = {dc}",
                    what(),
                    e.i,
                    e.j,
                    e.value.len(),
                    a + b
                )));
            }
            if !filled.insert((e.i, e.j)) {
                return Err(invalid(format!("{}: entry ({}, {}) given twice", what(), e.i, e.j)));
            }
            let value = bits(&e.value, what)?;
            for k in value.ones() {
                m.set(k, e.i * db + e.j, true);
            }
        }
        builder = builder.product(a, b, m);
    }

    if let Some(u) = &doc.unit {
        let index = names
            .get(&Bidegree::new(0, 0))
            .and_then(|ns| ns.iter().position(|n| n == u))
            .ok_or_else(|| invalid(format!("unit {u:?} is not a basis element of (0,0)")))?;
        builder = builder.unit(index);
    }

    let algebra = builder.build().map_err(|source| IngestError::Algebra {
        context: "chart".into(),
        source,
    })?;
    algebra.audit().map_err(|source| IngestError::Algebra {
        context: "audit".into(),
        source,
    })?;
    Ok(Chart { algebra, page })
}

/// The canonical document for a chart: bidegrees sorted and named, one
/// product record per stored pair with `a <= b`, nonzero entries only.
pub fn chart_document(chart: &Chart) -> ChartDocument {
    let alg = &chart.algebra;
    let bidegrees = alg
        .bidegrees()
        .map(|b| BidegreeRecord {
            n: b.n,
            s: b.s,
            dim: Some(alg.dim(b).unwrap_or(0)),
            names: Some(alg.names(b).unwrap_or_default().to_vec()),
        })
        .collect();
    let products = alg
        .stored_products()
        .iter()
        .map(|(&(a, b), m)| {
            let db = alg.dim(b).unwrap_or(0);
            let entries = (0..m.cols())
                .filter_map(|c| {
                    let col = m.column(c);
                    (!col.is_zero()).then(|| ProductEntry {
                        i: c / db,
                        j: c % db,
                        value: col.to_u8s(),
                    })
                })
                .collect();
            ProductRecord {
                a: [a.n, a.s],
                b: [b.n, b.s],
                entries,
            }
        })
        .collect();
    let unit = alg.unit().and_then(|u| {
        alg.names(Bidegree::new(0, 0))
            .and_then(|ns| ns.get(u))
            .cloned()
    });
    ChartDocument {
        format_version: FORMAT_VERSION,
        page: chart.page.r(),
        region: None,
        bidegrees,
        unit,
        products,
    }
}

pub fn serialize_chart(chart: &Chart) -> String {
    serde_json::to_string_pretty(&chart_document(chart)).expect("chart documents serialize")
}

/// An element given by name expression or raw coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ElementSpec {
    Expression(String),
    Vector(Vec<u8>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedRecord {
    pub stage: u32,
    /// Required when `element` is a raw vector.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bidegree: Option<[i32; 2]>,
    pub element: ElementSpec,
    pub value: ElementSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedDocument {
    pub format_version: u32,
    #[serde(default)]
    pub seeds: Vec<SeedRecord>,
}

/// Evaluates `"h0 h3^2 + x"`-style expressions. `None` for the literal `0`.
pub fn evaluate(alg: &BigradedAlgebra, expr: &str) -> Result<Option<(Bidegree, BitVector)>, IngestError> {
    let expr = expr.trim();
    if expr == "0" {
        return Ok(None);
    }
    let mut total: Option<(Bidegree, BitVector)> = None;
    for term in expr.split('+') {
        let (b, v) = evaluate_monomial(alg, term.trim())?;
        total = Some(match total {
            None => (b, v),
            Some((tb, tv)) if tb == b => (b, tv.add(&v)),
            Some((tb, _)) => {
                return Err(invalid(format!(
                    "expression {expr:?}: term {term:?} lies in {b}, earlier terms in {tb}"
                )))
            }
        });
    }
    Ok(total)
}

fn named(alg: &BigradedAlgebra, name: &str) -> Option<(Bidegree, BitVector)> {
    let (b, i) = alg.lookup(name)?;
    Some((b, BitVector::unit(alg.dim(b).unwrap_or(0), i)))
}

fn evaluate_monomial(alg: &BigradedAlgebra, term: &str) -> Result<(Bidegree, BitVector), IngestError> {
    if term.is_empty() {
        return Err(invalid("empty term in expression"));
    }
    if let Some(x) = named(alg, term) {
        return Ok(x);
    }
    let mut factors = Vec::new();
    for token in term.split_whitespace() {
        if let Some(x) = named(alg, token) {
            factors.push(x);
            continue;
        }
        let (name, power) = token
            .split_once('^')
            .and_then(|(n, k)| Some((n, k.parse::<u32>().ok()?)))
            .ok_or_else(|| invalid(format!("unknown element {token:?}")))?;
        let x = named(alg, name).ok_or_else(|| invalid(format!("unknown element {name:?}")))?;
        if power == 0 {
            return Err(invalid(format!("zero power in {token:?}")));
        }
        factors.extend(std::iter::repeat_n(x, power as usize));
    }
    let mut iter = factors.into_iter();
    let (mut b, mut v) = iter.next().expect("nonempty term has a token");
    for (fb, fv) in iter {
        v = alg.multiply(b, &v, fb, &fv).map_err(|e| invalid(format!("cannot evaluate {term:?}: {e}")))?;
        b = b + fb;
    }
    Ok((b, v))
}

pub fn load_seeds(path: impl AsRef<Path>, alg: &BigradedAlgebra, page: PageShift) -> Result<Vec<Seed>, IngestError> {
    let path = path.as_ref();
    parse_seeds(&read(path)?, &path.display().to_string(), alg, page)
}

/// An empty (or whitespace-only) text is an empty seed list.
pub fn parse_seeds(text: &str, origin: &str, alg: &BigradedAlgebra, page: PageShift) -> Result<Vec<Seed>, IngestError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let doc: SeedDocument = parse(text, origin)?;
    seeds_from_document(&doc, alg, page)
}

pub fn seeds_from_document(doc: &SeedDocument, alg: &BigradedAlgebra, page: PageShift) -> Result<Vec<Seed>, IngestError> {
    if doc.format_version != FORMAT_VERSION {
        return Err(IngestError::Version(doc.format_version));
    }
    doc.seeds
        .iter()
        .enumerate()
        .map(|(k, rec)| resolve_seed(rec, alg, page).map_err(|e| invalid(format!("seed #{k}: {e}"))))
        .collect()
}

fn resolve_seed(rec: &SeedRecord, alg: &BigradedAlgebra, page: PageShift) -> Result<Seed, IngestError> {
    if rec.stage == 0 {
        return Err(invalid("stage must be at least 1"));
    }
    let declared = rec.bidegree.map(|[n, s]| Bidegree::new(n, s));
    let (bidegree, element) = match &rec.element {
        ElementSpec::Expression(e) => {
            let (b, v) = evaluate(alg, e)?.ok_or_else(|| invalid("element is zero"))?;
            if declared.is_some_and(|d| d != b) {
                return Err(invalid(format!("element {e:?} lies in {b}, not {}", declared.unwrap())));
            }
            (b, v)
        }
        ElementSpec::Vector(v) => {
            let b = declared.ok_or_else(|| invalid("a raw element vector needs a bidegree"))?;
            (b, bits(v, || "element".into())?)
        }
    };
    let dim = |b: Bidegree| alg.dim(b).ok_or_else(|| invalid(format!("bidegree {b} is not loaded")));
    if element.len() != dim(bidegree)? {
        return Err(invalid(format!("element has length {}, dim {bidegree} is {}", element.len(), dim(bidegree)?)));
    }
    let target = page.shift(bidegree);
    let target_dim = dim(target)?;
    let value = match &rec.value {
        ElementSpec::Expression(e) => match evaluate(alg, e)? {
            None => BitVector::zeros(target_dim),
            Some((b, v)) if b == target => v,
            Some((b, _)) => return Err(invalid(format!("value {e:?} lies in {b}, but d({bidegree}) lands in {target}"))),
        },
        ElementSpec::Vector(v) => {
            if v.len() != target_dim {
                return Err(invalid(format!("value has length {}, dim {target} is {target_dim}", v.len())));
            }
            bits(v, || "value".into())?
        }
    };
    Ok(Seed {
        bidegree,
        element,
        value,
        stage: rec.stage,
        label: rec.label.clone(),
    })
}

/// The small Adams chart shipped with the crate: the h0-tower through
/// filtration 5 and h1 in stems -1..1.
pub const MINI_CHART: &str = include_str!("../fixtures/mini_chart.json");

pub fn mini_chart() -> Chart {
    parse_chart(MINI_CHART, "mini_chart.json").expect("bundled chart is valid")
}
