//! Classification, statistics, explanations and counterfactual comparison.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use super::{run_staged, Contradiction, DeductionEvent, DifferentialState, EventKind, Mode, PropagationError, Seed};
use crate::algebra::{Bidegree, BigradedAlgebra, HomSpace, PageShift};
use crate::gf2::BitMatrix;

/// What is known about the differential on one bidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    DeterminedZero,
    /// The unique candidate, `target_dim x source_dim`.
    DeterminedNonzero { matrix: BitMatrix },
    /// Flattened coordinates with the same value on every candidate, and the
    /// dimension of the candidate space.
    Partial { fixed: Vec<(usize, bool)>, dim: usize },
}

impl Status {
    pub fn is_determined(&self) -> bool {
        !matches!(self, Status::Partial { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BidegreeClass {
    pub source_dim: usize,
    pub target_dim: usize,
    pub status: Status,
    /// Earliest stage whose state already had the final space.
    pub stage: u32,
}

impl BidegreeClass {
    pub fn hom_dim(&self) -> usize {
        self.source_dim * self.target_dim
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub page: PageShift,
    pub entries: BTreeMap<Bidegree, BidegreeClass>,
}

pub fn classify(alg: &BigradedAlgebra, state: &DifferentialState) -> Classification {
    let page = state.page();
    let entries = state
        .spaces()
        .iter()
        .map(|(&b, d)| {
            let hom = HomSpace::differential(alg, page, b).expect("state bidegrees are loaded");
            let status = if !d.is_point() {
                Status::Partial {
                    fixed: d.fixed_coordinates(),
                    dim: d.dim(),
                }
            } else if d.offset().is_zero() {
                Status::DeterminedZero
            } else {
                Status::DeterminedNonzero {
                    matrix: hom.unflatten(d.offset()),
                }
            };
            let class = BidegreeClass {
                source_dim: hom.source_dim,
                target_dim: hom.target_dim,
                status,
                stage: state.stage_tag(b).unwrap_or(0),
            };
            (b, class)
        })
        .collect();
    Classification { page, entries }
}

/// Summary counts over bidegrees with a nonzero source group.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Stats {
    pub max_stem: Option<i32>,
    pub bidegrees: usize,
    pub determined: usize,
    pub determined_zero: usize,
    pub determined_nonzero: usize,
    pub partial: usize,
    pub percent_determined: f64,
    /// Same counts weighted by hom-space dimension.
    pub weighted_total: usize,
    pub weighted_determined: usize,
    pub percent_weighted: f64,
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

pub fn stats(classification: &Classification, max_stem: Option<i32>) -> Stats {
    let mut s = Stats {
        max_stem,
        bidegrees: 0,
        determined: 0,
        determined_zero: 0,
        determined_nonzero: 0,
        partial: 0,
        percent_determined: 0.0,
        weighted_total: 0,
        weighted_determined: 0,
        percent_weighted: 0.0,
    };
    for (b, c) in &classification.entries {
        if c.source_dim == 0 || max_stem.is_some_and(|m| b.n > m) {
            continue;
        }
        s.bidegrees += 1;
        s.weighted_total += c.hom_dim();
        match c.status {
            Status::DeterminedZero => s.determined_zero += 1,
            Status::DeterminedNonzero { .. } => s.determined_nonzero += 1,
            Status::Partial { .. } => s.partial += 1,
        }
        if c.status.is_determined() {
            s.determined += 1;
            s.weighted_determined += c.hom_dim();
        }
    }
    s.percent_determined = percent(s.determined, s.bidegrees);
    s.percent_weighted = percent(s.weighted_determined, s.weighted_total);
    s
}

impl fmt::Display for Stats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(m) = self.max_stem {
            writeln!(f, "stems <= {m}")?;
        }
        writeln!(f, "bidegrees:          {}", self.bidegrees)?;
        writeln!(f, "determined:         {} ({:.1}%)", self.determined, self.percent_determined)?;
        writeln!(f, "  zero:             {}", self.determined_zero)?;
        writeln!(f, "  nonzero:          {}", self.determined_nonzero)?;
        writeln!(f, "partial:            {}", self.partial)?;
        write!(
            f,
            "weighted by hom dim: {}/{} ({:.1}%)",
            self.weighted_determined, self.weighted_total, self.percent_weighted
        )
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExplainError {
    #[error("no differential space on {0}")]
    UnknownBidegree(Bidegree),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExplanationStep {
    /// Position of the event in the full log.
    pub index: usize,
    pub event: DeductionEvent,
}

impl fmt::Display for ExplanationStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let e = &self.event;
        match e.construction {
            EventKind::InitDegreeReasons => write!(f, "degree reasons at {}", e.affected),
            EventKind::Seed => write!(
                f,
                "seed #{} at {} [stage {}], dim {}→{}",
                e.seed.unwrap_or_default(),
                e.affected,
                e.stage,
                e.dim_before,
                e.dim_after
            ),
            kind => {
                let (a, b) = e.pair.expect("Leibniz events carry their pair");
                // The swapped form is the factor constraint read from the other side.
                let (label, (a, b)) = match kind {
                    EventKind::S => ("S", (a, b)),
                    EventKind::T => ("T", (a, b)),
                    _ => ("T", (b, a)),
                };
                write!(
                    f,
                    "via relation pair ({a},{b}) [{label}] on {}, dim {}→{} (stage {}, pass {})",
                    e.affected, e.dim_before, e.dim_after, e.stage, e.pass
                )
            }
        }
    }
}

/// The events that contributed to the final space of one bidegree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Explanation {
    pub target: Bidegree,
    pub steps: Vec<ExplanationStep>,
}

impl fmt::Display for Explanation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.steps.is_empty() {
            return write!(f, "{}: no deduction", self.target);
        }
        writeln!(f, "{}:", self.target)?;
        for (k, step) in self.steps.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            write!(f, "  {}. {step}", k + 1)?;
        }
        Ok(())
    }
}

/// Bidegrees whose spaces were read to produce the event.
fn event_inputs(e: &DeductionEvent) -> Vec<Bidegree> {
    let Some((a, b)) = e.pair else {
        return Vec::new();
    };
    match e.construction {
        EventKind::S => vec![a, b],
        EventKind::T => vec![b, a + b],
        EventKind::TSwapped => vec![a, a + b],
        _ => Vec::new(),
    }
}

/// Backward closure of the event log from `target`: every event on `target`,
/// and recursively every earlier event on a space read by an included event.
pub fn explain(
    events: &[DeductionEvent],
    classification: &Classification,
    target: Bidegree,
) -> Result<Explanation, ExplainError> {
    if !classification.entries.contains_key(&target) {
        return Err(ExplainError::UnknownBidegree(target));
    }
    let mut by_bidegree: BTreeMap<Bidegree, Vec<usize>> = BTreeMap::new();
    for (i, e) in events.iter().enumerate() {
        by_bidegree.entry(e.affected).or_default().push(i);
    }
    // For each bidegree, the bound below which its events are already included.
    let mut covered: BTreeMap<Bidegree, usize> = BTreeMap::new();
    let mut included = BTreeSet::new();
    let mut work = vec![(target, events.len())];
    while let Some((b, bound)) = work.pop() {
        let done = covered.get(&b).copied().unwrap_or(0);
        if bound <= done {
            continue;
        }
        covered.insert(b, bound);
        for &i in by_bidegree.get(&b).into_iter().flatten() {
            if i >= bound {
                break;
            }
            if i < done || !included.insert(i) {
                continue;
            }
            for input in event_inputs(&events[i]) {
                work.push((input, i));
            }
        }
    }
    let steps = included
        .into_iter()
        .map(|index| ExplanationStep {
            index,
            event: events[index].clone(),
        })
        .collect();
    Ok(Explanation { target, steps })
}

/// Classification change between two runs.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Difference {
    pub bidegree: Bidegree,
    pub left: Status,
    pub right: Status,
}

/// Two runs on the same chart with alternative seeds.
#[derive(Clone, Debug)]
pub struct Comparison {
    pub left: Result<Classification, Box<Contradiction>>,
    pub right: Result<Classification, Box<Contradiction>>,
    /// Bidegrees whose status differs, when both runs are consistent.
    pub differences: Vec<Difference>,
}

pub fn compare(
    alg: &BigradedAlgebra,
    page: PageShift,
    left: &[Seed],
    right: &[Seed],
    mode: Mode,
) -> Result<Comparison, PropagationError> {
    let outcome = |seeds: &[Seed]| match run_staged(alg, page, seeds, mode) {
        Ok(run) => Ok(Ok(run.classification)),
        Err(PropagationError::Contradiction(c)) => Ok(Err(c)),
        Err(e) => Err(e),
    };
    let (left, right) = (outcome(left)?, outcome(right)?);
    let mut differences = Vec::new();
    if let (Ok(l), Ok(r)) = (&left, &right) {
        for (b, lc) in &l.entries {
            let rc = &r.entries[b];
            if lc.status != rc.status {
                differences.push(Difference {
                    bidegree: *b,
                    left: lc.status.clone(),
                    right: rc.status.clone(),
                });
            }
        }
    }
    Ok(Comparison {
        left,
        right,
        differences,
    })
}
