//! Fixpoint propagation of Leibniz constraints.
//!
//! Each bidegree `A` whose differential target `A'` is loaded carries an
//! affine subspace `D^A` of `Hom(E^A, E^{A'})` that is known to contain the
//! true differential. Starting from the full hom-spaces, every loaded triple
//! `(A, B, A + B)` with `A <= B` is visited in lexicographic order and the
//! three spaces are intersected with the constraints of [`crate::leibniz`].
//! Sweeps repeat until one makes no change.

mod report;

use std::collections::BTreeMap;

use log::{debug, info};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::affine::{AffineSubspace, MaybeEmptyAffine};
use crate::algebra::{differential_domain, Bidegree, BigradedAlgebra, HomSpace, PageShift};
use crate::gf2::{BitMatrix, BitVector};
use crate::leibniz::{
    constrain_factor, constrain_factor_swapped, constrain_product, triple_loaded, ConstraintResult,
    ConstructionKind, LeibnizError,
};

pub use report::{
    classify, compare, explain, stats, BidegreeClass, Classification, Comparison, Difference,
    ExplainError, Explanation, ExplanationStep, Stats, Status,
};

/// What produced a [`DeductionEvent`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EventKind {
    /// The hom-space is zero-dimensional from the start.
    InitDegreeReasons,
    Seed,
    S,
    T,
    TSwapped,
}

impl From<ConstructionKind> for EventKind {
    fn from(c: ConstructionKind) -> Self {
        match c {
            ConstructionKind::S => EventKind::S,
            ConstructionKind::T => EventKind::T,
            ConstructionKind::TSwapped => EventKind::TSwapped,
        }
    }
}

/// One step that narrowed (or, for degree reasons, fixed) a space `D^A`.
///
/// Apart from `InitDegreeReasons` leaves, `dim_after < dim_before`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeductionEvent {
    pub construction: EventKind,
    /// The pair `(A, B)` being visited, `A <= B`, for Leibniz events.
    pub pair: Option<(Bidegree, Bidegree)>,
    pub affected: Bidegree,
    pub dim_before: usize,
    pub dim_after: usize,
    /// Outer-loop iteration within the stage, starting at 1; 0 for events
    /// outside the loop (initialization and seeds).
    pub pass: usize,
    pub stage: u32,
    /// Index into the seed list for seed events.
    pub seed: Option<usize>,
}

/// A known differential value `d(element) = value` injected before a stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Seed {
    pub bidegree: Bidegree,
    pub element: BitVector,
    pub value: BitVector,
    pub stage: u32,
    pub label: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Visit pairs one at a time, applying each constraint immediately.
    #[default]
    Sequential,
    /// Compute all constraints of a pass against a snapshot in parallel, then
    /// apply them in pair order.
    ParallelPass,
}

/// The current affine spaces of possible differentials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DifferentialState {
    page: PageShift,
    spaces: BTreeMap<Bidegree, AffineSubspace>,
    stage_tags: BTreeMap<Bidegree, u32>,
    stage: u32,
}

impl DifferentialState {
    pub fn page(&self) -> PageShift {
        self.page
    }

    pub fn get(&self, b: Bidegree) -> Option<&AffineSubspace> {
        self.spaces.get(&b)
    }

    pub fn spaces(&self) -> &BTreeMap<Bidegree, AffineSubspace> {
        &self.spaces
    }

    /// Stage at which the current space of `b` was reached.
    pub fn stage_tag(&self, b: Bidegree) -> Option<u32> {
        self.stage_tags.get(&b).copied()
    }

    pub fn current_stage(&self) -> u32 {
        self.stage
    }

    pub fn set_stage(&mut self, stage: u32) {
        self.stage = stage;
    }

    /// Sum of the dimensions of all spaces.
    pub fn total_dim(&self) -> usize {
        self.spaces.values().map(AffineSubspace::dim).sum()
    }

    fn replace(&mut self, b: Bidegree, d: AffineSubspace) {
        self.spaces.insert(b, d);
        self.stage_tags.insert(b, self.stage);
    }
}

/// Where a contradiction was found.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ContradictionCause {
    Leibniz {
        pair: (Bidegree, Bidegree),
        construction: EventKind,
        affected: Bidegree,
    },
    Seed {
        seed: usize,
        bidegree: Bidegree,
        label: Option<String>,
    },
}

/// An empty intersection: the chart data and seeds admit no derivation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Contradiction {
    pub cause: ContradictionCause,
    pub stage: u32,
    pub pass: usize,
    /// Every event up to the failure, in order.
    pub events: Vec<DeductionEvent>,
}

impl std::fmt::Display for Contradiction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.cause {
            ContradictionCause::Leibniz {
                pair,
                construction,
                affected,
            } => write!(
                f,
                "contradiction at stage {} pass {}: {:?} constraint from pair ({}, {}) misses every candidate for d on {} (triple {}, {}, {})",
                self.stage, self.pass, construction, pair.0, pair.1, affected, pair.0, pair.1, pair.0 + pair.1
            ),
            ContradictionCause::Seed { seed, bidegree, label } => write!(
                f,
                "contradiction at stage {}: seed #{} on {}{} is incompatible with the current space",
                self.stage,
                seed,
                bidegree,
                label.as_ref().map(|l| format!(" ({l})")).unwrap_or_default()
            ),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SeedError {
    #[error("seed #{index}: no differential space on {bidegree} (bidegree or its target not loaded)")]
    NoSpace { index: usize, bidegree: Bidegree },
    #[error("seed #{index}: element has length {found}, expected {expected}")]
    ElementLength { index: usize, expected: usize, found: usize },
    #[error("seed #{index}: value has length {found}, expected {expected}")]
    ValueLength { index: usize, expected: usize, found: usize },
    #[error("seed #{index}: element is zero")]
    ZeroElement { index: usize },
    #[error("seed #{index}: stage must be at least 1")]
    Stage { index: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PropagationError {
    #[error("{0}")]
    Contradiction(Box<Contradiction>),
    #[error(transparent)]
    Seed(#[from] SeedError),
    #[error("internal constraint error: {0}")]
    Leibniz(#[from] LeibnizError),
}

impl PropagationError {
    pub fn contradiction(&self) -> Option<&Contradiction> {
        match self {
            PropagationError::Contradiction(c) => Some(c),
            _ => None,
        }
    }
}

/// Full hom-space for every bidegree with a loaded target. Zero-dimensional
/// hom-spaces are logged as degree-reason leaves.
pub fn initialize(alg: &BigradedAlgebra, page: PageShift) -> (DifferentialState, Vec<DeductionEvent>) {
    let mut spaces = BTreeMap::new();
    let mut stage_tags = BTreeMap::new();
    let mut events = Vec::new();
    for a in differential_domain(alg, page) {
        let hom = HomSpace::differential(alg, page, a).expect("domain bidegrees are loaded");
        if hom.dim() == 0 {
            events.push(DeductionEvent {
                construction: EventKind::InitDegreeReasons,
                pair: None,
                affected: a,
                dim_before: 0,
                dim_after: 0,
                pass: 0,
                stage: 0,
                seed: None,
            });
        }
        spaces.insert(a, AffineSubspace::full(hom.dim()));
        stage_tags.insert(a, 0);
    }
    let state = DifferentialState {
        page,
        spaces,
        stage_tags,
        stage: 0,
    };
    (state, events)
}

/// `{M : M · element = value}` inside the flattened hom-space.
fn evaluation_constraint(hom: &HomSpace, element: &BitVector, value: &BitVector) -> MaybeEmptyAffine {
    let (src, tgt) = (hom.source_dim, hom.target_dim);
    let mut eval = BitMatrix::zeros(tgt, tgt * src);
    for i in 0..tgt {
        for j in element.ones() {
            eval.set(i, i * src + j, true);
        }
    }
    AffineSubspace::point(value.clone())
        .map_preimage(&eval)
        .expect("evaluation matrix has the value's length")
}

fn check_seed(alg: &BigradedAlgebra, state: &DifferentialState, seed: &Seed, index: usize) -> Result<HomSpace, SeedError> {
    if state.get(seed.bidegree).is_none() {
        return Err(SeedError::NoSpace {
            index,
            bidegree: seed.bidegree,
        });
    }
    let hom = HomSpace::differential(alg, state.page, seed.bidegree).expect("state bidegrees are loaded");
    if seed.element.len() != hom.source_dim {
        return Err(SeedError::ElementLength {
            index,
            expected: hom.source_dim,
            found: seed.element.len(),
        });
    }
    if seed.value.len() != hom.target_dim {
        return Err(SeedError::ValueLength {
            index,
            expected: hom.target_dim,
            found: seed.value.len(),
        });
    }
    if seed.element.is_zero() {
        return Err(SeedError::ZeroElement { index });
    }
    if seed.stage == 0 {
        return Err(SeedError::Stage { index });
    }
    Ok(hom)
}

/// Intersects `D^A` with the seed's evaluation constraint.
///
/// Returns the event when the dimension drops. `index` identifies the seed in
/// events and contradiction reports.
pub fn apply_seed(
    alg: &BigradedAlgebra,
    state: &mut DifferentialState,
    seed: &Seed,
    index: usize,
) -> Result<Option<DeductionEvent>, PropagationError> {
    let hom = check_seed(alg, state, seed, index)?;
    let current = &state.spaces[&seed.bidegree];
    let narrowed = match evaluation_constraint(&hom, &seed.element, &seed.value) {
        MaybeEmptyAffine::Subspace(c) => current.intersect(&c).expect("same hom-space"),
        MaybeEmptyAffine::Empty => MaybeEmptyAffine::Empty,
    };
    let Some(narrowed) = narrowed.subspace() else {
        return Err(PropagationError::Contradiction(Box::new(Contradiction {
            cause: ContradictionCause::Seed {
                seed: index,
                bidegree: seed.bidegree,
                label: seed.label.clone(),
            },
            stage: state.stage,
            pass: 0,
            events: Vec::new(),
        })));
    };
    let before = current.dim();
    if narrowed.dim() == before {
        return Ok(None);
    }
    let event = DeductionEvent {
        construction: EventKind::Seed,
        pair: None,
        affected: seed.bidegree,
        dim_before: before,
        dim_after: narrowed.dim(),
        pass: 0,
        stage: state.stage,
        seed: Some(index),
    };
    state.replace(seed.bidegree, narrowed);
    Ok(Some(event))
}

/// Pairs `(A, B)`, `A <= B`, whose six bidegrees are all loaded, in
/// lexicographic order.
pub fn relevant_pairs(alg: &BigradedAlgebra, page: PageShift) -> Vec<(Bidegree, Bidegree)> {
    let domain: Vec<Bidegree> = differential_domain(alg, page).into_iter().collect();
    let mut pairs = Vec::new();
    for (i, &a) in domain.iter().enumerate() {
        for &b in &domain[i..] {
            if triple_loaded(alg, page, a, b) {
                pairs.push((a, b));
            }
        }
    }
    pairs
}

/// Outcome of one [`run`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunReport {
    pub events: Vec<DeductionEvent>,
    /// Number of sweeps, including the final one that changed nothing.
    pub passes: usize,
}

/// Runs propagation to a fixpoint over [`relevant_pairs`].
pub fn run(alg: &BigradedAlgebra, state: &mut DifferentialState, mode: Mode) -> Result<RunReport, PropagationError> {
    let pairs = relevant_pairs(alg, state.page);
    run_with_pairs(alg, state, &pairs, mode)
}

/// Runs propagation visiting `pairs` in the given order on every sweep.
pub fn run_with_pairs(
    alg: &BigradedAlgebra,
    state: &mut DifferentialState,
    pairs: &[(Bidegree, Bidegree)],
    mode: Mode,
) -> Result<RunReport, PropagationError> {
    let mut events = Vec::new();
    let passes = run_into(alg, state, pairs, mode, &mut events)?;
    Ok(RunReport { events, passes })
}

/// The three constraints of one pair, in application order.
type PairConstraints = [(Bidegree, ConstraintResult); 3];

fn pair_constraints(
    alg: &BigradedAlgebra,
    page: PageShift,
    spaces: &BTreeMap<Bidegree, AffineSubspace>,
    (a, b): (Bidegree, Bidegree),
) -> Result<PairConstraints, LeibnizError> {
    let (da, db, dab) = (&spaces[&a], &spaces[&b], &spaces[&(a + b)]);
    Ok([
        (a, constrain_factor(alg, page, db, dab, a, b)?),
        (b, constrain_factor_swapped(alg, page, da, dab, a, b)?),
        (a + b, constrain_product(alg, page, da, db, a, b)?),
    ])
}

fn constraint_for(
    alg: &BigradedAlgebra,
    page: PageShift,
    spaces: &BTreeMap<Bidegree, AffineSubspace>,
    (a, b): (Bidegree, Bidegree),
    kind: ConstructionKind,
) -> Result<(Bidegree, ConstraintResult), LeibnizError> {
    let (da, db, dab) = (&spaces[&a], &spaces[&b], &spaces[&(a + b)]);
    Ok(match kind {
        ConstructionKind::T => (a, constrain_factor(alg, page, db, dab, a, b)?),
        ConstructionKind::TSwapped => (b, constrain_factor_swapped(alg, page, da, dab, a, b)?),
        ConstructionKind::S => (a + b, constrain_product(alg, page, da, db, a, b)?),
    })
}

/// Intersects the constraint into `state`; returns whether the space shrank.
fn apply_constraint(
    state: &mut DifferentialState,
    affected: Bidegree,
    constraint: ConstraintResult,
    pass: usize,
    log: &mut Vec<DeductionEvent>,
) -> Result<bool, PropagationError> {
    let current = &state.spaces[&affected];
    let narrowed = match constraint.subspace {
        MaybeEmptyAffine::Subspace(c) => current.intersect(&c).map_err(LeibnizError::from)?,
        MaybeEmptyAffine::Empty => MaybeEmptyAffine::Empty,
    };
    let construction = EventKind::from(constraint.construction);
    let Some(narrowed) = narrowed.subspace() else {
        return Err(PropagationError::Contradiction(Box::new(Contradiction {
            cause: ContradictionCause::Leibniz {
                pair: constraint.pair,
                construction,
                affected,
            },
            stage: state.stage,
            pass,
            events: log.clone(),
        })));
    };
    let before = current.dim();
    if narrowed.dim() == before {
        return Ok(false);
    }
    debug!(
        "pass {pass}: {construction:?} on ({}, {}) narrows {affected}: {before} -> {}",
        constraint.pair.0,
        constraint.pair.1,
        narrowed.dim()
    );
    log.push(DeductionEvent {
        construction,
        pair: Some(constraint.pair),
        affected,
        dim_before: before,
        dim_after: narrowed.dim(),
        pass,
        stage: state.stage,
        seed: None,
    });
    state.replace(affected, narrowed);
    Ok(true)
}

fn run_into(
    alg: &BigradedAlgebra,
    state: &mut DifferentialState,
    pairs: &[(Bidegree, Bidegree)],
    mode: Mode,
    log: &mut Vec<DeductionEvent>,
) -> Result<usize, PropagationError> {
    let page = state.page;
    let mut pass = 0;
    loop {
        pass += 1;
        let mut changed = false;
        match mode {
            Mode::Sequential => {
                for &pair in pairs {
                    for kind in [ConstructionKind::T, ConstructionKind::TSwapped, ConstructionKind::S] {
                        let (affected, c) = constraint_for(alg, page, &state.spaces, pair, kind)?;
                        changed |= apply_constraint(state, affected, c, pass, log)?;
                    }
                }
            }
            Mode::ParallelPass => {
                let snapshot = &state.spaces;
                let computed: Vec<PairConstraints> = pairs
                    .par_iter()
                    .map(|&pair| pair_constraints(alg, page, snapshot, pair))
                    .collect::<Result<_, _>>()?;
                for constraints in computed {
                    for (affected, c) in constraints {
                        changed |= apply_constraint(state, affected, c, pass, log)?;
                    }
                }
            }
        }
        info!("stage {} pass {pass}: total dimension {}", state.stage, state.total_dim());
        if !changed {
            return Ok(pass);
        }
    }
}

/// Result of [`run_staged`].
#[derive(Clone, Debug)]
pub struct StagedRun {
    /// Final state after each stage, index = stage.
    pub snapshots: Vec<DifferentialState>,
    pub classification: Classification,
    /// Events of all stages, including initialization and seeds.
    pub events: Vec<DeductionEvent>,
    /// Sweeps used by each stage.
    pub passes: Vec<usize>,
}

impl StagedRun {
    pub fn final_state(&self) -> &DifferentialState {
        self.snapshots.last().expect("at least stage 0 runs")
    }
}

/// Stage 0 runs with no seeds; stage `k` adds the seeds tagged `k` to the
/// state left by stage `k - 1` and runs again.
pub fn run_staged(
    alg: &BigradedAlgebra,
    page: PageShift,
    seeds: &[Seed],
    mode: Mode,
) -> Result<StagedRun, PropagationError> {
    let (mut state, mut log) = initialize(alg, page);
    for (i, seed) in seeds.iter().enumerate() {
        check_seed(alg, &state, seed, i)?;
    }
    let pairs = relevant_pairs(alg, page);
    let last_stage = seeds.iter().map(|s| s.stage).max().unwrap_or(0);
    let mut snapshots = Vec::new();
    let mut passes = Vec::new();
    for stage in 0..=last_stage {
        state.set_stage(stage);
        for (i, seed) in seeds.iter().enumerate().filter(|(_, s)| s.stage == stage) {
            match apply_seed(alg, &mut state, seed, i) {
                Ok(event) => log.extend(event),
                Err(PropagationError::Contradiction(mut c)) => {
                    c.events = log;
                    return Err(PropagationError::Contradiction(c));
                }
                Err(e) => return Err(e),
            }
        }
        passes.push(run_into(alg, &mut state, &pairs, mode, &mut log)?);
        snapshots.push(state.clone());
    }
    let classification = classify(alg, &state);
    Ok(StagedRun {
        snapshots,
        classification,
        events: log,
        passes,
    })
}

/// Rebuilds the final state of a sequential run by re-applying only the
/// logged events, in order, starting from [`initialize`].
pub fn replay(
    alg: &BigradedAlgebra,
    page: PageShift,
    seeds: &[Seed],
    events: &[DeductionEvent],
) -> Result<DifferentialState, PropagationError> {
    let (mut state, _) = initialize(alg, page);
    let mut scratch = Vec::new();
    for e in events {
        state.set_stage(e.stage);
        match e.construction {
            EventKind::InitDegreeReasons => {}
            EventKind::Seed => {
                let index = e.seed.expect("seed events carry their index");
                apply_seed(alg, &mut state, &seeds[index], index)?;
            }
            EventKind::S | EventKind::T | EventKind::TSwapped => {
                let kind = match e.construction {
                    EventKind::S => ConstructionKind::S,
                    EventKind::T => ConstructionKind::T,
                    _ => ConstructionKind::TSwapped,
                };
                let pair = e.pair.expect("Leibniz events carry their pair");
                let (affected, c) = constraint_for(alg, page, &state.spaces, pair, kind)?;
                debug_assert_eq!(affected, e.affected);
                apply_constraint(&mut state, affected, c, e.pass, &mut scratch)?;
            }
        }
    }
    Ok(state)
}
