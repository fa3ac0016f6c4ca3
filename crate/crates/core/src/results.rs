//! The results file written by `run` and read by `chart`, `explain` and `stats`.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::affine::AffineRecord;
use crate::algebra::{Bidegree, BigradedAlgebra, PageShift};
use crate::gf2::BitMatrix;
use crate::ingest::{IngestError, FORMAT_VERSION};
use crate::propagate::{
    BidegreeClass, Classification, Contradiction, DeductionEvent, DifferentialState, Mode, Status,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Ok,
    Contradiction,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ClassRecord {
    DeterminedZero,
    DeterminedNonzero { matrix: Vec<Vec<u8>> },
    Partial { fixed: Vec<(usize, u8)>, dim: usize },
}

impl From<&Status> for ClassRecord {
    fn from(s: &Status) -> Self {
        match s {
            Status::DeterminedZero => ClassRecord::DeterminedZero,
            Status::DeterminedNonzero { matrix } => ClassRecord::DeterminedNonzero {
                matrix: matrix.to_u8_rows(),
            },
            Status::Partial { fixed, dim } => ClassRecord::Partial {
                fixed: fixed.iter().map(|&(i, b)| (i, b as u8)).collect(),
                dim: *dim,
            },
        }
    }
}

impl ClassRecord {
    fn to_status(&self, source_dim: usize) -> Status {
        match self {
            ClassRecord::DeterminedZero => Status::DeterminedZero,
            ClassRecord::DeterminedNonzero { matrix } => Status::DeterminedNonzero {
                matrix: BitMatrix::from_u8_rows(matrix, source_dim),
            },
            ClassRecord::Partial { fixed, dim } => Status::Partial {
                fixed: fixed.iter().map(|&(i, b)| (i, b != 0)).collect(),
                dim: *dim,
            },
        }
    }
}

/// A loaded bidegree and its basis names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElementRecord {
    pub n: i32,
    pub s: i32,
    pub dim: usize,
    pub names: Vec<String>,
}

/// The final space of possible differentials on one bidegree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DifferentialRecord {
    pub n: i32,
    pub s: i32,
    pub source_dim: usize,
    pub target_dim: usize,
    pub hom_dim: usize,
    pub dim: usize,
    #[serde(flatten)]
    pub space: AffineRecord,
    pub classification: ClassRecord,
    pub stage: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultsDocument {
    pub format_version: u32,
    pub status: RunStatus,
    pub page: u32,
    pub mode: Mode,
    /// Sweeps per stage.
    pub passes: Vec<usize>,
    pub elements: Vec<ElementRecord>,
    pub differentials: Vec<DifferentialRecord>,
    pub events: Vec<DeductionEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub contradiction: Option<Contradiction>,
}

fn elements(alg: &BigradedAlgebra) -> Vec<ElementRecord> {
    alg.bidegrees()
        .map(|b| ElementRecord {
            n: b.n,
            s: b.s,
            dim: alg.dim(b).unwrap_or(0),
            names: alg.names(b).unwrap_or_default().to_vec(),
        })
        .collect()
}

impl ResultsDocument {
    pub fn success(
        alg: &BigradedAlgebra,
        state: &DifferentialState,
        classification: &Classification,
        events: &[DeductionEvent],
        passes: &[usize],
        mode: Mode,
    ) -> Self {
        let differentials = classification
            .entries
            .iter()
            .map(|(b, c)| {
                let d = state.get(*b).expect("classified bidegrees have spaces");
                DifferentialRecord {
                    n: b.n,
                    s: b.s,
                    source_dim: c.source_dim,
                    target_dim: c.target_dim,
                    hom_dim: c.hom_dim(),
                    dim: d.dim(),
                    space: AffineRecord::from(d),
                    classification: ClassRecord::from(&c.status),
                    stage: c.stage,
                }
            })
            .collect();
        Self {
            format_version: FORMAT_VERSION,
            status: RunStatus::Ok,
            page: classification.page.r(),
            mode,
            passes: passes.to_vec(),
            elements: elements(alg),
            differentials,
            events: events.to_vec(),
            contradiction: None,
        }
    }

    /// The provenance dump for a failed run.
    pub fn contradiction(alg: &BigradedAlgebra, page: PageShift, mode: Mode, c: &Contradiction) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            status: RunStatus::Contradiction,
            page: page.r(),
            mode,
            passes: Vec::new(),
            elements: elements(alg),
            differentials: Vec::new(),
            events: c.events.clone(),
            contradiction: Some(c.clone()),
        }
    }

    pub fn classification(&self) -> Result<Classification, IngestError> {
        let page = PageShift::new(self.page).map_err(|source| IngestError::Algebra {
            context: "results page".into(),
            source,
        })?;
        let entries: BTreeMap<Bidegree, BidegreeClass> = self
            .differentials
            .iter()
            .map(|d| {
                let class = BidegreeClass {
                    source_dim: d.source_dim,
                    target_dim: d.target_dim,
                    status: d.classification.to_status(d.source_dim),
                    stage: d.stage,
                };
                (Bidegree::new(d.n, d.s), class)
            })
            .collect();
        Ok(Classification { page, entries })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("results serialize");
        s.push('\n');
        s
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, IngestError> {
        let doc: Self = serde_json::from_str(text).map_err(|e| IngestError::Parse {
            path: origin.to_string(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if doc.format_version != FORMAT_VERSION {
            return Err(IngestError::Version(doc.format_version));
        }
        Ok(doc)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, IngestError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| IngestError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::parse(&text, &path.display().to_string())
    }
}
