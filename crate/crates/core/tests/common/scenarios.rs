//! Scenarios used by both the integration tests and the acceptance suite.

use std::collections::BTreeSet;
use std::path::Path;

use adams_leibniz::algebra::HomSpace;
use adams_leibniz::ingest::{chart_document, Chart, ElementSpec, SeedDocument, SeedRecord, FORMAT_VERSION};
use adams_leibniz::propagate::{run_staged, Mode, Seed};
use adams_leibniz::{AffineSubspace, Bidegree, BitVector};
use rand::seq::SliceRandom;
use rand::Rng;

use super::leibniz_oracle::points;
use super::toy::{random_toy, Toy, ToyParams};

pub fn write_chart(toy: &Toy, path: &Path) {
    let chart = Chart {
        algebra: toy.algebra.clone(),
        page: toy.page,
    };
    std::fs::write(path, serde_json::to_string_pretty(&chart_document(&chart)).unwrap()).unwrap();
}

pub fn write_seeds(seeds: &[Seed], path: &Path) {
    let doc = SeedDocument {
        format_version: FORMAT_VERSION,
        seeds: seeds
            .iter()
            .map(|s| SeedRecord {
                stage: s.stage,
                bidegree: Some([s.bidegree.n, s.bidegree.s]),
                element: ElementSpec::Vector(s.element.to_u8s()),
                value: ElementSpec::Vector(s.value.to_u8s()),
                label: s.label.clone(),
            })
            .collect(),
    };
    std::fs::write(path, serde_json::to_string_pretty(&doc).unwrap()).unwrap();
}

/// Values `M z` over all `M` in `d`.
fn evaluations(hom: &HomSpace, d: &AffineSubspace, z: &BitVector) -> BTreeSet<Vec<u8>> {
    points(d)
        .into_iter()
        .map(|flat| hom.unflatten(&BitVector::from_u8s(&flat)).mul_vec(z).to_u8s())
        .collect()
}

/// A toy, its true seeds, and one false seed that the stage-0 fixpoint still
/// allows but the fully seeded fixpoint rules out.
pub struct Injection {
    pub toy: Toy,
    pub seeds: Vec<Seed>,
    pub bad: Seed,
}

impl Injection {
    pub fn all_seeds(&self) -> Vec<Seed> {
        let mut v = self.seeds.clone();
        v.push(self.bad.clone());
        v
    }
}

pub fn find_injection<R: Rng>(rng: &mut R, params: &ToyParams) -> Injection {
    loop {
        let toy = random_toy(rng, params);
        let mut seeds = toy.generator_seeds(1);
        let extra = rng.gen_range(0..=2);
        seeds.extend(toy.random_seeds(rng, extra, 1));
        let run = run_staged(&toy.algebra, toy.page, &seeds, Mode::Sequential).expect("true seeds are consistent");
        let seeded: BTreeSet<Bidegree> = seeds.iter().map(|s| s.bidegree).collect();
        let mut candidates = Vec::new();
        for (&c, d_final) in run.final_state().spaces() {
            let hom = HomSpace::differential(&toy.algebra, toy.page, c).unwrap();
            if seeded.contains(&c) || hom.dim() == 0 {
                continue;
            }
            let d0 = run.snapshots[0].get(c).unwrap();
            for code in 1u64..1 << hom.source_dim {
                let z = BitVector::from_bits((0..hom.source_dim).map(|i| code >> i & 1 == 1));
                let before = evaluations(&hom, d0, &z);
                let after = evaluations(&hom, d_final, &z);
                for v in before.difference(&after) {
                    candidates.push((c, z.clone(), v.clone()));
                }
            }
        }
        if let Some((c, z, v)) = candidates.choose(rng).cloned() {
            let bad = Seed {
                bidegree: c,
                element: z,
                value: BitVector::from_u8s(&v),
                stage: 1,
                label: Some("injected".into()),
            };
            return Injection { toy, seeds, bad };
        }
    }
}
