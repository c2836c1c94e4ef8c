//! Corpora and an independent exact oracle shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use plausia::event::Event;
use plausia::model::{EpistemicModel, Measure, Priors};
use plausia::modelfile;
use plausia::search::{enumerate_models, random_models, Family, SearchParams};
use plausia::values::Value;

pub const RANDOM_SEED: u64 = 0x5eed_2026;
pub const RANDOM_COUNT: usize = 10_000;

pub fn examples_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples")
}

pub fn golden_paths() -> Vec<PathBuf> {
    ["counting_grid6.epm", "product_prior.epm", "shifted_table.epm"]
        .iter()
        .map(|f| examples_dir().join(f))
        .collect()
}

pub fn golden(name: &str) -> EpistemicModel {
    let text = std::fs::read_to_string(examples_dir().join(name)).expect("golden file");
    modelfile::parse(&text).expect("golden file parses")
}

pub fn r(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `{1/4, 1/2, 3/4, 1}`.
pub fn classical_thresholds() -> Vec<Value> {
    [(1, 4), (1, 2), (3, 4), (1, 1)]
        .iter()
        .map(|&(n, d)| Value::scalar(n, d))
        .collect()
}

/// Every canonical 2-agent probability model with `|W| ≤ 4` and prior
/// denominators at most 4.
pub fn probability_corpus() -> Vec<EpistemicModel> {
    let params = SearchParams {
        family: Family::Probability,
        max_states: 4,
        denominator: 4,
        agents: 2,
        ..SearchParams::default()
    };
    let c = enumerate_models(&params).unwrap();
    assert!(!c.exhausted);
    c.models
}

/// Seeded random 2-agent probability models, `|W| ≤ 4`.
pub fn random_corpus() -> Vec<EpistemicModel> {
    let params = SearchParams {
        family: Family::Probability,
        max_states: 4,
        denominator: 12,
        agents: 2,
        seed: RANDOM_SEED,
        ..SearchParams::default()
    };
    random_models(&params, RANDOM_COUNT).unwrap().models
}

/// Product-domain models, `|W| ≤ 3`, denominators at most 4.
pub fn product_corpus() -> Vec<EpistemicModel> {
    let params = SearchParams {
        family: Family::Product,
        max_states: 3,
        denominator: 4,
        agents: 2,
        ..SearchParams::default()
    };
    enumerate_models(&params).unwrap().models
}

/// Shifted-table models, `|W| ≤ 3`, one and two agents.
pub fn table_corpus() -> Vec<EpistemicModel> {
    let mut out = Vec::new();
    for agents in [1, 2] {
        let params = SearchParams {
            family: Family::Table,
            max_states: 3,
            denominator: 4,
            agents,
            ..SearchParams::default()
        };
        out.extend(enumerate_models(&params).unwrap().models);
    }
    out
}

/// Direct computation from the prior and partitions of a common-prior
/// probability model, without the library's operators.
pub struct ProbOracle {
    pub n: usize,
    pub prior: Vec<BigRational>,
    /// Per agent, the block bitmask of each state.
    pub block: Vec<Vec<u64>>,
}

impl ProbOracle {
    pub fn new(model: &EpistemicModel) -> Option<Self> {
        let prior = match model.priors() {
            Priors::Common(Measure::Prior(p)) => p.clone(),
            _ => return None,
        };
        let n = model.num_states();
        let block = model
            .partitions()
            .iter()
            .map(|p| {
                (0..n)
                    .map(|w| {
                        p.blocks()
                            .iter()
                            .map(|b| b.bits())
                            .find(|b| b >> w & 1 == 1)
                            .expect("partition covers W")
                    })
                    .collect()
            })
            .collect();
        Some(ProbOracle { n, prior, block })
    }

    pub fn agents(&self) -> usize {
        self.block.len()
    }

    pub fn full(&self) -> u64 {
        (1u64 << self.n) - 1
    }

    pub fn mass(&self, e: u64) -> BigRational {
        (0..self.n)
            .filter(|w| e >> w & 1 == 1)
            .fold(BigRational::zero(), |acc, w| acc + &self.prior[w])
    }

    pub fn cond(&self, e: u64, f: u64) -> Option<BigRational> {
        let m = self.mass(f);
        (!m.is_zero()).then(|| self.mass(e & f) / m)
    }

    pub fn posterior(&self, i: usize, w: usize, e: u64) -> Option<BigRational> {
        self.cond(e, self.block[i][w])
    }

    pub fn believes(&self, i: usize, p: &BigRational, e: u64) -> u64 {
        (0..self.n)
            .filter(|&w| self.posterior(i, w, e).is_some_and(|v| v >= *p))
            .fold(0, |acc, w| acc | 1 << w)
    }

    fn subsets(mask: u64) -> impl Iterator<Item = u64> {
        let mut sub = mask;
        let mut done = false;
        std::iter::from_fn(move || {
            if done {
                return None;
            }
            let out = sub;
            if sub == 0 {
                done = true;
            } else {
                sub = (sub - 1) & mask;
            }
            Some(out)
        })
    }

    pub fn common_knowledge(&self, e: u64) -> u64 {
        Self::subsets(e)
            .filter(|&z| {
                (0..self.agents()).all(|i| (0..self.n).filter(|w| z >> w & 1 == 1).all(|w| self.block[i][w] & !z == 0))
            })
            .fold(0, |acc, z| acc | z)
    }

    pub fn common_belief(&self, p: &BigRational, e: u64) -> u64 {
        let mutual = (0..self.agents()).fold(self.full(), |acc, i| acc & self.believes(i, p, e));
        Self::subsets(mutual)
            .filter(|&z| (0..self.agents()).all(|i| z & !self.believes(i, p, z) == 0))
            .fold(0, |acc, z| acc | z)
    }

    /// `(profile, X)` groups of states with fully defined posteriors.
    pub fn profiles(&self, e: u64) -> Vec<(Vec<BigRational>, u64)> {
        let mut out: Vec<(Vec<BigRational>, u64)> = Vec::new();
        for w in 0..self.n {
            let Some(profile) = (0..self.agents())
                .map(|i| self.posterior(i, w, e))
                .collect::<Option<Vec<_>>>()
            else {
                continue;
            };
            match out.iter_mut().find(|(p, _)| *p == profile) {
                Some((_, x)) => *x |= 1 << w,
                None => out.push((profile, 1 << w)),
            }
        }
        out
    }
}

pub fn ev(bits: u64) -> Event {
    Event::from_bits(bits)
}
