//! Model enumeration, seeded random models, brute-force operator oracles and
//! counterexample mining.

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::agreement::{default_thresholds, AgreementChecker, Outcome, Theorem};
use crate::axioms::{self, AxiomOptions};
use crate::event::{Event, StateSpace};
use crate::model::{mass, EpistemicModel, Measure, Partition, Priors, TableMeasure};
use crate::modelfile;
use crate::operators::{self, OperatorError};
use crate::report::{AxiomId, CheckReport};
use crate::values::{Domain, Rational, Value};

/// Upper bound on `|W|` for the subset-enumerating oracles.
pub const BRUTE_FORCE_MAX_STATES: usize = 16;

/// Upper bound on `|W|` for exhaustive enumeration.
pub const ENUMERATION_MAX_STATES: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("invalid search parameters: {0}")]
    InvalidParams(String),
    #[error("{states} states exceed the brute-force cap of {BRUTE_FORCE_MAX_STATES}")]
    TooLarge { states: usize },
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error("cannot write witnesses: {0}")]
    Io(String),
}

/// Which kind of measure the generated models carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// One common prior over `unit-rational`.
    Probability,
    /// One common pair of priors over `product-unit-rational`.
    Product,
    /// A common prior whose conditionals given `W` are shifted by
    /// [`table_shift`] from one state to another.
    Table,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Probability => "probability",
            Family::Product => "product",
            Family::Table => "table",
        }
    }

    pub fn domain(self) -> Domain {
        match self {
            Family::Product => Domain::ProductUnitRational,
            _ => Domain::UnitRational,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "probability" => Ok(Family::Probability),
            "product" => Ok(Family::Product),
            "table" => Ok(Family::Table),
            _ => Err(format!("unknown family `{s}` (expected probability, product or table)")),
        }
    }
}

/// Mass moved between two states in the table family.
pub fn table_shift() -> Rational {
    Rational::new(1.into(), 100.into())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchParams {
    pub family: Family,
    pub min_states: usize,
    pub max_states: usize,
    pub agents: usize,
    /// Prior entries are fractions with denominator at most this.
    pub denominator: u32,
    /// `None` enumerates every canonical model; `Some(k)` draws `k` random ones.
    pub random: Option<usize>,
    /// Theorem thresholds; empty means [`default_thresholds`] per model.
    pub thresholds: Vec<Value>,
    pub seed: u64,
    /// Maximum number of models examined.
    pub budget: usize,
    pub max_witnesses: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            family: Family::Probability,
            min_states: 1,
            max_states: 3,
            agents: 2,
            denominator: 4,
            random: None,
            thresholds: Vec::new(),
            seed: 0,
            budget: 1_000_000,
            max_witnesses: 10,
        }
    }
}

impl SearchParams {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: String| Err(SearchError::InvalidParams(m));
        if self.budget < 1 {
            return bad("budget must be at least 1".into());
        }
        if self.denominator < 1 {
            return bad("denominator must be at least 1".into());
        }
        if self.agents < 1 {
            return bad("at least one agent is required".into());
        }
        if self.min_states < 1 || self.min_states > self.max_states {
            return bad(format!("state range {}..={} is empty", self.min_states, self.max_states));
        }
        if self.random.is_none() && self.max_states > ENUMERATION_MAX_STATES {
            return bad(format!("exhaustive enumeration is limited to {ENUMERATION_MAX_STATES} states"));
        }
        if self.max_states > BRUTE_FORCE_MAX_STATES {
            return bad(format!("at most {BRUTE_FORCE_MAX_STATES} states are supported"));
        }
        if self.family == Family::Table && self.max_states > 4 {
            return bad("the table family is limited to 4 states".into());
        }
        Ok(())
    }
}

/// Models produced under a budget.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub models: Vec<EpistemicModel>,
    /// More models existed beyond the budget.
    pub exhausted: bool,
}

/// All restricted growth strings of length `n`, lexicographically.
pub fn restricted_growth_strings(n: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, max: usize, n: usize, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        let limit = if prefix.is_empty() { 0 } else { max + 1 };
        for label in 0..=limit {
            prefix.push(label);
            go(prefix, max.max(label), n, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), 0, n, &mut out);
    out
}

fn normalize_labels(labels: &[usize]) -> Vec<usize> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

/// Distinct fractions in `[0,1]` with denominator at most `d`, ascending.
pub fn prior_grid(d: u32) -> Vec<Rational> {
    let mut out: Vec<Rational> = (1..=d)
        .flat_map(|den| (0..=den).map(move |num| Rational::new(num.into(), den.into())))
        .collect();
    out.sort();
    out.dedup();
    out
}

/// Every length-`n` vector over `grid` summing to one, lexicographically.
pub fn grid_priors(n: usize, grid: &[Rational]) -> Vec<Vec<Rational>> {
    fn go(n: usize, grid: &[Rational], rest: Rational, prefix: &mut Vec<Rational>, out: &mut Vec<Vec<Rational>>) {
        if prefix.len() + 1 == n {
            if grid.contains(&rest) {
                prefix.push(rest);
                out.push(prefix.clone());
                prefix.pop();
            }
            return;
        }
        for v in grid.iter().filter(|v| **v <= rest) {
            prefix.push(v.clone());
            go(n, grid, &rest - v, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(n, grid, Rational::one(), &mut Vec::new(), &mut out);
    out
}

/// The generator-level description of a model, used for canonical forms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Shape {
    labels: Vec<Vec<usize>>,
    priors: Vec<Vec<Rational>>,
    /// Table family: mass moves from `shift.1` to `shift.0`.
    shift: Option<(usize, usize)>,
}

impl Shape {
    fn permuted(&self, perm: &[usize]) -> Shape {
        let n = perm.len();
        let labels = self
            .labels
            .iter()
            .map(|l| {
                let mut out = vec![0; n];
                for w in 0..n {
                    out[perm[w]] = l[w];
                }
                normalize_labels(&out)
            })
            .collect();
        let priors = self
            .priors
            .iter()
            .map(|p| {
                let mut out = vec![Rational::zero(); n];
                for w in 0..n {
                    out[perm[w]] = p[w].clone();
                }
                out
            })
            .collect();
        Shape {
            labels,
            priors,
            shift: self.shift.map(|(a, b)| (perm[a], perm[b])),
        }
    }

    /// Whether no state relabelling yields a lexicographically smaller shape.
    fn is_canonical(&self, perms: &[Vec<usize>]) -> bool {
        perms.iter().all(|p| *self <= self.permuted(p))
    }

    fn blocks_have_mass(&self) -> bool {
        self.labels.iter().all(|labels| {
            Partition::from_labels(labels)
                .blocks()
                .iter()
                .all(|b| self.priors.iter().all(|p| mass(p, *b).is_positive()))
        })
    }

    fn build(&self, family: Family, name: String) -> EpistemicModel {
        let n = self.labels[0].len();
        let agents: Vec<String> = (1..=self.labels.len()).map(|i| i.to_string()).collect();
        let partitions = self.labels.iter().map(|l| Partition::from_labels(l)).collect();
        let measure = match family {
            Family::Probability => Measure::Prior(self.priors[0].clone()),
            Family::Product => Measure::ProductPrior(self.priors[0].clone(), self.priors[1].clone()),
            Family::Table => {
                let base = self.priors[0].clone();
                let (a, b) = self.shift.expect("table shapes carry a shift");
                Measure::Table(shifted_table(base, a, b))
            }
        };
        EpistemicModel::new(name, family.domain(), StateSpace::numbered(n), agents, partitions, Priors::Common(measure))
            .expect("generated shapes are well formed")
    }
}

/// Table measure equal to `base` except that `Pl(E|W)` moves
/// [`table_shift`] of mass from state `b` to state `a`.
pub fn shifted_table(base: Vec<Rational>, a: usize, b: usize) -> TableMeasure {
    let n = base.len();
    let full = Event::full(n);
    let eps = table_shift();
    let mut overrides = BTreeMap::new();
    for e in Event::all(n) {
        let v = match (e.contains(a), e.contains(b)) {
            (true, false) => mass(&base, e) + &eps,
            (false, true) => mass(&base, e) - &eps,
            _ => continue,
        };
        overrides.insert((e, full), Value::Scalar(v));
    }
    TableMeasure { base, overrides }
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(rest: &mut Vec<usize>, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..rest.len() {
            let x = rest.remove(k);
            prefix.push(x);
            go(rest, prefix, out);
            prefix.pop();
            rest.insert(k, x);
        }
    }
    let mut out = Vec::new();
    go(&mut (0..n).collect(), &mut Vec::new(), &mut out);
    out
}

fn tuples<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<T>> = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                items.iter().map(move |x| {
                    let mut v = prefix.clone();
                    v.push(x.clone());
                    v
                })
            })
            .collect();
    }
    out
}

/// Canonical models in the deterministic order: `|W|` ascending, partition
/// tuples in restricted-growth order, priors lexicographic. Every information
/// set has positive mass, so every posterior is defined.
pub fn enumerate_models(params: &SearchParams) -> Result<Corpus, SearchError> {
    params.validate()?;
    let grid = prior_grid(params.denominator);
    let mut models = Vec::new();
    let mut exhausted = false;
    'outer: for n in params.min_states..=params.max_states {
        let perms = permutations(n);
        let partition_tuples = tuples(&restricted_growth_strings(n), params.agents);
        let single = grid_priors(n, &grid);
        let prior_lists: Vec<Vec<Vec<Rational>>> = match params.family {
            Family::Product => tuples(&single, 2),
            _ => single.into_iter().map(|p| vec![p]).collect(),
        };
        for labels in &partition_tuples {
            for priors in &prior_lists {
                let shifts: Vec<Option<(usize, usize)>> = match params.family {
                    Family::Table => (0..n)
                        .flat_map(|a| (0..n).map(move |b| (a, b)))
                        .filter(|&(a, b)| a != b && priors[0][b] >= table_shift())
                        .map(Some)
                        .collect(),
                    _ => vec![None],
                };
                for shift in shifts {
                    let shape = Shape {
                        labels: labels.clone(),
                        priors: priors.clone(),
                        shift,
                    };
                    if !shape.blocks_have_mass() || !shape.is_canonical(&perms) {
                        continue;
                    }
                    if models.len() == params.budget {
                        exhausted = true;
                        break 'outer;
                    }
                    let name = format!("{}-n{n}-{}", params.family, models.len());
                    models.push(shape.build(params.family, name));
                }
            }
        }
    }
    Ok(Corpus { models, exhausted })
}

fn random_prior(rng: &mut ChaCha8Rng, n: usize, max_den: u32) -> Vec<Rational> {
    let den = rng.gen_range(1..=max_den);
    let mut counts = vec![0u32; n];
    for _ in 0..den {
        counts[rng.gen_range(0..n)] += 1;
    }
    counts
        .into_iter()
        .map(|c| Rational::new(c.into(), den.into()))
        .collect()
}

/// `count` models drawn from a ChaCha8 stream seeded with `params.seed`.
/// Priors use denominators up to `params.denominator`; draws that leave an
/// information set without mass are discarded.
pub fn random_models(params: &SearchParams, count: usize) -> Result<Corpus, SearchError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let take = count.min(params.budget);
    let mut models = Vec::with_capacity(take);
    while models.len() < take {
        let n = rng.gen_range(params.min_states..=params.max_states);
        let labels: Vec<Vec<usize>> = (0..params.agents)
            .map(|_| normalize_labels(&(0..n).map(|_| rng.gen_range(0..n)).collect::<Vec<_>>()))
            .collect();
        let priors: Vec<Vec<Rational>> = match params.family {
            Family::Product => vec![
                random_prior(&mut rng, n, params.denominator),
                random_prior(&mut rng, n, params.denominator),
            ],
            _ => vec![random_prior(&mut rng, n, params.denominator)],
        };
        let shift = if params.family == Family::Table {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (0..n).map(move |b| (a, b)))
                .filter(|&(a, b)| a != b && priors[0][b] >= table_shift())
                .collect();
            match pairs.choose(&mut rng) {
                Some(p) => Some(*p),
                None => continue,
            }
        } else {
            None
        };
        let shape = Shape { labels, priors, shift };
        if !shape.blocks_have_mass() {
            continue;
        }
        let name = format!("random-{}-{}", params.seed, models.len());
        models.push(shape.build(params.family, name));
    }
    Ok(Corpus {
        models,
        exhausted: count > take,
    })
}

/// Enumerated or random corpus, as selected by `params.random`.
pub fn corpus(params: &SearchParams) -> Result<Corpus, SearchError> {
    match params.random {
        Some(k) => random_models(params, k),
        None => enumerate_models(params),
    }
}

fn brute_force_cap(model: &EpistemicModel) -> Result<(), SearchError> {
    if model.num_states() > BRUTE_FORCE_MAX_STATES {
        return Err(SearchError::TooLarge {
            states: model.num_states(),
        });
    }
    Ok(())
}

fn union_of_blocks(model: &EpistemicModel, agent: usize, z: Event) -> bool {
    z.states().all(|w| {
        model
            .partitions()
            .get(agent)
            .and_then(|p| p.block_of(w))
            .is_some_and(|b| b.is_subset(z))
    })
}

/// Union of every `Z ⊆ E` that is a union of information sets for all agents.
pub fn brute_force_common_knowledge(model: &EpistemicModel, e: Event) -> Result<Event, SearchError> {
    brute_force_cap(model)?;
    Ok(e.subsets()
        .filter(|&z| (0..model.num_agents()).all(|i| union_of_blocks(model, i, z)))
        .fold(Event::EMPTY, |acc, z| acc | z))
}

fn literal_belief(model: &EpistemicModel, agent: usize, d: &Value, x: Event) -> Event {
    let domain = model.domain();
    Event::from_states((0..model.num_states()).filter(|&w| {
        model
            .posterior(agent, w, x)
            .ok()
            .flatten()
            .is_some_and(|v| domain.geq(&v, d))
    }))
}

/// Union of every `Z ⊆ B^d(E)` with `Z ⊆ B_i^d(Z)` for all agents, where
/// `B_i^d(X) = {w | Pl_{i,w}(X) ≥ d}`.
pub fn brute_force_common_belief(model: &EpistemicModel, d: &Value, e: Event) -> Result<Event, SearchError> {
    brute_force_cap(model)?;
    let domain = model.domain();
    if !domain.contains(d) {
        return Err(OperatorError::DomainMismatch {
            domain,
            value: d.clone(),
        }
        .into());
    }
    let agents = 0..model.num_agents();
    let mutual = agents
        .clone()
        .fold(model.full(), |acc, i| acc & literal_belief(model, i, d, e));
    Ok(mutual
        .subsets()
        .filter(|&z| agents.clone().all(|i| z.is_subset(literal_belief(model, i, d, z))))
        .fold(Event::EMPTY, |acc, z| acc | z))
}

/// One fixpoint-versus-oracle comparison.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleComparison {
    pub event: Event,
    /// `None` for common knowledge.
    pub threshold: Option<Value>,
    pub fixpoint: Event,
    pub brute_force: Event,
}

impl OracleComparison {
    pub fn agrees(&self) -> bool {
        self.fixpoint == self.brute_force
    }
}

/// Compares `C` and `CB^d` with the oracles for each event and threshold.
pub fn oracle_diff(
    model: &EpistemicModel,
    events: &[Event],
    thresholds: &[Value],
) -> Result<Vec<OracleComparison>, SearchError> {
    let mut out = Vec::new();
    for &e in events {
        out.push(OracleComparison {
            event: e,
            threshold: None,
            fixpoint: operators::common_knowledge(model, e).0,
            brute_force: brute_force_common_knowledge(model, e)?,
        });
        for d in thresholds {
            out.push(OracleComparison {
                event: e,
                threshold: Some(d.clone()),
                fixpoint: operators::common_belief(model, d, e)?.0,
                brute_force: brute_force_common_belief(model, d, e)?,
            });
        }
    }
    Ok(out)
}

/// What a search looks for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Axiom(AxiomId),
    /// No multiplication whatsoever satisfies M3.
    M3Satisfiability,
    Theorem(Theorem),
}

impl Target {
    /// Hypotheses a model must satisfy before the target is checked. Theorem
    /// targets use the theorem's own hypotheses.
    pub fn hypotheses(self) -> Vec<AxiomId> {
        use AxiomId::*;
        match self {
            Target::Axiom(CP7) => vec![CP1, CP2, CP3, CP4, M1, M2, M3, M4],
            Target::Axiom(CP6) => vec![CP1, CP2, CP3, CP4, M1, M3, M4],
            Target::Axiom(_) => Vec::new(),
            Target::M3Satisfiability => vec![CP1, CP2, CP3, CP4, A1, A2, A3, A4, CP6, CP7],
            Target::Theorem(Theorem::Aumann | Theorem::MsnClassical) => Vec::new(),
            Target::Theorem(Theorem::MsnWithMult) => {
                vec![CP1, CP2, CP3, CP4, A1, A2, A3, A4, ACC, ASSOC, M1, M2, M3]
            }
            Target::Theorem(Theorem::MsnWithoutMult) => vec![CP1, CP2, CP3, CP4, A1, A2, A3, A4, CP6, CP7],
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Axiom(a) => f.write_str(a.as_str()),
            Target::M3Satisfiability => f.write_str("M3-SAT"),
            Target::Theorem(t) => f.write_str(t.as_str()),
        }
    }
}

impl FromStr for Target {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("m3-sat") {
            return Ok(Target::M3Satisfiability);
        }
        if let Ok(t) = s.parse::<Theorem>() {
            return Ok(Target::Theorem(t));
        }
        s.parse::<AxiomId>()
            .map(Target::Axiom)
            .map_err(|_| format!("unknown target `{s}`"))
    }
}

/// A model on which the target fails, with a replayable command line.
#[derive(Debug, Clone)]
pub struct SearchWitness {
    pub model: EpistemicModel,
    pub summary: String,
    /// Rendered violation (a check report or agreement verdict).
    pub violation: serde_json::Value,
    /// Arguments after the model path, e.g. `["--only", "CP7"]`.
    pub command: Vec<String>,
    pub subcommand: &'static str,
}

impl SearchWitness {
    /// Shell-ready reproduction command for the witness saved at `file`.
    pub fn reproduce(&self, file: &str) -> String {
        let mut parts = vec!["plausia".to_string(), self.subcommand.to_string(), file.to_string()];
        parts.extend(self.command.iter().map(|a| {
            if a.contains([' ', '{', '(', '|']) {
                format!("'{a}'")
            } else {
                a.clone()
            }
        }));
        parts.join(" ")
    }
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub target: Target,
    pub dropped: Vec<AxiomId>,
    pub examined: usize,
    /// Models satisfying every kept hypothesis.
    pub eligible: usize,
    pub witnesses: Vec<SearchWitness>,
    /// The corpus was cut off by the budget.
    pub exhausted: bool,
}

fn render_report(model: &EpistemicModel, r: &CheckReport) -> serde_json::Value {
    serde_json::to_value(r.render(model.states(), model.agents())).expect("reports serialize")
}

fn drop_args(dropped: &[AxiomId]) -> Vec<String> {
    if dropped.is_empty() {
        Vec::new()
    } else {
        let names: Vec<&str> = dropped.iter().map(|a| a.as_str()).collect();
        vec!["--drop".into(), names.join(",")]
    }
}

/// `Ok(true)` when every kept hypothesis passes.
fn hypotheses_hold(model: &EpistemicModel, ids: &[AxiomId], opts: &AxiomOptions) -> bool {
    ids.is_empty() || axioms::run_suite(model, ids, opts).iter().all(CheckReport::passed)
}

/// Checks one model: `(eligible, witness)`.
pub fn check_target(
    model: &EpistemicModel,
    target: Target,
    dropped: &[AxiomId],
    thresholds: &[Value],
    opts: &AxiomOptions,
) -> Result<(bool, Option<SearchWitness>), SearchError> {
    let kept: Vec<AxiomId> = target
        .hypotheses()
        .into_iter()
        .filter(|a| !dropped.contains(a))
        .collect();
    match target {
        Target::Axiom(_) | Target::M3Satisfiability => {
            if model.common_prior().is_none() || !hypotheses_hold(model, &kept, opts) {
                return Ok((false, None));
            }
            let (report, token) = match target {
                Target::Axiom(a) => (axioms::check_axiom(model, a, opts), a.as_str().to_string()),
                _ => (axioms::check_m3_satisfiability(model, opts), "M3-SAT".to_string()),
            };
            let witness = report.failed().then(|| SearchWitness {
                model: model.clone(),
                summary: format!("{target} fails with {} failing tuple(s)", report.failures),
                violation: render_report(model, &report),
                command: vec!["--only".into(), token],
                subcommand: "axioms",
            });
            Ok((true, witness))
        }
        Target::Theorem(theorem) => {
            let checker = AgreementChecker::new(model, opts.clone());
            let thresholds = if thresholds.is_empty() {
                default_thresholds(model)
            } else {
                thresholds.to_vec()
            };
            let probe = checker.check_with(theorem, model.full(), thresholds.first(), dropped)?;
            if probe.outcome == Outcome::NotApplicable {
                return Ok((false, None));
            }
            let sweep_d: &[Value] = if theorem.needs_threshold() { &thresholds } else { &[] };
            for e in Event::all(model.num_states()) {
                let ds: Vec<Option<&Value>> = if theorem.needs_threshold() {
                    sweep_d.iter().map(Some).collect()
                } else {
                    vec![None]
                };
                for d in ds {
                    let v = checker.check_with(theorem, e, d, dropped)?;
                    if v.outcome == Outcome::Violated {
                        let states = model.states();
                        let mut command = vec![
                            "--theorem".to_string(),
                            theorem.to_string(),
                            "--event".to_string(),
                            states.render(e),
                        ];
                        if let Some(d) = d {
                            command.extend(["--threshold".to_string(), d.to_string()]);
                        }
                        command.extend(drop_args(dropped));
                        let rendered = v.render(states, model.agents());
                        return Ok((
                            true,
                            Some(SearchWitness {
                                model: model.clone(),
                                summary: format!(
                                    "{theorem} violated for E={}{}",
                                    states.render(e),
                                    d.map(|d| format!(" at d={d}")).unwrap_or_default()
                                ),
                                violation: serde_json::to_value(rendered).expect("verdicts serialize"),
                                command,
                                subcommand: "agreement",
                            }),
                        ));
                    }
                }
            }
            Ok((true, None))
        }
    }
}

const BATCH: usize = 64;

/// Streams the corpus, keeps models satisfying the non-dropped hypotheses,
/// runs the target checker and collects up to `params.max_witnesses`
/// violations in corpus order.
pub fn mine_counterexamples(
    target: Target,
    dropped: &[AxiomId],
    params: &SearchParams,
) -> Result<SearchOutcome, SearchError> {
    let corpus = corpus(params)?;
    let opts = AxiomOptions {
        seed: params.seed,
        ..AxiomOptions::default()
    };
    let mut outcome = SearchOutcome {
        target,
        dropped: dropped.to_vec(),
        examined: 0,
        eligible: 0,
        witnesses: Vec::new(),
        exhausted: corpus.exhausted,
    };
    for batch in corpus.models.chunks(BATCH) {
        let results: Vec<Result<(bool, Option<SearchWitness>), SearchError>> = batch
            .par_iter()
            .map(|m| check_target(m, target, dropped, &params.thresholds, &opts))
            .collect();
        for r in results {
            let (eligible, witness) = r?;
            outcome.examined += 1;
            outcome.eligible += usize::from(eligible);
            if let Some(w) = witness {
                outcome.witnesses.push(w);
                if outcome.witnesses.len() >= params.max_witnesses {
                    return Ok(outcome);
                }
            }
        }
    }
    Ok(outcome)
}

#[derive(Debug, Clone, Serialize)]
pub struct ManifestEntry {
    pub file: String,
    pub model: String,
    pub summary: String,
    pub reproduce: String,
    pub violation: serde_json::Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub target: String,
    pub dropped: Vec<String>,
    pub family: Family,
    pub seed: u64,
    pub examined: usize,
    pub eligible: usize,
    pub exhausted: bool,
    pub witnesses: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn new(outcome: &SearchOutcome, params: &SearchParams) -> Self {
        Manifest {
            target: outcome.target.to_string(),
            dropped: outcome.dropped.iter().map(|a| a.to_string()).collect(),
            family: params.family,
            seed: params.seed,
            examined: outcome.examined,
            eligible: outcome.eligible,
            exhausted: outcome.exhausted,
            witnesses: outcome
                .witnesses
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let file = witness_file_name(k);
                    ManifestEntry {
                        reproduce: w.reproduce(&file),
                        file,
                        model: w.model.name().to_string(),
                        summary: w.summary.clone(),
                        violation: w.violation.clone(),
                    }
                })
                .collect(),
        }
    }
}

pub fn witness_file_name(k: usize) -> String {
    format!("witness_{k:03}.epm")
}

/// Writes each witness as `witness_NNN.epm` and a `manifest.json` into `dir`.
pub fn write_witnesses(outcome: &SearchOutcome, params: &SearchParams, dir: &Path) -> Result<Manifest, SearchError> {
    let io = |e: std::io::Error| SearchError::Io(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    for (k, w) in outcome.witnesses.iter().enumerate() {
        fs::write(dir.join(witness_file_name(k)), modelfile::serialize(&w.model)).map_err(io)?;
    }
    let manifest = Manifest::new(outcome, params);
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(dir.join("manifest.json"), json + "\n").map_err(io)?;
    Ok(manifest)
}

/// Re-runs `target` on a witness model; `true` when the violation reappears.
pub fn replay(model: &EpistemicModel, target: Target, dropped: &[AxiomId], params: &SearchParams) -> Result<bool, SearchError> {
    let opts = AxiomOptions {
        seed: params.seed,
        ..AxiomOptions::default()
    };
    Ok(check_target(model, target, dropped, &params.thresholds, &opts)?.1.is_some())
}
