//! Finite epistemic plausibility models.
//!
//! `F` is always the full powerset of `W`. The learnable family `F′` is
//! derived from the measures: an event is learnable when every agent's
//! measure gives it positive mass (both components for product priors).

use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::event::{Event, StateSpace, MAX_ADDRESSABLE_STATES};
use crate::report::{CheckReport, ReportBuilder, Subject, Witness};
use crate::values::{Domain, Rational, Value};

/// Default cap on `|W|` for loaded models.
pub const DEFAULT_MAX_STATES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("a model needs at least one state")]
    NoStates,
    #[error("{0} states exceed the addressable maximum of {MAX_ADDRESSABLE_STATES}")]
    TooManyStates(usize),
    #[error("a model needs at least one agent")]
    NoAgents,
    #[error("{agents} agents but {partitions} partitions")]
    PartitionCount { agents: usize, partitions: usize },
    #[error("{agents} agents but {measures} measures")]
    MeasureCount { agents: usize, measures: usize },
    #[error("prior has {got} entries for {states} states")]
    PriorLength { states: usize, got: usize },
    #[error("unknown agent index {0}")]
    UnknownAgent(usize),
    #[error("unknown state index {0}")]
    UnknownState(usize),
}

/// An agent's information partition `Π_i`.
///
/// Construction does not enforce the partition laws so that malformed
/// inputs can still be reported on by [`validate_model`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<Event>,
}

impl Partition {
    pub fn new(blocks: Vec<Event>) -> Self {
        Partition { blocks }
    }

    /// Builds a partition from a block label per state (e.g. a restricted
    /// growth string).
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut blocks: BTreeMap<usize, Event> = BTreeMap::new();
        for (state, &label) in labels.iter().enumerate() {
            let e = blocks.entry(label).or_default();
            *e = *e | Event::singleton(state);
        }
        Partition::new(blocks.into_values().collect())
    }

    pub fn blocks(&self) -> &[Event] {
        &self.blocks
    }

    /// `Π_i(w)`.
    pub fn block_of(&self, state: usize) -> Option<Event> {
        self.blocks.iter().copied().find(|b| b.contains(state))
    }

    /// Blocks sorted by least member.
    pub fn canonical(&self) -> Partition {
        let mut blocks = self.blocks.clone();
        blocks.sort_by_key(|b| (b.first(), b.bits()));
        Partition { blocks }
    }
}

/// Explicit conditional table over a base prior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableMeasure {
    pub base: Vec<Rational>,
    /// `(E, F) ↦ Pl(E | F)`, consulted before the base conditional.
    pub overrides: BTreeMap<(Event, Event), Value>,
}

/// A conditional plausibility measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Measure {
    /// Conditional probability from a prior over states.
    Prior(Vec<Rational>),
    /// `Pl(A|B) = (p(A|B), q(A|B))`.
    ProductPrior(Vec<Rational>, Vec<Rational>),
    Table(TableMeasure),
}

pub fn mass(prior: &[Rational], event: Event) -> Rational {
    event
        .states()
        .filter_map(|s| prior.get(s))
        .fold(Rational::zero(), |acc, p| acc + p)
}

impl Measure {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Measure::Prior(_) => "prior",
            Measure::ProductPrior(..) => "product-prior",
            Measure::Table(_) => "table",
        }
    }

    /// Whether the measure alone admits conditioning on `f`.
    pub fn admits(&self, f: Event) -> bool {
        match self {
            Measure::Prior(p) => mass(p, f).is_positive(),
            Measure::ProductPrior(p, q) => mass(p, f).is_positive() && mass(q, f).is_positive(),
            Measure::Table(t) => mass(&t.base, f).is_positive(),
        }
    }

    fn priors(&self) -> Vec<&[Rational]> {
        match self {
            Measure::Prior(p) => vec![p],
            Measure::ProductPrior(p, q) => vec![p, q],
            Measure::Table(t) => vec![&t.base],
        }
    }

    /// `Pl(E | F)`; `None` when `F ∉ F′`.
    pub fn cond(&self, algebra: &PopperAlgebra, e: Event, f: Event) -> Option<Value> {
        if !algebra.is_learnable(f) {
            return None;
        }
        Some(self.cond_unchecked(e, f))
    }

    /// `Pl(E | F)` assuming `F` has positive mass.
    pub(crate) fn cond_unchecked(&self, e: Event, f: Event) -> Value {
        match self {
            Measure::Prior(p) => Value::Scalar(mass(p, e & f) / mass(p, f)),
            Measure::ProductPrior(p, q) => {
                Value::Pair(mass(p, e & f) / mass(p, f), mass(q, e & f) / mass(q, f))
            }
            Measure::Table(t) => match t.overrides.get(&(e, f)) {
                Some(v) => v.clone(),
                None => Value::Scalar(mass(&t.base, e & f) / mass(&t.base, f)),
            },
        }
    }
}

/// The learnable family `F′` (the full algebra `F` is implicit).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PopperAlgebra {
    states: usize,
    learnable: Vec<bool>,
}

impl PopperAlgebra {
    pub fn from_measures<'a, I: IntoIterator<Item = &'a Measure>>(states: usize, measures: I) -> Self {
        let measures: Vec<&Measure> = measures.into_iter().collect();
        let learnable = Event::all(states)
            .map(|f| !f.is_empty() && measures.iter().all(|m| m.admits(f)))
            .collect();
        PopperAlgebra { states, learnable }
    }

    pub fn is_learnable(&self, f: Event) -> bool {
        self.learnable
            .get(f.bits() as usize)
            .copied()
            .unwrap_or(false)
    }

    pub fn learnable_events(&self) -> impl Iterator<Item = Event> + '_ {
        self.learnable
            .iter()
            .enumerate()
            .filter(|(_, &l)| l)
            .map(|(bits, _)| Event::from_bits(bits as u64))
    }

    pub fn states(&self) -> usize {
        self.states
    }
}

/// Either one measure shared by every agent, or one per agent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Priors {
    Common(Measure),
    PerAgent(Vec<Measure>),
}

/// `⟨W, (Π_i), F, F′, (Pl_i)⟩` over a value domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpistemicModel {
    name: String,
    domain: Domain,
    states: StateSpace,
    agents: Vec<String>,
    partitions: Vec<Partition>,
    priors: Priors,
    events: BTreeMap<String, Event>,
    algebra: PopperAlgebra,
}

impl EpistemicModel {
    /// Assembles a model, checking only shape. Semantic conditions are
    /// checked by [`validate_model`].
    pub fn new(
        name: impl Into<String>,
        domain: Domain,
        states: StateSpace,
        agents: Vec<String>,
        partitions: Vec<Partition>,
        priors: Priors,
    ) -> Result<Self, ModelError> {
        let n = states.len();
        if n == 0 {
            return Err(ModelError::NoStates);
        }
        if n > MAX_ADDRESSABLE_STATES {
            return Err(ModelError::TooManyStates(n));
        }
        if agents.is_empty() {
            return Err(ModelError::NoAgents);
        }
        if partitions.len() != agents.len() {
            return Err(ModelError::PartitionCount {
                agents: agents.len(),
                partitions: partitions.len(),
            });
        }
        let measures: Vec<&Measure> = match &priors {
            Priors::Common(m) => vec![m],
            Priors::PerAgent(ms) => {
                if ms.len() != agents.len() {
                    return Err(ModelError::MeasureCount {
                        agents: agents.len(),
                        measures: ms.len(),
                    });
                }
                ms.iter().collect()
            }
        };
        for m in &measures {
            for p in m.priors() {
                if p.len() != n {
                    return Err(ModelError::PriorLength {
                        states: n,
                        got: p.len(),
                    });
                }
            }
        }
        let algebra = PopperAlgebra::from_measures(n, measures);
        Ok(EpistemicModel {
            name: name.into(),
            domain,
            states,
            agents,
            partitions,
            priors,
            events: BTreeMap::new(),
            algebra,
        })
    }

    pub fn with_events(mut self, events: BTreeMap<String, Event>) -> Self {
        self.events = events;
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn states(&self) -> &StateSpace {
        &self.states
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn full(&self) -> Event {
        self.states.full()
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn num_agents(&self) -> usize {
        self.agents.len()
    }

    pub fn agent_index(&self, label: &str) -> Option<usize> {
        self.agents.iter().position(|a| a == label)
    }

    pub fn partitions(&self) -> &[Partition] {
        &self.partitions
    }

    pub fn partition(&self, agent: usize) -> Result<&Partition, ModelError> {
        self.partitions
            .get(agent)
            .ok_or(ModelError::UnknownAgent(agent))
    }

    pub fn priors(&self) -> &Priors {
        &self.priors
    }

    pub fn events(&self) -> &BTreeMap<String, Event> {
        &self.events
    }

    pub fn algebra(&self) -> &PopperAlgebra {
        &self.algebra
    }

    pub fn is_learnable(&self, f: Event) -> bool {
        self.algebra.is_learnable(f)
    }

    /// `Pl_i`.
    pub fn measure(&self, agent: usize) -> Result<&Measure, ModelError> {
        match &self.priors {
            Priors::Common(m) if agent < self.agents.len() => Ok(m),
            Priors::PerAgent(ms) => ms.get(agent).ok_or(ModelError::UnknownAgent(agent)),
            _ => Err(ModelError::UnknownAgent(agent)),
        }
    }

    /// The shared measure, if all agents use the same one.
    pub fn common_prior(&self) -> Option<&Measure> {
        match &self.priors {
            Priors::Common(m) => Some(m),
            Priors::PerAgent(ms) => {
                let first = ms.first()?;
                ms.iter().all(|m| m == first).then_some(first)
            }
        }
    }

    /// One `(agent, measure)` pair per distinct measure, lowest agent first.
    pub fn distinct_measures(&self) -> Vec<(usize, &Measure)> {
        match &self.priors {
            Priors::Common(m) => vec![(0, m)],
            Priors::PerAgent(ms) => {
                let mut out: Vec<(usize, &Measure)> = Vec::new();
                for (i, m) in ms.iter().enumerate() {
                    if !out.iter().any(|(_, seen)| *seen == m) {
                        out.push((i, m));
                    }
                }
                out
            }
        }
    }

    /// `Pl_i(E | F)`, `None` when undefined.
    pub fn cond(&self, agent: usize, e: Event, f: Event) -> Result<Option<Value>, ModelError> {
        Ok(self.measure(agent)?.cond(&self.algebra, e, f))
    }

    /// `Pl_{i,w}(E) = Pl_i(E | Π_i(w))`.
    pub fn posterior(&self, agent: usize, state: usize, e: Event) -> Result<Option<Value>, ModelError> {
        if state >= self.num_states() {
            return Err(ModelError::UnknownState(state));
        }
        let block = self
            .partition(agent)?
            .block_of(state)
            .ok_or(ModelError::UnknownState(state))?;
        self.cond(agent, e, block)
    }

    /// Every distinct conditional value `Pl_i(E|F)` with `F ∈ F′`, sorted.
    pub fn realized_values(&self) -> Vec<Value> {
        let mut out: Vec<Value> = Vec::new();
        let learnable: Vec<Event> = self.algebra.learnable_events().collect();
        for (_, m) in self.distinct_measures() {
            for f in &learnable {
                for e in Event::all(self.num_states()) {
                    out.push(m.cond_unchecked(e, *f));
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Every distinct defined posterior `Pl_{i,w}(E)`, sorted.
    pub fn realized_posteriors(&self) -> Vec<Value> {
        let mut out: Vec<Value> = Vec::new();
        for (i, part) in self.partitions.iter().enumerate() {
            for block in part.blocks() {
                for e in Event::all(self.num_states()) {
                    if let Ok(Some(v)) = self.cond(i, e, *block) {
                        out.push(v);
                    }
                }
            }
        }
        out.sort();
        out.dedup();
        out
    }
}

impl EpistemicModel {
    /// Thresholds at which every distinct `d`-belief operator is attained:
    /// the realized posteriors, or for the product domain every pair of
    /// realized components. `{v ≥ d}` over the realized posteriors only
    /// changes at these values.
    pub fn threshold_candidates(&self) -> Vec<Value> {
        let realized = self.realized_posteriors();
        if !self.domain.is_product() {
            return realized;
        }
        let mut firsts: Vec<Rational> = Vec::new();
        let mut seconds: Vec<Rational> = Vec::new();
        for v in &realized {
            if let Value::Pair(a, b) = v {
                firsts.push(a.clone());
                seconds.push(b.clone());
            }
        }
        for c in [&mut firsts, &mut seconds] {
            c.sort();
            c.dedup();
        }
        firsts
            .iter()
            .flat_map(|a| seconds.iter().map(move |b| Value::Pair(a.clone(), b.clone())))
            .collect()
    }
}

/// Structural checks: partitions, Popper conditions, normalization,
/// `Π_i(w) ∈ F′`, domain membership and table additivity.
pub fn validate_model(model: &EpistemicModel) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Validation);
    let full = model.full();
    let states = model.states();

    for (k, name) in states.names().iter().enumerate() {
        rep.examine();
        if states.names()[..k].contains(name) {
            rep.fail(Witness::new(format!("duplicate state label `{name}`")).event("state", Event::singleton(k)));
        }
    }
    for (k, name) in model.agents().iter().enumerate() {
        rep.examine();
        if model.agents()[..k].contains(name) {
            rep.fail(Witness::new(format!("duplicate agent label `{name}`")).agent(k));
        }
    }

    for (i, part) in model.partitions().iter().enumerate() {
        let mut covered = Event::EMPTY;
        for block in part.blocks() {
            rep.examine();
            if block.is_empty() {
                rep.fail(Witness::new("empty partition block").agent(i));
            }
            if !block.is_subset(full) {
                rep.fail(Witness::new("partition block outside W").agent(i).event("block", *block));
            }
            let overlap = covered & *block;
            for s in overlap.states() {
                rep.fail(
                    Witness::new("state lies in two blocks")
                        .agent(i)
                        .event("state", Event::singleton(s))
                        .event("block", *block),
                );
            }
            covered = covered | *block;
        }
        let missing = full - covered;
        if !missing.is_empty() {
            rep.fail(Witness::new("partition does not cover W").agent(i).event("missing", missing));
        }
    }

    let domain = model.domain();
    for (i, m) in model.distinct_measures() {
        rep.examine();
        let shape_ok = match m {
            Measure::ProductPrior(..) => domain.is_product(),
            _ => !domain.is_product(),
        };
        if !shape_ok {
            rep.fail(
                Witness::new(format!("{} measure cannot take values in {domain}", m.kind_name())).agent(i),
            );
        }
        for prior in m.priors() {
            rep.examine();
            if let Some((s, _)) = prior.iter().enumerate().find(|(_, p)| p.is_negative()) {
                rep.fail(Witness::new("negative prior mass").agent(i).event("state", Event::singleton(s)));
            }
            let total = mass(prior, full);
            if !total.is_one() {
                rep.fail(
                    Witness::new("prior does not sum to 1")
                        .agent(i)
                        .value("total", Some(Value::Scalar(total))),
                );
            }
        }
        if let Measure::Table(t) = m {
            validate_table(model, i, t, &mut rep);
        }
    }

    // Popper algebra: members nonempty and closed upward.
    let algebra = model.algebra();
    for f in algebra.learnable_events() {
        rep.examine();
        if f.is_empty() {
            rep.fail(Witness::new("empty event is learnable").event("F", f));
        }
        let outside = full - f;
        for extra in outside.subsets() {
            let g = f | extra;
            if !algebra.is_learnable(g) {
                rep.fail(Witness::new("F′ not closed under supersets").event("F", f).event("superset", g));
            }
        }
    }

    for (i, part) in model.partitions().iter().enumerate() {
        for block in part.blocks() {
            rep.examine();
            if !block.is_empty() && !algebra.is_learnable(*block) {
                rep.fail(Witness::new("information set not learnable").agent(i).event("block", *block));
            }
        }
    }

    if let Domain::Grid(_) = domain {
        validate_grid(model, &mut rep);
    }

    for (name, e) in model.events() {
        rep.examine();
        if !e.is_subset(full) {
            rep.fail(Witness::new(format!("named event `{name}` leaves W")));
        }
    }
    rep.finish()
}

fn validate_table(model: &EpistemicModel, agent: usize, t: &TableMeasure, rep: &mut ReportBuilder) {
    let domain = model.domain();
    let full = model.full();
    let algebra = model.algebra();
    let measure = Measure::Table(t.clone());
    let mut conditioned: Vec<Event> = Vec::new();
    for ((e, f), v) in &t.overrides {
        rep.examine();
        if !e.is_subset(full) || !f.is_subset(full) {
            rep.fail(Witness::new("override mentions states outside W").agent(agent));
            continue;
        }
        if !algebra.is_learnable(*f) {
            rep.fail(
                Witness::new("override conditions on an event outside F′")
                    .agent(agent)
                    .event("E", *e)
                    .event("F", *f),
            );
        }
        if !domain.contains(v) {
            rep.fail(
                Witness::new(format!("override value outside {domain}"))
                    .agent(agent)
                    .event("E", *e)
                    .event("F", *f)
                    .value("value", Some(v.clone())),
            );
        }
        if !conditioned.contains(f) {
            conditioned.push(*f);
        }
    }
    // Finite additivity on every conditioning event the table touches.
    for f in conditioned.into_iter().filter(|f| algebra.is_learnable(*f)) {
        for y in Event::all(model.num_states()) {
            for x in (full - y).subsets() {
                if x.bits() > y.bits() {
                    continue;
                }
                rep.examine();
                let lhs = measure.cond_unchecked(x | y, f);
                let rhs = domain
                    .oplus(&measure.cond_unchecked(x, f), &measure.cond_unchecked(y, f))
                    .ok()
                    .flatten();
                if rhs.as_ref() != Some(&lhs) {
                    rep.fail(
                        Witness::new("table breaks finite additivity")
                            .agent(agent)
                            .event("X", x)
                            .event("Y", y)
                            .event("Z", f)
                            .value("Pl(X∪Y|Z)", Some(lhs))
                            .value("Pl(X|Z)⊕Pl(Y|Z)", rhs),
                    );
                }
            }
        }
    }
}

/// Grid domains need every realized conditional on the grid. Above eight
/// states only information sets and `W` are inspected.
fn validate_grid(model: &EpistemicModel, rep: &mut ReportBuilder) {
    let domain = model.domain();
    let n = model.num_states();
    let conditioning: Vec<Event> = if n <= 8 {
        model.algebra().learnable_events().collect()
    } else {
        let mut fs: Vec<Event> = model
            .partitions()
            .iter()
            .flat_map(|p| p.blocks().iter().copied())
            .chain(std::iter::once(model.full()))
            .filter(|f| model.is_learnable(*f))
            .collect();
        fs.sort();
        fs.dedup();
        fs
    };
    for (i, m) in model.distinct_measures() {
        for f in &conditioning {
            for e in Event::all(n) {
                rep.examine();
                let v = m.cond_unchecked(e, *f);
                if !domain.contains(&v) {
                    rep.fail(
                        Witness::new(format!("conditional off {domain}"))
                            .agent(i)
                            .event("E", e)
                            .event("F", *f)
                            .value("value", Some(v)),
                    );
                    return;
                }
            }
        }
    }
}
