//! Model-level axiom checkers: CP1–CP4, acceptability, A3, A4, M3, CP6, CP7
//! and the M1+M3+M4 ⇒ CP6 implication.
//!
//! Checks are exhaustive when `|W|` is at most the exhaustiveness cap and use
//! a seeded sample of events above it.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::event::Event;
use crate::model::EpistemicModel;
use crate::operators;
use crate::report::{AxiomId, CheckReport, ReportBuilder, Subject, Verdict, Witness};
use crate::values::{axiom_sample, check_domain_axioms, Comparison, Domain, Value};

/// Largest `|W|` checked exhaustively unless overridden.
pub const DEFAULT_EXHAUSTIVE_CAP: usize = 6;

/// Environment variable overriding the exhaustiveness cap.
pub const MAX_STATES_ENV: &str = "PLAUSIA_MAX_STATES";

/// Random subsets drawn per event when sampling.
const SAMPLED_SUBSETS: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AxiomOptions {
    /// Skip A3 tuples where both summands are `⊥`.
    pub exempt_bot_bot: bool,
    pub exhaustive_cap: usize,
    pub seed: u64,
    /// CP7 thresholds checked before the realized posteriors.
    pub thresholds: Vec<Value>,
}

impl Default for AxiomOptions {
    fn default() -> Self {
        AxiomOptions {
            exempt_bot_bot: false,
            exhaustive_cap: DEFAULT_EXHAUSTIVE_CAP,
            seed: 0,
            thresholds: Vec::new(),
        }
    }
}

impl AxiomOptions {
    /// Defaults with the cap taken from `PLAUSIA_MAX_STATES` when set.
    pub fn from_env() -> Self {
        let mut opts = AxiomOptions::default();
        if let Some(cap) = std::env::var(MAX_STATES_ENV)
            .ok()
            .and_then(|v| v.trim().parse().ok())
        {
            opts.exhaustive_cap = cap;
        }
        opts
    }
}

/// Exhaustive or seeded enumeration of events and subsets.
struct Sampler {
    n: usize,
    exhaustive: bool,
    rng: ChaCha8Rng,
}

impl Sampler {
    fn new(model: &EpistemicModel, opts: &AxiomOptions) -> Self {
        Sampler {
            n: model.num_states(),
            exhaustive: model.num_states() <= opts.exhaustive_cap,
            rng: ChaCha8Rng::seed_from_u64(opts.seed),
        }
    }

    /// Subsets of `e`: all of them, or `∅`, `e` and a random selection.
    fn subsets(&mut self, e: Event) -> Vec<Event> {
        if self.exhaustive {
            return e.subsets().collect();
        }
        let mut out = vec![Event::EMPTY, e];
        for _ in 0..SAMPLED_SUBSETS {
            out.push(Event::from_bits(self.rng.gen::<u64>()) & e);
        }
        out.sort();
        out.dedup();
        out
    }

    fn events(&mut self) -> Vec<Event> {
        let full = Event::full(self.n);
        self.subsets(full)
    }

    /// Members of `F′`, always including partition blocks and `W`.
    fn learnable(&mut self, model: &EpistemicModel) -> Vec<Event> {
        if self.exhaustive {
            return model.algebra().learnable_events().collect();
        }
        let mut out = self.events();
        out.extend(model.partitions().iter().flat_map(|p| p.blocks().iter().copied()));
        out.retain(|f| model.is_learnable(*f));
        out.sort();
        out.dedup();
        out
    }

    fn note(&self, rep: &mut ReportBuilder) {
        if !self.exhaustive {
            rep.note(format!("|W| = {} above the exhaustiveness cap; events sampled", self.n));
        }
    }
}

fn geq(domain: &Domain, a: &Value, b: &Value) -> bool {
    domain.geq(a, b)
}

/// Agents whose measures are checked: one representative per distinct measure.
fn measure_agents(model: &EpistemicModel) -> Vec<usize> {
    model.distinct_measures().into_iter().map(|(i, _)| i).collect()
}

fn cond(model: &EpistemicModel, i: usize, e: Event, f: Event) -> Option<Value> {
    model.cond(i, e, f).ok().flatten()
}

/// CP1–CP4, in that order.
pub fn check_cp(model: &EpistemicModel, opts: &AxiomOptions) -> Vec<CheckReport> {
    vec![
        check_cp1(model, opts),
        check_cp2(model, opts),
        check_cp3(model, opts),
        check_cp4(model, opts),
    ]
}

/// `Pl_i(F | F) = ⊤`.
pub fn check_cp1(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::CP1));
    let mut s = Sampler::new(model, opts);
    s.note(&mut rep);
    let top = model.domain().top();
    for i in measure_agents(model) {
        for f in s.learnable(model) {
            rep.examine();
            let v = cond(model, i, f, f);
            if v.as_ref() != Some(&top) {
                rep.fail(Witness::new("Pl(F|F) ≠ ⊤").agent(i).event("F", f).value("Pl(F|F)", v));
            }
        }
    }
    rep.finish()
}

/// `Pl_i(∅ | F) = ⊥`.
pub fn check_cp2(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::CP2));
    let mut s = Sampler::new(model, opts);
    s.note(&mut rep);
    let bot = model.domain().bot();
    for i in measure_agents(model) {
        for f in s.learnable(model) {
            rep.examine();
            let v = cond(model, i, Event::EMPTY, f);
            if v.as_ref() != Some(&bot) {
                rep.fail(Witness::new("Pl(∅|F) ≠ ⊥").agent(i).event("F", f).value("Pl(∅|F)", v));
            }
        }
    }
    rep.finish()
}

/// `X ⊆ Y ⇒ Pl_i(X | F) ≤ Pl_i(Y | F)`.
pub fn check_cp3(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::CP3));
    let mut s = Sampler::new(model, opts);
    s.note(&mut rep);
    let domain = model.domain();
    for i in measure_agents(model) {
        for f in s.learnable(model) {
            for y in s.events() {
                let Some(vy) = cond(model, i, y, f) else { continue };
                for x in s.subsets(y) {
                    rep.examine();
                    let vx = cond(model, i, x, f);
                    if !vx.as_ref().is_some_and(|vx| domain.leq(vx, &vy)) {
                        rep.fail(
                            Witness::new("X ⊆ Y but Pl(X|F) ≰ Pl(Y|F)")
                                .agent(i)
                                .event("X", x)
                                .event("Y", y)
                                .event("F", f)
                                .value("Pl(X|F)", vx)
                                .value("Pl(Y|F)", Some(vy.clone())),
                        );
                    }
                }
            }
        }
    }
    rep.finish()
}

/// `Pl_i(X | F) = Pl_i(X ∩ F | F)`.
pub fn check_cp4(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::CP4));
    let mut s = Sampler::new(model, opts);
    s.note(&mut rep);
    for i in measure_agents(model) {
        for f in s.learnable(model) {
            for x in s.events() {
                rep.examine();
                let a = cond(model, i, x, f);
                let b = cond(model, i, x & f, f);
                if a != b {
                    rep.fail(
                        Witness::new("Pl(X|F) ≠ Pl(X∩F|F)")
                            .agent(i)
                            .event("X", x)
                            .event("F", f)
                            .value("Pl(X|F)", a)
                            .value("Pl(X∩F|F)", b),
                    );
                }
            }
        }
    }
    rep.finish()
}

/// Acceptability: `Pl_i(E | F) ≠ ⊥ ⇒ E ∩ F ∈ F′`.
pub fn check_acceptability(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::ACC));
    let mut s = Sampler::new(model, opts);
    s.note(&mut rep);
    let bot = model.domain().bot();
    for i in measure_agents(model) {
        for f in s.learnable(model) {
            for e in s.events() {
                rep.examine();
                let v = cond(model, i, e, f);
                if v.as_ref().is_some_and(|v| *v != bot) && !model.is_learnable(e & f) {
                    rep.fail(
                        Witness::new("Pl(E|F) ≠ ⊥ but E∩F ∉ F′")
                            .agent(i)
                            .event("E", e)
                            .event("F", f)
                            .value("Pl(E|F)", v),
                    );
                }
            }
        }
    }
    rep.finish()
}

/// A3: `X ∩ Y = ∅ ⇒ Pl_i(X ∪ Y | Z) = Pl_i(X | Z) ⊕ Pl_i(Y | Z)`.
pub fn check_a3(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::A3));
    let mut s = Sampler::new(model, opts);
    s.note(&mut rep);
    let domain = model.domain();
    let full = model.full();
    let bot = domain.bot();
    for i in measure_agents(model) {
        for z in s.learnable(model) {
            for x in s.events() {
                for y in s.subsets(full - x) {
                    let (Some(vx), Some(vy)) = (cond(model, i, x, z), cond(model, i, y, z)) else {
                        continue;
                    };
                    if opts.exempt_bot_bot && vx == bot && vy == bot {
                        rep.skip();
                        continue;
                    }
                    rep.examine();
                    let sum = domain.oplus(&vx, &vy).ok().flatten();
                    let union = cond(model, i, x | y, z);
                    if sum.is_none() || sum != union {
                        rep.fail(
                            Witness::new("Pl(X∪Y|Z) ≠ Pl(X|Z) ⊕ Pl(Y|Z)")
                                .agent(i)
                                .event("X", x)
                                .event("Y", y)
                                .event("Z", z)
                                .value("Pl(X|Z)", Some(vx))
                                .value("Pl(Y|Z)", Some(vy))
                                .value("Pl(X|Z)⊕Pl(Y|Z)", sum)
                                .value("Pl(X∪Y|Z)", union),
                        );
                    }
                }
            }
        }
    }
    if opts.exempt_bot_bot {
        rep.note("tuples with Pl(X|Z) = Pl(Y|Z) = ⊥ exempted");
    }
    rep.finish()
}

/// Families of at least two pairwise-disjoint members of `F′`.
fn disjoint_families(model: &EpistemicModel, sampler: &mut Sampler) -> Vec<Vec<Event>> {
    let n = model.num_states();
    let mut out = Vec::new();
    if sampler.exhaustive {
        // Assign each state to no block, an existing block, or a new block.
        fn go(state: usize, n: usize, blocks: &mut Vec<Event>, model: &EpistemicModel, out: &mut Vec<Vec<Event>>) {
            if state == n {
                if blocks.len() >= 2 && blocks.iter().all(|b| model.is_learnable(*b)) {
                    out.push(blocks.clone());
                }
                return;
            }
            go(state + 1, n, blocks, model, out);
            for k in 0..blocks.len() {
                blocks[k] = blocks[k] | Event::singleton(state);
                go(state + 1, n, blocks, model, out);
                blocks[k] = blocks[k] - Event::singleton(state);
            }
            blocks.push(Event::singleton(state));
            go(state + 1, n, blocks, model, out);
            blocks.pop();
        }
        go(0, n, &mut Vec::new(), model, &mut out);
    } else {
        for _ in 0..SAMPLED_SUBSETS * SAMPLED_SUBSETS {
            let k = sampler.rng.gen_range(2..=n.clamp(2, 4));
            let mut blocks = vec![Event::EMPTY; k];
            for s in 0..n {
                let slot = sampler.rng.gen_range(0..=k);
                if slot < k {
                    blocks[slot] = blocks[slot] | Event::singleton(s);
                }
            }
            if blocks.iter().all(|b| model.is_learnable(*b)) {
                out.push(blocks);
            }
        }
        out.extend(
            model
                .partitions()
                .iter()
                .map(|p| p.blocks().to_vec())
                .filter(|bs| bs.len() >= 2 && bs.iter().all(|b| model.is_learnable(*b))),
        );
    }
    out
}

/// A4: for disjoint `S ⊆ F′`, `Pl_i(E | ⋃S)` lies between the greatest lower
/// bound and least upper bound of `{Pl_i(E | S) | S ∈ S}`.
pub fn check_a4(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::A4));
    let mut s = Sampler::new(model, opts);
    s.note(&mut rep);
    let domain = model.domain();
    let families = disjoint_families(model, &mut s);
    let events = s.events();
    for i in measure_agents(model) {
        for family in &families {
            let union = family.iter().fold(Event::EMPTY, |acc, b| acc | *b);
            for &e in &events {
                let parts: Option<Vec<Value>> = family.iter().map(|b| cond(model, i, e, *b)).collect();
                let Some(parts) = parts else { continue };
                rep.examine();
                let whole = cond(model, i, e, union);
                let lo = domain.meet(&parts);
                let hi = domain.join(&parts);
                let ok = match (&whole, &lo, &hi) {
                    (Some(v), Some(lo), Some(hi)) => domain.leq(lo, v) && domain.leq(v, hi),
                    _ => false,
                };
                if !ok {
                    let mut w = Witness::new("Pl(E|⋃S) outside the bounds realized on S")
                        .agent(i)
                        .event("E", e)
                        .event("⋃S", union);
                    for (k, b) in family.iter().enumerate() {
                        w = w.event(format!("S{}", k + 1), *b);
                    }
                    rep.fail(w.value("glb", lo).value("lub", hi).value("Pl(E|⋃S)", whole));
                }
            }
        }
    }
    rep.finish()
}

/// Nested chains `X ⊆ Y ⊆ Z` with `Y, Z ∈ F′`, in a fixed order.
fn chains(model: &EpistemicModel, s: &mut Sampler) -> Vec<(Event, Event, Event)> {
    let mut out = Vec::new();
    for z in s.learnable(model) {
        for y in s.subsets(z) {
            if !model.is_learnable(y) {
                continue;
            }
            for x in s.subsets(y) {
                out.push((x, y, z));
            }
        }
    }
    out
}

/// M3 with the domain multiplication: `Pl_i(X|Z) = Pl_i(X|Y) ⊗ Pl_i(Y|Z)`.
pub fn check_m3(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::M3));
    let mut s = Sampler::new(model, opts);
    s.note(&mut rep);
    let domain = model.domain();
    let chains = chains(model, &mut s);
    for i in measure_agents(model) {
        for &(x, y, z) in &chains {
            let (Some(xy), Some(yz), Some(xz)) = (cond(model, i, x, y), cond(model, i, y, z), cond(model, i, x, z)) else {
                continue;
            };
            rep.examine();
            let product = domain.otimes(&xy, &yz).ok().flatten();
            if product.as_ref() != Some(&xz) {
                rep.fail(
                    Witness::new("Pl(X|Z) ≠ Pl(X|Y) ⊗ Pl(Y|Z)")
                        .agent(i)
                        .event("X", x)
                        .event("Y", y)
                        .event("Z", z)
                        .value("Pl(X|Y)", Some(xy))
                        .value("Pl(Y|Z)", Some(yz))
                        .value("Pl(X|Y)⊗Pl(Y|Z)", product)
                        .value("Pl(X|Z)", Some(xz)),
                );
            }
        }
    }
    rep.finish()
}

/// Whether any function `⊗` could satisfy M3: fails when two chains share
/// `(Pl(X|Y), Pl(Y|Z))` but disagree on `Pl(X|Z)`.
pub fn check_m3_satisfiability(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::M3Satisfiability);
    let mut s = Sampler::new(model, opts);
    s.note(&mut rep);
    let chains = chains(model, &mut s);
    let mut table: BTreeMap<(Value, Value), (Value, usize, (Event, Event, Event))> = BTreeMap::new();
    for i in measure_agents(model) {
        for &(x, y, z) in &chains {
            let (Some(xy), Some(yz), Some(xz)) = (cond(model, i, x, y), cond(model, i, y, z), cond(model, i, x, z)) else {
                continue;
            };
            rep.examine();
            match table.get(&(xy.clone(), yz.clone())) {
                None => {
                    table.insert((xy, yz), (xz, i, (x, y, z)));
                }
                Some((first, j, (x1, y1, z1))) if *first != xz => {
                    rep.fail(
                        Witness::new("equal factors force different products")
                            .agent(*j)
                            .agent(i)
                            .event("X1", *x1)
                            .event("Y1", *y1)
                            .event("Z1", *z1)
                            .event("X2", x)
                            .event("Y2", y)
                            .event("Z2", z)
                            .value("Pl(X|Y)", Some(xy))
                            .value("Pl(Y|Z)", Some(yz))
                            .value("Pl(X1|Z1)", Some(first.clone()))
                            .value("Pl(X2|Z2)", Some(xz)),
                    );
                }
                Some(_) => {}
            }
        }
    }
    rep.finish()
}

/// CP6 over all `E_1, E_2 ⊆ A_1 ∩ A_2` with `A_1, A_2 ∈ F′`.
///
/// Quadruples with `A_1 ∩ A_2 ∉ F′` are skipped and counted.
pub fn check_cp6(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    if model.common_prior().is_none() {
        return CheckReport::not_applicable(Subject::Axiom(AxiomId::CP6), "no common prior");
    }
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::CP6));
    let mut s = Sampler::new(model, opts);
    s.note(&mut rep);
    let domain = model.domain();
    let bot = domain.bot();
    let learnable = s.learnable(model);
    let mut skipped_with_antecedent = 0u64;
    for &a1 in &learnable {
        for &a2 in &learnable {
            let meet = a1 & a2;
            let subsets = s.subsets(meet);
            let inside: Vec<(Event, Value, Value)> = subsets
                .iter()
                .filter_map(|&e| Some((e, cond(model, 0, e, a1)?, cond(model, 0, e, a2)?)))
                .collect();
            let antecedent: Vec<&(Event, Value, Value)> = inside
                .iter()
                .filter(|(_, v1, v2)| *v1 != bot && geq(&domain, v1, v2))
                .collect();
            let quads = (inside.len() * inside.len()) as u64;
            if !model.is_learnable(meet) {
                for _ in 0..quads {
                    rep.skip();
                }
                skipped_with_antecedent += (antecedent.len() * inside.len()) as u64;
                continue;
            }
            for _ in 0..quads {
                rep.examine();
            }
            if antecedent.is_empty() {
                continue;
            }
            for (e2, u1, u2) in &inside {
                if geq(&domain, u1, u2) {
                    continue;
                }
                for (e1, v1, v2) in &antecedent {
                    rep.fail(
                        Witness::new("⊥ ≠ Pl(E1|A1) ≥ Pl(E1|A2) but Pl(E2|A1) ≱ Pl(E2|A2)")
                            .event("A1", a1)
                            .event("A2", a2)
                            .event("E1", *e1)
                            .event("E2", *e2)
                            .value("Pl(E1|A1)", Some(v1.clone()))
                            .value("Pl(E1|A2)", Some(v2.clone()))
                            .value("Pl(E2|A1)", Some(u1.clone()))
                            .value("Pl(E2|A2)", Some(u2.clone())),
                    );
                }
            }
        }
    }
    if skipped_with_antecedent > 0 {
        rep.note(format!(
            "{skipped_with_antecedent} skipped quadruple(s) had A1∩A2 ∉ F′ with the antecedent holding"
        ));
    }
    rep.finish()
}

/// Thresholds for CP7: `extra` first, then
/// [`EpistemicModel::threshold_candidates`].
pub fn cp7_thresholds(model: &EpistemicModel, extra: &[Value]) -> Vec<Value> {
    let domain = model.domain();
    let mut out: Vec<Value> = Vec::new();
    for v in extra.iter().chain(model.threshold_candidates().iter()) {
        if domain.contains(v) && !out.contains(v) {
            out.push(v.clone());
        }
    }
    out
}

/// CP7: `Pl(E | B_i^d(E))` and `Pl(E | B_j^d(E))` are comparable, for the
/// thresholds of [`cp7_thresholds`].
pub fn check_cp7(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    check_cp7_at(model, &cp7_thresholds(model, &opts.thresholds), opts)
}

/// CP7 at exactly the given thresholds.
pub fn check_cp7_at(model: &EpistemicModel, thresholds: &[Value], opts: &AxiomOptions) -> CheckReport {
    if model.common_prior().is_none() {
        return CheckReport::not_applicable(Subject::Axiom(AxiomId::CP7), "no common prior");
    }
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::CP7));
    let mut s = Sampler::new(model, opts);
    s.note(&mut rep);
    let domain = model.domain();
    let n_agents = model.num_agents();
    let events = s.events();
    for d in thresholds.iter().filter(|d| domain.contains(d)) {
        for &e in &events {
            let reliab: Vec<(Event, Option<Value>)> = (0..n_agents)
                .map(|i| {
                    let b = operators::d_believes(model, i, d, e).unwrap_or(Event::EMPTY);
                    (b, cond(model, i, e, b))
                })
                .collect();
            for i in 0..n_agents {
                for j in i + 1..n_agents {
                    let ((bi, vi), (bj, vj)) = (&reliab[i], &reliab[j]);
                    let (Some(vi), Some(vj)) = (vi, vj) else {
                        rep.skip();
                        continue;
                    };
                    rep.examine();
                    if domain.compare(vi, vj) == Ok(Comparison::Incomparable) {
                        rep.fail(
                            Witness::new("Pl(E|B_i^d(E)) and Pl(E|B_j^d(E)) incomparable")
                                .agent(i)
                                .agent(j)
                                .event("E", e)
                                .event("B_i", *bi)
                                .event("B_j", *bj)
                                .value("d", Some(d.clone()))
                                .value("Pl(E|B_i)", Some(vi.clone()))
                                .value("Pl(E|B_j)", Some(vj.clone())),
                        );
                    }
                }
            }
        }
    }
    rep.finish()
}

/// Values the domain-level axioms are checked on for this model.
pub fn domain_sample(model: &EpistemicModel) -> Vec<Value> {
    axiom_sample(&model.domain(), &model.realized_values())
}

fn domain_report(model: &EpistemicModel, id: AxiomId) -> CheckReport {
    let subject = Subject::Axiom(id);
    check_domain_axioms(&model.domain(), &model.realized_values())
        .into_iter()
        .find(|r| r.subject == subject)
        .expect("domain axioms cover every domain-level id")
}

/// Runs one axiom.
pub fn check_axiom(model: &EpistemicModel, id: AxiomId, opts: &AxiomOptions) -> CheckReport {
    match id {
        AxiomId::CP1 => check_cp1(model, opts),
        AxiomId::CP2 => check_cp2(model, opts),
        AxiomId::CP3 => check_cp3(model, opts),
        AxiomId::CP4 => check_cp4(model, opts),
        AxiomId::ACC => check_acceptability(model, opts),
        AxiomId::A3 => check_a3(model, opts),
        AxiomId::A4 => check_a4(model, opts),
        AxiomId::M3 => check_m3(model, opts),
        AxiomId::CP6 => check_cp6(model, opts),
        AxiomId::CP7 => check_cp7(model, opts),
        AxiomId::A1 | AxiomId::A2 | AxiomId::M1 | AxiomId::M2 | AxiomId::M4 | AxiomId::ASSOC => {
            domain_report(model, id)
        }
    }
}

/// Runs the requested axioms (all when `only` is empty) concurrently and
/// returns the reports in [`AxiomId`] order.
pub fn run_suite(model: &EpistemicModel, only: &[AxiomId], opts: &AxiomOptions) -> Vec<CheckReport> {
    let mut ids: Vec<AxiomId> = if only.is_empty() {
        AxiomId::ALL.to_vec()
    } else {
        only.to_vec()
    };
    ids.sort();
    ids.dedup();
    let domain_ids: Vec<AxiomId> = ids.iter().copied().filter(|a| a.is_domain_level()).collect();
    let mut reports: Vec<CheckReport> = if domain_ids.is_empty() {
        Vec::new()
    } else {
        check_domain_axioms(&model.domain(), &model.realized_values())
            .into_iter()
            .filter(|r| matches!(r.subject, Subject::Axiom(a) if domain_ids.contains(&a)))
            .collect()
    };
    reports.par_extend(
        ids.par_iter()
            .filter(|a| !a.is_domain_level())
            .map(|&a| check_axiom(model, a, opts)),
    );
    reports.sort_by_key(|r| r.subject);
    reports
}

/// Named premises of the M1 + M3 + M4 ⇒ CP6 implication, in check order.
pub fn cp6_implication_premises(model: &EpistemicModel, opts: &AxiomOptions) -> Vec<CheckReport> {
    let mut out = check_cp(model, opts);
    out.extend(run_suite(model, &[AxiomId::M1, AxiomId::M3, AxiomId::M4], opts));
    out
}

/// With a common prior, CP1–CP4, M1, M3 and M4 imply CP6. Passes vacuously
/// when a premise fails; fails only when every premise holds and CP6 does not.
pub fn check_cp6_implication(model: &EpistemicModel, opts: &AxiomOptions) -> CheckReport {
    if model.common_prior().is_none() {
        return CheckReport::not_applicable(Subject::Cp6Implication, "no common prior");
    }
    let premises = cp6_implication_premises(model, opts);
    let failing: Vec<String> = premises
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.subject.to_string())
        .collect();
    let cp6 = check_cp6(model, opts);
    let mut report = CheckReport {
        subject: Subject::Cp6Implication,
        verdict: Verdict::Pass,
        witnesses: Vec::new(),
        examined: cp6.examined,
        skipped: cp6.skipped,
        failures: 0,
        vacuous: false,
        notes: Vec::new(),
    };
    if !failing.is_empty() {
        report.vacuous = true;
        report
            .notes
            .push(format!("premise(s) fail: {}; CP6 {}", failing.join(", "), cp6.verdict));
    } else if cp6.failed() {
        report.verdict = Verdict::Fail;
        report.failures = cp6.failures;
        report.witnesses = cp6.witnesses;
        report.notes.push("M1, M3, M4 hold but CP6 fails".into());
    } else {
        report.notes.push("M1, M3, M4 hold and CP6 holds".into());
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelfile;

    fn load(text: &str) -> EpistemicModel {
        modelfile::parse(text).unwrap()
    }

    fn opts() -> AxiomOptions {
        AxiomOptions::default()
    }

    const PRIOR: &str = "\
domain unit-rational
states w1 w2 w3
agents 1 2
partition 1: {w1 w2} {w3}
partition 2: {w1} {w2 w3}
prior common: w1=1/2 w2=1/3 w3=1/6
";

    #[test]
    fn prior_models_pass_every_model_axiom() {
        let m = load(PRIOR);
        for r in run_suite(&m, &[], &opts()) {
            assert!(r.passed(), "{} failed: {:?}", r.subject, r.witnesses.first());
        }
    }

    #[test]
    fn table_monotonicity_break_fails_cp3() {
        // Not loadable through validation, so build it unvalidated.
        let text = format!("{PRIOR}override {{w1}}|{{w1 w2}} = 2/3\noverride {{w1 w2}}|{{w1 w2}} = 1/2\n");
        let m = modelfile::parse_unvalidated(&text, 12).unwrap();
        let r = check_cp3(&m, &opts());
        assert!(r.failed());
        let w = r
            .witnesses
            .iter()
            .find(|w| w.event_named("X") == Some(Event::from_states([0])) && w.event_named("Y") == Some(Event::from_states([0, 1])))
            .expect("constructed witness reported");
        assert_eq!(w.value_named("Pl(X|F)"), Some(&Some(Value::scalar(2, 3))));
    }

    #[test]
    fn non_additive_table_fails_a3() {
        let text = "\
domain unit-rational
states w1 w2
agents 1
partition 1: {w1 w2}
prior common: w1=1/2 w2=1/2
override {w1 w2}|{w1 w2} = 3/4
";
        let m = modelfile::parse_unvalidated(text, 12).unwrap();
        let r = check_a3(&m, &opts());
        assert!(r.failed());
        let w = &r.witnesses[0];
        assert_eq!(w.value_named("Pl(X∪Y|Z)"), Some(&Some(Value::scalar(3, 4))));
    }

    #[test]
    fn acceptability_fails_for_positive_value_on_null_intersection() {
        let text = "\
domain unit-rational
states w1 w2
agents 1
partition 1: {w1 w2}
prior common: w1=1 w2=0
override {w2}|{w1 w2} = 1/2
";
        let m = modelfile::parse_unvalidated(text, 12).unwrap();
        let r = check_acceptability(&m, &opts());
        assert!(r.failed());
        assert_eq!(r.witnesses[0].event_named("E"), Some(Event::from_states([1])));
    }

    #[test]
    fn a4_flags_total_probability_violation() {
        let text = "\
domain unit-rational
states w1 w2 w3 w4
agents 1
partition 1: {w1 w2 w3 w4}
prior common: w1=1/4 w2=1/4 w3=1/4 w4=1/4
override {w1 w3}|{w1 w2 w3 w4} = 9/10
";
        let m = modelfile::parse_unvalidated(text, 12).unwrap();
        // Pl({w1 w3}|{w1 w2}) = Pl({w1 w3}|{w3 w4}) = 1/2 but the union gives 9/10.
        let r = check_a4(&m, &opts());
        assert!(r.failed());
    }

    #[test]
    fn cp6_not_applicable_without_common_prior() {
        let text = "\
domain unit-rational
states w1 w2
agents 1 2
partition 1: {w1 w2}
partition 2: {w1} {w2}
prior 1: w1=1/2 w2=1/2
prior 2: w1=1/3 w2=2/3
";
        let m = load(text);
        assert_eq!(check_cp6(&m, &opts()).verdict, Verdict::NotApplicable);
        assert_eq!(check_cp7(&m, &opts()).verdict, Verdict::NotApplicable);
    }

    #[test]
    fn sampling_above_cap_is_deterministic() {
        let m = load(PRIOR);
        let o = AxiomOptions {
            exhaustive_cap: 2,
            seed: 7,
            ..AxiomOptions::default()
        };
        let a = run_suite(&m, &[], &o);
        let b = run_suite(&m, &[], &o);
        assert_eq!(a, b);
        assert!(a.iter().all(|r| r.passed()));
        assert!(a[0].notes.iter().any(|n| n.contains("sampled")));
    }

    #[test]
    fn cp6_implication_holds_on_prior_models() {
        let r = check_cp6_implication(&load(PRIOR), &opts());
        assert!(r.passed());
        assert!(!r.vacuous);
    }
}
