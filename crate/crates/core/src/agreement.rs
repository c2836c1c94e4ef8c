//! Instance verifiers for the agreement theorems and their lemmas.
//!
//! Each theorem check partitions the states by posterior profile for an event
//! `E`, computes common knowledge (or common `d`-belief) of each profile event
//! `X`, and tests the theorem's bound whenever that is nonempty. Hypotheses
//! are checked first; a model failing one gets [`Outcome::NotApplicable`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Mutex, OnceLock};

use num_traits::Signed;
use serde::Serialize;

use crate::axioms::{self, AxiomOptions};
use crate::event::{Event, StateSpace};
use crate::model::{EpistemicModel, Measure};
use crate::operators::{self, OperatorError, OperatorTrace};
use crate::report::{render_value, AxiomId, CheckReport, RenderedReport, ReportBuilder, Subject, Witness};
use crate::values::{Domain, Rational, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Theorem {
    /// Common knowledge of posteriors forces equality.
    Aumann,
    /// Common p-belief bounds `|r_i − r_j|` by `1 − p`.
    MsnClassical,
    /// Generalized bound `⊤ ⊖ (⊤ ⊗ d)` under acceptability, ASSOC, M1–M3.
    MsnWithMult,
    /// Generalized bound `⊤ ⊖ d` under CP6 and CP7.
    MsnWithoutMult,
}

impl Theorem {
    pub const ALL: [Theorem; 4] = [
        Theorem::Aumann,
        Theorem::MsnClassical,
        Theorem::MsnWithMult,
        Theorem::MsnWithoutMult,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Theorem::Aumann => "aumann",
            Theorem::MsnClassical => "msn",
            Theorem::MsnWithMult => "msn-mult",
            Theorem::MsnWithoutMult => "msn-nomult",
        }
    }

    pub fn needs_threshold(self) -> bool {
        self != Theorem::Aumann
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Theorem {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Theorem::ALL
            .iter()
            .copied()
            .find(|t| t.as_str() == s.trim())
            .ok_or_else(|| format!("unknown theorem `{s}` (expected aumann, msn, msn-mult or msn-nomult)"))
    }
}

/// Overall or per-group result, ordered by reporting precedence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    NotApplicable,
    /// Common knowledge / belief of every profile event is empty.
    HoldsVacuously,
    /// Nonempty common belief, but every difference `r_i ⊖ r_j` is undefined.
    Skipped,
    Holds,
    Violated,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::NotApplicable => "not-applicable",
            Outcome::HoldsVacuously => "holds-vacuously",
            Outcome::Skipped => "skipped",
            Outcome::Holds => "holds",
            Outcome::Violated => "violated",
        })
    }
}

/// `(r_i)_i`, one posterior per agent (`None` = undefined).
pub type PosteriorProfile = Vec<Option<Value>>;

/// Groups states by exact posterior profile for `E`, in order of each group's
/// least state.
pub fn posterior_profiles(model: &EpistemicModel, e: Event) -> Vec<(PosteriorProfile, Event)> {
    let mut groups: Vec<(PosteriorProfile, Event)> = Vec::new();
    for w in 0..model.num_states() {
        let profile: PosteriorProfile = (0..model.num_agents())
            .map(|i| model.posterior(i, w, e).ok().flatten())
            .collect();
        match groups.iter_mut().find(|(p, _)| *p == profile) {
            Some((_, x)) => *x = *x | Event::singleton(w),
            None => groups.push((profile, Event::singleton(w))),
        }
    }
    groups
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairResult {
    pub i: usize,
    pub j: usize,
    /// `r_i ⊖ r_j` (or `|r_i − r_j|` for the classical theorem).
    pub difference: Option<Value>,
    /// `None` when the difference is undefined and the pair is skipped.
    pub within_bound: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupResult {
    pub profile: Vec<Value>,
    /// `X = {w | Pl_{i,w}(E) = r_i for all i}`.
    pub event: Event,
    /// `C(X)` or `CB^d(X)`.
    pub common: Event,
    pub trace: OperatorTrace,
    pub pairs: Vec<PairResult>,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AgreementVerdict {
    pub theorem: Theorem,
    pub event: Event,
    pub threshold: Option<Value>,
    pub bound: Option<Value>,
    pub outcome: Outcome,
    /// Hypothesis reports; on not-applicable, the failing ones.
    pub hypotheses: Vec<CheckReport>,
    pub groups: Vec<GroupResult>,
    /// States excluded because some posterior of `E` is undefined there.
    pub undefined_states: Event,
    pub notes: Vec<String>,
}

impl AgreementVerdict {
    fn not_applicable(theorem: Theorem, event: Event, threshold: Option<Value>, note: impl Into<String>) -> Self {
        AgreementVerdict {
            theorem,
            event,
            threshold,
            bound: None,
            outcome: Outcome::NotApplicable,
            hypotheses: Vec::new(),
            groups: Vec::new(),
            undefined_states: Event::EMPTY,
            notes: vec![note.into()],
        }
    }

    /// First violated pair as `(group, pair)`.
    pub fn violation(&self) -> Option<(&GroupResult, &PairResult)> {
        self.groups.iter().find_map(|g| {
            g.pairs
                .iter()
                .find(|p| p.within_bound == Some(false))
                .map(|p| (g, p))
        })
    }

    pub fn render(&self, states: &StateSpace, agents: &[String]) -> RenderedVerdict {
        let agent = |i: usize| agents.get(i).cloned().unwrap_or_else(|| i.to_string());
        RenderedVerdict {
            theorem: self.theorem.to_string(),
            event: states.render(self.event),
            threshold: self.threshold.as_ref().map(ToString::to_string),
            bound: self.bound.as_ref().map(ToString::to_string),
            outcome: self.outcome,
            notes: self.notes.clone(),
            undefined_states: states.render(self.undefined_states),
            hypotheses: self.hypotheses.iter().map(|h| h.render(states, agents)).collect(),
            groups: self
                .groups
                .iter()
                .map(|g| RenderedGroup {
                    profile: g.profile.iter().map(ToString::to_string).collect(),
                    event: states.render(g.event),
                    common: states.render(g.common),
                    iterations: g.trace.iterations.iter().map(|z| states.render(*z)).collect(),
                    outcome: g.outcome,
                    pairs: g
                        .pairs
                        .iter()
                        .map(|p| RenderedPair {
                            agents: [agent(p.i), agent(p.j)],
                            difference: render_value(p.difference.as_ref()),
                            within_bound: p.within_bound,
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderedPair {
    pub agents: [String; 2],
    pub difference: String,
    pub within_bound: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderedGroup {
    pub profile: Vec<String>,
    pub event: String,
    pub common: String,
    pub iterations: Vec<String>,
    pub outcome: Outcome,
    pub pairs: Vec<RenderedPair>,
}

/// Label-resolved [`AgreementVerdict`] for text and JSON output.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderedVerdict {
    pub theorem: String,
    pub event: String,
    pub threshold: Option<String>,
    pub bound: Option<String>,
    pub outcome: Outcome,
    pub notes: Vec<String>,
    pub undefined_states: String,
    pub hypotheses: Vec<RenderedReport>,
    pub groups: Vec<RenderedGroup>,
}

impl fmt::Display for RenderedVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} E={}", self.theorem, self.event)?;
        if let Some(d) = &self.threshold {
            write!(f, " d={d}")?;
        }
        if let Some(b) = &self.bound {
            write!(f, " bound={b}")?;
        }
        write!(f, ": {}", self.outcome)?;
        for n in &self.notes {
            write!(f, "\n  note: {n}")?;
        }
        for h in &self.hypotheses {
            for (k, line) in h.to_string().lines().enumerate() {
                let lead = if k == 0 { "hypothesis " } else { "" };
                write!(f, "\n  {lead}{line}")?;
            }
        }
        for g in &self.groups {
            write!(
                f,
                "\n  profile ({}) X={} common={} {}",
                g.profile.join(", "),
                g.event,
                g.common,
                g.outcome
            )?;
            for p in &g.pairs {
                let status = match p.within_bound {
                    Some(true) => "within bound",
                    Some(false) => "EXCEEDS bound",
                    None => "skipped (difference undefined)",
                };
                write!(f, "\n    {} vs {}: difference {} {status}", p.agents[0], p.agents[1], p.difference)?;
            }
        }
        Ok(())
    }
}

/// Values `1/4, 1/2, 3/4, 1` embedded in the domain (diagonal pairs for the
/// product domain), skipping any the domain cannot represent.
pub fn standard_thresholds(domain: &Domain) -> Vec<Value> {
    [(1, 4), (1, 2), (3, 4), (1, 1)]
        .iter()
        .filter_map(|&(n, d)| domain.embed(Rational::new(n.into(), d.into())))
        .collect()
}

/// [`EpistemicModel::threshold_candidates`] plus [`standard_thresholds`],
/// deduplicated in order.
pub fn default_thresholds(model: &EpistemicModel) -> Vec<Value> {
    let mut out = model.threshold_candidates();
    for v in standard_thresholds(&model.domain()) {
        if !out.contains(&v) {
            out.push(v);
        }
    }
    out
}

/// Checks theorems on one model, caching hypothesis reports across calls.
pub struct AgreementChecker<'m> {
    model: &'m EpistemicModel,
    opts: AxiomOptions,
    additive: OnceLock<Vec<CheckReport>>,
    multiplicative: OnceLock<Vec<CheckReport>>,
    cp6: OnceLock<CheckReport>,
    cp7: OnceLock<CheckReport>,
    cp7_at: Mutex<BTreeMap<Value, CheckReport>>,
}

impl<'m> AgreementChecker<'m> {
    pub fn new(model: &'m EpistemicModel, opts: AxiomOptions) -> Self {
        AgreementChecker {
            model,
            opts,
            additive: OnceLock::new(),
            multiplicative: OnceLock::new(),
            cp6: OnceLock::new(),
            cp7: OnceLock::new(),
            cp7_at: Mutex::new(BTreeMap::new()),
        }
    }

    pub fn model(&self) -> &'m EpistemicModel {
        self.model
    }

    /// CP1–CP4 and A1–A4.
    pub fn additive_hypotheses(&self) -> &[CheckReport] {
        self.additive.get_or_init(|| {
            let ids = [
                AxiomId::CP1,
                AxiomId::CP2,
                AxiomId::CP3,
                AxiomId::CP4,
                AxiomId::A1,
                AxiomId::A2,
                AxiomId::A3,
                AxiomId::A4,
            ];
            axioms::run_suite(self.model, &ids, &self.opts)
        })
    }

    /// Acceptability, ASSOC and M1–M3 with the domain multiplication.
    pub fn multiplicative_hypotheses(&self) -> &[CheckReport] {
        self.multiplicative.get_or_init(|| {
            let ids = [AxiomId::ACC, AxiomId::ASSOC, AxiomId::M1, AxiomId::M2, AxiomId::M3];
            axioms::run_suite(self.model, &ids, &self.opts)
        })
    }

    pub fn cp6(&self) -> &CheckReport {
        self.cp6.get_or_init(|| axioms::check_cp6(self.model, &self.opts))
    }

    /// CP7 over the threshold candidates and the configured thresholds, plus
    /// `d` itself.
    /// A failure at `d` itself is reported in preference to one elsewhere.
    pub fn cp7(&self, d: &Value) -> CheckReport {
        let at_d = {
            let mut cache = self.cp7_at.lock().expect("cp7 cache poisoned");
            cache
                .entry(d.clone())
                .or_insert_with(|| axioms::check_cp7_at(self.model, std::slice::from_ref(d), &self.opts))
                .clone()
        };
        if at_d.failed() {
            return at_d;
        }
        self.cp7.get_or_init(|| axioms::check_cp7(self.model, &self.opts)).clone()
    }

    /// Reports of the theorem's hypotheses (structural ones as notes).
    pub fn hypotheses(&self, theorem: Theorem, d: Option<&Value>) -> Result<Vec<CheckReport>, String> {
        let model = self.model;
        let Some(prior) = model.common_prior() else {
            return Err("no common prior".into());
        };
        match theorem {
            Theorem::Aumann => {
                if !matches!(prior, Measure::Prior(_)) || model.domain().is_product() {
                    return Err("not a probability model (needs a scalar prior-derived measure)".into());
                }
                Ok(Vec::new())
            }
            Theorem::MsnClassical => {
                if !matches!(prior, Measure::Prior(_)) || model.domain() != Domain::UnitRational {
                    return Err("not a probability model (needs a prior over unit-rational)".into());
                }
                Ok(Vec::new())
            }
            Theorem::MsnWithMult => {
                let mut out = self.additive_hypotheses().to_vec();
                out.extend(self.multiplicative_hypotheses().iter().cloned());
                Ok(out)
            }
            Theorem::MsnWithoutMult => {
                let mut out = self.additive_hypotheses().to_vec();
                out.push(self.cp6().clone());
                if let Some(d) = d {
                    out.push(self.cp7(d));
                }
                Ok(out)
            }
        }
    }

    /// Checks `theorem` for event `e` at threshold `d` (ignored for Aumann).
    pub fn check(&self, theorem: Theorem, e: Event, d: Option<&Value>) -> Result<AgreementVerdict, OperatorError> {
        self.check_with(theorem, e, d, &[])
    }

    /// [`Self::check`] with the axioms in `dropped` removed from the
    /// hypotheses. The common-prior requirement cannot be dropped.
    pub fn check_with(
        &self,
        theorem: Theorem,
        e: Event,
        d: Option<&Value>,
        dropped: &[AxiomId],
    ) -> Result<AgreementVerdict, OperatorError> {
        let model = self.model;
        let domain = model.domain();
        let threshold = if theorem.needs_threshold() { d.cloned() } else { None };
        if theorem.needs_threshold() {
            let Some(d) = d else {
                return Ok(AgreementVerdict::not_applicable(theorem, e, None, "threshold required"));
            };
            if !domain.contains(d) {
                return Err(OperatorError::DomainMismatch {
                    domain,
                    value: d.clone(),
                });
            }
        }
        let hypotheses = match self.hypotheses(theorem, threshold.as_ref()) {
            Ok(h) => h,
            Err(reason) => return Ok(AgreementVerdict::not_applicable(theorem, e, threshold, reason)),
        };
        let hypotheses: Vec<CheckReport> = hypotheses
            .into_iter()
            .filter(|h| !matches!(h.subject, Subject::Axiom(a) if dropped.contains(&a)))
            .collect();
        let failing: Vec<CheckReport> = hypotheses.iter().filter(|h| !h.passed()).cloned().collect();
        if !failing.is_empty() {
            let names: Vec<String> = failing.iter().map(|h| h.subject.to_string()).collect();
            let mut v = AgreementVerdict::not_applicable(theorem, e, threshold, format!("{} fails", names.join(", ")));
            v.hypotheses = failing;
            return Ok(v);
        }

        let top = domain.top();
        let bound = match (theorem, &threshold) {
            (Theorem::Aumann, _) => Some(domain.bot()),
            (Theorem::MsnClassical, Some(p)) => {
                let p = p.as_scalar().expect("probability models are scalar");
                if !p.is_positive() {
                    return Ok(AgreementVerdict::not_applicable(theorem, e, threshold, "p must lie in (0, 1]"));
                }
                domain.ominus(&top, &Value::Scalar(p.clone()))?
            }
            (Theorem::MsnWithMult, Some(d)) => match domain.otimes(&top, d)? {
                Some(td) => domain.ominus(&top, &td)?,
                None => None,
            },
            (Theorem::MsnWithoutMult, Some(d)) => domain.ominus(&top, d)?,
            _ => None,
        };
        let Some(bound) = bound else {
            return Ok(AgreementVerdict::not_applicable(theorem, e, threshold, "bound is undefined in this domain"));
        };

        let mut groups = Vec::new();
        let mut undefined_states = Event::EMPTY;
        for (profile, x) in posterior_profiles(model, e) {
            let Some(profile) = profile.into_iter().collect::<Option<Vec<Value>>>() else {
                undefined_states = undefined_states | x;
                continue;
            };
            let (common, trace) = match &threshold {
                None => operators::common_knowledge(model, x),
                Some(d) => operators::common_belief(model, d, x)?,
            };
            let mut pairs = Vec::new();
            let mut outcome = Outcome::HoldsVacuously;
            if !common.is_empty() {
                outcome = Outcome::Holds;
                let mut any_defined = profile.len() < 2;
                for i in 0..profile.len() {
                    for j in 0..profile.len() {
                        if i == j || (theorem == Theorem::MsnClassical && j < i) {
                            continue;
                        }
                        let difference = match theorem {
                            Theorem::Aumann | Theorem::MsnClassical => {
                                let (a, b) = (profile[i].as_scalar(), profile[j].as_scalar());
                                a.zip(b).map(|(a, b)| Value::Scalar((a - b).abs()))
                            }
                            _ => domain.ominus(&profile[i], &profile[j])?,
                        };
                        let within_bound = difference.as_ref().map(|diff| match theorem {
                            Theorem::Aumann => profile[i] == profile[j],
                            _ => domain.leq(diff, &bound),
                        });
                        if within_bound.is_some() {
                            any_defined = true;
                        }
                        if within_bound == Some(false) {
                            outcome = Outcome::Violated;
                        }
                        pairs.push(PairResult {
                            i,
                            j,
                            difference,
                            within_bound,
                        });
                    }
                }
                if !any_defined {
                    outcome = Outcome::Skipped;
                }
            }
            groups.push(GroupResult {
                profile,
                event: x,
                common,
                trace,
                pairs,
                outcome,
            });
        }
        let outcome = groups
            .iter()
            .map(|g| g.outcome)
            .max()
            .unwrap_or(Outcome::HoldsVacuously);
        let mut notes = Vec::new();
        if threshold.as_ref() == Some(&domain.bot()) {
            notes.push("threshold ⊥ makes d-belief degenerate".into());
        }
        Ok(AgreementVerdict {
            theorem,
            event: e,
            threshold,
            bound: Some(bound),
            outcome,
            hypotheses,
            groups,
            undefined_states,
            notes,
        })
    }

    /// Every event of `F` at every threshold (one pass for Aumann).
    pub fn sweep(&self, theorem: Theorem, thresholds: &[Value]) -> Result<Vec<AgreementVerdict>, OperatorError> {
        self.sweep_with(theorem, thresholds, &[])
    }

    pub fn sweep_with(
        &self,
        theorem: Theorem,
        thresholds: &[Value],
        dropped: &[AxiomId],
    ) -> Result<Vec<AgreementVerdict>, OperatorError> {
        let mut out = Vec::new();
        for e in Event::all(self.model.num_states()) {
            if theorem.needs_threshold() {
                for d in thresholds {
                    out.push(self.check_with(theorem, e, Some(d), dropped)?);
                }
            } else {
                out.push(self.check_with(theorem, e, None, dropped)?);
            }
        }
        Ok(out)
    }
}

pub fn check_aumann(model: &EpistemicModel, e: Event) -> AgreementVerdict {
    AgreementChecker::new(model, AxiomOptions::default())
        .check(Theorem::Aumann, e, None)
        .expect("common knowledge cannot fail")
}

pub fn check_msn_classical(model: &EpistemicModel, e: Event, p: &Value) -> Result<AgreementVerdict, OperatorError> {
    AgreementChecker::new(model, AxiomOptions::default()).check(Theorem::MsnClassical, e, Some(p))
}

pub fn check_msn_with_mult(model: &EpistemicModel, e: Event, d: &Value) -> Result<AgreementVerdict, OperatorError> {
    AgreementChecker::new(model, AxiomOptions::default()).check(Theorem::MsnWithMult, e, Some(d))
}

pub fn check_msn_without_mult(model: &EpistemicModel, e: Event, d: &Value) -> Result<AgreementVerdict, OperatorError> {
    AgreementChecker::new(model, AxiomOptions::default()).check(Theorem::MsnWithoutMult, e, Some(d))
}

fn probability_model(model: &EpistemicModel) -> Result<(), String> {
    match model.common_prior() {
        Some(Measure::Prior(_)) if !model.domain().is_product() => Ok(()),
        Some(_) => Err("not a probability model".into()),
        None => Err("no common prior".into()),
    }
}

/// For `A, B ∈ F′` with `Pl(A|B) ≥ d` and `Pl(B|A) ≥ d`:
/// `Pl(E|A) ⊖ Pl(E|B) ≤ ⊤ ⊖ d` whenever both sides exist.
pub fn check_characterization_cond2(model: &EpistemicModel, d: &Value, e: Event, a: Event, b: Event) -> CheckReport {
    let subject = Subject::Characterization;
    if model.common_prior().is_none() {
        return CheckReport::not_applicable(subject, "no common prior");
    }
    if !model.is_learnable(a) || !model.is_learnable(b) {
        return CheckReport::not_applicable(subject, "A and B must be in F′");
    }
    let domain = model.domain();
    if !domain.contains(d) {
        return CheckReport::not_applicable(subject, format!("threshold {d} is not in domain {domain}"));
    }
    let mut rep = ReportBuilder::new(subject);
    cond2_instance(model, &mut rep, d, e, a, b);
    let mut report = rep.finish();
    if report.examined == 0 && report.passed() {
        report.vacuous = true;
    }
    report
}

fn cond2_instance(model: &EpistemicModel, rep: &mut ReportBuilder, d: &Value, e: Event, a: Event, b: Event) {
    let domain = model.domain();
    let c = |x: Event, y: Event| model.cond(0, x, y).ok().flatten();
    let (Some(ab), Some(ba)) = (c(a, b), c(b, a)) else {
        rep.skip();
        return;
    };
    if !(domain.geq(&ab, d) && domain.geq(&ba, d)) {
        rep.note_once("antecedent Pl(A|B) ≥ d and Pl(B|A) ≥ d fails");
        return;
    }
    let Some(bound) = domain.ominus(&domain.top(), d).ok().flatten() else {
        rep.note_once("⊤ ⊖ d is undefined");
        return;
    };
    let (Some(ea), Some(eb)) = (c(e, a), c(e, b)) else {
        rep.skip();
        return;
    };
    let Some(diff) = domain.ominus(&ea, &eb).ok().flatten() else {
        rep.skip();
        rep.note_once("Pl(E|A) ⊖ Pl(E|B) is undefined");
        return;
    };
    rep.examine();
    if !domain.leq(&diff, &bound) {
        rep.fail(
            Witness::new("Pl(E|A) ⊖ Pl(E|B) exceeds ⊤ ⊖ d")
                .event("E", e)
                .event("A", a)
                .event("B", b)
                .value("d", Some(d.clone()))
                .value("Pl(E|A)", Some(ea))
                .value("Pl(E|B)", Some(eb))
                .value("difference", Some(diff))
                .value("⊤⊖d", Some(bound)),
        );
    }
}

/// Condition 2 over every `A, B ∈ F′` and `E ∈ F` at threshold `d`.
pub fn check_characterization_sweep(model: &EpistemicModel, d: &Value) -> CheckReport {
    let subject = Subject::Characterization;
    if model.common_prior().is_none() {
        return CheckReport::not_applicable(subject, "no common prior");
    }
    let mut rep = ReportBuilder::new(subject);
    let learnable: Vec<Event> = model.algebra().learnable_events().collect();
    for &a in &learnable {
        for &b in &learnable {
            for e in Event::all(model.num_states()) {
                cond2_instance(model, &mut rep, d, e, a, b);
            }
        }
    }
    rep.finish()
}

fn classical_threshold(model: &EpistemicModel, p: &Value, subject: Subject) -> Result<(), CheckReport> {
    if let Err(reason) = probability_model(model) {
        return Err(CheckReport::not_applicable(subject, reason));
    }
    match p.as_scalar() {
        Some(r) if r.is_positive() && model.domain().contains(p) => Ok(()),
        _ => Err(CheckReport::not_applicable(subject, "p must lie in (0, 1]")),
    }
}

/// Parts 1–4 of the belief lemma for a probability model with common prior.
pub fn check_useful_lemma(model: &EpistemicModel, e: Event, p: &Value) -> Result<CheckReport, OperatorError> {
    if let Err(r) = classical_threshold(model, p, Subject::UsefulLemma) {
        return Ok(r);
    }
    let mut rep = ReportBuilder::new(Subject::UsefulLemma);
    let domain = model.domain();
    let c = |x: Event, y: Event| model.cond(0, x, y).ok().flatten();
    let (cb_e, _) = operators::common_belief(model, p, e)?;
    for i in 0..model.num_agents() {
        let b = operators::d_believes(model, i, p, e)?;
        // Part 1: B_i^p(E) is a union of information sets.
        rep.examine();
        if let Some(block) = model.partition(i)?.blocks().iter().find(|x| !x.is_disjoint(b) && !x.is_subset(b)) {
            rep.fail(
                Witness::new("part 1: information set straddles B_i^p(E)")
                    .agent(i)
                    .event("E", e)
                    .event("B_i^p(E)", b)
                    .event("block", *block),
            );
        }
        // Part 2: CB^p(E) ⊆ B_i^p(CB^p(E)).
        rep.examine();
        let b_cb = operators::d_believes(model, i, p, cb_e)?;
        if !cb_e.is_subset(b_cb) {
            rep.fail(
                Witness::new("part 2: CB^p(E) ⊄ B_i^p(CB^p(E))")
                    .agent(i)
                    .event("E", e)
                    .event("CB^p(E)", cb_e)
                    .event("B_i^p(CB^p(E))", b_cb),
            );
        }
        // Part 3: P(E | B_i^p(E)) ≥ p.
        if !b.is_empty() {
            rep.examine();
            let v = c(e, b);
            if !v.as_ref().is_some_and(|v| domain.geq(v, p)) {
                rep.fail(
                    Witness::new("part 3: P(E | B_i^p(E)) < p")
                        .agent(i)
                        .event("E", e)
                        .event("B_i^p(E)", b)
                        .value("p", Some(p.clone()))
                        .value("P(E|B_i^p(E))", v),
                );
            }
        }
    }
    // Part 4: P(E | B_i^p(CB^p(X))) = r_i for each profile event X.
    for (profile, x) in posterior_profiles(model, e) {
        let Some(profile) = profile.into_iter().collect::<Option<Vec<Value>>>() else {
            continue;
        };
        let (cb_x, _) = operators::common_belief(model, p, x)?;
        if cb_x.is_empty() {
            continue;
        }
        for (i, r) in profile.iter().enumerate() {
            rep.examine();
            let b = operators::d_believes(model, i, p, cb_x)?;
            let v = c(e, b);
            if v.as_ref() != Some(r) {
                rep.fail(
                    Witness::new("part 4: P(E | B_i^p(CB^p(X))) ≠ r_i")
                        .agent(i)
                        .event("E", e)
                        .event("X", x)
                        .event("CB^p(X)", cb_x)
                        .event("B_i^p(CB^p(X))", b)
                        .value("r_i", Some(r.clone()))
                        .value("P(E|B_i^p(CB^p(X)))", v),
                );
            }
        }
    }
    Ok(rep.finish())
}

/// For `C = CB^p(X) ≠ ∅` and `B_k = B_k^p(C)`: for every pair `i, j`,
/// `P(C−E|B_i)` and `P(E∩C|B_i)` move in the same direction relative to `j`.
pub fn check_comparison_lemma(model: &EpistemicModel, e: Event, x: Event, p: &Value) -> Result<CheckReport, OperatorError> {
    if let Err(r) = classical_threshold(model, p, Subject::ComparisonLemma) {
        return Ok(r);
    }
    let (cb, _) = operators::common_belief(model, p, x)?;
    if cb.is_empty() {
        return Ok(CheckReport::not_applicable(Subject::ComparisonLemma, "CB^p(X) is empty"));
    }
    let domain = model.domain();
    let c = |x: Event, y: Event| model.cond(0, x, y).ok().flatten();
    let mut rep = ReportBuilder::new(Subject::ComparisonLemma);
    let beliefs: Vec<Event> = (0..model.num_agents())
        .map(|i| operators::d_believes(model, i, p, cb))
        .collect::<Result<_, _>>()?;
    for i in 0..model.num_agents() {
        for j in 0..model.num_agents() {
            rep.examine();
            let vals = [c(cb - e, beliefs[i]), c(cb - e, beliefs[j]), c(e & cb, beliefs[i]), c(e & cb, beliefs[j])];
            let holds = match &vals {
                [Some(a_i), Some(a_j), Some(b_i), Some(b_j)] => {
                    (domain.leq(a_i, a_j) && domain.leq(b_i, b_j)) || (domain.geq(a_i, a_j) && domain.geq(b_i, b_j))
                }
                _ => false,
            };
            if !holds {
                let [a_i, a_j, b_i, b_j] = vals;
                rep.fail(
                    Witness::new("neither clauses 1–2 nor clauses 3–4 hold")
                        .agent(i)
                        .agent(j)
                        .event("E", e)
                        .event("X", x)
                        .event("CB^p(X)", cb)
                        .event("B_i", beliefs[i])
                        .event("B_j", beliefs[j])
                        .value("P(C−E|B_i)", a_i)
                        .value("P(C−E|B_j)", a_j)
                        .value("P(E∩C|B_i)", b_i)
                        .value("P(E∩C|B_j)", b_j),
                );
            }
        }
    }
    Ok(rep.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modelfile;

    fn uniform(p1: &str, p2: &str) -> EpistemicModel {
        modelfile::parse(&format!(
            "domain unit-rational\nstates 1 2 3 4\nagents a b\npartition a: {p1}\npartition b: {p2}\n\
             prior common: 1=1/4 2=1/4 3=1/4 4=1/4\n"
        ))
        .unwrap()
    }

    fn ev(states: &[usize]) -> Event {
        Event::from_states(states.iter().map(|s| s - 1))
    }

    fn half() -> Value {
        Value::scalar(1, 2)
    }

    #[test]
    fn profiles_group_states_by_exact_posteriors() {
        let m = uniform("{1 2} {3 4}", "{1 2} {3 4}");
        let groups = posterior_profiles(&m, ev(&[1, 3]));
        assert_eq!(groups, vec![(vec![Some(half()), Some(half())], m.full())]);
        let groups = posterior_profiles(&m, m.full());
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].0, vec![Some(Value::one()), Some(Value::one())]);
    }

    #[test]
    fn aumann_holds_on_shared_partition() {
        let m = uniform("{1 2} {3 4}", "{1 2} {3 4}");
        let v = check_aumann(&m, ev(&[1, 3]));
        assert_eq!(v.outcome, Outcome::Holds);
        assert_eq!(v.groups[0].common, m.full());
    }

    #[test]
    fn aumann_mixed_profiles_hold_vacuously() {
        let m = uniform("{1 2} {3 4}", "{1} {2 3} {4}");
        let v = check_aumann(&m, ev(&[1, 2]));
        for g in &v.groups {
            if g.profile[0] != g.profile[1] {
                assert!(g.common.is_empty());
                assert_eq!(g.outcome, Outcome::HoldsVacuously);
            }
        }
        assert_ne!(v.outcome, Outcome::Violated);
    }

    #[test]
    fn aumann_needs_common_prior() {
        let m = modelfile::parse(
            "domain unit-rational\nstates 1 2\nagents a b\npartition a: {1 2}\npartition b: {1 2}\n\
             prior a: 1=1/2 2=1/2\nprior b: 1=1/3 2=2/3\n",
        )
        .unwrap();
        assert_eq!(check_aumann(&m, ev(&[1])).outcome, Outcome::NotApplicable);
    }

    #[test]
    fn classical_bound_is_one_minus_p() {
        let m = uniform("{1 2} {3 4}", "{1} {2 3} {4}");
        let v = check_msn_classical(&m, ev(&[1, 2]), &Value::scalar(3, 4)).unwrap();
        assert_eq!(v.bound, Some(Value::scalar(1, 4)));
        let v = check_msn_without_mult(&m, ev(&[1, 2]), &Value::scalar(3, 4)).unwrap();
        assert_eq!(v.bound, Some(Value::scalar(1, 4)));
        let v = check_msn_with_mult(&m, ev(&[1, 2]), &Value::scalar(3, 4)).unwrap();
        assert_eq!(v.bound, Some(Value::scalar(1, 4)));
    }

    #[test]
    fn classical_and_generalized_agree_on_probability_models() {
        let m = uniform("{1 2} {3 4}", "{1} {2 3} {4}");
        let checker = AgreementChecker::new(&m, AxiomOptions::default());
        for e in Event::all(4) {
            for p in standard_thresholds(&m.domain()) {
                let a = checker.check(Theorem::MsnClassical, e, Some(&p)).unwrap();
                let b = checker.check(Theorem::MsnWithoutMult, e, Some(&p)).unwrap();
                assert_eq!(a.outcome, b.outcome, "E={e:?} p={p}");
            }
        }
    }

    #[test]
    fn useful_lemma_example() {
        let m = uniform("{1 2} {3 4}", "{1} {2 3} {4}");
        let r = check_useful_lemma(&m, ev(&[1, 2]), &half()).unwrap();
        assert!(r.passed(), "{:?}", r.witnesses);
        assert_eq!(m.cond(0, ev(&[1, 2]), ev(&[1, 2])).unwrap(), Some(Value::one()));
        assert_eq!(m.cond(1, ev(&[1, 2]), ev(&[1, 2, 3])).unwrap(), Some(Value::scalar(2, 3)));
    }

    #[test]
    fn comparison_lemma_example() {
        let m = uniform("{1 2} {3 4}", "{1} {2 3} {4}");
        let r = check_comparison_lemma(&m, ev(&[1, 2]), ev(&[1, 2]), &half()).unwrap();
        assert!(r.passed());
        assert_eq!(r.examined, 4);
        let r = check_comparison_lemma(&m, ev(&[1, 2]), ev(&[1, 2]), &Value::one()).unwrap();
        assert_eq!(r.verdict, crate::report::Verdict::NotApplicable);
    }

    #[test]
    fn characterization_with_a_equal_b_holds() {
        let m = uniform("{1 2} {3 4}", "{1} {2 3} {4}");
        let r = check_characterization_cond2(&m, &half(), ev(&[1]), ev(&[1, 2]), ev(&[1, 2]));
        assert!(r.passed());
        assert_eq!(r.examined, 1);
        assert!(check_characterization_sweep(&m, &half()).passed());
    }

    #[test]
    fn theorem_tokens_round_trip() {
        for t in Theorem::ALL {
            assert_eq!(t.as_str().parse::<Theorem>().unwrap(), t);
        }
        assert!("bogus".parse::<Theorem>().is_err());
    }
}
