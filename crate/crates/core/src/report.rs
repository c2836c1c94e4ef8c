//! Check reports shared by the validators, axiom checkers and lemma checks.

use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use serde::Serialize;

use crate::event::{Event, StateSpace};
use crate::values::Value;

/// Witnesses retained per report; further failures are only counted.
pub const WITNESS_CAP: usize = 256;

/// Axioms checked on domains and models.
///
/// `A1`, `A2`, `M1`, `M2`, `M4` and `ASSOC` are properties of the value
/// domain and are checked by [`crate::values::check_domain_axioms`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum AxiomId {
    CP1,
    CP2,
    CP3,
    CP4,
    ACC,
    A1,
    A2,
    A3,
    A4,
    M1,
    M2,
    M3,
    M4,
    CP6,
    CP7,
    ASSOC,
}

impl AxiomId {
    pub const ALL: [AxiomId; 16] = [
        AxiomId::CP1,
        AxiomId::CP2,
        AxiomId::CP3,
        AxiomId::CP4,
        AxiomId::ACC,
        AxiomId::A1,
        AxiomId::A2,
        AxiomId::A3,
        AxiomId::A4,
        AxiomId::M1,
        AxiomId::M2,
        AxiomId::M3,
        AxiomId::M4,
        AxiomId::CP6,
        AxiomId::CP7,
        AxiomId::ASSOC,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AxiomId::CP1 => "CP1",
            AxiomId::CP2 => "CP2",
            AxiomId::CP3 => "CP3",
            AxiomId::CP4 => "CP4",
            AxiomId::ACC => "ACC",
            AxiomId::A1 => "A1",
            AxiomId::A2 => "A2",
            AxiomId::A3 => "A3",
            AxiomId::A4 => "A4",
            AxiomId::M1 => "M1",
            AxiomId::M2 => "M2",
            AxiomId::M3 => "M3",
            AxiomId::M4 => "M4",
            AxiomId::CP6 => "CP6",
            AxiomId::CP7 => "CP7",
            AxiomId::ASSOC => "ASSOC",
        }
    }

    /// Whether the axiom constrains only the value domain.
    pub fn is_domain_level(self) -> bool {
        matches!(
            self,
            AxiomId::A1 | AxiomId::A2 | AxiomId::M1 | AxiomId::M2 | AxiomId::M4 | AxiomId::ASSOC
        )
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for AxiomId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.trim().to_ascii_uppercase();
        AxiomId::ALL
            .iter()
            .copied()
            .find(|a| a.as_str() == upper)
            .ok_or_else(|| format!("unknown axiom `{s}`"))
    }
}

/// What a report is about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Subject {
    Validation,
    Axiom(AxiomId),
    /// Whether *any* multiplication could satisfy M3 on the model.
    M3Satisfiability,
    Cp6Implication,
    Characterization,
    UsefulLemma,
    ComparisonLemma,
}

impl fmt::Display for Subject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Subject::Validation => f.write_str("MODEL"),
            Subject::Axiom(a) => f.write_str(a.as_str()),
            Subject::M3Satisfiability => f.write_str("M3-SAT"),
            Subject::Cp6Implication => f.write_str("M1-M3-M4=>CP6"),
            Subject::Characterization => f.write_str("CHAR-COND2"),
            Subject::UsefulLemma => f.write_str("USEFUL-LEMMA"),
            Subject::ComparisonLemma => f.write_str("COMPARISON-LEMMA"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotApplicable => "not-applicable",
        })
    }
}

/// A concrete counterexample or illustration: named events, agents and values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Witness {
    pub detail: String,
    pub events: Vec<(String, Event)>,
    pub agents: Vec<usize>,
    /// `None` marks an undefined conditional.
    pub values: Vec<(String, Option<Value>)>,
}

impl Witness {
    pub fn new(detail: impl Into<String>) -> Self {
        Witness {
            detail: detail.into(),
            ..Witness::default()
        }
    }

    pub fn event(mut self, role: impl Into<String>, event: Event) -> Self {
        self.events.push((role.into(), event));
        self
    }

    pub fn agent(mut self, agent: usize) -> Self {
        self.agents.push(agent);
        self
    }

    pub fn value(mut self, role: impl Into<String>, value: Option<Value>) -> Self {
        self.values.push((role.into(), value));
        self
    }

    pub fn event_named(&self, role: &str) -> Option<Event> {
        self.events.iter().find(|(r, _)| r == role).map(|(_, e)| *e)
    }

    pub fn value_named(&self, role: &str) -> Option<&Option<Value>> {
        self.values.iter().find(|(r, _)| r == role).map(|(_, v)| v)
    }

    pub fn render(&self, states: &StateSpace, agents: &[String]) -> RenderedWitness {
        RenderedWitness {
            detail: self.detail.clone(),
            events: self
                .events
                .iter()
                .map(|(r, e)| (r.clone(), states.render(*e)))
                .collect(),
            agents: self
                .agents
                .iter()
                .map(|&a| agents.get(a).cloned().unwrap_or_else(|| a.to_string()))
                .collect(),
            values: self
                .values
                .iter()
                .map(|(r, v)| (r.clone(), render_value(v.as_ref())))
                .collect(),
        }
    }
}

pub fn render_value(v: Option<&Value>) -> String {
    match v {
        Some(v) => v.to_string(),
        None => "undefined".to_string(),
    }
}

/// Verdict plus witnesses for one axiom, lemma or validation run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub subject: Subject,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    /// Tuples (or instances) actually evaluated.
    pub examined: u64,
    /// Tuples skipped because a conditional was undefined or exempted.
    pub skipped: u64,
    /// Total failing tuples, including ones beyond the witness cap.
    pub failures: u64,
    /// Pass only because a premise never held.
    pub vacuous: bool,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn not_applicable(subject: Subject, reason: impl Into<String>) -> Self {
        CheckReport {
            subject,
            verdict: Verdict::NotApplicable,
            witnesses: Vec::new(),
            examined: 0,
            skipped: 0,
            failures: 0,
            vacuous: false,
            notes: vec![reason.into()],
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn failed(&self) -> bool {
        self.verdict == Verdict::Fail
    }

    pub fn render(&self, states: &StateSpace, agents: &[String]) -> RenderedReport {
        RenderedReport {
            axiom: self.subject.to_string(),
            verdict: self.verdict,
            vacuous: self.vacuous,
            examined: self.examined,
            skipped: self.skipped,
            failures: self.failures,
            notes: self.notes.clone(),
            witnesses: self
                .witnesses
                .iter()
                .map(|w| w.render(states, agents))
                .collect(),
        }
    }
}

/// Accumulates tuple counts and witnesses while a checker runs.
#[derive(Debug)]
pub struct ReportBuilder {
    subject: Subject,
    examined: u64,
    skipped: u64,
    failures: u64,
    witnesses: Vec<Witness>,
    notes: Vec<String>,
}

impl ReportBuilder {
    pub fn new(subject: Subject) -> Self {
        ReportBuilder {
            subject,
            examined: 0,
            skipped: 0,
            failures: 0,
            witnesses: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn examine(&mut self) {
        self.examined += 1;
    }

    pub fn skip(&mut self) {
        self.skipped += 1;
    }

    pub fn fail(&mut self, witness: Witness) {
        self.failures += 1;
        if self.witnesses.len() < WITNESS_CAP {
            self.witnesses.push(witness);
        }
    }

    pub fn note(&mut self, note: impl Into<String>) {
        self.notes.push(note.into());
    }

    /// Adds `note` unless an identical note is already present.
    pub fn note_once(&mut self, note: impl Into<String>) {
        let note = note.into();
        if !self.notes.contains(&note) {
            self.notes.push(note);
        }
    }

    pub fn has_failures(&self) -> bool {
        self.failures > 0
    }

    pub fn finish(self) -> CheckReport {
        CheckReport {
            subject: self.subject,
            verdict: if self.failures > 0 {
                Verdict::Fail
            } else {
                Verdict::Pass
            },
            witnesses: self.witnesses,
            examined: self.examined,
            skipped: self.skipped,
            failures: self.failures,
            vacuous: false,
            notes: self.notes,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderedWitness {
    pub detail: String,
    pub events: IndexMap<String, String>,
    pub agents: Vec<String>,
    pub values: IndexMap<String, String>,
}

impl fmt::Display for RenderedWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.detail)?;
        let mut parts: Vec<String> = Vec::new();
        if !self.agents.is_empty() {
            parts.push(format!("agents={}", self.agents.join(",")));
        }
        parts.extend(self.events.iter().map(|(k, v)| format!("{k}={v}")));
        parts.extend(self.values.iter().map(|(k, v)| format!("{k}={v}")));
        if !parts.is_empty() {
            write!(f, " [{}]", parts.join("; "))?;
        }
        Ok(())
    }
}

/// Label-resolved form of a [`CheckReport`], used for both text and JSON.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RenderedReport {
    pub axiom: String,
    pub verdict: Verdict,
    pub vacuous: bool,
    pub examined: u64,
    pub skipped: u64,
    pub failures: u64,
    pub notes: Vec<String>,
    pub witnesses: Vec<RenderedWitness>,
}

impl fmt::Display for RenderedReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<16} {}{} (examined {}, skipped {}, failures {})",
            self.axiom,
            self.verdict,
            if self.vacuous { " (vacuous)" } else { "" },
            self.examined,
            self.skipped,
            self.failures
        )?;
        for note in &self.notes {
            write!(f, "\n    note: {note}")?;
        }
        for w in &self.witnesses {
            write!(f, "\n    witness: {w}")?;
        }
        Ok(())
    }
}
