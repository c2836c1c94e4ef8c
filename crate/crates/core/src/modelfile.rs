//! The `.epm` line-oriented model format.
//!
//! ```text
//! # comment
//! model "shifted table"
//! domain unit-rational
//! states w1 w2 w3
//! agents 1
//! partition 1: {w1 w2 w3}
//! prior common: w1=1/4 w2=1/4 w3=1/2
//! override {w1}|{w1 w2 w3} = 13/50
//! event E = {w1}
//! ```
//!
//! Directives may appear in any order. Values are exact rationals (`13/50`)
//! or pairs (`(1/5,2/5)`) for `product-unit-rational`.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::event::{Event, StateSpace};
use crate::model::{
    validate_model, EpistemicModel, Measure, Partition, Priors, TableMeasure, DEFAULT_MAX_STATES,
};
use crate::report::CheckReport;
use crate::values::{parse_rational, Domain, Rational, Value};

/// A syntax or shape error tied to a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub token: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("{}", render_errors(.0))]
    Syntax(Vec<ParseError>),
    #[error("model fails validation ({} failure(s))", .0.failures)]
    Invalid(Box<CheckReport>),
}

fn render_errors(errors: &[ParseError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("\n")
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Str(String),
    Sym(char),
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Word(w) => f.write_str(w),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Sym(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, Clone)]
struct Spanned {
    tok: Tok,
    column: usize,
}

fn is_word_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || matches!(c, '_' | '/' | '-' | '.' | '\'')
}

pub(crate) fn is_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn tokenize(line_no: usize, text: &str) -> Result<Vec<Spanned>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        let column = k + 1;
        if c == '#' {
            break;
        }
        if c.is_whitespace() {
            k += 1;
            continue;
        }
        if matches!(c, '{' | '}' | '(' | ')' | ',' | ':' | '|' | '=') {
            out.push(Spanned {
                tok: Tok::Sym(c),
                column,
            });
            k += 1;
            continue;
        }
        if c == '"' {
            let start = k + 1;
            let end = chars[start..].iter().position(|&c| c == '"').map(|p| p + start);
            let Some(end) = end else {
                return Err(ParseError {
                    line: line_no,
                    column,
                    message: "unterminated string".into(),
                    token: None,
                });
            };
            out.push(Spanned {
                tok: Tok::Str(chars[start..end].iter().collect()),
                column,
            });
            k = end + 1;
            continue;
        }
        if is_word_char(c) {
            let start = k;
            while k < chars.len() && is_word_char(chars[k]) {
                k += 1;
            }
            out.push(Spanned {
                tok: Tok::Word(chars[start..k].iter().collect()),
                column,
            });
            continue;
        }
        return Err(ParseError {
            line: line_no,
            column,
            message: format!("unexpected character `{c}`"),
            token: Some(c.to_string()),
        });
    }
    Ok(out)
}

/// Cursor over one line's tokens.
struct Line<'a> {
    no: usize,
    toks: &'a [Spanned],
    pos: usize,
    end_column: usize,
}

impl<'a> Line<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        let (column, token) = match self.toks.get(self.pos) {
            Some(t) => (t.column, Some(t.tok.to_string())),
            None => (self.end_column, None),
        };
        ParseError {
            line: self.no,
            column,
            message: message.into(),
            token,
        }
    }

    fn err_at(&self, pos: usize, message: impl Into<String>) -> ParseError {
        let t = &self.toks[pos];
        ParseError {
            line: self.no,
            column: t.column,
            message: message.into(),
            token: Some(t.tok.to_string()),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn next_word(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => Err(self.err(format!("expected {what}"))),
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{c}`")))
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.at_end() {
            Ok(())
        } else {
            Err(self.err("unexpected trailing input"))
        }
    }

    fn label(&mut self, what: &str) -> Result<String, ParseError> {
        let pos = self.pos;
        let w = self.next_word(what)?;
        if is_label(&w) {
            Ok(w)
        } else {
            Err(self.err_at(pos, format!("`{w}` is not a valid {what} (letters, digits, `_`)")))
        }
    }

    fn state_set(&mut self, states: &StateSpace) -> Result<Event, ParseError> {
        self.expect('{')?;
        let mut e = Event::EMPTY;
        while !self.eat('}') {
            let pos = self.pos;
            let w = self.next_word("state label or `}`")?;
            let s = states
                .index_of(&w)
                .ok_or_else(|| self.err_at(pos, format!("unknown state `{w}`")))?;
            if e.contains(s) {
                return Err(self.err_at(pos, format!("state `{w}` listed twice")));
            }
            e = e | Event::singleton(s);
        }
        Ok(e)
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let pos = self.pos;
        let w = self.next_word("rational")?;
        parse_rational(&w).map_err(|e| self.err_at(pos, e.to_string()))
    }

    fn value(&mut self, domain: Domain) -> Result<Value, ParseError> {
        let pos = self.pos;
        let v = if self.eat('(') {
            let a = self.rational()?;
            self.expect(',')?;
            let b = self.rational()?;
            self.expect(')')?;
            Value::Pair(a, b)
        } else {
            Value::Scalar(self.rational()?)
        };
        if domain.contains(&v) {
            Ok(v)
        } else {
            Err(self.err_at(pos, format!("value {v} is not in domain {domain}")))
        }
    }
}

#[derive(Default)]
struct Draft {
    name: Option<String>,
    domain: Option<Domain>,
    states: Option<StateSpace>,
    agents: Option<Vec<String>>,
    partitions: BTreeMap<usize, Partition>,
    common_prior: Option<Vec<Value>>,
    agent_priors: BTreeMap<usize, Vec<Value>>,
    overrides: BTreeMap<(Event, Event), Value>,
    override_line: Option<usize>,
    events: BTreeMap<String, Event>,
}

/// Parses and validates a model.
pub fn parse(text: &str) -> Result<EpistemicModel, LoadError> {
    parse_with_limit(text, DEFAULT_MAX_STATES)
}

pub fn parse_with_limit(text: &str, max_states: usize) -> Result<EpistemicModel, LoadError> {
    let model = parse_unvalidated(text, max_states).map_err(LoadError::Syntax)?;
    let report = validate_model(&model);
    if report.passed() {
        Ok(model)
    } else {
        Err(LoadError::Invalid(Box::new(report)))
    }
}

/// Parses without semantic validation (syntax and shape errors only).
pub fn parse_unvalidated(text: &str, max_states: usize) -> Result<EpistemicModel, Vec<ParseError>> {
    let mut errors = Vec::new();
    let mut lines: Vec<(usize, Vec<Spanned>, usize)> = Vec::new();
    let mut last_line = 1;
    for (k, raw) in text.lines().enumerate() {
        let no = k + 1;
        last_line = no;
        match tokenize(no, raw) {
            Ok(toks) if toks.is_empty() => {}
            Ok(toks) => lines.push((no, toks, raw.chars().count() + 1)),
            Err(e) => errors.push(e),
        }
    }

    let mut draft = Draft::default();
    // Header directives first, so later lines can resolve labels.
    for pass in 0..2 {
        for (no, toks, end) in &lines {
            let Tok::Word(head) = &toks[0].tok else {
                if pass == 0 {
                    errors.push(ParseError {
                        line: *no,
                        column: toks[0].column,
                        message: "expected a directive".into(),
                        token: Some(toks[0].tok.to_string()),
                    });
                }
                continue;
            };
            let is_header = matches!(head.as_str(), "model" | "domain" | "states" | "agents");
            if is_header != (pass == 0) {
                continue;
            }
            let mut line = Line {
                no: *no,
                toks,
                pos: 1,
                end_column: *end,
            };
            if let Err(e) = directive(head, &mut line, &mut draft, max_states) {
                errors.push(e);
            }
        }
    }

    let missing = |what: &str| ParseError {
        line: last_line,
        column: 1,
        message: format!("missing `{what}` directive"),
        token: None,
    };
    if draft.domain.is_none() {
        errors.push(missing("domain"));
    }
    if draft.states.is_none() {
        errors.push(missing("states"));
    }
    if draft.agents.is_none() {
        errors.push(missing("agents"));
    }
    if !errors.is_empty() {
        return Err(errors);
    }
    let domain = draft.domain.expect("checked");
    let states = draft.states.take().expect("checked");
    let agents = draft.agents.take().expect("checked");

    let mut partitions = Vec::new();
    for (i, a) in agents.iter().enumerate() {
        match draft.partitions.remove(&i) {
            Some(p) => partitions.push(p),
            None => errors.push(missing(&format!("partition {a}"))),
        }
    }

    let build = |values: Vec<Value>| -> Measure {
        if domain.is_product() {
            let (p, q) = values
                .into_iter()
                .map(|v| match v {
                    Value::Pair(a, b) => (a, b),
                    Value::Scalar(a) => (a.clone(), a),
                })
                .unzip();
            Measure::ProductPrior(p, q)
        } else {
            Measure::Prior(
                values
                    .into_iter()
                    .map(|v| match v {
                        Value::Scalar(a) => a,
                        Value::Pair(a, _) => a,
                    })
                    .collect(),
            )
        }
    };

    let priors = match (draft.common_prior.take(), draft.agent_priors.is_empty()) {
        (Some(_), false) => {
            errors.push(missing("prior (use either `prior common` or per-agent priors, not both)"));
            None
        }
        (Some(values), true) => Some(Priors::Common(build(values))),
        (None, false) => {
            let mut ms = Vec::new();
            for (i, a) in agents.iter().enumerate() {
                match draft.agent_priors.remove(&i) {
                    Some(values) => ms.push(build(values)),
                    None => errors.push(missing(&format!("prior {a}"))),
                }
            }
            Some(Priors::PerAgent(ms))
        }
        (None, true) => {
            errors.push(missing("prior"));
            None
        }
    };

    let priors = match priors {
        Some(Priors::Common(Measure::Prior(base))) if !draft.overrides.is_empty() => {
            Priors::Common(Measure::Table(TableMeasure {
                base,
                overrides: std::mem::take(&mut draft.overrides),
            }))
        }
        Some(p) => {
            if !draft.overrides.is_empty() {
                errors.push(ParseError {
                    line: draft.override_line.unwrap_or(last_line),
                    column: 1,
                    message: "overrides require a common prior over a scalar domain".into(),
                    token: None,
                });
            }
            p
        }
        None => return Err(errors),
    };
    if !errors.is_empty() {
        return Err(errors);
    }

    let name = draft.name.unwrap_or_default();
    EpistemicModel::new(name, domain, states, agents, partitions, priors)
        .map(|m| m.with_events(draft.events))
        .map_err(|e| {
            vec![ParseError {
                line: last_line,
                column: 1,
                message: e.to_string(),
                token: None,
            }]
        })
}

fn directive(head: &str, line: &mut Line<'_>, draft: &mut Draft, max_states: usize) -> Result<(), ParseError> {
    let dup = |line: &Line<'_>, what: &str| ParseError {
        line: line.no,
        column: 1,
        message: format!("duplicate `{what}` directive"),
        token: Some(what.to_string()),
    };
    match head {
        "model" => {
            if draft.name.is_some() {
                return Err(dup(line, "model"));
            }
            let name = match line.peek() {
                Some(Tok::Str(s)) => {
                    let s = s.clone();
                    line.pos += 1;
                    s
                }
                Some(Tok::Word(w)) => {
                    let w = w.clone();
                    line.pos += 1;
                    w
                }
                _ => return Err(line.err("expected a model name")),
            };
            line.finish()?;
            draft.name = Some(name);
        }
        "domain" => {
            if draft.domain.is_some() {
                return Err(dup(line, "domain"));
            }
            let pos = line.pos;
            let w = line.next_word("domain")?;
            let d = w.parse::<Domain>().map_err(|e| line.err_at(pos, e))?;
            line.finish()?;
            draft.domain = Some(d);
        }
        "states" => {
            if draft.states.is_some() {
                return Err(dup(line, "states"));
            }
            let mut names: Vec<String> = Vec::new();
            while !line.at_end() {
                let pos = line.pos;
                let l = line.label("state label")?;
                if names.contains(&l) {
                    return Err(line.err_at(pos, format!("duplicate state `{l}`")));
                }
                names.push(l);
            }
            if names.is_empty() {
                return Err(line.err("`states` needs at least one label"));
            }
            if names.len() > max_states {
                return Err(line.err_at(
                    1 + max_states,
                    format!("{} states exceed the cap of {max_states}", names.len()),
                ));
            }
            draft.states = Some(StateSpace::new(names));
        }
        "agents" => {
            if draft.agents.is_some() {
                return Err(dup(line, "agents"));
            }
            let mut names: Vec<String> = Vec::new();
            while !line.at_end() {
                let pos = line.pos;
                let l = line.label("agent label")?;
                if names.contains(&l) {
                    return Err(line.err_at(pos, format!("duplicate agent `{l}`")));
                }
                names.push(l);
            }
            if names.is_empty() {
                return Err(line.err("`agents` needs at least one label"));
            }
            draft.agents = Some(names);
        }
        "partition" => {
            let (Some(states), Some(agents)) = (&draft.states, &draft.agents) else {
                return Err(line.err("`partition` needs `states` and `agents`"));
            };
            let pos = line.pos;
            let a = line.next_word("agent")?;
            let i = agents
                .iter()
                .position(|x| *x == a)
                .ok_or_else(|| line.err_at(pos, format!("unknown agent `{a}`")))?;
            line.expect(':')?;
            let mut blocks = Vec::new();
            while !line.at_end() {
                blocks.push(line.state_set(states)?);
            }
            if blocks.is_empty() {
                return Err(line.err("partition needs at least one block"));
            }
            if draft.partitions.insert(i, Partition::new(blocks)).is_some() {
                return Err(dup(line, &format!("partition {a}")));
            }
        }
        "prior" => {
            let (Some(states), Some(agents), Some(domain)) = (&draft.states, &draft.agents, draft.domain) else {
                return Err(line.err("`prior` needs `domain`, `states` and `agents`"));
            };
            let pos = line.pos;
            let who = line.next_word("`common` or agent")?;
            line.expect(':')?;
            let mut values: Vec<Option<Value>> = vec![None; states.len()];
            while !line.at_end() {
                let spos = line.pos;
                let w = line.next_word("state label")?;
                let s = states
                    .index_of(&w)
                    .ok_or_else(|| line.err_at(spos, format!("unknown state `{w}`")))?;
                line.expect('=')?;
                let v = line.value(domain)?;
                if values[s].replace(v).is_some() {
                    return Err(line.err_at(spos, format!("state `{w}` assigned twice")));
                }
            }
            if let Some(s) = values.iter().position(Option::is_none) {
                return Err(line.err(format!("prior gives no mass for state `{}`", states.name(s))));
            }
            let values: Vec<Value> = values.into_iter().map(|v| v.expect("checked")).collect();
            if who == "common" {
                if draft.common_prior.replace(values).is_some() {
                    return Err(dup(line, "prior common"));
                }
            } else {
                let i = agents
                    .iter()
                    .position(|x| *x == who)
                    .ok_or_else(|| line.err_at(pos, format!("unknown agent `{who}`")))?;
                if draft.agent_priors.insert(i, values).is_some() {
                    return Err(dup(line, &format!("prior {who}")));
                }
            }
        }
        "override" => {
            let (Some(states), Some(domain)) = (&draft.states, draft.domain) else {
                return Err(line.err("`override` needs `domain` and `states`"));
            };
            let e = line.state_set(states)?;
            line.expect('|')?;
            let f = line.state_set(states)?;
            line.expect('=')?;
            let v = line.value(domain)?;
            line.finish()?;
            if draft.overrides.insert((e, f), v).is_some() {
                return Err(line.err_at(1, "duplicate override"));
            }
            draft.override_line.get_or_insert(line.no);
        }
        "event" => {
            let Some(states) = &draft.states else {
                return Err(line.err("`event` needs `states`"));
            };
            let pos = line.pos;
            let name = line.label("event name")?;
            line.expect('=')?;
            let e = line.state_set(states)?;
            line.finish()?;
            if draft.events.insert(name.clone(), e).is_some() {
                return Err(line.err_at(pos, format!("event `{name}` defined twice")));
            }
        }
        other => {
            return Err(ParseError {
                line: line.no,
                column: line.toks[0].column,
                message: format!("unknown directive `{other}`"),
                token: Some(other.to_string()),
            })
        }
    }
    Ok(())
}

/// Canonical text: states in declaration order, partitions blocks sorted by
/// least member, reduced rationals, overrides and events sorted.
pub fn serialize(model: &EpistemicModel) -> String {
    let mut out = String::new();
    let states = model.states();
    let render = |e: Event| states.render(e);
    out.push_str(&format!("model \"{}\"\n", model.name()));
    out.push_str(&format!("domain {}\n", model.domain()));
    out.push_str(&format!("states {}\n", states.names().join(" ")));
    out.push_str(&format!("agents {}\n", model.agents().join(" ")));
    for (a, p) in model.agents().iter().zip(model.partitions()) {
        let blocks: Vec<String> = p.canonical().blocks().iter().map(|b| render(*b)).collect();
        out.push_str(&format!("partition {a}: {}\n", blocks.join(" ")));
    }
    let prior_line = |who: &str, m: &Measure| -> String {
        let entries: Vec<String> = (0..states.len())
            .map(|s| {
                let v = match m {
                    Measure::Prior(p) => Value::Scalar(p[s].clone()),
                    Measure::Table(t) => Value::Scalar(t.base[s].clone()),
                    Measure::ProductPrior(p, q) => Value::Pair(p[s].clone(), q[s].clone()),
                };
                format!("{}={v}", states.name(s))
            })
            .collect();
        format!("prior {who}: {}\n", entries.join(" "))
    };
    match model.priors() {
        Priors::Common(m) => {
            out.push_str(&prior_line("common", m));
            if let Measure::Table(t) = m {
                for ((e, f), v) in &t.overrides {
                    out.push_str(&format!("override {}|{} = {v}\n", render(*e), render(*f)));
                }
            }
        }
        Priors::PerAgent(ms) => {
            for (a, m) in model.agents().iter().zip(ms) {
                out.push_str(&prior_line(a, m));
            }
        }
    }
    for (name, e) in model.events() {
        out.push_str(&format!("event {name} = {}\n", render(*e)));
    }
    out
}
