//! Operator expression language used by `plausia eval`.
//!
//! ```text
//! expr    := and (("|" | "-") and)*
//! and     := unary ("&" unary)*
//! unary   := "~" unary | primary
//! primary := "(" expr ")" | "{" label* "}" | name
//!          | "K(" agent "," expr ")" | "EK(" expr ")" | "C(" expr ")"
//!          | "B(" agent "," value "," expr ")" | "MB(" value "," expr ")"
//!          | "CB(" value "," expr ")"
//! value   := rational | "(" rational "," rational ")"
//! ```

use std::fmt;

use thiserror::Error;

use crate::event::Event;
use crate::model::EpistemicModel;
use crate::operators::{self, OperatorError, OperatorTrace};
use crate::values::{parse_rational, Value};

/// Error with a 1-based column into the expression text.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("column {column}: {message}")]
pub struct ExprError {
    pub column: usize,
    pub message: String,
}

fn err(column: usize, message: impl Into<String>) -> ExprError {
    ExprError {
        column,
        message: message.into(),
    }
}

/// A name together with the column where it appeared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ident {
    pub name: String,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValueLit {
    pub value: Value,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Set(Vec<Ident>),
    Named(Ident),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Minus(Box<Expr>, Box<Expr>),
    Knows(Ident, Box<Expr>),
    EveryoneKnows(Box<Expr>),
    Common(Box<Expr>),
    Believes(Ident, ValueLit, Box<Expr>),
    MutualBelief(ValueLit, Box<Expr>),
    CommonBelief(ValueLit, Box<Expr>),
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Set(labels) => {
                let names: Vec<&str> = labels.iter().map(|l| l.name.as_str()).collect();
                write!(f, "{{{}}}", names.join(" "))
            }
            Expr::Named(n) => f.write_str(&n.name),
            Expr::Not(x) => write!(f, "~{x}"),
            Expr::And(a, b) => write!(f, "({a} & {b})"),
            Expr::Or(a, b) => write!(f, "({a} | {b})"),
            Expr::Minus(a, b) => write!(f, "({a} - {b})"),
            Expr::Knows(i, x) => write!(f, "K({}, {x})", i.name),
            Expr::EveryoneKnows(x) => write!(f, "EK({x})"),
            Expr::Common(x) => write!(f, "C({x})"),
            Expr::Believes(i, d, x) => write!(f, "B({}, {}, {x})", i.name, d.value),
            Expr::MutualBelief(d, x) => write!(f, "MB({}, {x})", d.value),
            Expr::CommonBelief(d, x) => write!(f, "CB({}, {x})", d.value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Word(String),
    Sym(char),
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

const OPERATORS: [&str; 6] = ["K", "EK", "C", "B", "MB", "CB"];

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let c = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if matches!(c, '(' | ')' | '{' | '}' | ',' | '~' | '&' | '|' | '-') {
            out.push((Tok::Sym(c), k + 1));
            k += 1;
        } else if c.is_ascii_alphanumeric() || matches!(c, '_' | '/' | '.') {
            let start = k;
            while k < chars.len() && (chars[k].is_ascii_alphanumeric() || matches!(chars[k], '_' | '/' | '.')) {
                k += 1;
            }
            out.push((Tok::Word(chars[start..k].iter().collect()), start + 1));
        } else {
            return Err(err(k + 1, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

impl Parser {
    fn column(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.0)
    }

    fn peek2(&self) -> Option<&Tok> {
        self.toks.get(self.pos + 1).map(|t| &t.0)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(err(self.column(), format!("expected `{c}`")))
        }
    }

    fn word(&mut self, what: &str) -> Result<Ident, ExprError> {
        match self.toks.get(self.pos) {
            Some((Tok::Word(w), col)) => {
                let id = Ident {
                    name: w.clone(),
                    column: *col,
                };
                self.pos += 1;
                Ok(id)
            }
            _ => Err(err(self.column(), format!("expected {what}"))),
        }
    }

    fn rational(&mut self) -> Result<crate::values::Rational, ExprError> {
        let w = self.word("rational")?;
        parse_rational(&w.name).map_err(|e| err(w.column, e.to_string()))
    }

    fn value(&mut self) -> Result<ValueLit, ExprError> {
        let column = self.column();
        let value = if self.eat('(') {
            let a = self.rational()?;
            self.expect(',')?;
            let b = self.rational()?;
            self.expect(')')?;
            Value::Pair(a, b)
        } else {
            Value::Scalar(self.rational()?)
        };
        Ok(ValueLit { value, column })
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.and()?;
        loop {
            if self.eat('|') {
                lhs = Expr::Or(Box::new(lhs), Box::new(self.and()?));
            } else if self.eat('-') {
                lhs = Expr::Minus(Box::new(lhs), Box::new(self.and()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn and(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        while self.eat('&') {
            lhs = Expr::And(Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('~') {
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('(') {
            let e = self.expr()?;
            self.expect(')')?;
            return Ok(e);
        }
        if self.eat('{') {
            let mut labels = Vec::new();
            while !self.eat('}') {
                labels.push(self.word("state label or `}`")?);
            }
            return Ok(Expr::Set(labels));
        }
        let is_call = matches!(self.peek(), Some(Tok::Word(w)) if OPERATORS.contains(&w.as_str()))
            && self.peek2() == Some(&Tok::Sym('('));
        let head = self.word("event")?;
        if !is_call {
            if parse_rational(&head.name).is_ok() && !crate::modelfile::is_label(&head.name) {
                return Err(err(head.column, "expected an event, found a value"));
            }
            return Ok(Expr::Named(head));
        }
        self.expect('(')?;
        let node = match head.name.as_str() {
            "K" => {
                let i = self.word("agent")?;
                self.expect(',')?;
                Expr::Knows(i, Box::new(self.expr()?))
            }
            "EK" => Expr::EveryoneKnows(Box::new(self.expr()?)),
            "C" => Expr::Common(Box::new(self.expr()?)),
            "B" => {
                let i = self.word("agent")?;
                self.expect(',')?;
                let d = self.value()?;
                self.expect(',')?;
                Expr::Believes(i, d, Box::new(self.expr()?))
            }
            "MB" => {
                let d = self.value()?;
                self.expect(',')?;
                Expr::MutualBelief(d, Box::new(self.expr()?))
            }
            "CB" => {
                let d = self.value()?;
                self.expect(',')?;
                Expr::CommonBelief(d, Box::new(self.expr()?))
            }
            _ => unreachable!("checked against OPERATORS"),
        };
        self.expect(')')?;
        Ok(node)
    }
}

/// Parses an expression without reference to a model.
pub fn parse_expression(text: &str) -> Result<Expr, ExprError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count() + 1,
    };
    let e = p.expr()?;
    if p.pos < p.toks.len() {
        return Err(err(p.column(), "unexpected trailing input"));
    }
    Ok(e)
}

/// Parses an expression and checks every name, agent and threshold against
/// `model`.
pub fn parse_for_model(text: &str, model: &EpistemicModel) -> Result<Expr, ExprError> {
    let e = parse_expression(text)?;
    evaluate(model, &e)?;
    Ok(e)
}

/// Parses a threshold literal (`1/2` or `(1/10,1/10)`) in `model`'s domain.
/// A scalar is lifted to the diagonal pair in the product domain.
pub fn parse_threshold(text: &str, model: &EpistemicModel) -> Result<Value, ExprError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count() + 1,
    };
    let v = p.value()?;
    if p.pos < p.toks.len() {
        return Err(err(p.column(), "unexpected trailing input"));
    }
    threshold(model, &v)
}

/// A fixpoint run recorded during evaluation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub operator: String,
    pub trace: OperatorTrace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub event: Event,
    pub traces: Vec<TraceEntry>,
}

/// Resolves an agent reference: label first, then 1-based index.
pub fn resolve_agent(model: &EpistemicModel, name: &str) -> Option<usize> {
    model.agent_index(name).or_else(|| {
        name.parse::<usize>()
            .ok()
            .filter(|&k| k >= 1 && k <= model.num_agents())
            .map(|k| k - 1)
    })
}

pub fn evaluate(model: &EpistemicModel, e: &Expr) -> Result<Evaluation, ExprError> {
    let mut traces = Vec::new();
    let event = eval(model, e, &mut traces)?;
    Ok(Evaluation { event, traces })
}

fn agent(model: &EpistemicModel, id: &Ident) -> Result<usize, ExprError> {
    resolve_agent(model, &id.name).ok_or_else(|| err(id.column, format!("unknown agent `{}`", id.name)))
}

fn threshold(model: &EpistemicModel, d: &ValueLit) -> Result<Value, ExprError> {
    let domain = model.domain();
    let v = match (&d.value, domain.is_product()) {
        (Value::Scalar(r), true) => Value::Pair(r.clone(), r.clone()),
        (v, _) => v.clone(),
    };
    if domain.contains(&v) {
        Ok(v)
    } else {
        Err(err(d.column, format!("threshold {} is not in domain {domain}", d.value)))
    }
}

fn op_err(column: usize, e: OperatorError) -> ExprError {
    err(column, e.to_string())
}

fn eval(model: &EpistemicModel, e: &Expr, traces: &mut Vec<TraceEntry>) -> Result<Event, ExprError> {
    let full = model.full();
    Ok(match e {
        Expr::Set(labels) => {
            let mut ev = Event::EMPTY;
            for l in labels {
                let s = model
                    .states()
                    .index_of(&l.name)
                    .ok_or_else(|| err(l.column, format!("unknown state `{}`", l.name)))?;
                ev = ev | Event::singleton(s);
            }
            ev
        }
        Expr::Named(n) => *model
            .events()
            .get(&n.name)
            .ok_or_else(|| err(n.column, format!("unknown event `{}`", n.name)))?,
        Expr::Not(x) => eval(model, x, traces)?.complement(model.num_states()),
        Expr::And(a, b) => eval(model, a, traces)? & eval(model, b, traces)?,
        Expr::Or(a, b) => eval(model, a, traces)? | eval(model, b, traces)?,
        Expr::Minus(a, b) => eval(model, a, traces)? - eval(model, b, traces)?,
        Expr::Knows(i, x) => {
            let i_ = agent(model, i)?;
            let x = eval(model, x, traces)?;
            operators::knows(model, i_, x).map_err(|e| op_err(i.column, e))?
        }
        Expr::EveryoneKnows(x) => operators::everyone_knows(model, eval(model, x, traces)?),
        Expr::Common(x) => {
            let (z, trace) = operators::common_knowledge(model, eval(model, x, traces)?);
            traces.push(TraceEntry {
                operator: e.to_string(),
                trace,
            });
            z
        }
        Expr::Believes(i, d, x) => {
            let i_ = agent(model, i)?;
            let d_ = threshold(model, d)?;
            let x = eval(model, x, traces)?;
            operators::d_believes(model, i_, &d_, x).map_err(|e| op_err(d.column, e))?
        }
        Expr::MutualBelief(d, x) => {
            let d_ = threshold(model, d)?;
            let x = eval(model, x, traces)?;
            operators::mutual_belief(model, &d_, x).map_err(|e| op_err(d.column, e))?
        }
        Expr::CommonBelief(d, x) => {
            let d_ = threshold(model, d)?;
            let x = eval(model, x, traces)?;
            let (z, trace) = operators::common_belief(model, &d_, x).map_err(|e| op_err(d.column, e))?;
            traces.push(TraceEntry {
                operator: e.to_string(),
                trace,
            });
            z
        }
    } & full)
}
