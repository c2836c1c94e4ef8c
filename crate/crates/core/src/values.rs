//! Plausibility value domains.
//!
//! A domain is a partially ordered set with a least element `⊥` and a
//! greatest element `⊤`, a partial addition `⊕`, the subtraction `⊖` it
//! induces, and a partial multiplication `⊗`. Three concrete domains are
//! supported: rationals in `[0,1]`, the grid `{n/k}`, and pairs of unit
//! rationals ordered componentwise. All arithmetic is exact.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::report::{AxiomId, CheckReport, ReportBuilder, Subject, Witness};

pub type Rational = BigRational;

pub fn rational(numer: i64, denom: i64) -> Rational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Parses `n`, `n/d` (reduced on the way in). Decimal notation is refused.
pub fn parse_rational(text: &str) -> Result<Rational, ValueParseError> {
    let text = text.trim();
    if text.contains('.') || text.contains(['e', 'E']) {
        return Err(ValueParseError::Decimal(text.to_string()));
    }
    let valid = !text.is_empty()
        && text
            .chars()
            .all(|c| c.is_ascii_digit() || c == '/' || c == '-');
    if !valid {
        return Err(ValueParseError::Malformed(text.to_string()));
    }
    match text.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n
                .parse()
                .map_err(|_| ValueParseError::Malformed(text.to_string()))?;
            let d: BigInt = d
                .parse()
                .map_err(|_| ValueParseError::Malformed(text.to_string()))?;
            if d.is_zero() {
                return Err(ValueParseError::ZeroDenominator(text.to_string()));
            }
            Ok(BigRational::new(n, d))
        }
        None => text
            .parse::<BigInt>()
            .map(BigRational::from_integer)
            .map_err(|_| ValueParseError::Malformed(text.to_string())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ValueParseError {
    #[error("decimal literal `{0}` is not accepted; write an exact fraction such as 13/50")]
    Decimal(String),
    #[error("malformed rational `{0}`")]
    Malformed(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("malformed pair `{0}`; expected `(a,b)`")]
    MalformedPair(String),
}

/// A plausibility value: one rational, or a pair for the product domain.
///
/// The derived `Ord` is structural (used for deterministic maps), not the
/// domain order; use [`Domain::compare`] for the latter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Scalar(Rational),
    Pair(Rational, Rational),
}

impl Value {
    pub fn scalar(numer: i64, denom: i64) -> Self {
        Value::Scalar(rational(numer, denom))
    }

    pub fn pair(a: (i64, i64), b: (i64, i64)) -> Self {
        Value::Pair(rational(a.0, a.1), rational(b.0, b.1))
    }

    pub fn zero() -> Self {
        Value::Scalar(Rational::zero())
    }

    pub fn one() -> Self {
        Value::Scalar(Rational::one())
    }

    pub fn as_scalar(&self) -> Option<&Rational> {
        match self {
            Value::Scalar(r) => Some(r),
            Value::Pair(..) => None,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Scalar(r) => write!(f, "{r}"),
            Value::Pair(a, b) => write!(f, "({a},{b})"),
        }
    }
}

impl FromStr for Value {
    type Err = ValueParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some(inner) = s.strip_prefix('(') {
            let inner = inner
                .strip_suffix(')')
                .ok_or_else(|| ValueParseError::MalformedPair(s.to_string()))?;
            let (a, b) = inner
                .split_once(',')
                .ok_or_else(|| ValueParseError::MalformedPair(s.to_string()))?;
            Ok(Value::Pair(parse_rational(a)?, parse_rational(b)?))
        } else {
            parse_rational(s).map(Value::Scalar)
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparison {
    LessThan,
    Equal,
    GreaterThan,
    Incomparable,
}

impl Comparison {
    pub fn reverse(self) -> Self {
        match self {
            Comparison::LessThan => Comparison::GreaterThan,
            Comparison::GreaterThan => Comparison::LessThan,
            other => other,
        }
    }

    pub fn is_le(self) -> bool {
        matches!(self, Comparison::LessThan | Comparison::Equal)
    }

    pub fn is_ge(self) -> bool {
        matches!(self, Comparison::GreaterThan | Comparison::Equal)
    }
}

impl From<Ordering> for Comparison {
    fn from(o: Ordering) -> Self {
        match o {
            Ordering::Less => Comparison::LessThan,
            Ordering::Equal => Comparison::Equal,
            Ordering::Greater => Comparison::GreaterThan,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("value {value} does not belong to domain {domain}")]
    Mismatch { domain: Domain, value: Value },
}

/// The plausibility domains a model may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Domain {
    /// Rationals in `[0,1]` with ordinary order, `+` and `·`.
    UnitRational,
    /// `{n/k | 0 ≤ n ≤ k}`; `⊗` is defined only when the product stays on the grid.
    Grid(u32),
    /// Pairs of unit rationals, ordered and combined componentwise.
    ProductUnitRational,
}

fn in_unit(r: &Rational) -> bool {
    !r.is_negative() && *r <= Rational::one()
}

fn on_grid(r: &Rational, k: u32) -> bool {
    (r * BigInt::from(k)).is_integer()
}

impl Domain {
    pub fn top(&self) -> Value {
        match self {
            Domain::ProductUnitRational => Value::Pair(Rational::one(), Rational::one()),
            _ => Value::one(),
        }
    }

    pub fn bot(&self) -> Value {
        match self {
            Domain::ProductUnitRational => Value::Pair(Rational::zero(), Rational::zero()),
            _ => Value::zero(),
        }
    }

    pub fn is_product(&self) -> bool {
        matches!(self, Domain::ProductUnitRational)
    }

    pub fn is_totally_ordered(&self) -> bool {
        !self.is_product()
    }

    pub fn contains(&self, v: &Value) -> bool {
        match (self, v) {
            (Domain::UnitRational, Value::Scalar(r)) => in_unit(r),
            (Domain::Grid(k), Value::Scalar(r)) => in_unit(r) && on_grid(r, *k),
            (Domain::ProductUnitRational, Value::Pair(a, b)) => in_unit(a) && in_unit(b),
            _ => false,
        }
    }

    /// Lifts a unit rational into the domain (`r ↦ (r,r)` for pairs).
    pub fn embed(&self, r: Rational) -> Option<Value> {
        let v = match self {
            Domain::ProductUnitRational => Value::Pair(r.clone(), r),
            _ => Value::Scalar(r),
        };
        self.contains(&v).then_some(v)
    }

    fn ensure(&self, v: &Value) -> Result<(), DomainError> {
        if self.contains(v) {
            Ok(())
        } else {
            Err(DomainError::Mismatch {
                domain: *self,
                value: v.clone(),
            })
        }
    }

    pub fn compare(&self, a: &Value, b: &Value) -> Result<Comparison, DomainError> {
        self.ensure(a)?;
        self.ensure(b)?;
        Ok(compare_values(a, b))
    }

    /// `a ≥ b` in the domain order; incomparable pairs are not `≥`.
    pub fn geq(&self, a: &Value, b: &Value) -> bool {
        compare_values(a, b).is_ge()
    }

    pub fn leq(&self, a: &Value, b: &Value) -> bool {
        compare_values(a, b).is_le()
    }

    pub fn oplus(&self, a: &Value, b: &Value) -> Result<Option<Value>, DomainError> {
        self.ensure(a)?;
        self.ensure(b)?;
        let sum = match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x + y),
            (Value::Pair(x1, x2), Value::Pair(y1, y2)) => Value::Pair(x1 + y1, x2 + y2),
            _ => unreachable!("ensure() admits one shape per domain"),
        };
        Ok(self.contains(&sum).then_some(sum))
    }

    /// `b ⊖ a`: the unique `c` with `a ⊕ c = b`, if there is one.
    pub fn ominus(&self, b: &Value, a: &Value) -> Result<Option<Value>, DomainError> {
        self.ensure(a)?;
        self.ensure(b)?;
        let diff = match (b, a) {
            (Value::Scalar(y), Value::Scalar(x)) => Value::Scalar(y - x),
            (Value::Pair(y1, y2), Value::Pair(x1, x2)) => Value::Pair(y1 - x1, y2 - x2),
            _ => unreachable!("ensure() admits one shape per domain"),
        };
        Ok(self.contains(&diff).then_some(diff))
    }

    pub fn otimes(&self, a: &Value, b: &Value) -> Result<Option<Value>, DomainError> {
        self.ensure(a)?;
        self.ensure(b)?;
        let prod = match (a, b) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(x * y),
            (Value::Pair(x1, x2), Value::Pair(y1, y2)) => Value::Pair(x1 * y1, x2 * y2),
            _ => unreachable!("ensure() admits one shape per domain"),
        };
        Ok(self.contains(&prod).then_some(prod))
    }

    /// Greatest lower bound of a nonempty set of values.
    pub fn meet<'a, I: IntoIterator<Item = &'a Value>>(&self, values: I) -> Option<Value> {
        fold_componentwise(values, |x, y| if y < x { y } else { x })
    }

    /// Least upper bound of a nonempty set of values.
    pub fn join<'a, I: IntoIterator<Item = &'a Value>>(&self, values: I) -> Option<Value> {
        fold_componentwise(values, |x, y| if y > x { y } else { x })
    }

    /// Every value of a finite grid domain, in ascending order.
    pub fn grid_values(&self) -> Option<Vec<Value>> {
        match self {
            Domain::Grid(k) => Some(
                (0..=*k as i64)
                    .map(|n| Value::scalar(n, *k as i64))
                    .collect(),
            ),
            _ => None,
        }
    }
}

fn fold_componentwise<'a, I, F>(values: I, pick: F) -> Option<Value>
where
    I: IntoIterator<Item = &'a Value>,
    F: Fn(Rational, Rational) -> Rational,
{
    let mut iter = values.into_iter();
    let mut acc = iter.next()?.clone();
    for v in iter {
        acc = match (acc, v) {
            (Value::Scalar(x), Value::Scalar(y)) => Value::Scalar(pick(x, y.clone())),
            (Value::Pair(x1, x2), Value::Pair(y1, y2)) => {
                Value::Pair(pick(x1, y1.clone()), pick(x2, y2.clone()))
            }
            _ => return None,
        };
    }
    Some(acc)
}

/// Order relation on well-shaped values; mixed shapes are incomparable.
pub(crate) fn compare_values(a: &Value, b: &Value) -> Comparison {
    match (a, b) {
        (Value::Scalar(x), Value::Scalar(y)) => x.cmp(y).into(),
        (Value::Pair(x1, x2), Value::Pair(y1, y2)) => match (x1.cmp(y1), x2.cmp(y2)) {
            (Ordering::Equal, Ordering::Equal) => Comparison::Equal,
            (Ordering::Less | Ordering::Equal, Ordering::Less | Ordering::Equal) => {
                Comparison::LessThan
            }
            (Ordering::Greater | Ordering::Equal, Ordering::Greater | Ordering::Equal) => {
                Comparison::GreaterThan
            }
            _ => Comparison::Incomparable,
        },
        _ => Comparison::Incomparable,
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Domain::UnitRational => f.write_str("unit-rational"),
            Domain::Grid(k) => write!(f, "grid/{k}"),
            Domain::ProductUnitRational => f.write_str("product-unit-rational"),
        }
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unit-rational" => Ok(Domain::UnitRational),
            "product-unit-rational" => Ok(Domain::ProductUnitRational),
            _ => {
                let k = s
                    .strip_prefix("grid/")
                    .ok_or_else(|| format!("unknown domain `{s}`"))?;
                match k.parse::<u32>() {
                    Ok(k) if k >= 1 => Ok(Domain::Grid(k)),
                    _ => Err(format!("grid denominator must be a positive integer, got `{k}`")),
                }
            }
        }
    }
}

impl Serialize for Domain {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// The finite value set the domain axioms are quantified over: the sample
/// itself, `⊥`, `⊤`, and each sampled value's complement `⊤ ⊖ a`.
pub fn axiom_sample(domain: &Domain, sample: &[Value]) -> Vec<Value> {
    let top = domain.top();
    let mut out: Vec<Value> = vec![domain.bot(), top.clone()];
    for v in sample.iter().filter(|v| domain.contains(v)) {
        out.push(v.clone());
        if let Ok(Some(c)) = domain.ominus(&top, v) {
            out.push(c);
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Checks A1, A2, ASSOC, M1, M2 and M4 over `sample` (see [`axiom_sample`]).
///
/// Reports come back in [`AxiomId`] order.
pub fn check_domain_axioms(domain: &Domain, sample: &[Value]) -> Vec<CheckReport> {
    let s = axiom_sample(domain, sample);
    let dropped = sample.iter().filter(|v| !domain.contains(v)).count();
    let mut reports = vec![
        check_a1(domain, &s),
        check_a2(domain, &s),
        check_m1(domain, &s),
        check_m2(domain, &s),
        check_m4(domain, &s),
        check_assoc(domain, &s),
    ];
    if dropped > 0 {
        for r in &mut reports {
            r.notes
                .push(format!("{dropped} sampled value(s) outside {domain} ignored"));
        }
    }
    reports
}

// Values in `s` are members of `domain`, so the Results below cannot fail.
fn add(domain: &Domain, a: &Value, b: &Value) -> Option<Value> {
    domain.oplus(a, b).ok().flatten()
}

fn mul(domain: &Domain, a: &Value, b: &Value) -> Option<Value> {
    domain.otimes(a, b).ok().flatten()
}

fn triple(detail: &str, a: &Value, b: &Value, c: &Value) -> Witness {
    Witness::new(detail)
        .value("a", Some(a.clone()))
        .value("b", Some(b.clone()))
        .value("c", Some(c.clone()))
}

pub(crate) fn check_a1(domain: &Domain, s: &[Value]) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::A1));
    for a in s {
        for b in s {
            let ab = add(domain, a, b);
            let ba = add(domain, b, a);
            for c in s {
                let c_le_b = domain.leq(c, b);
                if let Some(ab) = &ab {
                    rep.examine();
                    let rhs = add(domain, a, c).is_some_and(|ac| domain.leq(&ac, ab));
                    if c_le_b != rhs {
                        rep.fail(triple("c ≤ b iff a⊕c ≤ a⊕b fails", a, b, c));
                    }
                }
                if let Some(ba) = &ba {
                    rep.examine();
                    let rhs = add(domain, c, a).is_some_and(|ca| domain.leq(&ca, ba));
                    if c_le_b != rhs {
                        rep.fail(triple("c ≤ b iff c⊕a ≤ b⊕a fails", a, b, c));
                    }
                }
            }
        }
    }
    rep.finish()
}

pub(crate) fn check_a2(domain: &Domain, s: &[Value]) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::A2));
    let top = domain.top();
    for a in s {
        rep.examine();
        let complement = domain
            .ominus(&top, a)
            .ok()
            .flatten()
            .filter(|b| add(domain, a, b).as_ref() == Some(&top))
            .or_else(|| {
                s.iter()
                    .find(|b| add(domain, a, b).as_ref() == Some(&top))
                    .cloned()
            });
        if complement.is_none() {
            rep.fail(Witness::new("no b with a⊕b=⊤").value("a", Some(a.clone())));
        }
    }
    rep.finish()
}

pub(crate) fn check_assoc(domain: &Domain, s: &[Value]) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::ASSOC));
    for a in s {
        for b in s {
            let ab = add(domain, a, b);
            for c in s {
                rep.examine();
                let left = add(domain, b, c).and_then(|bc| add(domain, a, &bc));
                let right = ab.as_ref().and_then(|ab| add(domain, ab, c));
                if left != right {
                    rep.fail(
                        triple("a⊕(b⊕c) ≠ (a⊕b)⊕c", a, b, c)
                            .value("a⊕(b⊕c)", left)
                            .value("(a⊕b)⊕c", right),
                    );
                }
            }
        }
    }
    rep.finish()
}

pub(crate) fn check_m1(domain: &Domain, s: &[Value]) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::M1));
    for a in s {
        let products: Vec<Option<Value>> = s.iter().map(|b| mul(domain, a, b)).collect();
        for (b, ab) in s.iter().zip(&products) {
            let Some(ab) = ab else { continue };
            for (c, ac) in s.iter().zip(&products) {
                let Some(ac) = ac else { continue };
                if !domain.geq(b, c) {
                    continue;
                }
                rep.examine();
                if !domain.geq(ab, ac) {
                    rep.fail(triple("b ≥ c but a⊗b ≱ a⊗c", a, b, c));
                }
            }
        }
    }
    rep.finish()
}

pub(crate) fn check_m2(domain: &Domain, s: &[Value]) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::M2));
    for a in s {
        for b in s {
            let Some(ab) = add(domain, a, b) else { continue };
            for c in s {
                rep.examine();
                let left = mul(domain, &ab, c);
                let right = match (mul(domain, a, c), mul(domain, b, c)) {
                    (Some(ac), Some(bc)) => add(domain, &ac, &bc),
                    _ => None,
                };
                if left.is_none() || left != right {
                    rep.fail(
                        triple("(a⊕b)⊗c ≠ (a⊗c)⊕(b⊗c)", a, b, c)
                            .value("(a⊕b)⊗c", left)
                            .value("(a⊗c)⊕(b⊗c)", right),
                    );
                }
            }
        }
    }
    rep.finish()
}

pub(crate) fn check_m4(domain: &Domain, s: &[Value]) -> CheckReport {
    let mut rep = ReportBuilder::new(Subject::Axiom(AxiomId::M4));
    let bot = domain.bot();
    for a in s.iter().filter(|a| **a != bot) {
        let products: Vec<Option<Value>> = s.iter().map(|b| mul(domain, a, b)).collect();
        for (b, ab) in s.iter().zip(&products) {
            let Some(ab) = ab else { continue };
            for (c, ac) in s.iter().zip(&products) {
                let Some(ac) = ac else { continue };
                if !domain.geq(ab, ac) {
                    continue;
                }
                rep.examine();
                if !domain.geq(b, c) {
                    rep.fail(triple("a≠⊥ and a⊗b ≥ a⊗c but b ≱ c", a, b, c));
                }
            }
        }
    }
    rep.finish()
}
