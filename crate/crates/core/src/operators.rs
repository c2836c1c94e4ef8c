//! Knowledge and belief operators on events.
//!
//! Common knowledge and common d-belief are greatest fixpoints computed from
//! above: `Z₀ = E` (resp. `B^d(E)`), `Z_{n+1} = Z_n ∩ K(Z_n)` (resp.
//! `Z_n ∩ B^d(Z_n)`). Every run records its iteration history.

use thiserror::Error;

use crate::event::Event;
use crate::model::{EpistemicModel, Measure, ModelError};
use crate::values::{Domain, DomainError, Value};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OperatorError {
    #[error("unknown agent index {0}")]
    UnknownAgent(usize),
    #[error("threshold {value} does not belong to domain {domain}")]
    DomainMismatch { domain: Domain, value: Value },
    #[error(
        "belief operator of agent {agent} is not monotone: B({smaller:?}) is not contained in B({larger:?})"
    )]
    NonMonotone {
        agent: usize,
        smaller: Event,
        larger: Event,
    },
    #[error(transparent)]
    Domain(#[from] DomainError),
}

impl From<ModelError> for OperatorError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::UnknownAgent(i) => OperatorError::UnknownAgent(i),
            other => unreachable!("operators only look up agents: {other}"),
        }
    }
}

/// Which agents a self-evidence test quantifies over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    Agent(usize),
    All,
}

/// Iteration history of one fixpoint run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorTrace {
    pub initial: Event,
    /// `Z₁, Z₂, …` up to and including the fixpoint.
    pub iterations: Vec<Event>,
    pub result: Event,
}

impl OperatorTrace {
    pub fn iteration_count(&self) -> usize {
        self.iterations.len()
    }
}

/// `K_i(E) = {w | Π_i(w) ⊆ E}`.
pub fn knows(model: &EpistemicModel, agent: usize, e: Event) -> Result<Event, OperatorError> {
    let part = model.partition(agent)?;
    Ok(part
        .blocks()
        .iter()
        .filter(|b| b.is_subset(e))
        .fold(Event::EMPTY, |acc, b| acc | *b))
}

/// `K(E) = ⋂_i K_i(E)`.
pub fn everyone_knows(model: &EpistemicModel, e: Event) -> Event {
    (0..model.num_agents()).fold(model.full(), |acc, i| {
        acc & knows(model, i, e).expect("agent index in range")
    })
}

fn agents_in(model: &EpistemicModel, scope: Scope) -> Result<Vec<usize>, OperatorError> {
    match scope {
        Scope::Agent(i) if i < model.num_agents() => Ok(vec![i]),
        Scope::Agent(i) => Err(OperatorError::UnknownAgent(i)),
        Scope::All => Ok((0..model.num_agents()).collect()),
    }
}

/// First `(agent, state)` with `w ∈ E` but `Π_i(w) ⊄ E`, if any.
pub fn self_evidence_witness(
    model: &EpistemicModel,
    e: Event,
    scope: Scope,
) -> Result<Option<(usize, usize)>, OperatorError> {
    for i in agents_in(model, scope)? {
        let k = knows(model, i, e)?;
        if let Some(w) = (e - k).first() {
            return Ok(Some((i, w)));
        }
    }
    Ok(None)
}

/// `E ⊆ K_i(E)` for the agents in scope.
pub fn is_self_evident(model: &EpistemicModel, e: Event, scope: Scope) -> Result<bool, OperatorError> {
    Ok(self_evidence_witness(model, e, scope)?.is_none())
}

/// `C(E)`: the largest self-evident subset of `E`.
pub fn common_knowledge(model: &EpistemicModel, e: Event) -> (Event, OperatorTrace) {
    let mut z = e & model.full();
    let initial = z;
    let mut iterations = Vec::new();
    loop {
        let next = z & everyone_knows(model, z);
        iterations.push(next);
        if next == z {
            break;
        }
        z = next;
    }
    (
        z,
        OperatorTrace {
            initial,
            iterations,
            result: z,
        },
    )
}

fn check_threshold(model: &EpistemicModel, d: &Value) -> Result<(), OperatorError> {
    let domain = model.domain();
    if domain.contains(d) {
        Ok(())
    } else {
        Err(OperatorError::DomainMismatch {
            domain,
            value: d.clone(),
        })
    }
}

fn believes_unchecked(model: &EpistemicModel, agent: usize, d: &Value, e: Event) -> Result<Event, OperatorError> {
    let part = model.partition(agent)?;
    let measure = model.measure(agent)?;
    let domain = model.domain();
    let mut out = Event::EMPTY;
    for block in part.blocks() {
        if let Some(v) = measure.cond(model.algebra(), e, *block) {
            if domain.geq(&v, d) {
                out = out | *block;
            }
        }
    }
    Ok(out)
}

/// `B_i^d(E) = {w | Pl_i(E | Π_i(w)) ≥ d}`. Undefined or incomparable
/// posteriors exclude the state.
pub fn d_believes(model: &EpistemicModel, agent: usize, d: &Value, e: Event) -> Result<Event, OperatorError> {
    check_threshold(model, d)?;
    believes_unchecked(model, agent, d, e)
}

/// `B^d(E) = ⋂_i B_i^d(E)`.
pub fn mutual_belief(model: &EpistemicModel, d: &Value, e: Event) -> Result<Event, OperatorError> {
    check_threshold(model, d)?;
    let mut acc = model.full();
    for i in 0..model.num_agents() {
        acc = acc & believes_unchecked(model, i, d, e)?;
    }
    Ok(acc)
}

/// `E ⊆ B_i^d(E)` for the agents in scope.
pub fn is_d_self_evident(
    model: &EpistemicModel,
    d: &Value,
    e: Event,
    scope: Scope,
) -> Result<bool, OperatorError> {
    Ok(d_self_evidence_witness(model, d, e, scope)?.is_none())
}

/// First `(agent, state)` with `w ∈ E` but `w ∉ B_i^d(E)`, if any.
pub fn d_self_evidence_witness(
    model: &EpistemicModel,
    d: &Value,
    e: Event,
    scope: Scope,
) -> Result<Option<(usize, usize)>, OperatorError> {
    check_threshold(model, d)?;
    for i in agents_in(model, scope)? {
        let b = believes_unchecked(model, i, d, e)?;
        if let Some(w) = (e - b).first() {
            return Ok(Some((i, w)));
        }
    }
    Ok(None)
}

/// `CB^d(E)`: the largest d-self-evident subset of `B^d(E)`.
///
/// For table measures, which need not satisfy CP3, each step also checks
/// that shrinking the argument did not grow any agent's belief set.
pub fn common_belief(model: &EpistemicModel, d: &Value, e: Event) -> Result<(Event, OperatorTrace), OperatorError> {
    check_threshold(model, d)?;
    let guard_monotone = (0..model.num_agents())
        .any(|i| matches!(model.measure(i), Ok(Measure::Table(_))));
    let beliefs = |z: Event| -> Result<Vec<Event>, OperatorError> {
        (0..model.num_agents())
            .map(|i| believes_unchecked(model, i, d, z))
            .collect()
    };

    let mut z = mutual_belief(model, d, e)?;
    let initial = z;
    let mut iterations = Vec::new();
    let mut prev_beliefs: Option<(Event, Vec<Event>)> = None;
    loop {
        let bs = beliefs(z)?;
        if guard_monotone {
            if let Some((larger, prev)) = &prev_beliefs {
                for (i, (now, before)) in bs.iter().zip(prev).enumerate() {
                    if !now.is_subset(*before) {
                        return Err(OperatorError::NonMonotone {
                            agent: i,
                            smaller: z,
                            larger: *larger,
                        });
                    }
                }
            }
        }
        let next = bs.iter().fold(z, |acc, b| acc & *b);
        iterations.push(next);
        if next == z {
            break;
        }
        prev_beliefs = Some((z, bs));
        z = next;
    }
    Ok((
        z,
        OperatorTrace {
            initial,
            iterations,
            result: z,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::event::StateSpace;
    use crate::model::{Partition, Priors};
    use crate::values::rational;

    fn ev(states: &[usize]) -> Event {
        Event::from_states(states.iter().map(|s| s - 1))
    }

    /// W={1..4}, uniform, Π₁={{1,2},{3,4}}, Π₂ given by labels.
    fn model(second: &[usize]) -> EpistemicModel {
        EpistemicModel::new(
            "ops",
            Domain::UnitRational,
            StateSpace::numbered(4),
            vec!["1".into(), "2".into()],
            vec![
                Partition::from_labels(&[0, 0, 1, 1]),
                Partition::from_labels(second),
            ],
            Priors::Common(Measure::Prior(vec![rational(1, 4); 4])),
        )
        .unwrap()
    }

    fn mixed() -> EpistemicModel {
        model(&[0, 1, 1, 2])
    }

    #[test]
    fn knows_examples() {
        let m = mixed();
        assert_eq!(knows(&m, 0, ev(&[1, 2, 3])).unwrap(), ev(&[1, 2]));
        assert_eq!(knows(&m, 0, m.full()).unwrap(), m.full());
        assert_eq!(knows(&m, 1, Event::EMPTY).unwrap(), Event::EMPTY);
        assert_eq!(knows(&m, 2, m.full()), Err(OperatorError::UnknownAgent(2)));
    }

    #[test]
    fn everyone_knows_intersects() {
        let m = mixed();
        // K_1 = {1,2}, K_2 = {1,2,3}.
        assert_eq!(knows(&m, 0, ev(&[1, 2, 3])).unwrap(), ev(&[1, 2]));
        assert_eq!(knows(&m, 1, ev(&[1, 2, 3])).unwrap(), ev(&[1, 2, 3]));
        assert_eq!(everyone_knows(&m, ev(&[1, 2, 3])), ev(&[1, 2]));
        assert_eq!(everyone_knows(&m, m.full()), m.full());
    }

    #[test]
    fn single_agent_everyone_knows_is_knows() {
        let m = EpistemicModel::new(
            "solo",
            Domain::UnitRational,
            StateSpace::numbered(3),
            vec!["a".into()],
            vec![Partition::from_labels(&[0, 0, 1])],
            Priors::Common(Measure::Prior(vec![rational(1, 3); 3])),
        )
        .unwrap();
        for e in Event::all(3) {
            assert_eq!(everyone_knows(&m, e), knows(&m, 0, e).unwrap());
        }
    }

    #[test]
    fn self_evidence_examples() {
        let m = mixed();
        assert!(is_self_evident(&m, ev(&[1, 2]), Scope::Agent(0)).unwrap());
        assert_eq!(
            self_evidence_witness(&m, ev(&[1, 2]), Scope::Agent(1)).unwrap(),
            Some((1, 1))
        );
        assert!(is_self_evident(&m, m.full(), Scope::All).unwrap());
    }

    #[test]
    fn common_knowledge_examples() {
        let m = mixed();
        assert_eq!(common_knowledge(&m, ev(&[1, 2])).0, Event::EMPTY);
        assert_eq!(common_knowledge(&m, m.full()).0, m.full());
        let same = model(&[0, 0, 1, 1]);
        assert_eq!(common_knowledge(&same, ev(&[1, 2])).0, ev(&[1, 2]));
    }

    #[test]
    fn trace_is_decreasing_and_short() {
        let m = mixed();
        for e in Event::all(4) {
            let (res, trace) = common_knowledge(&m, e);
            assert_eq!(trace.result, res);
            assert!(trace.iteration_count() <= m.num_states() + 1);
            let mut prev = trace.initial;
            for z in &trace.iterations {
                assert!(z.is_subset(prev));
                prev = *z;
            }
        }
    }

    #[test]
    fn belief_examples() {
        let m = mixed();
        let half = Value::scalar(1, 2);
        assert_eq!(d_believes(&m, 0, &half, ev(&[1, 2])).unwrap(), ev(&[1, 2]));
        assert_eq!(d_believes(&m, 1, &half, ev(&[1, 2])).unwrap(), ev(&[1, 2, 3]));
        assert_eq!(mutual_belief(&m, &half, ev(&[1, 2])).unwrap(), ev(&[1, 2]));
        assert_eq!(common_belief(&m, &half, ev(&[1, 2])).unwrap().0, ev(&[1, 2]));
        assert_eq!(
            common_belief(&m, &Value::one(), ev(&[1, 2])).unwrap().0,
            Event::EMPTY
        );
        assert_eq!(
            common_belief(&m, &half, m.full()).unwrap().0,
            m.full()
        );
    }

    #[test]
    fn d_self_evidence_examples() {
        let m = mixed();
        let half = Value::scalar(1, 2);
        assert!(is_d_self_evident(&m, &half, ev(&[1, 2]), Scope::All).unwrap());
        assert_eq!(
            d_self_evidence_witness(&m, &Value::one(), ev(&[1, 2]), Scope::Agent(1)).unwrap(),
            Some((1, 1))
        );
        for i in 0..2 {
            for block in m.partition(i).unwrap().blocks() {
                assert!(is_d_self_evident(&m, &Value::one(), *block, Scope::Agent(i)).unwrap());
            }
        }
    }

    #[test]
    fn bottom_threshold_believes_everything_defined() {
        let m = mixed();
        let bot = Value::zero();
        assert_eq!(d_believes(&m, 0, &bot, Event::EMPTY).unwrap(), m.full());
    }

    #[test]
    fn threshold_outside_domain_is_rejected() {
        let m = mixed();
        let err = d_believes(&m, 0, &Value::pair((1, 2), (1, 2)), m.full()).unwrap_err();
        assert!(matches!(err, OperatorError::DomainMismatch { .. }));
    }
}
