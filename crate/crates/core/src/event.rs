//! Events as bitmasks over a finite, ordered state space.

use std::fmt;
use std::ops::{BitAnd, BitOr, Not, Sub};

/// Hard ceiling on the number of states an [`Event`] can address.
pub const MAX_ADDRESSABLE_STATES: usize = 24;

/// A set of states, stored as a membership mask over state indices.
///
/// Events do not know the size of the state space they live in, so
/// complement is always taken relative to an explicit universe.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Event(u64);

impl Event {
    pub const EMPTY: Event = Event(0);

    pub fn from_bits(bits: u64) -> Self {
        Event(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    /// The full event `W` over `n` states.
    pub fn full(n: usize) -> Self {
        if n >= 64 {
            Event(u64::MAX)
        } else {
            Event((1u64 << n) - 1)
        }
    }

    pub fn singleton(state: usize) -> Self {
        Event(1u64 << state)
    }

    pub fn from_states<I: IntoIterator<Item = usize>>(states: I) -> Self {
        Event(states.into_iter().fold(0, |acc, s| acc | (1u64 << s)))
    }

    pub fn contains(self, state: usize) -> bool {
        state < 64 && self.0 & (1u64 << state) != 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_subset(self, other: Event) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_disjoint(self, other: Event) -> bool {
        self.0 & other.0 == 0
    }

    pub fn complement(self, n: usize) -> Event {
        Event(!self.0 & Event::full(n).0)
    }

    /// Least state index in the event.
    pub fn first(self) -> Option<usize> {
        if self.0 == 0 {
            None
        } else {
            Some(self.0.trailing_zeros() as usize)
        }
    }

    /// State indices in ascending order.
    pub fn states(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                return None;
            }
            let s = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            Some(s)
        })
    }

    /// Every subset of this event, in ascending mask order, starting with `∅`.
    pub fn subsets(self) -> impl Iterator<Item = Event> {
        let full = self.0;
        let mut next = Some(0u64);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == full {
                None
            } else {
                Some((cur.wrapping_sub(full)) & full)
            };
            Some(Event(cur))
        })
    }

    /// All `2^n` events over `n` states, in ascending mask order.
    pub fn all(n: usize) -> impl Iterator<Item = Event> {
        Event::full(n).subsets()
    }
}

impl BitAnd for Event {
    type Output = Event;
    fn bitand(self, rhs: Event) -> Event {
        Event(self.0 & rhs.0)
    }
}

impl BitOr for Event {
    type Output = Event;
    fn bitor(self, rhs: Event) -> Event {
        Event(self.0 | rhs.0)
    }
}

impl Sub for Event {
    type Output = Event;
    fn sub(self, rhs: Event) -> Event {
        Event(self.0 & !rhs.0)
    }
}

/// Complement within the full 64-bit mask; prefer [`Event::complement`].
impl Not for Event {
    type Output = Event;
    fn not(self) -> Event {
        Event(!self.0)
    }
}

impl fmt::Debug for Event {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Event{{")?;
        for (k, s) in self.states().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{s}")?;
        }
        write!(f, "}}")
    }
}

/// The ordered, labelled state set `W`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateSpace {
    names: Vec<String>,
}

impl StateSpace {
    pub fn new(names: Vec<String>) -> Self {
        StateSpace { names }
    }

    /// States labelled `w1..wn`.
    pub fn numbered(n: usize) -> Self {
        StateSpace::new((1..=n).map(|k| format!("w{k}")).collect())
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, state: usize) -> &str {
        &self.names[state]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.names.iter().position(|n| n == label)
    }

    pub fn full(&self) -> Event {
        Event::full(self.len())
    }

    /// Canonical rendering, e.g. `{w1 w3}`.
    pub fn render(&self, event: Event) -> String {
        let labels: Vec<&str> = event
            .states()
            .map(|s| self.names.get(s).map(String::as_str).unwrap_or("?"))
            .collect();
        format!("{{{}}}", labels.join(" "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerates_power_set() {
        let e = Event::from_states([0, 2, 3]);
        let subs: Vec<Event> = e.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert_eq!(subs[0], Event::EMPTY);
        assert_eq!(*subs.last().unwrap(), e);
        assert!(subs.iter().all(|s| s.is_subset(e)));
    }

    #[test]
    fn empty_event_has_one_subset() {
        assert_eq!(Event::EMPTY.subsets().count(), 1);
    }

    #[test]
    fn complement_stays_in_universe() {
        let e = Event::from_states([1]);
        assert_eq!(e.complement(3), Event::from_states([0, 2]));
        assert_eq!(Event::full(3).complement(3), Event::EMPTY);
    }

    #[test]
    fn render_uses_labels() {
        let w = StateSpace::numbered(3);
        assert_eq!(w.render(Event::from_states([0, 2])), "{w1 w3}");
        assert_eq!(w.render(Event::EMPTY), "{}");
    }
}
