//! Exact model checking for agreement theorems on finite epistemic
//! plausibility models.
//!
//! The crate is organised bottom-up: [`values`] (plausibility domains),
//! [`event`] and [`model`] (states, partitions, measures), [`operators`]
//! (knowledge and belief fixpoints), [`axioms`] and [`agreement`] (checkers),
//! [`search`] (enumeration and brute-force oracles), [`modelfile`] and
//! [`expr`] (text formats) and [`cli`].

pub mod agreement;
pub mod axioms;
pub mod cli;
pub mod event;
pub mod expr;
pub mod modelfile;
pub mod model;
pub mod operators;
pub mod report;
pub mod search;
pub mod values;
