//! Event-clock removal for nested visibly pushdown timed automata.
//!
//! - [`words`]: timed nested words, MAPs and event-clock values.
//! - [`model`]: automata with normal and event clocks.
//! - [`translate`]: removal of event clocks.
//! - [`engine`]: acceptance of ultimately periodic words.
//! - [`difftest`]: random automata and words, differential checking.
//! - [`format`]: JSON interchange documents.
//! - [`cli`]: the `eckit` command.

pub mod cli;
pub mod difftest;
pub mod engine;
pub mod format;
pub mod model;
pub mod translate;
pub mod words;

/// Exact timestamps and clock values.
pub type Rational = num_rational::Ratio<i64>;
