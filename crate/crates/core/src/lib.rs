//! Team semantics for propositional logic extended with the nonemptiness
//! atom `NE`: parsing, a brute-force reference evaluator, a polynomial
//! labelling model checker, satisfiability and validity procedures, and a
//! seeded generator for reproducible experiments.

pub mod cli;
pub mod decide;
pub mod formula;
pub mod generate;
pub mod modelcheck;
pub mod oracle;
pub mod team;

pub use decide::{sat, valid, Verdict};
pub use formula::{parse, Formula, OccurrencePath};
pub use modelcheck::{model_check, run_fixpoint, FixpointReport};
pub use team::{Domain, Team, TeamOrNull};
