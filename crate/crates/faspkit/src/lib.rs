//! Fuzzy answer set programming over exact rational truth degrees.
//!
//! A program is a finite set of rules `a <- T(b1, ..., bn)` whose bodies
//! combine atoms, constants from `[0,1]`, and negated atoms with a single
//! t-norm. Answer sets are the unfounded-free models, or equivalently the
//! interpretations that equal the least fixpoint of their reduct's
//! immediate-consequence operator.
//!
//! The solver pipeline mirrors the SAT-style reduction for classical ASP:
//! build the completion of the program ([`translate::completion`]), search
//! for a model of the resulting fuzzy theory with an exact mixed-integer
//! feasibility engine ([`milp::sat_solve`]), and repair spurious models by
//! adding loop formulas ([`translate::loop_formula`]) until a fixpoint
//! check certifies an answer set ([`assat::solve`]).
//!
//! Everything is exact: truth degrees are reduced rationals, the simplex
//! core pivots over big rationals, and every model the solver returns is
//! re-validated against the theory before it is reported.

pub mod assat;
pub mod graph;
pub mod milp;
pub mod semantics;
pub mod syntax;
pub mod translate;
pub mod truth;

pub use semantics::Interpretation;
pub use syntax::{Atom, Program};
pub use truth::{NegatorKind, TNormKind, TruthValue};
