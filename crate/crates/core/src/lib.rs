//! Diminution-aware grounding for function-free disjunctive answer set
//! programs, with exact checkers for diminution properties.

pub mod ast;
pub mod bench;
pub mod diminution;
mod error;
pub mod grounder;
pub mod parser;
pub mod semantics;
pub mod transform;

pub use ast::{Atom, CmpOp, Comparison, Program, Rule, Signature, Symbol, Term};
pub use error::{Error, Result};
pub use parser::{parse_atom, parse_program};
