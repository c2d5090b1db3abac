//! Decision procedure for the positive fragment of minimal predicate logic.
//!
//! Instead of renaming the bound variable when the right `∀` rule is applied,
//! the search wraps the context in a bracket `[Γ]_V` that binds the variables
//! of the quantified formula. Contexts are kept in a canonical cleaned form,
//! every reachable sequent is built from pieces of the input, and search
//! restricted to non-redundant branches terminates.
//!
//! * [`syntax`]: terms, formulæ, parsing, polarity, renaming, scope tables.
//! * [`context`]: bracketed contexts and the cleaning rewrite system.
//! * [`prover`]: the search engine, derivations and invariant auditing.
//! * [`oracle`]: a bounded eigenvariable prover used as a cross-check.
//! * [`systemf`]: inhabitation of positive System F types.
//!
//! ```
//! use ljb::{derivable, parse_formula};
//!
//! let f = parse_formula("((forall x. (P(x) -> Q)) -> Q) -> Q").unwrap();
//! assert!(!derivable(&f).unwrap().verdict);
//! ```

pub mod context;
pub mod error;
mod lexer;
pub mod oracle;
pub mod prover;
pub mod syntax;
pub mod systemf;

pub use context::{parse_context, Context, Item};
pub use error::{LogicError, ParseError};
pub use prover::{derivable, derivable_with, Derivation, Outcome, Rotation, SearchOptions, Sequent};
pub use syntax::{parse_formula, Formula, FormulaKind, Polarity, Term};
pub use systemf::{inhabited, parse_type, phi, FType};
