//! Exact computation engine for groups of rooted-tree automorphisms given by
//! wreath recursion.
//!
//! The engine is specialized to bounded automaton presentations such as the
//! first Grigorchuk group and the GGS groups. It provides:
//!
//! * a section/portrait calculus for words over the generators ([`presentation`]),
//! * an exact word problem via section closure ([`wordproblem`]),
//! * congruence quotients at finite levels as permutation groups with
//!   stabilizer chains ([`quotient`]),
//! * Schreier generators, rigid-stabilizer embeddings, diagonal and block
//!   subgroup constructors, non-rigidity-tree estimation and classification
//!   of subgroups ([`subgroups`], [`registry`]),
//! * GGS-specific linear algebra and the normal form for first-level
//!   stabilizer elements ([`ggs`]),
//! * the forbidden-pattern membership test for the closure of the Grigorchuk
//!   group and related witness verifications ([`closure`]).
//!
//! All values are immutable after construction and all operations are pure
//! functions (internal memo tables are synchronized), so the API is safe for
//! concurrent use.

pub mod catalog;
pub mod closure;
pub mod ggs;
pub mod perm;
pub mod presentation;
pub mod presets;
pub mod quotient;
pub mod registry;
pub mod subgroups;
pub mod verification;
pub mod vertex;
pub mod word;
pub mod wordproblem;

pub use perm::Permutation;
pub use presentation::{GeneratorRule, GroupPresentation, Portrait};
pub use quotient::{LevelPermutation, LevelQuotient};
pub use subgroups::SubgroupSpec;
pub use vertex::{RaySpec, Vertex};
pub use word::Word;

use thiserror::Error;

/// Errors shared by the whole crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),
    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),
    #[error("presentation is not bounded: {0}")]
    Unbounded(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("search exhausted without a witness: {0}")]
    SearchExhausted(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("certification failed: {0}")]
    Certification(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Budgets guarding the brute-force code paths. Exceeding a budget is an
/// error, never a silent truncation.
#[derive(Debug, Clone, Copy)]
pub struct Budget {
    /// Maximum quotient order for setwise-stabilizer enumeration.
    pub setwise: u64,
    /// Maximum quotient order for full subgroup enumeration.
    pub subgroup_enum: u64,
    /// Default cap for element-order searches.
    pub order_cap: u64,
    /// Maximum number of members in a section closure.
    pub closure_members: u64,
    /// Maximum quotient order for the brute-force lift construction.
    pub lift: u64,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            setwise: 1 << 22,
            subgroup_enum: 1 << 10,
            order_cap: 1 << 12,
            closure_members: 1 << 20,
            lift: 1 << 22,
        }
    }
}

impl Budget {
    /// Default budgets, with the brute-force limits overridden by the
    /// `GRIGCALC_BUDGET` environment variable when it is set.
    pub fn from_env() -> Self {
        let mut b = Budget::default();
        if let Ok(v) = std::env::var("GRIGCALC_BUDGET") {
            if let Ok(n) = v.trim().parse::<u64>() {
                b.setwise = n;
                b.subgroup_enum = n;
                b.lift = n;
            }
        }
        b
    }
}
