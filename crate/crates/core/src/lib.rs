//! Invariants of presented ordered abelian groups: spines, `k_p`, `P_∞`, `c_G`,
//! dp-rank and strong dependence, an exact calculus for definable subgroups,
//! and a descriptor-level classifier for henselian valued fields.
//!
//! ```
//! let g = oag_core::dsl::parse("lex(Z, dense{2:inf}, dense{2:inf,3:inf})").unwrap();
//! assert_eq!(oag_core::rank::dp_rank(&g).unwrap(), oag_core::rank::Rank::Fin(4));
//! ```

pub mod arith;
pub mod dsl;
pub mod fields;
pub mod group;
pub mod ladder;
pub mod lattice;
pub mod rank;
pub mod report;
pub mod selftest;
pub mod spine;

pub use dsl::parse;
pub use group::{ConvexSubgroup, Element, Group, GroupExpr};
pub use ladder::{Coset, LadderSubgroup, Modulus};
