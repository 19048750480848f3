//! Permutation pattern counting and `k`-profiles through pattern trees.
//!
//! A pattern `tau` of size `k` occurs in a permutation `pi` wherever `k`
//! points of `pi` are order-isomorphic to `tau`; the `k`-profile collects
//! the counts of all `k!` patterns at once. This crate computes single
//! counts and whole profiles with several interchangeable engines:
//!
//! - an exhaustive brute-force oracle ([`perm::count_pattern_brute`],
//!   [`perm::profile_brute`]) that everything else is validated against;
//! - corner trees, giving quasi-linear 3-profiles;
//! - pattern trees of maximum vertex size 2, evaluated bottom-up over
//!   multidimensional rectangle-trees, giving quadratic profiles up to
//!   `k = 7`;
//! - gadget-accelerated trees (weighted marked `3214`, marked `43215`,
//!   pair-rectangle-trees) breaking the quadratic barrier for the
//!   5-profile;
//! - a generic two-vertex construction for arbitrary `k`.
//!
//! Profile pipelines evaluate a persisted basis of linearly independent
//! tree vectors and recover exact counts with an exact rational solve.
//!
//! # Examples
//!
//! Runnable walkthroughs live in `examples/`; each one covers a capability:
//!
//! ```text
//! cargo run --release --example count_pattern
//! cargo run --release --example profiles
//! cargo run --release --example pattern_tree_vectors
//! cargo run --release --example corner_trees
//! cargo run --release --example gadget_counts
//! cargo run --release --example pair_rectangle_tree
//! cargo run --release --example rank_table
//! cargo run --release --example basis_artifacts
//! cargo run --release --example nontrivial_patterns
//! cargo run --release --example d4_symmetries
//! ```
//!
//! The thin `permpat` binary exposes the same functionality as
//! subcommands (`count`, `profile`, `basis-build`, `basis-info`,
//! `rank-table`, `oracle-check`, `nontrivial`, `gen`, `bench`).

pub mod basis;
pub mod enumerate;
pub mod error;
pub mod eval;
pub mod exact;
pub mod gadgets;
pub mod perm;
pub mod poset;
pub mod profile;
pub mod rect;
pub mod rng;
pub mod tree;

pub use error::{Error, Result};
pub use perm::{count_pattern_brute, parse_permutation, profile_brute, PatternVector, Permutation, D4};
pub use rect::{Rectangle, RectangleTree};
pub use tree::{ConstraintAtom, CornerDir, PatternTree, PointRef, Vertex, VertexLabel};
