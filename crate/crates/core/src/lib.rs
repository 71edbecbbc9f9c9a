//! Runnable reductions between 3SUM and set-query / graph problems, with the
//! classical algorithms they exercise: bucketed universal hashing, a
//! distance-verified binary code, the convolution-form rewrite of 3SUM,
//! shifted-set disjointness/intersection pipelines, triangle enumeration on
//! degeneracy orderings, and an incremental matching engine with rollback.
//!
//! Every pipeline is Las Vegas: answers are always correct, randomness only
//! affects running time. Brute-force oracles for each problem live alongside
//! the fast paths so that agreement can be checked at any scale.
//!
//! The `parallel` feature (on by default) runs the data-parallel inner loops
//! on rayon; without it everything falls back to sequential iteration with
//! identical results.

pub mod accept;
pub mod codes;
pub mod conv;
pub mod error;
pub mod hashing;
pub mod matching;
pub mod par;
pub mod rng;
pub mod sd;
pub mod setsystem;
pub mod threesum;
pub mod triangles;

pub use error::{Error, Result};
