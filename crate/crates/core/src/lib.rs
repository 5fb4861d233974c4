//! Exact max-product inference with expected-sublinear inner maximizations.
//!
//! The core primitive is [`argmax::fast_argmax_pair`]: given two lists and the
//! permutations that sort them, it finds `argmax_i a[i] ⊗ b[i]` while reading
//! only `O(√N)` entries in expectation. Everything else builds on it:
//!
//! * [`tensor`] holds discrete variables, dense factors and the brute-force
//!   reference marginalizer that every fast path is tested against.
//! * [`argmax`] holds the pair and K-list searches plus the closed-form and
//!   enumerated step-count distributions.
//! * [`clique`] marginalizes cliques whose potential factors into smaller
//!   terms (3-cliques, shared terms, general groupings, funny matrix products).
//! * [`bp`] runs max-product message passing on factor graphs, with messages
//!   computed against pre-sorted data-independent factors.
//!
//! All values are `f64`; the semiring (max-product, max-sum or min-sum) is
//! passed explicitly. Ties are always broken towards the smallest flat index.

pub mod argmax;
pub mod bp;
pub mod clique;
mod error;
pub mod exec;
pub mod semiring;
pub mod tensor;

pub use error::{Error, Result};
pub use exec::Execution;
pub use semiring::Semiring;
