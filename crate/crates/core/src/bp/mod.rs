//! Max-product message passing on factor graphs.
//!
//! Factor-to-variable messages are `m(q) = best_w inc(w) ⊗ f(q, w)`, where
//! `inc` combines the messages arriving at the factor from its other variables.
//! In fast mode the rows of every factor are sorted once (once per homogeneity
//! class when tables are shared) and each `m(q)` becomes a pair search.

mod graph;
mod message;
mod prior;
mod run;
mod topology;

pub use graph::{FactorGraph, FactorRole, GraphFactor};
pub use message::{compute_message, Edge, Message, MessageCost, MessageMode, Node};
pub use prior::{presort_shared_prior, presort_shared_prior_with, FactorRow, PresortedPrior};
pub use run::{decode_map, run_bp, BpConfig, BpResult, BpStats, IterationTrace, Schedule, ScheduleKind};
pub use topology::{build_topology, Pairwise, Topology};
