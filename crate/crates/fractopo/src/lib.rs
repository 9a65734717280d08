//! fractopo — topology analysis of planar self-similar sets.
//!
//! Given a finite system of contracting similarities in the plane, this
//! crate certifies whether distinct pieces of the attractor meet in
//! finitely many points, builds the bipartite intersection graphs of the
//! pieces, decides the dendrite criterion with explicit cycle witnesses,
//! estimates address counts / component counts / topological order bounds,
//! and measures the logarithmic-spiral slope parameters of invariant arcs
//! at periodic points.
//!
//! The building blocks:
//!
//! * [`sim`] / [`word`] — exact algebra of similarities, multiindices and
//!   eventually periodic addresses.
//! * [`attractor`] — certified cell covers of the attractor and its pieces.
//! * [`intersection`] — pair expansion, intersection clusters, FI reports.
//! * [`graph`] — intersection graphs, refinement, tree tests, the dendrite
//!   verdict.
//! * [`order`] — address counts, stable neighborhoods, window constants.
//! * [`slope`] — invariant arcs and slope parameters.
//! * [`input`] / [`report`] / [`cli`] — the JSON spec format, the analysis
//!   report and the command-line front end.
//!
//! Start with the runnable examples (`cargo run --example vicsek_dendrite`)
//! or the [`systems`] module for ready-made classic systems.
//!
//! Everything is pure and deterministic: identical inputs produce byte
//! identical reports. Values are immutable after construction and safe to
//! move across threads.

pub mod attractor;
pub mod cli;
pub mod error;
pub mod graph;
pub mod input;
pub mod intersection;
pub mod order;
pub mod report;
pub mod sim;
pub mod slope;
pub mod systems;
pub mod word;

pub use error::{Error, Result};
pub use sim::{SimSystem, Similarity};
pub use word::{eval_address, word_relation, Address, Word, WordRelation};

/// Single environment variable selecting the leaf/pair budget for the
/// expansion engines. Unset or unparsable values fall back to the
/// per-engine defaults.
pub const BUDGET_ENV_VAR: &str = "FRACTOPO_BUDGET";

pub(crate) fn budget_from_env(default: usize) -> usize {
    std::env::var(BUDGET_ENV_VAR)
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .unwrap_or(default)
}
