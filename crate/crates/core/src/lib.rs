//! Move-making energy minimization for pairwise discrete MRFs.
//!
//! The crate minimizes energies of the form
//!
//! ```text
//!     E(x) = sum_i E_i(x_i) + sum_(i,j) E_ij(x_i, x_j),    x in {1..N}^p
//! ```
//!
//! by iterated moves: single-node descent (ICM), swaps between two states,
//! expansions of one state, and expansion-shrink moves that expand one state
//! while letting the nodes it previously occupied fall back to a second
//! state. Each non-ICM move is reduced to a binary submodular problem and
//! solved exactly by min-cut ([`mincut`]). When the pairwise tables violate
//! the triangle condition, a per-move truncation restores submodularity
//! while preserving descent ([`moves::truncate`]).
//!
//! [`oracle`] provides brute-force enumeration of move spaces and global
//! minima for small instances, [`schedule`] the sweep drivers, and
//! [`generators`] deterministic synthetic instances.
//!
//! States are 0-based throughout the library API; the text formats of the
//! companion CLI are 1-based.

pub mod energy;
pub mod generators;
pub mod mincut;
pub mod moves;
pub mod oracle;
pub mod schedule;

pub use energy::{check_pairwise_submodular, check_triangle, Edge, Instance, Labeling, PairwiseTable};
pub use mincut::{solve_binary, BinaryProblem, FlowNetwork};
pub use moves::{optimal_move, MoveResult, MoveSpec};
pub use oracle::MoveSetId;
pub use schedule::{run, run_icm, Method, RunReport};

/// Absolute tolerance for energy comparisons when the caller does not supply
/// one. Integral energies stay exact under it.
pub const DEFAULT_EPS: f64 = 1e-9;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("labeling has {got} entries, instance has {want} nodes")]
    LabelingLength { got: usize, want: usize },
    #[error("node {node}: state {state} out of range (instance has {num_states} states)")]
    StateOutOfRange {
        node: usize,
        state: usize,
        num_states: usize,
    },
    #[error("node {node} out of range (instance has {num_nodes} nodes)")]
    NodeOutOfRange { node: usize, num_nodes: usize },
    #[error("instance must have at least one node and one state")]
    EmptyInstance,
    #[error("pairwise table has {got} entries, expected {expected}")]
    TableLength { expected: usize, got: usize },
    #[error("unary table of node {node} has {got} entries, expected {expected}")]
    UnaryLength {
        node: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite energy value in {place}")]
    NonFinite { place: String },
    #[error("edge ({i},{j}) endpoints invalid: require 0 <= i < j < {num_nodes}")]
    BadEdgeEndpoints { i: usize, j: usize, num_nodes: usize },
    #[error("duplicate edge ({i},{j})")]
    DuplicateEdge { i: usize, j: usize },
    #[error("node {node} is in the conditioning set")]
    NodeInConditioningSet { node: usize },
    #[error("edge ({i},{j}) is not submodular: {detail}")]
    NotSubmodular { i: usize, j: usize, detail: String },
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("move has no binary subproblem")]
    NoBinaryForm,
    #[error("truncation applies to expansion and expansion-shrink moves only")]
    TruncationNotApplicable,
    #[error("enumeration refused: {size} labelings exceed the cap of {cap}")]
    CapExceeded { size: u128, cap: u128 },
    #[error("run reports come from different instances")]
    InstanceMismatch,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
