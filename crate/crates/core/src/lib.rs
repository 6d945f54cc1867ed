//! Instruction-set representation of labeled expression DAGs.
//!
//! Expressions are DAGs over variables and operators; strings over a small
//! instruction alphabet decode to DAGs, and every DAG has a unique shortest
//! lexicographically least string up to relabeling of its internal nodes.

pub mod benchmarks;
pub mod canonical;
pub mod dag;
pub mod encoder;
pub mod generators;
pub mod isa;
pub mod isomorphism;
pub mod metric;

pub use canonical::{canonical, CanonError, CanonicalRequest, CanonicalResult, SearchMode};
pub use dag::{DagError, LabeledDag, Node, NodeId, NodeType, OperationSet};
pub use encoder::{d2s, spiral_pairs, EncodeError};
pub use isa::{s2d, DecodeError, Token};
pub use isomorphism::isomorphic;
