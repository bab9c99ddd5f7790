//! Workflow execution signatures and reproducibility-tenet comparison.
//!
//! This crate answers a deceptively simple question about computational
//! workflows: in what sense is one execution "the same" as another? It models
//! a workflow as a DAG of application tasks alternating with data artifacts,
//! captures layered provenance for every component, and condenses an
//! execution into cryptographic signatures — one per reproducibility tenet.
//!
//! The pipeline, bottom to top:
//!
//! - [`model`] — the scale-agnostic workflow graph: components, provenance
//!   layers, structural validation, unrolling and partitioning.
//! - [`merkle`] — canonical leaf encoding and SHA-256 Merkle trees; a tree
//!   root is the signature of whatever its leaves describe.
//! - [`tenets`] — the seven reproducibility tenets (rerun, repeat, recompute,
//!   reproduce, and three replication flavors) as a field-selection matrix
//!   over provenance layers, plus signing and comparison of executions.
//! - [`blockdag`] — chains per-component Merkle roots along the workflow
//!   topology into a hash DAG; the Merkle root over its sink blocks is the
//!   workflow signature, and a topological walk pinpoints the first
//!   divergence between two executions.
//! - [`record`] — the persisted execution record: layered provenance plus
//!   content-addressed payload summaries.
//! - [`signal`] / [`demo`] — a deterministic lowpass-filter workflow (three
//!   numerically distinct filter implementations) used to exercise the whole
//!   stack end to end.

pub mod blockdag;
pub mod demo;
pub mod merkle;
pub mod model;
pub mod record;
pub mod signal;
pub mod tenets;

pub use blockdag::{Block, BlockDag};
pub use merkle::{Leaf, MerkleTree, Signature};
pub use model::{
    AttributeValue, Component, ComponentCategory, ProvenanceLayer, ValidationReport, WorkflowGraph,
};
pub use record::{DataSummary, ExecutionRecord};
pub use tenets::{ComparisonReport, FieldMatrix, Tenet};
