//! Hash DAGs over workflow topologies.
//!
//! Every component's tenet-selected provenance leaves are rolled into a
//! Merkle root (the component's *data root*). A block then ties that root to
//! the blocks of its predecessors: the block signature is the Merkle root
//! over one `data` leaf plus one `parent` leaf per predecessor signature,
//! with parents sorted so edge enumeration order is irrelevant. Inserting a
//! block therefore costs `O(d log d)` in its in-degree `d`, and the whole
//! DAG `O(V · D log D + E)` for average degree `D`.
//!
//! The Merkle root over the sink blocks (`O(l log l)` for `l` sinks) is the
//! workflow signature: any provenance change alters the changed component's
//! block and cascades through every block downstream of it, so equal
//! signatures mean equal selected provenance everywhere. Walking blocks in
//! topological order (Kahn's algorithm, `O(V + E)`, ties broken by
//! ascending component id) finds the first divergence between two runs.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use serde::Serialize;
use thiserror::Error;

use crate::merkle::{build_tree, empty_root, Leaf, Signature};
use crate::model::{ComponentCategory, ProvenanceLayer, WorkflowGraph};
use crate::record::ExecutionRecord;
use crate::tenets::{select_fields, FieldMatrix, Tenet, TenetError};

#[derive(Debug, Error)]
pub enum BlockDagError {
    #[error("graph contains a cycle through {0:?}")]
    CycleDetected(String),
    #[error("record at layer {have} cannot be signed under {tenet}: layer {needed} required")]
    MissingLayer {
        tenet: Tenet,
        needed: ProvenanceLayer,
        have: ProvenanceLayer,
    },
    #[error(transparent)]
    Selection(#[from] TenetError),
    #[error("topologies differ: {0}")]
    TopologyMismatch(String),
}

/// One block: a component's data root chained to its predecessors.
#[derive(Debug, Clone, Serialize)]
pub struct Block {
    pub component_id: String,
    pub data_root: Signature,
    /// Predecessor block signatures, ascending.
    pub parents: Vec<Signature>,
    pub signature: Signature,
    /// The tenet-selected leaves behind `data_root`, kept for diff reports.
    #[serde(skip)]
    pub data_leaves: Vec<Leaf>,
}

/// A workflow execution's hash DAG under one tenet.
#[derive(Debug, Clone)]
pub struct BlockDag {
    blocks: BTreeMap<String, Block>,
    order: Vec<String>,
    edges: BTreeSet<(String, String)>,
    sink_ids: Vec<String>,
}

impl BlockDag {
    pub fn block(&self, id: &str) -> Option<&Block> {
        self.blocks.get(id)
    }

    pub fn blocks(&self) -> impl Iterator<Item = &Block> {
        self.blocks.values()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    /// Component ids in the tie-broken topological order used to build the
    /// DAG.
    pub fn order(&self) -> &[String] {
        &self.order
    }

    /// Ids of blocks with no successors; their signatures feed the workflow
    /// signature.
    pub fn sink_ids(&self) -> &[String] {
        &self.sink_ids
    }

    /// In-degree of one block (its parent count).
    pub fn degree(&self, id: &str) -> usize {
        self.blocks.get(id).map(|b| b.parents.len()).unwrap_or(0)
    }

    /// Average in-degree across all blocks.
    pub fn average_degree(&self) -> f64 {
        if self.blocks.is_empty() {
            return 0.0;
        }
        self.edges.len() as f64 / self.blocks.len() as f64
    }

    /// Diagnostic JSON dump: id -> {data_root, parents, signature}.
    pub fn dump_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (id, block) in &self.blocks {
            map.insert(
                id.clone(),
                serde_json::json!({
                    "data_root": block.data_root.hex(),
                    "parents": block.parents.iter().map(Signature::hex).collect::<Vec<_>>(),
                    "signature": block.signature.hex(),
                }),
            );
        }
        serde_json::Value::Object(map)
    }
}

/// Kahn's algorithm with ties among ready vertices broken by ascending
/// component id, yielding a deterministic total order in `O(V + E)` (plus
/// the tie-break heap).
pub fn topological_order(graph: &WorkflowGraph) -> Result<Vec<String>, BlockDagError> {
    let mut in_degree: BTreeMap<&str, usize> = graph.ids().map(|id| (id, 0)).collect();
    for (_, to) in graph.edges() {
        if let Some(d) = in_degree.get_mut(to) {
            *d += 1;
        }
    }

    let mut ready: BinaryHeap<Reverse<&str>> = in_degree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(id, _)| Reverse(*id))
        .collect();
    let mut order = Vec::with_capacity(in_degree.len());

    while let Some(Reverse(id)) = ready.pop() {
        order.push(id.to_string());
        for succ in graph.successors(id) {
            if let Some(d) = in_degree.get_mut(succ) {
                *d -= 1;
                if *d == 0 {
                    ready.push(Reverse(succ));
                }
            }
        }
    }

    if order.len() != in_degree.len() {
        let stuck = in_degree
            .keys()
            .find(|id| !order.iter().any(|o| o == *id))
            .map(|id| id.to_string())
            .unwrap_or_default();
        return Err(BlockDagError::CycleDetected(stuck));
    }
    Ok(order)
}

/// The leaves a component's block hashes under a tenet.
///
/// Two tenets deviate from plain matrix selection because they reason about
/// data alone:
///
/// - under *Reproduce*, task and control blocks carry no data at all — they
///   contribute structure only, through the parent chain;
/// - under *Reproduce* and *Replicate-Scientific*, data summaries count only
///   on terminal artifacts (out-degree zero): those are the workflow's net
///   output, while interim data remains implementation detail. The total and
///   computational replication columns keep every artifact's summary.
fn block_leaves(
    graph: &WorkflowGraph,
    id: &str,
    tenet: Tenet,
    matrix: &FieldMatrix,
) -> Result<Vec<Leaf>, TenetError> {
    let component = graph.component(id).expect("block ids come from the graph");
    if tenet == Tenet::Reproduce && component.category != ComponentCategory::DataArtifact {
        return Ok(Vec::new());
    }
    let mut leaves = select_fields(component, tenet, matrix)?;
    if matches!(tenet, Tenet::Reproduce | Tenet::ReplicateScientific) && graph.out_degree(id) > 0 {
        leaves.retain(|leaf| leaf.key != "RG/Data-Summary");
    }
    Ok(leaves)
}

/// Build the BlockDAG of an execution record under one tenet.
pub fn build_blockdag(
    record: &ExecutionRecord,
    tenet: Tenet,
    matrix: &FieldMatrix,
) -> Result<BlockDag, BlockDagError> {
    let graph = record.graph();
    if let Some(needed) = matrix.max_layer(tenet) {
        if graph.layer() < needed {
            return Err(BlockDagError::MissingLayer {
                tenet,
                needed,
                have: graph.layer(),
            });
        }
    }
    let order = topological_order(graph)?;
    build_in_order(graph, &order, tenet, matrix)
}

/// Assemble blocks along a caller-supplied topological order. Split out so
/// tests can verify that any valid order yields the same block signatures.
pub(crate) fn build_in_order(
    graph: &WorkflowGraph,
    order: &[String],
    tenet: Tenet,
    matrix: &FieldMatrix,
) -> Result<BlockDag, BlockDagError> {
    let mut blocks: BTreeMap<String, Block> = BTreeMap::new();
    for id in order {
        let data_leaves = block_leaves(graph, id, tenet, matrix)?;
        let data_root = build_tree(data_leaves.clone()).root();

        let mut parents: Vec<Signature> = graph
            .predecessors(id)
            .iter()
            .map(|p| blocks[*p].signature)
            .collect();
        parents.sort();

        let mut leaves = vec![Leaf::text("data", data_root.hex())];
        leaves.extend(parents.iter().map(|p| Leaf::text("parent", p.hex())));
        let signature = build_tree(leaves).root();

        blocks.insert(
            id.clone(),
            Block {
                component_id: id.clone(),
                data_root,
                parents,
                signature,
                data_leaves,
            },
        );
    }

    let sink_ids: Vec<String> = graph.sinks().iter().map(|s| s.to_string()).collect();
    Ok(BlockDag {
        blocks,
        order: order.to_vec(),
        edges: graph
            .edges()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
        sink_ids,
    })
}

/// The workflow signature: Merkle root over the sink blocks' signatures.
pub fn workflow_signature(dag: &BlockDag) -> Signature {
    if dag.is_empty() {
        return empty_root();
    }
    let leaves: Vec<Leaf> = dag
        .sink_ids
        .iter()
        .map(|id| Leaf::text("leaf", dag.blocks[id].signature.hex()))
        .collect();
    build_tree(leaves).root()
}

/// The earliest component in topological order whose block signatures
/// differ, or `None` when every block matches. Both DAGs must share the same
/// component ids and edges.
pub fn first_divergence(a: &BlockDag, b: &BlockDag) -> Result<Option<String>, BlockDagError> {
    if a.blocks.len() != b.blocks.len() || a.blocks.keys().zip(b.blocks.keys()).any(|(x, y)| x != y)
    {
        return Err(BlockDagError::TopologyMismatch(
            "component id sets differ".to_string(),
        ));
    }
    if a.edges != b.edges {
        return Err(BlockDagError::TopologyMismatch(
            "edge sets differ".to_string(),
        ));
    }
    for id in &a.order {
        if a.blocks[id].signature != b.blocks[id].signature {
            return Ok(Some(id.clone()));
        }
    }
    Ok(None)
}
