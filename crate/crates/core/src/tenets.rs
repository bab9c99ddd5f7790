//! Reproducibility tenets and the field-selection matrix.
//!
//! Each tenet names the provenance fields that must match for two workflow
//! executions to count as the same under that standard:
//!
//! - **Rerun** — same logical workflow: logical component types, ports, and
//!   terminal execution status.
//! - **Repeat** — additionally the same parameter sets and logical sizing
//!   (a principally identical physical workflow).
//! - **Recompute** — everything: parameter values, placement, addresses,
//!   runtime traces. Bitwise-strict.
//! - **Reproduce** — data only: what flowed out of the workflow, summarized
//!   by content digests of its terminal artifacts.
//! - **Replicate (scientific / computational / total)** — compositions of
//!   the above, each carried as its own matrix column so the composition
//!   laws become testable rather than definitional.
//!
//! The matrix is data, not code: [`default_matrix`] ships the built-in
//! table, and [`load_matrix`] reads a replacement from JSON for mapping
//! other workflow systems onto the same machinery.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blockdag::{build_blockdag, workflow_signature, BlockDagError};
use crate::merkle::{Leaf, MerkleError, Signature};
use crate::model::{Component, ComponentCategory, ProvenanceLayer};
use crate::record::ExecutionRecord;

/// The seven reproducibility tenets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Tenet {
    #[serde(rename = "rerun")]
    Rerun,
    #[serde(rename = "repeat")]
    Repeat,
    #[serde(rename = "recompute")]
    Recompute,
    #[serde(rename = "reproduce")]
    Reproduce,
    #[serde(rename = "replicate-scientific")]
    ReplicateScientific,
    #[serde(rename = "replicate-computational")]
    ReplicateComputational,
    #[serde(rename = "replicate-total")]
    ReplicateTotal,
}

impl Tenet {
    pub const ALL: [Tenet; 7] = [
        Tenet::Rerun,
        Tenet::Repeat,
        Tenet::Recompute,
        Tenet::Reproduce,
        Tenet::ReplicateScientific,
        Tenet::ReplicateComputational,
        Tenet::ReplicateTotal,
    ];

    /// Column label used in signature tables.
    pub fn label(self) -> &'static str {
        match self {
            Tenet::Rerun => "RR",
            Tenet::Repeat => "RT",
            Tenet::Recompute => "RC",
            Tenet::Reproduce => "RP",
            Tenet::ReplicateScientific => "RPL-S",
            Tenet::ReplicateComputational => "RPL-C",
            Tenet::ReplicateTotal => "RPL-T",
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Tenet::Rerun => "rerun",
            Tenet::Repeat => "repeat",
            Tenet::Recompute => "recompute",
            Tenet::Reproduce => "reproduce",
            Tenet::ReplicateScientific => "replicate-scientific",
            Tenet::ReplicateComputational => "replicate-computational",
            Tenet::ReplicateTotal => "replicate-total",
        }
    }

    fn bit(self) -> u8 {
        match self {
            Tenet::Rerun => 1 << 0,
            Tenet::Repeat => 1 << 1,
            Tenet::Recompute => 1 << 2,
            Tenet::Reproduce => 1 << 3,
            Tenet::ReplicateScientific => 1 << 4,
            Tenet::ReplicateComputational => 1 << 5,
            Tenet::ReplicateTotal => 1 << 6,
        }
    }
}

impl fmt::Display for Tenet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tenet {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rerun" => Ok(Tenet::Rerun),
            "repeat" => Ok(Tenet::Repeat),
            "recompute" => Ok(Tenet::Recompute),
            "reproduce" => Ok(Tenet::Reproduce),
            "replicate-scientific" | "replicate-sci" => Ok(Tenet::ReplicateScientific),
            "replicate-computational" | "replicate-comp" => Ok(Tenet::ReplicateComputational),
            "replicate-total" => Ok(Tenet::ReplicateTotal),
            other => Err(format!("unknown tenet {other:?}")),
        }
    }
}

/// A compact set of tenets.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TenetSet(u8);

impl TenetSet {
    pub fn contains(self, tenet: Tenet) -> bool {
        self.0 & tenet.bit() != 0
    }

    pub fn insert(&mut self, tenet: Tenet) {
        self.0 |= tenet.bit();
    }

    pub fn iter(self) -> impl Iterator<Item = Tenet> {
        Tenet::ALL.into_iter().filter(move |t| self.contains(*t))
    }
}

impl FromIterator<Tenet> for TenetSet {
    fn from_iter<I: IntoIterator<Item = Tenet>>(iter: I) -> Self {
        let mut set = TenetSet::default();
        for t in iter {
            set.insert(t);
        }
        set
    }
}

#[derive(Debug, Error)]
pub enum MatrixError {
    #[error("cannot read matrix file: {0}")]
    Io(#[from] std::io::Error),
    #[error("matrix entry {index}: {message}")]
    Parse { index: usize, message: String },
    #[error("matrix file is not valid JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Error)]
pub enum TenetError {
    #[error("component {id:?} is missing included field {layer}/{field}")]
    MissingField {
        id: String,
        layer: ProvenanceLayer,
        field: String,
    },
    #[error(transparent)]
    Encoding(#[from] MerkleError),
}

/// The tenet × layer × field × component-category inclusion table.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FieldMatrix {
    entries: BTreeMap<(ProvenanceLayer, String, ComponentCategory), TenetSet>,
}

/// One row of the matrix config file.
#[derive(Debug, Serialize, Deserialize)]
struct MatrixEntry {
    layer: String,
    field: String,
    category: String,
    tenets: Vec<String>,
}

impl FieldMatrix {
    pub fn included(
        &self,
        layer: ProvenanceLayer,
        field: &str,
        category: ComponentCategory,
        tenet: Tenet,
    ) -> bool {
        self.entries
            .get(&(layer, field.to_string(), category))
            .map(|set| set.contains(tenet))
            .unwrap_or(false)
    }

    fn insert(
        &mut self,
        layer: ProvenanceLayer,
        field: &str,
        category: ComponentCategory,
        tenets: impl IntoIterator<Item = Tenet>,
    ) {
        let set = self
            .entries
            .entry((layer, field.to_string(), category))
            .or_default();
        for t in tenets {
            set.insert(t);
        }
    }

    /// `(layer, field)` pairs a tenet selects for a category, in layer order.
    pub fn fields_for(
        &self,
        tenet: Tenet,
        category: ComponentCategory,
    ) -> Vec<(ProvenanceLayer, &str)> {
        self.entries
            .iter()
            .filter(|((_, _, cat), set)| *cat == category && set.contains(tenet))
            .map(|((layer, field, _), _)| (*layer, field.as_str()))
            .collect()
    }

    /// Fields any tenet requires for a category at a layer; drives the
    /// completeness side of graph validation.
    pub fn required_fields(
        &self,
        layer: ProvenanceLayer,
        category: ComponentCategory,
    ) -> Vec<&str> {
        self.entries
            .iter()
            .filter(|((l, _, cat), set)| *l == layer && *cat == category && set.0 != 0)
            .map(|((_, field, _), _)| field.as_str())
            .collect()
    }

    /// The highest layer a tenet's column references; a record must have
    /// reached it before the tenet can be signed.
    pub fn max_layer(&self, tenet: Tenet) -> Option<ProvenanceLayer> {
        self.entries
            .iter()
            .filter(|(_, set)| set.contains(tenet))
            .map(|((layer, _, _), _)| *layer)
            .max()
    }

    /// Serialize to the config-file entry list (sorted, one entry per
    /// `(layer, field, category)` with at least one tenet).
    pub fn to_entries(&self) -> Vec<serde_json::Value> {
        self.entries
            .iter()
            .filter(|(_, set)| set.0 != 0)
            .map(|((layer, field, category), set)| {
                serde_json::json!({
                    "layer": layer.name(),
                    "field": field,
                    "category": category.label(),
                    "tenets": set.iter().map(|t| t.name()).collect::<Vec<_>>(),
                })
            })
            .collect()
    }
}

/// Load a field matrix from its JSON config form: an array of
/// `{layer, field, category, tenets: [names]}` objects.
pub fn load_matrix(path: &Path) -> Result<FieldMatrix, MatrixError> {
    let text = std::fs::read_to_string(path)?;
    parse_matrix(&text)
}

/// Parse the JSON config form; see [`load_matrix`].
pub fn parse_matrix(text: &str) -> Result<FieldMatrix, MatrixError> {
    let entries: Vec<MatrixEntry> = serde_json::from_str(text)?;
    let mut matrix = FieldMatrix::default();
    for (index, entry) in entries.iter().enumerate() {
        let layer = ProvenanceLayer::from_str(&entry.layer)
            .map_err(|message| MatrixError::Parse { index, message })?;
        let category = match entry.category.as_str() {
            "application" => ComponentCategory::ApplicationTask,
            "data" => ComponentCategory::DataArtifact,
            "control" => ComponentCategory::ControlConstruct,
            other => {
                return Err(MatrixError::Parse {
                    index,
                    message: format!("unknown category {other:?}"),
                })
            }
        };
        let mut tenets = Vec::new();
        for name in &entry.tenets {
            let tenet =
                Tenet::from_str(name).map_err(|message| MatrixError::Parse { index, message })?;
            tenets.push(tenet);
        }
        matrix.insert(layer, &entry.field, category, tenets);
    }
    Ok(matrix)
}

/// The built-in inclusion table.
///
/// Encoded row-wise: for each `(layer, field)`, the tenet list per component
/// category (application / data / control).
pub fn default_matrix() -> &'static FieldMatrix {
    static MATRIX: OnceLock<FieldMatrix> = OnceLock::new();
    MATRIX.get_or_init(build_default_matrix)
}

fn build_default_matrix() -> FieldMatrix {
    use ComponentCategory::{ApplicationTask as A, ControlConstruct as C, DataArtifact as D};
    use ProvenanceLayer::{Lg, Lgt, Pg, Pgs, Pgt, Rg};
    use Tenet::{
        Recompute as RC, Repeat as RT, ReplicateComputational as RPC, ReplicateScientific as RPS,
        ReplicateTotal as RPT, Reproduce as RP, Rerun as RR,
    };

    const ALL7: [Tenet; 7] = Tenet::ALL;
    // Everything except Reproduce: the "structural" tenets.
    const STRUCTURAL: [Tenet; 6] = [RR, RT, RC, RPS, RPC, RPT];

    type Cells = &'static [(ComponentCategory, &'static [Tenet])];

    let mut m = FieldMatrix::default();
    let rows: &[(ProvenanceLayer, &str, Cells)] = &[
        (Lgt, "Type", &[(A, &ALL7), (D, &ALL7), (C, &ALL7)]),
        (
            Lgt,
            "InPorts",
            &[(A, &STRUCTURAL), (D, &STRUCTURAL), (C, &STRUCTURAL)],
        ),
        (
            Lgt,
            "OutPorts",
            &[(A, &STRUCTURAL), (D, &STRUCTURAL), (C, &STRUCTURAL)],
        ),
        (Lg, "Num-CPUs", &[(A, &[RT, RC, RPC, RPT])]),
        (
            Lg,
            "Field-Keys",
            &[
                (A, &[RT, RC, RPC, RPT]),
                (D, &[RT, RC, RPC, RPT]),
                (C, &[RT, RC, RPC, RPT]),
            ],
        ),
        (
            Lg,
            "Field-Values",
            &[(A, &[RC, RPC]), (D, &[RC, RPC]), (C, &[RC, RPC])],
        ),
        (Lg, "Data-Volume", &[(D, &[RT, RC, RPC, RPT])]),
        (Lg, "Filenames", &[(D, &[RC, RPC])]),
        (
            Pgs,
            "Type",
            &[(A, &STRUCTURAL), (D, &ALL7), (C, &STRUCTURAL)],
        ),
        (Pgs, "Name", &[(A, &STRUCTURAL)]),
        (Pgs, "Storage-Type", &[(D, &ALL7)]),
        (
            Pgs,
            "Rank",
            &[(A, &[RC, RPC]), (D, &[RC, RPC]), (C, &[RC, RPC])],
        ),
        (
            Pgt,
            "Node",
            &[(A, &[RC, RPC]), (D, &[RC, RPC]), (C, &[RC, RPC])],
        ),
        (
            Pgt,
            "Island",
            &[(A, &[RC, RPC]), (D, &[RC, RPC]), (C, &[RC, RPC])],
        ),
        (
            Pg,
            "Node-IP-Address",
            &[(A, &[RC, RPC]), (D, &[RC, RPC]), (C, &[RC, RPC])],
        ),
        (
            Pg,
            "Island-IP-Address",
            &[(A, &[RC, RPC]), (D, &[RC, RPC]), (C, &[RC, RPC])],
        ),
        (Rg, "Status", &[(A, &STRUCTURAL), (D, &ALL7)]),
        (Rg, "Trace", &[(A, &[RC, RPC])]),
        (Rg, "Data-Summary", &[(D, &[RP, RPS, RPC, RPT])]),
    ];
    for (layer, field, cells) in rows {
        for (category, tenets) in *cells {
            m.insert(*layer, field, *category, tenets.iter().copied());
        }
    }
    m
}

/// Select the leaves a tenet includes for one component: one leaf per
/// included `(layer, field)`, keyed `layer/field`. Every included field must
/// be present, otherwise the selection fails with `MissingField`.
pub fn select_fields(
    component: &Component,
    tenet: Tenet,
    matrix: &FieldMatrix,
) -> Result<Vec<Leaf>, TenetError> {
    let mut leaves = Vec::new();
    for (layer, field) in matrix.fields_for(tenet, component.category) {
        let value = component
            .attr(layer, field)
            .ok_or_else(|| TenetError::MissingField {
                id: component.id.clone(),
                layer,
                field: field.to_string(),
            })?;
        leaves.push(Leaf::new(format!("{layer}/{field}"), value)?);
    }
    Ok(leaves)
}

/// Compute one tenet signature of an execution record: the workflow
/// signature of the record's BlockDAG built under that tenet's field
/// selection. Signature equality is the tenet test; comparing two records
/// under a tenet is constant-time once both signatures exist.
pub fn sign(
    record: &ExecutionRecord,
    tenet: Tenet,
    matrix: &FieldMatrix,
) -> Result<Signature, BlockDagError> {
    Ok(workflow_signature(&build_blockdag(record, tenet, matrix)?))
}

/// All seven tenet signatures, in [`Tenet::ALL`] order.
pub fn sign_all(
    record: &ExecutionRecord,
    matrix: &FieldMatrix,
) -> Result<[Signature; 7], BlockDagError> {
    let mut out = [crate::merkle::empty_root(); 7];
    for (i, tenet) in Tenet::ALL.into_iter().enumerate() {
        out[i] = sign(record, tenet, matrix)?;
    }
    Ok(out)
}

/// A divergent leaf at the first differing component: present on either
/// side, absent rendered as `None`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LeafDiff {
    pub key: String,
    pub value_a: Option<String>,
    pub value_b: Option<String>,
}

/// Outcome of comparing two records under one tenet.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub tenet: Tenet,
    pub matched: bool,
    pub signature_a: Signature,
    pub signature_b: Signature,
    /// Earliest component in topological order whose block signatures
    /// differ; absent when the records match or their topologies disagree.
    pub first_divergence: Option<String>,
    /// Leaf-level differences at the first divergent component.
    pub divergent_leaves: Vec<LeafDiff>,
    /// Set when the two records do not even share a topology.
    pub topology_note: Option<String>,
}

impl ComparisonReport {
    /// Aligned-column text rendering; one line plus optional detail lines.
    pub fn render_text(&self) -> String {
        let verdict = if self.matched { "MATCH" } else { "DIFFER" };
        let mut out = format!(
            "{:<5} {:<6} a={} b={}",
            self.tenet.label(),
            verdict,
            self.signature_a.short(),
            self.signature_b.short()
        );
        if let Some(note) = &self.topology_note {
            out.push_str(&format!("\n  topology: {note}"));
        }
        if let Some(first) = &self.first_divergence {
            out.push_str(&format!("\n  first divergence: {first}"));
            for diff in &self.divergent_leaves {
                out.push_str(&format!(
                    "\n    {:<28} a={} b={}",
                    diff.key,
                    diff.value_a.as_deref().unwrap_or("-"),
                    diff.value_b.as_deref().unwrap_or("-"),
                ));
            }
        }
        out
    }
}

/// Compare two records under a tenet. The match verdict is signature
/// equality; when the topologies agree, the first divergent component and
/// its leaf-level differences are reported as well. Records with different
/// topologies never match, even if their signatures coincide (possible when
/// the difference is a rename of a component no selected field mentions).
pub fn compare(
    record_a: &ExecutionRecord,
    record_b: &ExecutionRecord,
    tenet: Tenet,
    matrix: &FieldMatrix,
) -> Result<ComparisonReport, BlockDagError> {
    let dag_a = build_blockdag(record_a, tenet, matrix)?;
    let dag_b = build_blockdag(record_b, tenet, matrix)?;
    let signature_a = workflow_signature(&dag_a);
    let signature_b = workflow_signature(&dag_b);
    let matched = signature_a == signature_b;

    let mut report = ComparisonReport {
        tenet,
        matched,
        signature_a,
        signature_b,
        first_divergence: None,
        divergent_leaves: Vec::new(),
        topology_note: None,
    };

    match crate::blockdag::first_divergence(&dag_a, &dag_b) {
        Ok(first) => {
            if let Some(id) = first {
                report.divergent_leaves = diff_leaves(
                    dag_a
                        .block(&id)
                        .map(|b| b.data_leaves.as_slice())
                        .unwrap_or(&[]),
                    dag_b
                        .block(&id)
                        .map(|b| b.data_leaves.as_slice())
                        .unwrap_or(&[]),
                );
                report.first_divergence = Some(id);
            }
        }
        Err(BlockDagError::TopologyMismatch(note)) => {
            report.matched = false;
            report.topology_note = Some(note);
        }
        Err(other) => return Err(other),
    }
    Ok(report)
}

fn diff_leaves(a: &[Leaf], b: &[Leaf]) -> Vec<LeafDiff> {
    let map_a: BTreeMap<&str, &str> = a
        .iter()
        .map(|l| (l.key.as_str(), l.value.as_str()))
        .collect();
    let map_b: BTreeMap<&str, &str> = b
        .iter()
        .map(|l| (l.key.as_str(), l.value.as_str()))
        .collect();
    let mut keys: Vec<&str> = map_a.keys().chain(map_b.keys()).copied().collect();
    keys.sort_unstable();
    keys.dedup();

    let mut diffs = Vec::new();
    for key in keys {
        let va = map_a.get(key).copied();
        let vb = map_b.get(key).copied();
        if va != vb {
            diffs.push(LeafDiff {
                key: key.to_string(),
                value_a: va.map(str::to_string),
                value_b: vb.map(str::to_string),
            });
        }
    }
    diffs
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::AttributeValue;

    fn memory_artifact() -> Component {
        let mut c = Component::data("mem0");
        c.set_attr(ProvenanceLayer::Lgt, "Type", "memory");
        c.set_attr(
            ProvenanceLayer::Lgt,
            "InPorts",
            AttributeValue::str_list(["in"]),
        );
        c.set_attr(
            ProvenanceLayer::Lgt,
            "OutPorts",
            AttributeValue::str_list(["out"]),
        );
        c.set_attr(
            ProvenanceLayer::Lg,
            "Field-Keys",
            AttributeValue::str_list(["dtype"]),
        );
        c.set_attr(
            ProvenanceLayer::Lg,
            "Field-Values",
            AttributeValue::str_list(["dtype=f64le"]),
        );
        c.set_attr(ProvenanceLayer::Lg, "Data-Volume", 4096i64);
        c.set_attr(
            ProvenanceLayer::Lg,
            "Filenames",
            AttributeValue::str_list::<[&str; 0], &str>([]),
        );
        c.set_attr(ProvenanceLayer::Pgs, "Type", "memory");
        c.set_attr(ProvenanceLayer::Pgs, "Storage-Type", "memory");
        c.set_attr(ProvenanceLayer::Pgs, "Rank", 0i64);
        c.set_attr(ProvenanceLayer::Pgt, "Node", "n0");
        c.set_attr(ProvenanceLayer::Pgt, "Island", "i0");
        c.set_attr(ProvenanceLayer::Pg, "Node-IP-Address", "127.0.0.1");
        c.set_attr(ProvenanceLayer::Pg, "Island-IP-Address", "127.0.0.1");
        c.set_attr(ProvenanceLayer::Rg, "Status", "completed");
        c.set_attr(
            ProvenanceLayer::Rg,
            "Data-Summary",
            AttributeValue::List(vec![
                AttributeValue::str("ab".repeat(32)),
                AttributeValue::Int(4096),
            ]),
        );
        c
    }

    #[test]
    fn rerun_selects_exactly_the_structural_data_fields() {
        let c = memory_artifact();
        let leaves = select_fields(&c, Tenet::Rerun, default_matrix()).unwrap();
        let keys: Vec<&str> = leaves.iter().map(|l| l.key.as_str()).collect();
        assert_eq!(
            keys,
            vec![
                "LGT/InPorts",
                "LGT/OutPorts",
                "LGT/Type",
                "PGS/Storage-Type",
                "PGS/Type",
                "RG/Status",
            ]
        );
    }

    #[test]
    fn reproduce_keeps_summaries_and_drops_ports() {
        let c = memory_artifact();
        let leaves = select_fields(&c, Tenet::Reproduce, default_matrix()).unwrap();
        let keys: Vec<&str> = leaves.iter().map(|l| l.key.as_str()).collect();
        assert!(keys.contains(&"RG/Data-Summary"));
        assert!(keys.contains(&"PGS/Storage-Type"));
        assert!(!keys.iter().any(|k| k.contains("Ports")));
    }

    #[test]
    fn recompute_selects_placement_and_trace_for_applications() {
        let mut c = Component::task("app0");
        c.set_attr(ProvenanceLayer::Lgt, "Type", "proc");
        c.set_attr(
            ProvenanceLayer::Lgt,
            "InPorts",
            AttributeValue::str_list(["in"]),
        );
        c.set_attr(
            ProvenanceLayer::Lgt,
            "OutPorts",
            AttributeValue::str_list(["out"]),
        );
        c.set_attr(ProvenanceLayer::Lg, "Num-CPUs", 1i64);
        c.set_attr(
            ProvenanceLayer::Lg,
            "Field-Keys",
            AttributeValue::str_list(["seed"]),
        );
        c.set_attr(
            ProvenanceLayer::Lg,
            "Field-Values",
            AttributeValue::str_list(["seed=0"]),
        );
        c.set_attr(ProvenanceLayer::Pgs, "Type", "proc");
        c.set_attr(ProvenanceLayer::Pgs, "Name", "app0");
        c.set_attr(ProvenanceLayer::Pgs, "Rank", 0i64);
        c.set_attr(ProvenanceLayer::Pgt, "Node", "n0");
        c.set_attr(ProvenanceLayer::Pgt, "Island", "i0");
        c.set_attr(ProvenanceLayer::Pg, "Node-IP-Address", "127.0.0.1");
        c.set_attr(ProvenanceLayer::Pg, "Island-IP-Address", "127.0.0.1");
        c.set_attr(ProvenanceLayer::Rg, "Status", "completed");
        c.set_attr(ProvenanceLayer::Rg, "Trace", "deadbeef");

        let leaves = select_fields(&c, Tenet::Recompute, default_matrix()).unwrap();
        let keys: Vec<&str> = leaves.iter().map(|l| l.key.as_str()).collect();
        for expected in [
            "LG/Field-Values",
            "PGT/Node",
            "PG/Node-IP-Address",
            "RG/Trace",
        ] {
            assert!(keys.contains(&expected), "missing {expected}");
        }
    }

    #[test]
    fn missing_included_field_is_an_error() {
        let mut c = memory_artifact();
        c.attributes
            .get_mut(&ProvenanceLayer::Rg)
            .unwrap()
            .remove("Status");
        match select_fields(&c, Tenet::Rerun, default_matrix()) {
            Err(TenetError::MissingField { id, layer, field }) => {
                assert_eq!(id, "mem0");
                assert_eq!(layer, ProvenanceLayer::Rg);
                assert_eq!(field, "Status");
            }
            other => panic!("expected MissingField, got {other:?}"),
        }
    }

    #[test]
    fn default_matrix_spot_checks() {
        use ComponentCategory::*;
        use ProvenanceLayer::*;
        let m = default_matrix();

        // Type is universal.
        for cat in [ApplicationTask, DataArtifact, ControlConstruct] {
            for tenet in Tenet::ALL {
                assert!(m.included(Lgt, "Type", cat, tenet), "{cat:?}/{tenet:?}");
            }
        }
        // Ports drop out of Reproduce only.
        assert!(!m.included(Lgt, "InPorts", DataArtifact, Tenet::Reproduce));
        assert!(m.included(Lgt, "InPorts", DataArtifact, Tenet::Rerun));
        // Field values: bitwise-strict tenets only.
        for tenet in Tenet::ALL {
            let expect = matches!(tenet, Tenet::Recompute | Tenet::ReplicateComputational);
            assert_eq!(
                m.included(Lg, "Field-Values", ApplicationTask, tenet),
                expect
            );
        }
        // Data summaries: data-only, reproduction-flavored tenets.
        for tenet in Tenet::ALL {
            let expect = matches!(
                tenet,
                Tenet::Reproduce
                    | Tenet::ReplicateScientific
                    | Tenet::ReplicateComputational
                    | Tenet::ReplicateTotal
            );
            assert_eq!(m.included(Rg, "Data-Summary", DataArtifact, tenet), expect);
            assert!(!m.included(Rg, "Data-Summary", ApplicationTask, tenet));
        }
        // Addresses: bitwise-strict tenets only.
        for tenet in Tenet::ALL {
            let expect = matches!(tenet, Tenet::Recompute | Tenet::ReplicateComputational);
            assert_eq!(
                m.included(Pg, "Node-IP-Address", DataArtifact, tenet),
                expect
            );
        }
        // Trace is recompute-flavored and application-only.
        assert!(m.included(Rg, "Trace", ApplicationTask, Tenet::Recompute));
        assert!(!m.included(Rg, "Trace", DataArtifact, Tenet::Recompute));
        assert!(!m.included(Rg, "Trace", ApplicationTask, Tenet::Repeat));
        // Num-CPUs is repeat-flavored and application-only.
        assert!(m.included(Lg, "Num-CPUs", ApplicationTask, Tenet::Repeat));
        assert!(!m.included(Lg, "Num-CPUs", DataArtifact, Tenet::Repeat));
        assert!(!m.included(Lg, "Num-CPUs", ApplicationTask, Tenet::Rerun));
    }

    #[test]
    fn refinement_chain_rerun_repeat_recompute() {
        let m = default_matrix();
        for cat in [
            ComponentCategory::ApplicationTask,
            ComponentCategory::DataArtifact,
            ComponentCategory::ControlConstruct,
        ] {
            let rerun: Vec<_> = m.fields_for(Tenet::Rerun, cat);
            let repeat: Vec<_> = m.fields_for(Tenet::Repeat, cat);
            let recompute: Vec<_> = m.fields_for(Tenet::Recompute, cat);
            for f in &rerun {
                assert!(repeat.contains(f), "{cat:?}: repeat misses {f:?}");
            }
            for f in &repeat {
                assert!(recompute.contains(f), "{cat:?}: recompute misses {f:?}");
            }
        }
    }

    #[test]
    fn matrix_config_round_trips() {
        let m = default_matrix();
        let json = serde_json::to_string(&m.to_entries()).unwrap();
        let back = parse_matrix(&json).unwrap();
        assert_eq!(*m, back);
    }

    #[test]
    fn unknown_layer_in_matrix_file_is_a_parse_error() {
        let json = r#"[{"layer": "XG", "field": "Type", "category": "data", "tenets": ["rerun"]}]"#;
        match parse_matrix(json) {
            Err(MatrixError::Parse { index, message }) => {
                assert_eq!(index, 0);
                assert!(message.contains("XG"));
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn every_tenet_reaches_the_runtime_layer_in_the_default_matrix() {
        let m = default_matrix();
        for tenet in Tenet::ALL {
            assert_eq!(m.max_layer(tenet), Some(ProvenanceLayer::Rg), "{tenet:?}");
        }
    }

    #[test]
    fn comparing_different_topologies_notes_the_mismatch() {
        use crate::record::tests::synthetic_record;
        let a = synthetic_record(5, 1);
        let b = synthetic_record(7, 1);
        let report = compare(&a, &b, Tenet::Rerun, default_matrix()).unwrap();
        assert!(!report.matched);
        assert!(report.first_divergence.is_none());
        assert!(report.topology_note.is_some());
    }

    /// Renaming a component no selected field mentions leaves the signature
    /// unchanged, yet records with different id sets must never match.
    #[test]
    fn renamed_component_never_matches_despite_equal_signatures() {
        use crate::model::{ProvenanceLayer, WorkflowGraph};
        use crate::record::ExecutionRecord;

        let record_with_id = |id: &str| {
            let mut artifact = memory_artifact();
            artifact.id = id.to_string();
            let mut graph = WorkflowGraph::new(ProvenanceLayer::Rg);
            graph.add_component(artifact).unwrap();
            ExecutionRecord::new(graph, "t")
        };
        let a = record_with_id("mem0");
        let b = record_with_id("mem1");
        let report = compare(&a, &b, Tenet::Rerun, default_matrix()).unwrap();
        assert_eq!(report.signature_a, report.signature_b);
        assert!(!report.matched);
        assert!(report.topology_note.is_some());
    }

    /// The refinement implication on whole records: equal recompute
    /// signatures force equal repeat signatures force equal rerun
    /// signatures, across randomized perturbed pairs.
    #[test]
    fn refinement_implication_holds_on_randomized_pairs() {
        use crate::record::tests::synthetic_record;
        let matrix = default_matrix();
        for seed in 0..60u64 {
            let base = synthetic_record(4 + (seed as usize % 10), seed);
            let mut other = base.clone();
            if seed % 2 == 0 {
                let ids: Vec<String> = other.graph().ids().map(str::to_string).collect();
                let id = ids[seed as usize % ids.len()].clone();
                let component = other.graph_mut().component_mut(&id).unwrap();
                match seed % 3 {
                    0 => component.set_attr(ProvenanceLayer::Lgt, "Type", "perturbed"),
                    1 => component.set_attr(
                        ProvenanceLayer::Lg,
                        "Field-Values",
                        AttributeValue::str_list(["alpha=perturbed"]),
                    ),
                    _ => component.set_attr(ProvenanceLayer::Lg, "Num-CPUs", 63i64),
                }
            }
            let rc = sign(&base, Tenet::Recompute, matrix).unwrap()
                == sign(&other, Tenet::Recompute, matrix).unwrap();
            let rt = sign(&base, Tenet::Repeat, matrix).unwrap()
                == sign(&other, Tenet::Repeat, matrix).unwrap();
            let rr = sign(&base, Tenet::Rerun, matrix).unwrap()
                == sign(&other, Tenet::Rerun, matrix).unwrap();
            assert!(
                !rc || rt,
                "seed {seed}: recompute match without repeat match"
            );
            assert!(!rt || rr, "seed {seed}: repeat match without rerun match");
        }
    }

    /// The tenets are genuinely independent: witnesses exist that match one
    /// level of the refinement chain but not the next.
    #[test]
    fn witnesses_separate_adjacent_tenets() {
        use crate::record::tests::synthetic_record;
        let matrix = default_matrix();

        // Rerun match without repeat match: perturb a parameter name set.
        let base = synthetic_record(6, 77);
        let mut keys_changed = base.clone();
        let id = keys_changed.graph().ids().next().unwrap().to_string();
        keys_changed
            .graph_mut()
            .component_mut(&id)
            .unwrap()
            .set_attr(
                ProvenanceLayer::Lg,
                "Field-Keys",
                AttributeValue::str_list(["omega"]),
            );
        assert_eq!(
            sign(&base, Tenet::Rerun, matrix).unwrap(),
            sign(&keys_changed, Tenet::Rerun, matrix).unwrap()
        );
        assert_ne!(
            sign(&base, Tenet::Repeat, matrix).unwrap(),
            sign(&keys_changed, Tenet::Repeat, matrix).unwrap()
        );

        // Repeat match without recompute match: perturb a runtime trace.
        let mut trace_changed = base.clone();
        trace_changed
            .graph_mut()
            .component_mut(&id)
            .unwrap()
            .set_attr(ProvenanceLayer::Rg, "Trace", "0000000000000000");
        assert_eq!(
            sign(&base, Tenet::Repeat, matrix).unwrap(),
            sign(&trace_changed, Tenet::Repeat, matrix).unwrap()
        );
        assert_ne!(
            sign(&base, Tenet::Recompute, matrix).unwrap(),
            sign(&trace_changed, Tenet::Recompute, matrix).unwrap()
        );
    }
}
