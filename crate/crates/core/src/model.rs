//! Scale-agnostic workflow graph model.
//!
//! A workflow is a directed acyclic graph of components. Application tasks
//! and data artifacts must alternate along every edge; control constructs
//! (currently: scatter) live only at the logical layers and are resolved
//! away by [`WorkflowGraph::unroll`]. Each component carries provenance
//! attributes grouped by [`ProvenanceLayer`], and the graph records the
//! highest layer populated so far.
//!
//! Graphs are immutable once built: `unroll` and `partition` return new
//! graphs, and validation never mutates its input.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::de::{self, Deserializer, MapAccess, SeqAccess, Visitor};
use serde::ser::{SerializeMap, SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tenets::{default_matrix, FieldMatrix};

/// The role a component plays in a workflow.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ComponentCategory {
    /// A computational task (logical or physical).
    #[serde(rename = "application")]
    ApplicationTask,
    /// A data store: memory buffer, file, database, ...
    #[serde(rename = "data")]
    DataArtifact,
    /// A logical-layer construct (scatter) resolved away by unrolling.
    #[serde(rename = "control")]
    ControlConstruct,
}

impl ComponentCategory {
    pub fn is_task(self) -> bool {
        self == ComponentCategory::ApplicationTask
    }

    pub fn is_data(self) -> bool {
        self == ComponentCategory::DataArtifact
    }

    pub fn is_control(self) -> bool {
        self == ComponentCategory::ControlConstruct
    }

    pub fn label(self) -> &'static str {
        match self {
            ComponentCategory::ApplicationTask => "application",
            ComponentCategory::DataArtifact => "data",
            ComponentCategory::ControlConstruct => "control",
        }
    }
}

impl fmt::Display for ComponentCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Provenance layers in pipeline order.
///
/// The ordering is semantic: a graph at layer `X` has passed through every
/// layer below `X`. Logical template (LGT) and logical graph (LG) describe
/// design-time structure; the physical graph store (PGS), physical graph
/// template (PGT) and physical graph (PG) describe the scheduled realization;
/// the runtime graph (RG) holds what actually happened.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProvenanceLayer {
    #[serde(rename = "LGT")]
    Lgt,
    #[serde(rename = "LG")]
    Lg,
    #[serde(rename = "PGS")]
    Pgs,
    #[serde(rename = "PGT")]
    Pgt,
    #[serde(rename = "PG")]
    Pg,
    #[serde(rename = "RG")]
    Rg,
}

impl ProvenanceLayer {
    pub const ALL: [ProvenanceLayer; 6] = [
        ProvenanceLayer::Lgt,
        ProvenanceLayer::Lg,
        ProvenanceLayer::Pgs,
        ProvenanceLayer::Pgt,
        ProvenanceLayer::Pg,
        ProvenanceLayer::Rg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ProvenanceLayer::Lgt => "LGT",
            ProvenanceLayer::Lg => "LG",
            ProvenanceLayer::Pgs => "PGS",
            ProvenanceLayer::Pgt => "PGT",
            ProvenanceLayer::Pg => "PG",
            ProvenanceLayer::Rg => "RG",
        }
    }
}

impl fmt::Display for ProvenanceLayer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ProvenanceLayer {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "LGT" => Ok(ProvenanceLayer::Lgt),
            "LG" => Ok(ProvenanceLayer::Lg),
            "PGS" => Ok(ProvenanceLayer::Pgs),
            "PGT" => Ok(ProvenanceLayer::Pgt),
            "PG" => Ok(ProvenanceLayer::Pg),
            "RG" => Ok(ProvenanceLayer::Rg),
            other => Err(format!("unknown provenance layer {other:?}")),
        }
    }
}

/// A provenance attribute value: a scalar or a flat list of scalars.
///
/// Nested lists and maps are deliberately unsupported so that the canonical
/// leaf encoding stays unambiguous.
#[derive(Debug, Clone, PartialEq)]
pub enum AttributeValue {
    Str(String),
    Int(i64),
    Dec(f64),
    List(Vec<AttributeValue>),
}

impl AttributeValue {
    pub fn str(v: impl Into<String>) -> Self {
        AttributeValue::Str(v.into())
    }

    pub fn str_list<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        AttributeValue::List(
            items
                .into_iter()
                .map(|s| AttributeValue::Str(s.into()))
                .collect(),
        )
    }

    pub fn is_scalar(&self) -> bool {
        !matches!(self, AttributeValue::List(_))
    }

    /// Plain human rendering, used when attribute values are folded into
    /// other attributes (e.g. `name=value` parameter pairs).
    pub fn display_plain(&self) -> String {
        match self {
            AttributeValue::Str(s) => s.clone(),
            AttributeValue::Int(i) => i.to_string(),
            AttributeValue::Dec(d) => format!("{d}"),
            AttributeValue::List(items) => items
                .iter()
                .map(|v| v.display_plain())
                .collect::<Vec<_>>()
                .join(","),
        }
    }
}

impl From<&str> for AttributeValue {
    fn from(v: &str) -> Self {
        AttributeValue::Str(v.to_string())
    }
}

impl From<String> for AttributeValue {
    fn from(v: String) -> Self {
        AttributeValue::Str(v)
    }
}

impl From<i64> for AttributeValue {
    fn from(v: i64) -> Self {
        AttributeValue::Int(v)
    }
}

impl From<f64> for AttributeValue {
    fn from(v: f64) -> Self {
        AttributeValue::Dec(v)
    }
}

impl Serialize for AttributeValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            AttributeValue::Str(s) => serializer.serialize_str(s),
            AttributeValue::Int(i) => serializer.serialize_i64(*i),
            AttributeValue::Dec(d) => serializer.serialize_f64(*d),
            AttributeValue::List(items) => {
                let mut seq = serializer.serialize_seq(Some(items.len()))?;
                for item in items {
                    seq.serialize_element(item)?;
                }
                seq.end()
            }
        }
    }
}

impl<'de> Deserialize<'de> for AttributeValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct ValueVisitor {
            nested: bool,
        }

        impl<'de> Visitor<'de> for ValueVisitor {
            type Value = AttributeValue;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a string, integer, decimal, or flat list of scalars")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                Ok(AttributeValue::Str(v.to_string()))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Self::Value, E> {
                Ok(AttributeValue::Int(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Self::Value, E> {
                i64::try_from(v)
                    .map(AttributeValue::Int)
                    .map_err(|_| E::custom("unsupported attribute value: integer out of range"))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Self::Value, E> {
                Ok(AttributeValue::Dec(v))
            }

            fn visit_bool<E: de::Error>(self, _: bool) -> Result<Self::Value, E> {
                Err(E::custom("unsupported attribute value type: boolean"))
            }

            fn visit_unit<E: de::Error>(self) -> Result<Self::Value, E> {
                Err(E::custom("unsupported attribute value type: null"))
            }

            fn visit_map<A: MapAccess<'de>>(self, _: A) -> Result<Self::Value, A::Error> {
                Err(de::Error::custom("unsupported attribute value type: map"))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Self::Value, A::Error> {
                if self.nested {
                    return Err(de::Error::custom(
                        "unsupported attribute value type: nested list",
                    ));
                }
                let mut items = Vec::new();
                while let Some(item) = seq.next_element_seed(ValueSeed { nested: true })? {
                    items.push(item);
                }
                Ok(AttributeValue::List(items))
            }
        }

        struct ValueSeed {
            nested: bool,
        }

        impl<'de> de::DeserializeSeed<'de> for ValueSeed {
            type Value = AttributeValue;

            fn deserialize<D: Deserializer<'de>>(self, d: D) -> Result<Self::Value, D::Error> {
                d.deserialize_any(ValueVisitor {
                    nested: self.nested,
                })
            }
        }

        deserializer.deserialize_any(ValueVisitor { nested: false })
    }
}

/// One workflow component with its layered provenance attributes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub id: String,
    pub category: ComponentCategory,
    #[serde(default)]
    pub attributes: BTreeMap<ProvenanceLayer, BTreeMap<String, AttributeValue>>,
}

impl Component {
    pub fn new(id: impl Into<String>, category: ComponentCategory) -> Self {
        Component {
            id: id.into(),
            category,
            attributes: BTreeMap::new(),
        }
    }

    pub fn task(id: impl Into<String>) -> Self {
        Component::new(id, ComponentCategory::ApplicationTask)
    }

    pub fn data(id: impl Into<String>) -> Self {
        Component::new(id, ComponentCategory::DataArtifact)
    }

    pub fn control(id: impl Into<String>) -> Self {
        Component::new(id, ComponentCategory::ControlConstruct)
    }

    pub fn attr(&self, layer: ProvenanceLayer, field: &str) -> Option<&AttributeValue> {
        self.attributes.get(&layer).and_then(|m| m.get(field))
    }

    pub fn set_attr(
        &mut self,
        layer: ProvenanceLayer,
        field: impl Into<String>,
        value: impl Into<AttributeValue>,
    ) {
        self.attributes
            .entry(layer)
            .or_default()
            .insert(field.into(), value.into());
    }

    /// Builder-style variant of [`Component::set_attr`].
    pub fn with_attr(
        mut self,
        layer: ProvenanceLayer,
        field: impl Into<String>,
        value: impl Into<AttributeValue>,
    ) -> Self {
        self.set_attr(layer, field, value);
        self
    }

    /// Store a parameter map as the paired `Field-Keys` / `Field-Values`
    /// attributes: sorted parameter names, and sorted `name=value` strings.
    pub fn set_params(
        &mut self,
        layer: ProvenanceLayer,
        params: &BTreeMap<String, AttributeValue>,
    ) {
        let keys: Vec<String> = params.keys().cloned().collect();
        let pairs: Vec<String> = params
            .iter()
            .map(|(k, v)| format!("{k}={}", v.display_plain()))
            .collect();
        self.set_attr(layer, "Field-Keys", AttributeValue::str_list(keys));
        self.set_attr(layer, "Field-Values", AttributeValue::str_list(pairs));
    }
}

/// One structural or completeness problem found by validation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// An edge connects two tasks or two data artifacts (control constructs
    /// are transparent: the rule applies across chains of them).
    Alternation { from: String, to: String },
    /// The graph contains a cycle; the listed ids form one.
    Acyclicity { cycle: Vec<String> },
    /// An edge endpoint names no component in the graph.
    UnknownEndpoint {
        from: String,
        to: String,
        missing: String,
    },
    /// A control construct has no successors; nothing for it to govern.
    TerminalControl { id: String },
    /// A control construct survived past the logical layers.
    ControlAtPhysicalLayer { id: String },
    /// A field required by the field matrix is absent at a completed layer.
    MissingRequiredField {
        id: String,
        layer: ProvenanceLayer,
        field: String,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Alternation { from, to } => {
                write!(
                    f,
                    "alternation: {from} -> {to} connects two components of the same role"
                )
            }
            Violation::Acyclicity { cycle } => {
                write!(f, "acyclicity: cycle {}", cycle.join(" -> "))
            }
            Violation::UnknownEndpoint { from, to, missing } => {
                write!(
                    f,
                    "unknown endpoint: edge {from} -> {to} names missing component {missing}"
                )
            }
            Violation::TerminalControl { id } => {
                write!(f, "terminal control: {id} has no successors")
            }
            Violation::ControlAtPhysicalLayer { id } => {
                write!(f, "control at physical layer: {id}")
            }
            Violation::MissingRequiredField { id, layer, field } => {
                write!(f, "missing required field: {id} lacks {layer}/{field}")
            }
        }
    }
}

/// Outcome of structural validation. Violations are data, not failures.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn len(&self) -> usize {
        self.violations.len()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("duplicate component id {0:?}")]
    DuplicateComponent(String),
}

#[derive(Debug, Error)]
pub enum UnrollError {
    #[error("control construct {0:?} has no multiplicity")]
    UnresolvedControl(String),
    #[error("control construct {id:?} has non-positive multiplicity {multiplicity}")]
    InvalidMultiplicity { id: String, multiplicity: u32 },
    #[error("unroll expects a graph at layer LG, got {0}")]
    WrongLayer(ProvenanceLayer),
    #[error("input graph is invalid:\n{0}")]
    InvalidInput(ValidationReport),
}

#[derive(Debug, Error)]
pub enum PartitionError {
    #[error("component {0:?} has no node/island assignment")]
    PartialAssignment(String),
    #[error("label {0:?} has no address in the address map")]
    UnmappedLabel(String),
    #[error("partition expects a graph at layer PGT, got {0}")]
    WrongLayer(ProvenanceLayer),
}

/// A typed workflow DAG at some provenance layer.
#[derive(Debug, Clone, PartialEq)]
pub struct WorkflowGraph {
    layer: ProvenanceLayer,
    components: BTreeMap<String, Component>,
    edges: BTreeSet<(String, String)>,
    reverse: BTreeSet<(String, String)>,
}

impl WorkflowGraph {
    pub fn new(layer: ProvenanceLayer) -> Self {
        WorkflowGraph {
            layer,
            components: BTreeMap::new(),
            edges: BTreeSet::new(),
            reverse: BTreeSet::new(),
        }
    }

    pub fn layer(&self) -> ProvenanceLayer {
        self.layer
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn add_component(&mut self, component: Component) -> Result<(), ModelError> {
        if self.components.contains_key(&component.id) {
            return Err(ModelError::DuplicateComponent(component.id));
        }
        self.components.insert(component.id.clone(), component);
        Ok(())
    }

    /// Record a directed edge. Endpoints are checked by [`validate`], not
    /// here, so files with dangling edges can still be loaded and reported.
    ///
    /// [`validate`]: WorkflowGraph::validate
    pub fn add_edge(&mut self, from: impl Into<String>, to: impl Into<String>) {
        let from = from.into();
        let to = to.into();
        self.reverse.insert((to.clone(), from.clone()));
        self.edges.insert((from, to));
    }

    pub fn component(&self, id: &str) -> Option<&Component> {
        self.components.get(id)
    }

    pub fn component_mut(&mut self, id: &str) -> Option<&mut Component> {
        self.components.get_mut(id)
    }

    pub fn components(&self) -> impl Iterator<Item = &Component> {
        self.components.values()
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.components.keys().map(String::as_str)
    }

    pub fn edges(&self) -> impl Iterator<Item = (&str, &str)> {
        self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn successors(&self, id: &str) -> Vec<&str> {
        self.edges
            .range((id.to_string(), String::new())..)
            .take_while(|(from, _)| from == id)
            .map(|(_, to)| to.as_str())
            .collect()
    }

    pub fn predecessors(&self, id: &str) -> Vec<&str> {
        self.reverse
            .range((id.to_string(), String::new())..)
            .take_while(|(to, _)| to == id)
            .map(|(_, from)| from.as_str())
            .collect()
    }

    pub fn out_degree(&self, id: &str) -> usize {
        self.successors(id).len()
    }

    pub fn in_degree(&self, id: &str) -> usize {
        self.predecessors(id).len()
    }

    /// Ids of sink components (out-degree zero) in ascending order.
    pub fn sinks(&self) -> Vec<&str> {
        self.ids().filter(|id| self.out_degree(id) == 0).collect()
    }

    /// All components reachable from `id` (excluding `id` itself).
    pub fn descendants(&self, id: &str) -> BTreeSet<String> {
        let mut seen = BTreeSet::new();
        let mut queue: VecDeque<String> =
            self.successors(id).iter().map(|s| s.to_string()).collect();
        while let Some(next) = queue.pop_front() {
            if seen.insert(next.clone()) {
                for succ in self.successors(&next) {
                    queue.push_back(succ.to_string());
                }
            }
        }
        seen
    }

    /// Replace the layer marker, returning the modified graph.
    pub(crate) fn at_layer(mut self, layer: ProvenanceLayer) -> Self {
        self.layer = layer;
        self
    }

    /// Validate the graph against its structural invariants and the default
    /// field matrix. See [`validate_with`] for the exact rules.
    ///
    /// [`validate_with`]: WorkflowGraph::validate_with
    pub fn validate(&self) -> ValidationReport {
        self.validate_with(default_matrix())
    }

    /// Validate structure (alternation across transparent controls,
    /// acyclicity, edge endpoints, control placement) plus attribute
    /// completeness: every field the matrix names for a component's category
    /// must be present at each layer strictly below the graph's layer.
    /// Runtime-layer completeness is the execution record's concern.
    pub fn validate_with(&self, matrix: &FieldMatrix) -> ValidationReport {
        let mut violations = Vec::new();

        for (from, to) in &self.edges {
            for endpoint in [from, to] {
                if !self.components.contains_key(endpoint) {
                    violations.push(Violation::UnknownEndpoint {
                        from: from.clone(),
                        to: to.clone(),
                        missing: endpoint.clone(),
                    });
                }
            }
        }

        self.check_alternation(&mut violations);

        if let Some(cycle) = self.find_cycle() {
            violations.push(Violation::Acyclicity { cycle });
        }

        for component in self.components.values() {
            if component.category.is_control() {
                if self.layer >= ProvenanceLayer::Pgs {
                    violations.push(Violation::ControlAtPhysicalLayer {
                        id: component.id.clone(),
                    });
                }
                if self.out_degree(&component.id) == 0 {
                    violations.push(Violation::TerminalControl {
                        id: component.id.clone(),
                    });
                }
            }
        }

        for layer in ProvenanceLayer::ALL {
            if layer >= self.layer {
                break;
            }
            for component in self.components.values() {
                for field in matrix.required_fields(layer, component.category) {
                    if component.attr(layer, field).is_none() {
                        violations.push(Violation::MissingRequiredField {
                            id: component.id.clone(),
                            layer,
                            field: field.to_string(),
                        });
                    }
                }
            }
        }

        ValidationReport { violations }
    }

    /// Alternation across transparent control constructs: chase every edge
    /// leaving a non-control component through any chain of controls and
    /// check the first non-control component reached has the opposite role.
    fn check_alternation(&self, violations: &mut Vec<Violation>) {
        let mut reported = BTreeSet::new();
        for (from, to) in &self.edges {
            let Some(src) = self.components.get(from) else {
                continue;
            };
            if src.category.is_control() {
                continue;
            }
            let mut seen = BTreeSet::new();
            for target in self.resolve_through_controls(to, &mut seen) {
                let Some(dst) = self.components.get(&target) else {
                    continue;
                };
                if dst.category == src.category && reported.insert((from.clone(), target.clone())) {
                    violations.push(Violation::Alternation {
                        from: from.clone(),
                        to: target,
                    });
                }
            }
        }
    }

    /// Expand `id` to the set of non-control components reachable through
    /// chains of control constructs (the singleton set if `id` is not a
    /// control). `seen` guards against control-only cycles.
    fn resolve_through_controls(&self, id: &str, seen: &mut BTreeSet<String>) -> Vec<String> {
        match self.components.get(id) {
            Some(c) if c.category.is_control() => {
                if !seen.insert(id.to_string()) {
                    return Vec::new();
                }
                let mut out = Vec::new();
                for succ in self.successors(id) {
                    out.extend(self.resolve_through_controls(succ, seen));
                }
                out
            }
            Some(_) => vec![id.to_string()],
            None => Vec::new(),
        }
    }

    /// Locate one cycle, if any, as a rotation-normalized id list.
    fn find_cycle(&self) -> Option<Vec<String>> {
        let mut in_degree: BTreeMap<&str, usize> =
            self.components.keys().map(|id| (id.as_str(), 0)).collect();
        for (_, to) in &self.edges {
            if let Some(d) = in_degree.get_mut(to.as_str()) {
                *d += 1;
            }
        }
        let mut queue: VecDeque<&str> = in_degree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(id, _)| *id)
            .collect();
        let mut remaining = self.components.len();
        while let Some(id) = queue.pop_front() {
            remaining -= 1;
            for succ in self.successors(id) {
                if let Some(d) = in_degree.get_mut(succ) {
                    *d -= 1;
                    if *d == 0 {
                        queue.push_back(succ);
                    }
                }
            }
        }
        if remaining == 0 {
            return None;
        }

        // Walk forward from any vertex still holding in-degree > 0; the walk
        // must eventually revisit a vertex, closing a cycle.
        let start = in_degree
            .iter()
            .find(|(_, d)| **d > 0)
            .map(|(id, _)| id.to_string())?;
        let mut path: Vec<String> = vec![start.clone()];
        let mut on_path: BTreeSet<String> = BTreeSet::from([start]);
        loop {
            let current = path.last().unwrap().clone();
            let next = self
                .successors(&current)
                .into_iter()
                .find(|s| in_degree.get(s).map(|d| *d > 0).unwrap_or(false))?
                .to_string();
            if on_path.contains(&next) {
                let pos = path.iter().position(|p| p == &next).unwrap();
                let mut cycle: Vec<String> = path[pos..].to_vec();
                // Rotate so the smallest id leads; keeps reports stable.
                let min = cycle
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, id)| *id)
                    .map(|(i, _)| i)
                    .unwrap();
                cycle.rotate_left(min);
                return Some(cycle);
            }
            on_path.insert(next.clone());
            path.push(next);
        }
    }

    /// Resolve all control constructs, producing the physical graph template.
    ///
    /// A scatter of multiplicity `m` governs every component reachable from
    /// it: each governed component `c` becomes `c#0 .. c#m-1`, edges inside
    /// the governed region are rewired pairwise, and edges entering it fan
    /// out to every replica. Nested scatters compose, so a component under
    /// two constructs of multiplicities `m1`, `m2` ends up with `m1 * m2`
    /// replicas. The result also gains the physical-store attributes (PGS
    /// type, name, storage type, rank) derived from the logical ones.
    pub fn unroll(
        &self,
        multiplicities: &BTreeMap<String, u32>,
    ) -> Result<WorkflowGraph, UnrollError> {
        if self.layer != ProvenanceLayer::Lg {
            return Err(UnrollError::WrongLayer(self.layer));
        }
        let report = self.validate_as_complete_through(ProvenanceLayer::Lg);
        if !report.is_empty() {
            return Err(UnrollError::InvalidInput(report));
        }

        let mut graph = self.clone();
        let mut mults: BTreeMap<String, u32> = multiplicities.clone();

        // Expand one construct at a time; replicas of nested constructs
        // inherit their original's multiplicity under the derived id.
        while let Some(ctrl_id) = graph
            .components
            .values()
            .find(|c| c.category.is_control())
            .map(|c| c.id.clone())
        {
            let m = *mults
                .get(&ctrl_id)
                .ok_or_else(|| UnrollError::UnresolvedControl(ctrl_id.clone()))?;
            if m == 0 {
                return Err(UnrollError::InvalidMultiplicity {
                    id: ctrl_id,
                    multiplicity: m,
                });
            }

            let governed = graph.descendants(&ctrl_id);
            let preds: Vec<String> = graph
                .predecessors(&ctrl_id)
                .iter()
                .map(|s| s.to_string())
                .collect();
            let succs: Vec<String> = graph
                .successors(&ctrl_id)
                .iter()
                .map(|s| s.to_string())
                .collect();

            let mut next = WorkflowGraph::new(graph.layer);
            for component in graph.components.values() {
                if component.id == ctrl_id {
                    continue;
                }
                if governed.contains(&component.id) {
                    for k in 0..m {
                        let mut replica = component.clone();
                        replica.id = format!("{}#{k}", component.id);
                        if component.category.is_control() {
                            if let Some(&cm) = mults.get(&component.id) {
                                mults.insert(replica.id.clone(), cm);
                            }
                        }
                        next.add_component(replica).expect("derived ids are unique");
                    }
                } else {
                    next.add_component(component.clone())
                        .expect("ids were unique");
                }
            }
            for (from, to) in &graph.edges {
                if from == &ctrl_id || to == &ctrl_id {
                    continue;
                }
                match (governed.contains(from), governed.contains(to)) {
                    (true, true) => {
                        for k in 0..m {
                            next.add_edge(format!("{from}#{k}"), format!("{to}#{k}"));
                        }
                    }
                    (false, true) => {
                        for k in 0..m {
                            next.add_edge(from.clone(), format!("{to}#{k}"));
                        }
                    }
                    (false, false) => next.add_edge(from.clone(), to.clone()),
                    (true, false) => unreachable!("successor of a governed component is governed"),
                }
            }
            // Route edges through the removed construct: predecessors attach
            // to every replica of each direct successor.
            for p in &preds {
                for s in &succs {
                    if governed.contains(s) {
                        for k in 0..m {
                            next.add_edge(p.clone(), format!("{s}#{k}"));
                        }
                    }
                }
            }
            graph = next;
        }

        for component in graph.components.values_mut() {
            let logical_type = component
                .attr(ProvenanceLayer::Lgt, "Type")
                .cloned()
                .unwrap_or_else(|| AttributeValue::str(""));
            component.set_attr(ProvenanceLayer::Pgs, "Type", logical_type.clone());
            component.set_attr(ProvenanceLayer::Pgs, "Rank", replica_rank(&component.id));
            match component.category {
                ComponentCategory::ApplicationTask => {
                    let name = component.id.clone();
                    component.set_attr(ProvenanceLayer::Pgs, "Name", name);
                }
                ComponentCategory::DataArtifact => {
                    component.set_attr(ProvenanceLayer::Pgs, "Storage-Type", logical_type);
                }
                ComponentCategory::ControlConstruct => {}
            }
        }

        Ok(graph.at_layer(ProvenanceLayer::Pgt))
    }

    /// Map every component onto compute resources, producing the physical
    /// graph: node and island labels at PGT, their addresses at PG.
    pub fn partition(
        &self,
        assignment: &BTreeMap<String, (String, String)>,
        addresses: &BTreeMap<String, String>,
    ) -> Result<WorkflowGraph, PartitionError> {
        if self.layer != ProvenanceLayer::Pgt {
            return Err(PartitionError::WrongLayer(self.layer));
        }
        for id in self.components.keys() {
            if !assignment.contains_key(id) {
                return Err(PartitionError::PartialAssignment(id.clone()));
            }
        }

        let mut graph = self.clone();
        for (id, (node, island)) in assignment {
            let Some(component) = graph.components.get_mut(id) else {
                continue;
            };
            let node_addr = addresses
                .get(node)
                .ok_or_else(|| PartitionError::UnmappedLabel(node.clone()))?;
            let island_addr = addresses
                .get(island)
                .ok_or_else(|| PartitionError::UnmappedLabel(island.clone()))?;
            component.set_attr(ProvenanceLayer::Pgt, "Node", node.clone());
            component.set_attr(ProvenanceLayer::Pgt, "Island", island.clone());
            component.set_attr(ProvenanceLayer::Pg, "Node-IP-Address", node_addr.clone());
            component.set_attr(
                ProvenanceLayer::Pg,
                "Island-IP-Address",
                island_addr.clone(),
            );
        }
        Ok(graph.at_layer(ProvenanceLayer::Pg))
    }

    /// Like [`validate`], but additionally requires attribute completeness
    /// through `layer` inclusive. `unroll` uses this to insist its input is
    /// a fully configured logical graph.
    ///
    /// [`validate`]: WorkflowGraph::validate
    pub fn validate_as_complete_through(&self, layer: ProvenanceLayer) -> ValidationReport {
        let matrix = default_matrix();
        let mut report = self.validate_with(matrix);
        // Layers strictly below self.layer were already covered.
        for check_layer in ProvenanceLayer::ALL {
            if check_layer < self.layer || check_layer > layer {
                continue;
            }
            for component in self.components.values() {
                for field in matrix.required_fields(check_layer, component.category) {
                    if component.attr(check_layer, field).is_none() {
                        report.violations.push(Violation::MissingRequiredField {
                            id: component.id.clone(),
                            layer: check_layer,
                            field: field.to_string(),
                        });
                    }
                }
            }
        }
        report
    }
}

/// Rank of a replicated component: the numeric suffix introduced by the most
/// recent unrolling step, or 0 for unreplicated components.
fn replica_rank(id: &str) -> AttributeValue {
    let rank = id
        .rsplit_once('#')
        .and_then(|(_, k)| k.parse::<i64>().ok())
        .unwrap_or(0);
    AttributeValue::Int(rank)
}

// ---------------------------------------------------------------------------
// Graph file format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct GraphFile {
    layer: ProvenanceLayer,
    components: Vec<Component>,
    edges: Vec<(String, String)>,
}

impl Serialize for WorkflowGraph {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(3))?;
        map.serialize_entry("layer", &self.layer)?;
        map.serialize_entry("components", &self.components.values().collect::<Vec<_>>())?;
        map.serialize_entry("edges", &self.edges.iter().collect::<Vec<_>>())?;
        map.end()
    }
}

impl<'de> Deserialize<'de> for WorkflowGraph {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let file = GraphFile::deserialize(deserializer)?;
        let mut graph = WorkflowGraph::new(file.layer);
        for component in file.components {
            graph
                .add_component(component)
                .map_err(|e| de::Error::custom(e.to_string()))?;
        }
        for (from, to) in file.edges {
            graph.add_edge(from, to);
        }
        Ok(graph)
    }
}
