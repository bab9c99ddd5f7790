//! Persisted execution records.
//!
//! An [`ExecutionRecord`] is the layered provenance of one workflow run — a
//! graph at the runtime layer plus a run id and free-form metadata — and is
//! the sole input to signature computation. Record files are JSON
//! (`"schema": 1`); artifact payload bytes live out-of-line in a sibling
//! `payloads/` directory keyed by content digest, so identical payloads are
//! stored once no matter how many runs share them.
//!
//! Metadata (engine version, timestamps, ...) is carried for humans and is
//! never selectable by any tenet: timestamps must not leak into signatures.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};
use thiserror::Error;

use crate::merkle::Signature;
use crate::model::{AttributeValue, ComponentCategory, ProvenanceLayer, WorkflowGraph};
use crate::tenets::default_matrix;

/// Current record file schema version.
pub const RECORD_SCHEMA: u32 = 1;

#[derive(Debug, Error)]
pub enum RecordError {
    #[error("cannot access record file: {0}")]
    Io(#[from] io::Error),
    #[error("record file does not parse: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("record is invalid: {0}")]
    Validation(String),
}

/// Content summary of a data artifact's payload.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataSummary {
    /// SHA-256 of the payload bytes.
    pub digest: Signature,
    /// Payload length in bytes.
    pub volume: u64,
}

impl DataSummary {
    /// The attribute form stored at `RG/Data-Summary`: `[digest-hex, volume]`.
    pub fn to_attribute(&self) -> AttributeValue {
        AttributeValue::List(vec![
            AttributeValue::Str(self.digest.hex()),
            AttributeValue::Int(self.volume as i64),
        ])
    }

    pub fn from_attribute(value: &AttributeValue) -> Option<DataSummary> {
        let AttributeValue::List(items) = value else {
            return None;
        };
        let [AttributeValue::Str(hex), AttributeValue::Int(volume)] = items.as_slice() else {
            return None;
        };
        Some(DataSummary {
            digest: Signature::from_hex(hex).ok()?,
            volume: u64::try_from(*volume).ok()?,
        })
    }
}

/// Summarize a payload: content digest plus byte count.
pub fn summarize(payload: &[u8]) -> DataSummary {
    let digest: [u8; 32] = Sha256::digest(payload).into();
    DataSummary {
        digest: Signature::from_bytes(digest),
        volume: payload.len() as u64,
    }
}

/// Digest of an ordered event log. The run id is folded in last, so two
/// distinct runs produce distinct traces unless the caller pins the run id.
pub fn trace_digest<S: AsRef<str>>(events: &[S], run_id: &str) -> String {
    let mut hasher = Sha256::new();
    for event in events {
        let bytes = event.as_ref().as_bytes();
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    }
    hasher.update(b"run:");
    hasher.update(run_id.as_bytes());
    hex::encode(hasher.finalize())
}

/// The persisted, layered provenance of one workflow run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecutionRecord {
    schema: u32,
    run_id: String,
    #[serde(default)]
    meta: BTreeMap<String, String>,
    graph: WorkflowGraph,
}

impl ExecutionRecord {
    pub fn new(graph: WorkflowGraph, run_id: impl Into<String>) -> Self {
        ExecutionRecord {
            schema: RECORD_SCHEMA,
            run_id: run_id.into(),
            meta: BTreeMap::new(),
            graph,
        }
    }

    pub fn run_id(&self) -> &str {
        &self.run_id
    }

    pub fn graph(&self) -> &WorkflowGraph {
        &self.graph
    }

    pub fn graph_mut(&mut self) -> &mut WorkflowGraph {
        &mut self.graph
    }

    pub fn meta(&self) -> &BTreeMap<String, String> {
        &self.meta
    }

    pub fn set_meta(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.meta.insert(key.into(), value.into());
    }

    /// Data summaries of every artifact, id -> summary. `terminal_only`
    /// restricts to artifacts with out-degree zero (the run's net output).
    pub fn data_summaries(&self, terminal_only: bool) -> BTreeMap<String, DataSummary> {
        self.graph
            .components()
            .filter(|c| c.category == ComponentCategory::DataArtifact)
            .filter(|c| !terminal_only || self.graph.out_degree(&c.id) == 0)
            .filter_map(|c| {
                let attr = c.attr(ProvenanceLayer::Rg, "Data-Summary")?;
                Some((c.id.clone(), DataSummary::from_attribute(attr)?))
            })
            .collect()
    }

    /// A record is complete when its graph sits at the runtime layer, passes
    /// structural validation, and every component carries its runtime
    /// fields: status everywhere, a trace per task, a data summary per
    /// artifact.
    pub fn validate(&self) -> Result<(), RecordError> {
        if self.schema != RECORD_SCHEMA {
            return Err(RecordError::Validation(format!(
                "unsupported schema version {}",
                self.schema
            )));
        }
        if self.run_id.is_empty() {
            return Err(RecordError::Validation("empty run id".to_string()));
        }
        if self.graph.layer() != ProvenanceLayer::Rg {
            return Err(RecordError::Validation(format!(
                "record graph is at layer {}, expected RG",
                self.graph.layer()
            )));
        }
        let report = self.graph.validate();
        if !report.is_empty() {
            return Err(RecordError::Validation(report.to_string()));
        }
        let matrix = default_matrix();
        for component in self.graph.components() {
            for field in matrix.required_fields(ProvenanceLayer::Rg, component.category) {
                if component.attr(ProvenanceLayer::Rg, field).is_none() {
                    return Err(RecordError::Validation(format!(
                        "component {:?} lacks RG/{field}",
                        component.id
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Write a record file (JSON, schema-versioned).
pub fn write_record(record: &ExecutionRecord, path: &Path) -> Result<(), RecordError> {
    let json = serde_json::to_string_pretty(record)?;
    fs::write(path, json)?;
    Ok(())
}

/// Read and validate a record file.
pub fn read_record(path: &Path) -> Result<ExecutionRecord, RecordError> {
    let text = fs::read_to_string(path)?;
    let record: ExecutionRecord = serde_json::from_str(&text)?;
    record.validate()?;
    Ok(record)
}

/// The content-addressed payload directory next to a record file.
pub fn payload_dir(record_path: &Path) -> PathBuf {
    record_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join("payloads")
}

/// Store payload bytes content-addressed beside a record file. Existing
/// entries are left alone: equal digests mean equal bytes.
pub fn write_payloads(
    record_path: &Path,
    payloads: &BTreeMap<String, Vec<u8>>,
) -> Result<(), RecordError> {
    let dir = payload_dir(record_path);
    fs::create_dir_all(&dir)?;
    for (digest, bytes) in payloads {
        let target = dir.join(digest);
        if !target.exists() {
            fs::write(target, bytes)?;
        }
    }
    Ok(())
}
