//! The built-in lowpass-filter demonstration workflow.
//!
//! One trial synthesizes a sinusoid, injects seeded Gaussian noise, builds a
//! Hann window, and filters the noisy signal with one of three numerically
//! distinct lowpass implementations. The plain workflow stores the filtered
//! signal in a file; the extended workflow appends a stage computing the
//! normalized cross-correlation between the noisy input and the filtered
//! output, rounded to the precision the signal length supports.
//!
//! The component chain alternates data artifacts and tasks:
//!
//! ```text
//! trial-config -> gen-sine -> raw-signal -> add-noise -> noisy-signal
//!   -> gen-window -> window -> filter -> filtered-file
//!   [ -> ncc -> ncc-file ]
//! ```
//!
//! The logical template is identical for every filter method — only the
//! filter task's parameter set differs — so trials of different methods
//! rerun each other while repeat signatures separate them. Interim artifacts
//! live in memory, terminal results in files.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use thiserror::Error;

use crate::merkle::Signature;
use crate::model::{AttributeValue, Component, ComponentCategory, ProvenanceLayer, WorkflowGraph};
use crate::record::{self, summarize, trace_digest, ExecutionRecord, RecordError};
use crate::signal::{
    add_noise, filter_fft, filter_pointwise, gen_sine, hann_window, ncc, unit_gain, FilterMethod,
    PrecisionRule, SignalConfig, SignalError,
};
use crate::tenets::{sign_all, FieldMatrix, Tenet};

pub const CONFIG_ID: &str = "trial-config";
pub const SINE_TASK_ID: &str = "gen-sine";
pub const RAW_SIGNAL_ID: &str = "raw-signal";
pub const NOISE_TASK_ID: &str = "add-noise";
pub const NOISY_SIGNAL_ID: &str = "noisy-signal";
pub const WINDOW_TASK_ID: &str = "gen-window";
pub const WINDOW_ID: &str = "window";
pub const FILTER_TASK_ID: &str = "filter";
pub const FILTERED_FILE_ID: &str = "filtered-file";
pub const NCC_TASK_ID: &str = "ncc";
pub const NCC_FILE_ID: &str = "ncc-file";

/// Hann window length used by every demo filter.
pub const WINDOW_LEN: usize = 33;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error("signal length {0} is shorter than the {WINDOW_LEN}-point window")]
    SignalTooShort(usize),
    #[error(transparent)]
    Unroll(#[from] crate::model::UnrollError),
    #[error(transparent)]
    Partition(#[from] crate::model::PartitionError),
    #[error("failure injection names unknown component {0:?}")]
    UnknownFailureTarget(String),
    #[error(transparent)]
    Record(#[from] RecordError),
}

/// Everything that defines one demo trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialSpec {
    pub method: FilterMethod,
    /// Noise seed; batches use the trial number.
    pub seed: u64,
    /// Append the cross-correlation stage.
    pub extended: bool,
    pub length: usize,
    pub stddev: f64,
    /// Pin the run id so traces — and thus recompute signatures — become
    /// repeatable. Exists to make recomputation positively testable.
    pub deterministic_trace: bool,
    /// Force the named component to fail; its descendants are skipped. The
    /// record is still emitted, since failed runs remain comparable.
    pub inject_failure: Option<String>,
}

impl TrialSpec {
    pub fn new(method: FilterMethod, seed: u64) -> Self {
        TrialSpec {
            method,
            seed,
            extended: false,
            length: 512,
            stddev: 0.1,
            deterministic_trace: false,
            inject_failure: None,
        }
    }

    pub fn extended(mut self, extended: bool) -> Self {
        self.extended = extended;
        self
    }

    pub fn trial_name(&self) -> String {
        format!("{}-{}", self.method.token(), self.seed)
    }

    fn signal_config(&self) -> SignalConfig {
        SignalConfig {
            length: self.length,
            noise_stddev: self.stddev,
            seed: self.seed,
            ..SignalConfig::default()
        }
    }
}

/// The method-independent part of the trial configuration; its serialized
/// form is the `trial-config` artifact's payload. The seed deliberately
/// lives on the noise task, not here.
#[derive(Serialize)]
struct ConfigPayload {
    length: usize,
    sample_rate: f64,
    frequencies: Vec<f64>,
    noise_stddev: f64,
}

fn config_payload(spec: &TrialSpec) -> Vec<u8> {
    let cfg = spec.signal_config();
    serde_json::to_vec(&ConfigPayload {
        length: cfg.length,
        sample_rate: cfg.sample_rate,
        frequencies: cfg.frequencies,
        noise_stddev: cfg.noise_stddev,
    })
    .expect("config payload serializes")
}

fn f64_bytes(values: &[f64]) -> Vec<u8> {
    values.iter().flat_map(|v| v.to_le_bytes()).collect()
}

fn le_volume(samples: usize) -> i64 {
    (samples * 8) as i64
}

struct Slot {
    id: &'static str,
    category: ComponentCategory,
    logical_type: &'static str,
    in_ports: &'static [&'static str],
    out_ports: &'static [&'static str],
}

const fn task(
    id: &'static str,
    logical_type: &'static str,
    in_ports: &'static [&'static str],
    out_ports: &'static [&'static str],
) -> Slot {
    Slot {
        id,
        category: ComponentCategory::ApplicationTask,
        logical_type,
        in_ports,
        out_ports,
    }
}

const fn artifact(
    id: &'static str,
    logical_type: &'static str,
    in_ports: &'static [&'static str],
    out_ports: &'static [&'static str],
) -> Slot {
    Slot {
        id,
        category: ComponentCategory::DataArtifact,
        logical_type,
        in_ports,
        out_ports,
    }
}

/// The alternating chain, in execution order.
const PLAIN_SLOTS: [Slot; 9] = [
    artifact(CONFIG_ID, "memory", &[], &["config"]),
    task(SINE_TASK_ID, "signal-generator", &["config"], &["signal"]),
    artifact(RAW_SIGNAL_ID, "memory", &["signal"], &["signal"]),
    task(NOISE_TASK_ID, "noise-injector", &["signal"], &["noisy"]),
    artifact(NOISY_SIGNAL_ID, "memory", &["noisy"], &["noisy"]),
    task(
        WINDOW_TASK_ID,
        "window-generator",
        &["trigger"],
        &["window"],
    ),
    artifact(WINDOW_ID, "memory", &["window"], &["window"]),
    task(
        FILTER_TASK_ID,
        "lowpass-filter",
        &["noisy", "window"],
        &["filtered"],
    ),
    artifact(FILTERED_FILE_ID, "file", &["filtered"], &["filtered"]),
];

const NCC_SLOTS: [Slot; 2] = [
    task(
        NCC_TASK_ID,
        "cross-correlator",
        &["noisy", "filtered"],
        &["ncc"],
    ),
    artifact(NCC_FILE_ID, "file", &["ncc"], &["ncc"]),
];

fn str_list(items: &[&str]) -> AttributeValue {
    AttributeValue::str_list(items.iter().copied())
}

/// Parameter map of each task; the filter's keys discriminate the method so
/// repeat signatures separate implementations while rerun signatures do not.
fn task_params(spec: &TrialSpec, id: &str) -> BTreeMap<String, AttributeValue> {
    let cfg = spec.signal_config();
    let mut params = BTreeMap::new();
    match id {
        SINE_TASK_ID => {
            params.insert("length".into(), AttributeValue::Int(cfg.length as i64));
            params.insert("sample-rate".into(), AttributeValue::Dec(cfg.sample_rate));
            params.insert(
                "frequencies".into(),
                AttributeValue::List(
                    cfg.frequencies
                        .iter()
                        .map(|f| AttributeValue::Dec(*f))
                        .collect(),
                ),
            );
        }
        NOISE_TASK_ID => {
            params.insert("seed".into(), AttributeValue::Int(spec.seed as i64));
            params.insert("stddev".into(), AttributeValue::Dec(spec.stddev));
        }
        WINDOW_TASK_ID => {
            params.insert("shape".into(), AttributeValue::str("hann"));
            params.insert(
                "window-length".into(),
                AttributeValue::Int(WINDOW_LEN as i64),
            );
        }
        FILTER_TASK_ID => {
            params.insert("method".into(), AttributeValue::str(spec.method.token()));
            params.insert(
                "window-length".into(),
                AttributeValue::Int(WINDOW_LEN as i64),
            );
            match spec.method {
                FilterMethod::PointwiseDirect => {
                    params.insert("edge-mode".into(), AttributeValue::str("zero-pad"));
                }
                FilterMethod::FftIterative => {
                    params.insert("twiddle-mode".into(), AttributeValue::str("precomputed"));
                }
                FilterMethod::FftRecursive => {
                    params.insert("recursion-base".into(), AttributeValue::Int(1));
                }
            }
        }
        NCC_TASK_ID => {
            params.insert("estimator".into(), AttributeValue::str("energy"));
            params.insert(
                "precision-digits".into(),
                AttributeValue::Int(PrecisionRule::for_length(spec.length).digits as i64),
            );
        }
        _ => {}
    }
    params
}

/// Expected artifact payload sizes, known at design time.
fn artifact_volume(spec: &TrialSpec, id: &str) -> i64 {
    match id {
        CONFIG_ID => config_payload(spec).len() as i64,
        RAW_SIGNAL_ID | NOISY_SIGNAL_ID | FILTERED_FILE_ID => le_volume(spec.length),
        WINDOW_ID => le_volume(WINDOW_LEN),
        NCC_FILE_ID => le_volume(1),
        _ => 0,
    }
}

fn artifact_filenames(id: &str) -> AttributeValue {
    match id {
        FILTERED_FILE_ID => str_list(&["filtered.dat"]),
        NCC_FILE_ID => str_list(&["ncc.dat"]),
        _ => str_list(&[]),
    }
}

/// Build the logical demo graph for a trial.
pub fn build_demo_graph(spec: &TrialSpec) -> WorkflowGraph {
    let mut graph = WorkflowGraph::new(ProvenanceLayer::Lg);
    let slots: Vec<&Slot> = if spec.extended {
        PLAIN_SLOTS.iter().chain(NCC_SLOTS.iter()).collect()
    } else {
        PLAIN_SLOTS.iter().collect()
    };

    for slot in &slots {
        let mut c = Component::new(slot.id, slot.category);
        c.set_attr(ProvenanceLayer::Lgt, "Type", slot.logical_type);
        c.set_attr(ProvenanceLayer::Lgt, "InPorts", str_list(slot.in_ports));
        c.set_attr(ProvenanceLayer::Lgt, "OutPorts", str_list(slot.out_ports));
        match slot.category {
            ComponentCategory::ApplicationTask => {
                c.set_params(ProvenanceLayer::Lg, &task_params(spec, slot.id));
                c.set_attr(ProvenanceLayer::Lg, "Num-CPUs", 1i64);
            }
            ComponentCategory::DataArtifact => {
                c.set_params(
                    ProvenanceLayer::Lg,
                    &BTreeMap::from([(
                        "dtype".to_string(),
                        AttributeValue::str(if slot.id == CONFIG_ID {
                            "json"
                        } else {
                            "f64le"
                        }),
                    )]),
                );
                c.set_attr(
                    ProvenanceLayer::Lg,
                    "Data-Volume",
                    artifact_volume(spec, slot.id),
                );
                c.set_attr(
                    ProvenanceLayer::Lg,
                    "Filenames",
                    artifact_filenames(slot.id),
                );
            }
            ComponentCategory::ControlConstruct => unreachable!("demo has no control constructs"),
        }
        graph.add_component(c).expect("slot ids are unique");
    }
    for pair in slots.windows(2) {
        graph.add_edge(pair[0].id, pair[1].id);
    }
    graph
}

/// Payloads of all artifacts for a completed run, artifact id -> bytes.
fn compute_payloads(spec: &TrialSpec) -> Result<BTreeMap<&'static str, Vec<u8>>, EngineError> {
    let cfg = spec.signal_config();
    let raw = gen_sine(&cfg);
    let noisy = add_noise(&raw, cfg.seed, cfg.noise_stddev);
    let window = hann_window(WINDOW_LEN);
    let coefficients = unit_gain(&window);
    let filtered = match spec.method.fft_kind() {
        None => filter_pointwise(&noisy, &coefficients),
        Some(kind) => filter_fft(&noisy, &coefficients, kind)?,
    };

    let mut payloads: BTreeMap<&'static str, Vec<u8>> = BTreeMap::from([
        (CONFIG_ID, config_payload(spec)),
        (RAW_SIGNAL_ID, f64_bytes(&raw)),
        (NOISY_SIGNAL_ID, f64_bytes(&noisy)),
        (WINDOW_ID, f64_bytes(&window)),
        (FILTERED_FILE_ID, f64_bytes(&filtered)),
    ]);
    if spec.extended {
        let rounded = ncc(&noisy, &filtered, PrecisionRule::for_length(spec.length))?;
        payloads.insert(NCC_FILE_ID, f64_bytes(&[rounded]));
    }
    Ok(payloads)
}

/// Step labels each task logs; part of its runtime trace.
fn trace_steps(spec: &TrialSpec, id: &str) -> Vec<String> {
    let steps: &[&str] = match id {
        SINE_TASK_ID => &["synthesize"],
        NOISE_TASK_ID => &["draw-gaussian", "mix"],
        WINDOW_TASK_ID => &["hann"],
        FILTER_TASK_ID => match spec.method {
            FilterMethod::PointwiseDirect => &["convolve-direct"],
            _ => &["fft-forward", "multiply-spectra", "fft-inverse"],
        },
        NCC_TASK_ID => &["correlate", "round"],
        _ => &[],
    };
    let mut events = vec![format!("start:{id}")];
    events.extend(steps.iter().map(|s| format!("step:{s}")));
    events.push(format!("end:{id}"));
    events
}

static RUN_COUNTER: AtomicU64 = AtomicU64::new(0);

fn fresh_run_id(spec: &TrialSpec) -> String {
    let nanos = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_nanos() as u64)
        .unwrap_or(0);
    let count = RUN_COUNTER.fetch_add(1, Ordering::Relaxed);
    format!("{}-{nanos:016x}-{count:04x}", spec.trial_name())
}

/// The outcome of one trial: the record, its artifact payloads keyed by
/// content digest, and the failed component if one was injected.
#[derive(Debug, Clone)]
pub struct TrialRun {
    pub spec: TrialSpec,
    pub record: ExecutionRecord,
    pub payloads: BTreeMap<String, Vec<u8>>,
    pub failed: Option<String>,
}

impl TrialRun {
    /// Persist the record plus its payloads (content-addressed, in a
    /// `payloads/` directory beside the record file).
    pub fn write(&self, record_path: &Path) -> Result<(), RecordError> {
        record::write_record(&self.record, record_path)?;
        record::write_payloads(record_path, &self.payloads)
    }
}

/// Run one trial: build the logical graph, unroll it (the demo has no
/// control constructs, so this is the identity), partition everything onto
/// the single local node, execute the chain in topological order, and emit
/// the runtime record.
pub fn execute(spec: &TrialSpec) -> Result<TrialRun, EngineError> {
    if spec.length < WINDOW_LEN {
        return Err(EngineError::SignalTooShort(spec.length));
    }
    if spec.method.fft_kind().is_some() && !spec.length.is_power_of_two() {
        return Err(EngineError::Signal(SignalError::NonPowerOfTwoLength(
            spec.length,
        )));
    }

    let logical = build_demo_graph(spec);
    let unrolled = logical.unroll(&BTreeMap::new())?;

    let assignment: BTreeMap<String, (String, String)> = unrolled
        .ids()
        .map(|id| (id.to_string(), ("local".to_string(), "local".to_string())))
        .collect();
    let addresses = BTreeMap::from([("local".to_string(), "127.0.0.1".to_string())]);
    let mut graph = unrolled.partition(&assignment, &addresses)?;

    if let Some(target) = &spec.inject_failure {
        if graph.component(target).is_none() {
            return Err(EngineError::UnknownFailureTarget(target.clone()));
        }
    }
    let skipped: std::collections::BTreeSet<String> = spec
        .inject_failure
        .as_deref()
        .map(|target| graph.descendants(target))
        .unwrap_or_default();

    let run_id = if spec.deterministic_trace {
        "deterministic".to_string()
    } else {
        fresh_run_id(spec)
    };

    let completed_payloads = compute_payloads(spec)?;
    let mut stored_payloads = BTreeMap::new();

    let order: Vec<String> =
        crate::blockdag::topological_order(&graph).expect("demo chain is acyclic");
    for id in &order {
        let failed_here = spec.inject_failure.as_deref() == Some(id.as_str());
        let status = if failed_here {
            "failed"
        } else if skipped.contains(id) {
            "skipped"
        } else {
            "completed"
        };
        let component = graph.component_mut(id).expect("order ids exist");
        component.set_attr(ProvenanceLayer::Rg, "Status", status);
        match component.category {
            ComponentCategory::ApplicationTask => {
                let events = match status {
                    "completed" => trace_steps(spec, id),
                    "failed" => vec![format!("start:{id}"), format!("abort:{id}")],
                    _ => vec![format!("skipped:{id}")],
                };
                let digest = trace_digest(&events, &run_id);
                component.set_attr(ProvenanceLayer::Rg, "Trace", digest);
            }
            ComponentCategory::DataArtifact => {
                let payload: &[u8] = if status == "completed" {
                    completed_payloads
                        .get(id.as_str())
                        .map(Vec::as_slice)
                        .unwrap_or(b"")
                } else {
                    b""
                };
                let summary = summarize(payload);
                component.set_attr(ProvenanceLayer::Rg, "Data-Summary", summary.to_attribute());
                stored_payloads.insert(summary.digest.hex(), payload.to_vec());
            }
            ComponentCategory::ControlConstruct => {}
        }
    }

    let mut record = ExecutionRecord::new(graph.at_layer(ProvenanceLayer::Rg), run_id);
    record.set_meta("engine-version", env!("CARGO_PKG_VERSION"));
    record.set_meta("matrix-version", "builtin-1");
    record.set_meta(
        "created-unix",
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs().to_string())
            .unwrap_or_default(),
    );
    record.validate()?;

    Ok(TrialRun {
        spec: spec.clone(),
        record,
        payloads: stored_payloads,
        failed: spec.inject_failure.clone(),
    })
}

/// One row of a batch table: a trial and its seven tenet signatures.
#[derive(Debug, Clone)]
pub struct BatchRow {
    pub trial: String,
    pub method: FilterMethod,
    pub seed: u64,
    pub signatures: [Signature; 7],
    pub failed: bool,
    pub run: TrialRun,
}

impl BatchRow {
    pub fn signature(&self, tenet: Tenet) -> Signature {
        let idx = Tenet::ALL
            .iter()
            .position(|t| *t == tenet)
            .expect("tenet in ALL");
        self.signatures[idx]
    }
}

/// A completed trial matrix, rows sorted by (method, seed).
#[derive(Debug, Clone)]
pub struct Batch {
    pub rows: Vec<BatchRow>,
}

impl Batch {
    /// Aligned text table with 5-character signature prefixes.
    pub fn table_text(&self) -> String {
        let name_width = self
            .rows
            .iter()
            .map(|r| r.trial.len())
            .chain(["Trial".len()])
            .max()
            .unwrap_or(5);
        let mut out = format!("{:<name_width$}", "Trial");
        for tenet in Tenet::ALL {
            out.push_str(&format!(" {:<5}", tenet.label()));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format!("{:<name_width$}", row.trial));
            for sig in &row.signatures {
                out.push_str(&format!(" {:<5}", sig.short()));
            }
            if row.failed {
                out.push_str(" FAILED");
            }
            out.push('\n');
        }
        out
    }

    /// Machine form carrying the full digests.
    pub fn table_json(&self) -> serde_json::Value {
        let trials: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut signatures = serde_json::Map::new();
                for (tenet, sig) in Tenet::ALL.iter().zip(&row.signatures) {
                    signatures.insert(tenet.name().to_string(), serde_json::json!(sig.hex()));
                }
                serde_json::json!({
                    "trial": row.trial,
                    "method": row.method.token(),
                    "seed": row.seed,
                    "failed": row.failed,
                    "signatures": signatures,
                })
            })
            .collect();
        serde_json::json!({ "trials": trials })
    }
}

/// Execute `methods x seeds 0..trials` and sign every record. Trials are
/// independent; rows come back sorted by (method, seed).
pub fn run_batch(
    methods: &[FilterMethod],
    trials: u64,
    extended: bool,
    matrix: &FieldMatrix,
) -> Result<Batch, EngineError> {
    let mut rows = Vec::with_capacity(methods.len() * trials as usize);
    for method in methods {
        for seed in 0..trials {
            let spec = TrialSpec::new(*method, seed).extended(extended);
            let run = execute(&spec)?;
            let signatures = sign_all(&run.record, matrix)
                .map_err(|e| RecordError::Validation(e.to_string()))?;
            rows.push(BatchRow {
                trial: spec.trial_name(),
                method: *method,
                seed,
                signatures,
                failed: run.failed.is_some(),
                run,
            });
        }
    }
    rows.sort_by(|a, b| (a.method.token(), a.seed).cmp(&(b.method.token(), b.seed)));
    Ok(Batch { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::DataSummary;
    use crate::tenets::{compare, default_matrix, sign};

    #[test]
    fn plain_graph_is_a_nine_component_alternating_chain() {
        let spec = TrialSpec::new(FilterMethod::FftIterative, 0);
        let graph = build_demo_graph(&spec);
        assert_eq!(graph.len(), 9);
        assert_eq!(graph.edge_count(), 8);
        assert!(graph.validate().is_empty(), "{}", graph.validate());
        assert_eq!(graph.sinks(), vec![FILTERED_FILE_ID]);
        let terminal = graph.component(FILTERED_FILE_ID).unwrap();
        assert_eq!(terminal.category, ComponentCategory::DataArtifact);
        assert_eq!(
            terminal.attr(ProvenanceLayer::Lgt, "Type"),
            Some(&AttributeValue::str("file"))
        );
    }

    #[test]
    fn extended_graph_appends_the_correlation_stage() {
        let spec = TrialSpec::new(FilterMethod::FftIterative, 0).extended(true);
        let graph = build_demo_graph(&spec);
        assert_eq!(graph.len(), 11);
        assert!(graph.validate().is_empty());
        assert_eq!(graph.sinks(), vec![NCC_FILE_ID]);
        assert!(graph.component(NCC_TASK_ID).is_some());
    }

    #[test]
    fn seed_only_touches_the_noise_task_field_values() {
        let a = build_demo_graph(&TrialSpec::new(FilterMethod::PointwiseDirect, 0));
        let b = build_demo_graph(&TrialSpec::new(FilterMethod::PointwiseDirect, 1));
        for (ca, cb) in a.components().zip(b.components()) {
            assert_eq!(ca.id, cb.id);
            if ca.id == NOISE_TASK_ID {
                assert_ne!(
                    ca.attr(ProvenanceLayer::Lg, "Field-Values"),
                    cb.attr(ProvenanceLayer::Lg, "Field-Values")
                );
                assert_eq!(
                    ca.attr(ProvenanceLayer::Lg, "Field-Keys"),
                    cb.attr(ProvenanceLayer::Lg, "Field-Keys")
                );
            } else {
                assert_eq!(ca, cb, "unexpected difference at {}", ca.id);
            }
        }
    }

    #[test]
    fn deterministic_trace_makes_recompute_repeatable() {
        let mut spec = TrialSpec::new(FilterMethod::FftIterative, 0);
        spec.deterministic_trace = true;
        let matrix = default_matrix();
        let a = execute(&spec).unwrap();
        let b = execute(&spec).unwrap();
        assert_eq!(
            sign(&a.record, Tenet::Recompute, matrix).unwrap(),
            sign(&b.record, Tenet::Recompute, matrix).unwrap()
        );
    }

    #[test]
    fn normal_runs_differ_in_recompute_but_repeat() {
        let spec = TrialSpec::new(FilterMethod::FftRecursive, 2);
        let matrix = default_matrix();
        let a = execute(&spec).unwrap();
        let b = execute(&spec).unwrap();
        assert_ne!(
            sign(&a.record, Tenet::Recompute, matrix).unwrap(),
            sign(&b.record, Tenet::Recompute, matrix).unwrap()
        );
        assert_eq!(
            sign(&a.record, Tenet::Repeat, matrix).unwrap(),
            sign(&b.record, Tenet::Repeat, matrix).unwrap()
        );
    }

    #[test]
    fn plain_reproduce_signatures_separate_seeds() {
        let matrix = default_matrix();
        let a = execute(&TrialSpec::new(FilterMethod::FftIterative, 0)).unwrap();
        let b = execute(&TrialSpec::new(FilterMethod::FftIterative, 1)).unwrap();
        assert_ne!(
            sign(&a.record, Tenet::Reproduce, matrix).unwrap(),
            sign(&b.record, Tenet::Reproduce, matrix).unwrap()
        );
    }

    #[test]
    fn first_divergence_between_seeds_is_the_noise_task() {
        // Pin the traces; otherwise differing run ids surface at the first
        // task and mask the seed difference.
        let matrix = default_matrix();
        let mut spec_a = TrialSpec::new(FilterMethod::FftIterative, 0);
        spec_a.deterministic_trace = true;
        let mut spec_b = TrialSpec::new(FilterMethod::FftIterative, 1);
        spec_b.deterministic_trace = true;
        let a = execute(&spec_a).unwrap();
        let b = execute(&spec_b).unwrap();
        let report = compare(&a.record, &b.record, Tenet::Recompute, matrix).unwrap();
        assert!(!report.matched);
        assert_eq!(report.first_divergence.as_deref(), Some(NOISE_TASK_ID));
        assert!(report
            .divergent_leaves
            .iter()
            .any(|d| d.key == "LG/Field-Values"));
    }

    #[test]
    fn window_summary_is_method_and_seed_invariant() {
        let mut window_summaries = std::collections::BTreeSet::new();
        let mut noisy_by_seed: BTreeMap<u64, std::collections::BTreeSet<Signature>> =
            BTreeMap::new();
        for method in FilterMethod::ALL {
            for seed in [0u64, 1] {
                let run = execute(&TrialSpec::new(method, seed)).unwrap();
                let graph = run.record.graph();
                let window = graph.component(WINDOW_ID).unwrap();
                let summary = DataSummary::from_attribute(
                    window.attr(ProvenanceLayer::Rg, "Data-Summary").unwrap(),
                )
                .unwrap();
                window_summaries.insert(summary.digest);
                let noisy = graph.component(NOISY_SIGNAL_ID).unwrap();
                let noisy_summary = DataSummary::from_attribute(
                    noisy.attr(ProvenanceLayer::Rg, "Data-Summary").unwrap(),
                )
                .unwrap();
                noisy_by_seed
                    .entry(seed)
                    .or_default()
                    .insert(noisy_summary.digest);
            }
        }
        assert_eq!(window_summaries.len(), 1);
        for (seed, summaries) in noisy_by_seed {
            assert_eq!(
                summaries.len(),
                1,
                "seed {seed} noisy summary varies by method"
            );
        }
    }

    #[test]
    fn rerun_signature_is_shared_across_methods() {
        let matrix = default_matrix();
        let mut reruns = std::collections::BTreeSet::new();
        for method in FilterMethod::ALL {
            let run = execute(&TrialSpec::new(method, 3)).unwrap();
            reruns.insert(sign(&run.record, Tenet::Rerun, matrix).unwrap());
        }
        assert_eq!(reruns.len(), 1);
    }

    #[test]
    fn repeat_signature_separates_methods() {
        let matrix = default_matrix();
        let mut repeats = std::collections::BTreeSet::new();
        for method in FilterMethod::ALL {
            for seed in [0u64, 5] {
                let run = execute(&TrialSpec::new(method, seed)).unwrap();
                repeats.insert(sign(&run.record, Tenet::Repeat, matrix).unwrap());
            }
        }
        // Two seeds per method collapse to one repeat signature per method.
        assert_eq!(repeats.len(), FilterMethod::ALL.len());
    }

    #[test]
    fn injected_failure_marks_downstream_skipped_but_emits_a_record() {
        let mut spec = TrialSpec::new(FilterMethod::PointwiseDirect, 0).extended(true);
        spec.inject_failure = Some(FILTER_TASK_ID.to_string());
        let run = execute(&spec).unwrap();
        assert_eq!(run.failed.as_deref(), Some(FILTER_TASK_ID));
        let graph = run.record.graph();
        let status = |id: &str| {
            graph
                .component(id)
                .unwrap()
                .attr(ProvenanceLayer::Rg, "Status")
                .cloned()
                .unwrap()
        };
        assert_eq!(status(FILTER_TASK_ID), AttributeValue::str("failed"));
        assert_eq!(status(FILTERED_FILE_ID), AttributeValue::str("skipped"));
        assert_eq!(status(NCC_FILE_ID), AttributeValue::str("skipped"));
        assert_eq!(status(NOISE_TASK_ID), AttributeValue::str("completed"));
        // Failed records stay signable and comparable.
        sign_all(&run.record, default_matrix()).unwrap();
    }

    #[test]
    fn fft_methods_reject_non_power_of_two_lengths() {
        let mut spec = TrialSpec::new(FilterMethod::FftIterative, 0);
        spec.length = 100;
        match execute(&spec) {
            Err(EngineError::Signal(SignalError::NonPowerOfTwoLength(100))) => {}
            other => panic!("expected NonPowerOfTwoLength, got {other:?}"),
        }
        // The pointwise path accepts arbitrary lengths.
        let mut spec = TrialSpec::new(FilterMethod::PointwiseDirect, 0);
        spec.length = 100;
        execute(&spec).unwrap();
    }

    #[test]
    fn batch_has_methods_times_trials_rows() {
        let batch = run_batch(&FilterMethod::ALL, 2, true, default_matrix()).unwrap();
        assert_eq!(batch.rows.len(), 6);
        let text = batch.table_text();
        assert!(text.contains("RPL-T"));
        let json = batch.table_json();
        assert_eq!(json["trials"].as_array().unwrap().len(), 6);
        // Full digests in machine output, truncations in text.
        let first = &json["trials"][0]["signatures"]["rerun"];
        assert_eq!(first.as_str().unwrap().len(), 64);
    }

    #[test]
    fn record_files_round_trip_through_disk() {
        let dir = tempfile::tempdir().unwrap();
        let run = execute(&TrialSpec::new(FilterMethod::FftIterative, 1).extended(true)).unwrap();
        let path = dir.path().join("trial.json");
        run.write(&path).unwrap();
        let reread = crate::record::read_record(&path).unwrap();
        assert_eq!(
            sign_all(&run.record, default_matrix()).unwrap(),
            sign_all(&reread, default_matrix()).unwrap()
        );
        // Payloads landed content-addressed next to the record.
        let dir_entries = std::fs::read_dir(crate::record::payload_dir(&path))
            .unwrap()
            .count();
        assert!(dir_entries >= 5);
    }
}
