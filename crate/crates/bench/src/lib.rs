//! Benchmark fixtures: synthetic records sized for scaling measurements.

use std::collections::BTreeMap;

use tenetdag::model::{AttributeValue, Component, ProvenanceLayer, WorkflowGraph};
use tenetdag::record::{summarize, ExecutionRecord};
use tenetdag::signal::SplitMix64;

/// A fully populated alternating chain record with `n` components.
pub fn chain_record(n: usize) -> ExecutionRecord {
    let mut rng = SplitMix64::new(n as u64);
    let mut graph = WorkflowGraph::new(ProvenanceLayer::Rg);
    let mut prev: Option<String> = None;
    for i in 0..n {
        let id = format!("c{i:06}");
        let is_task = i % 2 == 0;
        let mut c = if is_task {
            Component::task(&id)
        } else {
            Component::data(&id)
        };
        c.set_attr(
            ProvenanceLayer::Lgt,
            "Type",
            if is_task { "proc" } else { "memory" },
        );
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
        c.set_params(
            ProvenanceLayer::Lg,
            &BTreeMap::from([("alpha".to_string(), AttributeValue::Int(i as i64))]),
        );
        if is_task {
            c.set_attr(ProvenanceLayer::Lg, "Num-CPUs", 1i64);
            c.set_attr(ProvenanceLayer::Pgs, "Name", id.clone());
            c.set_attr(
                ProvenanceLayer::Rg,
                "Trace",
                format!("{:016x}", rng.next_u64()),
            );
        } else {
            c.set_attr(ProvenanceLayer::Lg, "Data-Volume", 64i64);
            c.set_attr(
                ProvenanceLayer::Lg,
                "Filenames",
                AttributeValue::str_list::<[&str; 0], &str>([]),
            );
            c.set_attr(ProvenanceLayer::Pgs, "Storage-Type", "memory");
            c.set_attr(
                ProvenanceLayer::Rg,
                "Data-Summary",
                summarize(&rng.next_u64().to_le_bytes()).to_attribute(),
            );
        }
        c.set_attr(
            ProvenanceLayer::Pgs,
            "Type",
            if is_task { "proc" } else { "memory" },
        );
        c.set_attr(ProvenanceLayer::Pgs, "Rank", 0i64);
        c.set_attr(ProvenanceLayer::Pgt, "Node", "n0");
        c.set_attr(ProvenanceLayer::Pgt, "Island", "i0");
        c.set_attr(ProvenanceLayer::Pg, "Node-IP-Address", "10.0.0.1");
        c.set_attr(ProvenanceLayer::Pg, "Island-IP-Address", "10.0.0.254");
        c.set_attr(ProvenanceLayer::Rg, "Status", "completed");
        graph.add_component(c).expect("chain ids are unique");
        if let Some(prev) = prev {
            graph.add_edge(prev, id.clone());
        }
        prev = Some(id);
    }
    ExecutionRecord::new(graph, "bench-chain")
}
