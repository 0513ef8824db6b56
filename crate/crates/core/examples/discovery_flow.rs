//! Walks every answer combination through the shipped catalog's
//! service-discovery flow and shows which ones select its patterns.
//!
//!     cargo run --example discovery_flow

use std::sync::Arc;

use capi::catalog::load_default_catalog;
use capi::model::{DecisionTree, Path, PathSection};
use capi::{run_batch, Answer, ArchStyle};

fn main() {
    let catalog = load_default_catalog().expect("shipped catalog loads");
    let flow = catalog
        .flows_for(ArchStyle::Microservices)
        .into_iter()
        .find(|f| f.patterns.iter().any(|p| p == "service-discovery"))
        .expect("catalog has a discovery flow")
        .clone();

    // A tree holding only this flow, so each run ends after its questions.
    let section = catalog
        .path(ArchStyle::Microservices)
        .unwrap()
        .sections
        .iter()
        .find(|s| s.flows.iter().any(|f| f.id == flow.id))
        .unwrap();
    let tree = Arc::new(DecisionTree {
        paths: ArchStyle::ALL
            .iter()
            .map(|&style| Path {
                style,
                sections: if style == ArchStyle::Microservices {
                    vec![PathSection {
                        category: section.category.clone(),
                        flows: vec![flow.clone()],
                    }]
                } else {
                    Vec::new()
                },
            })
            .collect(),
        ..catalog.clone()
    });

    for (i, q) in flow.questions.iter().enumerate() {
        println!("Q{} ({}): {}", i + 1, q.kind.as_str(), q.text);
    }
    println!();

    let n = flow.questions.len();
    for bits in 0..(1u32 << n) {
        let vector: Vec<Answer> = (0..n)
            .map(|i| {
                if bits >> (n - 1 - i) & 1 == 1 {
                    Answer::Yes
                } else {
                    Answer::No
                }
            })
            .collect();
        // Skipped questions consume no answers, so replay only the prefix the
        // engine actually asks for.
        let mut session = capi::start_session(tree.clone(), ArchStyle::Microservices);
        let mut asked = Vec::new();
        for &a in &vector {
            if session.is_complete() {
                break;
            }
            session.answer(a).unwrap();
            asked.push(a);
        }
        let result = run_batch(tree.clone(), ArchStyle::Microservices, &asked).unwrap();
        let shown: Vec<&str> = vector.iter().map(|a| a.as_str()).collect();
        let names = result.pattern_names();
        println!(
            "{:<14} -> {}",
            shown.join(","),
            if names.is_empty() {
                "-".to_owned()
            } else {
                names.join(", ")
            }
        );
    }
}
