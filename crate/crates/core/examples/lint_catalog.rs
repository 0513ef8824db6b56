//! Parses and lints a tree document.
//!
//!     cargo run --example lint_catalog                  # shipped catalog
//!     cargo run --example lint_catalog -- my-tree.json
//!
//! With no argument the shipped catalog is checked, then a copy with a few
//! deliberate mistakes, to show what findings look like.

use capi::catalog::DEFAULT_CATALOG;
use capi::format::parse_document;
use capi::{lint_tree, LintConfig};

fn report(label: &str, text: &str) {
    println!("== {label}");
    let parsed = parse_document(text);
    for d in &parsed.diagnostics {
        println!("{d}");
    }
    match parsed.tree {
        Some(tree) => {
            let findings = lint_tree(&tree, &LintConfig::default());
            for f in &findings {
                println!("{f}");
            }
            if parsed.diagnostics.is_empty() && findings.is_empty() {
                println!("clean");
            }
        }
        None => println!("(not linted: the document does not parse)"),
    }
    println!();
}

fn main() {
    if let Some(path) = std::env::args().nth(1) {
        let text = std::fs::read_to_string(&path).expect("readable file");
        report(&path, &text);
        return;
    }
    report("shipped catalog", DEFAULT_CATALOG);

    let mut doc: serde_json::Value = serde_json::from_str(DEFAULT_CATALOG).unwrap();
    let flows = &mut doc["paths"][2]["sections"][0]["flows"];
    flows[0]["questions"].as_array_mut().unwrap().reverse();
    flows[1]["patterns"][0] = "no-such-pattern".into();
    report("broken references and order", &doc.to_string());

    let mut doc: serde_json::Value = serde_json::from_str(DEFAULT_CATALOG).unwrap();
    let questions = doc["paths"][2]["sections"][0]["flows"][0]["questions"]
        .as_array_mut()
        .unwrap();
    let extra = questions[0].clone();
    questions.insert(0, extra.clone());
    questions.insert(0, extra);
    doc["patterns"]
        .as_array_mut()
        .unwrap()
        .push(serde_json::json!({
            "id": "unused-pattern",
            "name": "Unused Pattern",
            "category": "monitoring",
            "description": "Declared but never asked about.",
            "source": "authored",
        }));
    report("lint-only problems", &doc.to_string());
}
