use std::fmt::Write;

use crate::model::{ArchStyle, DecisionTree, QuestionKind};

/// Graphviz rendering of one style's path.
///
/// Every question is a node. Indication "yes" leads to the next question of
/// the flow; indication "no" and contraindication "yes" leave the flow; a
/// contraindication "no" leads to the flow's emit node, which lists the
/// patterns the flow adds.
pub fn export_dot(tree: &DecisionTree, style: ArchStyle) -> String {
    let flows = tree.flows_for(style);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "digraph \"{}\" {{",
        escape(&format!("{} ({style})", tree.meta.name))
    );
    out.push_str("  rankdir=TB;\n");
    out.push_str("  node [shape=box];\n");
    out.push_str("  start [shape=circle, label=\"start\"];\n");
    out.push_str("  end [shape=doublecircle, label=\"end\"];\n");

    let entry = |f: usize| -> String {
        if f < flows.len() {
            format!("f{f}q0")
        } else {
            "end".to_owned()
        }
    };

    for (f, flow) in flows.iter().enumerate() {
        for (q, question) in flow.questions.iter().enumerate() {
            let _ = writeln!(out, "  f{f}q{q} [label=\"{}\"];", escape(&question.text));
        }
        let names: Vec<&str> = flow
            .patterns
            .iter()
            .map(|id| tree.pattern(id).map_or(id.as_str(), |p| p.name.as_str()))
            .collect();
        let _ = writeln!(
            out,
            "  f{f}emit [shape=note, label=\"{}\"];",
            escape(&names.join(", "))
        );
    }

    let _ = writeln!(out, "  start -> {};", entry(0));
    for (f, flow) in flows.iter().enumerate() {
        let next_flow = entry(f + 1);
        let last = flow.questions.len().saturating_sub(1);
        for (q, question) in flow.questions.iter().enumerate() {
            let node = format!("f{f}q{q}");
            let (yes, no) = match question.kind {
                QuestionKind::Indication if q < last => {
                    (format!("f{f}q{}", q + 1), next_flow.clone())
                }
                QuestionKind::Indication => (format!("f{f}emit"), next_flow.clone()),
                QuestionKind::Contraindication => (next_flow.clone(), format!("f{f}emit")),
            };
            let _ = writeln!(out, "  {node} -> {yes} [label=\"yes\"];");
            let _ = writeln!(out, "  {node} -> {no} [label=\"no\"];");
        }
        let _ = writeln!(out, "  f{f}emit -> {next_flow};");
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}
