//! Builds a tree in code, writes it in canonical form and reads it back.
//!
//!     cargo run --example tree_roundtrip

use capi::model::{
    Category, Meta, Path, PathSection, Pattern, PatternSource, Question, QuestionFlow,
};
use capi::{parse_tree, serialize_tree, ArchStyle, DecisionTree};

fn main() {
    let tree = DecisionTree {
        meta: Meta {
            name: "caching-demo".into(),
            version: "0.1.0".into(),
        },
        categories: vec![Category {
            id: "development".into(),
            name: "Development".into(),
            description: "How the code is built.".into(),
        }],
        patterns: vec![Pattern {
            id: "read-through-cache".into(),
            name: "Read-Through Cache".into(),
            category: "development".into(),
            description: "Reads go through a cache that loads missing entries.".into(),
            source: PatternSource::Authored,
        }],
        paths: ArchStyle::ALL
            .iter()
            .map(|&style| Path {
                style,
                sections: vec![PathSection {
                    category: "development".into(),
                    flows: vec![QuestionFlow {
                        id: format!("{style}-cache"),
                        patterns: vec!["read-through-cache".into()],
                        questions: vec![
                            Question::indication(
                                "Are the same records read far more often than written?",
                            ),
                            Question::contraindication("Must every read see the latest write?"),
                        ],
                    }],
                }],
            })
            .collect(),
    };

    let text = serialize_tree(&tree);
    print!("{text}");
    let back = parse_tree(&text).expect("canonical output parses");
    assert_eq!(back, tree);
    assert_eq!(serialize_tree(&back), text);
    println!("\nround trip ok ({} bytes)", text.len());
}
