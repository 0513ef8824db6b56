//! JSON tree documents: strict parsing with located diagnostics, canonical
//! serialization, and Graphviz export.

mod dot;
mod parse;

pub use dot::export_dot;
pub use parse::{parse_document, parse_tree, ParseReport};

use std::fmt;

use serde::Serialize;

use crate::location::DocPath;
use crate::model::DecisionTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// Diagnostic codes emitted by the parser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DiagnosticCode {
    /// Not well-formed JSON.
    Syntax,
    /// Missing, extra, mistyped or empty fields.
    Schema,
    /// Dangling category or pattern reference.
    Ref,
    /// A flow whose contraindication is absent or not last.
    FlowOrder,
    /// Missing or duplicated path for a style, or a section not allowed on a style.
    Style,
    /// Duplicate id, duplicate section, or a pattern asked twice on one path.
    Duplicate,
    /// Id that is not lowercase kebab-case.
    IdFormat,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::Syntax => "E_SYNTAX",
            DiagnosticCode::Schema => "E_SCHEMA",
            DiagnosticCode::Ref => "E_REF",
            DiagnosticCode::FlowOrder => "E_FLOW_ORDER",
            DiagnosticCode::Style => "E_STYLE",
            DiagnosticCode::Duplicate => "E_DUPLICATE",
            DiagnosticCode::IdFormat => "W_ID_FORMAT",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: DiagnosticCode,
    pub message: String,
    pub location: DocPath,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}: {}",
            self.severity, self.code, self.location, self.message
        )
    }
}

/// A document that did not produce a tree. Holds at least one error.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub diagnostics: Vec<Diagnostic>,
}

impl ParseError {
    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Error)
    }

    pub fn has_code(&self, code: DiagnosticCode) -> bool {
        self.errors().any(|d| d.code == code)
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut errors = self.errors();
        match errors.next() {
            Some(first) => {
                write!(f, "invalid tree document: {first}")?;
                let rest = errors.count();
                if rest > 0 {
                    write!(f, " (and {rest} more)")?;
                }
                Ok(())
            }
            None => f.write_str("invalid tree document"),
        }
    }
}

// Canonical document shape. Fields are declared in alphabetical order so the
// derived serializer emits sorted keys.

#[derive(Serialize)]
struct TreeDoc<'a> {
    categories: Vec<CategoryDoc<'a>>,
    meta: MetaDoc<'a>,
    paths: Vec<PathDoc<'a>>,
    patterns: Vec<PatternDoc<'a>>,
}

#[derive(Serialize)]
struct MetaDoc<'a> {
    name: &'a str,
    version: &'a str,
}

#[derive(Serialize)]
struct CategoryDoc<'a> {
    description: &'a str,
    id: &'a str,
    name: &'a str,
}

#[derive(Serialize)]
struct PatternDoc<'a> {
    category: &'a str,
    description: &'a str,
    id: &'a str,
    name: &'a str,
    source: &'a str,
}

#[derive(Serialize)]
struct PathDoc<'a> {
    sections: Vec<SectionDoc<'a>>,
    style: &'a str,
}

#[derive(Serialize)]
struct SectionDoc<'a> {
    category: &'a str,
    flows: Vec<FlowDoc<'a>>,
}

#[derive(Serialize)]
struct FlowDoc<'a> {
    id: &'a str,
    patterns: &'a [String],
    questions: Vec<QuestionDoc<'a>>,
}

#[derive(Serialize)]
struct QuestionDoc<'a> {
    kind: &'a str,
    text: &'a str,
}

/// Canonical document text: sorted keys, two-space indentation, lists in
/// authored order, trailing newline.
pub fn serialize_tree(tree: &DecisionTree) -> String {
    let doc = TreeDoc {
        categories: tree
            .categories
            .iter()
            .map(|c| CategoryDoc {
                description: &c.description,
                id: &c.id,
                name: &c.name,
            })
            .collect(),
        meta: MetaDoc {
            name: &tree.meta.name,
            version: &tree.meta.version,
        },
        paths: tree
            .paths
            .iter()
            .map(|p| PathDoc {
                sections: p
                    .sections
                    .iter()
                    .map(|s| SectionDoc {
                        category: &s.category,
                        flows: s
                            .flows
                            .iter()
                            .map(|f| FlowDoc {
                                id: &f.id,
                                patterns: &f.patterns,
                                questions: f
                                    .questions
                                    .iter()
                                    .map(|q| QuestionDoc {
                                        kind: q.kind.as_str(),
                                        text: &q.text,
                                    })
                                    .collect(),
                            })
                            .collect(),
                    })
                    .collect(),
                style: p.style.as_str(),
            })
            .collect(),
        patterns: tree
            .patterns
            .iter()
            .map(|p| PatternDoc {
                category: &p.category,
                description: &p.description,
                id: &p.id,
                name: &p.name,
                source: p.source.as_str(),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("tree documents always serialize");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{discovery_tree, empty_tree};

    #[test]
    fn empty_tree_serializes_to_minimal_document() {
        let text = serialize_tree(&empty_tree());
        assert!(text.starts_with("{\n  \"categories\": [\n"));
        assert!(text.contains("\"sections\": []"));
        assert!(text.ends_with("}\n"));
        assert_eq!(parse_tree(&text).unwrap(), empty_tree());
    }

    #[test]
    fn discovery_flow_serializes_three_questions() {
        let text = serialize_tree(&discovery_tree());
        let value: serde_json::Value = serde_json::from_str(&text).unwrap();
        let questions = &value["paths"][2]["sections"][0]["flows"][0]["questions"];
        assert_eq!(questions.as_array().unwrap().len(), 3);
        assert_eq!(text.matches("\"kind\":").count(), 3);
    }

    #[test]
    fn serialization_is_canonical() {
        let text = serialize_tree(&discovery_tree());
        let again = serialize_tree(&parse_tree(&text).unwrap());
        assert_eq!(text, again);
    }

    #[test]
    fn diagnostic_display() {
        let d = Diagnostic {
            severity: Severity::Error,
            code: DiagnosticCode::FlowOrder,
            message: "contraindication must be last".into(),
            location: DocPath::flow(2, 0, 1).key("questions"),
        };
        assert_eq!(
            d.to_string(),
            "error E_FLOW_ORDER /paths/2/sections/0/flows/1/questions: contraindication must be last"
        );
    }
}
