//! Domain types for the decision tree and read-only queries over them.
//!
//! A [`DecisionTree`] is plain data. Trees read from disk go through
//! [`crate::format::parse_tree`], which guarantees the structural invariants
//! the engine relies on. Trees built in memory (draft variants, lint fixtures)
//! are not validated on construction; [`crate::lint`] reports on them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Category id whose patterns never apply to a monolithic system.
pub const DISCOVERY_AND_COMMUNICATION: &str = "discovery-and-communication";

/// The foundational architectural style chosen before the questionnaire starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArchStyle {
    Monolithic,
    ClientServer,
    Microservices,
}

impl ArchStyle {
    pub const ALL: [ArchStyle; 3] = [
        ArchStyle::Monolithic,
        ArchStyle::ClientServer,
        ArchStyle::Microservices,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ArchStyle::Monolithic => "monolithic",
            ArchStyle::ClientServer => "client-server",
            ArchStyle::Microservices => "microservices",
        }
    }
}

impl fmt::Display for ArchStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown architectural style `{0}` (expected monolithic, client-server or microservices)")]
pub struct UnknownStyle(pub String);

impl FromStr for ArchStyle {
    type Err = UnknownStyle;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ArchStyle::ALL
            .into_iter()
            .find(|style| style.as_str() == s)
            .ok_or_else(|| UnknownStyle(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Meta {
    pub name: String,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Category {
    pub id: String,
    pub name: String,
    pub description: String,
}

/// Where a pattern entry comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PatternSource {
    Paper,
    Survey,
    Authored,
}

impl PatternSource {
    pub fn as_str(self) -> &'static str {
        match self {
            PatternSource::Paper => "paper",
            PatternSource::Survey => "survey",
            PatternSource::Authored => "authored",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "paper" => Some(PatternSource::Paper),
            "survey" => Some(PatternSource::Survey),
            "authored" => Some(PatternSource::Authored),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub id: String,
    pub name: String,
    pub category: String,
    pub description: String,
    pub source: PatternSource,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestionKind {
    /// Checks for a positive reason to adopt the flow's patterns.
    Indication,
    /// Checks for a reason not to adopt them; a "yes" vetoes the flow.
    Contraindication,
}

impl QuestionKind {
    pub fn as_str(self) -> &'static str {
        match self {
            QuestionKind::Indication => "indication",
            QuestionKind::Contraindication => "contraindication",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Question {
    pub text: String,
    pub kind: QuestionKind,
}

impl Question {
    pub fn indication(text: impl Into<String>) -> Self {
        Question {
            text: text.into(),
            kind: QuestionKind::Indication,
        }
    }

    pub fn contraindication(text: impl Into<String>) -> Self {
        Question {
            text: text.into(),
            kind: QuestionKind::Contraindication,
        }
    }
}

/// A short series of questions deciding whether one pattern, or a small
/// group of patterns used together, enters the result set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuestionFlow {
    pub id: String,
    pub patterns: Vec<String>,
    pub questions: Vec<Question>,
}

impl QuestionFlow {
    pub fn indication_count(&self) -> usize {
        self.questions
            .iter()
            .filter(|q| q.kind == QuestionKind::Indication)
            .count()
    }

    /// True when the flow is one or more indications followed by exactly one
    /// trailing contraindication.
    pub fn is_well_ordered(&self) -> bool {
        match self.questions.split_last() {
            Some((last, init)) => {
                last.kind == QuestionKind::Contraindication
                    && !init.is_empty()
                    && init.iter().all(|q| q.kind == QuestionKind::Indication)
            }
            None => false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathSection {
    pub category: String,
    pub flows: Vec<QuestionFlow>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Path {
    pub style: ArchStyle,
    pub sections: Vec<PathSection>,
}

impl Path {
    pub fn flows(&self) -> impl Iterator<Item = &QuestionFlow> {
        self.sections.iter().flat_map(|s| s.flows.iter())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecisionTree {
    pub meta: Meta,
    pub categories: Vec<Category>,
    pub patterns: Vec<Pattern>,
    pub paths: Vec<Path>,
}

impl DecisionTree {
    pub fn path(&self, style: ArchStyle) -> Option<&Path> {
        self.paths.iter().find(|p| p.style == style)
    }

    pub fn pattern(&self, id: &str) -> Option<&Pattern> {
        self.patterns.iter().find(|p| p.id == id)
    }

    pub fn category(&self, id: &str) -> Option<&Category> {
        self.categories.iter().find(|c| c.id == id)
    }

    /// Flows of the style's path, in path order.
    pub fn flows_for(&self, style: ArchStyle) -> Vec<&QuestionFlow> {
        self.path(style)
            .map(|p| p.flows().collect())
            .unwrap_or_default()
    }

    /// Patterns keyed by category id. Every declared category has an entry,
    /// empty when no pattern belongs to it; lists keep declaration order.
    pub fn patterns_by_category(&self) -> BTreeMap<&str, Vec<&Pattern>> {
        let mut map: BTreeMap<&str, Vec<&Pattern>> = self
            .categories
            .iter()
            .map(|c| (c.id.as_str(), Vec::new()))
            .collect();
        for pattern in &self.patterns {
            map.entry(pattern.category.as_str())
                .or_default()
                .push(pattern);
        }
        map
    }

    pub fn question_count(&self, style: ArchStyle) -> usize {
        self.flows_for(style)
            .iter()
            .map(|f| f.questions.len())
            .sum()
    }
}

/// Lowercase kebab-case id derived from a display name.
pub fn slugify(name: &str) -> String {
    let mut out = String::with_capacity(name.len());
    for ch in name.chars() {
        if ch.is_ascii_alphanumeric() {
            out.push(ch.to_ascii_lowercase());
        } else if !out.is_empty() && !out.ends_with('-') {
            out.push('-');
        }
    }
    while out.ends_with('-') {
        out.pop();
    }
    out
}
