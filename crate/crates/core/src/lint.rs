//! Authoring rules for decision trees.
//!
//! | rule | default severity | checks |
//! |------|------------------|--------|
//! | R1 | error | flow question count within the configured bounds (2..=3) |
//! | R2 | error | one contraindication, present and last |
//! | R3 | warning | every declared pattern is asked for on some path |
//! | R4 | error | a pattern is asked for at most once per path |
//! | R5 | error | monolithic path has no discovery-and-communication section |
//! | R6 | error | expected number of categories (6) and paths (3) |
//! | R7 | warning | pattern count equals the target (47) |
//! | R8 | warning | no question text repeated within a path |

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use crate::format::Severity;
use crate::location::DocPath;
use crate::model::{ArchStyle, DecisionTree, QuestionKind, DISCOVERY_AND_COMMUNICATION};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    R1,
    R2,
    R3,
    R4,
    R5,
    R6,
    R7,
    R8,
}

impl Rule {
    pub const ALL: [Rule; 8] = [
        Rule::R1,
        Rule::R2,
        Rule::R3,
        Rule::R4,
        Rule::R5,
        Rule::R6,
        Rule::R7,
        Rule::R8,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::R1 => "R1",
            Rule::R2 => "R2",
            Rule::R3 => "R3",
            Rule::R4 => "R4",
            Rule::R5 => "R5",
            Rule::R6 => "R6",
            Rule::R7 => "R7",
            Rule::R8 => "R8",
        }
    }

    pub fn severity(self) -> Severity {
        match self {
            Rule::R3 | Rule::R7 | Rule::R8 => Severity::Warning,
            _ => Severity::Error,
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown lint rule `{0}`")]
pub struct UnknownRule(pub String);

impl FromStr for Rule {
    type Err = UnknownRule;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Rule::ALL
            .into_iter()
            .find(|r| r.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| UnknownRule(s.to_owned()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Finding {
    pub rule: Rule,
    pub severity: Severity,
    pub location: DocPath,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}: {}",
            self.severity, self.rule, self.location, self.message
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LintConfig {
    pub disabled: BTreeSet<Rule>,
    pub min_questions: usize,
    pub max_questions: usize,
    pub target_patterns: usize,
    pub expected_categories: usize,
    pub expected_paths: usize,
    /// Categories that must not have a section on the monolithic path.
    pub monolithic_excluded: Vec<String>,
}

impl Default for LintConfig {
    fn default() -> Self {
        LintConfig {
            disabled: BTreeSet::new(),
            min_questions: 2,
            max_questions: 3,
            target_patterns: 47,
            expected_categories: 6,
            expected_paths: 3,
            monolithic_excluded: vec![DISCOVERY_AND_COMMUNICATION.to_owned()],
        }
    }
}

impl LintConfig {
    pub fn without(mut self, rule: Rule) -> Self {
        self.disabled.insert(rule);
        self
    }

    fn enabled(&self, rule: Rule) -> bool {
        !self.disabled.contains(&rule)
    }
}

pub fn has_errors(findings: &[Finding]) -> bool {
    findings.iter().any(|f| f.severity == Severity::Error)
}

/// Findings sorted by (location, rule). An empty list means the tree passes.
pub fn lint_tree(tree: &DecisionTree, config: &LintConfig) -> Vec<Finding> {
    let mut findings = Vec::new();
    let mut report = |rule: Rule, location: DocPath, message: String| {
        if config.enabled(rule) {
            findings.push(Finding {
                rule,
                severity: rule.severity(),
                location,
                message,
            });
        }
    };

    let root = DocPath::root();
    if tree.categories.len() != config.expected_categories {
        report(
            Rule::R6,
            root.key("categories"),
            format!(
                "expected {} categories, found {}",
                config.expected_categories,
                tree.categories.len()
            ),
        );
    }
    if tree.paths.len() != config.expected_paths {
        report(
            Rule::R6,
            root.key("paths"),
            format!(
                "expected {} paths, found {}",
                config.expected_paths,
                tree.paths.len()
            ),
        );
    }
    if tree.patterns.len() != config.target_patterns {
        report(
            Rule::R7,
            root.key("patterns"),
            format!(
                "expected {} patterns, found {}",
                config.target_patterns,
                tree.patterns.len()
            ),
        );
    }

    let mut reachable: HashSet<&str> = HashSet::new();
    for (i, path) in tree.paths.iter().enumerate() {
        let mut asked: HashMap<&str, DocPath> = HashMap::new();
        let mut texts: HashMap<&str, DocPath> = HashMap::new();
        for (j, section) in path.sections.iter().enumerate() {
            if path.style == ArchStyle::Monolithic
                && config.monolithic_excluded.contains(&section.category)
            {
                report(
                    Rule::R5,
                    DocPath::section(i, j),
                    format!(
                        "category `{}` does not apply to the monolithic path",
                        section.category
                    ),
                );
            }
            for (k, flow) in section.flows.iter().enumerate() {
                let flow_loc = DocPath::flow(i, j, k);
                let n = flow.questions.len();
                if n < config.min_questions || n > config.max_questions {
                    report(
                        Rule::R1,
                        flow_loc.clone(),
                        format!(
                            "flow `{}` has {n} questions; expected {} to {}",
                            flow.id, config.min_questions, config.max_questions
                        ),
                    );
                }
                if !flow.is_well_ordered() {
                    let contra = flow
                        .questions
                        .iter()
                        .filter(|q| q.kind == QuestionKind::Contraindication)
                        .count();
                    let message = if contra == 0 {
                        format!("flow `{}` has no contraindication question", flow.id)
                    } else {
                        format!(
                            "flow `{}` must end with its single contraindication after at least one indication",
                            flow.id
                        )
                    };
                    report(Rule::R2, flow_loc.key("questions"), message);
                }
                for (m, pattern) in flow.patterns.iter().enumerate() {
                    reachable.insert(pattern.as_str());
                    let loc = flow_loc.key("patterns").index(m);
                    if let Some(first) = asked.get(pattern.as_str()) {
                        report(
                            Rule::R4,
                            loc,
                            format!("pattern `{pattern}` already asked for at {first}"),
                        );
                    } else {
                        asked.insert(pattern, loc);
                    }
                }
                for (q, question) in flow.questions.iter().enumerate() {
                    let loc = flow_loc.key("questions").index(q);
                    if let Some(first) = texts.get(question.text.as_str()) {
                        report(Rule::R8, loc, format!("question text repeats {first}"));
                    } else {
                        texts.insert(&question.text, loc);
                    }
                }
            }
        }
    }

    for (i, pattern) in tree.patterns.iter().enumerate() {
        if !reachable.contains(pattern.id.as_str()) {
            report(
                Rule::R3,
                root.key("patterns").index(i),
                format!("pattern `{}` is never asked for", pattern.id),
            );
        }
    }

    findings.sort_by(|a, b| (&a.location, a.rule).cmp(&(&b.location, b.rule)));
    findings
}
