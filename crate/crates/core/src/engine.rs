//! Session-based traversal of one style's path.
//!
//! Within a flow, every indication must be answered "yes" and the trailing
//! contraindication "no" for the flow's patterns to be collected. The first
//! "no" to an indication skips the rest of the flow. Collected patterns stay
//! hidden until the whole path has been traversed.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Deserialize, Serialize, Serializer};

use crate::model::{ArchStyle, Category, DecisionTree, Pattern, QuestionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Answer {
    Yes,
    No,
}

impl Answer {
    pub fn as_str(self) -> &'static str {
        match self {
            Answer::Yes => "yes",
            Answer::No => "no",
        }
    }
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("answer must be `yes` or `no`, got `{0}`")]
pub struct InvalidAnswer(pub String);

impl FromStr for Answer {
    type Err = InvalidAnswer;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "yes" => Ok(Answer::Yes),
            "no" => Ok(Answer::No),
            other => Err(InvalidAnswer(other.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    #[error("session is complete")]
    Complete,
    #[error("nothing to undo")]
    EmptyHistory,
    #[error("session is not complete yet")]
    Incomplete,
    #[error("answers ran out after {consumed} answers; the session is not complete")]
    Underflow { consumed: usize },
    #[error("session completed with {remaining} answers left over")]
    Overflow { remaining: usize },
}

/// Position of the current question on the path.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Cursor {
    pub section: usize,
    pub flow: usize,
    pub question: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Progress {
    pub flows_completed: usize,
    pub flows_total: usize,
    /// 1-based position of the question within its flow.
    pub question_index_in_flow: usize,
}

/// What the respondent sees: the question text and flow-level progress.
/// Carries nothing that identifies the flow, its category or its patterns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Prompt {
    pub question_text: String,
    pub progress: Progress,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    NextQuestion(Prompt),
    /// A "no" to an indication ended the flow early.
    FlowSkippedThen(Prompt),
    Completed,
}

impl StepOutcome {
    pub fn prompt(&self) -> Option<&Prompt> {
        match self {
            StepOutcome::NextQuestion(p) | StepOutcome::FlowSkippedThen(p) => Some(p),
            StepOutcome::Completed => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    Active,
    Complete,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Position {
    /// Index into the flattened flow list of the path.
    flow: usize,
    question: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryEntry {
    pub cursor: Cursor,
    pub answer: Answer,
    before: Position,
    accepted_before: usize,
}

/// Mutable traversal state over a shared tree.
#[derive(Debug, Clone)]
pub struct Session {
    tree: Arc<DecisionTree>,
    style: ArchStyle,
    /// (section, flow) for every flow on the path, in path order.
    order: Vec<(usize, usize)>,
    path_index: Option<usize>,
    position: Position,
    history: Vec<HistoryEntry>,
    accepted: Vec<usize>,
    state: SessionState,
}

impl PartialEq for Session {
    fn eq(&self, other: &Self) -> bool {
        (Arc::ptr_eq(&self.tree, &other.tree) || self.tree == other.tree)
            && self.style == other.style
            && self.position == other.position
            && self.history == other.history
            && self.accepted == other.accepted
            && self.state == other.state
    }
}

pub fn start_session(tree: Arc<DecisionTree>, style: ArchStyle) -> Session {
    Session::start(tree, style)
}

impl Session {
    pub fn start(tree: Arc<DecisionTree>, style: ArchStyle) -> Session {
        let path_index = tree.paths.iter().position(|p| p.style == style);
        let order = path_index
            .map(|i| {
                tree.paths[i]
                    .sections
                    .iter()
                    .enumerate()
                    .flat_map(|(s, section)| (0..section.flows.len()).map(move |f| (s, f)))
                    .collect()
            })
            .unwrap_or_default();
        let mut session = Session {
            tree,
            style,
            order,
            path_index,
            position: Position {
                flow: 0,
                question: 0,
            },
            history: Vec::new(),
            accepted: Vec::new(),
            state: SessionState::Active,
        };
        session.settle();
        session
    }

    pub fn tree(&self) -> &Arc<DecisionTree> {
        &self.tree
    }

    pub fn style(&self) -> ArchStyle {
        self.style
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    pub fn is_complete(&self) -> bool {
        self.state == SessionState::Complete
    }

    pub fn history(&self) -> &[HistoryEntry] {
        &self.history
    }

    pub fn answers(&self) -> impl Iterator<Item = Answer> + '_ {
        self.history.iter().map(|h| h.answer)
    }

    pub fn flows_total(&self) -> usize {
        self.order.len()
    }

    /// Ids of accepted flows, in path order.
    pub fn accepted_flows(&self) -> Vec<&str> {
        self.accepted
            .iter()
            .map(|&i| self.flow_at(i).id.as_str())
            .collect()
    }

    pub fn cursor(&self) -> Option<Cursor> {
        (self.state == SessionState::Active).then(|| self.cursor_of(self.position))
    }

    fn cursor_of(&self, position: Position) -> Cursor {
        let (section, flow) = self.order[position.flow];
        Cursor {
            section,
            flow,
            question: position.question,
        }
    }

    fn flow_at(&self, index: usize) -> &crate::model::QuestionFlow {
        let (s, f) = self.order[index];
        let path = self
            .path_index
            .expect("flows exist only on an existing path");
        &self.tree.paths[path].sections[s].flows[f]
    }

    /// Moves past flows without questions and marks the session complete at
    /// the end of the path.
    fn settle(&mut self) {
        while self.position.flow < self.order.len()
            && self.flow_at(self.position.flow).questions.is_empty()
        {
            self.position.flow += 1;
        }
        if self.position.flow >= self.order.len() {
            self.state = SessionState::Complete;
        }
    }

    fn advance_flow(&mut self) {
        self.position = Position {
            flow: self.position.flow + 1,
            question: 0,
        };
        self.settle();
    }

    pub fn current_prompt(&self) -> Result<Prompt, EngineError> {
        if self.is_complete() {
            return Err(EngineError::Complete);
        }
        let flow = self.flow_at(self.position.flow);
        Ok(Prompt {
            question_text: flow.questions[self.position.question].text.clone(),
            progress: Progress {
                flows_completed: self.position.flow,
                flows_total: self.order.len(),
                question_index_in_flow: self.position.question + 1,
            },
        })
    }

    pub fn answer(&mut self, answer: Answer) -> Result<StepOutcome, EngineError> {
        if self.is_complete() {
            return Err(EngineError::Complete);
        }
        let before = self.position;
        self.history.push(HistoryEntry {
            cursor: self.cursor_of(before),
            answer,
            before,
            accepted_before: self.accepted.len(),
        });

        let flow = self.flow_at(before.flow);
        let kind = flow.questions[before.question].kind;
        let is_last = before.question + 1 == flow.questions.len();

        let skipped = match (kind, answer) {
            (QuestionKind::Indication, Answer::No) => {
                self.advance_flow();
                true
            }
            (QuestionKind::Contraindication, Answer::Yes) => {
                self.advance_flow();
                false
            }
            _ if is_last => {
                self.accepted.push(before.flow);
                self.advance_flow();
                false
            }
            _ => {
                self.position.question += 1;
                false
            }
        };

        if self.is_complete() {
            return Ok(StepOutcome::Completed);
        }
        let prompt = self.current_prompt()?;
        Ok(if skipped {
            StepOutcome::FlowSkippedThen(prompt)
        } else {
            StepOutcome::NextQuestion(prompt)
        })
    }

    /// Reverts the last answer, reopening a completed session if needed.
    pub fn undo(&mut self) -> Result<Prompt, EngineError> {
        let entry = self.history.pop().ok_or(EngineError::EmptyHistory)?;
        self.position = entry.before;
        self.accepted.truncate(entry.accepted_before);
        self.state = SessionState::Active;
        self.current_prompt()
    }

    pub fn result_set(&self) -> Result<ResultSet, EngineError> {
        if !self.is_complete() {
            return Err(EngineError::Incomplete);
        }
        let mut groups: Vec<ResultGroup> = Vec::new();
        for &index in &self.accepted {
            let (s, _) = self.order[index];
            let path = self
                .path_index
                .expect("accepted flows exist only on an existing path");
            let category_id = &self.tree.paths[path].sections[s].category;
            let group = match groups.iter().position(|g| &g.category.id == category_id) {
                Some(g) => &mut groups[g],
                None => {
                    let category = self
                        .tree
                        .category(category_id)
                        .cloned()
                        .unwrap_or(Category {
                            id: category_id.clone(),
                            name: category_id.clone(),
                            description: String::new(),
                        });
                    groups.push(ResultGroup {
                        category,
                        patterns: Vec::new(),
                    });
                    groups.last_mut().expect("just pushed")
                }
            };
            for id in &self.flow_at(index).patterns {
                if let Some(pattern) = self.tree.pattern(id) {
                    group.patterns.push(pattern.clone());
                }
            }
        }
        let total = groups.iter().map(|g| g.patterns.len()).sum();
        Ok(ResultSet { groups, total })
    }
}

/// Feeds `answers` into a fresh session; the answers must run out exactly
/// when the session completes.
pub fn run_batch(
    tree: Arc<DecisionTree>,
    style: ArchStyle,
    answers: &[Answer],
) -> Result<ResultSet, EngineError> {
    let mut session = Session::start(tree, style);
    for (i, &answer) in answers.iter().enumerate() {
        if session.is_complete() {
            return Err(EngineError::Overflow {
                remaining: answers.len() - i,
            });
        }
        session.answer(answer)?;
    }
    if !session.is_complete() {
        return Err(EngineError::Underflow {
            consumed: answers.len(),
        });
    }
    session.result_set()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultGroup {
    pub category: Category,
    pub patterns: Vec<Pattern>,
}

/// Suggested patterns grouped by category, in path order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ResultSet {
    pub groups: Vec<ResultGroup>,
    pub total: usize,
}

impl ResultSet {
    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn pattern_ids(&self) -> Vec<&str> {
        self.groups
            .iter()
            .flat_map(|g| g.patterns.iter().map(|p| p.id.as_str()))
            .collect()
    }

    pub fn pattern_names(&self) -> Vec<&str> {
        self.groups
            .iter()
            .flat_map(|g| g.patterns.iter().map(|p| p.name.as_str()))
            .collect()
    }

    pub fn contains(&self, pattern_id: &str) -> bool {
        self.pattern_ids().contains(&pattern_id)
    }

    /// Plain-text listing, one category heading per group.
    pub fn render_text(&self) -> String {
        if self.is_empty() {
            return "No patterns suggested.\n".to_owned();
        }
        let mut out = format!("Suggested patterns ({}):\n", self.total);
        for group in &self.groups {
            out.push_str(&format!("\n{}\n", group.category.name));
            for pattern in &group.patterns {
                if pattern.description.is_empty() {
                    out.push_str(&format!("  - {}\n", pattern.name));
                } else {
                    out.push_str(&format!("  - {}: {}\n", pattern.name, pattern.description));
                }
            }
        }
        out
    }
}

struct ByCategory<'a>(&'a [ResultGroup]);

impl Serialize for ByCategory<'_> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for group in self.0 {
            let ids: Vec<&str> = group.patterns.iter().map(|p| p.id.as_str()).collect();
            map.serialize_entry(&group.category.id, &ids)?;
        }
        map.end()
    }
}

#[derive(Serialize)]
struct CategoryView<'a> {
    id: &'a str,
    name: &'a str,
    description: &'a str,
}

#[derive(Serialize)]
struct PatternView<'a> {
    id: &'a str,
    name: &'a str,
    description: &'a str,
}

#[derive(Serialize)]
struct GroupView<'a> {
    category: CategoryView<'a>,
    patterns: Vec<PatternView<'a>>,
}

/// `{"by_category": {category: [pattern ids]}, "total": n, "groups": [...]}`;
/// `groups` repeats the grouping with names and descriptions.
impl Serialize for ResultSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let groups: Vec<GroupView> = self
            .groups
            .iter()
            .map(|g| GroupView {
                category: CategoryView {
                    id: &g.category.id,
                    name: &g.category.name,
                    description: &g.category.description,
                },
                patterns: g
                    .patterns
                    .iter()
                    .map(|p| PatternView {
                        id: &p.id,
                        name: &p.name,
                        description: &p.description,
                    })
                    .collect(),
            })
            .collect();
        let mut s = serializer.serialize_struct("ResultSet", 3)?;
        s.serialize_field("by_category", &ByCategory(&self.groups))?;
        s.serialize_field("total", &self.total)?;
        s.serialize_field("groups", &groups)?;
        s.end()
    }
}
