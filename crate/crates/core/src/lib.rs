//! Diagnostic decision tree that interviews a user about an envisioned
//! system and suggests architectural design patterns.
//!
//! The tree is data: a JSON document ([`format`]) describing categories,
//! patterns and one path of question flows per foundational style
//! ([`model`]). [`engine`] walks a path one yes/no answer at a time,
//! [`lint`] checks authored trees, [`simulate`] measures how many patterns
//! an answer model ends up selecting, and [`service`] exposes sessions over
//! HTTP with an append-only event log. [`catalog`] ships the default tree.

pub mod catalog;
pub mod engine;
pub mod format;
pub mod lint;
pub mod location;
pub mod model;
pub mod service;
pub mod simulate;

pub use engine::{
    run_batch, start_session, Answer, EngineError, Prompt, ResultSet, Session, StepOutcome,
};
pub use format::{export_dot, parse_tree, serialize_tree, Diagnostic, ParseError};
pub use lint::{lint_tree, Finding, LintConfig, Rule};
pub use model::{ArchStyle, DecisionTree, QuestionFlow};
pub use simulate::{
    analytic_profile, enumerate_flow, monte_carlo_profile, AnswerModel, FlowVariant,
    SelectionProfile,
};
