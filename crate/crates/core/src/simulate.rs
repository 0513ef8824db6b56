//! Result-set size under independent yes/no answer models.
//!
//! The analytic profile multiplies per-question probabilities along each
//! flow. The Monte-Carlo profile drives real engine sessions with sampled
//! answers. [`enumerate_flow`] counts accepting answer vectors exactly and
//! serves as the reference for both.

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{Answer, Session};
use crate::model::{ArchStyle, DecisionTree, QuestionFlow, QuestionKind};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimulateError {
    #[error("{name} must be a probability in [0, 1], got {value}")]
    Probability { name: &'static str, value: f64 },
    #[error("monte carlo needs at least one trial")]
    NoTrials,
}

/// Independent Bernoulli answers, optionally biased per question kind.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnswerModel {
    p_yes_indication: f64,
    p_yes_contraindication: f64,
}

impl AnswerModel {
    pub fn uniform(p_yes: f64) -> Result<Self, SimulateError> {
        Self::per_kind(p_yes, p_yes)
    }

    pub fn per_kind(indication: f64, contraindication: f64) -> Result<Self, SimulateError> {
        check_probability("p_yes_indication", indication)?;
        check_probability("p_yes_contraindication", contraindication)?;
        Ok(AnswerModel {
            p_yes_indication: indication,
            p_yes_contraindication: contraindication,
        })
    }

    pub fn p_yes(&self, kind: QuestionKind) -> f64 {
        match kind {
            QuestionKind::Indication => self.p_yes_indication,
            QuestionKind::Contraindication => self.p_yes_contraindication,
        }
    }

    /// Probability that a flow is accepted under the sequential semantics.
    pub fn acceptance(&self, flow: &QuestionFlow) -> f64 {
        flow.questions
            .iter()
            .map(|q| match q.kind {
                QuestionKind::Indication => self.p_yes_indication,
                QuestionKind::Contraindication => 1.0 - self.p_yes_contraindication,
            })
            .product()
    }
}

fn check_probability(name: &'static str, value: f64) -> Result<(), SimulateError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(SimulateError::Probability { name, value })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum FlowVariant {
    /// Flows as authored, contraindication included.
    Revised,
    /// Indication questions only.
    Draft,
}

impl std::str::FromStr for FlowVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "revised" => Ok(FlowVariant::Revised),
            "draft" => Ok(FlowVariant::Draft),
            other => Err(format!(
                "unknown variant `{other}` (expected revised or draft)"
            )),
        }
    }
}

impl FlowVariant {
    pub fn apply_flow(self, flow: &QuestionFlow) -> QuestionFlow {
        match self {
            FlowVariant::Revised => flow.clone(),
            FlowVariant::Draft => {
                let indications: Vec<_> = flow
                    .questions
                    .iter()
                    .filter(|q| q.kind == QuestionKind::Indication)
                    .cloned()
                    .collect();
                if indications.is_empty() {
                    return flow.clone();
                }
                QuestionFlow {
                    questions: indications,
                    ..flow.clone()
                }
            }
        }
    }

    pub fn apply(self, tree: &DecisionTree) -> DecisionTree {
        let mut out = tree.clone();
        if self == FlowVariant::Draft {
            for flow in out
                .paths
                .iter_mut()
                .flat_map(|p| p.sections.iter_mut())
                .flat_map(|s| s.flows.iter_mut())
            {
                *flow = self.apply_flow(flow);
            }
        }
        out
    }
}

/// Fraction of all 2^q answer vectors that accept the flow.
pub fn enumerate_flow(flow: &QuestionFlow, variant: FlowVariant) -> Ratio<u64> {
    let flow = variant.apply_flow(flow);
    let q = flow.questions.len();
    assert!(q < 64, "flow `{}` is too long to enumerate", flow.id);
    let total: u64 = 1 << q;
    let accepted = (0..total)
        .filter(|&bits| {
            flow.questions.iter().enumerate().all(|(i, question)| {
                let yes = bits >> i & 1 == 1;
                match question.kind {
                    QuestionKind::Indication => yes,
                    QuestionKind::Contraindication => !yes,
                }
            })
        })
        .count() as u64;
    Ratio::new(accepted, total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileMode {
    Analytic,
    MonteCarlo,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowEstimate {
    pub flow: String,
    pub patterns: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelectionProfile {
    pub mode: ProfileMode,
    pub expected_set_size: f64,
    pub per_pattern: BTreeMap<String, f64>,
    pub per_flow: Vec<FlowEstimate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SelectionProfile {
    fn from_flows(
        mode: ProfileMode,
        flows: &[&QuestionFlow],
        probabilities: impl IntoIterator<Item = f64>,
    ) -> Self {
        let per_flow: Vec<FlowEstimate> = flows
            .iter()
            .zip(probabilities)
            .map(|(flow, probability)| FlowEstimate {
                flow: flow.id.clone(),
                patterns: flow.patterns.len(),
                probability,
            })
            .collect();
        let mut per_pattern = BTreeMap::new();
        for (flow, estimate) in flows.iter().zip(&per_flow) {
            for id in &flow.patterns {
                per_pattern.insert(id.clone(), estimate.probability);
            }
        }
        let expected_set_size = per_flow
            .iter()
            .map(|e| e.probability * e.patterns as f64)
            .sum();
        SelectionProfile {
            mode,
            expected_set_size,
            per_pattern,
            per_flow,
            trials: None,
            seed: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("profiles always serialize")
    }
}

pub fn analytic_profile(
    tree: &DecisionTree,
    style: ArchStyle,
    model: &AnswerModel,
    variant: FlowVariant,
) -> SelectionProfile {
    let flows: Vec<QuestionFlow> = tree
        .flows_for(style)
        .into_iter()
        .map(|f| variant.apply_flow(f))
        .collect();
    let refs: Vec<&QuestionFlow> = flows.iter().collect();
    SelectionProfile::from_flows(
        ProfileMode::Analytic,
        &refs,
        flows.iter().map(|f| model.acceptance(f)),
    )
}

/// Samples `trials` full sessions. Trial `t` draws from a ChaCha8 stream
/// seeded with `seed` on stream `t`, so the outcome does not depend on how
/// trials are scheduled across threads.
pub fn monte_carlo_profile(
    tree: &DecisionTree,
    style: ArchStyle,
    model: &AnswerModel,
    variant: FlowVariant,
    trials: u64,
    seed: u64,
) -> Result<SelectionProfile, SimulateError> {
    if trials == 0 {
        return Err(SimulateError::NoTrials);
    }
    let tree = Arc::new(variant.apply(tree));
    let flows = tree.flows_for(style);
    let index: HashMap<&str, usize> = flows
        .iter()
        .enumerate()
        .map(|(i, f)| (f.id.as_str(), i))
        .collect();
    let path = tree.path(style);

    let counts = (0..trials)
        .into_par_iter()
        .fold(
            || vec![0u64; flows.len()],
            |mut counts, trial| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(trial);
                let mut session = Session::start(tree.clone(), style);
                while let Some(cursor) = session.cursor() {
                    let path = path.expect("active sessions have a path");
                    let kind = path.sections[cursor.section].flows[cursor.flow].questions
                        [cursor.question]
                        .kind;
                    let answer = if rng.random_bool(model.p_yes(kind)) {
                        Answer::Yes
                    } else {
                        Answer::No
                    };
                    session
                        .answer(answer)
                        .expect("active session accepts answers");
                }
                for id in session.accepted_flows() {
                    counts[index[id]] += 1;
                }
                counts
            },
        )
        .reduce(
            || vec![0u64; flows.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );

    let mut profile = SelectionProfile::from_flows(
        ProfileMode::MonteCarlo,
        &flows,
        counts.iter().map(|&c| c as f64 / trials as f64),
    );
    profile.trials = Some(trials);
    profile.seed = Some(seed);
    Ok(profile)
}
