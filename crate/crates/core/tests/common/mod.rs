#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::Arc;

use capi::model::{
    Category, Meta, Path, PathSection, Pattern, PatternSource, Question, QuestionFlow, QuestionKind,
};
use capi::{Answer, ArchStyle, DecisionTree, Session};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

const TEXT_POOL: &[&str] = &[
    "Do",
    "you",
    "need",
    "many",
    "services",
    "users",
    "deploy",
    "often?",
    "data,",
    "\"quoted\"",
    "tab\there",
    "naïve",
    "back\\slash",
    "über",
    "/path",
    "100%",
    "<tag>",
    "emoji 🚀",
    "line\nbreak",
];

pub fn random_text(rng: &mut impl Rng) -> String {
    let n = rng.random_range(1..=8);
    (0..n)
        .map(|_| *TEXT_POOL.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

/// A well-ordered flow: 1 to 3 indications and a trailing contraindication.
pub fn random_flow(rng: &mut impl Rng, id: String, patterns: Vec<String>) -> QuestionFlow {
    let indications = rng.random_range(1..=3);
    let mut questions: Vec<Question> = (0..indications)
        .map(|_| Question::indication(random_text(rng)))
        .collect();
    questions.push(Question::contraindication(random_text(rng)));
    QuestionFlow {
        id,
        patterns,
        questions,
    }
}

/// A tree that parses cleanly. Paths may come in any order and any
/// category may be missing from a path.
pub fn random_tree(rng: &mut impl Rng) -> DecisionTree {
    let category_count = rng.random_range(1..=5);
    let categories: Vec<Category> = (0..category_count)
        .map(|c| Category {
            id: format!("cat-{c}"),
            name: random_text(rng),
            description: if rng.random_bool(0.2) {
                String::new()
            } else {
                random_text(rng)
            },
        })
        .collect();
    let mut patterns = Vec::new();
    let mut by_category: Vec<Vec<String>> = Vec::new();
    for c in 0..category_count {
        let n = rng.random_range(1..=4);
        let mut ids = Vec::new();
        for j in 0..n {
            let id = format!("pattern-{c}-{j}");
            patterns.push(Pattern {
                id: id.clone(),
                name: random_text(rng),
                category: format!("cat-{c}"),
                description: random_text(rng),
                source: [
                    PatternSource::Paper,
                    PatternSource::Survey,
                    PatternSource::Authored,
                ][rng.random_range(0..3)],
            });
            ids.push(id);
        }
        by_category.push(ids);
    }

    let mut styles = ArchStyle::ALL.to_vec();
    styles.shuffle(rng);
    let paths = styles
        .into_iter()
        .map(|style| {
            let mut order: Vec<usize> = (0..category_count).collect();
            order.shuffle(rng);
            order.truncate(rng.random_range(0..=category_count));
            let sections = order
                .into_iter()
                .filter_map(|c| {
                    let mut pool = by_category[c].clone();
                    pool.shuffle(rng);
                    pool.truncate(rng.random_range(0..=pool.len()));
                    let mut flows = Vec::new();
                    while !pool.is_empty() {
                        let take = rng.random_range(1..=pool.len().min(2));
                        let group: Vec<String> = pool.drain(..take).collect();
                        let id = format!("{style}-{c}-{}", flows.len());
                        flows.push(random_flow(rng, id, group));
                    }
                    (!flows.is_empty()).then(|| PathSection {
                        category: format!("cat-{c}"),
                        flows,
                    })
                })
                .collect();
            Path { style, sections }
        })
        .collect();

    DecisionTree {
        meta: Meta {
            name: random_text(rng),
            version: format!("{}.{}.0", rng.random_range(0..5), rng.random_range(0..20)),
        },
        categories,
        patterns,
        paths,
    }
}

/// A tree whose microservices path holds exactly `flow`.
pub fn single_flow_tree(flow: QuestionFlow) -> DecisionTree {
    let patterns = flow
        .patterns
        .iter()
        .map(|id| Pattern {
            id: id.clone(),
            name: id.to_uppercase(),
            category: "only".into(),
            description: String::new(),
            source: PatternSource::Authored,
        })
        .collect();
    DecisionTree {
        meta: Meta {
            name: "single".into(),
            version: "1".into(),
        },
        categories: vec![Category {
            id: "only".into(),
            name: "Only".into(),
            description: String::new(),
        }],
        patterns,
        paths: ArchStyle::ALL
            .iter()
            .map(|&style| Path {
                style,
                sections: if style == ArchStyle::Microservices {
                    vec![PathSection {
                        category: "only".into(),
                        flows: vec![flow.clone()],
                    }]
                } else {
                    Vec::new()
                },
            })
            .collect(),
    }
}

/// The acceptance predicate, independent of the engine.
pub fn oracle_accepts(kinds: &[QuestionKind], answers: &[Answer]) -> bool {
    kinds.len() == answers.len()
        && kinds.iter().zip(answers).all(|(k, a)| match k {
            QuestionKind::Indication => *a == Answer::Yes,
            QuestionKind::Contraindication => *a == Answer::No,
        })
}

/// Feeds `answers[i]` to whichever question is asked i-th, stopping when the
/// session completes. Also returns the index of every question asked.
pub fn drive_single_flow(tree: Arc<DecisionTree>, answers: &[Answer]) -> (Session, Vec<usize>) {
    let mut session = Session::start(tree, ArchStyle::Microservices);
    let mut asked = Vec::new();
    for &a in answers {
        let Some(cursor) = session.cursor() else {
            break;
        };
        asked.push(cursor.question);
        session.answer(a).unwrap();
    }
    (session, asked)
}

pub fn random_answer(rng: &mut impl Rng, p_yes: f64) -> Answer {
    if rng.random_bool(p_yes) {
        Answer::Yes
    } else {
        Answer::No
    }
}
