//! One line per acceptance criterion, then a non-zero exit if any failed.
//!
//!     cargo test --test acceptance

mod common;

use std::collections::HashSet;
use std::io::{BufRead, BufReader};
use std::path::Path as FsPath;
use std::process::{Child, Command, Stdio};
use std::sync::{Arc, Barrier};
use std::thread;
use std::time::{Duration, Instant};

use capi::catalog::{load_default_catalog, DEFAULT_CATALOG};
use capi::model::{Path, PathSection, QuestionKind, DISCOVERY_AND_COMMUNICATION};
use capi::simulate::{
    analytic_profile, enumerate_flow, monte_carlo_profile, AnswerModel, FlowVariant,
};
use capi::{
    lint_tree, parse_tree, run_batch, serialize_tree, Answer, ArchStyle, DecisionTree, LintConfig,
    Session,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use common::*;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn catalog() -> DecisionTree {
    load_default_catalog().expect("shipped catalog loads")
}

fn discovery_only(catalog: &DecisionTree) -> DecisionTree {
    let path = catalog.path(ArchStyle::Microservices).unwrap();
    let (section, flow) = path
        .sections
        .iter()
        .find_map(|s| {
            s.flows
                .iter()
                .find(|f| f.patterns.iter().any(|p| p == "service-discovery"))
                .map(|f| (s, f))
        })
        .expect("discovery flow");
    DecisionTree {
        paths: ArchStyle::ALL
            .iter()
            .map(|&style| Path {
                style,
                sections: if style == ArchStyle::Microservices {
                    vec![PathSection {
                        category: section.category.clone(),
                        flows: vec![flow.clone()],
                    }]
                } else {
                    Vec::new()
                },
            })
            .collect(),
        ..catalog.clone()
    }
}

fn discovery_assignments() -> Outcome {
    let start = Instant::now();
    let tree = Arc::new(discovery_only(&catalog()));
    let mut accepting = Vec::new();
    for bits in 0..8u32 {
        let vector: Vec<Answer> = (0..3)
            .map(|i| {
                if bits >> (2 - i) & 1 == 1 {
                    Answer::Yes
                } else {
                    Answer::No
                }
            })
            .collect();
        let (session, _) = drive_single_flow(tree.clone(), &vector);
        let result = session.result_set().map_err(|e| e.to_string())?;
        let ids = result.pattern_ids();
        match ids.as_slice() {
            [] => {}
            ["service-discovery", "service-registry"] => accepting.push(vector),
            other => return Err(format!("unexpected result {other:?}")),
        }
    }
    let elapsed = start.elapsed();
    check(
        accepting == vec![vec![Answer::Yes, Answer::Yes, Answer::No]]
            && elapsed < Duration::from_secs(1),
        format!("accepting assignments {accepting:?} in {elapsed:.2?}"),
    )
}

fn cardinalities() -> Outcome {
    let tree = catalog();
    let findings = lint_tree(&tree, &LintConfig::default());
    let mono = tree.path(ArchStyle::Monolithic).unwrap();
    let dc_flows = mono
        .sections
        .iter()
        .filter(|s| s.category == DISCOVERY_AND_COMMUNICATION)
        .map(|s| s.flows.len())
        .sum::<usize>()
        + mono
            .flows()
            .filter(|f| {
                f.patterns
                    .iter()
                    .any(|p| tree.pattern(p).unwrap().category == DISCOVERY_AND_COMMUNICATION)
            })
            .count();
    let errors = findings
        .iter()
        .filter(|f| f.severity == capi::format::Severity::Error)
        .count();
    let detail = format!(
        "{} patterns, {} categories, {} paths, {} lint errors, {} monolithic discovery flows",
        tree.patterns.len(),
        tree.categories.len(),
        tree.paths.len(),
        errors,
        dc_flows
    );
    check(
        tree.patterns.len() == 47
            && tree.categories.len() == 6
            && tree.paths.len() == 3
            && errors == 0
            && dc_flows == 0,
        detail,
    )
}

fn flow_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0f10);
    let (mut mismatches, mut prompted_skips) = (0, 0);
    let instances = 10_000;
    for i in 0..instances {
        let flow = random_flow(&mut rng, format!("flow-{i}"), vec!["a".into(), "b".into()]);
        let kinds: Vec<QuestionKind> = flow.questions.iter().map(|q| q.kind).collect();
        let answers: Vec<Answer> = kinds.iter().map(|_| random_answer(&mut rng, 0.7)).collect();
        let (session, asked) = drive_single_flow(Arc::new(single_flow_tree(flow)), &answers);
        let accepted = !session.result_set().map_err(|e| e.to_string())?.is_empty();
        if accepted != oracle_accepts(&kinds, &answers) {
            mismatches += 1;
        }
        let first_no = kinds
            .iter()
            .zip(&answers)
            .position(|(k, a)| *k == QuestionKind::Indication && *a == Answer::No);
        let reachable = first_no.map_or(kinds.len(), |i| i + 1);
        if asked.iter().any(|&q| q >= reachable) || asked.len() != reachable {
            prompted_skips += 1;
        }
    }
    check(
        mismatches == 0 && prompted_skips == 0,
        format!("{instances} instances, {mismatches} acceptance mismatches, {prompted_skips} skip violations"),
    )
}

fn undo_soundness() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd0);
    let shipped = Arc::new(catalog());
    let sessions = 1_000;
    let mut mismatches = 0;
    for i in 0..sessions {
        let tree = if i % 2 == 0 {
            shipped.clone()
        } else {
            Arc::new(random_tree(&mut rng))
        };
        let style = ArchStyle::ALL[rng.random_range(0..3)];
        let p_yes = rng.random_range(0.2..0.9);
        let mut session = Session::start(tree.clone(), style);
        let mut net = Vec::new();
        loop {
            // An answer/undo pair before the real answer, at random.
            if rng.random_bool(0.3) {
                if session.is_complete() {
                    if net.is_empty() {
                        break;
                    }
                    session.undo().map_err(|e| e.to_string())?;
                    session
                        .answer(*net.last().unwrap())
                        .map_err(|e| e.to_string())?;
                } else {
                    session
                        .answer(random_answer(&mut rng, 0.5))
                        .map_err(|e| e.to_string())?;
                    session.undo().map_err(|e| e.to_string())?;
                }
            }
            if session.is_complete() {
                break;
            }
            let a = random_answer(&mut rng, p_yes);
            session.answer(a).map_err(|e| e.to_string())?;
            net.push(a);
        }
        let replay = run_batch(tree.clone(), style, &net).map_err(|e| e.to_string())?;
        if replay != session.result_set().map_err(|e| e.to_string())? {
            mismatches += 1;
        }
    }
    check(
        mismatches == 0,
        format!("{sessions} sessions, {mismatches} mismatches"),
    )
}

fn analytic_vs_enumeration() -> Outcome {
    let tree = catalog();
    let model = AnswerModel::uniform(0.5).unwrap();
    let (mut flows, mut worst) = (0, 0.0f64);
    for style in ArchStyle::ALL {
        for variant in [FlowVariant::Revised, FlowVariant::Draft] {
            let profile = analytic_profile(&tree, style, &model, variant);
            for (flow, estimate) in tree.flows_for(style).iter().zip(&profile.per_flow) {
                let exact = enumerate_flow(flow, variant);
                let exact = *exact.numer() as f64 / *exact.denom() as f64;
                worst = worst.max((exact - estimate.probability).abs());
                flows += 1;
            }
        }
    }
    check(
        worst < 1e-12,
        format!("{flows} flow/variant pairs, max |difference| {worst:e}"),
    )
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let tree = catalog();
    let trials = 100_000u64;
    let (mut total, mut within) = (0, 0);
    for style in ArchStyle::ALL {
        let model = AnswerModel::uniform(0.5).unwrap();
        let exact = analytic_profile(&tree, style, &model, FlowVariant::Revised);
        let sampled = monte_carlo_profile(&tree, style, &model, FlowVariant::Revised, trials, 2024)
            .map_err(|e| e.to_string())?;
        for (a, s) in exact.per_flow.iter().zip(&sampled.per_flow) {
            let sigma = (a.probability * (1.0 - a.probability) / trials as f64).sqrt();
            total += 1;
            if (a.probability - s.probability).abs() <= 3.0 * sigma {
                within += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    let share = within as f64 / total as f64;
    check(
        share >= 0.99 && elapsed < Duration::from_secs(30),
        format!("{within}/{total} flows within 3 sigma at 1e5 trials, {elapsed:.1?}"),
    )
}

fn contraindication_effect() -> Outcome {
    let tree = catalog();
    let mut detail = Vec::new();
    let mut ok = true;
    for p in [0.3, 0.5, 0.7, 0.9] {
        let model = AnswerModel::uniform(p).unwrap();
        for style in ArchStyle::ALL {
            let revised =
                analytic_profile(&tree, style, &model, FlowVariant::Revised).expected_set_size;
            let draft =
                analytic_profile(&tree, style, &model, FlowVariant::Draft).expected_set_size;
            ok &= revised < draft;
            if style == ArchStyle::Microservices {
                detail.push(format!("p={p}: {revised:.2}<{draft:.2}"));
            }
        }
    }
    check(
        ok,
        format!("all 12 cases reduced; microservices {}", detail.join(", ")),
    )
}

fn round_trip() -> Outcome {
    let shipped = parse_tree(DEFAULT_CATALOG).map_err(|e| e.to_string())?;
    let mut ok = serialize_tree(&shipped) == DEFAULT_CATALOG;
    let mut rng = ChaCha8Rng::seed_from_u64(0x7733);
    let mut failures = 0;
    for _ in 0..100 {
        let tree = random_tree(&mut rng);
        let text = serialize_tree(&tree);
        match parse_tree(&text) {
            Ok(back) if back == tree && serialize_tree(&back) == text => {}
            _ => failures += 1,
        }
    }
    ok &= failures == 0;
    check(
        ok,
        format!("shipped catalog byte-identical; {failures}/100 random trees failed"),
    )
}

struct Server {
    child: Child,
    base: String,
}

fn start_server(log: &FsPath) -> Server {
    let mut child = Command::new(env!("CARGO_BIN_EXE_capi"))
        .args(["serve", "--addr", "127.0.0.1:0", "--log"])
        .arg(log)
        .env_remove("CAPI_CATALOG")
        .stdout(Stdio::piped())
        .stderr(Stdio::null())
        .spawn()
        .expect("server starts");
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap())
        .read_line(&mut line)
        .unwrap();
    let base = line
        .trim()
        .strip_prefix("listening on ")
        .unwrap_or_else(|| panic!("unexpected server banner {line:?}"))
        .to_owned();
    Server { child, base }
}

fn post(base: &str, path: &str, body: Value) -> Result<Value, String> {
    ureq::post(format!("{base}{path}"))
        .send_json(body)
        .map_err(|e| e.to_string())?
        .body_mut()
        .read_json()
        .map_err(|e| e.to_string())
}

fn get(base: &str, path: &str) -> Result<Value, String> {
    ureq::get(format!("{base}{path}"))
        .call()
        .map_err(|e| e.to_string())?
        .body_mut()
        .read_json()
        .map_err(|e| e.to_string())
}

/// Answers from `stream` until the session completes or `limit` answers
/// have been sent. Returns the answers sent.
fn play(
    base: &str,
    id: &str,
    stream: &mut impl Iterator<Item = Answer>,
    limit: usize,
) -> Result<Vec<Answer>, String> {
    let mut sent = Vec::new();
    while sent.len() < limit {
        if get(base, &format!("/api/sessions/{id}/question"))?["completed"] == true {
            break;
        }
        let a = stream.next().unwrap();
        post(
            base,
            &format!("/api/sessions/{id}/answer"),
            json!({ "answer": a.as_str() }),
        )?;
        sent.push(a);
    }
    Ok(sent)
}

fn service_recovery() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let log = dir.path().join("events.ndjson");
    let tree = Arc::new(catalog());
    let sessions = 50;

    let server = start_server(&log);
    let base = server.base.clone();
    let before_kill = Arc::new(Barrier::new(sessions + 1));
    let after_restart = Arc::new(Barrier::new(sessions + 1));
    let restarted: Arc<std::sync::Mutex<String>> = Arc::default();

    let workers: Vec<_> = (0..sessions)
        .map(|i| {
            let (base, before_kill, after_restart, restarted) = (
                base.clone(),
                before_kill.clone(),
                after_restart.clone(),
                restarted.clone(),
            );
            thread::spawn(
                move || -> Result<(ArchStyle, String, Vec<Answer>), String> {
                    let mut rng = ChaCha8Rng::seed_from_u64(1000 + i as u64);
                    let style = ArchStyle::ALL[i % 3];
                    let mut stream = (0..).map(move |_| random_answer(&mut rng, 0.6));
                    let created = post(&base, "/api/sessions", json!({ "style": style.as_str() }));
                    let first = created.and_then(|created| {
                        let id = created["session_id"]
                            .as_str()
                            .ok_or("no session id")?
                            .to_owned();
                        let mut answers = play(&base, &id, &mut stream, 3 + i % 17)?;
                        if i % 4 == 0 {
                            post(
                                &base,
                                &format!("/api/sessions/{id}/answer"),
                                json!({ "answer": "yes" }),
                            )?;
                            post(&base, &format!("/api/sessions/{id}/undo"), Value::Null)?;
                        }
                        if i % 5 == 0 && !answers.is_empty() {
                            post(&base, &format!("/api/sessions/{id}/undo"), Value::Null)?;
                            answers.pop();
                        }
                        Ok((id, answers))
                    });
                    before_kill.wait();
                    after_restart.wait();
                    let (id, mut answers) = first?;
                    let base = restarted.lock().unwrap().clone();
                    answers.extend(play(&base, &id, &mut stream, usize::MAX)?);
                    Ok((style, id, answers))
                },
            )
        })
        .collect();

    before_kill.wait();
    let mut old = server;
    old.child.kill().map_err(|e| e.to_string())?;
    old.child.wait().map_err(|e| e.to_string())?;
    let mut server = start_server(&log);
    *restarted.lock().unwrap() = server.base.clone();
    after_restart.wait();

    let mut divergences = 0;
    let mut failures = Vec::new();
    for worker in workers {
        match worker.join().expect("worker panicked") {
            Ok((style, id, answers)) => {
                let control =
                    run_batch(tree.clone(), style, &answers).map_err(|e| e.to_string())?;
                let control = serde_json::to_value(&control).unwrap();
                match get(&server.base, &format!("/api/sessions/{id}/result")) {
                    Ok(result) if result == control => {}
                    _ => divergences += 1,
                }
            }
            Err(e) => failures.push(e),
        }
    }
    let _ = server.child.kill();
    let _ = server.child.wait();
    check(
        divergences == 0 && failures.is_empty(),
        format!("{sessions} sessions across a SIGKILL restart, {divergences} divergences, {} client errors {failures:?}", failures.len()),
    )
}

fn hiding_rule() -> Outcome {
    let tree = Arc::new(catalog());
    let names: Vec<&str> = tree.patterns.iter().map(|p| p.name.as_str()).collect();
    let mut seen = HashSet::new();
    let mut hits = Vec::new();
    let mut prompts = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(0x41de);
    for style in ArchStyle::ALL {
        // Yes to every question reaches every question on the path; random
        // runs add the other prompt states (undo, skips, progress values).
        let runs: Vec<f64> = std::iter::once(1.0)
            .chain(std::iter::repeat_n(0.6, 200))
            .collect();
        for p_yes in runs {
            let mut session = Session::start(tree.clone(), style);
            while let Ok(prompt) = session.current_prompt() {
                let payload = serde_json::to_string(&prompt).unwrap();
                prompts += 1;
                seen.insert(prompt.question_text.clone());
                for name in &names {
                    if payload.contains(name) {
                        hits.push(format!("{name:?} in {payload}"));
                    }
                }
                if rng.random_bool(0.05) && !session.history().is_empty() {
                    session.undo().unwrap();
                } else {
                    session.answer(random_answer(&mut rng, p_yes)).unwrap();
                }
            }
        }
    }
    let all: HashSet<String> = ArchStyle::ALL
        .iter()
        .flat_map(|&s| tree.flows_for(s))
        .flat_map(|f| f.questions.iter().map(|q| q.text.clone()))
        .collect();
    let missing = all.difference(&seen).count();
    check(
        hits.is_empty() && missing == 0,
        format!(
            "{prompts} prompts covering {}/{} questions, {} hits {:?}",
            seen.len(),
            all.len(),
            hits.len(),
            hits
        ),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "discovery flow accepts only yes,yes,no",
            discovery_assignments,
        ),
        ("catalog cardinalities", cardinalities),
        ("flow semantics oracle", flow_oracle),
        ("undo soundness", undo_soundness),
        ("analytic equals enumeration", analytic_vs_enumeration),
        ("monte carlo consistency", monte_carlo),
        ("contraindication effect", contraindication_effect),
        ("format round trip", round_trip),
        ("service recovery", service_recovery),
        ("hiding rule", hiding_rule),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail}");
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
