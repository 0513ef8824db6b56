mod common;

use std::sync::Arc;
use std::thread;

use capi::catalog::load_default_catalog;
use capi::service::{EventLog, SessionStore, StoreConfig};
use capi::{run_batch, Answer, ArchStyle};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::random_answer;

fn answers_for(seed: u64) -> Vec<Answer> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..200).map(|_| random_answer(&mut rng, 0.65)).collect()
}

/// Answers until the session completes; returns how many were used.
fn play(store: &SessionStore, id: &str, answers: &[Answer]) -> usize {
    let mut used = 0;
    while store.question(id).unwrap().is_some() {
        store.answer(id, answers[used]).unwrap();
        used += 1;
    }
    used
}

#[test]
fn concurrent_sessions_match_serial_replays() {
    let dir = tempfile::tempdir().unwrap();
    let tree = Arc::new(load_default_catalog().unwrap());
    let (store, _) =
        SessionStore::open(tree.clone(), StoreConfig::new(dir.path().join("log"))).unwrap();
    let store = Arc::new(store);

    let handles: Vec<_> = (0..24u64)
        .map(|i| {
            let store = store.clone();
            thread::spawn(move || {
                let style = ArchStyle::ALL[i as usize % 3];
                let (id, _) = store.create(style).unwrap();
                let answers = answers_for(i);
                let used = play(&store, &id, &answers);
                (id, style, answers[..used].to_vec())
            })
        })
        .collect();
    let runs: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();

    for (id, style, answers) in &runs {
        let expected = run_batch(tree.clone(), *style, answers).unwrap();
        assert_eq!(store.result(id).unwrap(), expected);
    }

    // Log replay reconstructs every session.
    drop(store);
    let (store, report) =
        SessionStore::open(tree.clone(), StoreConfig::new(dir.path().join("log"))).unwrap();
    assert_eq!(report.sessions, runs.len());
    assert_eq!(report.dropped, 0);
    for (id, style, answers) in &runs {
        assert_eq!(
            store.result(id).unwrap(),
            run_batch(tree.clone(), *style, answers).unwrap()
        );
    }
}

#[test]
fn a_torn_last_line_loses_only_that_event() {
    let dir = tempfile::tempdir().unwrap();
    let log_path = dir.path().join("log");
    let tree = Arc::new(load_default_catalog().unwrap());
    let id = {
        let (store, _) = SessionStore::open(tree.clone(), StoreConfig::new(&log_path)).unwrap();
        let (id, _) = store.create(ArchStyle::Microservices).unwrap();
        store.answer(&id, Answer::Yes).unwrap();
        store.answer(&id, Answer::Yes).unwrap();
        id
    };
    let mut text = std::fs::read_to_string(&log_path).unwrap();
    text.truncate(text.len() - 10);
    std::fs::write(&log_path, text).unwrap();

    let (store, report) = SessionStore::open(tree, StoreConfig::new(&log_path)).unwrap();
    assert_eq!(report.unreadable_lines, 1);
    assert_eq!(store.session(&id).unwrap().history().len(), 1);
    // Compaction on open rewrote the log without the torn line.
    let (entries, skipped) = EventLog::read(&log_path).unwrap();
    assert_eq!((entries.len(), skipped), (2, 0));
}
