//! Drives a session step by step, including an undo, the way a UI would.
//!
//!     cargo run --example walk_session

use std::sync::Arc;

use capi::catalog::load_default_catalog;
use capi::{Answer, ArchStyle, Session, StepOutcome};

fn main() {
    let tree = Arc::new(load_default_catalog().unwrap());
    let mut session = Session::start(tree, ArchStyle::Monolithic);

    let show = |session: &Session| {
        let prompt = session.current_prompt().unwrap();
        println!(
            "[flow {}/{}, question {}] {}",
            prompt.progress.flows_completed + 1,
            prompt.progress.flows_total,
            prompt.progress.question_index_in_flow,
            prompt.question_text
        );
    };

    show(&session);
    session.answer(Answer::Yes).unwrap();
    show(&session);
    println!("  answering no, then changing my mind");
    match session.answer(Answer::No).unwrap() {
        StepOutcome::FlowSkippedThen(_) => println!("  (the rest of that flow was skipped)"),
        other => println!("  {other:?}"),
    }
    session.undo().unwrap();
    show(&session);

    // Answer "no" to everything else.
    let mut asked = 0;
    while !session.is_complete() {
        session.answer(Answer::No).unwrap();
        asked += 1;
    }
    println!("\n{asked} more questions answered\n");
    print!("{}", session.result_set().unwrap().render_text());
}
