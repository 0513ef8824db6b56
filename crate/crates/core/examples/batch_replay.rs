//! Replays an answer sequence against the shipped catalog.
//!
//!     cargo run --example batch_replay -- microservices
//!     cargo run --example batch_replay -- client-server yes,no,no,...
//!
//! Without an answer list every question is answered "yes" up to the
//! contraindication, which is answered "no", so each flow is accepted.

use std::sync::Arc;

use capi::catalog::load_default_catalog;
use capi::model::QuestionKind;
use capi::{run_batch, Answer, ArchStyle};

fn main() {
    let mut args = std::env::args().skip(1);
    let style: ArchStyle = args
        .next()
        .unwrap_or_else(|| "microservices".into())
        .parse()
        .unwrap_or_else(|e| panic!("{e}"));
    let tree = Arc::new(load_default_catalog().unwrap());

    let answers: Vec<Answer> = match args.next() {
        Some(list) => list
            .split(',')
            .map(|a| a.trim().parse().unwrap_or_else(|e| panic!("{e}")))
            .collect(),
        None => tree
            .flows_for(style)
            .iter()
            .flat_map(|f| &f.questions)
            .map(|q| match q.kind {
                QuestionKind::Indication => Answer::Yes,
                QuestionKind::Contraindication => Answer::No,
            })
            .collect(),
    };

    match run_batch(tree, style, &answers) {
        Ok(result) => {
            print!("{}", result.render_text());
            println!("\n{}", serde_json::to_string(&result).unwrap());
        }
        Err(e) => eprintln!("{e}"),
    }
}
