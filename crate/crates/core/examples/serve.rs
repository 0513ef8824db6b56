//! Runs the session service on a random local port and plays one session
//! against it over HTTP.
//!
//!     cargo run --example serve

use std::time::Duration;

use capi::service::{self, ServiceConfig};
use serde_json::{json, Value};

fn main() {
    let dir = tempfile::tempdir().unwrap();
    let config = ServiceConfig {
        addr: "127.0.0.1:0".parse().unwrap(),
        catalog: None,
        log_path: dir.path().join("events.ndjson"),
        session_ttl: Duration::from_secs(3600),
        static_dir: None,
    };
    let state = service::build_state(&config).unwrap();
    let runtime = tokio::runtime::Runtime::new().unwrap();
    let listener = runtime
        .block_on(tokio::net::TcpListener::bind(config.addr))
        .unwrap();
    let base = format!("http://{}", listener.local_addr().unwrap());
    runtime.spawn(async move {
        axum::serve(listener, service::router(state, None))
            .await
            .unwrap();
    });

    let agent = ureq::Agent::new_with_defaults();
    let post = |path: &str, body: Value| -> Value {
        agent
            .post(format!("{base}{path}"))
            .send_json(body)
            .unwrap()
            .body_mut()
            .read_json()
            .unwrap()
    };
    let get = |path: &str| -> Value {
        agent
            .get(format!("{base}{path}"))
            .call()
            .unwrap()
            .body_mut()
            .read_json()
            .unwrap()
    };

    println!("meta: {}", get("/api/tree/meta")["patterns"]);
    let created = post("/api/sessions", json!({ "style": "client-server" }));
    let id = created["session_id"].as_str().unwrap().to_owned();
    println!("session {id}");

    // Prompts do not say which question is the contraindication, so this
    // script just follows a fixed rhythm per flow.
    let mut step = created;
    while step["completed"] == false {
        let progress = &step["prompt"]["progress"];
        let answer = match progress["question_index_in_flow"].as_u64().unwrap() {
            1 if progress["flows_completed"].as_u64().unwrap() % 2 == 0 => "yes",
            1 => "no",
            2 => "yes",
            _ => "no",
        };
        step = post(
            &format!("/api/sessions/{id}/answer"),
            json!({ "answer": answer }),
        );
    }
    let result = get(&format!("/api/sessions/{id}/result"));
    println!("{} patterns suggested:", result["total"]);
    for group in result["groups"].as_array().unwrap() {
        for p in group["patterns"].as_array().unwrap() {
            println!(
                "  {} / {}",
                group["category"]["name"].as_str().unwrap(),
                p["name"].as_str().unwrap()
            );
        }
    }
}
