//! Writes one style's path as Graphviz.
//!
//!     cargo run --example export_dot -- client-server | dot -Tsvg > path.svg

use capi::catalog::load_default_catalog;
use capi::{export_dot, ArchStyle};

fn main() {
    let style: ArchStyle = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "microservices".into())
        .parse()
        .unwrap_or_else(|e| panic!("{e}"));
    print!("{}", export_dot(&load_default_catalog().unwrap(), style));
}
