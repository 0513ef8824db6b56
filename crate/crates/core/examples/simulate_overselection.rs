//! How much does the trailing contraindication shrink the result set when
//! respondents lean towards "yes"?
//!
//!     cargo run --release --example simulate_overselection

use capi::catalog::load_default_catalog;
use capi::simulate::{analytic_profile, monte_carlo_profile, AnswerModel, FlowVariant};
use capi::ArchStyle;

fn main() {
    let tree = load_default_catalog().unwrap();

    println!("expected number of suggested patterns\n");
    println!(
        "{:<15} {:>5} {:>9} {:>9} {:>8}",
        "style", "p_yes", "draft", "revised", "change"
    );
    for style in ArchStyle::ALL {
        for p in [0.3, 0.5, 0.7, 0.9] {
            let model = AnswerModel::uniform(p).unwrap();
            let draft =
                analytic_profile(&tree, style, &model, FlowVariant::Draft).expected_set_size;
            let revised =
                analytic_profile(&tree, style, &model, FlowVariant::Revised).expected_set_size;
            println!(
                "{:<15} {:>5.1} {:>9.3} {:>9.3} {:>7.0}%",
                style.as_str(),
                p,
                draft,
                revised,
                100.0 * (revised - draft) / draft
            );
        }
    }

    let model = AnswerModel::uniform(0.7).unwrap();
    let exact = analytic_profile(
        &tree,
        ArchStyle::Microservices,
        &model,
        FlowVariant::Revised,
    );
    let sampled = monte_carlo_profile(
        &tree,
        ArchStyle::Microservices,
        &model,
        FlowVariant::Revised,
        50_000,
        7,
    )
    .unwrap();
    println!(
        "\nmicroservices, p_yes 0.7: exact {:.4}, sampled {:.4} over 50000 sessions",
        exact.expected_set_size, sampled.expected_set_size
    );
}
