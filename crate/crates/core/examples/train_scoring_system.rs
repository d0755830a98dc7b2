//! Trains a SLIM scoring system on the breast cancer biopsy data and prints it.
//!
//!     cargo run --release --example train_scoring_system -- 0.01 30

use supersparse::data::load_csv;
use supersparse::formulate::{build_slim, SlimParams};
use supersparse::milp::{branch_and_bound, SolveOptions};
use supersparse::scoring::{render_table, zero_one_loss};

fn main() -> supersparse::Result<()> {
    let mut args = std::env::args().skip(1);
    let c0: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0.01);
    let seconds: f64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(20.0);

    let data = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/breastcancer.csv"), "Malignant")?;
    let params = SlimParams::new(&data, c0, 10, 100).with_merged_duplicates(true);
    let instance = build_slim(&data, &params, &[])?;
    let result = branch_and_bound(&instance, &SolveOptions::default().with_time_limit(seconds));
    let model = instance.try_decode(&result)?;

    print!("{}", render_table(&model, Some("MALIGNANT")));
    let loss = zero_one_loss(&model, &data)?;
    println!(
        "{}: objective {:.5}, lower bound {:.5}, {} nodes, training error {}/{}",
        result.status.as_str(),
        result.objective.unwrap_or(f64::NAN),
        result.lower_bound,
        result.nodes,
        loss.errors,
        data.n()
    );
    Ok(())
}
