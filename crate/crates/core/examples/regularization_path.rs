//! Sweeps C0, cross-validating each value, and picks the best model.

use supersparse::data::load_csv;
use supersparse::experiment::{best_point, path_csv, regularization_path, OneOrMany, RunConfig};
use supersparse::scoring::render_table;

fn main() -> supersparse::Result<()> {
    let data = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/breastcancer.csv"), "Malignant")?;
    let config = RunConfig {
        c0: Some(OneOrMany::Many(vec![0.1, 0.03, 0.01])),
        folds: 3,
        time_limit: Some(4.0),
        workers: 3,
        ..RunConfig::default()
    };
    let points = regularization_path(&config, &data)?;
    print!("{}", path_csv(&points)?);
    if let Some(best) = best_point(&points) {
        println!("\nbest C0 = {}", points[best].c0);
        if let Some(model) = &points[best].model {
            print!("{}", render_table(model, None));
        }
    }
    Ok(())
}
