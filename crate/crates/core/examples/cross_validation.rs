//! Stratified 5-fold cross-validation at one C0.

use supersparse::data::load_csv;
use supersparse::experiment::{cross_validate, metrics_csv, RunConfig};

fn main() -> supersparse::Result<()> {
    let data = load_csv(concat!(env!("CARGO_MANIFEST_DIR"), "/data/breastcancer.csv"), "Malignant")?;
    let config = RunConfig {
        folds: 5,
        time_limit: Some(5.0),
        seed: 7,
        workers: 2,
        ..RunConfig::default()
    };
    let cv = cross_validate(&config, &data, 0.01)?;
    print!("{}", metrics_csv(Some(&cv), None)?);
    let te = cv.test_error();
    println!("test error {:.2}% ± {:.2}%", 100.0 * te.mean, 100.0 * te.sd);
    Ok(())
}
