//! Adds a false positive cap, a model size limit, a sign requirement and an
//! if-then rule, then checks each on the trained model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use supersparse::data::Dataset;
use supersparse::formulate::{build_slim, ConstraintSpec, FeatureRef, SignReq, SlimParams};
use supersparse::milp::{branch_and_bound, SolveOptions};
use supersparse::scoring::{render_table, score};

fn synthetic(n: usize, seed: u64) -> supersparse::Result<Dataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = [2.0, -1.0, 1.5, 0.0, 1.0];
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for _ in 0..n {
        let x: Vec<f64> = (0..w.len()).map(|_| f64::from(rng.gen_bool(0.5) as u8)).collect();
        let s: f64 = x.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() - 1.8 + rng.gen_range(-1.0..1.0);
        rows.push(x);
        labels.push(if s > 0.0 { 1 } else { -1 });
    }
    let names = ["fever", "vaccinated", "contact", "age_over_60", "cough"].map(String::from).to_vec();
    Dataset::new(names, rows, labels)
}

fn main() -> supersparse::Result<()> {
    let data = synthetic(60, 11)?;
    let by_name = |s: &str| FeatureRef::Name(s.to_string());
    let constraints = vec![
        ConstraintSpec::MaxFpr { gamma: 0.05 },
        ConstraintSpec::MaxModelSize { theta: 3 },
        ConstraintSpec::Sign { feature: by_name("vaccinated"), sign: SignReq::Negative },
        ConstraintSpec::IfThen { antecedents: vec![by_name("cough")], consequent: by_name("fever") },
    ];
    let params = SlimParams::new(&data, 0.005, 5, 20);
    let instance = build_slim(&data, &params, &constraints)?;
    let result = branch_and_bound(&instance, &SolveOptions::default().with_time_limit(30.0));
    let model = instance.try_decode(&result)?;
    print!("{}", render_table(&model, None));

    let mut fp = 0;
    for i in data.negative_indices() {
        fp += usize::from(score(&model, data.row(i))? > 0.0);
    }
    let c = model.coefficients();
    println!("status {}", result.status.as_str());
    println!("false positives {fp} of {} (cap {})", data.n_neg(), (0.05 * data.n_neg() as f64).floor());
    println!("model size {} (cap 3)", model.model_size());
    println!("vaccinated coefficient {} (must be ≤ 0)", c[2]);
    println!("cough used {} implies fever used {}", c[5] != 0, c[1] != 0);
    Ok(())
}
