//! Certifies branch and bound against brute-force enumeration on a small
//! random instance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use supersparse::data::Dataset;
use supersparse::formulate::{build_slim, SlimParams};
use supersparse::milp::{branch_and_bound, exhaustive_oracle, SolveOptions};

fn main() -> supersparse::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (n, p) = (16, 3);
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| f64::from(rng.gen_range(-2i8..=2))).collect()).collect();
    let labels: Vec<i8> = (0..n).map(|_| if rng.gen_bool(0.5) { 1 } else { -1 }).collect();
    let data = Dataset::new((0..p).map(|j| format!("x{j}")).collect(), rows, labels)?;
    let params = SlimParams::new(&data, 0.02, 3, 3);

    let oracle = exhaustive_oracle(&data, &params, &[])?.expect("unconstrained problems are feasible");
    let instance = build_slim(&data, &params, &[])?;
    let result = branch_and_bound(&instance, &SolveOptions::default());
    println!("oracle   {:.9} over {} vectors, argmin {:?}", oracle.objective, oracle.evaluated, oracle.argmin);
    println!("B&B      {:.9} ({}, {} nodes)", result.objective.unwrap_or(f64::NAN), result.status.as_str(), result.nodes);
    Ok(())
}
