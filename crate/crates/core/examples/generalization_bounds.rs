//! Occam bounds for full and sparse integer lattices, and the coprime density.

use supersparse::theory::{
    coprime_density, full_count, ln_big, max_support, occam_bound, sparse_hypothesis_count,
};

fn main() -> supersparse::Result<()> {
    let (p, n, delta, c0) = (9, 683, 0.05, 0.2);
    println!("P = {p}, N = {n}, δ = {delta}, C0 = {c0} (support ≤ {})", max_support(c0)?);
    println!("{:>5} {:>10} {:>10} {:>10} {:>10} {:>9}", "Λ", "ln|L|", "bound", "ln|H|", "bound", "coprime");
    for lam in [1u64, 2, 5, 10, 20, 50, 100] {
        let full = full_count(p, lam);
        let sparse = sparse_hypothesis_count(p, lam, c0)?;
        println!(
            "{lam:>5} {:>10.3} {:>10.4} {:>10.3} {:>10.4} {:>9.4}",
            ln_big(&full),
            occam_bound(&full, delta, n)?,
            ln_big(&sparse),
            occam_bound(&sparse, delta, n)?,
            coprime_density(p, lam)
        );
    }
    Ok(())
}
