//! Builds a model by hand, saves it as JSON, and renders it two ways.

use supersparse::scoring::{render_markdown, render_table, ScoringSystem};

fn main() -> supersparse::Result<()> {
    let names = ["(Intercept)", "odor=none", "gill_size=narrow", "spore_print_color=green", "stalk_surface=smooth"];
    let model = ScoringSystem::new(names.iter().map(|s| s.to_string()).collect(), vec![1, -4, 2, 4, -1])?;
    let path = std::env::temp_dir().join("slim_render_example.json");
    model.save(&path)?;
    let back = ScoringSystem::load(&path)?;
    print!("{}", render_table(&back, Some("POISONOUS")));
    println!();
    print!("{}", render_markdown(&back, Some("POISONOUS")));
    Ok(())
}
