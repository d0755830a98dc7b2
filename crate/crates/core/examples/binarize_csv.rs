//! Converts a CSV with categorical columns (for example the qualitative
//! bankruptcy data, levels P/A/N, class B/NB) into a binary one-hot CSV.
//!
//!     cargo run --example binarize_csv -- Qualitative_Bankruptcy.csv Class B bankruptcy.csv
//!
//! Rows whose label equals the positive class become 1, all others 0.

use std::fs::File;

use supersparse::data::{binarize, read_csv, BinarizationSpec};
use supersparse::Error;

fn relabel(input: &str, label: &str, positive: &str) -> supersparse::Result<Vec<u8>> {
    let file = File::open(input).map_err(|e| Error::Io {
        path: input.into(),
        source: e,
    })?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers = reader.headers()?.clone();
    let col = headers
        .iter()
        .position(|h| h == label)
        .ok_or_else(|| Error::InvalidParameter(format!("no column `{label}`")))?;
    let mut out = csv::Writer::from_writer(Vec::new());
    out.write_record(&headers)?;
    for record in reader.records() {
        let record = record?;
        let row: Vec<&str> = record
            .iter()
            .enumerate()
            .map(|(j, v)| if j != col { v } else if v == positive { "1" } else { "0" })
            .collect();
        out.write_record(row)?;
    }
    out.into_inner().map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn main() -> supersparse::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let [input, label, positive, output] = args.as_slice() else {
        eprintln!("usage: binarize_csv <input.csv> <label column> <positive class> <output.csv>");
        std::process::exit(4);
    };
    let raw = read_csv(relabel(input, label, positive)?.as_slice(), label)?;
    let (data, rules) = binarize(&raw, &BinarizationSpec::new())?;
    data.save_csv(output, label)?;
    println!(
        "{} rows ({} positive), {} rule columns ({} constant)",
        data.n(),
        data.n_pos(),
        rules.rule_count(),
        rules.constant_columns().len()
    );
    for g in &rules.groups {
        let names: Vec<&str> = g.rules.iter().map(|r| r.name.as_str()).collect();
        println!("  {} -> {}", g.source, names.join(", "));
    }
    Ok(())
}
